"""
The published 2 experts x 2 outcomes mixability table.

Columns are entropies, rows are losses and each cell holds the optimal
regret bound and the mixability constant, ``regret (eta*)``.
"""

from typing import Dict, List, Tuple

from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import LossSpec

Cell = Tuple[float, float]

# Notes attached to reports of the rows whose labels need a convention
QUADRATIC_ROW_NOTE = (
    "l^Q is the proper loss of Q/2 (quadratic entropy at eta=2); "
    "the proper loss of Q itself halves every eta* in this row"
)
RENYI_ROW_NOTE = (
    "row labelled l^{R_.5}: Renyi entropies are only defined for alpha in (-1, 0), "
    "so the row is computed with alpha=-0.5"
)


def table_entropies() -> List[EntropySpec]:
    """Column entropies H, S_-.1, S_-.5, S_-.9, R_-.1, R_-.5, R_-.9."""
    columns = [EntropySpec(kind="shannon")]
    columns += [EntropySpec(kind="tsallis", alpha=a) for a in (-0.1, -0.5, -0.9)]
    columns += [EntropySpec(kind="renyi", alpha=a) for a in (-0.1, -0.5, -0.9)]
    return columns


def table_losses() -> Dict[str, LossSpec]:
    """Row losses keyed by their display name."""
    return {
        "log": LossSpec(kind="log"),
        "l^Q": LossSpec(kind="proper", entropy=EntropySpec(kind="quadratic", eta=2.0)),
        "l^S_-0.5": LossSpec(kind="proper", entropy=EntropySpec(kind="tsallis", alpha=-0.5)),
        "l^R_-0.5": LossSpec(kind="proper", entropy=EntropySpec(kind="renyi", alpha=-0.5)),
    }


def row_notes(row: str) -> List[str]:
    if row == "l^Q":
        return [QUADRATIC_ROW_NOTE]
    if row == "l^R_-0.5":
        return [RENYI_ROW_NOTE]
    return []


# (regret, eta*) as published, keyed by (row, column label)
EXPECTED_CELLS: Dict[Tuple[str, str], Cell] = {
    ("log", "H"): (0.69, 1.0),
    ("log", "S_-0.1"): (0.74, 0.97),
    ("log", "S_-0.5"): (1.17, 0.71),
    ("log", "S_-0.9"): (5.15, 0.19),
    ("log", "R_-0.1"): (0.77, 0.9),
    ("log", "R_-0.5"): (1.38, 0.5),
    ("log", "R_-0.9"): (6.92, 0.1),
    ("l^Q", "H"): (0.34, 2.0),
    ("l^Q", "S_-0.1"): (0.37, 1.9),
    ("l^Q", "S_-0.5"): (0.58, 1.4),
    ("l^Q", "S_-0.9"): (2.57, 0.4),
    ("l^Q", "R_-0.1"): (0.38, 1.8),
    ("l^Q", "R_-0.5"): (0.69, 1.0),
    ("l^Q", "R_-0.9"): (3.45, 0.2),
    ("l^S_-0.5", "H"): (0.49, 1.4),
    ("l^S_-0.5", "S_-0.1"): (0.53, 1.4),
    ("l^S_-0.5", "S_-0.5"): (0.82, 1.0),
    ("l^S_-0.5", "S_-0.9"): (3.64, 0.26),
    ("l^S_-0.5", "R_-0.1"): (0.54, 1.3),
    ("l^S_-0.5", "R_-0.5"): (0.98, 0.71),
    ("l^S_-0.5", "R_-0.9"): (4.90, 0.14),
    ("l^R_-0.5", "H"): (0.34, 2.0),
    ("l^R_-0.5", "S_-0.1"): (0.37, 1.9),
    ("l^R_-0.5", "S_-0.5"): (0.58, 1.4),
    ("l^R_-0.5", "S_-0.9"): (2.57, 0.37),
    ("l^R_-0.5", "R_-0.1"): (0.38, 1.8),
    ("l^R_-0.5", "R_-0.5"): (0.69, 1.0),
    ("l^R_-0.5", "R_-0.9"): (3.46, 0.2),
}


def table_presets() -> Tuple[List[EntropySpec], Dict[str, LossSpec], Dict[Tuple[str, str], Cell]]:
    """Entropies, losses and published cells of the 2x2 table."""
    return table_entropies(), table_losses(), dict(EXPECTED_CELLS)
