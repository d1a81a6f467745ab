from mistura.core.mixability.mix import (
    MixabilityError,
    best_response_rows,
    entropic_gap_rows,
    find_best_response,
    mix_dual,
    mix_inf,
    mix_rows,
)
from mistura.core.mixability.presets import (
    EXPECTED_CELLS,
    row_notes,
    table_presets,
    table_entropies,
    table_losses,
)
from mistura.core.mixability.search import (
    BracketError,
    M,
    MixabilitySearch,
    UndefinedRegretError,
    analyze,
    divergence_radius,
    dominance,
    entropic_mixability_gap,
    eta_star,
    optimal_regret,
    scan_M,
)

__all__ = [
    "BracketError",
    "EXPECTED_CELLS",
    "M",
    "MixabilityError",
    "MixabilitySearch",
    "UndefinedRegretError",
    "analyze",
    "best_response_rows",
    "divergence_radius",
    "dominance",
    "entropic_gap_rows",
    "entropic_mixability_gap",
    "eta_star",
    "find_best_response",
    "mix_dual",
    "mix_inf",
    "mix_rows",
    "optimal_regret",
    "row_notes",
    "scan_M",
    "table_presets",
    "table_entropies",
    "table_losses",
]
