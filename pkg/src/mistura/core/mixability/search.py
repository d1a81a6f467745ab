"""
Search for the mixability constant.

M(eta) = inf over expert predictions A and mixtures pi of
         sup over predictions p of min_x Mix^{Phi/eta}_x(A, pi) - l_x(p),

so that l is (Phi/eta)-mixable exactly when M(eta) >= 0, and M is
non-increasing in eta. The infimum runs over a coarse product grid followed
by fine windows around the most critical coarse rows; the supremum is the
best-response search of ``mix.py``. The constant eta(l, Phi) is the zero
crossing of M, found by binary search on a log scale.
"""

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from mistura.core.entropies import bregman_array, grad_array
from mistura.core.losses import loss_table
from mistura.core.mixability.mix import (
    MixabilityError,
    _grid_stage,
    best_response_rows,
    entropic_gap_rows,
    mix_rows,
    zoom_rows,
)
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import LossSpec
from mistura.core.models.mixability import (
    DominanceReport,
    EtaSearchResult,
    MEvaluation,
    MixabilityReport,
    MixSearchConfig,
)
from mistura.core.simplex import clamp_rows, grid_array, lattice

logger = logging.getLogger(__name__)

# Interior margin of the mixture grid for Legendre entropies
LEGENDRE_PI_MARGIN = 1e-6


class UndefinedRegretError(MixabilityError):
    """Exception raised when a regret bound is requested for a non-mixable pair."""

    pass


class BracketError(MixabilityError):
    """Exception raised when an eta bracket is unusable."""

    pass


def _running_minimum(samples: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    # M is non-increasing, so any value seen at a smaller eta bounds M from above
    return [(eta, min(v for e, v in samples if e <= eta)) for eta, _ in samples]


@dataclass
class _Rows:
    """A batch of (A, pi) rows with everything M needs precomputed."""

    resolution: int
    A_int: np.ndarray  # (n, K, X) integer compositions
    Pi_int: np.ndarray  # (n, K)
    A: np.ndarray  # (n, K, X)
    Pi: np.ndarray  # (n, K)
    L: np.ndarray  # (n, X, K) loss matrices
    W: np.ndarray  # (n, K) gradients of Phi at pi, unit eta
    extra: np.ndarray  # (n, K + 1, X) expert predictions and their mixture
    spread: np.ndarray  # (n,) largest squared distance between two experts

    def __len__(self) -> int:
        return self.A.shape[0]


class MixabilitySearch:
    """M(eta), its zero crossing and the optimal regret for one (loss, entropy) pair.

    The coarse rows and all eta-independent quantities are built once, so a
    whole bracket search or sweep reuses them.
    """

    def __init__(
        self,
        phi: EntropySpec,
        loss: LossSpec,
        experts: int = 2,
        cfg: Optional[MixSearchConfig] = None,
    ):
        if experts < 1:
            raise MixabilityError("mixability needs at least one expert")
        self.phi = phi.with_dim(experts) if phi.dim is None else phi
        if self.phi.dim != experts:
            raise MixabilityError(f"{phi.label} lives on a {phi.dim}-simplex, not {experts}")
        self.loss = loss
        self.experts = experts
        self.outcomes = loss.outcomes
        self.cfg = cfg or MixSearchConfig()
        if self.cfg.pi_margin is not None:
            self.margin = self.cfg.pi_margin
        else:
            self.margin = LEGENDRE_PI_MARGIN if self.phi.is_legendre else 0.0
        self.coarse = self._product_rows(self._coarse_resolution())
        self._cache: Dict[float, MEvaluation] = {}
        logger.info(
            f"Mixability search for ({loss.label}, {self.phi.label}): "
            f"{len(self.coarse)} coarse rows at resolution {self.coarse.resolution}"
        )

    # ------------------------------------------------------------------
    # Row construction
    # ------------------------------------------------------------------

    def _row_count(self, resolution: int) -> int:
        predictions = math.comb(resolution + self.outcomes - 1, self.outcomes - 1)
        mixtures = math.comb(resolution + self.experts - 1, self.experts - 1)
        return predictions**self.experts * mixtures

    def _coarse_resolution(self) -> int:
        resolution = self.cfg.coarse_resolution
        while resolution > 1 and self._row_count(resolution) > self.cfg.max_rows:
            resolution -= 1
        if resolution != self.cfg.coarse_resolution:
            logger.warning(
                f"Coarse resolution lowered from {self.cfg.coarse_resolution} to {resolution} "
                f"to stay under {self.cfg.max_rows} rows"
            )
        return resolution

    def _product_rows(self, resolution: int) -> _Rows:
        K, X = self.experts, self.outcomes
        predictions = lattice(X, resolution)
        mixtures = lattice(K, resolution)
        shape = (predictions.shape[0],) * K + (mixtures.shape[0],)
        index = np.indices(shape).reshape(K + 1, -1).T
        A_int = predictions[index[:, :K]]
        Pi_int = mixtures[index[:, K]]
        return self._prepare(resolution, A_int, Pi_int)

    def _prepare(self, resolution: int, A_int: np.ndarray, Pi_int: np.ndarray) -> _Rows:
        A = A_int / float(resolution)
        Pi = Pi_int / float(resolution)
        if self.margin > 0.0:
            Pi = clamp_rows(Pi, self.margin)
        n, K, X = A.shape
        L = loss_table(self.loss, A).transpose(0, 2, 1)
        W = grad_array(self.phi, Pi)
        mixture = np.einsum("nk,nkx->nx", Pi, A)
        extra = np.concatenate([A, mixture[:, None, :]], axis=1)
        if K > 1:
            diffs = A[:, :, None, :] - A[:, None, :, :]
            spread = np.square(diffs).sum(axis=3).reshape(n, -1).max(axis=1)
        else:
            spread = np.zeros(n)
        return _Rows(resolution, A_int, Pi_int, A, Pi, L, W, extra, spread)

    def _window_offsets(self) -> np.ndarray:
        K, X = self.experts, self.outcomes
        dims = K * (X - 1) + (K - 1)
        if dims == 0:
            return np.zeros((1, 0), dtype=np.int64)
        scale = self.cfg.fine_resolution / self.coarse.resolution
        by_budget = int((self.cfg.window_budget ** (1.0 / dims) - 1.0) // 2)
        width = max(1, min(math.ceil(scale), by_budget))
        offsets = list(itertools.product(range(-width, width + 1), repeat=dims))
        return np.array(offsets, dtype=np.int64)

    def _window_rows(self, centers: Sequence[int]) -> Optional[_Rows]:
        """Fine-resolution rows around the given coarse rows."""
        if len(centers) == 0:
            return None
        K, X = self.experts, self.outcomes
        fine = self.cfg.fine_resolution
        scale = fine / self.coarse.resolution
        offsets = self._window_offsets()
        split = K * (X - 1)
        blocks = []
        for i in centers:
            a_free = np.rint(self.coarse.A_int[i, :, : X - 1] * scale).astype(np.int64)
            p_free = np.rint(self.coarse.Pi_int[i, : K - 1] * scale).astype(np.int64)
            a = a_free.reshape(-1)[None, :] + offsets[:, :split]
            p = p_free[None, :] + offsets[:, split:]
            a = a.reshape(-1, K, X - 1)
            A_int = np.concatenate([a, fine - a.sum(axis=2, keepdims=True)], axis=2)
            Pi_int = np.concatenate([p, fine - p.sum(axis=1, keepdims=True)], axis=1)
            keep = (A_int >= 0).all(axis=(1, 2)) & (Pi_int >= 0).all(axis=1)
            blocks.append(np.concatenate([A_int[keep].reshape(keep.sum(), -1), Pi_int[keep]], 1))
        keys = np.unique(np.concatenate(blocks), axis=0)
        A_int = keys[:, : K * X].reshape(-1, K, X)
        Pi_int = keys[:, K * X :]
        return self._prepare(fine, A_int, Pi_int)

    def _window_centers(self, values: np.ndarray) -> List[int]:
        """Coarse rows with the lowest value and the lowest value per unit expert spread."""
        k = self.cfg.refine_candidates
        if k == 0:
            return []
        raw = np.argsort(values, kind="stable")[:k]
        spread = self.coarse.spread
        per_spread = np.where(spread > 0, values / np.where(spread > 0, spread, 1.0), np.inf)
        normalized = [i for i in np.argsort(per_spread, kind="stable")[:k] if spread[i] > 0]
        centers: List[int] = []
        for i in list(raw) + normalized:
            if int(i) not in centers:
                centers.append(int(i))
        return centers

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _chunks(self, n: int) -> List[slice]:
        size = self.cfg.chunk_rows
        return [slice(start, min(n, start + size)) for start in range(0, n, size)]

    def _map(self, fn, chunks):
        if self.cfg.workers and self.cfg.workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as executor:
                return list(executor.map(fn, chunks))
        return [fn(chunk) for chunk in chunks]

    def _mix(self, rows: _Rows, eta: float, chunk: slice) -> np.ndarray:
        return mix_rows(self.phi.scaled(eta), rows.L[chunk], rows.W[chunk] / eta, self.cfg.dual)

    def row_values(self, rows: _Rows, eta: float) -> np.ndarray:
        """Refined sup-min value of every row."""

        def evaluate(chunk):
            mix = self._mix(rows, eta, chunk)
            values, _ = best_response_rows(self.loss, mix, rows.extra[chunk], self.cfg)
            return values

        return np.concatenate(self._map(evaluate, self._chunks(len(rows))))

    def _min_value(self, rows: _Rows, eta: float, bound: float) -> Tuple[float, int]:
        """Minimum refined value over rows, refining only rows that can beat ``bound``.

        Grid-stage values bound refined values from below, so rows are refined
        in increasing order of their grid value until none can improve.
        """
        resolution = self.cfg.action_resolution or self.loss.action_resolution

        def grid_stage(chunk):
            mix = self._mix(rows, eta, chunk)
            values, points = _grid_stage(self.loss, mix, rows.extra[chunk], resolution)
            return mix, values, points

        parts = self._map(grid_stage, self._chunks(len(rows)))
        mix = np.concatenate([p[0] for p in parts])
        values = np.concatenate([p[1] for p in parts])
        points = np.concatenate([p[2] for p in parts])
        order = np.argsort(values, kind="stable")
        best, best_row = bound, -1
        for batch in self._chunks(len(order)):
            idx = order[batch]
            if values[idx[0]] >= best:
                break
            refined, _ = zoom_rows(
                self.loss, mix[idx], points[idx], values[idx], 1.0 / resolution, self.cfg
            )
            j = int(np.argmin(refined))
            if refined[j] < best:
                best, best_row = float(refined[j]), int(idx[j])
        return best, best_row

    def evaluate(self, eta: float) -> MEvaluation:
        """M(eta) with the row attaining it."""
        if eta <= 0:
            raise MixabilityError(f"eta must be positive, got {eta}")
        if eta in self._cache:
            return self._cache[eta]
        coarse_values = self.row_values(self.coarse, eta)
        i = int(np.argmin(coarse_values))
        value, rows, row = float(coarse_values[i]), self.coarse, i
        windows = self._window_rows(self._window_centers(coarse_values))
        if windows is not None:
            fine_value, fine_row = self._min_value(windows, eta, value)
            if fine_row >= 0:
                value, rows, row = fine_value, windows, fine_row
        result = MEvaluation(
            eta=eta,
            value=value,
            worst_predictions=tuple(tuple(float(v) for v in a) for a in rows.A[row]),
            worst_mixture=tuple(float(v) for v in rows.Pi[row]),
            rows=len(self.coarse) + (len(windows) if windows is not None else 0),
        )
        logger.debug(f"M({eta:.6g}) = {value:.3e} over {result.rows} rows")
        self._cache[eta] = result
        return result

    def M(self, eta: float) -> float:
        return self.evaluate(eta).value

    def scan(self, etas: Sequence[float]) -> List[float]:
        """M on a common row set for a whole sweep, hence non-increasing in eta."""
        etas = [float(e) for e in etas]
        coarse = [self.row_values(self.coarse, eta) for eta in etas]
        centers: List[int] = []
        for values in coarse:
            for i in self._window_centers(values):
                if i not in centers:
                    centers.append(i)
        windows = self._window_rows(centers)
        result = []
        for eta, values in zip(etas, coarse):
            value = float(values.min())
            if windows is not None:
                value, _ = self._min_value(windows, eta, value)
            result.append(value)
        return result

    def is_mixable(self, eta: float) -> bool:
        return self.M(eta) >= -self.cfg.mixable_tolerance

    def eta_star(
        self, eta_lo: Optional[float] = None, eta_hi: Optional[float] = None
    ) -> EtaSearchResult:
        """Binary search on a log scale for sup {eta : M(eta) >= 0}.

        A bracket that does not contain the crossing is reported through the
        status rather than extrapolated. Recorded samples carry the smallest
        M over evaluated etas at or below their own, which keeps them
        non-increasing in eta.

        Raises:
            BracketError: If the bracket is empty or not positive
        """
        lo = self.cfg.eta_lo if eta_lo is None else eta_lo
        hi = self.cfg.eta_hi if eta_hi is None else eta_hi
        if not 0.0 < lo < hi:
            raise BracketError(f"eta bracket [{lo:g}, {hi:g}] must satisfy 0 < lo < hi")
        samples: List[Tuple[float, float]] = []

        def probe(eta: float) -> bool:
            value = self.M(eta)
            samples.append((eta, value))
            return value >= -self.cfg.mixable_tolerance

        if not probe(lo):
            logger.info(f"({self.loss.label}, {self.phi.label}): M(eta_lo) < 0, eta* = 0")
            return EtaSearchResult(
                eta_star=0.0, status="not_mixable", samples=_running_minimum(samples)
            )
        if probe(hi):
            logger.info(f"({self.loss.label}, {self.phi.label}): mixable at eta_hi = {hi:g}")
            return EtaSearchResult(
                eta_star=hi, status="lower_bound", samples=_running_minimum(samples)
            )
        iterations = 0
        while hi / lo - 1.0 > self.cfg.eta_tolerance:
            mid = math.sqrt(lo * hi)
            if probe(mid):
                lo = mid
            else:
                hi = mid
            iterations += 1
        eta = math.sqrt(lo * hi)
        logger.info(
            f"({self.loss.label}, {self.phi.label}): eta* = {eta:.4g} after {iterations} steps"
        )
        return EtaSearchResult(
            eta_star=eta,
            status="bracketed",
            samples=_running_minimum(samples),
            iterations=iterations,
        )

    def entropic_gap(self) -> float:
        """sup over the coarse rows of F*(-Mix) for the loss entropy F."""
        if self.loss.kind != "proper":
            raise MixabilityError("the entropic form needs a proper loss built from an entropy")
        F = self.loss.entropy

        def evaluate(chunk):
            gaps = entropic_gap_rows(
                F, self.phi, self.coarse.L[chunk], self.coarse.W[chunk], self.cfg.dual
            )
            return float(gaps.max())

        return max(self._map(evaluate, self._chunks(len(self.coarse))))


def scan_M(
    etas: Sequence[float],
    phi: EntropySpec,
    loss: LossSpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
) -> List[float]:
    """M over an eta sweep on one shared row set."""
    return MixabilitySearch(phi, loss, experts, cfg).scan(etas)


def divergence_radius(
    phi: EntropySpec, K: int, resolution: int = 200, margin: Optional[float] = None
) -> Tuple[float, float]:
    """inf_mu max_theta D_Phi(delta_theta, mu) on a grid, and its value at the uniform mixture.

    Returns:
        Tuple of (grid infimum, uniform value)
    """
    if margin is None:
        margin = LEGENDRE_PI_MARGIN if phi.is_legendre else 0.0
    vertices = np.eye(K)
    uniform = np.full((1, K), 1.0 / K)
    at_uniform = float(max(bregman_array(phi, vertices[t][None], uniform)[0] for t in range(K)))
    grid = grid_array(K, resolution, margin)
    worst = np.max(np.stack([bregman_array(phi, vertices[t][None], grid) for t in range(K)]), 0)
    return min(float(worst.min()), at_uniform), at_uniform


def analyze(
    phi: EntropySpec,
    loss: LossSpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
    notes: Optional[List[str]] = None,
) -> MixabilityReport:
    """eta(l, Phi), M samples and the optimal regret bound of one pair."""
    started = time.perf_counter()
    search = MixabilitySearch(phi, loss, experts, cfg)
    result = search.eta_star()
    regret = regret_uniform = regret_grid = regret_gap = None
    if result.eta_star > 0.0:
        grid_inf, at_uniform = divergence_radius(
            search.phi, experts, search.cfg.regret_resolution
        )
        regret = grid_inf / result.eta_star
        regret_uniform = at_uniform / result.eta_star
        regret_grid = regret
        regret_gap = regret_uniform - regret_grid
    return MixabilityReport(
        loss=loss.label,
        entropy=phi.label,
        loss_spec=loss.to_dict(),
        entropy_spec=phi.to_dict(),
        experts=experts,
        eta_star=result.eta_star,
        status=result.status,
        samples=result.samples,
        regret=regret,
        regret_uniform=regret_uniform,
        regret_grid=regret_grid,
        regret_gap=regret_gap,
        grid=search.cfg.metadata()
        | {"coarse_rows": len(search.coarse), "pi_margin": search.margin},
        notes=list(notes or []),
        seconds=time.perf_counter() - started,
    )


def M(
    eta: float,
    phi: EntropySpec,
    loss: LossSpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
) -> float:
    """M(eta) for one pair; build a MixabilitySearch to reuse rows across calls."""
    return MixabilitySearch(phi, loss, experts, cfg).M(eta)


def eta_star(
    phi: EntropySpec,
    loss: LossSpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
) -> EtaSearchResult:
    """The mixability constant eta(l, Phi)."""
    return MixabilitySearch(phi, loss, experts, cfg).eta_star()


def optimal_regret(
    phi: EntropySpec,
    loss: LossSpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
) -> float:
    """R = eta(l, Phi)^-1 inf_mu sup_theta D_Phi(delta_theta, mu).

    Raises:
        UndefinedRegretError: If l is not Phi-mixable for any eta in the bracket
    """
    report = analyze(phi, loss, cfg, experts)
    if report.regret is None:
        raise UndefinedRegretError(f"{loss.label} is not {phi.label}-mixable, eta* = 0")
    return report.regret


def entropic_mixability_gap(
    F: EntropySpec,
    phi: EntropySpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
    outcomes: int = 2,
) -> float:
    """sup over (P, mu) of F*(-Mix); the entropy F is Phi-mixable iff this is <= tolerance."""
    loss = LossSpec(kind="proper", entropy=F, outcomes=outcomes)
    return MixabilitySearch(phi, loss, experts, cfg).entropic_gap()


def dominance(
    phi: EntropySpec,
    psi: EntropySpec,
    loss: LossSpec,
    cfg: Optional[MixSearchConfig] = None,
    experts: int = 2,
) -> DominanceReport:
    """Compare Phi and Psi for a loss through their optimal regret bounds.

    Raises:
        UndefinedRegretError: If either entropy admits no mixability constant
    """
    cfg = cfg or MixSearchConfig()
    r_phi = optimal_regret(phi, loss, cfg, experts)
    r_psi = r_phi if psi == phi else optimal_regret(psi, loss, cfg, experts)
    relative = 2.0 * cfg.eta_tolerance + 1.0 / cfg.fine_resolution
    uncertainty = relative * (r_phi + r_psi)
    if abs(r_phi - r_psi) <= uncertainty:
        relation = "="
    elif r_phi < r_psi:
        relation = ">="
    else:
        relation = "<="
    return DominanceReport(
        loss=loss.label,
        phi=phi.label,
        psi=psi.label,
        regret_phi=r_phi,
        regret_psi=r_psi,
        uncertainty=uncertainty,
        relation=relation,
    )
