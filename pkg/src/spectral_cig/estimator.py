"""Penalized Whittle estimation of a conditional-independence graph.

``fit`` turns a multi-attribute series into inverse spectral-density
estimates and a graph: nodes ``q`` and ``l`` share an edge exactly when the
``m x m`` blocks coupling their attributes are nonzero somewhere on the
frequency grid.  Nonconvex penalties are handled by local linear
approximation: each pass solves a weighted-lasso problem whose weights come
from the previous pass, so pass 1 (linearized at zero) is a plain lasso.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import AdmmConfig, AdmmResult, admm_run, project_pd, whittle_nll
from .exceptions import InvalidConfigError, InvalidInputError, SearchFailureError
from .penalty import PenaltySpec, convexity_radius, lla_weights, penalty_value
from .spectral import (
    MultiAttributeSeries,
    SpectralStatistics,
    dft,
    frequency_grid,
    group_block_norms,
    smoothed_psd,
)

__all__ = [
    "FitConfig",
    "FitResult",
    "PrecisionSpectrum",
    "EdgeSet",
    "LambdaGrid",
    "fit",
    "fit_statistics",
    "extract_edges",
    "bic",
    "lambda_grid",
    "penalized_objective",
]

LAMBDA_POLICIES = ("fixed", "bic")


@dataclass(frozen=True)
class PrecisionSpectrum:
    """Inverse-PSD estimates at the grid anchors.

    ``phi[k]`` is the positive-definite likelihood iterate, used for
    log-likelihoods and as a warm start; ``w[k]`` is its sparsified twin
    carrying the exact zeros, used for edges and model-size counts.
    """

    phi: np.ndarray
    w: np.ndarray
    m: int
    p: int

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=complex)
        w = np.asarray(self.w, dtype=complex)
        d = self.m * self.p
        if phi.ndim != 3 or phi.shape[1:] != (d, d) or phi.shape != w.shape:
            raise InvalidInputError(
                f"expected matching (M, {d}, {d}) stacks, got {phi.shape} and {w.shape}"
            )
        for name, mats in (("phi", phi), ("w", w)):
            dev = np.abs(mats - np.conj(np.swapaxes(mats, -1, -2))).max()
            if dev > 1e-8 * max(1.0, float(np.abs(mats).max())):
                raise InvalidInputError(f"{name} stack is not Hermitian within tolerance")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "w", w)

    @property
    def M(self) -> int:
        return self.phi.shape[0]


@dataclass(frozen=True)
class EdgeSet:
    """Undirected graph on ``p`` nodes with one weight per present edge.

    ``weights`` maps ``(q, l)`` with ``q < l`` to the aggregated block norm
    that put the edge in the graph.
    """

    p: int
    weights: dict

    def __post_init__(self):
        for (q, l), w in self.weights.items():
            if not (0 <= q < l < self.p):
                raise InvalidInputError(f"edge ({q}, {l}) is not an ordered pair within p={self.p}")
            if not (w > 0 and np.isfinite(w)):
                raise InvalidInputError(f"edge ({q}, {l}) has non-positive weight {w}")

    @property
    def edges(self) -> frozenset:
        return frozenset(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __contains__(self, pair) -> bool:
        q, l = pair
        return (min(q, l), max(q, l)) in self.weights

    def normalized_weights(self) -> dict:
        """Weights rescaled so the largest is 1 (empty graph stays empty)."""
        if not self.weights:
            return {}
        top = max(self.weights.values())
        return {e: w / top for e, w in self.weights.items()}


def extract_edges(precision: PrecisionSpectrum, gamma: float = 0.0) -> EdgeSet:
    """Threshold aggregated block norms of the sparse iterate into a graph."""
    if gamma < 0:
        raise InvalidInputError(f"edge threshold gamma must be >= 0, got {gamma}")
    norms = group_block_norms(precision.w, precision.m, precision.p)
    weights = {}
    for q in range(precision.p):
        for l in range(q + 1, precision.p):
            if norms[q, l] > gamma:
                weights[(q, l)] = float(norms[q, l])
    return EdgeSet(p=precision.p, weights=weights)


def bic(precision: PrecisionSpectrum, stats: SpectralStatistics) -> float:
    """Information criterion: Whittle deviance plus a log-factor model-size term.

    The likelihood part is ``2K * sum_k(-ln det phi_k + Re tr(S_k phi_k))``
    evaluated on the positive-definite iterate; the complexity part is
    ``ln(2KM)`` times the number of nonzero entries of the sparse iterate.
    """
    K, M = stats.grid.K, stats.M
    if precision.M != M or precision.m * precision.p != stats.dim:
        raise InvalidInputError("precision stack does not match the statistics grid")
    eigvals = np.linalg.eigvalsh(precision.phi)
    if eigvals.min() <= 0 or not np.all(np.isfinite(eigvals)):
        raise InvalidInputError("information criterion requires positive-definite estimates")
    logdets = np.log(eigvals).sum()
    trace = np.einsum("kij,kji->", stats.s_hat, precision.phi)
    if abs(trace.imag) > 1e-8 * max(1.0, abs(trace.real)):
        warnings.warn(
            f"trace term has imaginary residue {trace.imag:.3e}", RuntimeWarning, stacklevel=2
        )
    likelihood = 2.0 * K * (-logdets + trace.real)
    nonzero = int(np.count_nonzero(np.abs(precision.w)))
    return float(likelihood + math.log(2.0 * K * M) * nonzero)


@dataclass(frozen=True)
class FitConfig:
    """Everything ``fit`` needs besides the data.

    ``penalty.lam`` is the level used when ``lambda_policy='fixed'``; under
    the ``'bic'`` policy a data-driven grid of ``grid_size`` levels is scanned
    (descending, warm-started) and the level with the smallest information
    criterion wins.
    """

    penalty: PenaltySpec
    m_t: int
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    lla_iterations: int = 2
    lambda_policy: str = "bic"
    grid_size: int = 10
    gamma: float = 0.0
    warm_start: bool = True

    def __post_init__(self):
        if self.lla_iterations < 1:
            raise InvalidConfigError(f"lla_iterations must be >= 1, got {self.lla_iterations}")
        if self.lambda_policy not in LAMBDA_POLICIES:
            raise InvalidConfigError(
                f"unknown lambda_policy {self.lambda_policy!r}; expected one of {LAMBDA_POLICIES}"
            )
        if self.grid_size < 1:
            raise InvalidConfigError(f"grid_size must be >= 1, got {self.grid_size}")
        if self.gamma < 0:
            raise InvalidConfigError(f"gamma must be >= 0, got {self.gamma}")


@dataclass
class FitResult:
    """Selected estimate with the graph read off it and selection bookkeeping."""

    precision: PrecisionSpectrum
    edges: EdgeSet
    stats: SpectralStatistics
    lam: float
    bic_trace: list
    converged: bool
    lla_passes: int


@dataclass(frozen=True)
class LambdaGrid:
    """Data-driven penalty levels below the empty-graph threshold.

    ``lam_sm`` is (within 5% relative precision) the smallest level whose
    lasso fit has no edges; the grid spans ``[lam_sm/20, lam_sm/2]``
    log-uniformly.
    """

    lam_sm: float
    lam_upper: float
    lam_lower: float
    grid: np.ndarray


def _solve_path(
    stats: SpectralStatistics,
    config: FitConfig,
    lam: float,
    warm: AdmmResult | None = None,
) -> tuple[PrecisionSpectrum, AdmmResult, int]:
    """All LLA passes at one penalty level; returns the final iterates."""
    spec = replace(config.penalty, lam=lam)
    M, d = stats.M, stats.dim
    m, p = stats.m, stats.p
    weights = lla_weights(np.zeros((M, d, d)), spec, m, p)
    result = admm_run(
        stats,
        weights,
        spec.alpha,
        config.admm,
        w_init=warm.w if warm is not None else None,
        u_init=warm.u if warm is not None else None,
    )
    passes = 1 if spec.family == "lasso" else config.lla_iterations
    for _ in range(passes - 1):
        weights = lla_weights(result.w, spec, m, p)
        result = admm_run(
            stats, weights, spec.alpha, config.admm, w_init=result.w, u_init=result.u
        )
    precision = PrecisionSpectrum(phi=result.phi, w=result.w, m=m, p=p)
    return precision, result, passes


def _lasso_edge_count(stats: SpectralStatistics, config: FitConfig, lam: float) -> int:
    lasso = replace(config.penalty, family="lasso", lam=lam)
    cfg = replace(config, penalty=lasso, lla_iterations=1)
    precision, _, _ = _solve_path(stats, cfg, lam)
    return len(extract_edges(precision, gamma=0.0))


def lambda_grid(stats: SpectralStatistics, config: FitConfig) -> LambdaGrid:
    """Locate the no-edge threshold by bisection and hang a grid below it.

    Geometric bisection between a level with edges and one without, run to 5%
    relative width; fails if no bracket exists inside ``[1e-6, 1e6]`` (e.g.
    statistics that are diagonal at every frequency never produce edges).
    """
    lo_limit, hi_limit = 1e-6, 1e6
    offdiag = stats.s_hat.copy()
    idx = np.arange(stats.dim)
    offdiag[:, idx, idx] = 0.0
    scale = float(np.abs(offdiag).max())
    lam = min(max(scale, lo_limit), hi_limit) if scale > 0 else 1.0

    if _lasso_edge_count(stats, config, lam) == 0:
        hi = lam
        lo = lam / 2.0
        while _lasso_edge_count(stats, config, lo) == 0:
            hi = lo
            lo /= 2.0
            if lo < lo_limit:
                raise SearchFailureError(
                    "no penalty level with edges found above 1e-6; statistics look diagonal"
                )
    else:
        lo = lam
        hi = lam * 2.0
        while _lasso_edge_count(stats, config, hi) > 0:
            lo = hi
            hi *= 2.0
            if hi > hi_limit:
                raise SearchFailureError("edges persist at penalty level 1e6; no empty-graph bracket")

    while hi > 1.05 * lo:
        mid = math.sqrt(hi * lo)
        if _lasso_edge_count(stats, config, mid) == 0:
            hi = mid
        else:
            lo = mid
    lam_sm = hi
    lam_upper = lam_sm / 2.0
    lam_lower = lam_upper / 10.0
    grid = np.geomspace(lam_lower, lam_upper, config.grid_size)
    return LambdaGrid(lam_sm=lam_sm, lam_upper=lam_upper, lam_lower=lam_lower, grid=grid)


def fit_statistics(stats: SpectralStatistics, config: FitConfig) -> FitResult:
    """Fit from precomputed spectral statistics (see ``fit`` for the contract)."""
    if config.lambda_policy == "fixed":
        levels = [config.penalty.lam]
    else:
        levels = list(lambda_grid(stats, config).grid[::-1])  # descending: sparse to dense

    best = None
    trace = []
    warm: AdmmResult | None = None
    for lam in levels:
        precision, result, passes = _solve_path(
            stats, config, lam, warm if config.warm_start else None
        )
        if config.warm_start:
            warm = result
        score = bic(precision, stats)
        trace.append((float(lam), float(score)))
        if best is None or score < best[1]:
            best = (precision, score, float(lam), result.converged, passes)

    precision, _, lam, converged, passes = best
    edges = extract_edges(precision, config.gamma)
    radius = convexity_radius(replace(config.penalty, lam=lam), stats.m, stats.M)
    if np.isfinite(radius):
        spectral_norms = np.linalg.norm(precision.phi, ord=2, axis=(1, 2))
        if spectral_norms.max() > radius:
            warnings.warn(
                f"estimate spectral norm {spectral_norms.max():.3g} exceeds the "
                f"convexity radius {radius:.3g}; the local solution may not be unique",
                RuntimeWarning,
                stacklevel=2,
            )
    return FitResult(
        precision=precision,
        edges=edges,
        stats=stats,
        lam=lam,
        bic_trace=trace,
        converged=converged,
        lla_passes=passes,
    )


def fit(series: MultiAttributeSeries, config: FitConfig) -> FitResult:
    """Estimate the conditional-independence graph of a series.

    Reduces the series to smoothed spectral statistics, solves the penalized
    problem at one or several penalty levels, picks the level by the
    configured policy, and thresholds the winning sparse iterate into an
    edge set.  Deterministic for fixed inputs.
    """
    grid = frequency_grid(series.n, config.m_t)
    stats = smoothed_psd(dft(series), grid, m=series.m, p=series.p)
    return fit_statistics(stats, config)


def penalized_objective(
    w: np.ndarray, stats: SpectralStatistics, spec: PenaltySpec
) -> float:
    """Exact penalized objective at a (possibly indefinite) sparse iterate.

    The likelihood term floors the eigenvalues to stay finite; penalty terms
    use the true penalty (not its linearization), summed over ordered pairs.
    """
    m, p = stats.m, stats.p
    w = np.asarray(w, dtype=complex)
    M, d = w.shape[0], m * p
    off = ~np.eye(d, dtype=bool)
    elem = penalty_value(np.abs(w), spec)[:, off].sum()
    off_p = ~np.eye(p, dtype=bool)
    grp = penalty_value(group_block_norms(w, m, p), spec)[off_p].sum()
    nll = whittle_nll(project_pd(w), stats.s_hat)
    return float(nll + spec.alpha * elem + (1.0 - spec.alpha) * m * np.sqrt(M) * grp)
