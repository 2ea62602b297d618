"""Synthetic VAR benchmarks with known conditional-independence graphs.

A benchmark instance is a stable VAR(L) process ``x(t) = sum_i A_i x(t-i) + w(t)``
with innovation precision ``prec``.  Its inverse spectral density has the
closed form ``S(f)^{-1} = G(f)^H prec G(f)`` with ``G(f) = I - sum_i A_i
exp(-i 2 pi f i)``, so the true graph can be read off without estimation.

Two standard constructions are provided.  Model 1 couples attributes within
each node through the innovation precision and couples nodes within disjoint
clusters through the VAR coefficients, so no edge ever crosses a cluster
boundary.  Model 2 adds sparse random node-pair couplings to the precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .estimator import EdgeSet
from .exceptions import InvalidInputError
from .spectral import MultiAttributeSeries, group_block_norms

__all__ = [
    "VarModel",
    "GroundTruth",
    "model1_precision",
    "model2_precision",
    "gen_var_coefficients",
    "companion_spectral_radius",
    "make_model",
    "simulate_var",
    "true_psd",
    "true_edges",
]

STABILITY_LIMIT = 0.95
MIN_EIGENVALUE = 0.5


@dataclass(frozen=True)
class VarModel:
    """A stable VAR process on ``p`` nodes with ``m`` attributes each.

    ``coefficients[i]`` is the lag-``i+1`` matrix; ``precision`` is the
    innovation precision (symmetric, smallest eigenvalue at least 0.5) and
    the companion spectral radius stays within the stability limit.
    """

    coefficients: tuple
    precision: np.ndarray
    p: int
    m: int

    def __post_init__(self):
        d = self.m * self.p
        coeffs = tuple(np.asarray(a, dtype=float) for a in self.coefficients)
        if not coeffs:
            raise InvalidInputError("a VAR model needs at least one lag matrix")
        for a in coeffs:
            if a.shape != (d, d):
                raise InvalidInputError(f"lag matrix shape {a.shape} does not match m*p={d}")
        prec = np.asarray(self.precision, dtype=float)
        if prec.shape != (d, d):
            raise InvalidInputError(f"precision shape {prec.shape} does not match m*p={d}")
        if np.abs(prec - prec.T).max() > 1e-10 * max(1.0, np.abs(prec).max()):
            raise InvalidInputError("innovation precision must be symmetric")
        min_eig = float(np.linalg.eigvalsh(prec).min())
        if min_eig < MIN_EIGENVALUE - 1e-9:
            raise InvalidInputError(
                f"innovation precision min eigenvalue {min_eig:.4f} below {MIN_EIGENVALUE}"
            )
        radius = companion_spectral_radius(coeffs)
        if radius > STABILITY_LIMIT + 1e-9:
            raise InvalidInputError(f"companion spectral radius {radius:.4f} exceeds stability limit")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "precision", prec)

    @property
    def n_lags(self) -> int:
        return len(self.coefficients)

    @property
    def dim(self) -> int:
        return self.m * self.p


@dataclass(frozen=True)
class GroundTruth:
    """A model together with its exact graph and spectral density."""

    model: VarModel
    edges: EdgeSet

    def psd(self, f: float) -> np.ndarray:
        return true_psd(self.model, f)


def model1_precision(p: int, m: int) -> np.ndarray:
    """Within-node attribute coupling: per-node blocks with entries ``0.5^|u-v|``.

    Off-diagonal entries of each ``m x m`` node block are ``0.5^|u-v|``; all
    other entries start at zero and the diagonal is shifted so the smallest
    eigenvalue lands exactly at 0.5.
    """
    if p < 1 or m < 1:
        raise InvalidInputError("p and m must be positive")
    block = 0.5 ** np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    np.fill_diagonal(block, 0.0)
    base = np.kron(np.eye(p), block)
    shift = MIN_EIGENVALUE - float(np.linalg.eigvalsh(base).min())
    return base + shift * np.eye(m * p)


def model2_precision(
    p: int,
    m: int,
    rng: np.random.Generator,
    p_er: float = 0.002,
    value_range: tuple = (0.1, 0.4),
) -> np.ndarray:
    """Sparse random node-pair couplings for the innovation precision.

    Each unordered node pair independently receives a full ``m x m`` coupling
    block with probability ``p_er``; entries are uniform on
    ``[-hi, -lo] U [lo, hi]``.  The result is a symmetric addend with zero
    node-diagonal blocks.
    """
    if not 0.0 <= p_er <= 1.0:
        raise InvalidInputError(f"pair probability p_er must lie in [0, 1], got {p_er}")
    lo, hi = value_range
    if not 0 < lo <= hi:
        raise InvalidInputError(f"value range must satisfy 0 < lo <= hi, got {value_range}")
    d = m * p
    out = np.zeros((d, d))
    for q in range(p):
        for l in range(q + 1, p):
            if rng.random() >= p_er:
                continue
            mag = rng.uniform(lo, hi, size=(m, m))
            sign = rng.integers(0, 2, size=(m, m)) * 2 - 1
            block = mag * sign
            out[q * m : (q + 1) * m, l * m : (l + 1) * m] = block
            out[l * m : (l + 1) * m, q * m : (q + 1) * m] = block.T
    return out


def companion_spectral_radius(coefficients) -> float:
    """Spectral radius of the companion matrix of the lag polynomial."""
    coeffs = [np.asarray(a, dtype=float) for a in coefficients]
    d = coeffs[0].shape[0]
    L = len(coeffs)
    top = np.hstack(coeffs)
    if L == 1:
        companion = top
    else:
        lower = np.hstack([np.eye(d * (L - 1)), np.zeros((d * (L - 1), d))])
        companion = np.vstack([top, lower])
    return float(np.abs(np.linalg.eigvals(companion)).max())


def gen_var_coefficients(
    blocks: int,
    block_size: int,
    n_lags: int,
    density: float,
    rng: np.random.Generator,
    value_range: tuple = (-0.6, 0.6),
) -> tuple:
    """Block-diagonal sparse lag matrices, rescaled into the stable region.

    Each lag matrix is block diagonal with ``blocks`` blocks of size
    ``block_size``; within a block, each entry is nonzero with probability
    ``density`` and uniform on ``value_range``.  If the companion spectral
    radius ``r`` exceeds the stability limit, lag ``i`` is scaled by
    ``(limit / r)**i``, which scales every companion eigenvalue by
    ``limit / r`` and lands the radius exactly on the limit.
    """
    if not 0.0 <= density <= 1.0:
        raise InvalidInputError(f"density must lie in [0, 1], got {density}")
    if blocks < 1 or block_size < 1 or n_lags < 1:
        raise InvalidInputError("blocks, block_size and n_lags must be positive")
    d = blocks * block_size
    coeffs = []
    for _ in range(n_lags):
        a = np.zeros((d, d))
        for b in range(blocks):
            sl = slice(b * block_size, (b + 1) * block_size)
            mask = rng.random((block_size, block_size)) < density
            vals = rng.uniform(value_range[0], value_range[1], size=(block_size, block_size))
            a[sl, sl] = mask * vals
        coeffs.append(a)
    radius = companion_spectral_radius(coeffs)
    if radius > STABILITY_LIMIT:
        shrink = STABILITY_LIMIT / radius
        coeffs = [a * shrink ** (i + 1) for i, a in enumerate(coeffs)]
    return tuple(coeffs)


def make_model(
    model: int,
    p: int,
    m: int,
    rng: np.random.Generator,
    n_lags: int = 3,
    clusters: int = 8,
    density: float = 0.1,
    coeff_range: tuple = (-0.6, 0.6),
    p_er: float = 0.002,
    value_range: tuple = (0.1, 0.4),
) -> VarModel:
    """Draw one benchmark instance of the given construction (1 or 2).

    VAR dynamics couple nodes only within clusters: the lag matrices are
    block diagonal over ``clusters`` groups of ``p / clusters`` nodes.  Model
    2 additionally perturbs the innovation precision with sparse node-pair
    couplings, re-shifting the diagonal if the smallest eigenvalue drops
    below 0.5.
    """
    if model not in (1, 2):
        raise InvalidInputError(f"model must be 1 or 2, got {model}")
    if clusters < 1 or p % clusters != 0:
        raise InvalidInputError(f"p={p} must be divisible by the cluster count {clusters}")
    prec = model1_precision(p, m)
    if model == 2:
        prec = prec + model2_precision(p, m, rng, p_er=p_er, value_range=value_range)
        min_eig = float(np.linalg.eigvalsh(prec).min())
        if min_eig < MIN_EIGENVALUE:
            prec = prec + (MIN_EIGENVALUE - min_eig) * np.eye(m * p)
    coeffs = gen_var_coefficients(
        blocks=clusters,
        block_size=(p // clusters) * m,
        n_lags=n_lags,
        density=density,
        rng=rng,
        value_range=coeff_range,
    )
    return VarModel(coefficients=coeffs, precision=prec, p=p, m=m)


def simulate_var(
    model: VarModel, n: int, rng: np.random.Generator, burn_in: int = 100
) -> MultiAttributeSeries:
    """Draw ``n`` points of the process after discarding a zero-started burn-in."""
    if n < 1:
        raise InvalidInputError(f"sample length must be positive, got {n}")
    if burn_in < 0:
        raise InvalidInputError(f"burn-in must be >= 0, got {burn_in}")
    d = model.dim
    eigvals, vecs = np.linalg.eigh(model.precision)
    cov_half = (vecs / np.sqrt(eigvals)) @ vecs.T  # symmetric square root of precision^-1
    total = burn_in + n
    innovations = rng.standard_normal((total, d)) @ cov_half.T
    x = np.zeros((total, d))
    coeffs = model.coefficients
    for t in range(total):
        acc = innovations[t].copy()
        for i, a in enumerate(coeffs, start=1):
            if t - i >= 0:
                acc += a @ x[t - i]
        x[t] = acc
    return MultiAttributeSeries(data=x[burn_in:], p=model.p, m=model.m)


def _transfer(model: VarModel, f: float) -> np.ndarray:
    d = model.dim
    g = np.eye(d, dtype=complex)
    for i, a in enumerate(model.coefficients, start=1):
        g = g - a * np.exp(-2j * np.pi * f * i)
    return g


def true_psd(model: VarModel, f: float) -> np.ndarray:
    """Exact spectral density ``H(f) prec^{-1} H(f)^H`` with ``H = G^{-1}``."""
    g = _transfer(model, f)
    cond = np.linalg.cond(g)
    if cond > 1e12:
        warnings.warn(
            f"transfer matrix nearly singular at f={f} (cond {cond:.2e})",
            RuntimeWarning,
            stacklevel=2,
        )
    h = np.linalg.inv(g)
    cov = np.linalg.inv(model.precision)
    psd = h @ cov @ np.conj(h.T)
    return 0.5 * (psd + np.conj(psd.T))


def true_edges(model: VarModel, f_step: float = 0.01, rel_threshold: float = 1e-2) -> EdgeSet:
    """Read the exact graph off the inverse spectral density.

    The inverse density is ``G(f)^H prec G(f)`` (no matrix inversion needed).
    Node-pair block norms are aggregated over ``f = 0, f_step, ..., 0.5``,
    and a pair is an edge when its aggregate exceeds ``rel_threshold`` times
    the largest aggregate.
    """
    if f_step <= 0 or f_step > 0.5:
        raise InvalidInputError(f"frequency step must lie in (0, 0.5], got {f_step}")
    freqs = np.arange(0.0, 0.5 + f_step / 2.0, f_step)
    inv_psds = np.empty((len(freqs), model.dim, model.dim), dtype=complex)
    for i, f in enumerate(freqs):
        g = _transfer(model, f)
        inv_psds[i] = np.conj(g.T) @ model.precision @ g
    norms = group_block_norms(inv_psds, model.m, model.p)
    off = ~np.eye(model.p, dtype=bool)
    cutoff = rel_threshold * float(norms[off].max()) if model.p > 1 else 0.0
    weights = {}
    for q in range(model.p):
        for l in range(q + 1, model.p):
            if norms[q, l] > cutoff:
                weights[(q, l)] = float(norms[q, l])
    return EdgeSet(p=model.p, weights=weights)
