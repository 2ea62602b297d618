"""ADMM solver for the weighted-lasso Whittle problem.

Minimizes, over Hermitian positive-definite matrices ``Phi_1..Phi_M``,

    sum_k [ -ln det Phi_k + Re tr(S_k Phi_k) ]
    + alpha  * sum_k sum_{i != j} w_kij |Phi_k[i, j]|
    + (1-alpha) * m*sqrt(M) * sum_{q != l} w_ql ||Phi^(ql)||_F

by splitting ``Phi = W`` and alternating a closed-form eigenvalue update for
``Phi``, a shrinkage update for ``W``, and a scaled dual ascent, with the
usual residual-balancing step-size adaptation.  The likelihood term keeps
``Phi`` positive definite at every iteration; sparsity lives on ``W``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidConfigError, InvalidInputError, NumericalFailureError
from .penalty import LlaWeights
from .spectral import SpectralStatistics, group_block_norms

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "Residuals",
    "AdmmResult",
    "phi_update",
    "w_update",
    "dual_update",
    "residuals",
    "rho_update",
    "admm_run",
    "whittle_nll",
    "project_pd",
    "soft_threshold",
]

GROUP_PROX_MODES = ("stacked", "per_frequency")


@dataclass(frozen=True)
class AdmmConfig:
    """Step-size, tolerance and iteration settings for one solver run."""

    rho_bar: float = 2.0
    mu_bar: float = 10.0
    tau_abs: float = 1e-4
    tau_rel: float = 1e-4
    t_max: int = 200
    group_prox_mode: str = "stacked"
    debug_checks: bool = False
    track_lagrangian: bool = False

    def __post_init__(self):
        if self.rho_bar <= 0:
            raise InvalidConfigError(f"initial step size rho_bar must be > 0, got {self.rho_bar}")
        if self.mu_bar <= 1:
            raise InvalidConfigError(f"residual-balance factor mu_bar must be > 1, got {self.mu_bar}")
        if self.tau_abs < 0 or self.tau_rel < 0:
            raise InvalidConfigError("tolerances must be >= 0")
        if self.t_max < 1:
            raise InvalidConfigError(f"t_max must be >= 1, got {self.t_max}")
        if self.group_prox_mode not in GROUP_PROX_MODES:
            raise InvalidConfigError(
                f"unknown group_prox_mode {self.group_prox_mode!r}; expected one of {GROUP_PROX_MODES}"
            )


@dataclass
class AdmmState:
    """Iterates of the split problem: primal ``phi``, ``w``, scaled dual ``u``."""

    phi: np.ndarray
    w: np.ndarray
    u: np.ndarray
    rho: float
    t: int = 0


@dataclass(frozen=True)
class Residuals:
    """Primal/dual residuals with their mixed absolute/relative tolerances."""

    d_p: float
    d_d: float
    tau_pri: float
    tau_dual: float

    @property
    def converged(self) -> bool:
        return self.d_p <= self.tau_pri and self.d_d <= self.tau_dual


@dataclass
class AdmmResult:
    """Solver output: final iterates plus bookkeeping.

    ``phi`` is positive definite by construction; ``w`` carries the exact
    zeros.  ``objective`` is the weighted-lasso objective evaluated at ``w``
    (eigenvalues floored to keep the log-determinant finite).
    ``lagrangian_trace`` holds per-iteration (before, after) values of the
    augmented Lagrangian around the two primal updates when tracking is on.
    """

    phi: np.ndarray
    w: np.ndarray
    u: np.ndarray
    rho: float
    iterations: int
    converged: bool
    objective: float
    lagrangian_trace: list = field(default_factory=list)


def _hermitize(mats: np.ndarray) -> np.ndarray:
    return 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))


def _check_hermitian(mat: np.ndarray, name: str, tol: float = 1e-8) -> None:
    dev = np.abs(mat - np.conj(np.swapaxes(mat, -1, -2))).max()
    scale = max(1.0, float(np.abs(mat).max()))
    if dev > tol * scale:
        raise InvalidInputError(f"{name} is not Hermitian within tolerance (deviation {dev:.3e})")


def soft_threshold(a: np.ndarray, thr: np.ndarray) -> np.ndarray:
    """Complex soft threshold: shrink the modulus by ``thr``, keep the phase."""
    absa = np.abs(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(absa > 0, np.maximum(0.0, 1.0 - thr / absa), 0.0)
    return scale * a


def phi_update(s_hat_k: np.ndarray, w_k: np.ndarray, u_k: np.ndarray, rho: float) -> np.ndarray:
    """Closed-form likelihood update at one frequency.

    Solves ``rho * Phi^2 + C * Phi - I = 0`` with ``C = S_k - rho (W_k - U_k)``
    via the eigendecomposition ``C = V J V^H``: the updated eigenvalues are
    ``(-J_ll + sqrt(J_ll^2 + 4 rho)) / (2 rho)``, all strictly positive, so the
    update is positive definite for any Hermitian inputs.
    """
    if rho <= 0:
        raise InvalidInputError(f"step size rho must be > 0, got {rho}")
    for name, mat in (("S_k", s_hat_k), ("W_k", w_k), ("U_k", u_k)):
        _check_hermitian(np.asarray(mat, dtype=complex), name)
    return _phi_update_stack(
        np.asarray(s_hat_k, dtype=complex)[None],
        np.asarray(w_k, dtype=complex)[None],
        np.asarray(u_k, dtype=complex)[None],
        rho,
    )[0]


def _phi_update_stack(s_hat: np.ndarray, w: np.ndarray, u: np.ndarray, rho: float) -> np.ndarray:
    c = _hermitize(s_hat - rho * (w - u))
    eigvals, vecs = np.linalg.eigh(c)
    with np.errstate(over="raise"):
        try:
            new_vals = (-eigvals + np.sqrt(eigvals**2 + 4.0 * rho)) / (2.0 * rho)
        except FloatingPointError as exc:
            raise NumericalFailureError("eigenvalue overflow in likelihood update") from exc
    if not np.all(np.isfinite(new_vals)):
        raise NumericalFailureError("eigenvalue overflow in likelihood update")
    phi = (vecs * new_vals[..., None, :]) @ np.conj(np.swapaxes(vecs, -1, -2))
    return _hermitize(phi)


def w_update(
    a: np.ndarray,
    weights: LlaWeights,
    alpha: float,
    rho: float,
    m: int,
    p: int,
    mode: str = "stacked",
) -> np.ndarray:
    """Shrinkage update: proximal step of the sparse-group penalty at ``a``.

    ``a`` is the stack ``Phi + U``.  Diagonal entries are copied unpenalized;
    every off-diagonal entry is soft-thresholded at ``alpha * w_kij / rho``;
    off-diagonal node blocks are then group-shrunk by
    ``(1 - (1-alpha) m sqrt(M) w_ql / (rho * g))_+`` where ``g`` is the block
    Frobenius norm.  In ``stacked`` mode ``g`` aggregates the block across all
    frequencies (the exact proximal map of the group term, one common factor);
    in ``per_frequency`` mode each frequency is shrunk by its own factor.
    """
    if mode not in GROUP_PROX_MODES:
        raise InvalidConfigError(f"unknown group prox mode {mode!r}")
    a = np.asarray(a, dtype=complex)
    M, d, _ = a.shape
    if d != m * p:
        raise InvalidInputError(f"matrix size {d} does not match m*p={m * p}")
    b = soft_threshold(a, (alpha / rho) * weights.elementwise)

    blocks = b.reshape(M, p, m, p, m)
    sq = (np.abs(blocks) ** 2).sum(axis=(2, 4))  # (M, p, p) block norms squared
    cost = (1.0 - alpha) * m * np.sqrt(M) * weights.groupwise / rho  # (p, p)
    if mode == "stacked":
        g = np.sqrt(sq.sum(axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(g > 0, np.maximum(0.0, 1.0 - cost / g), 0.0)
        factor = np.broadcast_to(factor[None], (M, p, p))
    else:
        g = np.sqrt(sq)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(g > 0, np.maximum(0.0, 1.0 - cost[None] / g), 0.0)
    off_block = ~np.eye(p, dtype=bool)
    scale = np.where(off_block[None], factor, 1.0)
    w = (blocks * scale[:, :, None, :, None]).reshape(M, d, d)

    idx = np.arange(d)
    w[:, idx, idx] = a[:, idx, idx]
    return _hermitize(w)


def dual_update(u: np.ndarray, phi: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Scaled dual ascent ``U <- U + (Phi - W)``."""
    return u + (phi - w)


def _stack_norm(mats: np.ndarray) -> float:
    return float(np.sqrt((np.abs(mats) ** 2).sum()))


def residuals(state: AdmmState, w_prev: np.ndarray, config: AdmmConfig) -> Residuals:
    """Primal/dual residuals of the split and their stopping tolerances.

    The tolerances mix an absolute floor ``m*p*sqrt(M) * tau_abs`` with a
    relative part scaled by the iterate norms; the dual tolerance uses the
    dual-variable norm divided by the step size.
    """
    M, d, _ = state.phi.shape
    dim = d * np.sqrt(M)
    e1 = _stack_norm(state.phi)
    e2 = _stack_norm(state.w)
    e3 = _stack_norm(state.u)
    d_p = _stack_norm(state.phi - state.w)
    d_d = state.rho * _stack_norm(state.w - w_prev)
    tau_pri = dim * config.tau_abs + config.tau_rel * max(e1, e2)
    tau_dual = dim * config.tau_abs + config.tau_rel * e3 / state.rho
    return Residuals(d_p=d_p, d_d=d_d, tau_pri=tau_pri, tau_dual=tau_dual)


def rho_update(
    rho: float, d_p: float, d_d: float, mu_bar: float, u: np.ndarray
) -> tuple[float, np.ndarray]:
    """Residual balancing: double or halve ``rho``, rescaling the dual to match.

    Returns the (possibly unchanged) step size and dual variable.  Ties and
    the all-zero case leave both untouched.
    """
    if d_p > mu_bar * d_d:
        return 2.0 * rho, u / 2.0
    if d_d > mu_bar * d_p:
        return rho / 2.0, 2.0 * u
    return rho, u


def project_pd(mats: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    """Clamp the eigenvalues of a Hermitian stack to a small positive floor."""
    mats = _hermitize(np.asarray(mats, dtype=complex))
    eigvals, vecs = np.linalg.eigh(mats)
    floors = np.maximum(floor * np.abs(eigvals).max(axis=-1, keepdims=True), 1e-12)
    clamped = np.maximum(eigvals, floors)
    return _hermitize((vecs * clamped[..., None, :]) @ np.conj(np.swapaxes(vecs, -1, -2)))


def whittle_nll(phi: np.ndarray, s_hat: np.ndarray) -> float:
    """Frequency-domain negative log-likelihood ``sum_k -ln det Phi_k + Re tr(S_k Phi_k)``."""
    phi = np.asarray(phi, dtype=complex)
    eigvals = np.linalg.eigvalsh(phi)
    if eigvals.min() <= 0:
        raise InvalidInputError("negative log-likelihood requires positive-definite matrices")
    logdets = np.log(eigvals).sum()
    trace = np.einsum("kij,kji->", s_hat, phi)
    return float(-logdets + trace.real)


def _penalized_objective(
    w: np.ndarray, s_hat: np.ndarray, weights: LlaWeights, alpha: float, m: int, p: int
) -> float:
    d = m * p
    off = ~np.eye(d, dtype=bool)
    elem = (weights.elementwise * np.abs(w))[:, off].sum()
    off_p = ~np.eye(p, dtype=bool)
    grp = (weights.groupwise * group_block_norms(w, m, p))[off_p].sum()
    M = w.shape[0]
    nll = whittle_nll(project_pd(w), s_hat)
    return nll + alpha * elem + (1.0 - alpha) * m * np.sqrt(M) * grp


def _aug_lagrangian(
    phi: np.ndarray,
    w: np.ndarray,
    u: np.ndarray,
    rho: float,
    s_hat: np.ndarray,
    weights: LlaWeights,
    alpha: float,
    m: int,
    p: int,
) -> float:
    d = m * p
    off = ~np.eye(d, dtype=bool)
    elem = (weights.elementwise * np.abs(w))[:, off].sum()
    off_p = ~np.eye(p, dtype=bool)
    grp = (weights.groupwise * group_block_norms(w, m, p))[off_p].sum()
    M = w.shape[0]
    quad = (rho / 2.0) * ((np.abs(phi - w + u) ** 2).sum() - (np.abs(u) ** 2).sum())
    return (
        whittle_nll(phi, s_hat)
        + alpha * elem
        + (1.0 - alpha) * m * np.sqrt(M) * grp
        + quad
    )


def admm_run(
    stats: SpectralStatistics,
    weights: LlaWeights,
    alpha: float,
    config: AdmmConfig,
    phi_init: np.ndarray | None = None,
    w_init: np.ndarray | None = None,
    u_init: np.ndarray | None = None,
) -> AdmmResult:
    """Run the solver to convergence or ``t_max`` iterations.

    A cold start uses ``W = U = 0``; warm starts may seed ``W`` (directly or
    from ``phi_init``) and ``U``.  Iterations are deterministic for fixed
    inputs.  The convergence test runs before the step-size adaptation, as
    the residuals and tolerances refer to the step size they were produced
    under.
    """
    s_hat = stats.s_hat
    M, d, _ = s_hat.shape
    m, p = stats.m, stats.p
    if weights.elementwise.shape != s_hat.shape:
        raise InvalidInputError(
            f"elementwise weights shape {weights.elementwise.shape} does not match PSD stack {s_hat.shape}"
        )
    if weights.groupwise.shape != (p, p):
        raise InvalidInputError(
            f"groupwise weights shape {weights.groupwise.shape} does not match p={p}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")

    if w_init is not None:
        w = _hermitize(np.asarray(w_init, dtype=complex).copy())
    elif phi_init is not None:
        w = _hermitize(np.asarray(phi_init, dtype=complex).copy())
    else:
        w = np.zeros((M, d, d), dtype=complex)
    u = (
        np.asarray(u_init, dtype=complex).copy()
        if u_init is not None
        else np.zeros((M, d, d), dtype=complex)
    )
    rho = config.rho_bar

    phi = w
    converged = False
    iterations = 0
    trace: list[tuple[float, float]] = []
    for t in range(config.t_max):
        # The two block minimizations below cannot increase the augmented
        # Lagrangian at the current (U, rho); the dual ascent that follows
        # can.  The trace records (before, after) around the primal steps so
        # that guarantee is checkable (skipping t=0, where Phi=0 is singular).
        track = config.track_lagrangian and t > 0
        if track:
            l_pre = _aug_lagrangian(phi, w, u, rho, s_hat, weights, alpha, m, p)
        phi = _phi_update_stack(s_hat, w, u, rho)
        if config.debug_checks:
            _debug_check_phi(phi, s_hat, w, u, rho)
        w_prev = w
        w = w_update(phi + u, weights, alpha, rho, m, p, config.group_prox_mode)
        if track:
            l_post = _aug_lagrangian(phi, w, u, rho, s_hat, weights, alpha, m, p)
            trace.append((l_pre, l_post))
        u = dual_update(u, phi, w)
        state = AdmmState(phi=phi, w=w, u=u, rho=rho, t=t)
        res = residuals(state, w_prev, config)
        iterations = t + 1
        if res.converged:
            converged = True
            break
        rho, u = rho_update(rho, res.d_p, res.d_d, config.mu_bar, u)

    objective = _penalized_objective(w, s_hat, weights, alpha, m, p)
    return AdmmResult(
        phi=phi,
        w=w,
        u=u,
        rho=rho,
        iterations=iterations,
        converged=converged,
        objective=objective,
        lagrangian_trace=trace,
    )


def _debug_check_phi(phi, s_hat, w, u, rho):
    c = _hermitize(s_hat - rho * (w - u))
    eye = np.eye(phi.shape[-1])
    resid = rho * (phi @ phi) + c @ phi - eye
    scale = max(1.0, float(np.abs(c).max()))
    if np.abs(resid).max() > 1e-7 * scale:
        warnings.warn(
            f"likelihood update stationarity residual {np.abs(resid).max():.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
    if np.linalg.eigvalsh(phi).min() <= 0:
        raise NumericalFailureError("likelihood update lost positive definiteness")
