"""Sparsity penalties and their local-linear-approximation weights.

Three scalar penalty families are supported, all acting on the modulus of a
complex entry or on a group Frobenius norm:

* ``lasso``:   lam * |u|
* ``logsum``:  lam * eps * ln(1 + |u| / eps)
* ``scad``:    the three-branch quadratic spline with knees at lam and a*lam

Each family is mu-amenable: penalty(u) + (mu/2) u^2 is convex with mu = 0
(lasso), 1/(a-1) (scad) and lam/eps (logsum).  The derivative at 0+ equals
lam for every family, so a local linear approximation started at zero reduces
to an ordinary weighted lasso on the first pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError

__all__ = [
    "PenaltySpec",
    "LlaWeights",
    "penalty_value",
    "penalty_derivative",
    "amenability_mu",
    "convexity_radius",
    "lla_weights",
    "PENALTY_FAMILIES",
]

PENALTY_FAMILIES = ("lasso", "logsum", "scad")


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family with its level ``lam`` and family parameters.

    ``alpha`` splits the penalty between individual entries (weight
    ``alpha``) and node-pair groups (weight ``1 - alpha``).  ``eps`` only
    matters for ``logsum`` and ``a`` only for ``scad``; both keep their
    published defaults otherwise.
    """

    family: str
    lam: float
    alpha: float = 0.05
    eps: float = 1e-4
    a: float = 3.7

    def __post_init__(self):
        if self.family not in PENALTY_FAMILIES:
            raise InvalidInputError(
                f"unknown penalty family {self.family!r}; expected one of {PENALTY_FAMILIES}"
            )
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidInputError(f"penalty level lam must be >= 0, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.family == "logsum" and self.eps <= 0:
            raise InvalidInputError(f"logsum requires eps > 0, got {self.eps}")
        if self.family == "scad" and self.a <= 2:
            raise InvalidInputError(f"scad requires a > 2, got {self.a}")


def penalty_value(u, spec: PenaltySpec):
    """Evaluate the penalty at ``|u|`` (elementwise over arrays)."""
    u = np.abs(np.asarray(u, dtype=float))
    lam = spec.lam
    if spec.family == "lasso":
        out = lam * u
    elif spec.family == "logsum":
        out = lam * spec.eps * np.log1p(u / spec.eps)
    else:  # scad
        a = spec.a
        inner = lam * u
        middle = (2 * a * lam * u - u**2 - lam**2) / (2 * (a - 1))
        outer = np.full_like(u, lam**2 * (a + 1) / 2)
        out = np.where(u <= lam, inner, np.where(u <= a * lam, middle, outer))
    return out if out.ndim else float(out)


def penalty_derivative(u, spec: PenaltySpec):
    """Right derivative of the penalty at ``|u|`` (elementwise over arrays).

    Always lies in ``[0, lam]`` with value ``lam`` at 0, which is what makes
    the first local-linearization pass a plain lasso.
    """
    u = np.abs(np.asarray(u, dtype=float))
    lam = spec.lam
    if spec.family == "lasso":
        out = np.full_like(u, lam)
    elif spec.family == "logsum":
        out = lam * spec.eps / (u + spec.eps)
    else:  # scad
        a = spec.a
        middle = np.maximum(a * lam - u, 0.0) / (a - 1)
        out = np.where(u <= lam, lam, np.minimum(middle, lam))
    return out if out.ndim else float(out)


def amenability_mu(spec: PenaltySpec) -> float:
    """Smallest mu such that penalty(u) + (mu/2) u^2 is convex on u >= 0."""
    if spec.family == "lasso":
        return 0.0
    if spec.family == "scad":
        return 1.0 / (spec.a - 1.0)
    return spec.lam / spec.eps


def convexity_radius(spec: PenaltySpec, m: int, M: int) -> float:
    """Radius of the spectral-norm ball on which the penalized objective stays convex.

    Equals ``0.99 * sqrt(2 / (m * mu * sqrt(M)))``; infinite for the lasso.
    Estimates whose spectral norm exceeds this radius fall outside the regime
    where the local solution is guaranteed unique, so callers treat the radius
    as a diagnostic.
    """
    if m < 1 or M < 1:
        raise InvalidInputError("m and M must be positive")
    mu = amenability_mu(spec)
    if mu == 0.0:
        return float("inf")
    return 0.99 * float(np.sqrt(2.0 / (m * mu * np.sqrt(M))))


@dataclass(frozen=True)
class LlaWeights:
    """Per-entry and per-group penalty levels for one weighted-lasso pass.

    ``elementwise[k, i, j]`` multiplies ``|Phi_k[i, j]|`` and ``groupwise[q, l]``
    multiplies the node-pair group norm; both are clipped to ``[0, lam]``.
    """

    elementwise: np.ndarray
    groupwise: np.ndarray
    lam: float

    def __post_init__(self):
        elem = np.asarray(self.elementwise, dtype=float)
        grp = np.asarray(self.groupwise, dtype=float)
        if elem.ndim != 3 or elem.shape[1] != elem.shape[2]:
            raise InvalidInputError("elementwise weights must be a (M, d, d) stack")
        if grp.ndim != 2 or grp.shape[0] != grp.shape[1]:
            raise InvalidInputError("groupwise weights must be a (p, p) matrix")
        for arr in (elem, grp):
            if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > self.lam + 1e-12:
                raise InvalidInputError("penalty weights must lie in [0, lam]")
        object.__setattr__(self, "elementwise", elem)
        object.__setattr__(self, "groupwise", grp)


def lla_weights(omega_bar: np.ndarray, spec: PenaltySpec, m: int, p: int) -> LlaWeights:
    """Linearize the penalty around a previous estimate ``omega_bar``.

    Entry weights are the penalty derivative at the entry moduli of
    ``omega_bar``; group weights are the derivative at the node-pair group
    norms.  Passing zeros reproduces the plain lasso at level ``lam``.
    """
    from .spectral import group_block_norms

    omega_bar = np.asarray(omega_bar)
    d = m * p
    if omega_bar.shape[1:] != (d, d) or omega_bar.ndim != 3:
        raise InvalidInputError(
            f"expected estimate stack of shape (M, {d}, {d}), got {omega_bar.shape}"
        )
    elem = penalty_derivative(np.abs(omega_bar), spec)
    grp = penalty_derivative(group_block_norms(omega_bar, m, p), spec)
    clip = lambda w: np.clip(w, 0.0, spec.lam)
    return LlaWeights(elementwise=clip(elem), groupwise=clip(grp), lam=spec.lam)
