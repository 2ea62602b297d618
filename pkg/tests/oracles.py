"""Independent reference implementations used to cross-check the solvers.

Everything here is written directly from the mathematical definitions and
shares no code with the package's own update formulas, so agreement between
the two is meaningful evidence of correctness.
"""

import numpy as np
from scipy.optimize import brentq


def prox_objective(w, a, elementwise, groupwise, alpha, rho, m, p):
    """Objective of the sparse-group proximal problem solved by ``w_update``.

    (rho/2)||W - A||_F^2  +  alpha * sum_{k, i != j} lam[k,i,j] |W[k,i,j]|
      + (1-alpha) * m * sqrt(M) * sum_{q != l} lam[q,l] ||W block (q,l)||_F

    ``w`` may carry a leading batch axis; returns a scalar or batch vector.
    """
    w = np.asarray(w, dtype=complex)
    a = np.asarray(a, dtype=complex)
    batched = w.ndim == 4
    if not batched:
        w = w[None]
    B = w.shape[0]
    M, d, _ = a.shape
    quad = 0.5 * rho * np.sum(np.abs(w - a[None]) ** 2, axis=(1, 2, 3))
    off = ~np.eye(d, dtype=bool)
    elem = alpha * np.sum(np.abs(w) * (elementwise * off)[None], axis=(1, 2, 3))
    blocks = w.reshape(B, M, p, m, p, m)
    norms = np.sqrt(np.sum(np.abs(blocks) ** 2, axis=(1, 3, 5)))  # (B, p, p)
    off_nodes = ~np.eye(p, dtype=bool)
    group = (1.0 - alpha) * m * np.sqrt(M) * np.sum(
        norms * (groupwise * off_nodes)[None], axis=(1, 2)
    )
    total = quad + elem + group
    return total if batched else float(total[0])


def _scalar_prox(mag_a, rho, lam_pair, c_pair, r2):
    """Magnitude minimizing rho(t-|a|)^2 + lam_pair*t + c_pair*sqrt(r2+t^2)."""
    if mag_a == 0.0:
        return 0.0
    slope0 = -2.0 * rho * mag_a + lam_pair + (c_pair if r2 == 0.0 else 0.0)
    if slope0 >= 0.0:
        return 0.0

    def fprime(t):
        if t == 0.0:
            frac = 0.0 if r2 > 0.0 else 1.0  # right limit of t/sqrt(r2+t^2)
        else:
            frac = t / np.sqrt(r2 + t * t)
        return 2.0 * rho * (t - mag_a) + lam_pair + c_pair * frac

    hi = mag_a
    if fprime(hi) <= 0.0:
        return hi
    return brentq(fprime, 0.0, hi, xtol=1e-16, rtol=8.9e-16)


def prox_coordinate_descent(a, elementwise, groupwise, alpha, rho, m, p,
                            sweeps=300, tol=1e-12, w0=None):
    """Coordinate-descent solver for the same proximal problem.

    Works on Hermitian ``a`` with symmetric weights and keeps the iterate
    Hermitian by updating conjugate pairs together.  Each scalar step solves
    the exact one-dimensional problem (phase alignment plus a convex
    magnitude problem solved by root finding).  ``w0`` overrides the starting
    point (default: start from ``a``).
    """
    a = np.asarray(a, dtype=complex)
    M, d, _ = a.shape
    w = a.copy() if w0 is None else np.array(w0, dtype=complex)
    scale = max(1.0, np.max(np.abs(a)))
    for i in range(d):
        assert np.all(np.abs(a[:, i, i].imag) < 1e-12 * scale), (
            "diagonal of a Hermitian input must be real"
        )
        w[:, i, i] = a[:, i, i]  # unpenalized: the quadratic alone fixes it

    node = np.repeat(np.arange(p), m)
    for _ in range(sweeps):
        delta = 0.0
        for i in range(d):
            for j in range(i + 1, d):
                q, l = node[i], node[j]
                for k in range(M):
                    a_kij = a[k, i, j]
                    lam_pair = 2.0 * alpha * elementwise[k, i, j]
                    if q == l:
                        c_pair, r2 = 0.0, 0.0
                    else:
                        c_pair = 2.0 * (1.0 - alpha) * m * np.sqrt(M) * groupwise[q, l]
                        block = w[:, q * m:(q + 1) * m, l * m:(l + 1) * m]
                        r2 = float(np.sum(np.abs(block) ** 2) - np.abs(w[k, i, j]) ** 2)
                        r2 = max(r2, 0.0)
                    mag = np.abs(a_kij)
                    t = _scalar_prox(mag, rho, lam_pair, c_pair, r2)
                    new = (a_kij / mag) * t if mag > 0 else 0.0
                    delta = max(delta, abs(new - w[k, i, j]))
                    w[k, i, j] = new
                    w[k, j, i] = np.conj(new)
        if delta < tol * scale:
            break
    return w


def perturbation_floor(w, a, elementwise, groupwise, alpha, rho, m, p,
                       rng, count=10_000):
    """Smallest objective over random Hermitian perturbations of ``w``.

    Perturbations are drawn at several scales; a minimizer should never be
    beaten by any of them.
    """
    M, d, _ = np.asarray(a).shape
    per_scale = count // 4
    best = np.inf
    for scale in (1e-7, 1e-5, 1e-3, 1e-1):
        z = rng.standard_normal((per_scale, M, d, d)) + 1j * rng.standard_normal(
            (per_scale, M, d, d)
        )
        z = 0.5 * (z + np.conj(np.swapaxes(z, -1, -2)))
        cand = np.asarray(w)[None] + scale * z
        vals = prox_objective(cand, a, elementwise, groupwise, alpha, rho, m, p)
        best = min(best, float(np.min(vals)))
    return best


def stationarity_residual(phi, c, rho):
    """Relative Frobenius residual of rho*Phi^2 + C*Phi - I = 0."""
    d = phi.shape[0]
    residual = rho * (phi @ phi) + c @ phi - np.eye(d)
    return np.linalg.norm(residual) / max(1.0, np.linalg.norm(c @ phi))


def scalar_ar_radius(coeffs):
    """Stability radius of a scalar AR model from its polynomial roots.

    The companion spectral radius of x_t = sum_i a_i x_{t-i} equals the
    largest root modulus of z^L - a_1 z^{L-1} - ... - a_L.
    """
    poly = np.concatenate([[1.0], -np.asarray(coeffs, dtype=float)])
    return float(np.max(np.abs(np.roots(poly))))
