"""Shared builders for the test suite."""

import numpy as np
import pytest

from spectral_cig import (
    FrequencyGrid,
    SpectralStatistics,
    VarModel,
    dft,
    frequency_grid,
    make_model,
    simulate_var,
    smoothed_psd,
)


def grid_for(K: int, M: int) -> FrequencyGrid:
    """Smallest frequency grid with exactly the given window size and count."""
    if K % 2 != 1:
        raise ValueError("window size must be odd")
    m_t = (K - 1) // 2
    n = 2 * (K * M + m_t + 1)
    grid = frequency_grid(n, m_t)
    assert grid.K == K and grid.M == M
    return grid


def random_psd_stack(rng, M: int, d: int, scale: float = 1.0) -> np.ndarray:
    """Stack of M random Hermitian PD matrices with eigenvalues >= 0.1."""
    out = np.empty((M, d, d), dtype=complex)
    for k in range(M):
        z = rng.standard_normal((d, 2 * d)) + 1j * rng.standard_normal((d, 2 * d))
        out[k] = scale * (z @ z.conj().T) / (2 * d) + 0.1 * np.eye(d)
    return out


def random_stats(rng, p: int, m: int, M: int, K: int = 5) -> SpectralStatistics:
    """Directly constructed spectral statistics (random PD matrices)."""
    grid = grid_for(K, M)
    return SpectralStatistics(grid=grid, s_hat=random_psd_stack(rng, M, p * m), m=m, p=p)


def simulated_stats(seed: int, p: int, m: int, n: int, m_t: int, clusters: int = 4):
    """Statistics and ground truth from the full synthetic pipeline."""
    rng = np.random.default_rng(seed)
    model = make_model(1, p, m, rng, clusters=clusters)
    series = simulate_var(model, n, rng)
    grid = frequency_grid(n, m_t)
    return model, smoothed_psd(dft(series), grid, m=m, p=p)


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def random_hermitian(rng, d: int, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitize(scale * z)
