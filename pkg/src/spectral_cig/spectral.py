"""Frequency-domain sufficient statistics for multi-attribute time series.

A sample of ``p`` nodes with ``m`` scalar attributes each is stored as an
``n x (m*p)`` real matrix; column ``q*m + u`` holds attribute ``u`` of node
``q``.  Estimation never touches the raw series after this module: the series
is reduced to a normalized DFT, a grid of anchor frequencies with disjoint
smoothing windows, and one smoothed spectral-density matrix per anchor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError, WindowTooLargeError

__all__ = [
    "MultiAttributeSeries",
    "FrequencyGrid",
    "SpectralStatistics",
    "dft",
    "frequency_grid",
    "smoothed_psd",
    "group_block_norms",
]


@dataclass(frozen=True)
class MultiAttributeSeries:
    """A finite sample of a zero-mean vector time series.

    Parameters
    ----------
    data : (n, m*p) float array
        One row per time point.  Column ``q*m + u`` is attribute ``u`` of
        node ``q`` (node-major channel order).
    p : int
        Number of nodes (graph vertices).
    m : int
        Attributes per node.
    """

    data: np.ndarray
    p: int
    m: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise InvalidInputError("series data must be a 2-D array (n, m*p)")
        if self.p < 1 or self.m < 1:
            raise InvalidInputError("p and m must be positive integers")
        if data.shape[1] != self.m * self.p:
            raise InvalidInputError(
                f"expected {self.m * self.p} channels (p={self.p}, m={self.m}), "
                f"got {data.shape[1]}"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("series contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        """Number of time points."""
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.m * self.p

    def channel(self, node: int, attribute: int) -> np.ndarray:
        """Return the scalar series of one (node, attribute) pair."""
        if not (0 <= node < self.p and 0 <= attribute < self.m):
            raise InvalidInputError("node/attribute index out of range")
        return self.data[:, node * self.m + attribute]


def dft(series: MultiAttributeSeries) -> np.ndarray:
    """Normalized DFT of every channel at the positive Fourier frequencies.

    Column ``l-1`` of the result is ``(1/sqrt(n)) * sum_t x(t) exp(-i 2 pi l t / n)``
    for frequency index ``l = 1 .. n/2 - 1``; the DC term and the Nyquist term
    are excluded.  ``n`` must be even.

    Returns
    -------
    (m*p, n/2 - 1) complex array
    """
    n = series.n
    if n % 2 != 0:
        raise InvalidInputError(f"sample length must be even, got n={n}")
    if n < 4:
        raise InvalidInputError(f"sample length too short for any positive frequency, n={n}")
    coeffs = np.fft.fft(series.data, axis=0) / np.sqrt(n)
    return coeffs[1 : n // 2].T.copy()


@dataclass(frozen=True)
class FrequencyGrid:
    """Anchor frequencies with disjoint smoothing windows.

    With half-window ``m_t`` each window covers ``K = 2*m_t + 1`` consecutive
    DFT bins; ``M = floor((n/2 - m_t - 1) / K)`` windows fit without touching
    DC or Nyquist.  Anchor ``k`` (0-based) sits at DFT index
    ``k*K + m_t + 1``, i.e. frequency ``(k*K + m_t + 1) / n``.
    """

    n: int
    m_t: int
    K: int = field(init=False)
    M: int = field(init=False)

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 4:
            raise InvalidInputError(f"n must be even and >= 4, got {self.n}")
        if self.m_t < 0:
            raise InvalidInputError(f"half-window m_t must be >= 0, got {self.m_t}")
        K = 2 * self.m_t + 1
        M = (self.n // 2 - self.m_t - 1) // K
        if M < 1:
            raise WindowTooLargeError(
                f"half-window m_t={self.m_t} leaves no anchor frequencies for n={self.n}"
            )
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "M", M)

    @property
    def anchor_indices(self) -> np.ndarray:
        """DFT indices of the anchors, ``k*K + m_t + 1`` for k = 0..M-1."""
        return np.arange(self.M) * self.K + self.m_t + 1

    @property
    def anchors(self) -> np.ndarray:
        """Anchor frequencies in cycles/sample, strictly inside (0, 1/2)."""
        return self.anchor_indices / self.n

    def window_indices(self) -> np.ndarray:
        """(M, K) array of DFT indices covered by each smoothing window."""
        offsets = np.arange(-self.m_t, self.m_t + 1)
        return self.anchor_indices[:, None] + offsets[None, :]


def frequency_grid(n: int, m_t: int) -> FrequencyGrid:
    """Build the anchor grid for a length-``n`` sample with half-window ``m_t``."""
    return FrequencyGrid(n=n, m_t=m_t)


@dataclass(frozen=True)
class SpectralStatistics:
    """Smoothed spectral-density matrices at the grid anchors.

    ``s_hat[k]`` is the Hermitian PSD estimate at anchor ``k``; ``m`` and
    ``p`` record the attribute/node block structure of its rows and columns.
    """

    grid: FrequencyGrid
    s_hat: np.ndarray
    m: int
    p: int

    def __post_init__(self):
        s_hat = np.asarray(self.s_hat, dtype=complex)
        d = self.m * self.p
        if s_hat.shape != (self.grid.M, d, d):
            raise InvalidInputError(
                f"expected PSD stack of shape {(self.grid.M, d, d)}, got {s_hat.shape}"
            )
        object.__setattr__(self, "s_hat", s_hat)

    @property
    def M(self) -> int:
        return self.grid.M

    @property
    def dim(self) -> int:
        return self.m * self.p


def smoothed_psd(D: np.ndarray, grid: FrequencyGrid, m: int = 1, p: int | None = None) -> SpectralStatistics:
    """Average outer products of DFT columns over each smoothing window.

    ``s_hat[k] = (1/K) * sum_l D[:, j] D[:, j]^H`` over the ``K`` DFT indices
    ``j`` in window ``k`` (column ``j-1`` of ``D`` holds DFT index ``j``).
    The result is symmetrized to be exactly Hermitian.  Positive
    semi-definiteness holds by construction; each matrix has rank at most
    ``min(K, m*p)``.
    """
    D = np.asarray(D, dtype=complex)
    if D.ndim != 2:
        raise InvalidInputError("DFT input must be a 2-D array (channels, frequencies)")
    d = D.shape[0]
    if p is None:
        if d % m != 0:
            raise InvalidInputError(f"channel count {d} is not a multiple of m={m}")
        p = d // m
    if m * p != d:
        raise InvalidInputError(f"m*p={m * p} does not match channel count {d}")
    if D.shape[1] < grid.n // 2 - 1:
        raise InvalidInputError(
            f"DFT has {D.shape[1]} frequency columns, expected {grid.n // 2 - 1} for n={grid.n}"
        )
    cols = grid.window_indices() - 1  # DFT index j lives in column j-1
    windows = D[:, cols]  # (d, M, K)
    s_hat = np.einsum("ikl,jkl->kij", windows, np.conj(windows)) / grid.K
    s_hat = 0.5 * (s_hat + np.conj(np.transpose(s_hat, (0, 2, 1))))
    return SpectralStatistics(grid=grid, s_hat=s_hat, m=m, p=p)


def group_block_norms(mats: np.ndarray, m: int, p: int) -> np.ndarray:
    """Frobenius norm of each (node, node) block aggregated over frequencies.

    ``mats`` is a stack ``(M, m*p, m*p)``; entry ``(q, l)`` of the result is
    ``sqrt(sum_k ||mats[k] block (q, l)||_F^2)`` where block ``(q, l)`` is the
    ``m x m`` submatrix coupling the attributes of nodes ``q`` and ``l``.
    """
    mats = np.asarray(mats)
    M, d, d2 = mats.shape
    if d != d2 or d != m * p:
        raise InvalidInputError(f"expected square matrices of size m*p={m * p}, got {mats.shape}")
    blocks = mats.reshape(M, p, m, p, m)
    return np.sqrt((np.abs(blocks) ** 2).sum(axis=(0, 2, 4)))
