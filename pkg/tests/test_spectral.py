"""Frequency-domain statistics: DFT, grid bookkeeping, smoothed PSD."""

import numpy as np
import pytest

from conftest import grid_for
from spectral_cig import (
    InvalidInputError,
    MultiAttributeSeries,
    SpectralStatistics,
    WindowTooLargeError,
    dft,
    frequency_grid,
    group_block_norms,
    smoothed_psd,
)


class TestMultiAttributeSeries:
    def test_channel_order_is_node_major(self):
        data = np.arange(12.0).reshape(2, 6)
        series = MultiAttributeSeries(data=data, p=3, m=2)
        assert series.n == 2
        assert series.n_channels == 6
        np.testing.assert_array_equal(series.channel(1, 0), data[:, 2])
        np.testing.assert_array_equal(series.channel(2, 1), data[:, 5])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            MultiAttributeSeries(data=np.zeros((4, 5)), p=3, m=2)

    def test_non_finite_rejected(self):
        data = np.zeros((4, 2))
        data[1, 1] = np.nan
        with pytest.raises(InvalidInputError):
            MultiAttributeSeries(data=data, p=2, m=1)

    def test_channel_index_out_of_range(self):
        series = MultiAttributeSeries(data=np.zeros((4, 2)), p=2, m=1)
        with pytest.raises(InvalidInputError):
            series.channel(2, 0)


class TestDft:
    def test_constant_series_has_zero_columns(self):
        series = MultiAttributeSeries(data=np.full((16, 2), 3.5), p=2, m=1)
        D = dft(series)
        assert D.shape == (2, 7)
        np.testing.assert_allclose(np.abs(D), 0.0, atol=1e-12)

    def test_impulse_flat_magnitude(self):
        data = np.zeros((8, 1))
        data[0, 0] = 1.0
        D = dft(MultiAttributeSeries(data=data, p=1, m=1))
        np.testing.assert_allclose(D, np.full((1, 3), 1 / np.sqrt(8)), atol=1e-12)

    def test_single_tone_concentrates_at_its_bin(self):
        n, bin_index = 64, 5
        t = np.arange(n)
        data = np.cos(2 * np.pi * bin_index * t / n)[:, None]
        D = dft(MultiAttributeSeries(data=data, p=1, m=1))
        mags = np.abs(D[0])
        assert np.argmax(mags) == bin_index - 1  # columns start at frequency 1/n
        np.testing.assert_allclose(mags[bin_index - 1], np.sqrt(n) / 2, rtol=1e-12)
        others = np.delete(mags, bin_index - 1)
        np.testing.assert_allclose(others, 0.0, atol=1e-10)

    def test_parseval_with_excluded_endpoints(self):
        rng = np.random.default_rng(3)
        data = rng.standard_normal((64, 3))
        series = MultiAttributeSeries(data=data, p=3, m=1)
        D = dft(series)
        # Recover the two excluded bins by hand: f=0 and f=1/2.
        dc = data.sum(axis=0) / np.sqrt(64)
        nyq = (data * (-1.0) ** np.arange(64)[:, None]).sum(axis=0) / np.sqrt(64)
        # Negative-frequency bins mirror the positive ones for real data.
        total = 2 * np.sum(np.abs(D) ** 2) + np.sum(dc**2) + np.sum(nyq**2)
        np.testing.assert_allclose(total, np.sum(data**2), rtol=1e-10)

    def test_odd_length_rejected(self):
        with pytest.raises(InvalidInputError):
            dft(MultiAttributeSeries(data=np.zeros((9, 1)), p=1, m=1))


class TestFrequencyGrid:
    def test_example_n128(self):
        grid = frequency_grid(128, 7)
        assert grid.K == 15
        assert grid.M == 3
        np.testing.assert_allclose(grid.anchors[0], 0.0625)

    def test_example_n64(self):
        grid = frequency_grid(64, 1)
        assert grid.K == 3
        assert grid.M == 10
        spacing = np.diff(grid.anchors)
        np.testing.assert_allclose(spacing, 3 / 64)

    def test_window_too_large(self):
        with pytest.raises(WindowTooLargeError):
            frequency_grid(8, 3)

    def test_desk_scale_grid(self):
        grid = frequency_grid(1024, 50)
        assert grid.K == 101
        assert grid.M == 4

    def test_all_window_indices_strictly_inside(self):
        for n, m_t in ((64, 1), (128, 7), (1024, 50), (4096, 100)):
            grid = frequency_grid(n, m_t)
            idx = grid.window_indices()
            assert idx.shape == (grid.M, grid.K)
            assert idx.min() >= 1
            assert idx.max() <= n // 2 - 1


class TestSmoothedPsd:
    def test_constant_unit_dft_single_channel(self):
        grid = frequency_grid(64, 1)
        D = np.ones((1, 31), dtype=complex)
        stats = smoothed_psd(D, grid, m=1, p=1)
        assert stats.s_hat.shape == (10, 1, 1)
        np.testing.assert_allclose(stats.s_hat, 1.0)

    def test_rank_one_direction(self):
        grid = frequency_grid(64, 1)
        D = np.zeros((2, 31), dtype=complex)
        D[0] = 1.0
        stats = smoothed_psd(D, grid, m=1, p=2)
        expected = np.diag([1.0, 0.0]).astype(complex)
        for k in range(stats.M):
            np.testing.assert_allclose(stats.s_hat[k], expected, atol=1e-14)

    def test_white_noise_mean_close_to_identity(self):
        grid = frequency_grid(4096, 31)
        acc = None
        for seed in range(20):
            rng = np.random.default_rng(seed)
            series = MultiAttributeSeries(rng.standard_normal((4096, 2)), p=2, m=1)
            stats = smoothed_psd(dft(series), grid, m=1, p=2)
            acc = stats.s_hat if acc is None else acc + stats.s_hat
        mean = acc / 20
        for k in range(grid.M):
            assert np.linalg.norm(mean[k] - np.eye(2)) <= 0.2

    def test_hermitian_and_psd(self):
        rng = np.random.default_rng(11)
        series = MultiAttributeSeries(rng.standard_normal((256, 6)), p=3, m=2)
        stats = smoothed_psd(dft(series), frequency_grid(256, 5), m=2, p=3)
        for k in range(stats.M):
            s = stats.s_hat[k]
            np.testing.assert_allclose(s, s.conj().T, atol=1e-12)
            eigs = np.linalg.eigvalsh(s)
            assert eigs.min() >= -1e-10 * eigs.max()

    def test_rank_bounded_by_window_size(self):
        # K=3 windows of a 6-channel series: rank of each S_k at most 3.
        rng = np.random.default_rng(12)
        series = MultiAttributeSeries(rng.standard_normal((64, 6)), p=6, m=1)
        stats = smoothed_psd(dft(series), frequency_grid(64, 1), m=1, p=6)
        for k in range(stats.M):
            eigs = np.sort(np.linalg.eigvalsh(stats.s_hat[k]))[::-1]
            assert np.all(eigs[3:] < 1e-8 * eigs[0])

    def test_shape_mismatch_rejected(self):
        grid = frequency_grid(64, 1)
        with pytest.raises(InvalidInputError):
            smoothed_psd(np.ones((2, 30), dtype=complex), grid, m=1, p=2)


class TestGroupBlockNorms:
    def test_hand_example(self):
        # Two nodes, one attribute, two frequencies: norms aggregate over k.
        mats = np.zeros((2, 2, 2), dtype=complex)
        mats[0, 0, 1] = 3.0
        mats[1, 0, 1] = 4.0
        mats[:, 1, 0] = np.conj(mats[:, 0, 1])
        norms = group_block_norms(mats, m=1, p=2)
        np.testing.assert_allclose(norms[0, 1], 5.0)
        np.testing.assert_allclose(norms[1, 0], 5.0)
        np.testing.assert_allclose(norms[0, 0], 0.0)

    def test_block_structure(self):
        rng = np.random.default_rng(5)
        mats = rng.standard_normal((3, 4, 4)) + 1j * rng.standard_normal((3, 4, 4))
        norms = group_block_norms(mats, m=2, p=2)
        manual = np.sqrt(np.sum(np.abs(mats[:, 0:2, 2:4]) ** 2))
        np.testing.assert_allclose(norms[0, 1], manual)


def test_stats_helper_builds_consistent_grids():
    grid = grid_for(5, 3)
    assert (grid.K, grid.M) == (5, 3)
