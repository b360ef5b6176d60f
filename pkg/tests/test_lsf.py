import numpy as np
import pytest

from chanstat import (
    AnalysisConfig,
    ChannelTransferFunction,
    ConfigError,
    doppler_delay_transform,
    estimate_lsf,
    generate_dpss,
    lsf_sequence,
    make_tf_window,
    windowed_transfer,
)
from chanstat.dpss import TaperSet
from chanstat.lsf import LsfSequence


def dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def cgauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestWindowedTransfer:
    def test_all_ones_returns_window(self, rng):
        G = rng.standard_normal((5, 4))
        np.testing.assert_array_equal(windowed_transfer(np.ones((5, 4), complex), G), G)

    def test_zero(self, rng):
        out = windowed_transfer(np.zeros((5, 4), complex), rng.standard_normal((5, 4)))
        assert not np.any(out)

    def test_elementwise(self, rng):
        H = cgauss(rng, (6, 3))
        G = rng.standard_normal((6, 3))
        out = windowed_transfer(H, G)
        for i, j in [(0, 0), (4, 2), (5, 1)]:
            assert out[i, j] == H[i, j] * G[i, j]

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            windowed_transfer(np.ones((3, 3)), np.ones((3, 4)))


class TestDopplerDelayTransform:
    def test_constant_matrix(self):
        N, M, c = 7, 5, 0.3 - 1.1j
        S = doppler_delay_transform(np.full((N, M), c))
        assert abs(S[0, 0] - c * np.sqrt(N * M)) < 1e-12
        rest = np.abs(S).ravel()[1:]
        assert rest.max() < 1e-12

    @pytest.mark.parametrize("nu", [0, 1, 3, 6])
    def test_row_tone_lands_in_doppler_bin(self, nu):
        N, M = 8, 4
        s = np.arange(N)
        H = np.exp(2j * np.pi * nu * s / N)[:, None] * np.ones(M)
        P = np.abs(doppler_delay_transform(H)) ** 2
        assert np.argmax(P.sum(axis=1)) == nu
        assert P.sum(axis=1)[nu] / P.sum() > 1 - 1e-12

    def test_matches_explicit_dft_matrices(self, rng):
        N, M = 9, 6
        H = cgauss(rng, (N, M))
        oracle = dft_matrix(N) @ H @ dft_matrix(M).conj().T
        np.testing.assert_allclose(doppler_delay_transform(H), oracle, atol=1e-12)

    def test_unitary(self, rng):
        H = cgauss(rng, (25, 40))
        S = doppler_delay_transform(H)
        assert abs(np.linalg.norm(S) - np.linalg.norm(H)) < 1e-12 * np.linalg.norm(H)


def tapers(N, M, W_t=2.0, I=2, W_f=1.0, J=1):
    return generate_dpss(N, W_t, I), generate_dpss(M, W_f, J)


class TestEstimateLsf:
    def test_single_window_is_squared_magnitude(self, rng):
        H = cgauss(rng, (12, 10))
        tt, tf = tapers(12, 10, I=1)
        S = doppler_delay_transform(H * make_tf_window(tt.tapers[0], tf.tapers[0]))
        np.testing.assert_allclose(estimate_lsf(H, tt, tf), np.abs(S) ** 2, rtol=1e-13)

    def test_nonnegative(self, rng):
        C = estimate_lsf(cgauss(rng, (25, 30)), *tapers(25, 30, I=4, J=2))
        assert np.all(C >= 0) and np.all(np.isfinite(C))

    def test_parseval(self, rng):
        tt, tf = tapers(25, 30, I=4, J=2)
        H = cgauss(rng, (25, 30))
        C = estimate_lsf(H, tt, tf)
        energy = np.mean([np.linalg.norm(H * make_tf_window(u, v)) ** 2 for u in tt for v in tf])
        assert abs(C.sum() - energy) < 1e-10 * max(energy, 1)

    def test_window_order_irrelevant(self, rng):
        tt, tf = tapers(25, 30, I=4, J=2)
        H = cgauss(rng, (25, 30))
        rev = TaperSet(tt.length, tt.half_bandwidth_bins, tt.tapers[::-1], tt.concentrations[::-1])
        np.testing.assert_allclose(estimate_lsf(H, rev, tf), estimate_lsf(H, tt, tf), rtol=1e-13)

    def test_taper_mismatch(self, rng):
        tt, tf = tapers(25, 30)
        with pytest.raises(ConfigError):
            estimate_lsf(cgauss(rng, (24, 30)), tt, tf)


def campaign_like_ctf(rng, S=500, Q=100):
    return ChannelTransferFunction(cgauss(rng, (S, Q)), 100.5e-6, 1e6)


class TestLsfSequence:
    def test_length_matches_tiling(self, rng):
        seq = lsf_sequence(campaign_like_ctf(rng), AnalysisConfig())
        assert len(seq) == 238
        assert seq.tile_shape == (25, 100)

    def test_deterministic_and_thread_independent(self, small_ctf):
        cfg = AnalysisConfig(lctf_time_len=10, time_hop=3, taper_freq_bw=1.0)
        a = lsf_sequence(small_ctf, cfg, workers=1)
        b = lsf_sequence(small_ctf, cfg, workers=1)
        c = lsf_sequence(small_ctf, cfg, workers=4)
        assert a.values.tobytes() == b.values.tobytes() == c.values.tobytes()

    def test_env_var_caps_workers(self, small_ctf, monkeypatch):
        from chanstat.lsf import worker_count
        monkeypatch.setenv("CHANSTAT_THREADS", "3")
        assert worker_count() == 3
        assert worker_count(1) == 1

    def test_scale_covariance(self, small_ctf):
        cfg = AnalysisConfig(lctf_time_len=10)
        c = 1.7 * np.exp(0.9j)
        a = lsf_sequence(small_ctf, cfg).values
        b = lsf_sequence(small_ctf.scaled(c), cfg).values
        np.testing.assert_allclose(b, abs(c) ** 2 * a, rtol=1e-12)

    def test_time_shift_covariance(self, rng):
        hop = 3
        big = cgauss(rng, (80, 12))
        cfg = AnalysisConfig(lctf_time_len=16, time_hop=hop)
        a = lsf_sequence(ChannelTransferFunction(big[hop:], 1e-4, 1e6), cfg).values
        b = lsf_sequence(ChannelTransferFunction(big, 1e-4, 1e6), cfg).values
        assert a.shape[0] == b.shape[0] - 1
        assert a.tobytes() == b[1:].tobytes()

    def test_time_invariant_channel_has_taper_limited_doppler(self, rng):
        # Constant-in-time input: the Doppler profile of every tile is exactly
        # the mean periodogram of the time tapers, i.e. leakage comes from the
        # taper spectra alone and is symmetric about DC.
        N, Q, I = 25, 40, 2
        row = cgauss(rng, Q)
        ctf = ChannelTransferFunction(np.tile(row, (120, 1)), 1e-4, 1e6)
        cfg = AnalysisConfig(lctf_time_len=N, taper_time_count=I)
        seq = lsf_sequence(ctf, cfg)
        tt = generate_dpss(N, 2.0, I)
        window = np.mean([np.abs(np.fft.fft(u, norm="ortho")) ** 2 for u in tt], axis=0)
        for C in seq.values:
            prof = C.sum(axis=1) / C.sum()
            np.testing.assert_allclose(prof, window, atol=1e-12)
        # energy outside the +-W_t bin main lobe stays below 1e-3
        outside = np.r_[window[3:N - 2]].sum()
        assert outside < 1e-3
        assert seq.values[0].tobytes() == seq.values[-1].tobytes()

    def test_axes(self):
        seq = LsfSequence(np.ones((2, 5, 4)), AnalysisConfig(lctf_time_len=5), 1e-3, 1e6)
        N, T = 5, 1e-3
        expected = np.array([(p - 1 - N // 2) / (N * T) for p in range(1, N + 1)])
        np.testing.assert_allclose(seq.doppler_axis(), expected)
        np.testing.assert_allclose(seq.delay_axis(), np.arange(4) / (4 * 1e6))
        with pytest.raises(IndexError):
            seq.tile(3)
