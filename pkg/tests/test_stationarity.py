import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from chanstat import (
    AnalysisConfig,
    CollinearityMatrix,
    ConfigError,
    DegenerateError,
    collinearity,
    collinearity_matrix,
    index_to_angle,
    lsf_sequence,
    stationarity,
    stationarity_time,
)
from chanstat.lsf import LsfSequence
from chanstat.synth import arm_scenario, static_ctf

nonneg = arrays(np.float64, (4, 3), elements=st.floats(0, 1e3, allow_subnormal=False))


def brute_force_run(row, k, cutoff):
    # walk forward from the reference tile until the first comparison fails
    d = 0
    while k + d + 1 < len(row) and row[k + d + 1] > cutoff:
        d += 1
    return d


class TestCollinearity:
    def test_self(self, rng):
        A = rng.random((6, 5))
        assert collinearity(A, A) == pytest.approx(1.0, abs=1e-15)

    def test_disjoint_support(self):
        A = np.array([[1.0, 0.0], [0.0, 0.0]])
        B = np.array([[0.0, 2.0], [3.0, 0.0]])
        assert collinearity(A, B) == 0.0

    def test_hand_value(self):
        A = np.eye(2)
        B = np.ones((2, 2))
        assert abs(collinearity(A, B) - 2 / (math.sqrt(2) * 2)) < 1e-12

    def test_zero_operand(self):
        with pytest.raises(DegenerateError):
            collinearity(np.zeros((2, 2)), np.ones((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            collinearity(np.ones((2, 2)), np.ones((2, 3)))

    @given(nonneg, nonneg)
    def test_bounded_and_symmetric(self, a, b):
        if not a.any() or not b.any():
            return
        g = collinearity(a, b)
        assert 0.0 <= g <= 1.0
        assert g == pytest.approx(collinearity(b, a), abs=1e-15)


def seq_from(values, hop=2, T=1e-4):
    K, N, M = np.shape(values)
    return LsfSequence(values, AnalysisConfig(lctf_time_len=N, time_hop=hop,
                                              taper_time_bw=0.4, taper_time_count=1,
                                              taper_freq_bw=0.4), T, 1e6)


class TestCollinearityMatrix:
    def test_properties(self, rng):
        seq = seq_from(rng.random((30, 8, 6)))
        G = collinearity_matrix(seq).values
        assert np.all(np.abs(np.diag(G) - 1) <= 1e-12)
        assert np.array_equal(G, G.T)
        assert G.min() >= 0 and G.max() <= 1
        for i, j in [(0, 5), (7, 29), (12, 12)]:
            assert abs(G[i, j] - collinearity(seq[i], seq[j])) < 1e-14

    def test_single_tile(self, rng):
        G = collinearity_matrix(seq_from(rng.random((1, 4, 4)))).values
        assert G.shape == (1, 1) and G[0, 0] == pytest.approx(1.0, abs=1e-15)

    def test_degenerate_tile_named(self, rng):
        vals = rng.random((5, 3, 3))
        vals[3] = 0
        with pytest.raises(DegenerateError) as info:
            collinearity_matrix(seq_from(vals))
        assert info.value.tile == 4
        assert "k_t=4" in str(info.value)

    def test_static_channel_fully_collinear(self):
        scn = arm_scenario(25.5e9, 100.0)
        seq = lsf_sequence(static_ctf(scn), AnalysisConfig())
        assert collinearity_matrix(seq).values.min() > 0.999

    def test_channel_rescaling(self, small_ctf):
        cfg = AnalysisConfig(lctf_time_len=10, time_hop=1)
        a = collinearity_matrix(lsf_sequence(small_ctf, cfg)).values
        b = collinearity_matrix(lsf_sequence(small_ctf.scaled(-3.3 + 0.2j), cfg)).values
        assert np.abs(a - b).max() < 1e-12


def coll(values, N=25, hop=2, T=100.5e-6):
    return CollinearityMatrix(np.asarray(values, float), hop, T, N)


class TestStationarityTime:
    def test_formula(self):
        K = 20
        G = np.full((K, K), 0.5)
        np.fill_diagonal(G, 1.0)
        G[0, 1:11] = 0.95
        t = stationarity_time(coll(G), 1)
        assert t == pytest.approx((25 + 20) * 100.5e-6, rel=1e-12)
        assert t == pytest.approx(4.5225e-3, rel=1e-12)

    def test_isolated_value_beyond_gap_ignored(self):
        G = np.full((6, 6), 0.2)
        np.fill_diagonal(G, 1.0)
        G[0, 1] = 0.95
        G[0, 3] = 0.99
        assert stationarity_time(coll(G), 1) == pytest.approx(27 * 100.5e-6)

    def test_fully_stationary(self):
        K = 10
        res = stationarity(coll(np.ones((K, K))))
        assert res.t_stat[0] == pytest.approx((25 + (K - 1) * 2) * 100.5e-6)
        assert res.censored.all()

    def test_single_tile_lower_bound(self):
        scn = arm_scenario(25.5e9, 100.0)
        G = np.eye(5)
        assert stationarity_time(coll(G, T=scn.sample_time), 3) == pytest.approx(2.513e-3, rel=1e-3)

    def test_index_range(self):
        with pytest.raises(IndexError):
            stationarity_time(coll(np.eye(3)), 4)

    @settings(max_examples=60)
    @given(st.integers(1, 25), st.floats(0.05, 0.95), st.integers(0, 2 ** 31 - 1))
    def test_matches_brute_force_scan(self, K, cutoff, seed):
        r = np.random.default_rng(seed)
        A = r.random((K, K))
        G = np.triu(0.7 + 0.3 * A)
        G = G + G.T
        np.fill_diagonal(G, 1.0)
        c = coll(G)
        res = stationarity(c, cutoff)
        for k in range(K):
            d = brute_force_run(G[k], k, cutoff)
            assert res.run_length[k] == d
            assert res.t_stat[k] == (25 + d * 2) * 100.5e-6
            assert res.censored[k] == (k + d == K - 1)
            assert res.t_stat[k] >= 25 * 100.5e-6
            assert stationarity_time(c, k + 1, cutoff) == res.t_stat[k]

    @settings(max_examples=40)
    @given(st.integers(2, 20), st.integers(0, 2 ** 31 - 1))
    def test_cutoff_monotone(self, K, seed):
        r = np.random.default_rng(seed)
        G = r.random((K, K))
        G = (G + G.T) / 2
        np.fill_diagonal(G, 1.0)
        c = coll(G)
        lo = stationarity(c, 0.3).t_stat
        hi = stationarity(c, 0.8).t_stat
        assert np.all(hi <= lo)

    def test_two_sided(self):
        K = 8
        G = np.full((K, K), 0.1)
        G[2:6, 2:6] = 0.95
        np.fill_diagonal(G, 1.0)
        res = stationarity(coll(G), 0.9, two_sided=True)
        assert list(res.run_length) == [0, 0, 3, 3, 3, 3, 0, 0]
        fwd = stationarity(coll(G), 0.9)
        assert list(fwd.run_length) == [0, 0, 3, 2, 1, 0, 0, 0]
        assert not res.censored[3]
        assert res.censored[0] and res.censored[7]

    def test_summary(self):
        res = stationarity(coll(np.eye(4)))
        s = res.summary()
        assert s["num_tiles"] == 4 and s["t_stat_min"] == s["t_stat_max"]

    def test_bad_cutoff(self):
        with pytest.raises(ConfigError):
            stationarity(coll(np.eye(2)), 1.0)


class TestIndexToAngle:
    def test_campaign_geometry(self):
        scn = arm_scenario(25.5e9, 100.0)
        cfg = AnalysisConfig(lctf_time_len=25, time_hop=2)
        assert index_to_angle(1, scn, cfg) == pytest.approx(-38.0, abs=1e-9)
        a = index_to_angle(np.arange(1, 6), scn, cfg)
        np.testing.assert_allclose(np.diff(a), 0.32, atol=1e-9)
        # tile arc = N * omega * T_s
        assert 25 * scn.angular_velocity_deg * scn.sample_time == pytest.approx(4.0, abs=1e-9)

    def test_velocity_independent(self):
        cfg = AnalysisConfig()
        a = index_to_angle(37, arm_scenario(25.5e9, 100.0), cfg)
        b = index_to_angle(37, arm_scenario(25.5e9, 40.0), cfg)
        assert a == pytest.approx(b, abs=1e-9)


def test_tiny_powers_do_not_underflow():
    a = np.full((4, 3), 1e-300)
    assert collinearity(a, np.ones((4, 3))) == pytest.approx(1.0, abs=1e-15)
    G = collinearity_matrix(seq_from(np.stack([a, 2 * a, np.ones((4, 3))]))).values
    np.testing.assert_allclose(G, 1.0, atol=1e-15)
