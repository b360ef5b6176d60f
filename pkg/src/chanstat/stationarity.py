"""Collinearity between LSFs and the resulting stationarity time."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chanstat.data import AnalysisConfig
from chanstat.errors import ConfigError, DegenerateError
from chanstat.lsf import LsfSequence

DEFAULT_CUTOFF = 0.9


def collinearity(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized Frobenius inner product ``<a, b>_F / (|a|_F |b|_F)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ConfigError(f"LSF shapes differ: {a.shape} vs {b.shape}")
    sa, sb = np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)
    if sa == 0 or sb == 0:
        raise DegenerateError("collinearity of an all-zero LSF is undefined")
    # Scale by the peak first so tiny powers do not underflow in the norm.
    a, b = a / sa, b / sb
    g = float(np.vdot(a / np.linalg.norm(a), b / np.linalg.norm(b)))
    return min(max(g, 0.0), 1.0)


@dataclass(frozen=True)
class CollinearityMatrix:
    """Symmetric ``K_t x K_t`` matrix of pairwise LSF collinearities.

    ``values[i, j]`` compares tiles ``i + 1`` and ``j + 1``.
    """

    values: np.ndarray
    time_hop: int
    sample_time: float
    lctf_time_len: int

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.shape[0]

    def tile_times(self) -> np.ndarray:
        """Start time in seconds of each tile."""
        return np.arange(len(self)) * self.time_hop * self.sample_time


def collinearity_matrix(seq: LsfSequence) -> CollinearityMatrix:
    """Collinearity of every pair of tiles in `seq`.

    Raises
    ------
    DegenerateError
        If a tile LSF is identically zero; the message and the ``tile``
        attribute name the first such ``k_t``.
    """
    K = len(seq)
    if K < 1:
        raise ConfigError("empty LSF sequence")
    X = seq.values.reshape(K, -1)
    peak = np.max(np.abs(X), axis=1)
    zero = np.flatnonzero(peak == 0)
    if zero.size:
        k = int(zero[0]) + 1
        raise DegenerateError(f"LSF of tile k_t={k} is identically zero", tile=k)
    Xn = X / peak[:, None]
    Xn /= np.linalg.norm(Xn, axis=1)[:, None]
    G = Xn @ Xn.T
    # Mirror the upper triangle so symmetry is exact.
    iu = np.triu_indices(K, 1)
    G.T[iu] = G[iu]
    np.clip(G, 0.0, 1.0, out=G)
    cfg = seq.config
    return CollinearityMatrix(G, cfg.time_hop, seq.sample_time, cfg.lctf_time_len)


def _forward_runs(gamma: np.ndarray, cutoff: float) -> np.ndarray:
    K = gamma.shape[0]
    runs = np.empty(K, dtype=np.int64)
    for k in range(K):
        below = np.flatnonzero(gamma[k, k:] <= cutoff)
        runs[k] = (below[0] - 1) if below.size else K - 1 - k
    return runs


def _backward_runs(gamma: np.ndarray, cutoff: float) -> np.ndarray:
    flipped = gamma[::-1, ::-1]
    return _forward_runs(flipped, cutoff)[::-1]


def run_length(coll: CollinearityMatrix, k_t: int, cutoff: float = DEFAULT_CUTOFF) -> int:
    """Largest ``d`` with ``gamma[k_t, k_t + d'] > cutoff`` for all ``0 <= d' <= d``.

    Self-comparison is not assumed to pass; a tile whose own collinearity is
    at or below the cutoff gets ``d = 0`` like any other.
    """
    K = len(coll)
    if not 1 <= k_t <= K:
        raise IndexError(f"tile index k_t={k_t} outside [1, {K}]")
    row = coll.values[k_t - 1, k_t - 1:]
    below = np.flatnonzero(row <= cutoff)
    if not below.size:
        return K - k_t
    return max(int(below[0]) - 1, 0)


def stationarity_time(coll: CollinearityMatrix, k_t: int,
                      cutoff: float = DEFAULT_CUTOFF) -> float:
    """Stationarity time of tile `k_t` in seconds, ``(N + d_max * hop) * T_s``."""
    d = run_length(coll, k_t, cutoff)
    return (coll.lctf_time_len + d * coll.time_hop) * coll.sample_time


@dataclass(frozen=True)
class StationarityResult:
    """Per-tile stationarity times.

    Attributes
    ----------
    run_length : ndarray of int
        Number of consecutive later tiles (plus earlier ones when
        ``two_sided``) whose collinearity with the reference exceeds the
        cutoff.
    t_stat : ndarray of float
        ``(N + run_length * hop) * T_s`` in seconds.
    censored : ndarray of bool
        True when the run reached the end of the record, so the true
        stationarity time may be longer.
    """

    run_length: np.ndarray
    t_stat: np.ndarray
    censored: np.ndarray
    cutoff: float
    two_sided: bool = False

    def __len__(self):
        return self.t_stat.size

    def summary(self) -> dict:
        t = self.t_stat
        return {
            "num_tiles": int(t.size),
            "cutoff": self.cutoff,
            "two_sided": self.two_sided,
            "t_stat_median": float(np.median(t)),
            "t_stat_min": float(np.min(t)),
            "t_stat_max": float(np.max(t)),
            "num_censored": int(np.count_nonzero(self.censored)),
        }


def stationarity(coll: CollinearityMatrix, cutoff: float = DEFAULT_CUTOFF,
                 two_sided: bool = False) -> StationarityResult:
    """Stationarity time of every tile.

    The default forward reading scans later tiles only. With
    ``two_sided=True`` the contiguous run is extended towards earlier tiles
    as well and both lengths are added.
    """
    if not 0.0 < cutoff < 1.0:
        raise ConfigError(f"cutoff must lie in (0, 1), got {cutoff}")
    gamma = coll.values
    K = gamma.shape[0]
    fwd = np.maximum(_forward_runs(gamma, cutoff), 0)
    idx = np.arange(K)
    censored = idx + fwd == K - 1
    runs = fwd
    if two_sided:
        back = np.maximum(_backward_runs(gamma, cutoff), 0)
        runs = fwd + back
        censored = censored | (idx - back == 0)
    t = (coll.lctf_time_len + runs * coll.time_hop) * coll.sample_time
    return StationarityResult(runs, t, censored, float(cutoff), two_sided)


def index_to_angle(k_t, geom, cfg: AnalysisConfig):
    """Angular centre position in degrees of tile `k_t` on the rotary arm.

    ``alpha = alpha_start + omega * ((k_t - 1) * hop + N / 2) * T_s`` with
    ``omega = v / r`` in degrees per second and ``T_s`` taken from the
    scenario. Accepts scalars or arrays of tile indices.
    """
    if geom.velocity == 0:
        raise ConfigError("angle mapping undefined for zero velocity")
    omega = math.degrees(geom.velocity / geom.arm_radius)
    k = np.asarray(k_t, dtype=np.float64)
    t_center = ((k - 1) * cfg.time_hop + cfg.lctf_time_len / 2.0) * geom.sample_time
    alpha = geom.alpha_start + omega * t_center
    return float(alpha) if alpha.ndim == 0 else alpha
