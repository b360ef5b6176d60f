"""Local scattering function (LSF) estimation.

Each LCTF is multiplied by the separable DPSS windows, transformed to the
Doppler-delay domain and the squared magnitudes are averaged with uniform
weights. Doppler rows are kept in natural DFT order internally; use
:meth:`LsfSequence.shifted` for a negative-to-positive Doppler layout.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from chanstat.data import AnalysisConfig, ChannelTransferFunction, num_lctf, tile_start
from chanstat.dpss import TaperSet, generate_dpss, make_tf_window
from chanstat.errors import ConfigError

THREADS_ENV = "CHANSTAT_THREADS"


def windowed_transfer(lctf: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Hadamard product of an LCTF and a real window of the same shape."""
    if np.shape(lctf) != np.shape(window):
        raise ConfigError(f"shape mismatch: LCTF {np.shape(lctf)} vs window {np.shape(window)}")
    return np.asarray(lctf) * np.asarray(window)


def doppler_delay_transform(windowed: np.ndarray) -> np.ndarray:
    """Unitary DFT over time (rows -> Doppler) and unitary IDFT over frequency
    (columns -> delay). Frobenius norm is preserved."""
    out = np.fft.fft(windowed, axis=0, norm="ortho")
    return np.fft.ifft(out, axis=1, norm="ortho")


def estimate_lsf(lctf: np.ndarray, tapers_t: TaperSet, tapers_f: TaperSet) -> np.ndarray:
    """Multitaper LSF of one tile.

    Returns the real, nonnegative ``N x M`` matrix
    ``(1 / IJ) * sum_ij |F_N (H * G_ij) F_M^H|^2``.
    """
    lctf = np.asarray(lctf)
    if lctf.ndim != 2:
        raise ConfigError("LCTF must be a 2-D matrix")
    N, M = lctf.shape
    if tapers_t.length != N or tapers_f.length != M:
        raise ConfigError(
            f"taper lengths ({tapers_t.length}, {tapers_f.length}) do not match tile ({N}, {M})")
    acc = np.zeros((N, M))
    for u in tapers_t.tapers:
        for v in tapers_f.tapers:
            S = doppler_delay_transform(windowed_transfer(lctf, make_tf_window(u, v)))
            acc += S.real ** 2 + S.imag ** 2
    return acc / (tapers_t.count * tapers_f.count)


@dataclass(frozen=True)
class LsfSequence:
    """LSFs of all tiles ``k_t = 1..K_t``.

    ``values[k]`` holds the LSF of tile ``k + 1`` with Doppler rows in
    natural DFT order and delay columns.
    """

    values: np.ndarray
    config: AnalysisConfig
    sample_time: float
    sample_freq: float
    carrier_freq: float = 0.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 3:
            raise ConfigError("LSF values must have shape (K, N, M)")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    def tile(self, k_t: int) -> np.ndarray:
        """LSF of 1-based tile `k_t`."""
        if not 1 <= k_t <= len(self):
            raise IndexError(f"tile index k_t={k_t} outside [1, {len(self)}]")
        return self.values[k_t - 1]

    @property
    def tile_shape(self):
        return self.values.shape[1:]

    def doppler_axis(self, shifted: bool = True) -> np.ndarray:
        """Doppler frequency in Hz of every row.

        With ``shifted=True`` row ``p`` (1-based) maps to
        ``(p - 1 - N // 2) / (N * T_s)``.
        """
        N = self.values.shape[1]
        f = np.fft.fftfreq(N, d=self.sample_time)
        return np.fft.fftshift(f) if shifted else f

    def delay_axis(self) -> np.ndarray:
        """Delay in seconds of every column, ``r / (M * f_s)``."""
        M = self.values.shape[2]
        return np.arange(M) / (M * self.sample_freq)

    def shifted(self) -> np.ndarray:
        """Values with the Doppler axis reordered from negative to positive."""
        return np.fft.fftshift(self.values, axes=1)


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def lsf_sequence(ctf: ChannelTransferFunction, cfg: AnalysisConfig,
                 workers: Optional[int] = None) -> LsfSequence:
    """Estimate the LSF of every tile of `ctf`.

    Tapers are generated once. Tiles may be evaluated on a thread pool
    (capped by ``CHANSTAT_THREADS``); results are assembled in tile order
    and do not depend on the worker count.
    """
    cfg = cfg.resolve(ctf)
    N, M, hop = cfg.lctf_time_len, cfg.lctf_freq_len, cfg.time_hop
    K = num_lctf(ctf.num_snapshots, N, hop)
    tap_t = generate_dpss(N, cfg.taper_time_bw, cfg.taper_time_count)
    tap_f = generate_dpss(M, cfg.taper_freq_bw, cfg.taper_freq_count)
    samples = ctf.samples

    def one(k):
        s0 = tile_start(k, hop)
        return estimate_lsf(samples[s0:s0 + N, :M], tap_t, tap_f)

    n = min(worker_count(workers), K)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            tiles = list(pool.map(one, range(1, K + 1)))
    else:
        tiles = [one(k) for k in range(1, K + 1)]
    return LsfSequence(np.stack(tiles), cfg, ctf.sample_time, ctf.sample_freq, ctf.carrier_freq)
