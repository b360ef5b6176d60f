"""Sampled channel data, analysis configuration and LCTF tiling.

Tile indices ``k_t`` are 1-based throughout the public API so that they
match the values written to CSV files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from chanstat.errors import ConfigError


@dataclass(frozen=True)
class ChannelTransferFunction:
    """Time-variant channel transfer function ``H[s, q] = H(s*T_s, q*f_s)``.

    Parameters
    ----------
    samples : array_like, shape (S, Q)
        Complex channel gains, rows are time snapshots and columns are
        subcarriers. Stored as a read-only ``complex128`` array.
    sample_time : float
        Snapshot spacing ``T_s`` in seconds.
    sample_freq : float
        Subcarrier spacing ``f_s`` in Hz.
    carrier_freq : float
        Centre frequency in Hz. Metadata only.
    """

    samples: np.ndarray
    sample_time: float
    sample_freq: float
    carrier_freq: float = 0.0

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.complex128, copy=True)
        if arr.ndim != 2:
            raise ConfigError(f"samples must be a 2-D matrix, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ConfigError(f"samples must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("samples contain NaN or Inf")
        if not (self.sample_time > 0 and math.isfinite(self.sample_time)):
            raise ConfigError(f"sample_time must be positive, got {self.sample_time}")
        if not (self.sample_freq > 0 and math.isfinite(self.sample_freq)):
            raise ConfigError(f"sample_freq must be positive, got {self.sample_freq}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_time", float(self.sample_time))
        object.__setattr__(self, "sample_freq", float(self.sample_freq))
        object.__setattr__(self, "carrier_freq", float(self.carrier_freq))

    @property
    def num_snapshots(self) -> int:
        return self.samples.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.samples.shape[1]

    @property
    def shape(self):
        return self.samples.shape

    @property
    def duration(self) -> float:
        """Record length ``S * T_s`` in seconds."""
        return self.num_snapshots * self.sample_time

    def scaled(self, factor: complex) -> "ChannelTransferFunction":
        return replace(self, samples=self.samples * factor)


@dataclass(frozen=True)
class AnalysisConfig:
    """LCTF size, hop, DPSS parameters and collinearity cutoff.

    ``lctf_freq_len=None`` means the whole band (``M = Q``); the frequency
    axis is never tiled.
    """

    lctf_time_len: int = 25
    lctf_freq_len: Optional[int] = None
    time_hop: int = 2
    taper_time_bw: float = 2.0
    taper_time_count: int = 2
    taper_freq_bw: float = 1.0
    taper_freq_count: int = 1
    cutoff: float = 0.9

    def __post_init__(self):
        if self.lctf_time_len < 1:
            raise ConfigError(f"N must be >= 1, got {self.lctf_time_len}")
        if self.lctf_freq_len is not None and self.lctf_freq_len < 1:
            raise ConfigError(f"M must be >= 1, got {self.lctf_freq_len}")
        if self.time_hop < 1:
            raise ConfigError(f"time hop must be >= 1, got {self.time_hop}")
        if not 0.0 < self.cutoff < 1.0:
            raise ConfigError(f"cutoff must lie in (0, 1), got {self.cutoff}")
        _check_taper_count(self.taper_time_bw, self.taper_time_count, "time")
        _check_taper_count(self.taper_freq_bw, self.taper_freq_count, "frequency")

    def resolve(self, ctf: ChannelTransferFunction) -> "AnalysisConfig":
        """Return a copy with ``M`` filled in and all sizes checked against `ctf`."""
        S, Q = ctf.shape
        M = Q if self.lctf_freq_len is None else self.lctf_freq_len
        if self.lctf_time_len > S:
            raise ConfigError(f"N={self.lctf_time_len} exceeds S={S}")
        if M > Q:
            raise ConfigError(f"M={M} exceeds Q={Q}")
        for L, W, name in ((self.lctf_time_len, self.taper_time_bw, "W_t"),
                           (M, self.taper_freq_bw, "W_f")):
            if not 0.0 < W < L / 2.0:
                raise ConfigError(f"{name}={W} must satisfy 0 < {name} < {L}/2")
        return replace(self, lctf_freq_len=M)

    def as_dict(self) -> dict:
        return {
            "N": self.lctf_time_len,
            "M": self.lctf_freq_len,
            "hop": self.time_hop,
            "W_t": self.taper_time_bw,
            "I": self.taper_time_count,
            "W_f": self.taper_freq_bw,
            "J": self.taper_freq_count,
            "cutoff": self.cutoff,
        }


def _check_taper_count(W, count, axis):
    if W <= 0:
        raise ConfigError(f"{axis} half-bandwidth must be positive, got {W}")
    limit = max(math.floor(2 * W), 1)
    if not 1 <= count <= limit:
        raise ConfigError(
            f"{axis} taper count {count} outside [1, {limit}] for half-bandwidth {W}")


def num_lctf(S: int, N: int, hop: int) -> int:
    """Number of LCTF tiles, ``floor((S - N) / hop) + 1``."""
    if hop < 1:
        raise ConfigError(f"hop must be >= 1, got {hop}")
    if N < 1 or N > S:
        raise ConfigError(f"LCTF length N={N} must lie in [1, S={S}]")
    return (S - N) // hop + 1


def tile_start(k_t: int, hop: int) -> int:
    """0-based first row of tile `k_t` (1-based)."""
    return (k_t - 1) * hop


def extract_lctf(ctf: ChannelTransferFunction, k_t: int, cfg: AnalysisConfig) -> np.ndarray:
    """Return the N x M local channel transfer function of tile `k_t`.

    The result is a read-only view into ``ctf.samples``; no scaling applied.
    """
    cfg = cfg.resolve(ctf)
    K = num_lctf(ctf.num_snapshots, cfg.lctf_time_len, cfg.time_hop)
    if not 1 <= k_t <= K:
        raise IndexError(f"tile index k_t={k_t} outside [1, {K}]")
    s0 = tile_start(k_t, cfg.time_hop)
    return ctf.samples[s0:s0 + cfg.lctf_time_len, :cfg.lctf_freq_len]
