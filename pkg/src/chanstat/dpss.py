"""Discrete prolate spheroidal sequences (Slepian tapers).

Half-bandwidths are given in DFT bins: ``W`` bins on a length ``L``
sequence is a normalized half-bandwidth of ``W / L`` cycles per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from chanstat.errors import ConfigError, OracleBudgetError

ORACLE_MAX_LENGTH = 512


@dataclass(frozen=True)
class TaperSet:
    """Orthonormal DPSS tapers ordered by decreasing concentration.

    Attributes
    ----------
    length : int
    half_bandwidth_bins : float
    tapers : ndarray, shape (count, length)
        One unit-norm taper per row.
    concentrations : ndarray, shape (count,)
        Fraction of each taper's energy inside ``|f| <= W / length``.
    """

    length: int
    half_bandwidth_bins: float
    tapers: np.ndarray
    concentrations: np.ndarray

    def __post_init__(self):
        for name in ("tapers", "concentrations"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def count(self) -> int:
        return self.tapers.shape[0]

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.tapers)


def _check_args(length, W, count):
    if length < 1:
        raise ConfigError(f"taper length must be >= 1, got {length}")
    if not 0.0 < W < length / 2.0:
        raise ConfigError(f"half-bandwidth W={W} must satisfy 0 < W < {length}/2")
    limit = max(math.floor(2 * W), 1)
    if not 1 <= count <= limit:
        raise ConfigError(f"taper count {count} outside [1, {limit}] for W={W}")


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # First element above a relative noise floor made positive; exact zeros
    # from eigen-solvers are rarely exact, hence the floor.
    out = vecs.copy()
    for row in out:
        floor = 1e-10 * np.max(np.abs(row))
        idx = np.flatnonzero(np.abs(row) > floor)
        if idx.size and row[idx[0]] < 0:
            row *= -1.0
    return out


def concentration_kernel(length: int, W: float) -> np.ndarray:
    """Dense ``L x L`` kernel ``sin(2 pi w (m-n)) / (pi (m-n))`` with ``w = W / L``."""
    w = W / length
    d = np.subtract.outer(np.arange(length), np.arange(length)).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        A = np.sin(2 * np.pi * w * d) / (np.pi * d)
    np.fill_diagonal(A, 2 * w)
    return A


def concentration(taper: np.ndarray, W: float) -> float:
    """In-band energy fraction ``u^T A u`` of a unit-norm taper.

    Evaluated from the taper autocorrelation, so the kernel matrix is
    never formed.
    """
    L = taper.size
    w = W / L
    nfft = 1 << int(np.ceil(np.log2(2 * L)))
    spec = np.fft.rfft(taper, nfft)
    r = np.fft.irfft(spec * np.conj(spec), nfft)[:L]
    m = np.arange(1, L)
    return float(2 * w * r[0] + 2 * np.sum(r[1:] * np.sin(2 * np.pi * w * m) / (np.pi * m)))


def generate_dpss(length: int, half_bandwidth_bins: float, count: int) -> TaperSet:
    """Compute the `count` most concentrated DPSS of a given length.

    The tapers are eigenvectors of the symmetric tridiagonal matrix that
    commutes with the concentration kernel (diagonal
    ``((L-1-2k)/2)**2 * cos(2 pi W / L)``, off-diagonal ``k (L-k) / 2``).
    Each taper is sign-normalized so its first non-negligible sample is
    positive.
    """
    _check_args(length, half_bandwidth_bins, count)
    L = length
    if L == 1:
        tapers = np.ones((1, 1))
    else:
        k = np.arange(L, dtype=np.float64)
        diag = ((L - 1 - 2 * k) / 2.0) ** 2 * np.cos(2 * np.pi * half_bandwidth_bins / L)
        off = k[1:] * (L - k[1:]) / 2.0
        _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(L - count, L - 1))
        tapers = vecs[:, ::-1].T
    tapers = _fix_signs(tapers)
    lam = np.array([concentration(t, half_bandwidth_bins) for t in tapers])
    return TaperSet(L, float(half_bandwidth_bins), tapers, lam)


def dpss_oracle(length: int, half_bandwidth_bins: float, count: int) -> TaperSet:
    """Reference DPSS from a dense eigen-solve of the concentration kernel.

    Only meant for cross-checking :func:`generate_dpss` on short lengths.
    """
    if length > ORACLE_MAX_LENGTH:
        raise OracleBudgetError(
            f"dense oracle limited to length <= {ORACLE_MAX_LENGTH}, got {length}")
    _check_args(length, half_bandwidth_bins, count)
    A = concentration_kernel(length, half_bandwidth_bins)
    vals, vecs = eigh(A, subset_by_index=(length - count, length - 1))
    return TaperSet(length, float(half_bandwidth_bins),
                    _fix_signs(vecs[:, ::-1].T), vals[::-1].copy())


def make_tf_window(u: np.ndarray, v: np.ndarray,
                   shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Separable time-frequency window ``G[s', q'] = u[s'] v[q']``.

    Parameters
    ----------
    u, v : ndarray
        Unit-norm time and frequency tapers.
    shape : tuple of int, optional
        Expected ``(N, M)``; a mismatch raises :class:`ConfigError`.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1:
        raise ConfigError("tapers must be 1-D vectors")
    if shape is not None and (u.size, v.size) != tuple(shape):
        raise ConfigError(f"window shape {(u.size, v.size)} does not match {tuple(shape)}")
    for name, x in (("u", u), ("v", v)):
        if abs(np.linalg.norm(x) - 1.0) > 1e-9:
            raise ConfigError(f"taper {name} is not unit norm")
    return np.outer(u, v)
