"""Channel synthesis: a geometric rotary-arm scene and a Jakes WSSUS reference.

The rotary-arm model places the transmitter on a circle of radius
``arm_radius`` around ``arm_center`` in the x-y plane at angle ``alpha``
from the +y axis, ``tx = center + r * (sin(alpha), cos(alpha), 0)``.
Increasing ``alpha`` moves the transmitter towards +x at ``alpha = 0``.
Snapshot ``s`` (1-based) is taken at ``t = (s - 1) * T_s`` with
``T_s = sweep_duration / num_snapshots``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from chanstat.data import ChannelTransferFunction
from chanstat.errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0

LOS = "los"
SINGLE_BOUNCE = "single-bounce"


def kmh(v: float) -> float:
    """Convert km/h to m/s."""
    return v / 3.6


@dataclass(frozen=True)
class PropagationPath:
    kind: str = LOS
    gain: complex = 1.0
    scatterer: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if self.kind not in (LOS, SINGLE_BOUNCE):
            raise ConfigError(f"unknown path kind {self.kind!r}")
        g = complex(self.gain)
        if not (math.isfinite(g.real) and math.isfinite(g.imag)):
            raise ConfigError("path gain must be finite")
        object.__setattr__(self, "gain", g)
        if self.kind == SINGLE_BOUNCE:
            if self.scatterer is None:
                raise ConfigError("single-bounce path needs a scatterer position")
            object.__setattr__(self, "scatterer", _point(self.scatterer, "scatterer"))
        elif self.scatterer is not None:
            raise ConfigError("line-of-sight path takes no scatterer")


def _point(p, name):
    p = tuple(float(x) for x in p)
    if len(p) != 3 or not all(math.isfinite(x) for x in p):
        raise ConfigError(f"{name} must be a finite 3-D point, got {p}")
    return p


@dataclass(frozen=True)
class Scenario:
    """Rotary-arm measurement geometry and radio parameters.

    Lengths in metres, angles in degrees, velocity in m/s (tangential
    speed of the transmitter), frequencies in Hz.
    """

    arm_radius: float = 1.0
    arm_center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    alpha_start: float = -40.0
    alpha_end: float = 40.0
    velocity: float = kmh(100.0)
    rx_position: Tuple[float, float, float] = (0.0, 9.0, 0.0)
    carrier_freq: float = 25.5e9
    bandwidth: float = 100e6
    num_subcarriers: int = 100
    num_snapshots: int = 500
    paths: Tuple[PropagationPath, ...] = field(default_factory=lambda: (PropagationPath(),))
    free_space: bool = False

    def __post_init__(self):
        object.__setattr__(self, "arm_center", _point(self.arm_center, "arm_center"))
        object.__setattr__(self, "rx_position", _point(self.rx_position, "rx_position"))
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.velocity > 0:
            raise ConfigError(f"velocity must be positive, got {self.velocity}")
        if not self.arm_radius > 0:
            raise ConfigError(f"arm radius must be positive, got {self.arm_radius}")
        if not self.alpha_end > self.alpha_start:
            raise ConfigError("alpha_end must exceed alpha_start")
        if self.num_snapshots < 2:
            raise ConfigError("need at least 2 snapshots")
        if self.num_subcarriers < 1:
            raise ConfigError("need at least 1 subcarrier")
        if not (self.carrier_freq > 0 and self.bandwidth > 0):
            raise ConfigError("carrier frequency and bandwidth must be positive")
        if not self.paths:
            raise ConfigError("scenario has no propagation paths")

    @property
    def sweep_duration(self) -> float:
        """Time in seconds to traverse ``alpha_start .. alpha_end``."""
        return math.radians(self.alpha_end - self.alpha_start) * self.arm_radius / self.velocity

    @property
    def sample_time(self) -> float:
        return self.sweep_duration / self.num_snapshots

    @property
    def subcarrier_spacing(self) -> float:
        return self.bandwidth / self.num_subcarriers

    @property
    def angular_velocity_deg(self) -> float:
        return math.degrees(self.velocity / self.arm_radius)

    def snapshot_angles(self) -> np.ndarray:
        """Arm angle in degrees of every snapshot.

        Computed from the snapshot index alone so the positions do not
        depend on the velocity at all.
        """
        s = np.arange(self.num_snapshots, dtype=np.float64)
        return self.alpha_start + (self.alpha_end - self.alpha_start) * s / self.num_snapshots

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


def _arm_points(scn: Scenario, alpha_deg) -> np.ndarray:
    a = np.radians(np.asarray(alpha_deg, dtype=np.float64))
    c = np.asarray(scn.arm_center)
    pts = np.stack([np.sin(a), np.cos(a), np.zeros_like(a)], axis=-1) * scn.arm_radius
    return pts + c


def tx_position(scn: Scenario, t: float) -> np.ndarray:
    """Transmitter position at time `t` seconds after the start of the sweep."""
    T = scn.sweep_duration
    if not -1e-12 * T <= t <= T * (1 + 1e-12):
        raise ConfigError(f"t={t} outside the sweep [0, {T}]")
    alpha = scn.alpha_start + scn.angular_velocity_deg * t
    return _arm_points(scn, alpha)


def path_delays(scn: Scenario) -> np.ndarray:
    """Geometric delay in seconds of every path at every snapshot, shape (S, P)."""
    tx = _arm_points(scn, scn.snapshot_angles())
    rx = np.asarray(scn.rx_position)
    out = np.empty((tx.shape[0], len(scn.paths)))
    for i, p in enumerate(scn.paths):
        if p.kind == LOS:
            d = np.linalg.norm(rx - tx, axis=1)
            short = d
        else:
            sc = np.asarray(p.scatterer)
            d1 = np.linalg.norm(sc - tx, axis=1)
            d2 = float(np.linalg.norm(rx - sc))
            d = d1 + d2
            short = np.minimum(d1, d2)
        if np.min(short) < 1e-6:
            raise ConfigError(f"path {i} passes through the TX trajectory or the RX")
        out[:, i] = d / SPEED_OF_LIGHT
    return out


def synth_ctf(scn: Scenario) -> ChannelTransferFunction:
    """Sample the channel transfer function of a rotary-arm scenario.

    ``H[s, q] = sum_p g_p exp(-j 2 pi (f_c + (q-1) f_s) tau_p(s))`` with exact
    geometric delays. Doppler follows from the transmitter motion. With
    ``free_space`` each path gain is further divided by its length.
    """
    tau = path_delays(scn)
    fs = scn.subcarrier_spacing
    freqs = scn.carrier_freq + fs * np.arange(scn.num_subcarriers)
    gains = np.array([p.gain for p in scn.paths])
    H = np.zeros((scn.num_snapshots, scn.num_subcarriers), dtype=np.complex128)
    for i in range(tau.shape[1]):
        amp = gains[i]
        if scn.free_space:
            amp = amp / (tau[:, i] * SPEED_OF_LIGHT)
            amp = amp[:, None]
        H += amp * np.exp(-2j * np.pi * np.outer(tau[:, i], freqs))
    return ChannelTransferFunction(H, scn.sample_time, fs, scn.carrier_freq)


def static_ctf(scn: Scenario, alpha: Optional[float] = None) -> ChannelTransferFunction:
    """Time-invariant channel with the transmitter frozen at arm angle `alpha`.

    Every snapshot equals the scenario's channel at `alpha` (default: the
    middle of the sweep). Timing metadata is that of the moving scenario.
    """
    if alpha is None:
        alpha = 0.5 * (scn.alpha_start + scn.alpha_end)
    frozen = replace(scn, alpha_start=alpha, alpha_end=alpha + 1e-300, num_snapshots=2)
    row = synth_ctf(frozen).samples[:1]
    H = np.repeat(row, scn.num_snapshots, axis=0)
    return ChannelTransferFunction(H, scn.sample_time, scn.subcarrier_spacing, scn.carrier_freq)


def splice_ctf(before: ChannelTransferFunction, after: ChannelTransferFunction,
               change_index: int) -> ChannelTransferFunction:
    """Abrupt change: rows ``[0, change_index)`` from `before`, the rest from `after`."""
    if before.shape != after.shape:
        raise ConfigError("spliced channels must have the same shape")
    if not 0 < change_index < before.num_snapshots:
        raise ConfigError(f"change index {change_index} outside (0, {before.num_snapshots})")
    H = np.vstack([before.samples[:change_index], after.samples[change_index:]])
    return ChannelTransferFunction(H, before.sample_time, before.sample_freq, before.carrier_freq)


def jakes_wssus_ctf(f_d_max: float, num_sinusoids: int, seed: int, S: int, Q: int,
                    T_s: float, f_s: float,
                    delay_profile: Sequence[Tuple[float, float]],
                    carrier_freq: float = 0.0) -> ChannelTransferFunction:
    """Stationary sum-of-sinusoids (Clarke/Jakes) multipath channel.

    Every tap ``l`` with delay ``tau_l`` and power ``P_l`` fades as
    ``sqrt(P_l / K) sum_k exp(j (2 pi f_d cos(theta_k) t + phi_k))``.
    Angles and phases are drawn from ``numpy.random.default_rng(seed)``
    (PCG64), tap by tap, angles first.

    Parameters
    ----------
    f_d_max : float
        Maximum Doppler shift in Hz.
    num_sinusoids : int
        Sinusoids per tap, at least 8.
    delay_profile : sequence of (delay, power)
        Tap delays in seconds and powers summing to one.
    """
    if num_sinusoids < 8:
        raise ConfigError("Jakes model needs at least 8 sinusoids per tap")
    if f_d_max < 0:
        raise ConfigError("maximum Doppler must be nonnegative")
    if S < 1 or Q < 1 or not (T_s > 0 and f_s > 0):
        raise ConfigError("invalid sampling grid")
    profile = np.asarray(delay_profile, dtype=np.float64).reshape(-1, 2)
    if profile.shape[0] == 0:
        raise ConfigError("empty delay profile")
    delays, powers = profile[:, 0], profile[:, 1]
    if np.any(delays < 0) or np.any(powers < 0) or abs(powers.sum() - 1.0) > 1e-9:
        raise ConfigError("delay profile needs nonnegative delays and powers summing to 1")

    rng = np.random.default_rng(seed)
    t = np.arange(S) * T_s
    q = np.arange(Q)
    H = np.zeros((S, Q), dtype=np.complex128)
    for tau, P in zip(delays, powers):
        theta = rng.uniform(0.0, 2 * np.pi, num_sinusoids)
        phi = rng.uniform(0.0, 2 * np.pi, num_sinusoids)
        arg = 2 * np.pi * f_d_max * np.outer(t, np.cos(theta)) + phi
        h = math.sqrt(P / num_sinusoids) * np.exp(1j * arg).sum(axis=1)
        H += np.outer(h, np.exp(-2j * np.pi * q * f_s * tau))
    return ChannelTransferFunction(H, T_s, f_s, carrier_freq)


def demo_paths() -> Tuple[PropagationPath, ...]:
    """Synthetic demo scene: one LOS path and five fixed point scatterers.

    Path lengths are roughly 8, 13, 21, 27, 33 and 42 m, so every path sits
    in its own 3 m (10 ns) delay cell at 100 MHz bandwidth. Not a model of
    any real laboratory.
    """
    return (
        PropagationPath(LOS, 1.0),
        PropagationPath(SINGLE_BOUNCE, 0.6 * np.exp(0.4j), (-5.0, 3.0, 0.0)),
        PropagationPath(SINGLE_BOUNCE, 0.5 * np.exp(2.1j), (6.0, -3.0, 0.5)),
        PropagationPath(SINGLE_BOUNCE, 0.45 * np.exp(-1.3j), (-10.0, -4.0, 0.0)),
        PropagationPath(SINGLE_BOUNCE, 0.4 * np.exp(2.9j), (12.0, -6.0, 1.0)),
        PropagationPath(SINGLE_BOUNCE, 0.35 * np.exp(-2.4j), (-16.0, 18.0, -0.5)),
    )


def arm_scenario(carrier_freq: float, velocity_kmh: float,
                   paths: Optional[Sequence[PropagationPath]] = None) -> Scenario:
    """Rotary-arm campaign parameters: 1 m arm, -40..40 deg, RX 8 m from the
    arm tip, 100 MHz bandwidth, 500 snapshots. Subcarrier spacing is 400 kHz
    at 40 km/h and 1 MHz otherwise."""
    spacing = 400e3 if velocity_kmh <= 40 else 1e6
    return Scenario(
        arm_radius=1.0,
        alpha_start=-40.0,
        alpha_end=40.0,
        velocity=kmh(velocity_kmh),
        rx_position=(0.0, 9.0, 0.0),
        carrier_freq=carrier_freq,
        bandwidth=100e6,
        num_subcarriers=int(round(100e6 / spacing)),
        num_snapshots=500,
        paths=tuple(paths) if paths is not None else demo_paths(),
    )


SCENARIO_PRESETS = {
    "paper-25g5-v100": lambda: arm_scenario(25.5e9, 100.0),
    "paper-25g5-v40": lambda: arm_scenario(25.5e9, 40.0),
    "paper-2g55-v100": lambda: arm_scenario(2.55e9, 100.0),
}

# S, Q, T_s and f_s match the 100 km/h campaign grid; f_d chosen so that
# N * T_s * f_d = 0.5 for N = 25.
JAKES_PRESET = dict(f_d_max=0.5 / (25 * 1e-4), num_sinusoids=32, seed=1,
                    S=500, Q=100, T_s=1e-4, f_s=1e6, delay_profile=[(0.0, 1.0)],
                    carrier_freq=2.55e9)

PRESETS = sorted(list(SCENARIO_PRESETS) + ["jakes-wssus"])


def preset(name: str):
    """Return ``(ctf, scenario)`` for a named preset; scenario is None for
    the Jakes reference channel."""
    if name in SCENARIO_PRESETS:
        scn = SCENARIO_PRESETS[name]()
        return synth_ctf(scn), scn
    if name == "jakes-wssus":
        return jakes_wssus_ctf(**JAKES_PRESET), None
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
