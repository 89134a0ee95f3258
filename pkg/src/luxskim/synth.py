"""Synthetic PIN-entry trace generation.

The generator models the one physical effect this toolkit studies: entering a
digit on a handheld touchscreen tilts the device slightly, and the tilt
modulates how much ambient light reaches the front-face light sensor.

Model
-----
Each key on the 3x4 pad has a preset orientation deflection ``(pitch, roll)``
in degrees.  Reaching for a key drives a raised-cosine ramp of duration
``move_ms`` into that deflection; the device holds it for ``hold_ms``
(centered on the tap instant, since users settle before pressing and linger
after), relaxes halfway back over another ramp, and drifts to rest after the
final digit of an entry.  With a per-user rest-orientation offset ``theta0``
(drawn once per session) the instantaneous illuminance is

    E(t) = E0 * max(0, cos(theta0 + pitch(t)) * cos(roll(t))) * (1 + eps(t))

where ``eps`` is stationary AR(1) noise (persistence ``rho``, marginal sigma
``sigma``).  The sensor reports lux on a uniform grid at the device rate,
snapped to the device resolution ``q`` via round-half-away-from-zero; color
devices additionally report per-channel counts ``round(gain_c * E(t) *
(1 + eps_c(t)))`` with independent per-channel AR(1) noise.

Everything is a pure function of the 64-bit seed.  The draw order is fixed:
PIN labels, user offset, tap schedule, lux noise, then channel noise, so two
configs differing only in the tilt preset share labels, timing and noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

import numpy as np
from scipy.signal import lfilter

from .trace import DIGIT_KEYS, Session, SessionMeta, TapEvent

__all__ = [
    "ConfigError",
    "EnvironmentPreset",
    "DevicePreset",
    "InputMethodPreset",
    "SynthConfig",
    "ENVIRONMENTS",
    "DEVICES",
    "INPUT_METHODS",
    "STUDY_PIN_SET_SIZES",
    "generate_session",
    "decimate",
    "quantize",
    "plateau_illuminance",
]

#: PIN-set cardinalities used by the standard experiments.
STUDY_PIN_SET_SIZES = (15, 30, 50)

REPS_RANGE = (3, 10)

# Entry pacing that is not per-key: rest gap between two PIN entries, lead-in
# before the first entry, recording tail after the last, and the drift back to
# rest after an entry's final digit.
INTER_PIN_GAP_MS = (900.0, 1400.0)
SESSION_LEAD_IN_NS = 1_000_000_000
SESSION_TAIL_NS = 1_000_000_000
SETTLE_MS = 400.0

MAX_TILT_DEG = 30.0

# 3x4 pad geometry: rows top to bottom are 123 / 456 / 789 / _0_.
KEY_ROW = {"1": 0, "2": 0, "3": 0, "4": 1, "5": 1, "6": 1,
           "7": 2, "8": 2, "9": 2, "0": 3}
KEY_COL = {"1": 0, "2": 1, "3": 2, "4": 0, "5": 1, "6": 2,
           "7": 0, "8": 1, "9": 2, "0": 1}


class ConfigError(ValueError):
    """A generation parameter is outside its documented domain."""


@dataclass(frozen=True)
class EnvironmentPreset:
    """A lighting scene: base illuminance, channel gains, noise character."""

    name: str
    e0_lux: float
    channel_gains: tuple[float, float, float, float]  # r, g, b, w counts/lux
    noise_sigma: float = 0.01
    noise_persistence: float = 0.9

    def __post_init__(self):
        if self.e0_lux <= 0:
            raise ConfigError("e0_lux must be positive")
        if any(g <= 0 for g in self.channel_gains):
            raise ConfigError("channel gains must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if not 0.0 <= self.noise_persistence < 1.0:
            raise ConfigError("noise_persistence must lie in [0, 1)")


@dataclass(frozen=True)
class DevicePreset:
    """A sensor profile: sampling rate, reported resolution, color support."""

    name: str
    rate_hz: float
    resolution_lux: float
    has_channels: bool = False

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ConfigError("rate_hz must be positive")
        if self.resolution_lux <= 0:
            raise ConfigError("resolution_lux must be positive")


@dataclass(frozen=True)
class InputMethodPreset:
    """Per-key orientation deflections for one way of holding the device.

    ``tilt_targets`` maps each digit to its ``(pitch, roll)`` plateau in
    degrees; magnitudes are capped at 30 degrees.
    """

    name: str
    tilt_targets: Mapping[str, tuple[float, float]]
    move_ms: float = 60.0
    hold_ms: float = 200.0

    def __post_init__(self):
        if set(self.tilt_targets) != set(DIGIT_KEYS):
            raise ConfigError("tilt_targets must cover exactly the digits 0-9")
        for key, (pitch, roll) in self.tilt_targets.items():
            if abs(pitch) > MAX_TILT_DEG or abs(roll) > MAX_TILT_DEG:
                raise ConfigError(
                    f"tilt for key {key!r} exceeds {MAX_TILT_DEG} degrees"
                )
        if self.move_ms <= 0 or self.hold_ms <= 0:
            raise ConfigError("move_ms and hold_ms must be positive")

    @classmethod
    def flat(cls, name: str = "flat") -> "InputMethodPreset":
        """A null preset with zero deflection on every key."""
        return cls(name=name, tilt_targets={k: (0.0, 0.0) for k in DIGIT_KEYS})


ENVIRONMENTS: dict[str, EnvironmentPreset] = {
    p.name: p
    for p in (
        EnvironmentPreset("office-tube", 500.0, (0.9, 1.1, 1.3, 2.8), 0.01, 0.9),
        EnvironmentPreset("living-room-lamp", 150.0, (1.2, 1.0, 0.6, 2.2), 0.012, 0.9),
        EnvironmentPreset("window-daylight", 800.0, (1.0, 1.05, 1.15, 3.0), 0.02, 0.95),
        EnvironmentPreset("window-dusk", 80.0, (1.3, 1.0, 0.7, 2.0), 0.02, 0.95),
    )
}

DEVICES: dict[str, DevicePreset] = {
    p.name: p
    for p in (
        DevicePreset("galaxy-s3", 750.0, 1.0, has_channels=True),
        DevicePreset("galaxy-s4-mini", 100.0, 1.0),
        DevicePreset("galaxy-note2", 100.0, 1.0),
        DevicePreset("nexus-s-cyanogenmod", 140.0, 1.0),
        DevicePreset("nexus-s", 20.0, 10.0),
        DevicePreset("galaxy-s2", 10.0, 10.0),
        DevicePreset("optimus-g", 7.0, 1.0),
        DevicePreset("optimus-g-pro", 7.0, 1.0),
        DevicePreset("nexus-one", 1.0, 1.0),
    )
}

# Tilt tables.  A right thumb rolls the device rightward when reaching keys
# in the left and middle columns and barely at all for the right column, and
# pitch grows with row depth as the thumb reaches down.  Within those
# constraints the per-key pitches are solved so the noiseless plateau
# illuminances E0*cos(pitch)*cos(roll) come out equally spaced from the
# shallowest deflection (key 3) to the deepest (key 7), keeping every pair
# of keys distinguishable by level alone.
_THUMB_SAME = {
    "1": (7.67, 10.0), "2": (5.29, 7.0), "3": (4.00, 0.0),
    "4": (8.91, 10.0), "5": (6.95, 7.0), "6": (6.02, 0.0),
    "7": (10.00, 10.0), "8": (8.29, 7.0), "9": (7.52, 0.0),
    "0": (9.45, 7.0),
}

# the other thumb rolls the opposite way and reaches less far
_THUMB_OTHER = {k: (round(p * 0.85, 2), round(-r * 0.85, 2)) for k, (p, r) in _THUMB_SAME.items()}

_INDEX = {
    "1": (2.28, 3.0), "2": (1.63, 2.0), "3": (1.00, 0.0),
    "4": (2.67, 3.0), "5": (2.13, 2.0), "6": (1.70, 0.0),
    "7": (3.00, 3.0), "8": (2.54, 2.0), "9": (2.19, 0.0),
    "0": (2.89, 2.0),
}

INPUT_METHODS: dict[str, InputMethodPreset] = {
    p.name: p
    for p in (
        InputMethodPreset("thumb-same-hand", _THUMB_SAME),
        InputMethodPreset("thumb-other-hand", _THUMB_OTHER),
        InputMethodPreset("index-finger", _INDEX),
    )
}


def _resolve(value, table, kind):
    if isinstance(value, str):
        try:
            return table[value]
        except KeyError:
            raise ConfigError(
                f"unknown {kind} preset {value!r}; available: {', '.join(sorted(table))}"
            ) from None
    return value


@dataclass(frozen=True)
class SynthConfig:
    """Everything :func:`generate_session` needs, resolvable by preset name."""

    environment: Union[str, EnvironmentPreset] = "office-tube"
    device: Union[str, DevicePreset] = "galaxy-s3"
    input_method: Union[str, InputMethodPreset] = "thumb-same-hand"
    pin_count: int = 50
    reps: int = 5
    user_bias_sigma_deg: float = 2.0
    noise_sigma: float | None = None  # overrides the environment's sigma
    inter_digit_ms: tuple[float, float] = (250.0, 600.0)
    seed: int = 0
    allow_any_pin_count: bool = False

    def resolved(self) -> "SynthConfig":
        cfg = replace(
            self,
            environment=_resolve(self.environment, ENVIRONMENTS, "environment"),
            device=_resolve(self.device, DEVICES, "device"),
            input_method=_resolve(self.input_method, INPUT_METHODS, "input method"),
        )
        if cfg.pin_count not in STUDY_PIN_SET_SIZES and not cfg.allow_any_pin_count:
            raise ConfigError(
                f"pin_count must be one of {STUDY_PIN_SET_SIZES} "
                "(set allow_any_pin_count to override)"
            )
        if not 1 <= cfg.pin_count <= 10000:
            raise ConfigError("pin_count must lie in [1, 10000]")
        if not REPS_RANGE[0] <= cfg.reps <= REPS_RANGE[1]:
            raise ConfigError(f"reps must lie in [{REPS_RANGE[0]}, {REPS_RANGE[1]}]")
        if cfg.user_bias_sigma_deg < 0:
            raise ConfigError("user_bias_sigma_deg must be non-negative")
        if cfg.noise_sigma is not None and cfg.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        lo, hi = cfg.inter_digit_ms
        if not 0 < lo <= hi:
            raise ConfigError("inter_digit_ms must satisfy 0 < lo <= hi")
        return cfg


def plateau_illuminance(
    environment: Union[str, EnvironmentPreset],
    input_method: Union[str, InputMethodPreset],
    key: str,
    user_bias_deg: float = 0.0,
) -> float:
    """Noiseless hold-plateau illuminance for one key, before quantization."""
    env = _resolve(environment, ENVIRONMENTS, "environment")
    method = _resolve(input_method, INPUT_METHODS, "input method")
    pitch, roll = method.tilt_targets[key]
    value = math.cos(math.radians(user_bias_deg + pitch)) * math.cos(math.radians(roll))
    return env.e0_lux * max(0.0, value)


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def _ar1_noise(rng: np.random.Generator, n: int, sigma: float, rho: float) -> np.ndarray:
    """Stationary AR(1) stream with marginal std ``sigma``."""
    if sigma == 0.0 or n == 0:
        rng.standard_normal(n)  # keep the draw order stable across sigma values
        return np.zeros(n)
    eta = rng.standard_normal(n)
    innovations = eta * (sigma * math.sqrt(1.0 - rho * rho))
    innovations[0] = eta[0] * sigma
    return lfilter([1.0], [1.0, -rho], innovations)


class _TiltTrack:
    """Keyframe list for one orientation axis with raised-cosine easing."""

    def __init__(self):
        self.times: list[float] = []
        self.values: list[float] = []

    def value_at(self, t: float) -> float:
        times, values = self.times, self.values
        if not times or t <= times[0]:
            return values[0] if values else 0.0
        if t >= times[-1]:
            return values[-1]
        i = int(np.searchsorted(times, t, side="right")) - 1
        u = (t - times[i]) / (times[i + 1] - times[i])
        ease = 0.5 - 0.5 * math.cos(math.pi * u)
        return values[i] + (values[i + 1] - values[i]) * ease

    def cut_from(self, t: float) -> None:
        while self.times and self.times[-1] >= t:
            self.times.pop()
            self.values.pop()

    def append(self, t: float, value: float) -> None:
        self.times.append(t)
        self.values.append(value)

    def sample(self, grid: np.ndarray) -> np.ndarray:
        times = np.asarray(self.times)
        values = np.asarray(self.values)
        if times.size == 0:
            return np.zeros(grid.shape)
        out = np.empty(grid.shape)
        idx = np.searchsorted(times, grid, side="right") - 1
        before = idx < 0
        after = idx >= times.size - 1
        mid = ~(before | after)
        out[before] = values[0]
        out[after] = values[-1]
        i = idx[mid]
        u = (grid[mid] - times[i]) / (times[i + 1] - times[i])
        ease = 0.5 - 0.5 * np.cos(np.pi * u)
        out[mid] = values[i] + (values[i + 1] - values[i]) * ease
        return out


def _orientation_tracks(
    tap_times: np.ndarray,
    tap_keys: list[str],
    entry_ends: set[int],
    method: InputMethodPreset,
) -> tuple[_TiltTrack, _TiltTrack]:
    """Build pitch/roll keyframes for the whole tap sequence.

    Each tap ramps in over ``move_ms``, holds centered on the tap, ramps
    halfway back, and (after an entry's last digit) settles to rest.  A tap
    whose ramp starts before the previous shape finished simply takes over
    from the profile value at that instant.
    """
    move = method.move_ms * 1e6
    half_hold = method.hold_ms * 0.5e6
    settle = SETTLE_MS * 1e6
    pitch, roll = _TiltTrack(), _TiltTrack()
    for i, (t, key) in enumerate(zip(tap_times, tap_keys)):
        p_target, r_target = method.tilt_targets[key]
        start = float(t) - half_hold - move
        p0, r0 = pitch.value_at(start), roll.value_at(start)
        pitch.cut_from(start)
        roll.cut_from(start)
        for track, v0, target in ((pitch, p0, p_target), (roll, r0, r_target)):
            track.append(start, v0)
            track.append(float(t) - half_hold, target)
            track.append(float(t) + half_hold, target)
            track.append(float(t) + half_hold + move, target * 0.5)
            if i in entry_ends:
                track.append(float(t) + half_hold + move + settle, 0.0)
    return pitch, roll


def generate_session(config: SynthConfig) -> Session:
    """Simulate one capture session; a pure function of ``config.seed``."""
    cfg = config.resolved()
    env: EnvironmentPreset = cfg.environment
    device: DevicePreset = cfg.device
    method: InputMethodPreset = cfg.input_method
    sigma = env.noise_sigma if cfg.noise_sigma is None else cfg.noise_sigma
    rho = env.noise_persistence
    rng = np.random.default_rng(cfg.seed)

    # 1) the PIN set: distinct uniformly random 4-digit codes
    codes = rng.choice(10000, size=cfg.pin_count, replace=False)
    pin_set = [f"{code:04d}" for code in codes]

    # 2) per-user rest-orientation offset
    theta0 = float(rng.normal(0.0, cfg.user_bias_sigma_deg))

    # 3) tap schedule: reps rounds over the PIN set, fresh jitter per entry
    lo_ns, hi_ns = cfg.inter_digit_ms[0] * 1e6, cfg.inter_digit_ms[1] * 1e6
    gap_lo_ns, gap_hi_ns = INTER_PIN_GAP_MS[0] * 1e6, INTER_PIN_GAP_MS[1] * 1e6
    pins: list[str] = []
    tap_times: list[int] = []
    tap_keys: list[str] = []
    entry_ends: set[int] = set()
    cursor = float(SESSION_LEAD_IN_NS)
    for _ in range(cfg.reps):
        for label in pin_set:
            pins.append(label)
            t = cursor
            for j, key in enumerate(label):
                if j > 0:
                    t += rng.uniform(lo_ns, hi_ns)
                tap_times.append(int(round(t)))
                tap_keys.append(key)
            entry_ends.add(len(tap_times) - 1)
            cursor = t + rng.uniform(gap_lo_ns, gap_hi_ns)

    # 4) uniform sample grid covering a small tail past the last tap
    end_ns = tap_times[-1] + SESSION_TAIL_NS
    period_ns = 1e9 / device.rate_hz
    n = int(end_ns / period_ns) + 1
    grid = np.round(np.arange(n) * period_ns).astype(np.int64)

    # orientation -> clean illuminance
    taps_arr = np.array(tap_times, dtype=np.int64)
    pitch_track, roll_track = _orientation_tracks(taps_arr, tap_keys, entry_ends, method)
    pitch = pitch_track.sample(grid.astype(np.float64)) + theta0
    roll = roll_track.sample(grid.astype(np.float64))
    attenuation = np.maximum(0.0, np.cos(np.radians(pitch)) * np.cos(np.radians(roll)))
    clean = env.e0_lux * attenuation

    # 5) lux: AR(1) noise, clip, snap to the device resolution
    eps = _ar1_noise(rng, n, sigma, rho)
    illum = np.maximum(clean * (1.0 + eps), 0.0)
    q = device.resolution_lux
    lux = q * _round_half_away(illum / q)

    # 6) channels: each photodiode sees the same illuminance through its own
    # gain and its own independent noise stream, reported as integer counts.
    # Independence across channels is what makes them worth reading at all:
    # five noisy looks at the plateau beat one.
    channels = None
    if device.has_channels:
        channels = np.empty((n, 4))
        for c, gain in enumerate(env.channel_gains):
            eps_c = _ar1_noise(rng, n, sigma, rho)
            channels[:, c] = _round_half_away(np.maximum(gain * clean * (1.0 + eps_c), 0.0))

    meta = SessionMeta(
        device=device.name,
        environment=env.name,
        input_method=method.name,
        rate_hz=float(device.rate_hz),
        resolution_lux=float(q),
        subject=None,
        seed=cfg.seed,
    )
    taps = [TapEvent(t, k) for t, k in zip(tap_times, tap_keys)]
    return Session(meta, grid, lux, channels, taps, pins)


def decimate(session: Session, target_hz: float) -> Session:
    """Mimic a slower sensor: keep the sample nearest each target-grid instant.

    The grid step is an integer multiple of the session's period (a divider
    clock), so the metadata rate becomes ``rate / round(rate / target)`` and
    repeated decimation composes.  The final sample is always retained so the
    taps stay covered by the sample range.
    """
    rate = session.meta.rate_hz
    if rate is None:
        raise ConfigError("session declares no rate_hz; cannot decimate")
    if not 0 < target_hz <= rate:
        raise ConfigError(f"target_hz must lie in (0, {rate}]")
    stride = max(1, int(round(rate / target_hz)))
    achieved = rate / stride
    t = session.sample_times
    if t.size == 0:
        raise ConfigError("session has no samples")
    step_ns = stride * 1e9 / rate
    k = np.arange(int((t[-1] - t[0]) / step_ns) + 1)
    instants = t[0] + np.round(k * step_ns).astype(np.int64)

    pos = np.searchsorted(t, instants, side="left")
    pos = np.clip(pos, 0, t.size - 1)
    prev = np.clip(pos - 1, 0, t.size - 1)
    # ties go to the earlier sample, matching sample_at
    take_prev = (pos > 0) & ((instants - t[prev]) <= (t[pos] - instants))
    chosen = np.where(take_prev, prev, pos)
    chosen = np.union1d(chosen, [t.size - 1])

    meta = replace(session.meta, rate_hz=achieved)
    return Session(
        meta,
        t[chosen],
        session.lux[chosen],
        None if session.channels is None else session.channels[chosen],
        session.taps,
        session.pins,
    )


def quantize(session: Session, q: float) -> Session:
    """Re-report lux on a coarser grid ``q * round(lux / q)`` (ties away from 0)."""
    if q <= 0:
        raise ConfigError("resolution q must be positive")
    lux = q * _round_half_away(session.lux / q)
    meta = replace(session.meta, resolution_lux=q)
    return Session(meta, session.sample_times, lux, session.channels, session.taps, session.pins)
