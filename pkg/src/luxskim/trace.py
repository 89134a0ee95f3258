"""Sensor-trace sessions: data model, JSONL serialization, window extraction.

A *session* is one recording of a user entering PINs on a touchscreen while
the ambient-light sensor is sampled in the background.  It consists of

* metadata (device, environment, input method, nominal sampling rate,
  reported resolution, subject id, generator seed),
* a time-ordered stream of sensor samples (illuminance in lux, optionally
  the raw R/G/B/W channel counts of color-capable sensors),
* a time-ordered stream of tap events (digits ``0``-``9`` plus the control
  keys ``OK`` and ``DEL``),
* the ordered list of ground-truth PIN labels.

On-disk format (one JSON object per line, UTF-8, no BOM):

.. code-block:: text

    {"type":"session","device":...,"environment":...,"input_method":...,
     "rate_hz":...,"resolution_lux":...,"subject":...,"seed":...}
    {"type":"sample","t":<int ns>,"lux":...[,"r":...,"g":...,"b":...,"w":...]}
    {"type":"tap","t":<int ns>,"key":"0".."9"|"OK"|"DEL"}
    ...
    {"type":"pins","labels":["1593","0482",...]}

Timestamps are integer nanoseconds on a monotonic clock; the channel keys
are either all present or all absent on a sample line.  ``parse_session`` /
``serialize_session`` round-trip losslessly.
"""

from __future__ import annotations

import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

import numpy as np

__all__ = [
    "DIGIT_KEYS",
    "CONTROL_KEYS",
    "DEFAULT_WINDOW_MARGIN_NS",
    "SessionMeta",
    "SensorSample",
    "TapEvent",
    "Session",
    "PinWindow",
    "SessionParseError",
    "SessionValidationError",
    "EmptyWindowWarning",
    "parse_session",
    "serialize_session",
    "write_session",
    "validate_session",
    "extract_windows",
    "sample_at",
]

DIGIT_KEYS = tuple(str(d) for d in range(10))
CONTROL_KEYS = ("OK", "DEL")
CHANNEL_NAMES = ("r", "g", "b", "w")

#: Default slack added on both sides of a PIN window (100 ms).
DEFAULT_WINDOW_MARGIN_NS = 100_000_000

_HEADER_FIELDS = (
    "device",
    "environment",
    "input_method",
    "rate_hz",
    "resolution_lux",
    "subject",
    "seed",
)


class SessionParseError(ValueError):
    """A line of a session file is structurally malformed.

    Carries the 1-based line number in ``line_no``.
    """

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SessionValidationError(ValueError):
    """A structurally well-formed session violates a session invariant."""


class EmptyWindowWarning(UserWarning):
    """A PIN window contained no sensor samples and was skipped."""


@dataclass
class SessionMeta:
    """Session header fields.  Unknown header keys survive in ``extra``."""

    device: str | None = None
    environment: str | None = None
    input_method: str | None = None
    rate_hz: float | None = None
    resolution_lux: float | None = None
    subject: str | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SensorSample:
    """One ambient-light reading.  ``r``..``w`` are None for lux-only devices."""

    t: int
    lux: float
    r: float | None = None
    g: float | None = None
    b: float | None = None
    w: float | None = None


@dataclass(frozen=True)
class TapEvent:
    """One key press: ``t`` in integer ns, ``key`` a digit or OK/DEL."""

    t: int
    key: str


class Session:
    """One recording.  Sample columns are numpy arrays for cheap slicing.

    Attributes
    ----------
    meta : SessionMeta
    sample_times : (n,) int64 array, strictly increasing
    lux : (n,) float64 array, non-negative
    channels : (n, 4) float64 array of R,G,B,W counts, or None
    taps : list of TapEvent, strictly increasing in time
    pins : list of 4-digit label strings, in entry order
    """

    def __init__(
        self,
        meta: SessionMeta,
        sample_times: np.ndarray,
        lux: np.ndarray,
        channels: np.ndarray | None,
        taps: list[TapEvent],
        pins: list[str],
        validate: bool = True,
    ):
        self.meta = meta
        self.sample_times = np.asarray(sample_times, dtype=np.int64)
        self.lux = np.asarray(lux, dtype=np.float64)
        self.channels = None if channels is None else np.asarray(channels, dtype=np.float64)
        self.taps = list(taps)
        self.pins = list(pins)
        if validate:
            validate_session(self)

    @property
    def n_samples(self) -> int:
        return int(self.sample_times.shape[0])

    def digit_taps(self) -> list[TapEvent]:
        return [tap for tap in self.taps if tap.key in DIGIT_KEYS]

    def samples(self) -> Iterable[SensorSample]:
        """Row view over the columnar sample storage."""
        has_ch = self.channels is not None
        for i in range(self.n_samples):
            ch = self.channels[i] if has_ch else (None,) * 4
            yield SensorSample(
                int(self.sample_times[i]), float(self.lux[i]),
                *(None if c is None else float(c) for c in ch),
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Session):
            return NotImplemented
        same_channels = (
            (self.channels is None and other.channels is None)
            or (
                self.channels is not None
                and other.channels is not None
                and np.array_equal(self.channels, other.channels)
            )
        )
        return (
            self.meta == other.meta
            and np.array_equal(self.sample_times, other.sample_times)
            and np.array_equal(self.lux, other.lux)
            and same_channels
            and self.taps == other.taps
            and self.pins == other.pins
        )

    def __repr__(self) -> str:
        return (
            f"Session(device={self.meta.device!r}, rate_hz={self.meta.rate_hz!r}, "
            f"samples={self.n_samples}, taps={len(self.taps)}, pins={len(self.pins)})"
        )


@dataclass
class PinWindow:
    """The sensor rows around one PIN entry, plus its ground-truth label.

    ``times``/``lux``/``channels`` are the sample columns restricted to
    ``[start_ns, end_ns]``; ``tap_times`` holds the 4 digit-tap instants.
    """

    label: str
    times: np.ndarray
    lux: np.ndarray
    channels: np.ndarray | None
    tap_times: np.ndarray
    start_ns: int
    end_ns: int
    device: str | None = None

    @property
    def n_samples(self) -> int:
        return int(self.times.shape[0])

    @property
    def has_channels(self) -> bool:
        return self.channels is not None


def _round_half_away(x: float) -> float:
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def _is_quantized(value: float, q: float) -> bool:
    return math.isclose(value, q * _round_half_away(value / q), rel_tol=1e-9, abs_tol=1e-9)


def validate_session(session: Session) -> None:
    """Check every session invariant; raise SessionValidationError on the first hit."""
    t = session.sample_times
    if t.size and np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0))
        raise SessionValidationError(
            f"sample timestamps not strictly increasing at index {bad + 1}"
        )
    if np.any(session.lux < 0):
        bad = int(np.argmax(session.lux < 0))
        raise SessionValidationError(f"negative lux at sample index {bad}")
    if session.channels is not None and session.channels.shape != (t.size, 4):
        raise SessionValidationError(
            f"channel block shape {session.channels.shape} does not match sample count {t.size}"
        )
    q = session.meta.resolution_lux
    if q is not None and q > 0:
        values = session.lux
        ok = np.isclose(values, q * np.floor(values / q + 0.5), rtol=1e-9, atol=1e-9)
        if not np.all(ok):
            bad = int(np.argmax(~ok))
            raise SessionValidationError(
                f"lux value {values[bad]!r} at sample index {bad} is not a multiple "
                f"of the declared resolution {q!r}"
            )
    last_tap = None
    for i, tap in enumerate(session.taps):
        if tap.key not in DIGIT_KEYS and tap.key not in CONTROL_KEYS:
            raise SessionValidationError(f"unknown key {tap.key!r} at tap index {i}")
        if last_tap is not None and tap.t <= last_tap:
            raise SessionValidationError(f"tap timestamps not strictly increasing at index {i}")
        last_tap = tap.t
        if t.size and not (t[0] <= tap.t <= t[-1]):
            raise SessionValidationError(
                f"tap at t={tap.t} outside the sample time range [{t[0]}, {t[-1]}]"
            )
    for label in session.pins:
        if len(label) != 4 or any(c not in DIGIT_KEYS for c in label):
            raise SessionValidationError(f"PIN label {label!r} is not a 4-digit string")
    digits = session.digit_taps()
    if len(digits) != 4 * len(session.pins):
        raise SessionValidationError(
            f"{len(digits)} digit taps for {len(session.pins)} PIN labels "
            f"(expected {4 * len(session.pins)})"
        )
    for i, label in enumerate(session.pins):
        typed = "".join(tap.key for tap in digits[4 * i : 4 * i + 4])
        if typed != label:
            raise SessionValidationError(
                f"digit taps {typed!r} do not match PIN label {label!r} at entry {i}"
            )


def _require_int(obj: dict, key: str, line_no: int) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SessionParseError(line_no, f"{key!r} must be a number")
    if isinstance(value, float):
        if not value.is_integer():
            raise SessionParseError(line_no, f"{key!r} must be an integer (got {value!r})")
        value = int(value)
    return value


def _require_number(obj: dict, key: str, line_no: int) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SessionParseError(line_no, f"{key!r} must be a number")
    return float(value)


def parse_session(source: Union[str, os.PathLike, bytes, IO]) -> Session:
    """Parse a session JSONL document.

    ``source`` may be a path, raw bytes, or a binary/text file object.
    Structural problems raise :class:`SessionParseError` with the offending
    line number; invariant violations raise :class:`SessionValidationError`.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    if data.startswith(b"\xef\xbb\xbf"):
        raise SessionParseError(1, "file starts with a BOM; the format is plain UTF-8")
    text = data.decode("utf-8")

    meta: SessionMeta | None = None
    times: list[int] = []
    lux: list[float] = []
    channel_rows: list[tuple[float, float, float, float]] = []
    taps: list[TapEvent] = []
    pins: list[str] | None = None
    has_channels: bool | None = None

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for line_no, line in enumerate(lines, start=1):
        if line.strip() == "":
            raise SessionParseError(line_no, "blank line")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SessionParseError(line_no, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict) or "type" not in obj:
            raise SessionParseError(line_no, "expected an object with a 'type' field")
        kind = obj["type"]
        if pins is not None:
            raise SessionParseError(line_no, "content after the final 'pins' line")

        if kind == "session":
            if line_no != 1:
                raise SessionParseError(line_no, "duplicate session header")
            meta = SessionMeta()
            for key, value in obj.items():
                if key == "type":
                    continue
                if key in ("rate_hz", "resolution_lux"):
                    if value is not None:
                        value = _require_number(obj, key, line_no)
                        if value <= 0:
                            raise SessionParseError(line_no, f"{key!r} must be positive")
                    setattr(meta, key, value)
                elif key == "seed":
                    setattr(meta, key, None if value is None else _require_int(obj, key, line_no))
                elif key in _HEADER_FIELDS:
                    if value is not None and not isinstance(value, str):
                        raise SessionParseError(line_no, f"{key!r} must be a string or null")
                    setattr(meta, key, value)
                else:
                    meta.extra[key] = value
        elif meta is None:
            raise SessionParseError(line_no, "first line must be the session header")
        elif kind == "sample":
            allowed = {"type", "t", "lux", *CHANNEL_NAMES}
            unknown = set(obj) - allowed
            if unknown:
                raise SessionParseError(line_no, f"unknown sample fields {sorted(unknown)}")
            if "t" not in obj or "lux" not in obj:
                raise SessionParseError(line_no, "sample requires 't' and 'lux'")
            times.append(_require_int(obj, "t", line_no))
            lux.append(_require_number(obj, "lux", line_no))
            present = [name for name in CHANNEL_NAMES if name in obj]
            if present and len(present) != 4:
                raise SessionParseError(
                    line_no, "channel fields r,g,b,w must be present together or omitted together"
                )
            row_has = bool(present)
            if has_channels is None:
                has_channels = row_has
            elif has_channels != row_has:
                raise SessionParseError(
                    line_no, "channel presence must be uniform across the session"
                )
            if row_has:
                channel_rows.append(tuple(_require_number(obj, n, line_no) for n in CHANNEL_NAMES))
        elif kind == "tap":
            unknown = set(obj) - {"type", "t", "key"}
            if unknown:
                raise SessionParseError(line_no, f"unknown tap fields {sorted(unknown)}")
            if "t" not in obj or "key" not in obj:
                raise SessionParseError(line_no, "tap requires 't' and 'key'")
            key = obj["key"]
            if key not in DIGIT_KEYS and key not in CONTROL_KEYS:
                raise SessionParseError(line_no, f"unknown key {key!r}")
            taps.append(TapEvent(_require_int(obj, "t", line_no), key))
        elif kind == "pins":
            if "labels" not in obj or not isinstance(obj["labels"], list) or not all(
                isinstance(s, str) for s in obj["labels"]
            ):
                raise SessionParseError(line_no, "'pins' requires a list of label strings")
            pins = list(obj["labels"])
        else:
            raise SessionParseError(line_no, f"unknown record type {kind!r}")

    if meta is None:
        raise SessionParseError(1, "empty document; expected a session header")
    if pins is None:
        raise SessionValidationError("missing final 'pins' line")

    channels = np.array(channel_rows, dtype=np.float64) if has_channels else None
    return Session(
        meta,
        np.array(times, dtype=np.int64),
        np.array(lux, dtype=np.float64),
        channels,
        taps,
        pins,
    )


def _json_num(value: float | int | None):
    """Emit integral floats as JSON integers so round-trips are byte-stable."""
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def serialize_session(session: Session) -> bytes:
    """Render a session to JSONL bytes: header, time-ordered records, pins."""
    header: dict = {"type": "session"}
    for name in _HEADER_FIELDS:
        header[name] = _json_num(getattr(session.meta, name))
    for name in sorted(session.meta.extra):
        header[name] = session.meta.extra[name]
    out = io.StringIO()
    dump = lambda obj: out.write(json.dumps(obj, separators=(",", ":")) + "\n")  # noqa: E731
    dump(header)

    has_channels = session.channels is not None
    n = session.n_samples
    taps = session.taps
    si = ti = 0
    while si < n or ti < len(taps):
        # samples win ties so the reading a tap coincides with precedes it
        take_sample = si < n and (ti >= len(taps) or session.sample_times[si] <= taps[ti].t)
        if take_sample:
            rec = {"type": "sample", "t": int(session.sample_times[si]),
                   "lux": _json_num(float(session.lux[si]))}
            if has_channels:
                for j, name in enumerate(CHANNEL_NAMES):
                    rec[name] = _json_num(float(session.channels[si, j]))
            dump(rec)
            si += 1
        else:
            dump({"type": "tap", "t": taps[ti].t, "key": taps[ti].key})
            ti += 1
    dump({"type": "pins", "labels": session.pins})
    return out.getvalue().encode("utf-8")


def write_session(session: Session, path: Union[str, os.PathLike]) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_session(session))


def extract_windows(
    session: Session, margin_ns: int = DEFAULT_WINDOW_MARGIN_NS
) -> list[PinWindow]:
    """Cut one labeled window per entered PIN.

    The i-th window spans ``[t_first - margin, t_last + margin]`` around the
    i-th group of four digit taps, clipped to the recorded sample range.  A
    window with zero sensor rows is dropped with an :class:`EmptyWindowWarning`
    rather than silently or fatally.
    """
    if margin_ns < 0:
        raise ValueError("margin_ns must be non-negative")
    digits = session.digit_taps()
    t = session.sample_times
    windows: list[PinWindow] = []
    for i, label in enumerate(session.pins):
        group = digits[4 * i : 4 * i + 4]
        tap_times = np.array([tap.t for tap in group], dtype=np.int64)
        lo = int(tap_times[0]) - margin_ns
        hi = int(tap_times[-1]) + margin_ns
        if t.size:
            lo = max(lo, int(t[0]))
            hi = min(hi, int(t[-1]))
        a = int(np.searchsorted(t, lo, side="left"))
        b = int(np.searchsorted(t, hi, side="right"))
        if b <= a:
            warnings.warn(
                f"PIN entry {i} ({label!r}): no samples in [{lo}, {hi}]; window skipped",
                EmptyWindowWarning,
                stacklevel=2,
            )
            continue
        windows.append(
            PinWindow(
                label=label,
                times=t[a:b],
                lux=session.lux[a:b],
                channels=None if session.channels is None else session.channels[a:b],
                tap_times=tap_times,
                start_ns=lo,
                end_ns=hi,
                device=session.meta.device,
            )
        )
    return windows


def sample_at(window: PinWindow, t_ns: int) -> SensorSample:
    """Nearest sample to ``t_ns`` (ties to the earlier sample, ends clamped)."""
    times = window.times
    if times.size == 0:
        raise ValueError("window has no samples")
    pos = int(np.searchsorted(times, t_ns, side="left"))
    if pos == 0:
        idx = 0
    elif pos >= times.size:
        idx = times.size - 1
    else:
        before, after = int(times[pos - 1]), int(times[pos])
        idx = pos - 1 if (t_ns - before) <= (after - t_ns) else pos
    ch = window.channels[idx] if window.channels is not None else (None,) * 4
    return SensorSample(
        int(times[idx]), float(window.lux[idx]),
        *(None if c is None else float(c) for c in ch),
    )
