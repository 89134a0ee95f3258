"""Turning PIN windows into fixed-length feature vectors.

Three schemes:

``l``
    The illuminance at the four tap instants (nearest sample each), a
    4-vector ``[L1, L2, L3, L4]``.
``lrgbw``
    Illuminance plus the four color-channel counts at each tap, tap-major:
    ``[L1, R1, G1, B1, W1, ..., L4, R4, G4, B4, W4]`` (20 entries).  Fails
    loudly when the recording device reported no channels.
``poly3``
    Least-squares cubic coefficients per channel over the whole window, with
    window time rescaled to [0, 1]; coefficients ordered highest degree
    first, channels ordered L, R, G, B, W.  4 entries per channel.

Each scheme can be preceded by a per-window, per-channel normalization:
``minmax`` maps a column onto [0, 1] via ``(v - min) / (max - min)``;
``colnorm`` divides a column by its Euclidean norm; degenerate columns
(constant, or all-zero) come out as zeros.  ``none`` skips normalization.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .trace import PinWindow, sample_at

__all__ = [
    "SCHEMES",
    "NORMALIZATIONS",
    "FeatureVector",
    "FeatureUnavailableError",
    "InsufficientSamplesError",
    "normalize_window",
    "extract_lux",
    "extract_lrgbw",
    "extract_poly3",
    "featurize_window",
    "featurize_windows",
    "feature_matrix",
    "write_features_csv",
    "WindowFeaturizer",
]

SCHEMES = ("l", "lrgbw", "poly3")
NORMALIZATIONS = ("minmax", "colnorm", "none")


class FeatureUnavailableError(ValueError):
    """The requested scheme needs data the window does not carry."""


class InsufficientSamplesError(ValueError):
    """The window holds too few samples for the requested scheme."""


@dataclass(frozen=True)
class FeatureVector:
    """One window reduced to numbers, tagged with how it was produced."""

    values: np.ndarray
    label: str
    scheme: str
    normalization: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def _normalize_column(values: np.ndarray, mode: str) -> np.ndarray:
    if mode == "minmax":
        lo, hi = float(values.min()), float(values.max())
        if hi == lo:
            return np.zeros_like(values)
        return (values - lo) / (hi - lo)
    if mode == "colnorm":
        norm = float(np.linalg.norm(values))
        if norm == 0.0:
            return np.zeros_like(values)
        return values / norm
    raise ValueError(f"unknown normalization {mode!r}; expected one of {NORMALIZATIONS}")


def normalize_window(window: PinWindow, mode: str = "minmax") -> PinWindow:
    """Normalize each channel column of the window independently."""
    if mode == "none":
        return window
    lux = _normalize_column(window.lux, mode)
    channels = window.channels
    if channels is not None:
        channels = np.column_stack(
            [_normalize_column(channels[:, j], mode) for j in range(channels.shape[1])]
        )
    return replace(window, lux=lux, channels=channels)


def _require_channels(window: PinWindow, scheme: str) -> None:
    if window.channels is None:
        device = window.device or "unknown device"
        raise FeatureUnavailableError(
            f"scheme {scheme!r} needs R/G/B/W channel data, but {device!r} recorded lux only"
        )


def extract_lux(window: PinWindow) -> np.ndarray:
    """Illuminance at the four tap instants, by nearest-sample lookup."""
    return np.array([sample_at(window, int(t)).lux for t in window.tap_times])


def extract_lrgbw(window: PinWindow) -> np.ndarray:
    """Lux plus channel counts at each tap: [L1,R1,G1,B1,W1, ..., L4,...,W4]."""
    _require_channels(window, "lrgbw")
    out = np.empty(20)
    for i, t in enumerate(window.tap_times):
        s = sample_at(window, int(t))
        out[5 * i : 5 * i + 5] = (s.lux, s.r, s.g, s.b, s.w)
    return out


def extract_poly3(window: PinWindow) -> np.ndarray:
    """Cubic least-squares coefficients per channel, highest degree first.

    Window time is rescaled to [0, 1] before fitting so coefficients are
    comparable across windows of different durations.
    """
    if window.n_samples < 4:
        raise InsufficientSamplesError(
            f"cubic fit needs at least 4 samples; window for PIN {window.label!r} "
            f"has {window.n_samples}"
        )
    t = window.times.astype(np.float64)
    t = (t - t[0]) / (t[-1] - t[0])
    columns = [window.lux]
    if window.channels is not None:
        columns.extend(window.channels[:, j] for j in range(window.channels.shape[1]))
    return np.concatenate([np.polyfit(t, col, 3) for col in columns])


def featurize_window(
    window: PinWindow,
    scheme: str = "lrgbw",
    normalization: str = "minmax",
    poly3_on_normalized: bool = True,
) -> FeatureVector:
    """Normalize, then extract one feature vector from one window.

    ``poly3_on_normalized=False`` fits the cubic on the raw counts instead of
    the normalized ones (it only affects the ``poly3`` scheme).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if normalization not in NORMALIZATIONS:
        raise ValueError(
            f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}"
        )
    if scheme == "l":
        values = extract_lux(normalize_window(window, normalization))
    elif scheme == "lrgbw":
        _require_channels(window, scheme)
        values = extract_lrgbw(normalize_window(window, normalization))
    else:
        source = normalize_window(window, normalization) if poly3_on_normalized else window
        values = extract_poly3(source)
    return FeatureVector(values, window.label, scheme, normalization)


def featurize_windows(
    windows: Iterable[PinWindow],
    scheme: str = "lrgbw",
    normalization: str = "minmax",
    poly3_on_normalized: bool = True,
) -> list[FeatureVector]:
    return [
        featurize_window(w, scheme, normalization, poly3_on_normalized) for w in windows
    ]


def feature_matrix(features: Sequence[FeatureVector]) -> tuple[np.ndarray, list[str]]:
    """Stack a homogeneous feature batch into (X, labels)."""
    if not features:
        raise ValueError("empty feature list")
    schemes = {f.scheme for f in features}
    if len(schemes) != 1:
        raise ValueError(f"mixed schemes in one batch: {sorted(schemes)}")
    X = np.vstack([f.values for f in features])
    return X, [f.label for f in features]


def _format_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def write_features_csv(features: Sequence[FeatureVector], path_or_file) -> int:
    """Write one row per feature vector; returns the row count.

    Columns: ``label,scheme,normalization,x0,x1,...``.  Accepts a path or an
    open text stream.
    """
    X, labels = feature_matrix(features)

    def _write(fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["label", "scheme", "normalization"] + [f"x{i}" for i in range(X.shape[1])])
        for feat, row in zip(features, X):
            writer.writerow(
                [feat.label, feat.scheme, feat.normalization] + [_format_number(v) for v in row]
            )

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
    return len(features)


class WindowFeaturizer(BaseEstimator, TransformerMixin):
    """Stateless transformer view of :func:`featurize_windows`.

    ``transform`` maps a list of :class:`PinWindow` to an ``(n, d)`` array;
    labels stay with the windows (``[w.label for w in windows]``).
    """

    def __init__(
        self,
        scheme: str = "lrgbw",
        normalization: str = "minmax",
        poly3_on_normalized: bool = True,
    ):
        self.scheme = scheme
        self.normalization = normalization
        self.poly3_on_normalized = poly3_on_normalized

    def fit(self, X=None, y=None):
        return self

    def transform(self, windows: Sequence[PinWindow]) -> np.ndarray:
        feats = featurize_windows(
            windows, self.scheme, self.normalization, self.poly3_on_normalized
        )
        return np.vstack([f.values for f in feats])
