"""Ambient light sensor PIN inference toolkit.

The package models a side channel: small screen tilts while a PIN is typed
modulate what a phone's ambient light sensor reads, and with a known
candidate set those readings identify the PIN far better than chance.  It
provides a session trace format, a physics-based synthesizer, per-entry
feature extraction, three rank-producing classifiers, and a cross-validated
guessing evaluation, plus a CLI (``luxskim``) over all of it.
"""

from .classifiers import (
    KNearestClassifier,
    LinearDiscriminant,
    NumericTrainingError,
    RankedPrediction,
    SingularCovarianceError,
    SoftmaxRegression,
    TrainingSet,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    softmax_objective,
)
from .evaluate import (
    CLASSIFIER_KINDS,
    CellResult,
    ClassifierSpec,
    DatasetInfo,
    EvalReport,
    FoldPlan,
    GuessCurve,
    compare,
    cross_validate,
    make_folds,
    sampling_sweep,
    write_report_csv,
    write_summary_json,
)
from .features import (
    NORMALIZATIONS,
    SCHEMES,
    FeatureUnavailableError,
    FeatureVector,
    InsufficientSamplesError,
    WindowFeaturizer,
    extract_lrgbw,
    extract_lux,
    extract_poly3,
    feature_matrix,
    featurize_window,
    featurize_windows,
    normalize_window,
    write_features_csv,
)
from .synth import (
    DEVICES,
    ENVIRONMENTS,
    INPUT_METHODS,
    STUDY_PIN_SET_SIZES,
    ConfigError,
    DevicePreset,
    EnvironmentPreset,
    InputMethodPreset,
    SynthConfig,
    decimate,
    generate_session,
    plateau_illuminance,
    quantize,
)
from .trace import (
    CHANNEL_NAMES,
    CONTROL_KEYS,
    DEFAULT_WINDOW_MARGIN_NS,
    DIGIT_KEYS,
    EmptyWindowWarning,
    PinWindow,
    SensorSample,
    Session,
    SessionMeta,
    SessionParseError,
    SessionValidationError,
    TapEvent,
    extract_windows,
    parse_session,
    sample_at,
    serialize_session,
    validate_session,
    write_session,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # trace
    "CHANNEL_NAMES",
    "CONTROL_KEYS",
    "DEFAULT_WINDOW_MARGIN_NS",
    "DIGIT_KEYS",
    "EmptyWindowWarning",
    "PinWindow",
    "SensorSample",
    "Session",
    "SessionMeta",
    "SessionParseError",
    "SessionValidationError",
    "TapEvent",
    "extract_windows",
    "parse_session",
    "sample_at",
    "serialize_session",
    "validate_session",
    "write_session",
    # synth
    "DEVICES",
    "ENVIRONMENTS",
    "INPUT_METHODS",
    "STUDY_PIN_SET_SIZES",
    "ConfigError",
    "DevicePreset",
    "EnvironmentPreset",
    "InputMethodPreset",
    "SynthConfig",
    "decimate",
    "generate_session",
    "plateau_illuminance",
    "quantize",
    # features
    "NORMALIZATIONS",
    "SCHEMES",
    "FeatureUnavailableError",
    "FeatureVector",
    "InsufficientSamplesError",
    "WindowFeaturizer",
    "extract_lrgbw",
    "extract_lux",
    "extract_poly3",
    "feature_matrix",
    "featurize_window",
    "featurize_windows",
    "normalize_window",
    "write_features_csv",
    # classifiers
    "KNearestClassifier",
    "LinearDiscriminant",
    "NumericTrainingError",
    "RankedPrediction",
    "SingularCovarianceError",
    "SoftmaxRegression",
    "TrainingSet",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "softmax_objective",
    # evaluate
    "CLASSIFIER_KINDS",
    "CellResult",
    "ClassifierSpec",
    "DatasetInfo",
    "EvalReport",
    "FoldPlan",
    "GuessCurve",
    "compare",
    "cross_validate",
    "make_folds",
    "sampling_sweep",
    "write_report_csv",
    "write_summary_json",
]
