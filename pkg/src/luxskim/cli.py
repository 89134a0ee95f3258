"""Command line front end.

Three subcommands cover the pipeline:

``luxskim synth``
    Generate a synthetic capture session and write it as JSONL.

``luxskim featurize``
    Turn a session file into a per-entry feature CSV.

``luxskim eval``
    Cross-validated guessing evaluation, either on a session file or on a
    freshly synthesized one.  ``--compare`` runs the classifier-by-scheme
    grid, ``--sweep-rates`` re-runs one setup at reduced sampling rates.

Options resolve in precedence order: explicit flag, then ``--config`` TOML
file, then the built-in default.  The seed alone has one extra fallback,
the ``LUXSKIM_SEED`` environment variable, between the config file and the
default of 0.  Errors are emitted as one-line JSON records on stderr; the
exit code is 2 for configuration problems, 1 for runtime failures, and 0
only when every requested evaluation cell succeeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import tomli

from .evaluate import (
    CLASSIFIER_KINDS,
    CellResult,
    ClassifierSpec,
    DatasetInfo,
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
    InsufficientSamplesError,
    feature_matrix,
    featurize_windows,
    write_features_csv,
)
from .synth import (
    DEVICES,
    ENVIRONMENTS,
    INPUT_METHODS,
    ConfigError,
    SynthConfig,
    generate_session,
)
from .trace import (
    DEFAULT_WINDOW_MARGIN_NS,
    Session,
    SessionParseError,
    SessionValidationError,
    extract_windows,
    parse_session,
    serialize_session,
)

__all__ = ["main"]

SEED_ENV_VAR = "LUXSKIM_SEED"

# flags that only make sense when the eval input is synthesized
_SYNTH_ONLY_DESTS = (
    "pins", "reps", "device", "env", "input",
    "noise_sigma", "user_bias", "inter_digit", "unsafe_cardinality",
)


def _emit_error(exc_or_name, message: str | None = None, **extra) -> None:
    if isinstance(exc_or_name, BaseException):
        record = {"error": type(exc_or_name).__name__, "message": str(exc_or_name)}
    else:
        record = {"error": str(exc_or_name), "message": message or ""}
    record.update(extra)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _load_config(path: str | None, command: str) -> dict[str, Any]:
    """Merge the shared table and the per-command table of a TOML config."""
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}")
    merged: dict[str, Any] = {}
    sections = {"synth", "featurize", "eval"}
    for key, value in data.items():
        if key in sections:
            continue
        merged[key] = value
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config section [{command}] must be a table")
    merged.update(section)
    return merged


def _resolve(args: argparse.Namespace, cfg: dict, dest: str, default):
    value = getattr(args, dest, None)
    if value is not None:
        return value
    if dest in cfg:
        return cfg[dest]
    return default


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer (got {value!r})")
    return value


def _as_float(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number (got {value!r})")
    return float(value)


def _as_str(value, name: str, choices: Sequence[str] | None = None) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string (got {value!r})")
    if choices is not None and value not in choices:
        raise ConfigError(f"{name} must be one of {sorted(choices)} (got {value!r})")
    return value


def _as_bool(value, name: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{name} must be a boolean (got {value!r})")
    return value


def _resolve_seed(args: argparse.Namespace, cfg: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if "seed" in cfg:
        return _as_int(cfg["seed"], "seed")
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer (got {env!r})")
    return 0


def _parse_rates(value) -> list[float]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        try:
            rates = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"--sweep-rates must be comma-separated numbers (got {value!r})")
    elif isinstance(value, (list, tuple)):
        rates = [_as_float(v, "sweep_rates entry") for v in value]
    else:
        raise ConfigError(f"sweep_rates must be a list of numbers (got {value!r})")
    if not rates:
        raise ConfigError("sweep_rates must name at least one rate")
    return rates


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="TOML config file")


def _add_synth_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pins", type=int, help="number of candidate PINs (15, 30, or 50)")
    parser.add_argument("--reps", type=int, help="entries per PIN")
    parser.add_argument("--device", choices=sorted(DEVICES), help="device preset")
    parser.add_argument("--env", choices=sorted(ENVIRONMENTS), help="lighting preset")
    parser.add_argument("--input", choices=sorted(INPUT_METHODS), help="input method preset")
    parser.add_argument("--noise-sigma", type=float, help="override the preset noise level")
    parser.add_argument("--user-bias", type=float, help="stddev of the per-user pitch offset, degrees")
    parser.add_argument(
        "--inter-digit", nargs=2, type=float, metavar=("LO_MS", "HI_MS"),
        help="uniform bounds for the gap between digit taps",
    )
    parser.add_argument(
        "--unsafe-cardinality", action="store_true", default=None,
        help="allow PIN counts outside the supported sizes",
    )


def _build_synth_config(args: argparse.Namespace, cfg: dict, seed: int) -> SynthConfig:
    inter = _resolve(args, cfg, "inter_digit", (250.0, 600.0))
    if not (isinstance(inter, (list, tuple)) and len(inter) == 2):
        raise ConfigError(f"inter_digit must be a [lo, hi] pair (got {inter!r})")
    return SynthConfig(
        environment=_as_str(_resolve(args, cfg, "env", "office-tube"), "env", sorted(ENVIRONMENTS)),
        device=_as_str(_resolve(args, cfg, "device", "galaxy-s3"), "device", sorted(DEVICES)),
        input_method=_as_str(
            _resolve(args, cfg, "input", "thumb-same-hand"), "input", sorted(INPUT_METHODS)
        ),
        pin_count=_as_int(_resolve(args, cfg, "pins", 50), "pins"),
        reps=_as_int(_resolve(args, cfg, "reps", 5), "reps"),
        user_bias_sigma_deg=_as_float(_resolve(args, cfg, "user_bias", 2.0), "user_bias"),
        noise_sigma=(
            None if _resolve(args, cfg, "noise_sigma", None) is None
            else _as_float(_resolve(args, cfg, "noise_sigma", None), "noise_sigma")
        ),
        inter_digit_ms=(_as_float(inter[0], "inter_digit lo"), _as_float(inter[1], "inter_digit hi")),
        seed=seed,
        allow_any_pin_count=_as_bool(
            _resolve(args, cfg, "unsafe_cardinality", False), "unsafe_cardinality"
        ),
    )


def _write_bytes(data: bytes, output: str) -> None:
    if output == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(output).write_bytes(data)


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, "synth")
    seed = _resolve_seed(args, cfg)
    session = generate_session(_build_synth_config(args, cfg, seed))
    output = _resolve(args, cfg, "output", "-")
    _write_bytes(serialize_session(session), output)
    if output != "-":
        print(json.dumps({
            "written": output,
            "samples": session.n_samples,
            "taps": len(session.taps),
            "pins": len(session.pins),
            "seed": seed,
        }, sort_keys=True))
    return 0


def _load_windows(path: str, margin_ns: int):
    session = parse_session(path)
    return session, extract_windows(session, margin_ns)


def cmd_featurize(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, "featurize")
    session_path = _resolve(args, cfg, "session", None)
    if session_path is None:
        raise ConfigError("featurize requires --session FILE")
    scheme = _as_str(_resolve(args, cfg, "scheme", "lrgbw"), "scheme", SCHEMES)
    normalization = _as_str(
        _resolve(args, cfg, "normalization", "minmax"), "normalization", NORMALIZATIONS
    )
    margin_ms = _as_float(
        _resolve(args, cfg, "margin_ms", DEFAULT_WINDOW_MARGIN_NS / 1e6), "margin_ms"
    )
    _, windows = _load_windows(session_path, int(margin_ms * 1e6))
    features = featurize_windows(windows, scheme=scheme, normalization=normalization)
    output = _resolve(args, cfg, "output", "-")
    if output == "-":
        rows = write_features_csv(features, sys.stdout)
    else:
        rows = write_features_csv(features, output)
        print(json.dumps({"rows": rows, "written": output}, sort_keys=True))
    return 0


def _features_for_scheme(windows, scheme: str, normalization: str):
    return featurize_windows(windows, scheme=scheme, normalization=normalization)


def _cell_record(cell: CellResult) -> dict:
    record: dict[str, Any] = {"classifier": cell.classifier, "scheme": cell.scheme}
    if cell.report is None:
        record["error"] = cell.error
        return record
    report = cell.report
    info = report.info or DatasetInfo()
    record.update(
        normalization=report.normalization,
        rate_hz=info.rate_hz,
        input_method=info.input_method,
        mean_top1=report.mean_top1,
        uncovered=report.uncovered,
    )
    for n in (1, 5, 10):
        if n <= report.n_classes:
            record[f"accuracy_at_{n}"] = report.curve.accuracy_at(n)
    return record


def _print_curve(cell: CellResult) -> None:
    report = cell.report
    print(f"# guess curve: classifier={report.classifier} scheme={report.scheme}")
    print("n_guesses,accuracy,baseline")
    for i in range(report.n_classes):
        print(f"{i + 1},{report.curve.accuracy[i]:.4f},{report.curve.baseline[i]:.4f}")


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, "eval")
    session_path = _resolve(args, cfg, "session", None)
    seed = _resolve_seed(args, cfg)

    if session_path is not None:
        explicit = [d for d in _SYNTH_ONLY_DESTS if getattr(args, d, None) is not None]
        if explicit:
            flags = ", ".join("--" + d.replace("_", "-") for d in explicit)
            raise ConfigError(f"--session cannot be combined with synthesis flags ({flags})")
        session = parse_session(session_path)
    else:
        session = generate_session(_build_synth_config(args, cfg, seed))

    classifier = _as_str(
        _resolve(args, cfg, "classifier", "lda"), "classifier", sorted(CLASSIFIER_KINDS)
    )
    scheme = _as_str(_resolve(args, cfg, "scheme", "lrgbw"), "scheme", SCHEMES)
    normalization = _as_str(
        _resolve(args, cfg, "normalization", "minmax"), "normalization", NORMALIZATIONS
    )
    n_folds = _as_int(_resolve(args, cfg, "folds", 10), "folds")
    margin_ms = _as_float(
        _resolve(args, cfg, "margin_ms", DEFAULT_WINDOW_MARGIN_NS / 1e6), "margin_ms"
    )
    jobs = _as_int(_resolve(args, cfg, "jobs", 1), "jobs")
    if jobs < 1:
        raise ConfigError(f"jobs must be at least 1 (got {jobs})")
    do_compare = bool(_resolve(args, cfg, "compare", False))
    sweep_value = _resolve(args, cfg, "sweep_rates", None)
    if do_compare and sweep_value is not None:
        raise ConfigError("--compare and --sweep-rates cannot be combined")

    margin_ns = int(margin_ms * 1e6)
    info = DatasetInfo.from_session(session)
    spec = ClassifierSpec(classifier)
    echo: dict[str, Any] = {
        "seed": seed,
        "n_folds": n_folds,
        "margin_ms": margin_ms,
        "session": session_path,
        "device": session.meta.device,
        "environment": session.meta.environment,
        "input_method": session.meta.input_method,
        "rate_hz": session.meta.rate_hz,
    }

    if sweep_value is not None:
        rates = _parse_rates(sweep_value)
        try:
            cells = sampling_sweep(
                session, rates, spec, scheme, normalization,
                n_folds=n_folds, seed=seed, margin_ns=margin_ns, jobs=jobs,
            )
        except ValueError as exc:
            raise ConfigError(str(exc))
        echo.update(mode="sweep", classifier=classifier, scheme=scheme,
                    normalization=normalization, sweep_rates=rates)
    elif do_compare:
        windows = extract_windows(session, margin_ns)
        feature_sets = {}
        failed_schemes: list[CellResult] = []
        for sch in SCHEMES:
            try:
                feature_sets[sch] = _features_for_scheme(windows, sch, normalization)
            except (FeatureUnavailableError, InsufficientSamplesError) as exc:
                for kind in sorted(CLASSIFIER_KINDS):
                    failed_schemes.append(
                        CellResult(kind, sch, error=f"{type(exc).__name__}: {exc}")
                    )
        specs = [ClassifierSpec(kind) for kind in sorted(CLASSIFIER_KINDS)]
        cells = compare(feature_sets, specs, n_folds, seed, info, jobs=jobs) + failed_schemes
        echo.update(mode="compare", normalization=normalization)
    else:
        windows = extract_windows(session, margin_ns)
        features = _features_for_scheme(windows, scheme, normalization)
        _, labels = feature_matrix(features)
        plan = make_folds(labels, n_folds, seed)
        cells = [CellResult(classifier, scheme, report=cross_validate(features, spec, plan, info))]
        echo.update(mode="single", classifier=classifier, scheme=scheme,
                    normalization=normalization)

    for cell in cells:
        print(json.dumps(_cell_record(cell), sort_keys=True))
        if cell.report is not None and getattr(args, "guess_curve", False):
            _print_curve(cell)

    outdir = _resolve(args, cfg, "outdir", None)
    if outdir is not None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_csv(cells, out / "report.csv")
        write_summary_json(cells, out / "summary.json", config=echo)

    failed = [cell for cell in cells if cell.report is None]
    for cell in failed:
        _emit_error("CellError", cell.error, classifier=cell.classifier, scheme=cell.scheme)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="luxskim",
        description="Ambient light sensor PIN inference toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic capture session")
    _add_config_arg(p_synth)
    _add_synth_args(p_synth)
    p_synth.add_argument("--seed", type=int, help="random seed")
    p_synth.add_argument("-o", "--output", help="output file ('-' for stdout)")
    p_synth.set_defaults(func=cmd_synth)

    p_feat = sub.add_parser("featurize", help="extract per-entry features to CSV")
    _add_config_arg(p_feat)
    p_feat.add_argument("--session", help="session JSONL file")
    p_feat.add_argument("--scheme", choices=SCHEMES, help="feature scheme")
    p_feat.add_argument("--normalization", choices=NORMALIZATIONS, help="window normalization")
    p_feat.add_argument("--margin-ms", type=float, help="window margin around the taps")
    p_feat.add_argument("-o", "--output", help="output file ('-' for stdout)")
    p_feat.set_defaults(func=cmd_featurize)

    p_eval = sub.add_parser("eval", help="cross-validated guessing evaluation")
    _add_config_arg(p_eval)
    p_eval.add_argument("--session", help="evaluate this session file instead of synthesizing")
    _add_synth_args(p_eval)
    p_eval.add_argument("--seed", type=int, help="random seed (synthesis and fold split)")
    p_eval.add_argument("--classifier", choices=sorted(CLASSIFIER_KINDS), help="classifier kind")
    p_eval.add_argument("--scheme", choices=SCHEMES, help="feature scheme")
    p_eval.add_argument("--normalization", choices=NORMALIZATIONS, help="window normalization")
    p_eval.add_argument("--folds", type=int, help="cross-validation folds")
    p_eval.add_argument("--margin-ms", type=float, help="window margin around the taps")
    p_eval.add_argument("--guess-curve", action="store_true", default=None,
                        help="print the full guess curve for each cell")
    p_eval.add_argument("--compare", action="store_true", default=None,
                        help="run every classifier on every feature scheme")
    p_eval.add_argument("--sweep-rates", dest="sweep_rates", metavar="HZ[,HZ...]",
                        help="re-evaluate at these reduced sampling rates")
    p_eval.add_argument("--jobs", type=int, help="worker threads for grid cells")
    p_eval.add_argument("--outdir", help="write report.csv and summary.json here")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SessionParseError, SessionValidationError) as exc:
        _emit_error(exc)  # bad input data, not bad configuration
        return 1
    except (ConfigError, FeatureUnavailableError, InsufficientSamplesError) as exc:
        _emit_error(exc)
        return 2
    except ValueError as exc:
        _emit_error(exc)
        return 2
    except Exception as exc:  # numeric and I/O failures
        _emit_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
