"""Cross-validated guessing evaluation.

The attacker metric is rank-based: fit on the training folds, rank every
candidate PIN for each held-out window, and record where the true PIN sits.
``accuracy_at_n`` over the pooled held-out ranks is the fraction of windows
whose true PIN appears within the first ``n`` guesses; the reference
baseline is blind guessing over the candidate set, ``min(1, n / C)``.

Folds are stratified: within each label the samples are shuffled by the fold
seed and dealt round-robin, with the dealing pointer running on across
labels so fold sizes stay balanced too.  A held-out sample whose label never
occurred in training is scored at rank ``C`` (the worst possible) and
counted, never dropped.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .classifiers import KNearestClassifier, LinearDiscriminant, SoftmaxRegression
from .features import FeatureVector, feature_matrix, featurize_windows
from .synth import decimate
from .trace import DEFAULT_WINDOW_MARGIN_NS, Session, extract_windows

__all__ = [
    "CLASSIFIER_KINDS",
    "ClassifierSpec",
    "DatasetInfo",
    "FoldPlan",
    "GuessCurve",
    "EvalReport",
    "CellResult",
    "make_folds",
    "cross_validate",
    "compare",
    "sampling_sweep",
    "write_report_csv",
    "write_summary_json",
]

CLASSIFIER_KINDS = {
    "softmax": SoftmaxRegression,
    "lda": LinearDiscriminant,
    "knn": KNearestClassifier,
}


@dataclass(frozen=True)
class ClassifierSpec:
    """A named classifier constructor, so runs can be described and repeated."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValueError(
                f"unknown classifier {self.kind!r}; expected one of {sorted(CLASSIFIER_KINDS)}"
            )

    def build(self):
        return CLASSIFIER_KINDS[self.kind](**self.params)


@dataclass(frozen=True)
class DatasetInfo:
    """Provenance echoed into reports."""

    rate_hz: float | None = None
    input_method: str | None = None
    device: str | None = None
    environment: str | None = None

    @classmethod
    def from_session(cls, session: Session) -> "DatasetInfo":
        return cls(
            rate_hz=session.meta.rate_hz,
            input_method=session.meta.input_method,
            device=session.meta.device,
            environment=session.meta.environment,
        )


@dataclass(frozen=True)
class FoldPlan:
    """Sample-to-fold assignment for one dataset."""

    n_folds: int
    seed: int
    assignments: np.ndarray

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)


def make_folds(labels: Sequence[str], n_folds: int, seed: int) -> FoldPlan:
    """Stratified fold assignment (see the module docstring)."""
    n = len(labels)
    if not 2 <= n_folds <= n:
        raise ValueError(f"n_folds must lie in [2, {n}] (got {n_folds})")
    rng = np.random.default_rng(seed)
    assignments = np.full(n, -1, dtype=np.intp)
    pointer = 0
    label_arr = np.asarray(labels, dtype=object)
    for label in sorted(set(labels)):
        idx = np.flatnonzero(label_arr == label)
        idx = rng.permutation(idx)
        for i in idx:
            assignments[i] = pointer % n_folds
            pointer += 1
    return FoldPlan(n_folds=n_folds, seed=seed, assignments=assignments)


@dataclass(frozen=True)
class GuessCurve:
    """Pooled accuracy within the first n guesses, for n = 1..C."""

    accuracy: np.ndarray
    baseline: np.ndarray

    def accuracy_at(self, n: int) -> float:
        if not 1 <= n <= len(self.accuracy):
            raise ValueError(f"n must lie in [1, {len(self.accuracy)}]")
        return float(self.accuracy[n - 1])

    def baseline_at(self, n: int) -> float:
        if not 1 <= n <= len(self.baseline):
            raise ValueError(f"n must lie in [1, {len(self.baseline)}]")
        return float(self.baseline[n - 1])

    def __len__(self) -> int:
        return len(self.accuracy)


@dataclass
class EvalReport:
    """Everything one cross-validated run produced."""

    classifier: str
    params: dict
    scheme: str
    normalization: str
    n_folds: int
    seed: int
    n_classes: int
    n_samples: int
    fold_accuracies: list[float]
    mean_top1: float
    curve: GuessCurve
    ranks: np.ndarray
    uncovered: int
    info: DatasetInfo | None = None
    runtime_s: float = 0.0  # wall clock; deliberately kept out of summaries

    def to_dict(self) -> dict:
        info = self.info or DatasetInfo()
        return {
            "classifier": self.classifier,
            "params": self.params,
            "scheme": self.scheme,
            "normalization": self.normalization,
            "n_folds": self.n_folds,
            "seed": self.seed,
            "n_classes": self.n_classes,
            "n_samples": self.n_samples,
            "rate_hz": info.rate_hz,
            "input_method": info.input_method,
            "device": info.device,
            "environment": info.environment,
            "fold_accuracies": self.fold_accuracies,
            "mean_top1": self.mean_top1,
            "accuracy_at_n": self.curve.accuracy.tolist(),
            "baseline_at_n": self.curve.baseline.tolist(),
            "uncovered": self.uncovered,
        }


def cross_validate(
    features: Sequence[FeatureVector],
    spec: ClassifierSpec,
    plan: FoldPlan,
    info: DatasetInfo | None = None,
) -> EvalReport:
    """Rank every held-out window under k-fold cross-validation."""
    started = time.perf_counter()
    X, labels = feature_matrix(features)
    n = X.shape[0]
    if plan.assignments.shape[0] != n:
        raise ValueError(
            f"fold plan covers {plan.assignments.shape[0]} samples, features have {n}"
        )
    classes = sorted(set(labels))
    n_classes = len(classes)
    label_arr = np.asarray(labels, dtype=object)

    ranks = np.zeros(n, dtype=np.intp)
    uncovered = 0
    fold_accuracies: list[float] = []
    for fold in range(plan.n_folds):
        test_idx = plan.fold_indices(fold)
        train_mask = plan.assignments != fold
        model = spec.build()
        model.fit(X[train_mask], label_arr[train_mask])
        trained_classes = set(model.classes_)
        for i in test_idx:
            true_label = label_arr[i]
            if true_label in trained_classes:
                ranks[i] = model.predict_ranked(X[i]).rank_of(true_label)
            else:
                # the model has never seen this PIN: worst possible rank
                ranks[i] = n_classes
                uncovered += 1
        fold_accuracies.append(float(np.mean(ranks[test_idx] == 1)))

    guesses = np.arange(1, n_classes + 1)
    curve = GuessCurve(
        accuracy=np.array([float(np.mean(ranks <= g)) for g in guesses]),
        baseline=np.minimum(1.0, guesses / n_classes),
    )
    feat0 = features[0]
    return EvalReport(
        classifier=spec.kind,
        params=dict(spec.params),
        scheme=feat0.scheme,
        normalization=feat0.normalization,
        n_folds=plan.n_folds,
        seed=plan.seed,
        n_classes=n_classes,
        n_samples=n,
        fold_accuracies=fold_accuracies,
        mean_top1=float(np.mean(fold_accuracies)),
        curve=curve,
        ranks=ranks,
        uncovered=uncovered,
        info=info,
        runtime_s=time.perf_counter() - started,
    )


@dataclass
class CellResult:
    """One grid cell of a comparison run: a report, or a captured failure."""

    classifier: str
    scheme: str
    report: EvalReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.report is not None


def _run_cell(classifier: str, scheme: str, job) -> CellResult:
    try:
        return CellResult(classifier, scheme, report=job())
    except Exception as exc:  # cell failures must not sink the whole grid
        return CellResult(classifier, scheme, error=f"{type(exc).__name__}: {exc}")


def compare(
    feature_sets: Mapping[str, Sequence[FeatureVector]],
    specs: Sequence[ClassifierSpec],
    n_folds: int,
    seed: int,
    info: DatasetInfo | None = None,
    jobs: int = 1,
) -> list[CellResult]:
    """Evaluate every classifier on every feature set with paired fold seeds.

    Cells run independently; a failing cell is reported in its result slot
    and the rest of the grid still completes.  Output order never depends on
    scheduling.
    """
    plans = {}
    for scheme, feats in feature_sets.items():
        _, labels = feature_matrix(feats)
        plans[scheme] = make_folds(labels, n_folds, seed)

    cells = [
        (spec, scheme)
        for spec in specs
        for scheme in feature_sets
    ]

    def job(spec, scheme):
        return lambda: cross_validate(feature_sets[scheme], spec, plans[scheme], info)

    if jobs <= 1:
        return [_run_cell(spec.kind, scheme, job(spec, scheme)) for spec, scheme in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(_run_cell, spec.kind, scheme, job(spec, scheme))
            for spec, scheme in cells
        ]
        return [f.result() for f in futures]


def sampling_sweep(
    session: Session,
    rates: Sequence[float],
    spec: ClassifierSpec,
    scheme: str = "lrgbw",
    normalization: str = "minmax",
    n_folds: int = 10,
    seed: int = 0,
    margin_ns: int = DEFAULT_WINDOW_MARGIN_NS,
    jobs: int = 1,
) -> list[CellResult]:
    """Re-evaluate one session decimated to each requested rate.

    Every cell uses the same fold seed, so rates are compared on paired
    splits.  Rates above the session's own rate are rejected up front.
    """
    own_rate = session.meta.rate_hz
    if own_rate is None:
        raise ValueError("session declares no rate_hz; cannot sweep")
    bad = [r for r in rates if not 0 < r <= own_rate]
    if bad:
        raise ValueError(f"sweep rates must lie in (0, {own_rate}]: {bad}")

    def job(rate):
        def run():
            reduced = decimate(session, rate)
            windows = extract_windows(reduced, margin_ns)
            feats = featurize_windows(windows, scheme, normalization)
            _, labels = feature_matrix(feats)
            plan = make_folds(labels, n_folds, seed)
            return cross_validate(feats, spec, plan, DatasetInfo.from_session(reduced))

        return run

    if jobs <= 1:
        return [_run_cell(spec.kind, scheme, job(rate)) for rate in rates]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_cell, spec.kind, scheme, job(rate)) for rate in rates]
        return [f.result() for f in futures]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(results: Sequence[CellResult], path: Union[str, os.PathLike]) -> int:
    """One row per (successful cell, guess count); returns the row count."""
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["classifier", "scheme", "normalization", "rate_hz",
             "input_method", "n_guesses", "accuracy", "baseline"]
        )
        for cell in results:
            if cell.report is None:
                continue
            report = cell.report
            info = report.info or DatasetInfo()
            for i in range(report.n_classes):
                writer.writerow(
                    [
                        report.classifier,
                        report.scheme,
                        report.normalization,
                        _fmt(info.rate_hz),
                        _fmt(info.input_method),
                        i + 1,
                        _fmt(float(report.curve.accuracy[i])),
                        _fmt(float(report.curve.baseline[i])),
                    ]
                )
                rows += 1
    return rows


def write_summary_json(
    results: Sequence[CellResult],
    path: Union[str, os.PathLike],
    config: dict | None = None,
) -> None:
    """Deterministic run summary (no wall-clock fields)."""
    payload = {
        "config": config or {},
        "cells": [
            {
                "classifier": cell.classifier,
                "scheme": cell.scheme,
                **(
                    {"report": cell.report.to_dict()}
                    if cell.report is not None
                    else {"error": cell.error}
                ),
            }
            for cell in results
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
