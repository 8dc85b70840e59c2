"""System-state classification on reconstruction error.

A trained classifier bundles the autoencoder, the normalization used during
training, and an error baseline (mean/std of training reconstruction errors).
A state is anomalous when its error strictly exceeds mu + sigma * std.  The
sigma sweep and knee selection reproduce the threshold-tuning procedure:
count false positives per sigma on failure-free runs, then pick the sigma
with the largest vertical drop below the chord of the curve.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .autoencoder import (
    AutoencoderModel,
    TrainingConfig,
    forward,
    init_autoencoder,
    reconstruction_errors,
    train,
)
from .errors import IoError, SchemaError, SchemaMismatch, TooFewPoints
from .kpi import KpiId, NormalizationStats, TimeSeriesDataset, fit_normalization, parse_kpi_id

# Default sigma multiplier and the sweep grid it was chosen from.
DEFAULT_SIGMA = 4.5
SIGMA_GRID: tuple[float, ...] = (1.5, 3.0, 4.5, 6.0, 7.5, 9.0, 10.5)


@dataclass(frozen=True)
class ClassifierConfig:
    """Threshold multipliers.  ``sigma_kpi=None`` falls back to ``sigma``."""

    sigma: float = DEFAULT_SIGMA
    sigma_kpi: float | None = None

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.sigma_kpi is not None and self.sigma_kpi <= 0:
            raise ValueError("sigma_kpi must be positive")

    @property
    def effective_sigma_kpi(self) -> float:
        return self.sigma if self.sigma_kpi is None else self.sigma_kpi


@dataclass(eq=False)
class ErrorBaseline:
    """Population statistics of training reconstruction errors.

    ``state_mu``/``state_std`` summarize per-state mean squared errors;
    ``kpi_mu``/``kpi_std`` summarize per-KPI squared residuals column-wise.
    """

    state_mu: float
    state_std: float
    kpi_mu: np.ndarray
    kpi_std: np.ndarray

    def __post_init__(self) -> None:
        self.kpi_mu = np.asarray(self.kpi_mu, dtype=np.float64)
        self.kpi_std = np.asarray(self.kpi_std, dtype=np.float64)


@dataclass(frozen=True)
class StateVerdict:
    """Outcome of classifying one state."""

    timestamp: int
    state_error: float
    threshold: float
    anomalous: bool


@dataclass(eq=False)
class TrainedClassifier:
    """Autoencoder plus everything needed to score raw states."""

    model: AutoencoderModel
    baseline: ErrorBaseline
    normalization: NormalizationStats
    kpis: list[KpiId]
    training: TrainingConfig


def state_error(model: AutoencoderModel, state: np.ndarray) -> float:
    """Mean squared reconstruction error of a single normalized state."""
    return float(reconstruction_errors(model, np.asarray(state, dtype=np.float64))[0])


def threshold(baseline: ErrorBaseline, sigma: float) -> float:
    """Anomaly threshold: baseline mean plus sigma standard deviations."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return baseline.state_mu + sigma * baseline.state_std


def classify_state(
    classifier: TrainedClassifier,
    config: ClassifierConfig,
    state: np.ndarray,
    timestamp: int,
) -> StateVerdict:
    """Classify one normalized state.  Anomalous only on strict excess."""
    error = state_error(classifier.model, state)
    limit = threshold(classifier.baseline, config.sigma)
    return StateVerdict(
        timestamp=int(timestamp),
        state_error=error,
        threshold=limit,
        anomalous=error > limit,
    )


def baseline_from_errors(state_errors: np.ndarray, kpi_residuals: np.ndarray) -> ErrorBaseline:
    """Population mean/std over per-state errors and per-KPI squared residuals."""
    state_errors = np.asarray(state_errors, dtype=np.float64)
    kpi_residuals = np.asarray(kpi_residuals, dtype=np.float64)
    return ErrorBaseline(
        state_mu=float(state_errors.mean()),
        state_std=float(state_errors.std()),
        kpi_mu=kpi_residuals.mean(axis=0),
        kpi_std=kpi_residuals.std(axis=0),
    )


def fit_classifier(
    dataset: TimeSeriesDataset, training: TrainingConfig
) -> tuple[TrainedClassifier, list[float]]:
    """Normalize, train the autoencoder, and freeze the error baseline.

    Returns the classifier and the per-epoch training loss curve.
    """
    stats = fit_normalization(dataset)
    normalized = stats.transform(dataset.values)
    model = init_autoencoder(dataset.n_kpis, training.seed)
    model, curve = train(model, normalized, training)
    residuals = (normalized - forward(model, normalized)) ** 2
    baseline = baseline_from_errors(residuals.mean(axis=1), residuals)
    classifier = TrainedClassifier(
        model=model,
        baseline=baseline,
        normalization=stats,
        kpis=list(dataset.kpis),
        training=training,
    )
    return classifier, curve


def check_schema(classifier: TrainedClassifier, kpis: Sequence[KpiId]) -> None:
    """Raise :class:`SchemaMismatch` naming the first offending column."""
    expected = classifier.kpis
    for i in range(max(len(expected), len(kpis))):
        if i >= len(expected):
            raise SchemaMismatch(f"unexpected column {kpis[i]}")
        if i >= len(kpis):
            raise SchemaMismatch(f"missing column {expected[i]}")
        if kpis[i] != expected[i]:
            raise SchemaMismatch(f"column {i + 1} is {kpis[i]}, model expects {expected[i]}")


@dataclass(frozen=True)
class SweepPoint:
    """False-positive and prediction counts at one sigma."""

    sigma: float
    fp_count: int
    prediction_count: int


def sigma_sweep(
    classifier: TrainedClassifier,
    dataset: TimeSeriesDataset,
    grid: Sequence[float] = SIGMA_GRID,
    fault_onset: int | None = None,
) -> list[SweepPoint]:
    """Count anomalous verdicts per sigma on one raw scenario.

    Verdicts strictly before ``fault_onset`` count as false positives,
    verdicts at or after it as predictions.  Without an onset the scenario is
    failure-free and every anomalous verdict is a false positive.
    """
    if len(grid) == 0:
        raise ValueError("sigma grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sigma grid must be strictly ascending")
    check_schema(classifier, dataset.kpis)
    normalized = classifier.normalization.transform(dataset.values)
    errors = reconstruction_errors(classifier.model, normalized)
    before = (
        np.ones(dataset.n_rows, dtype=bool)
        if fault_onset is None
        else dataset.timestamps < fault_onset
    )
    points: list[SweepPoint] = []
    for sigma in grid:
        anomalous = errors > threshold(classifier.baseline, sigma)
        points.append(
            SweepPoint(
                sigma=float(sigma),
                fp_count=int(np.count_nonzero(anomalous & before)),
                prediction_count=int(np.count_nonzero(anomalous & ~before)),
            )
        )
    return points


def chord_drops(curve: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Vertical distance of each interior point below the first-last chord."""
    if len(curve) < 3:
        raise TooFewPoints(f"knee selection needs at least 3 points, got {len(curve)}")
    sigmas = [float(s) for s, _ in curve]
    counts = [float(c) for _, c in curve]
    if any(b <= a for a, b in zip(sigmas, sigmas[1:])):
        raise ValueError("sigma values must be strictly ascending")
    slope = (counts[-1] - counts[0]) / (sigmas[-1] - sigmas[0])
    return [
        (sigmas[i], counts[0] + slope * (sigmas[i] - sigmas[0]) - counts[i])
        for i in range(1, len(curve) - 1)
    ]


def select_elbow(curve: Sequence[tuple[float, float]]) -> float:
    """Sigma of the interior point with the largest drop below the chord.

    Ties resolve to the smaller sigma.
    """
    best_sigma, best_drop = None, -np.inf
    for sigma, drop in chord_drops(curve):
        if drop > best_drop:
            best_sigma, best_drop = sigma, drop
    assert best_sigma is not None
    return best_sigma


MODEL_FORMAT_VERSION = 1


def save_classifier(classifier: TrainedClassifier, path: str | os.PathLike[str]) -> None:
    """Persist a classifier as a single JSON file (full double precision)."""
    payload = {
        "version": MODEL_FORMAT_VERSION,
        "kpis": [str(k) for k in classifier.kpis],
        "layer_sizes": classifier.model.layer_sizes,
        "weights": [w.tolist() for w in classifier.model.weights],
        "biases": [b.tolist() for b in classifier.model.biases],
        "normalization": {
            "mean": classifier.normalization.mean.tolist(),
            "std": classifier.normalization.std.tolist(),
        },
        "baseline": {
            "state_mu": classifier.baseline.state_mu,
            "state_std": classifier.baseline.state_std,
            "kpi_mu": classifier.baseline.kpi_mu.tolist(),
            "kpi_std": classifier.baseline.kpi_std.tolist(),
        },
        "training": {
            "epochs": classifier.training.epochs,
            "learning_rate": classifier.training.learning_rate,
            "batch_size": classifier.training.batch_size,
            "seed": classifier.training.seed,
        },
    }
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write model: {path}") from exc


def load_classifier(path: str | os.PathLike[str]) -> TrainedClassifier:
    """Load a classifier persisted by :func:`save_classifier`."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read model: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON") from exc
    if payload.get("version") != MODEL_FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported model version {payload.get('version')!r}")
    model = AutoencoderModel(
        layer_sizes=[int(s) for s in payload["layer_sizes"]],
        weights=[np.asarray(w, dtype=np.float64) for w in payload["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in payload["biases"]],
    )
    baseline = ErrorBaseline(
        state_mu=float(payload["baseline"]["state_mu"]),
        state_std=float(payload["baseline"]["state_std"]),
        kpi_mu=np.asarray(payload["baseline"]["kpi_mu"], dtype=np.float64),
        kpi_std=np.asarray(payload["baseline"]["kpi_std"], dtype=np.float64),
    )
    stats = NormalizationStats(
        mean=np.asarray(payload["normalization"]["mean"], dtype=np.float64),
        std=np.asarray(payload["normalization"]["std"], dtype=np.float64),
    )
    raw_batch = payload["training"]["batch_size"]
    training = TrainingConfig(
        epochs=int(payload["training"]["epochs"]),
        learning_rate=float(payload["training"]["learning_rate"]),
        batch_size=None if raw_batch is None else int(raw_batch),
        seed=int(payload["training"]["seed"]),
    )
    return TrainedClassifier(
        model=model,
        baseline=baseline,
        normalization=stats,
        kpis=[parse_kpi_id(k) for k in payload["kpis"]],
        training=training,
    )
