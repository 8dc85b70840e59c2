"""Shared white-box builders used across the test modules."""

from __future__ import annotations

import numpy as np

from faultcast.autoencoder import AutoencoderModel, TrainingConfig, bottleneck_layer_sizes, forward
from faultcast.classifier import ErrorBaseline, TrainedClassifier
from faultcast.kpi import KpiId, NormalizationStats


def zero_model(n: int) -> AutoencoderModel:
    """A valid network for n inputs whose output is identically zero."""
    sizes = bottleneck_layer_sizes(n)
    weights = [np.zeros((a, b)) for a, b in zip(sizes, sizes[1:])]
    biases = [np.zeros(b) for b in sizes[1:]]
    return AutoencoderModel(layer_sizes=sizes, weights=weights, biases=biases)


def linear_model(weight: np.ndarray, bias: np.ndarray) -> AutoencoderModel:
    """A single linear layer (the output layer has no activation)."""
    n_in, n_out = weight.shape
    return AutoencoderModel(layer_sizes=[n_in, n_out], weights=[weight.copy()], biases=[bias.copy()])


def make_classifier(
    model: AutoencoderModel,
    baseline: ErrorBaseline,
    kpis: list[KpiId],
    mean: np.ndarray | None = None,
    std: np.ndarray | None = None,
) -> TrainedClassifier:
    """Wire a hand-built model into a classifier with explicit statistics."""
    n = model.n_inputs
    stats = NormalizationStats(
        mean=np.zeros(n) if mean is None else np.asarray(mean, dtype=np.float64),
        std=np.ones(n) if std is None else np.asarray(std, dtype=np.float64),
    )
    return TrainedClassifier(
        model=model,
        baseline=baseline,
        normalization=stats,
        kpis=list(kpis),
        training=TrainingConfig(),
    )


def unit_baseline(n: int) -> ErrorBaseline:
    """state_mu=0, state_std=1, per-KPI mu=0/std=1: thresholds equal sigma."""
    return ErrorBaseline(state_mu=0.0, state_std=1.0, kpi_mu=np.zeros(n), kpi_std=np.ones(n))


def batch_loss(model: AutoencoderModel, batch: np.ndarray) -> float:
    """Reference MSE matching the training objective (mean over rows and KPIs)."""
    batch = np.asarray(batch, dtype=np.float64)
    return float(np.mean((batch - forward(model, batch)) ** 2))
