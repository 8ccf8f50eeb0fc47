"""Per-class accuracy and fairness-gap metrics.

A prediction set over C classes yields a length-C accuracy vector; classes
absent from the evaluation labels get NaN rather than a silent zero.
Unfairness collapses that vector to a single gap, either max-min or
mean-min, and refuses to aggregate over undefined entries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

UNDEFINED = float("nan")


class UndefinedAccuracyError(ValueError):
    """Raised when a gap metric would aggregate classes with no eval examples."""

    def __init__(self, classes):
        self.classes = list(classes)
        super().__init__(f"per-class accuracy undefined for classes {self.classes}")


class FairnessMetric(enum.Enum):
    MAX_MIN = "max_min"
    MEAN_MIN = "mean_min"


def per_class_accuracy(predictions, labels, classes: int) -> np.ndarray:
    """Accuracy within each true class; NaN where the class has no examples."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ValueError(f"label out of range for {classes} classes")
    correct = np.bincount(labels[predictions == labels], minlength=classes).astype(float)
    totals = np.bincount(labels, minlength=classes).astype(float)
    out = np.full(classes, UNDEFINED)
    present = totals > 0
    out[present] = correct[present] / totals[present]
    return out


def total_accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("empty evaluation set")
    return float((predictions == labels).mean())


def unfairness(per_class: np.ndarray, metric: FairnessMetric) -> float:
    """Gap statistic over a per-class accuracy vector. Never negative."""
    a = np.asarray(per_class, dtype=float)
    bad = np.flatnonzero(~np.isfinite(a))
    if bad.size:
        raise UndefinedAccuracyError(bad)
    if metric is FairnessMetric.MAX_MIN:
        return float(a.max() - a.min())
    # mean(a) - min can round an ulp negative (or above max - min) for
    # near-equal vectors; the shifted form is exact at zero.
    return float((a - a.min()).mean())


def accuracy_quartile(population, value: float) -> int:
    """Quartile (1-4) of value within the population of baseline accuracies.

    Boundaries use linear-interpolated percentiles; values exactly on a
    boundary fall to the lower quartile.
    """
    pop = np.asarray(population, dtype=float)
    if pop.size == 0:
        raise ValueError("empty population")
    if not math.isfinite(value):
        raise ValueError(f"value must be finite, got {value}")
    q1, q2, q3 = np.percentile(pop, [25, 50, 75])
    if value <= q1:
        return 1
    if value <= q2:
        return 2
    if value <= q3:
        return 3
    return 4


@dataclass
class OperatingPoint:
    """One (model state, evaluation) snapshot along a pruning trajectory."""

    technique: str
    treatment: str
    iteration: int
    sparsity: float
    total_accuracy: float
    per_class_accuracy: np.ndarray
    unfairness: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        per_class = [None if not math.isfinite(a) else float(a)
                     for a in np.asarray(self.per_class_accuracy, dtype=float)]
        unfair = {k: (None if not math.isfinite(v) else float(v))
                  for k, v in self.unfairness.items()}
        return {
            "technique": self.technique,
            "treatment": self.treatment,
            "iteration": self.iteration,
            "sparsity": float(self.sparsity),
            "total_accuracy": float(self.total_accuracy),
            "per_class_accuracy": per_class,
            "unfairness": unfair,
        }
