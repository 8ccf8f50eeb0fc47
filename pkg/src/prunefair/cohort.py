"""Writer-cohort degradation analysis.

Groups evaluation examples by writer, measures simple image features
(stroke tilt, mean activation, distance to the training class mean), and
relates per-writer accuracy before and after pruning to those features
with per-group and pooled straight-line fits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset

log = logging.getLogger(__name__)

UNDEFINED = float("nan")


def tilt(image: np.ndarray) -> float:
    """Least-squares slope of column on row over the bright pixels.

    Pixels above half the image maximum count as active. A perfectly
    vertical stroke gives 0; fewer than two active pixels or zero row
    variance gives NaN.
    """
    img = np.asarray(image, dtype=np.float64)
    active = img > 0.5 * img.max() if img.max() > 0 else np.zeros_like(img, dtype=bool)
    rr, cc = np.nonzero(active)
    if rr.size < 2:
        return UNDEFINED
    r = rr - rr.mean()
    denom = float(r @ r)
    if denom == 0:
        return UNDEFINED
    return float(r @ (cc - cc.mean()) / denom)


def mean_activation(image: np.ndarray) -> float:
    return float(np.asarray(image, dtype=np.float64).mean())


def class_means(train: LabeledDataset) -> np.ndarray:
    """Per-class mean image over the training split, shape (C, H, W)."""
    means = np.zeros((train.classes,) + train.images.shape[1:])
    for c in range(train.classes):
        member = train.labels == c
        if not member.any():
            means[c] = np.nan
        else:
            means[c] = train.images[member].mean(axis=0)
    return means


def euclid_to_class_mean(image: np.ndarray, label: int, means: np.ndarray) -> float:
    diff = np.asarray(image, dtype=np.float64) - means[label]
    return float(np.sqrt((diff * diff).sum()))


def percent_change(before: float, after: float) -> float:
    """Relative change (after - before) / before; NaN when before is 0."""
    if before == 0:
        return UNDEFINED
    return (after - before) / before


@dataclass
class WriterRecord:
    writer_id: int
    group: str
    n_examples: int
    accuracy_before: float
    accuracy_after: float
    mean_tilt: float
    mean_abs_tilt: float
    mean_activation: float
    mean_euclid: float

    @property
    def pct_change(self) -> float:
        return percent_change(self.accuracy_before, self.accuracy_after)


def per_writer_accuracy(predictions, labels, metadata) -> dict[int, float]:
    """Accuracy of each writer's examples."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if metadata is None or len(metadata) != labels.size:
        raise ValueError("metadata must cover every evaluation example")
    out: dict[int, float] = {}
    writers = np.array([m.writer_id for m in metadata])
    for w in np.unique(writers):
        member = writers == w
        out[int(w)] = float((predictions[member] == labels[member]).mean())
    return out


def build_writer_records(eval_data: LabeledDataset, preds_before, preds_after,
                         means: np.ndarray) -> list[WriterRecord]:
    """Aggregate features and before/after accuracy per writer."""
    if eval_data.metadata is None:
        raise ValueError("evaluation dataset has no writer metadata")
    acc_before = per_writer_accuracy(preds_before, eval_data.labels, eval_data.metadata)
    acc_after = per_writer_accuracy(preds_after, eval_data.labels, eval_data.metadata)
    writers = np.array([m.writer_id for m in eval_data.metadata])
    groups = {m.writer_id: m.group for m in eval_data.metadata}
    tilts = np.array([tilt(img) for img in eval_data.images])
    acts = np.array([mean_activation(img) for img in eval_data.images])
    dists = np.array([euclid_to_class_mean(img, int(lbl), means)
                      for img, lbl in zip(eval_data.images, eval_data.labels)])
    records = []
    for w in np.unique(writers):
        member = writers == w
        wt = tilts[member]
        wt = wt[np.isfinite(wt)]
        records.append(WriterRecord(
            writer_id=int(w),
            group=groups[int(w)],
            n_examples=int(member.sum()),
            accuracy_before=acc_before[int(w)],
            accuracy_after=acc_after[int(w)],
            mean_tilt=float(wt.mean()) if wt.size else UNDEFINED,
            mean_abs_tilt=float(np.abs(wt).mean()) if wt.size else UNDEFINED,
            mean_activation=float(acts[member].mean()),
            mean_euclid=float(np.nanmean(dists[member])),
        ))
    return records


@dataclass
class GroupFit:
    group: str
    n: int
    intercept: float
    slope: float
    slope_se: float
    intercept_se: float


FEATURES = ("mean_tilt", "mean_abs_tilt", "mean_activation", "mean_euclid")
TARGETS = ("accuracy_before", "accuracy_after", "pct_change")


def _line_fit(x: np.ndarray, y: np.ndarray, label: str) -> GroupFit | None:
    finite = np.isfinite(x) & np.isfinite(y)
    x, y = x[finite], y[finite]
    if x.size < 3 or np.ptp(x) == 0:
        log.warning("skipping degenerate fit for %s (n=%d)", label, x.size)
        return None
    X = np.column_stack([np.ones_like(x), x])
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    sigma2 = float(resid @ resid) / (x.size - 2)
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return GroupFit(label, int(x.size), float(beta[0]), float(beta[1]),
                    float(np.sqrt(cov[1, 1])), float(np.sqrt(cov[0, 0])))


def group_linear_fit(records: list[WriterRecord], feature: str,
                     target: str) -> dict[str, GroupFit]:
    """Straight-line fits of target on feature, per group plus pooled 'full'.

    Degenerate groups (fewer than three finite points, or constant
    feature) are skipped with a warning.
    """
    if feature not in FEATURES:
        raise ValueError(f"feature must be one of {FEATURES}, got {feature!r}")
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")
    x_all = np.array([getattr(r, feature) for r in records])
    y_all = np.array([getattr(r, target) for r in records])
    group_names = sorted({r.group for r in records})
    fits: dict[str, GroupFit] = {}
    for g in group_names:
        member = np.array([r.group == g for r in records])
        fit = _line_fit(x_all[member], y_all[member], g)
        if fit is not None:
            fits[g] = fit
    full = _line_fit(x_all, y_all, "full")
    if full is not None:
        fits["full"] = full
    return fits
