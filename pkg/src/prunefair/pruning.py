"""Magnitude and random pruning with iterative retraining.

Seven techniques: l1/random/global unstructured prune individual weights,
l1/l2/linfty/random structured prune whole input-axis slices (columns of a
dense weight matrix, input-channel slices of a conv kernel). All except
global_unstructured are layer-wise: candidates are compared only within
their own tensor. Each step removes 20% (configurable) of the *currently
unpruned* weights or channels, rounding half-up with a minimum of one so
tiny layers keep shrinking; masks only ever flip 1 -> 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .net import Network, clone, evaluate, restore_unmasked, train
from .rng import RngState
from .util import round_half_up


class PruneTechnique(enum.Enum):
    L1_UNSTRUCTURED = "l1_unstructured"
    RANDOM_UNSTRUCTURED = "random_unstructured"
    GLOBAL_UNSTRUCTURED = "global_unstructured"
    L1_STRUCTURED = "l1_structured"
    L2_STRUCTURED = "l2_structured"
    LINFTY_STRUCTURED = "linfty_structured"
    RANDOM_STRUCTURED = "random_structured"

    @property
    def structured(self) -> bool:
        return self.value.endswith("_structured")


class WeightTreatment(enum.Enum):
    FINETUNE = "finetune"
    REWIND = "rewind"


@dataclass
class PruneSchedule:
    iterations: int = 20
    fraction_per_iteration: float = 0.2

    def __post_init__(self):
        if not 0 < self.fraction_per_iteration < 1:
            raise ValueError(f"fraction must be in (0,1), got {self.fraction_per_iteration}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


@dataclass
class PruneEvent:
    """Audit record for one prune step."""

    iteration: int
    newly_masked: dict[int, int]  # weighted-layer index -> weights zeroed this step
    sparsity: float
    warnings: list[str] = field(default_factory=list)


def round_count(x: float) -> int:
    """Half-up rounding; the 'remove 20% of the unpruned' count rule."""
    return round_half_up(x)


def sparsity_of(net: Network) -> float:
    """Fraction of prunable weights currently masked to zero (biases excluded)."""
    total = sum(l.mask.size for l in net.weighted_layers)
    if total == 0:
        raise ValueError("network has no prunable weights")
    masked = sum(int((l.mask == 0).sum()) for l in net.weighted_layers)
    return masked / total


def _smallest_unmasked(scores: np.ndarray, mask_flat: np.ndarray, k: int) -> np.ndarray:
    """Flat indices of the k smallest scores among unmasked entries.

    Ties break toward the lowest flat index (stable sort over index order).
    """
    candidates = np.flatnonzero(mask_flat == 1)
    order = np.argsort(scores[candidates], kind="stable")
    return candidates[order[:k]]


def _unpruned_channels(layer) -> np.ndarray:
    # a channel (input-axis slice) counts as unpruned while any weight survives
    reduce_axes = tuple(i for i in range(layer.mask.ndim) if i != 1)
    return np.flatnonzero(layer.mask.sum(axis=reduce_axes) > 0)


def _channel_norms(layer, technique: PruneTechnique) -> np.ndarray:
    eff = np.abs(layer.weights * layer.mask)
    reduce_axes = tuple(i for i in range(eff.ndim) if i != 1)
    if technique is PruneTechnique.L1_STRUCTURED:
        return eff.sum(axis=reduce_axes)
    if technique is PruneTechnique.L2_STRUCTURED:
        return np.sqrt((eff**2).sum(axis=reduce_axes))
    if technique is PruneTechnique.LINFTY_STRUCTURED:
        return eff.max(axis=reduce_axes)
    raise ValueError(f"{technique} has no channel norm")


def prune_step(net: Network, technique: PruneTechnique, fraction: float,
               rng: RngState, iteration: int = 0) -> PruneEvent:
    """Apply one pruning step in place, returning the audit event.

    Layer-wise techniques zero round(fraction * unmasked) entries or
    channels per prunable layer (min 1 while any survive); global
    unstructured takes that count over the union of all prunable weights.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0,1), got {fraction}")
    layers = net.weighted_layers
    if not layers:
        raise ValueError("network has no prunable layers")
    gen = rng.generator
    newly: dict[int, int] = {}
    warnings: list[str] = []

    if technique is PruneTechnique.GLOBAL_UNSTRUCTURED:
        flats = [l.mask.reshape(-1) for l in layers]
        scores = np.concatenate([np.abs((l.weights * l.mask).reshape(-1)) for l in layers])
        mask_all = np.concatenate(flats)
        unmasked = int(mask_all.sum())
        if unmasked == 0:
            return PruneEvent(iteration, {}, sparsity_of(net), ["all weights already pruned"])
        k = min(max(round_count(fraction * unmasked), 1), unmasked)
        chosen = _smallest_unmasked(scores, mask_all, k)
        offsets = np.cumsum([0] + [f.size for f in flats])
        for li, layer in enumerate(layers):
            local = chosen[(chosen >= offsets[li]) & (chosen < offsets[li + 1])] - offsets[li]
            if local.size:
                layer.mask.reshape(-1)[local] = 0
            newly[li] = int(local.size)
        return PruneEvent(iteration, newly, sparsity_of(net), warnings)

    for li, layer in enumerate(layers):
        if technique in (PruneTechnique.L1_UNSTRUCTURED, PruneTechnique.RANDOM_UNSTRUCTURED):
            mask_flat = layer.mask.reshape(-1)
            unmasked = int(mask_flat.sum())
            if unmasked == 0:
                newly[li] = 0
                warnings.append(f"layer {li}: all weights already pruned")
                continue
            k = min(max(round_count(fraction * unmasked), 1), unmasked)
            if technique is PruneTechnique.L1_UNSTRUCTURED:
                scores = np.abs((layer.weights * layer.mask).reshape(-1))
                chosen = _smallest_unmasked(scores, mask_flat, k)
            else:
                candidates = np.flatnonzero(mask_flat == 1)
                chosen = gen.choice(candidates, size=k, replace=False)
            mask_flat[chosen] = 0
            newly[li] = k
        else:
            channels = _unpruned_channels(layer)
            if channels.size == 0:
                newly[li] = 0
                warnings.append(f"layer {li}: all channels already pruned")
                continue
            k = min(max(round_count(fraction * channels.size), 1), channels.size)
            if technique is PruneTechnique.RANDOM_STRUCTURED:
                picked = gen.choice(channels, size=k, replace=False)
            else:
                norms = _channel_norms(layer, technique)[channels]
                picked = channels[np.argsort(norms, kind="stable")[:k]]
            count = 0
            for ch in picked:
                sl = layer.mask[:, ch]
                count += int(sl.sum())
                layer.mask[:, ch] = 0
            newly[li] = count
    return PruneEvent(iteration, newly, sparsity_of(net), warnings)


def iterate(net: Network, train_data, eval_data, technique: PruneTechnique,
            treatment: WeightTreatment, schedule: PruneSchedule, cfg, rng: RngState,
            augment=None) -> tuple[list["metrics.OperatingPoint"], list[PruneEvent]]:
    """Run the prune / (rewind|finetune) / retrain loop on an already-trained net.

    Returns schedule.iterations + 1 operating points (index 0 is the
    unpruned model) plus the per-step audit events. The input network is
    left untouched; the loop works on a clone.
    """
    net = clone(net)
    points = [_operating_point(net, eval_data, technique, treatment, 0)]
    events: list[PruneEvent] = []
    for it in range(1, schedule.iterations + 1):
        event = prune_step(net, technique, schedule.fraction_per_iteration,
                           rng.split(f"prune{it}"), iteration=it)
        events.append(event)
        if treatment is WeightTreatment.REWIND:
            restore_unmasked(net, net.initial_snapshot)
        train(net, train_data, cfg, rng.split(f"train{it}"), augment=augment)
        points.append(_operating_point(net, eval_data, technique, treatment, it))
    return points, events


def _operating_point(net, eval_data, technique, treatment, iteration):
    preds = evaluate(net, eval_data)
    labels = np.asarray(eval_data.labels)
    per_class = metrics.per_class_accuracy(preds, labels, eval_data.classes)
    unfair = {}
    for metric in metrics.FairnessMetric:
        if np.all(np.isfinite(per_class)):
            unfair[metric.value] = metrics.unfairness(per_class, metric)
        else:
            unfair[metric.value] = float("nan")
    return metrics.OperatingPoint(
        technique=technique.value,
        treatment=treatment.value,
        iteration=iteration,
        sparsity=sparsity_of(net),
        total_accuracy=float((preds == labels).mean()),
        per_class_accuracy=per_class,
        unfairness=unfair,
    )
