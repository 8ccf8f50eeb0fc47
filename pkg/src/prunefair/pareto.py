"""Constraint filtering, Pareto frontier, and weighted-sum selection.

Candidates are operating points; objectives name a value to extract (dotted
paths reach into the unfairness dict) and a direction. A point is excluded
from the frontier only if some other point weakly dominates it: at least as
good on every objective and strictly better on one. Duplicates therefore
survive together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TIE_EPS = 1e-12


class SelectionError(ValueError):
    pass


class EmptyFeasibleSetError(SelectionError):
    """No candidate satisfies the accuracy constraint."""

    def __init__(self, min_accuracy: float, candidates: int):
        self.min_accuracy = min_accuracy
        self.candidates = candidates
        super().__init__(
            f"no candidate of {candidates} meets total_accuracy >= {min_accuracy}")


@dataclass(frozen=True)
class Objective:
    name: str
    direction: str  # "minimize" or "maximize"
    key: str | None = None  # dotted extraction path; defaults to name

    def __post_init__(self):
        if self.direction not in ("minimize", "maximize"):
            raise SelectionError(f"direction must be minimize|maximize, got {self.direction}")

    def value_of(self, point) -> float:
        obj = point
        for part in (self.key or self.name).split("."):
            if isinstance(obj, dict):
                obj = obj[part]
            else:
                obj = getattr(obj, part)
        v = float(obj)
        if not np.isfinite(v):
            raise SelectionError(f"objective {self.name} is undefined on {point!r}")
        return v


@dataclass
class ValueFunction:
    """Linear scalarization weights, keyed by objective name."""

    weights: dict[str, float]

    def __post_init__(self):
        if not any(w != 0 for w in self.weights.values()):
            raise SelectionError("at least one weight must be nonzero")


@dataclass
class SelectionProblem:
    candidates: list
    objectives: list[Objective]
    min_accuracy: float = 0.98

    def __post_init__(self):
        if len(self.objectives) < 2:
            raise SelectionError("need at least two objectives")
        names = [o.name for o in self.objectives]
        if len(set(names)) != len(names):
            raise SelectionError(f"duplicate objective names: {names}")


def objective_matrix(candidates, objectives) -> np.ndarray:
    """Rows of direction-normalized objective values (higher is better)."""
    vals = np.array([[o.value_of(c) for o in objectives] for c in candidates])
    signs = np.array([1.0 if o.direction == "maximize" else -1.0 for o in objectives])
    return vals * signs


def filter_constraint(candidates, min_accuracy: float) -> list:
    """Candidates meeting the accuracy floor, order preserved."""
    feasible = [c for c in candidates if _total_accuracy(c) >= min_accuracy]
    if not feasible:
        raise EmptyFeasibleSetError(min_accuracy, len(candidates))
    return feasible


def _total_accuracy(point) -> float:
    if isinstance(point, dict):
        return float(point["total_accuracy"])
    return float(point.total_accuracy)


def frontier_mask(normalized: np.ndarray) -> np.ndarray:
    """Boolean mask of non-dominated rows under weak dominance."""
    n = normalized.shape[0]
    keep = np.ones(n, dtype=bool)
    # pairwise comparison in row blocks to bound memory at larger n
    block = 512
    for start in range(0, n, block):
        rows = normalized[start:start + block]  # (b, m)
        ge = (normalized[None, :, :] >= rows[:, None, :]).all(axis=2)
        gt = (normalized[None, :, :] > rows[:, None, :]).any(axis=2)
        dominated = (ge & gt).any(axis=1)
        keep[start:start + block] = ~dominated
    return keep


def pareto_frontier(candidates, objectives) -> list:
    """Non-dominated candidates in input order; ties and duplicates retained."""
    if not candidates:
        return []
    mask = frontier_mask(objective_matrix(candidates, objectives))
    return [c for c, k in zip(candidates, mask) if k]


def scalarize_select(frontier, objectives, value: ValueFunction) -> tuple[int, list[int]]:
    """Pick the utility-maximizing frontier index.

    Utility is the weighted sum of direction-normalized raw values, no
    rescaling. Returns (chosen index, all indices within 1e-12 of the
    maximum); the chosen index is the earliest tied one.
    """
    if not frontier:
        raise SelectionError("empty frontier")
    unknown = set(value.weights) - {o.name for o in objectives}
    if unknown:
        raise SelectionError(f"weights name unknown objectives: {sorted(unknown)}")
    w = np.array([value.weights.get(o.name, 0.0) for o in objectives])
    utilities = objective_matrix(frontier, objectives) @ w
    best = float(utilities.max())
    tied = [i for i, u in enumerate(utilities) if best - u <= TIE_EPS]
    return tied[0], tied


def solve(problem: SelectionProblem, value: ValueFunction) -> dict:
    """Constraint filter, frontier, scalarized choice; indexes refer to
    problem.candidates."""
    feasible_idx = [i for i, c in enumerate(problem.candidates)
                    if _total_accuracy(c) >= problem.min_accuracy]
    if not feasible_idx:
        raise EmptyFeasibleSetError(problem.min_accuracy, len(problem.candidates))
    feasible = [problem.candidates[i] for i in feasible_idx]
    mask = frontier_mask(objective_matrix(feasible, problem.objectives))
    frontier_idx = [feasible_idx[i] for i in range(len(feasible)) if mask[i]]
    frontier = [problem.candidates[i] for i in frontier_idx]
    local_chosen, local_tied = scalarize_select(frontier, problem.objectives, value)
    return {
        "feasible": feasible_idx,
        "frontier": frontier_idx,
        "chosen": frontier_idx[local_chosen],
        "tied": [frontier_idx[i] for i in local_tied],
    }
