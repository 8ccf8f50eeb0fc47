"""Linear model relating per-class accuracy to pruning covariates.

The design matrix expands each (class x experiment) record into an
intercept, dummy codes for the categorical factors (first level in sorted
order is the dropped baseline), exp(sparsity) and sparsity terms, the
class's baseline accuracy and its quartile, the class imbalance and
entropy covariates, and a fixed set of interactions. Fitting is ordinary
least squares through an orthogonal decomposition with classic
homoskedastic standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import stats


class RankDeficiencyError(ValueError):
    """Design matrix is rank deficient; names the offending columns."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(
            "design matrix is rank deficient; collinear columns: " + ", ".join(self.columns))


@dataclass(frozen=True)
class ExperimentRecord:
    """One class within one pruned-model evaluation."""

    accuracy: float
    sparsity: float
    accuracy0: float
    accuracy0_quartile: int
    imbalance: float
    class_entropy: float
    dataset: str
    model: str
    treatment: str
    technique: str


@dataclass
class DesignMatrix:
    columns: list[str]
    matrix: np.ndarray
    baselines: dict[str, str]


_CATEGORICALS = ("dataset", "model", "treatment", "technique")


def _levels(records, factor: str) -> list[str]:
    return sorted({getattr(r, factor) for r in records})


def build_design_matrix(records: list[ExperimentRecord],
                        baselines: dict[str, str] | None = None) -> DesignMatrix:
    """Expand records into named regression columns.

    Dummy columns appear only for non-baseline levels, so single-level
    factors contribute nothing and their interactions vanish. Raises
    RankDeficiencyError if the result is not full column rank.
    """
    if not records:
        raise ValueError("no records to fit")
    baselines = dict(baselines or {})
    levels: dict[str, list[str]] = {}
    for factor in _CATEGORICALS:
        lv = _levels(records, factor)
        base = baselines.setdefault(factor, lv[0])
        if base not in lv:
            raise ValueError(f"baseline {base!r} is not a level of {factor}: {lv}")
        levels[factor] = [l for l in lv if l != base]

    n = len(records)
    cols: list[str] = []
    data: list[np.ndarray] = []

    def add(name: str, values):
        cols.append(name)
        data.append(np.asarray(values, dtype=np.float64))

    def dummy(factor: str, level: str) -> np.ndarray:
        return np.array([1.0 if getattr(r, factor) == level else 0.0 for r in records])

    sparsity = np.array([r.sparsity for r in records])
    exp_sparsity = np.exp(sparsity)
    accuracy0 = np.array([r.accuracy0 for r in records])
    quartile = np.array([float(r.accuracy0_quartile) for r in records])

    add("intercept", np.ones(n))
    for factor in _CATEGORICALS:
        for level in levels[factor]:
            add(f"{factor}[{level}]", dummy(factor, level))
    for t in levels["treatment"]:
        for p in levels["technique"]:
            add(f"treatment[{t}]:technique[{p}]", dummy("treatment", t) * dummy("technique", p))
    add("exp_sparsity", exp_sparsity)
    for level in levels["dataset"]:
        add(f"exp_sparsity:dataset[{level}]", exp_sparsity * dummy("dataset", level))
    for level in levels["technique"]:
        add(f"exp_sparsity:technique[{level}]", exp_sparsity * dummy("technique", level))
    add("sparsity", sparsity)
    add("accuracy0", accuracy0)
    for level in levels["treatment"]:
        add(f"accuracy0:treatment[{level}]", accuracy0 * dummy("treatment", level))
    for level in levels["technique"]:
        add(f"accuracy0:technique[{level}]", accuracy0 * dummy("technique", level))
    add("accuracy0_quartile", quartile)
    add("imbalance", np.array([r.imbalance for r in records]))
    add("class_entropy", np.array([r.class_entropy for r in records]))
    add("exp_sparsity:accuracy0", exp_sparsity * accuracy0)
    add("accuracy0:accuracy0_quartile", accuracy0 * quartile)

    X = np.column_stack(data)
    _check_rank(X, cols)
    return DesignMatrix(cols, X, baselines)


def _check_rank(X: np.ndarray, cols: list[str]):
    if X.shape[0] < X.shape[1]:
        raise RankDeficiencyError(cols)
    _, r, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(X.shape) * np.finfo(np.float64).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    if rank < X.shape[1]:
        bad = sorted(cols[i] for i in piv[rank:])
        raise RankDeficiencyError(bad)


@dataclass
class OlsFit:
    columns: list[str]
    beta: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_two_tailed: np.ndarray
    r_squared: float
    adj_r_squared: float
    df_resid: int
    fitted: np.ndarray
    residuals: np.ndarray
    baselines: dict[str, str] = field(default_factory=dict)

    def index(self, term: str) -> int:
        try:
            return self.columns.index(term)
        except ValueError:
            raise KeyError(f"no term {term!r}; columns are {self.columns}") from None

    def coef(self, term: str) -> float:
        return float(self.beta[self.index(term)])

    def summary_rows(self) -> list[dict]:
        return [
            {"term": c, "coef": float(self.beta[i]), "std_error": float(self.std_errors[i]),
             "t": float(self.t_stats[i]), "p_two_tailed": float(self.p_two_tailed[i])}
            for i, c in enumerate(self.columns)
        ]


def fit_ols(design: DesignMatrix, y) -> OlsFit:
    """Least-squares fit with homoskedastic standard errors."""
    X = design.matrix
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    n, p = X.shape
    if n <= p:
        raise ValueError(f"need more than {p} observations, got {n}")
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    df = n - p
    sigma2 = rss / df
    # (X'X)^-1 via the economic QR factor; X is full rank after _check_rank
    _, r = np.linalg.qr(X)
    r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.diag(cov))
    t = np.divide(beta, se, out=np.zeros_like(beta), where=se > 0)
    p_two = 2.0 * stats.t.sf(np.abs(t), df)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / df
    return OlsFit(design.columns, beta, se, t, p_two, r2, adj, df, fitted, resid,
                  dict(design.baselines))


def one_tailed_test(fit: OlsFit, term: str, direction: str) -> tuple[float, float]:
    """One-tailed t-test of a coefficient against zero.

    direction '>' tests H1: coef > 0 (p is the upper tail), '<' tests
    H1: coef < 0 (lower tail). Returns (t, p).
    """
    t = float(fit.t_stats[fit.index(term)])
    if direction == ">":
        p = float(stats.t.sf(t, fit.df_resid))
    elif direction == "<":
        p = float(stats.t.cdf(t, fit.df_resid))
    else:
        raise ValueError(f"direction must be '>' or '<', got {direction!r}")
    return t, p


RESIDUAL_BINS = 50
TARGET_BINS = 20


def diagnostics(fit: OlsFit, y) -> dict:
    """Histogram summaries for fit inspection.

    Residuals go to a fixed 50-bin histogram on [-1, 1]; predicted vs
    target is a 20x20 grid on [0, 1] normalized within each target bin.
    """
    y = np.asarray(y, dtype=np.float64)
    counts, edges = np.histogram(fit.residuals, bins=RESIDUAL_BINS, range=(-1.0, 1.0))
    grid, target_edges, pred_edges = np.histogram2d(
        y, fit.fitted, bins=TARGET_BINS, range=[[0.0, 1.0], [0.0, 1.0]])
    sums = grid.sum(axis=1, keepdims=True)
    normalized = np.divide(grid, sums, out=np.zeros_like(grid), where=sums > 0)
    return {
        "residual_histogram": {"bin_edges": edges.tolist(), "counts": counts.tolist()},
        "predicted_vs_target": {
            "target_edges": target_edges.tolist(),
            "predicted_edges": pred_edges.tolist(),
            "normalized_counts": normalized.tolist(),
        },
        "r_squared": fit.r_squared,
        "adj_r_squared": fit.adj_r_squared,
    }
