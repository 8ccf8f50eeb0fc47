"""Command-line interface.

Subcommands: run (execute the technique x treatment x seed grid and emit
the experiment CSV), fit (regression report over a CSV), select
(constraint-filtered frontier JSON plus chosen point), curves
(per-trajectory accuracy/unfairness table), cohort (writer-level
before/after analysis). Report commands render companion figures next to
their delimited output.

Exit codes: 0 success, 2 bad usage or config, 3 empty feasible set,
4 runtime or numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import cohort as cohort_mod
from . import data, figures, metrics, pareto, regression
from .config import ConfigError, ExperimentConfig, build_dataset, config_hash, load_config
from .net import TrainingDivergenceError, build_network, evaluate, train
from .pruning import (PruneSchedule, PruneTechnique, WeightTreatment, iterate,
                      prune_step, sparsity_of)
from .net import restore_unmasked
from .rng import RngState
from .util import format_float

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EMPTY_FEASIBLE = 3
EXIT_RUNTIME = 4

CSV_COLUMNS = ["dataset", "model", "technique", "treatment", "seed", "iteration",
               "sparsity", "class", "accuracy", "accuracy0", "imbalance",
               "class_entropy", "total_accuracy"]


class CsvSchemaError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


# ---------------------------------------------------------------------------
# experiment CSV round-trip

def write_experiment_csv(rows: list[dict], path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in CSV_COLUMNS])


def _format_cell(v):
    if isinstance(v, bool):
        raise TypeError("bool is not a CSV cell type here")
    if isinstance(v, float):
        return format_float(v)
    return v


_INT_COLUMNS = {"seed", "iteration", "class"}
_FLOAT_COLUMNS = {"sparsity", "accuracy", "accuracy0", "imbalance",
                  "class_entropy", "total_accuracy"}


def read_experiment_csv(path) -> list[dict]:
    """Parse and validate the experiment CSV; errors carry line numbers."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvSchemaError(1, "empty file") from None
        if header != CSV_COLUMNS:
            raise CsvSchemaError(1, f"header must be {','.join(CSV_COLUMNS)}")
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(CSV_COLUMNS):
                raise CsvSchemaError(lineno, f"expected {len(CSV_COLUMNS)} fields, got {len(raw)}")
            row = dict(zip(CSV_COLUMNS, raw))
            for c in _INT_COLUMNS:
                try:
                    row[c] = int(row[c])
                except ValueError:
                    raise CsvSchemaError(lineno, f"{c} must be an integer, got {row[c]!r}") from None
            for c in _FLOAT_COLUMNS:
                try:
                    row[c] = float(row[c])
                except ValueError:
                    raise CsvSchemaError(lineno, f"{c} must be a float, got {row[c]!r}") from None
            if row["iteration"] < 0 or row["class"] < 0:
                raise CsvSchemaError(lineno, "iteration and class must be non-negative")
            rows.append(row)
    if not rows:
        raise CsvSchemaError(2, "no data rows")
    return rows


# ---------------------------------------------------------------------------
# run

def _cell_id(technique: str, treatment: str, seed: int) -> str:
    return f"{technique}__{treatment}__s{seed}"


def run_cell(config: ExperimentConfig, technique: str, treatment: str, seed: int) -> dict:
    """Train, prune, and evaluate one grid cell. Self-contained and
    deterministic in (config, seed) so workers can run it anywhere."""
    t0 = time.monotonic()
    dataset = build_dataset(config)
    train_split, val_split = data.split(
        dataset, data.SplitSpec(config.validation_fraction, seed))
    imbalance = data.class_imbalance(train_split)
    entropy = data.class_entropies(train_split, config.entropy_literal_prefactor)

    root = RngState(seed)
    net = build_network(config.arch, dataset.image_size, dataset.classes,
                        root.split("init"))
    train(net, train_split, config.train, root.split("base-train"), augment=config.augment)
    points, events = iterate(
        net, train_split, val_split, PruneTechnique(technique),
        WeightTreatment(treatment), config.schedule, config.train,
        root.split(f"trajectory|{technique}|{treatment}"), augment=config.augment)
    return {
        "cell": {"technique": technique, "treatment": treatment, "seed": seed},
        "dataset": dataset.name,
        "model": config.arch,
        "imbalance": [float(x) for x in imbalance],
        "class_entropy": [float(x) for x in entropy],
        "points": [p.to_dict() for p in points],
        "events": [{"iteration": e.iteration, "newly_masked": e.newly_masked,
                    "sparsity": e.sparsity, "warnings": e.warnings} for e in events],
        "duration_s": time.monotonic() - t0,
    }


def cell_rows(cell: dict) -> list[dict]:
    """Expand one cell result into experiment CSV rows."""
    rows = []
    base = cell["points"][0]["per_class_accuracy"]
    info = cell["cell"]
    for point in cell["points"]:
        for c, acc in enumerate(point["per_class_accuracy"]):
            rows.append({
                "dataset": cell["dataset"], "model": cell["model"],
                "technique": info["technique"], "treatment": info["treatment"],
                "seed": info["seed"], "iteration": point["iteration"],
                "sparsity": point["sparsity"], "class": c,
                "accuracy": float("nan") if acc is None else acc,
                "accuracy0": float("nan") if base[c] is None else base[c],
                "imbalance": cell["imbalance"][c],
                "class_entropy": cell["class_entropy"][c],
                "total_accuracy": point["total_accuracy"],
            })
    return rows


def _run_cell_task(config, technique, treatment, seed):
    try:
        return (technique, treatment, seed, run_cell(config, technique, treatment, seed), None)
    except Exception as e:  # noqa: BLE001 - reported in the manifest
        return (technique, treatment, seed, None, f"{type(e).__name__}: {e}")


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed_list:
        config.grid.seeds = _parse_seed_list(args.seed_list)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "points").mkdir(exist_ok=True)
    chash = config_hash(config)

    manifest_path = out / "manifest.json"
    manifest = {"config_hash": chash, "config": config.semantic_dict(),
                "created": _now(), "cells": {}}
    if manifest_path.exists():
        with open(manifest_path) as f:
            previous = json.load(f)
        if previous.get("config_hash") != chash:
            raise ConfigError(
                f"output dir {out} holds results for config hash "
                f"{previous.get('config_hash')}, refusing to mix with {chash}")
        manifest = previous
        manifest.setdefault("cells", {})

    cells = [(t.value, w.value, s) for t, w, s in config.cells()]
    pending = [c for c in cells
               if manifest["cells"].get(_cell_id(*c), {}).get("status") != "done"]
    log.info("grid has %d cells, %d to run", len(cells), len(pending))

    results: dict[str, tuple] = {}
    if pending:
        if args.jobs > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futures = [pool.submit(_run_cell_task, config, *c) for c in pending]
                for fut in concurrent.futures.as_completed(futures):
                    tech, treat, seed, cell, err = fut.result()
                    results[_cell_id(tech, treat, seed)] = (cell, err)
        else:
            for c in pending:
                tech, treat, seed, cell, err = _run_cell_task(config, *c)
                results[_cell_id(tech, treat, seed)] = (cell, err)

    failed = []
    for c in pending:
        cid = _cell_id(*c)
        cell, err = results[cid]
        if err is not None:
            manifest["cells"][cid] = {"status": "failed", "error": err}
            failed.append((cid, err))
            continue
        points_file = f"points/{cid}.json"
        with open(out / points_file, "w") as f:
            json.dump(cell, f, indent=1)
        manifest["cells"][cid] = {
            "status": "done", "points_file": points_file,
            "duration_s": round(cell["duration_s"], 3),
            "warnings": sum(len(e["warnings"]) for e in cell["events"]),
        }

    # regenerate the CSV from every finished cell, in grid order, so reruns
    # of the same config produce byte-identical files
    rows: list[dict] = []
    for c in cells:
        entry = manifest["cells"].get(_cell_id(*c))
        if entry and entry.get("status") == "done":
            with open(out / entry["points_file"]) as f:
                rows.extend(cell_rows(json.load(f)))
    if rows:
        write_experiment_csv(rows, out / "experiment.csv")
        manifest["csv"] = "experiment.csv"
    manifest["updated"] = _now()
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)

    if failed:
        for cid, err in failed:
            print(f"cell {cid} failed: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out / 'experiment.csv'} ({len(rows)} rows)")
    return EXIT_OK


def _parse_seed_list(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise ConfigError(f"--seed-list must be comma-separated integers, got {text!r}") from None
    if not seeds or len(set(seeds)) != len(seeds):
        raise ConfigError("--seed-list must be non-empty and free of duplicates")
    return seeds


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


# ---------------------------------------------------------------------------
# fit

def rows_to_records(rows: list[dict]) -> tuple[list[regression.ExperimentRecord], int]:
    """Experiment rows to regression records; drops rows whose accuracy or
    baseline accuracy is undefined. Quartiles come from the baseline
    accuracies of the rows being fit."""
    usable = [r for r in rows
              if math.isfinite(r["accuracy"]) and math.isfinite(r["accuracy0"])]
    dropped = len(rows) - len(usable)
    population = np.array([r["accuracy0"] for r in usable])
    records = [
        regression.ExperimentRecord(
            accuracy=r["accuracy"], sparsity=r["sparsity"], accuracy0=r["accuracy0"],
            accuracy0_quartile=metrics.accuracy_quartile(population, r["accuracy0"]),
            imbalance=r["imbalance"], class_entropy=r["class_entropy"],
            dataset=r["dataset"], model=r["model"],
            treatment=r["treatment"], technique=r["technique"],
        )
        for r in usable
    ]
    return records, dropped


def cmd_fit(args) -> int:
    rows = read_experiment_csv(args.csv)
    records, dropped = rows_to_records(rows)
    design = regression.build_design_matrix(records)
    y = np.array([r.accuracy for r in records])
    fit = regression.fit_ols(design, y)
    t_imb, p_imb = regression.one_tailed_test(fit, "imbalance", ">")
    t_ent, p_ent = regression.one_tailed_test(fit, "class_entropy", "<")
    diag = regression.diagnostics(fit, y)

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "n_records": len(records),
        "dropped_undefined": dropped,
        "baselines": fit.baselines,
        "r_squared": fit.r_squared,
        "adj_r_squared": fit.adj_r_squared,
        "terms": fit.summary_rows(),
        "one_tailed": {
            "imbalance_positive": {"t": t_imb, "p": p_imb},
            "class_entropy_negative": {"t": t_ent, "p": p_ent},
        },
        "diagnostics": diag,
    }
    with open(out / "fit_summary.json", "w") as f:
        json.dump(summary, f, indent=1)
    if not args.no_figures:
        figures.save_fit_diagnostics(diag, out / "fit_diagnostics.png")
    print(f"fit over {len(records)} records: adj R^2 = {fit.adj_r_squared:.4f}, "
          f"imbalance p = {p_imb:.2e} (>0), entropy p = {p_ent:.2e} (<0)")
    print(f"wrote {out / 'fit_summary.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# select

def rows_to_candidates(rows: list[dict]) -> list[metrics.OperatingPoint]:
    """Average rows into per-(technique, treatment, iteration) candidates.

    Per-class accuracies, sparsity, and total accuracy average over seeds;
    the gap metrics are computed per seed and then averaged, skipping
    seeds where a class is undefined.
    """
    by_cell: dict[tuple, dict] = {}
    for r in rows:
        key = (r["technique"], r["treatment"], r["iteration"])
        cell = by_cell.setdefault(key, {})
        seed_block = cell.setdefault(r["seed"], {
            "sparsity": r["sparsity"], "total_accuracy": r["total_accuracy"], "acc": {}})
        seed_block["acc"][r["class"]] = r["accuracy"]

    candidates = []
    for key in sorted(by_cell):
        technique, treatment, iteration = key
        seeds = by_cell[key]
        classes = max(max(b["acc"]) for b in seeds.values()) + 1
        vectors = []
        for b in seeds.values():
            v = np.full(classes, np.nan)
            for c, a in b["acc"].items():
                v[c] = a
            vectors.append(v)
        stacked = np.stack(vectors)
        per_class = stacked.mean(axis=0)  # NaN propagates: undefined stays undefined
        unfair = {}
        for metric in metrics.FairnessMetric:
            vals = [metrics.unfairness(v, metric) for v in vectors
                    if np.all(np.isfinite(v))]
            unfair[metric.value] = float(np.mean(vals)) if vals else float("nan")
        candidates.append(metrics.OperatingPoint(
            technique=technique, treatment=treatment, iteration=iteration,
            sparsity=float(np.mean([b["sparsity"] for b in seeds.values()])),
            total_accuracy=float(np.mean([b["total_accuracy"] for b in seeds.values()])),
            per_class_accuracy=per_class, unfairness=unfair,
        ))
    return candidates


VALID_WEIGHT_KEYS = ("sparsity", "unfairness", "accuracy")


def _parse_weights(text: str | None) -> dict[str, float]:
    if not text:
        return {"sparsity": 1.0, "unfairness": 1.0}
    weights = {}
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"--weights entries must be name=value, got {part!r}")
        k, v = part.split("=", 1)
        k = k.strip()
        if k not in VALID_WEIGHT_KEYS:
            raise ConfigError(f"--weights key must be one of {VALID_WEIGHT_KEYS}, got {k!r}")
        try:
            weights[k] = float(v)
        except ValueError:
            raise ConfigError(f"--weights value for {k} must be a number, got {v!r}") from None
    return weights


def build_selection(candidates, min_accuracy: float, metric: str,
                    weights: dict[str, float]) -> dict:
    objectives = [
        pareto.Objective("sparsity", "maximize"),
        pareto.Objective("unfairness", "minimize", key=f"unfairness.{metric}"),
    ]
    if "accuracy" in weights:
        objectives.append(pareto.Objective("accuracy", "maximize", key="total_accuracy"))
    problem = pareto.SelectionProblem(candidates, objectives, min_accuracy)
    value = pareto.ValueFunction(weights)
    solution = pareto.solve(problem, value)
    on_frontier = set(solution["frontier"])
    return {
        "objectives": [{"name": o.name, "direction": o.direction} for o in objectives],
        "constraint": {"min_accuracy": min_accuracy},
        "metric": metric,
        "candidates": [
            {**c.to_dict(), "on_frontier": i in on_frontier}
            for i, c in enumerate(candidates)
        ],
        "selection": {"weights": weights, "chosen_index": solution["chosen"],
                      "tied_indices": solution["tied"]},
    }


def cmd_select(args) -> int:
    rows = read_experiment_csv(args.csv)
    candidates = rows_to_candidates(rows)
    weights = _parse_weights(args.weights)
    report = build_selection(candidates, args.min_accuracy, args.metric, weights)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "frontier.json", "w") as f:
        json.dump(report, f, indent=1)
    if not args.no_figures:
        figures.save_frontier(report["candidates"],
                              [c["on_frontier"] for c in report["candidates"]],
                              report["selection"]["chosen_index"],
                              out / "frontier.png", metric=args.metric)
    chosen = report["candidates"][report["selection"]["chosen_index"]]
    print(f"{len(candidates)} candidates, "
          f"{sum(c['on_frontier'] for c in report['candidates'])} on frontier")
    print(f"selected {chosen['technique']}/{chosen['treatment']} iteration "
          f"{chosen['iteration']}: sparsity {chosen['sparsity']:.4f}, "
          f"accuracy {chosen['total_accuracy']:.4f}")
    print(f"wrote {out / 'frontier.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# curves

CURVES_COLUMNS = ["technique", "treatment", "seed", "class", "iteration",
                  "sparsity", "accuracy", "accuracy0", "total_accuracy"]


def cmd_curves(args) -> int:
    rows = read_experiment_csv(args.csv)
    by_series: dict[tuple, dict[int, dict]] = {}
    for r in rows:
        key = (r["technique"], r["treatment"], r["seed"], r["class"])
        by_series.setdefault(key, {})[r["iteration"]] = r

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    table_rows = []
    plot_data: dict[str, dict[int, list[dict]]] = {}
    for key in sorted(by_series):
        technique, treatment, seed, cls = key
        label = f"{technique}/{treatment}/s{seed}"
        points = []
        for iteration in sorted(by_series[key]):
            r = by_series[key][iteration]
            table_rows.append([technique, treatment, seed, cls, iteration,
                               format_float(r["sparsity"]), format_float(r["accuracy"]),
                               format_float(r["accuracy0"]),
                               format_float(r["total_accuracy"])])
            points.append({"sparsity": r["sparsity"], "accuracy": r["accuracy"],
                           "accuracy0": r["accuracy0"]})
        plot_data.setdefault(label, {})[cls] = points

    with open(out / "curves.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CURVES_COLUMNS)
        writer.writerows(table_rows)
    if not args.no_figures:
        figures.save_curves(plot_data, out / "curves.png")
    print(f"wrote {out / 'curves.csv'} ({len(by_series)} series, {len(table_rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# cohort

def run_cohort(config: ExperimentConfig) -> tuple[list, dict]:
    """Train, prune to the final iteration, and compare per-writer accuracy."""
    technique = config.grid.techniques[0]
    treatment = config.grid.treatments[0]
    seed = config.grid.seeds[0]
    dataset = build_dataset(config)
    if dataset.metadata is None:
        raise ConfigError("cohort analysis needs a dataset with writer metadata")
    train_split, val_split = data.split(
        dataset, data.SplitSpec(config.validation_fraction, seed))

    root = RngState(seed)
    net = build_network(config.arch, dataset.image_size, dataset.classes, root.split("init"))
    train(net, train_split, config.train, root.split("base-train"), augment=config.augment)
    preds_before = evaluate(net, val_split)

    rng = root.split(f"trajectory|{technique.value}|{treatment.value}")
    for it in range(1, config.schedule.iterations + 1):
        prune_step(net, technique, config.schedule.fraction_per_iteration,
                   rng.split(f"prune{it}"), iteration=it)
        if treatment is WeightTreatment.REWIND:
            restore_unmasked(net, net.initial_snapshot)
        train(net, train_split, config.train, rng.split(f"train{it}"),
              augment=config.augment)
    preds_after = evaluate(net, val_split)

    records = cohort_mod.build_writer_records(
        val_split, preds_before, preds_after, cohort_mod.class_means(train_split))
    fits = {}
    for target in cohort_mod.TARGETS:
        fits[target] = {
            feature: cohort_mod.group_linear_fit(records, feature, target)
            for feature in cohort_mod.FEATURES
        }
    summary = {
        "technique": technique.value, "treatment": treatment.value, "seed": seed,
        "final_sparsity": sparsity_of(net),
        "accuracy_before": metrics.total_accuracy(preds_before, val_split.labels),
        "accuracy_after": metrics.total_accuracy(preds_after, val_split.labels),
        "fits": fits,
    }
    return records, summary


def cmd_cohort(args) -> int:
    config = load_config(args.config)
    records, summary = run_cohort(config)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "cohort.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["writer_id", "group", "n_examples", "accuracy_before",
                         "accuracy_after", "pct_change", "mean_tilt", "mean_abs_tilt",
                         "mean_activation", "mean_euclid"])
        for r in records:
            writer.writerow([r.writer_id, r.group, r.n_examples,
                             format_float(r.accuracy_before), format_float(r.accuracy_after),
                             format_float(r.pct_change), format_float(r.mean_tilt),
                             format_float(r.mean_abs_tilt), format_float(r.mean_activation),
                             format_float(r.mean_euclid)])

    with open(out / "group_fits.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["target", "feature", "group", "n", "intercept", "slope",
                         "slope_se", "intercept_se"])
        for target, by_feature in summary["fits"].items():
            for feature, fits in by_feature.items():
                for name in sorted(fits):
                    gf = fits[name]
                    writer.writerow([target, feature, name, gf.n,
                                     format_float(gf.intercept), format_float(gf.slope),
                                     format_float(gf.slope_se), format_float(gf.intercept_se)])

    if not args.no_figures:
        figures.save_cohort(records,
                            {t: summary["fits"][t]["mean_abs_tilt"]
                             for t in ("accuracy_before", "accuracy_after")},
                            out / "cohort.png")
    print(f"{len(records)} writers; accuracy {summary['accuracy_before']:.4f} -> "
          f"{summary['accuracy_after']:.4f} at sparsity {summary['final_sparsity']:.4f}")
    print(f"wrote {out / 'cohort.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plumbing

def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("PRUNEFAIR_OUT")
    return Path(env) if env else Path("prunefair-out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prunefair",
        description="Fairness-aware pruning experiments: run grids, fit the "
                    "accuracy model, and pick operating points.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None,
                       help="output directory (default: $PRUNEFAIR_OUT or ./prunefair-out)")
        p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")

    p_run = sub.add_parser("run", help="execute the configured grid")
    p_run.add_argument("--config", required=True, help="TOML experiment config")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_run.add_argument("--seed-list", default=None,
                       help="comma-separated seed override, e.g. 0,1,2")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_fit = sub.add_parser("fit", help="regression report over an experiment CSV")
    p_fit.add_argument("--csv", required=True, help="experiment CSV from 'run'")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_sel = sub.add_parser("select", help="frontier and operating-point selection")
    p_sel.add_argument("--csv", required=True, help="experiment CSV from 'run'")
    p_sel.add_argument("--min-accuracy", type=float, default=0.98,
                       help="feasibility floor on total accuracy (default 0.98)")
    p_sel.add_argument("--metric", choices=["max_min", "mean_min"], default="max_min",
                       help="unfairness gap used as the objective")
    p_sel.add_argument("--weights", default=None,
                       help="scalarization weights, e.g. sparsity=1,unfairness=5")
    common(p_sel)
    p_sel.set_defaults(func=cmd_select)

    p_cur = sub.add_parser("curves", help="per-trajectory accuracy/unfairness table")
    p_cur.add_argument("--csv", required=True, help="experiment CSV from 'run'")
    common(p_cur)
    p_cur.set_defaults(func=cmd_curves)

    p_coh = sub.add_parser("cohort", help="writer-level before/after analysis")
    p_coh.add_argument("--config", required=True, help="TOML config with a cohort dataset")
    common(p_coh)
    p_coh.set_defaults(func=cmd_cohort)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CsvSchemaError, data.DatasetError, data.IdxFormatError,
            FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except pareto.EmptyFeasibleSetError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EMPTY_FEASIBLE
    except (TrainingDivergenceError, regression.RankDeficiencyError,
            pareto.SelectionError, np.linalg.LinAlgError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
