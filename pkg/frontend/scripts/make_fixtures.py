#!/usr/bin/env python3
"""Regenerate the parity fixtures in test/fixtures/.

Each fixture is a frontier JSON produced by the real `prunefair select` CLI
on a randomized experiment CSV with randomized weights, gap metric, and
accuracy floor. The explorer's test suite replays the selection client-side
and must land on the same chosen index, tie set, and frontier flags.

Deterministic: run from this directory (or anywhere) with

    python3 scripts/make_fixtures.py

and the 50 fixtures come out identical. Requires the Python package to be
installed (`pip install -e ..`).
"""

import csv
import json
import random
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"
N_FIXTURES = 50

TECHNIQUES = [
    "l1_unstructured", "random_unstructured", "global_unstructured",
    "l1_structured", "l2_structured", "linfty_structured", "random_structured",
]
COLUMNS = ["dataset", "model", "technique", "treatment", "seed", "iteration",
           "sparsity", "class", "accuracy", "accuracy0", "imbalance",
           "class_entropy", "total_accuracy"]


def synth_rows(rng: random.Random) -> list[dict]:
    techniques = rng.sample(TECHNIQUES, rng.randint(1, 4))
    treatments = rng.sample(["finetune", "rewind"], rng.randint(1, 2))
    seeds = list(range(rng.randint(1, 3)))
    iterations = rng.randint(4, 12)
    classes = rng.randint(3, 8)
    base = [rng.uniform(0.82, 0.99) for _ in range(classes)]
    imbalance = [rng.uniform(-0.05, 0.05) for _ in range(classes)]
    entropy = [rng.uniform(0.3, 0.9) for _ in range(classes)]

    rows = []
    for tech in techniques:
        # per-technique degradation speed, so frontiers differ across cells
        speed = rng.uniform(0.05, 0.5)
        for treat in treatments:
            for seed in seeds:
                cell = rng.random()
                for it in range(iterations + 1):
                    sparsity = 1 - 0.8 ** it
                    decay = speed * sparsity ** 2
                    accs = []
                    for c in range(classes):
                        hit = decay * (1 + 0.8 * rng.random() + 0.3 * c / classes)
                        accs.append(max(0.0, min(1.0, base[c] - hit + 0.01 * cell)))
                    total = sum(accs) / classes
                    for c in range(classes):
                        rows.append({
                            "dataset": "synth", "model": "mlp",
                            "technique": tech, "treatment": treat, "seed": seed,
                            "iteration": it, "sparsity": repr(sparsity),
                            "class": c, "accuracy": repr(accs[c]),
                            "accuracy0": repr(base[c]),
                            "imbalance": repr(imbalance[c]),
                            "class_entropy": repr(entropy[c]),
                            "total_accuracy": repr(total),
                        })
    # sometimes clone a technique under another name: duplicate objective
    # vectors must survive the frontier together
    if len(techniques) < len(TECHNIQUES) and rng.random() < 0.25:
        spare = [t for t in TECHNIQUES if t not in techniques]
        alias = rng.choice(spare)
        src = techniques[0]
        clones = [dict(r, technique=alias) for r in rows if r["technique"] == src]
        rows.extend(clones)
    return rows


def pick_weights(rng: random.Random) -> str:
    w = {"sparsity": round(rng.uniform(0.0, 20.0), 3),
         "unfairness": round(rng.uniform(0.1, 80.0), 3)}
    if rng.random() < 0.35:
        w["accuracy"] = round(rng.uniform(0.0, 30.0), 3)
    if all(v == 0 for v in w.values()):
        w["unfairness"] = 1.0
    return ",".join(f"{k}={v}" for k, v in w.items())


def run_select(csv_path: Path, out: Path, min_acc: float, metric: str,
               weights: str) -> int:
    cmd = [sys.executable, "-m", "prunefair.cli", "select",
           "--csv", str(csv_path), "--out", str(out), "--no-figures",
           "--min-accuracy", repr(min_acc), "--metric", metric,
           "--weights", weights]
    return subprocess.run(cmd, capture_output=True).returncode


def main() -> int:
    rng = random.Random(97)
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for old in FIXTURES.glob("f*.json"):
        old.unlink()

    made = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmpdir = Path(tmp)
        while made < N_FIXTURES:
            rows = synth_rows(rng)
            csv_path = tmpdir / "experiments.csv"
            with open(csv_path, "w", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=COLUMNS)
                writer.writeheader()
                writer.writerows(rows)

            totals = sorted({float(r["total_accuracy"]) for r in rows})
            # floor somewhere inside the observed range, so feasibility varies
            min_acc = rng.uniform(totals[0] - 0.02, totals[-1])
            metric = rng.choice(["max_min", "mean_min"])
            weights = pick_weights(rng)

            out = tmpdir / "out"
            shutil.rmtree(out, ignore_errors=True)
            code = run_select(csv_path, out, min_acc, metric, weights)
            if code == 3:
                continue  # infeasible draw; the UI covers that state separately
            if code != 0:
                print(f"select failed with exit {code}", file=sys.stderr)
                return 1
            dest = FIXTURES / f"f{made:02d}.json"
            shutil.copyfile(out / "frontier.json", dest)
            made += 1

    print(f"wrote {made} fixtures to {FIXTURES}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
