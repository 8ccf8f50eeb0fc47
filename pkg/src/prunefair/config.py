"""TOML experiment configuration: parsing, validation, hashing.

A config names the dataset (an IDX pair on disk, a synthetic glyph spec,
or a writer-cohort spec), the model architecture, the training and
pruning hyperparameters, and the grid of technique x treatment x seed
cells to run. The hash covers only semantic fields, so re-running the
same experiment into the same output directory is recognized as such.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import data
from .net import AugmentConfig, TrainConfig
from .pruning import PruneSchedule, PruneTechnique, WeightTreatment
from .rng import RngState


class ConfigError(ValueError):
    pass


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing {where}.{key}")
    return table[key]


def _typed(table: dict, key: str, types, where: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing {where}.{key}")
        return default
    v = table[key]
    if not isinstance(v, types) or isinstance(v, bool) and bool not in _as_tuple(types):
        raise ConfigError(f"{where}.{key} has wrong type {type(v).__name__}")
    return v


def _as_tuple(types):
    return types if isinstance(types, tuple) else (types,)


@dataclass
class DatasetConfig:
    kind: str
    name: str
    raw: dict = field(default_factory=dict)


@dataclass
class GridConfig:
    techniques: list[PruneTechnique]
    treatments: list[WeightTreatment]
    seeds: list[int]


@dataclass
class ExperimentConfig:
    name: str
    dataset: DatasetConfig
    arch: str
    train: TrainConfig
    augment: AugmentConfig
    schedule: PruneSchedule
    grid: GridConfig
    validation_fraction: float = 0.2
    entropy_literal_prefactor: bool = False
    source_path: str | None = None

    def cells(self) -> list[tuple[PruneTechnique, WeightTreatment, int]]:
        return [(t, w, s) for t in self.grid.techniques
                for w in self.grid.treatments for s in self.grid.seeds]

    def semantic_dict(self) -> dict:
        return {
            "name": self.name,
            "dataset": {"kind": self.dataset.kind, "name": self.dataset.name,
                        **_jsonable(self.dataset.raw)},
            "arch": self.arch,
            "train": {"epochs": self.train.epochs,
                      "learning_rate": self.train.learning_rate,
                      "batch_size": self.train.batch_size},
            "augment": {"crop": self.augment.crop,
                        "crop_padding": self.augment.crop_padding,
                        "flip": self.augment.flip},
            "prune": {"iterations": self.schedule.iterations,
                      "fraction": self.schedule.fraction_per_iteration},
            "grid": {"techniques": [t.value for t in self.grid.techniques],
                     "treatments": [t.value for t in self.grid.treatments],
                     "seeds": list(self.grid.seeds)},
            "validation_fraction": self.validation_fraction,
            "entropy_literal_prefactor": self.entropy_literal_prefactor,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.semantic_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return parse_config(raw, source_path=str(path))


def parse_config(raw: dict, source_path: str | None = None) -> ExperimentConfig:
    name = _typed(raw, "name", str, "config", default="experiment")

    ds_table = _require(raw, "dataset", "config")
    kind = _typed(ds_table, "kind", str, "dataset", required=True)
    if kind not in ("idx", "synthetic", "cohort"):
        raise ConfigError(f"dataset.kind must be idx|synthetic|cohort, got {kind!r}")
    ds_name = _typed(ds_table, "name", str, "dataset", default=name)
    ds_raw = {k: v for k, v in ds_table.items() if k not in ("kind", "name")}
    _validate_dataset(kind, ds_raw)
    dataset = DatasetConfig(kind, ds_name, ds_raw)

    model = raw.get("model", {})
    arch = _typed(model, "arch", str, "model", default="lenet")

    tr = raw.get("train", {})
    try:
        train_cfg = TrainConfig(
            epochs=_typed(tr, "epochs", int, "train", default=30),
            learning_rate=_typed(tr, "learning_rate", (int, float), "train", default=0.01),
            batch_size=_typed(tr, "batch_size", int, "train", default=32),
        )
    except ValueError as e:
        raise ConfigError(f"train: {e}") from e
    augment = AugmentConfig(
        crop=_typed(tr, "augment_crop", bool, "train", default=False),
        crop_padding=_typed(tr, "crop_padding", int, "train", default=2),
        flip=_typed(tr, "augment_flip", bool, "train", default=False),
    )

    pr = raw.get("prune", {})
    try:
        schedule = PruneSchedule(
            iterations=_typed(pr, "iterations", int, "prune", default=20),
            fraction_per_iteration=_typed(pr, "fraction", (int, float), "prune", default=0.2),
        )
    except ValueError as e:
        raise ConfigError(f"prune: {e}") from e

    grid_table = _require(raw, "grid", "config")
    techniques = _enum_list(grid_table, "techniques", PruneTechnique)
    treatments = _enum_list(grid_table, "treatments", WeightTreatment)
    seeds = _typed(grid_table, "seeds", list, "grid", required=True)
    if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds):
        raise ConfigError("grid.seeds must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("grid.seeds contains duplicates")
    grid = GridConfig(techniques, treatments, list(seeds))

    sp = raw.get("split", {})
    vf = _typed(sp, "validation_fraction", (int, float), "split", default=0.2)
    if not 0 < vf < 1:
        raise ConfigError(f"split.validation_fraction must be in (0,1), got {vf}")

    en = raw.get("entropy", {})
    literal = _typed(en, "literal_prefactor", bool, "entropy", default=False)

    return ExperimentConfig(name, dataset, arch, train_cfg, augment, schedule, grid,
                            validation_fraction=float(vf),
                            entropy_literal_prefactor=literal,
                            source_path=source_path)


def _enum_list(table: dict, key: str, enum_cls) -> list:
    values = _typed(table, key, list, "grid", required=True)
    if not values:
        raise ConfigError(f"grid.{key} must be non-empty")
    out = []
    for v in values:
        try:
            out.append(enum_cls(v))
        except ValueError:
            valid = [e.value for e in enum_cls]
            raise ConfigError(f"grid.{key}: {v!r} is not one of {valid}") from None
    if len(set(out)) != len(out):
        raise ConfigError(f"grid.{key} contains duplicates")
    return out


def _validate_dataset(kind: str, ds: dict):
    where = "dataset"
    if kind == "idx":
        _typed(ds, "images", str, where, required=True)
        _typed(ds, "labels", str, where, required=True)
        _typed(ds, "metadata", str, where)
        _typed(ds, "classes", int, where)
    elif kind == "synthetic":
        counts = _typed(ds, "class_counts", list, where, required=True)
        if not counts or not all(isinstance(c, int) and c > 0 for c in counts):
            raise ConfigError("dataset.class_counts must be positive integers")
        noise = ds.get("noise", 0.08)
        if isinstance(noise, list):
            if len(noise) != len(counts):
                raise ConfigError("dataset.noise list must match class_counts length")
        elif not isinstance(noise, (int, float)):
            raise ConfigError("dataset.noise must be a number or per-class list")
        _typed(ds, "image_size", int, where)
        _typed(ds, "shift", int, where)
        _typed(ds, "glyph_seed", int, where)
        _typed(ds, "seed", int, where)
    else:  # cohort
        groups = _typed(ds, "groups", list, where, required=True)
        if not groups:
            raise ConfigError("dataset.groups must be non-empty")
        for i, g in enumerate(groups):
            if not isinstance(g, dict):
                raise ConfigError(f"dataset.groups[{i}] must be a table")
            gw = f"dataset.groups[{i}]"
            _typed(g, "name", str, gw, required=True)
            _typed(g, "writers", int, gw, required=True)
            _typed(g, "tilt_mean", (int, float), gw, required=True)
            _typed(g, "tilt_std", (int, float), gw, required=True)
        _typed(ds, "classes", int, where)
        _typed(ds, "image_size", int, where)
        _typed(ds, "seed", int, where)


def build_dataset(config: ExperimentConfig) -> data.LabeledDataset:
    """Materialize the configured dataset (loads IDX files or synthesizes)."""
    ds = config.dataset
    raw = ds.raw
    if ds.kind == "idx":
        base = Path(config.source_path).parent if config.source_path else Path(".")
        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p
        return data.load_idx(resolve(raw["images"]), resolve(raw["labels"]),
                             metadata_path=resolve(raw["metadata"]) if raw.get("metadata") else None,
                             classes=raw.get("classes"), name=ds.name)
    if ds.kind == "synthetic":
        counts = raw["class_counts"]
        noise = raw.get("noise", 0.08)
        noises = noise if isinstance(noise, list) else [noise] * len(counts)
        tilt_means = raw.get("tilt_means", [0.0] * len(counts))
        tilt_stds = raw.get("tilt_stds", [0.0] * len(counts))
        spec = data.SynthSpec(
            classes=[data.SynthClassSpec(count=c, noise=float(nz),
                                         tilt_mean=float(tm), tilt_std=float(tsd))
                     for c, nz, tm, tsd in zip(counts, noises, tilt_means, tilt_stds)],
            image_size=raw.get("image_size", 16),
            shift=raw.get("shift", 1),
            glyph_seed=raw.get("glyph_seed", 7),
            name=ds.name,
        )
        return data.synthesize(spec, RngState(raw.get("seed", 0)).split("dataset"))
    spec = data.CohortSpec(
        groups=[data.CohortGroupSpec(
            name=g["name"], writers=g["writers"],
            tilt_mean=float(g["tilt_mean"]), tilt_std=float(g["tilt_std"]),
            examples_per_writer=(g.get("examples_min", 34), g.get("examples_max", 134)),
        ) for g in raw["groups"]],
        classes=raw.get("classes", 10),
        image_size=raw.get("image_size", 20),
        thickness=raw.get("thickness", 2.0),
        noise=raw.get("noise", 0.05),
        shift=raw.get("shift", 1),
        glyph_seed=raw.get("glyph_seed", 7),
        name=ds.name,
    )
    return data.synthesize_cohort(spec, RngState(raw.get("seed", 0)).split("dataset"))
