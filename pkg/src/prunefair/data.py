"""Dataset loading, splitting, class statistics, and synthetic generators.

Images live as float64 arrays in [0, 1] quantized to the 256-level byte
grid, shaped (N, H, W). The on-disk format is the big-endian IDX pair
(magic 0x00000803 for images, 0x00000801 for labels) with an optional
CSV sidecar carrying writer metadata per example.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .rng import RngState
from .util import round_half_up

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """IDX parse failure; carries the byte offset where parsing stopped."""

    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"offset {offset}: {message}")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class ExampleMeta:
    writer_id: int
    group: str


@dataclass
class LabeledDataset:
    images: np.ndarray
    labels: np.ndarray
    classes: int
    metadata: list[ExampleMeta] | None = None
    name: str = ""

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.images.ndim != 3:
            raise DatasetError(f"images must be (N, H, W), got shape {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise DatasetError(
                f"{self.images.shape[0]} images but {self.labels.shape} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.classes):
            raise DatasetError(f"labels out of range for {self.classes} classes")
        if self.images.size and (self.images.min() < 0 or self.images.max() > 1):
            raise DatasetError("pixel values outside [0, 1]")
        if self.metadata is not None and len(self.metadata) != len(self.labels):
            raise DatasetError("metadata length does not match example count")

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def image_size(self) -> int:
        return int(self.images.shape[1])

    def take(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices)
        meta = None
        if self.metadata is not None:
            meta = [self.metadata[i] for i in indices]
        return LabeledDataset(self.images[indices], self.labels[indices],
                              self.classes, metadata=meta, name=self.name)


# ---------------------------------------------------------------------------
# IDX serialization

def _read_exact(f, n: int, offset: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise IdxFormatError(offset + len(buf), f"truncated while reading {what}")
    return buf


def _load_idx_images(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic, = struct.unpack(">I", _read_exact(f, 4, 0, "image magic"))
        if magic != IMAGE_MAGIC:
            raise IdxFormatError(0, f"bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
        n, rows, cols = struct.unpack(">III", _read_exact(f, 12, 4, "image dimensions"))
        raw = _read_exact(f, n * rows * cols, 16, f"{n} images of {rows}x{cols}")
        trailing = f.read(1)
        if trailing:
            raise IdxFormatError(16 + n * rows * cols, "trailing bytes after image data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(n, rows, cols).astype(np.float64) / 255.0


def _load_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic, = struct.unpack(">I", _read_exact(f, 4, 0, "label magic"))
        if magic != LABEL_MAGIC:
            raise IdxFormatError(0, f"bad label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
        n, = struct.unpack(">I", _read_exact(f, 4, 4, "label count"))
        raw = _read_exact(f, n, 8, f"{n} labels")
        trailing = f.read(1)
        if trailing:
            raise IdxFormatError(8 + n, "trailing bytes after label data")
    return np.frombuffer(raw, dtype=np.uint8).astype(np.int64)


def load_idx(images_path, labels_path, metadata_path=None, classes: int | None = None,
             name: str = "") -> LabeledDataset:
    """Load an IDX image/label pair (plus optional metadata sidecar)."""
    images = _load_idx_images(images_path)
    labels = _load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(4, f"{images.shape[0]} images but {labels.shape[0]} labels")
    if classes is None:
        classes = int(labels.max()) + 1 if labels.size else 1
    meta = load_metadata(metadata_path, len(labels)) if metadata_path else None
    return LabeledDataset(images, labels, classes, metadata=meta,
                          name=name or str(images_path))


def save_idx(dataset: LabeledDataset, images_path, labels_path, metadata_path=None):
    """Write the dataset back out as a big-endian IDX pair."""
    bytes_img = np.rint(dataset.images * 255).astype(np.uint8)
    n, rows, cols = bytes_img.shape
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        f.write(bytes_img.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, n))
        f.write(dataset.labels.astype(np.uint8).tobytes())
    if metadata_path is not None:
        if dataset.metadata is None:
            raise DatasetError("dataset has no metadata to save")
        save_metadata(dataset.metadata, metadata_path)


def load_metadata(path, expected: int) -> list[ExampleMeta]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ["index", "writer_id", "group"]:
            raise DatasetError(f"metadata header must be index,writer_id,group, "
                               f"got {reader.fieldnames}")
        rows = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                idx = int(row["index"])
                writer = int(row["writer_id"])
            except (TypeError, ValueError) as e:
                raise DatasetError(f"metadata line {lineno}: {e}") from e
            rows[idx] = ExampleMeta(writer, row["group"])
    if sorted(rows) != list(range(expected)):
        raise DatasetError(f"metadata must cover indices 0..{expected - 1} exactly")
    return [rows[i] for i in range(expected)]


def save_metadata(metadata: list[ExampleMeta], path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "writer_id", "group"])
        for i, m in enumerate(metadata):
            writer.writerow([i, m.writer_id, m.group])


# ---------------------------------------------------------------------------
# Splitting and class statistics

@dataclass(frozen=True)
class SplitSpec:
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.validation_fraction < 1:
            raise DatasetError(
                f"validation fraction must be in (0,1), got {self.validation_fraction}")


def split(data: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Disjoint, exhaustive train/validation split, deterministic in the seed."""
    n = len(data)
    n_val = round_half_up(spec.validation_fraction * n)
    if n_val < 1 or n_val >= n:
        raise DatasetError(f"split of {n} examples leaves an empty side")
    perm = RngState(spec.seed).split("split").generator.permutation(n)
    val_idx = np.sort(perm[:n_val])
    train_idx = np.sort(perm[n_val:])
    return data.take(train_idx), data.take(val_idx)


def class_counts(data: LabeledDataset) -> np.ndarray:
    return np.bincount(data.labels, minlength=data.classes)


def class_imbalance(data: LabeledDataset) -> np.ndarray:
    """Centered class-frequency vector: n_c minus the mean frequency (sums to 0)."""
    if len(data) == 0:
        raise DatasetError("imbalance undefined on an empty dataset")
    n = class_counts(data) / len(data)
    return n - n.mean()


def image_entropy(image: np.ndarray) -> float:
    """Shannon entropy (bits) of the byte-level histogram of one image."""
    levels = np.rint(np.asarray(image) * 255).astype(np.int64).reshape(-1)
    p = np.bincount(levels, minlength=256) / levels.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def class_entropy(data: LabeledDataset, cls: int, literal_prefactor: bool = False) -> float:
    """Mean per-image byte entropy over a class's training images.

    With literal_prefactor the sum is divided by the class count C instead
    of the number of images in the class; kept for compatibility with an
    alternate reading of the averaging constant.
    """
    member = data.labels == cls
    if not member.any():
        raise DatasetError(f"class {cls} has no examples")
    total = sum(image_entropy(img) for img in data.images[member])
    denom = data.classes if literal_prefactor else int(member.sum())
    return total / denom


def class_entropies(data: LabeledDataset, literal_prefactor: bool = False) -> np.ndarray:
    return np.array([class_entropy(data, c, literal_prefactor) for c in range(data.classes)])


# ---------------------------------------------------------------------------
# Synthetic generators

@dataclass
class SynthClassSpec:
    count: int
    noise: float = 0.08
    tilt_mean: float = 0.0
    tilt_std: float = 0.0
    thickness: float = 2.0
    template: np.ndarray | None = None


@dataclass
class SynthSpec:
    classes: list[SynthClassSpec]
    image_size: int = 16
    shift: int = 1
    glyph_seed: int = 7
    name: str = "synthetic"

    def __post_init__(self):
        if not self.classes:
            raise DatasetError("at least one class required")
        for i, c in enumerate(self.classes):
            if c.count < 1:
                raise DatasetError(f"class {i} count must be >= 1, got {c.count}")
            if c.noise < 0:
                raise DatasetError(f"class {i} noise must be >= 0")


def _glyph_segments(cls: int, seed: int) -> np.ndarray:
    """Polyline control points in the unit square, per class, seed-stable."""
    gen = RngState(seed).split(f"glyph{cls}").generator
    pts = gen.uniform(0.2, 0.8, size=(4, 2))
    # stretch the polyline vertically so tilt has a lever arm to act on
    pts[:, 0] = np.sort(gen.uniform(0.15, 0.85, size=4))
    return pts


def _render_polyline(points: np.ndarray, size: int, tilt: float, shift_rc,
                     thickness: float) -> np.ndarray:
    """Rasterize a sheared polyline with ~1px soft edges.

    points are (row, col) in unit coordinates; tilt shears column as a
    linear function of row about the image center, so the column-on-row
    slope of the rendered stroke tracks the tilt parameter.
    """
    pts = points * (size - 1)
    center = (size - 1) / 2.0
    pts = pts.copy()
    pts[:, 1] += tilt * (pts[:, 0] - center)
    pts[:, 0] += shift_rc[0]
    pts[:, 1] += shift_rc[1]
    rr, cc = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.zeros((size, size))
    for (r1, c1), (r2, c2) in zip(pts[:-1], pts[1:]):
        dr, dc = r2 - r1, c2 - c1
        norm2 = dr * dr + dc * dc
        if norm2 == 0:
            d = np.hypot(rr - r1, cc - c1)
        else:
            t = np.clip(((rr - r1) * dr + (cc - c1) * dc) / norm2, 0.0, 1.0)
            d = np.hypot(rr - (r1 + t * dr), cc - (c1 + t * dc))
        img = np.maximum(img, np.clip(thickness / 2.0 + 0.5 - d, 0.0, 1.0))
    return img


def stroke_image(size: int, tilt: float, thickness: float = 2.0,
                 length: float = 0.7, noise: float = 0.0, rng: RngState | None = None) -> np.ndarray:
    """A single near-vertical stroke of the given tilt; handy for feature tests."""
    lo = 0.5 - length / 2
    pts = np.array([[lo, 0.5], [lo + length, 0.5]])
    img = _render_polyline(pts, size, tilt, (0, 0), thickness)
    if noise > 0:
        if rng is None:
            raise DatasetError("noise requires an rng")
        img = np.clip(img + rng.generator.uniform(0, noise, img.shape), 0, 1)
    return np.rint(img * 255) / 255.0


def synthesize(spec: SynthSpec, rng: RngState) -> LabeledDataset:
    """Generate a labeled glyph dataset.

    Each class renders a fixed polyline template (or an explicit template
    array) under per-example shift, tilt, and additive uniform noise; zero
    noise and zero shift/tilt reproduce the template exactly.
    """
    images, labels = [], []
    size = spec.image_size
    for cls, cspec in enumerate(spec.classes):
        class_rng = rng.split(f"class{cls}").generator
        if cspec.template is None:
            points = _glyph_segments(cls, spec.glyph_seed)
        else:
            template = np.asarray(cspec.template, dtype=np.float64)
            if template.shape != (size, size):
                raise DatasetError(
                    f"class {cls} template shape {template.shape} != ({size}, {size})")
        for _ in range(cspec.count):
            tilt = float(class_rng.normal(cspec.tilt_mean, cspec.tilt_std)) \
                if cspec.tilt_std > 0 else cspec.tilt_mean
            if spec.shift > 0:
                shift_rc = class_rng.integers(-spec.shift, spec.shift + 1, size=2)
            else:
                shift_rc = (0, 0)
            if cspec.template is None:
                img = _render_polyline(points, size, tilt, shift_rc, cspec.thickness)
            else:
                img = _shift_shear(template, tilt, shift_rc)
            if cspec.noise > 0:
                img = img + class_rng.uniform(0, cspec.noise, img.shape)
            images.append(np.clip(img, 0, 1))
            labels.append(cls)
    images = np.rint(np.array(images) * 255) / 255.0
    return LabeledDataset(images, np.array(labels, dtype=np.int64),
                          len(spec.classes), name=spec.name)


def _shift_shear(template: np.ndarray, tilt: float, shift_rc) -> np.ndarray:
    """Nearest-neighbor shear plus integer shift for explicit templates."""
    size = template.shape[0]
    center = (size - 1) / 2.0
    rr, cc = np.mgrid[0:size, 0:size]
    src_r = rr - int(shift_rc[0])
    src_c = np.rint(cc - shift_rc[1] - tilt * (rr - center)).astype(np.int64)
    valid = (src_r >= 0) & (src_r < size) & (src_c >= 0) & (src_c < size)
    out = np.zeros_like(template)
    out[valid] = template[src_r[valid], src_c[valid]]
    return out


@dataclass
class CohortGroupSpec:
    name: str
    writers: int
    tilt_mean: float
    tilt_std: float
    examples_per_writer: tuple[int, int] = (34, 134)


@dataclass
class CohortSpec:
    groups: list[CohortGroupSpec]
    classes: int = 10
    image_size: int = 20
    thickness: float = 2.0
    noise: float = 0.05
    shift: int = 1
    glyph_seed: int = 7
    within_writer_tilt_std: float = 0.03
    name: str = "synthetic-cohort"

    def __post_init__(self):
        if not self.groups:
            raise DatasetError("at least one cohort group required")
        for g in self.groups:
            lo, hi = g.examples_per_writer
            if g.writers < 1 or lo < 1 or hi < lo:
                raise DatasetError(f"bad cohort group spec: {g}")


def synthesize_cohort(spec: CohortSpec, rng: RngState) -> LabeledDataset:
    """Writer-structured glyph dataset with per-group tilt distributions.

    Every writer gets a personal tilt drawn from their group's distribution
    and contributes a uniformly random count of examples over uniformly
    random classes; metadata records writer id and group name per example.
    """
    images, labels, meta = [], [], []
    size = spec.image_size
    segments = [_glyph_segments(c, spec.glyph_seed) for c in range(spec.classes)]
    writer_id = 0
    for group in spec.groups:
        for _ in range(group.writers):
            wrng = rng.split(f"writer{writer_id}").generator
            writer_tilt = float(wrng.normal(group.tilt_mean, group.tilt_std))
            count = int(wrng.integers(group.examples_per_writer[0],
                                      group.examples_per_writer[1] + 1))
            for _ in range(count):
                cls = int(wrng.integers(0, spec.classes))
                tilt = writer_tilt + float(wrng.normal(0, spec.within_writer_tilt_std))
                shift_rc = wrng.integers(-spec.shift, spec.shift + 1, size=2) \
                    if spec.shift > 0 else (0, 0)
                img = _render_polyline(segments[cls], size, tilt, shift_rc, spec.thickness)
                if spec.noise > 0:
                    img = img + wrng.uniform(0, spec.noise, img.shape)
                images.append(np.clip(img, 0, 1))
                labels.append(cls)
                meta.append(ExampleMeta(writer_id, group.name))
            writer_id += 1
    images = np.rint(np.array(images) * 255) / 255.0
    return LabeledDataset(images, np.array(labels, dtype=np.int64), spec.classes,
                          metadata=meta, name=spec.name)
