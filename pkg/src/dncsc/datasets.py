"""Synthetic benchmark shapes and CSV ingestion.

The generators reproduce the look of the usual large-scale spectral
clustering benchmarks (two moons, two spirals, concentric circles, isotropic
Gaussian blobs). Every generator is a pure function of its spec, seed
included, and returns balanced classes (sizes differ by at most one).
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._random import make_rng
from .exceptions import DatasetError

SHAPES = ("two_moons", "two_spirals", "three_circles", "gaussian_blobs")

# noise levels that keep the curved shapes nonlinearly separable but clean
DEFAULT_NOISE = {"two_moons": 0.05, "two_spirals": 0.02, "three_circles": 0.05, "gaussian_blobs": 0.0}


@dataclass(frozen=True)
class DataMatrix:
    """``points`` is an (n, d) float array; ``labels`` optional ground truth."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise DatasetError(f"points must be 2-D, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            row, col = np.argwhere(~np.isfinite(pts))[0]
            raise DatasetError("non-finite value", row=int(row) + 1, column=int(col) + 1)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise DatasetError(f"labels must have shape ({pts.shape[0]},), got {lab.shape}")
            if lab.size and (not np.issubdtype(lab.dtype, np.integer) or lab.min() < 0):
                raise DatasetError("labels must be non-negative integers")
            object.__setattr__(self, "labels", lab.astype(np.int64))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def n_classes(self):
        if self.labels is None or self.labels.size == 0:
            return 0
        return int(self.labels.max()) + 1


@dataclass(frozen=True)
class BlobParams:
    n_blobs: int = 3
    std: float = 1.0
    box: tuple = (-10.0, 10.0)
    n_features: int = 2


@dataclass(frozen=True)
class SyntheticSpec:
    shape: str
    n: int
    noise: Optional[float] = None
    blob_params: BlobParams = field(default_factory=BlobParams)
    seed: int = 0

    @property
    def n_classes(self):
        if self.shape == "gaussian_blobs":
            return self.blob_params.n_blobs
        return 3 if self.shape == "three_circles" else 2

    def validate(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if self.noise is not None and not self.noise >= 0:
            raise ValueError(f"noise must be non-negative, got {self.noise}")
        if self.shape == "gaussian_blobs":
            bp = self.blob_params
            if bp.n_blobs < 1 or bp.n_features < 1 or bp.std < 0:
                raise ValueError(f"invalid blob parameters {bp}")
            if not bp.box[0] <= bp.box[1]:
                raise ValueError(f"blob box must satisfy low <= high, got {bp.box}")
        if self.n < self.n_classes:
            raise ValueError(f"n={self.n} is below the {self.n_classes} classes of {self.shape}")


def _class_sizes(n, c):
    base, extra = divmod(n, c)
    return [base + (i < extra) for i in range(c)]


def _two_moons(sizes, rng):
    parts = []
    t = rng.uniform(0.0, math.pi, sizes[0])
    parts.append(np.column_stack([np.cos(t), np.sin(t)]))
    t = rng.uniform(0.0, math.pi, sizes[1])
    parts.append(np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)]))
    return parts


def _two_spirals(sizes, rng):
    parts = []
    for c, size in enumerate(sizes):
        t = rng.uniform(0.5 * math.pi, 3.5 * math.pi, size)
        r = t / (2.0 * math.pi)
        sign = 1.0 if c == 0 else -1.0  # rotation by pi
        parts.append(sign * np.column_stack([r * np.cos(t), r * np.sin(t)]))
    return parts


def _three_circles(sizes, rng):
    parts = []
    for radius, size in zip((1.0, 2.0, 3.0), sizes):
        t = rng.uniform(0.0, 2.0 * math.pi, size)
        parts.append(radius * np.column_stack([np.cos(t), np.sin(t)]))
    return parts


def _blobs(sizes, rng, bp):
    low, high = bp.box
    centers = rng.uniform(low, high, (bp.n_blobs, bp.n_features))
    return [c + bp.std * rng.standard_normal((size, bp.n_features)) for c, size in zip(centers, sizes)]


def generate(spec):
    """Sample the dataset described by ``spec``.

    Returns a :class:`DataMatrix` with exactly ``spec.n`` shuffled points and
    the generating class as label.
    """
    spec.validate()
    noise = DEFAULT_NOISE[spec.shape] if spec.noise is None else spec.noise
    rng = make_rng(spec.seed)
    sizes = _class_sizes(spec.n, spec.n_classes)
    if spec.shape == "two_moons":
        parts = _two_moons(sizes, rng)
    elif spec.shape == "two_spirals":
        parts = _two_spirals(sizes, rng)
    elif spec.shape == "three_circles":
        parts = _three_circles(sizes, rng)
    else:
        parts = _blobs(sizes, rng, spec.blob_params)
    points = np.concatenate(parts)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    if noise > 0:
        points = points + noise * rng.standard_normal(points.shape)
    order = rng.permutation(spec.n)
    return DataMatrix(points[order], labels[order])


def _parse_float(text):
    try:
        value = float(text)
    except ValueError:
        return None
    return value


def load_csv(path, label_column=None):
    """Read a comma-separated numeric table.

    A first row whose (non-label) cells are all non-numeric is treated as a
    header. When ``label_column`` (0-based) is given that column is removed
    from the points and its values are mapped to dense integer labels in
    first-occurrence order. Errors report 1-based row and column numbers.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh)]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    numbered = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not numbered:
        raise DatasetError(f"{path} contains no data rows")

    width = len(numbered[0][1])
    if label_column is not None and not 0 <= label_column < width:
        raise DatasetError(f"label column {label_column} out of range for {width} columns", row=numbered[0][0])

    def value_cells(row):
        return [c for j, c in enumerate(row) if j != label_column]

    if all(_parse_float(c) is None for c in value_cells(numbered[0][1])):
        numbered = numbered[1:]
        if not numbered:
            raise DatasetError(f"{path} has a header but no data rows")

    points = np.empty((len(numbered), width - (label_column is not None)))
    raw_labels = []
    for out_row, (row_no, row) in enumerate(numbered):
        if len(row) != width:
            raise DatasetError(f"expected {width} cells, found {len(row)}", row=row_no)
        col_out = 0
        for j, cell in enumerate(row):
            if j == label_column:
                raw_labels.append(cell.strip())
                continue
            value = _parse_float(cell)
            if value is None:
                raise DatasetError(f"non-numeric cell {cell!r}", row=row_no, column=j + 1)
            if not math.isfinite(value):
                raise DatasetError(f"non-finite cell {cell!r}", row=row_no, column=j + 1)
            points[out_row, col_out] = value
            col_out += 1

    labels = None
    if label_column is not None:
        mapping = {}
        labels = np.array([mapping.setdefault(v, len(mapping)) for v in raw_labels], dtype=np.int64)
    return DataMatrix(points, labels)


def write_csv(data, path):
    """Write points (and the label column last, if any) at full precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for i, row in enumerate(data.points):
            cells = [f"{v:.17g}" for v in row]
            if data.labels is not None:
                cells.append(str(int(data.labels[i])))
            writer.writerow(cells)
