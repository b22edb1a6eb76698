"""Datasets: synthetic generators, CSV ingestion and feature selection.

The synthetic shapes (blobs, overlapping blobs, anisotropic blobs, moons)
follow the conventional scikit-learn clustering-guide constructions; their
exact parameters are fixed here so every run is reproducible from a seed
alone.  Two small classic UCI tables (iris, wine) ship with the package so
experiments need no network access.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

import numpy as np

# Centers of the conventional three-blob benchmark (the scikit-learn guide's
# random_state=170 draw), reused by blobs, blobs2 and aniso.
BLOB_CENTERS = (
    (-8.94709165, -5.46276435),
    (-4.58938989, 0.08876178),
    (1.93875432, 0.50513613),
)
# Conventional anisotropic transform applied to the blobs.
ANISO_TRANSFORM = ((0.6, -0.6), (-0.4, 0.8))
BLOBS_STD = 0.6          # well-separated
BLOBS2_STD = (1.0, 2.5, 0.5)  # overlapping
BLOBS3_CENTERS = ((-5.0, -5.0), (5.0, 5.0))

SYNTHETIC_SIZE = 1500


@dataclass
class Dataset:
    name: str
    matrix: np.ndarray
    ground_truth: np.ndarray | None = None
    feature_names: list[str] | None = None

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_features(self) -> int:
        return self.matrix.shape[1]

    @property
    def num_classes(self) -> int | None:
        if self.ground_truth is None:
            return None
        return int(self.ground_truth.max()) + 1


def _split_sizes(m: int, groups: int) -> list[int]:
    base, extra = divmod(m, groups)
    return [base + (1 if i < extra else 0) for i in range(groups)]


def gen_blobs(m: int, centers, std, seed: int, name: str = "blobs") -> Dataset:
    """Isotropic Gaussian clusters around the given centers.

    ``std`` is a scalar or one value per center; ``m`` is split as evenly as
    possible across the centers.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.size == 0:
        raise ValueError("need at least one center")
    stds = np.broadcast_to(np.asarray(std, dtype=float), (centers.shape[0],))
    rng = np.random.default_rng(seed)
    rows, truth = [], []
    for i, size in enumerate(_split_sizes(m, centers.shape[0])):
        rows.append(centers[i] + stds[i] * rng.standard_normal(
            (size, centers.shape[1])))
        truth.append(np.full(size, i, dtype=np.int64))
    return Dataset(name, np.vstack(rows), np.concatenate(truth))


def gen_aniso(m: int, seed: int, std: float = 1.0) -> Dataset:
    """Three Gaussian blobs squeezed by a fixed linear transform."""
    blobs = gen_blobs(m, BLOB_CENTERS, std, seed, name="aniso")
    transform = np.asarray(ANISO_TRANSFORM)
    blobs.matrix = blobs.matrix @ transform.T
    return blobs


def gen_moons(m: int, noise: float, seed: int) -> Dataset:
    """Two interleaving half-circles of radius 1, the second one flipped and
    offset by (1, 0.5), with isotropic Gaussian noise."""
    n_outer = m - m // 2
    n_inner = m // 2
    t_outer = np.linspace(0.0, math.pi, n_outer)
    t_inner = np.linspace(0.0, math.pi, n_inner)
    points = np.vstack([
        np.column_stack([np.cos(t_outer), np.sin(t_outer)]),
        np.column_stack([1.0 - np.cos(t_inner), 0.5 - np.sin(t_inner)]),
    ])
    rng = np.random.default_rng(seed)
    if noise > 0.0:
        points = points + rng.normal(0.0, noise, points.shape)
    truth = np.concatenate([
        np.zeros(n_outer, dtype=np.int64), np.ones(n_inner, dtype=np.int64)
    ])
    return Dataset("moon", points, truth)


def subsample(ds: Dataset, size: int, seed: int) -> Dataset:
    """Random subsample without replacement, ground truth carried along."""
    if size > len(ds):
        raise ValueError(f"cannot sample {size} of {len(ds)} records")
    picked = np.sort(np.random.default_rng(seed).choice(len(ds), size,
                                                        replace=False))
    truth = ds.ground_truth[picked] if ds.ground_truth is not None else None
    return Dataset(ds.name, ds.matrix[picked], truth, ds.feature_names)


def load_csv(path, has_header: bool = True, label_column=None) -> Dataset:
    """Numeric CSV loader; ``label_column`` (name or index) becomes the
    integer-coded ground truth.  Non-numeric feature cells are rejected with
    their row/column coordinates."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [row for row in rows if row]
    header: list[str] | None = None
    if has_header:
        if not rows:
            raise ValueError(f"{path}: empty file")
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    width = len(rows[0])
    label_idx: int | None = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None or label_column not in header:
                raise ValueError(f"{path}: unknown label column {label_column!r}")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not 0 <= label_idx < width:
                raise ValueError(f"{path}: label column {label_idx} out of range")

    matrix = []
    raw_labels = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{path}: row {r + 1} has {len(row)} cells, "
                             f"expected {width}")
        values = []
        for c, cell in enumerate(row):
            if c == label_idx:
                raw_labels.append(cell.strip())
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: row {r + 1}, column {c + 1}: "
                    f"non-numeric value {cell.strip()!r}") from None
        matrix.append(values)

    truth = None
    if label_idx is not None:
        classes = sorted(set(raw_labels))
        coding = {cls: i for i, cls in enumerate(classes)}
        truth = np.array([coding[lab] for lab in raw_labels], dtype=np.int64)
    names = None
    if header is not None:
        names = [name for i, name in enumerate(header) if i != label_idx]
    return Dataset(path.stem, np.asarray(matrix, dtype=float), truth, names)


def save_csv(ds: Dataset, path) -> None:
    """Write the dataset with 17-significant-digit values (bit-exact round
    trip through ``load_csv``); ground truth goes into a ``label`` column."""
    path = Path(path)
    names = ds.feature_names or [f"f{i}" for i in range(ds.num_features)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(names)
        if ds.ground_truth is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(len(ds)):
            row = [f"{v:.17g}" for v in ds.matrix[i]]
            if ds.ground_truth is not None:
                row.append(str(int(ds.ground_truth[i])))
            writer.writerow(row)


def select_features(ds: Dataset, names=None, top_variance: int | None = None
                    ) -> Dataset:
    """Column selection: either the named columns (in the given order) or the
    ``top_variance`` columns of largest sample variance (original column
    order preserved, ties broken by column index)."""
    if (names is None) == (top_variance is None):
        raise ValueError("choose exactly one of names / top_variance")
    if names is not None:
        if ds.feature_names is None:
            raise ValueError("dataset has no feature names")
        missing = [n for n in names if n not in ds.feature_names]
        if missing:
            raise ValueError(f"unknown feature name(s): {missing}")
        cols = [ds.feature_names.index(n) for n in names]
        new_names = list(names)
    else:
        if top_variance > ds.num_features:
            raise ValueError(f"cannot keep {top_variance} of "
                             f"{ds.num_features} features")
        variances = ds.matrix.var(axis=0, ddof=1)
        order = np.argsort(-variances, kind="stable")
        cols = sorted(int(c) for c in order[:top_variance])
        new_names = ([ds.feature_names[c] for c in cols]
                     if ds.feature_names is not None else None)
    return Dataset(ds.name, ds.matrix[:, cols], ds.ground_truth, new_names)


def _bundled(filename: str, label_column: str) -> Dataset:
    resource = files("qkmeans").joinpath(f"datasets/{filename}")
    with resource.open(newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    label_idx = header.index(label_column)
    matrix, truth = [], []
    for row in rows[1:]:
        truth.append(int(row[label_idx]))
        matrix.append([float(cell) for i, cell in enumerate(row)
                       if i != label_idx])
    names = [name for i, name in enumerate(header) if i != label_idx]
    return Dataset(filename.rsplit(".", 1)[0], np.asarray(matrix),
                   np.asarray(truth, dtype=np.int64), names)


def load_iris() -> Dataset:
    """The bundled 150x4 iris table (3 classes of 50)."""
    return _bundled("iris.csv", "species")


def load_wine() -> Dataset:
    """The bundled 178x13 wine table (3 classes)."""
    return _bundled("wine.csv", "class")


IRIS_FEATURES = ["sepal length", "petal length", "petal width"]
WINE_TOP_VARIANCE = 7


def builtin(name: str, m: int | None = None, seed: int = 0,
            std=None, noise: float | None = None) -> Dataset:
    """Named dataset registry used by the command-line harness.

    ``std``/``noise`` override the generator defaults where they apply.
    Real datasets come pre-selected to their experiment feature sets: iris
    keeps sepal length / petal length / petal width, wine keeps its 7
    highest-variance features.
    """
    key = name.lower()
    m = m if m is not None else SYNTHETIC_SIZE
    if key in ("iris", "wine") and (std is not None or noise is not None):
        raise ValueError(f"{name} takes no generator parameters")
    if key == "blobs":
        return gen_blobs(m, BLOB_CENTERS,
                         std if std is not None else BLOBS_STD, seed)
    if key == "blobs2":
        return gen_blobs(m, BLOB_CENTERS,
                         std if std is not None else BLOBS2_STD, seed,
                         name="blobs2")
    if key == "aniso":
        return gen_aniso(m, seed, std=std if std is not None else 1.0)
    if key == "moon":
        return gen_moons(m, noise if noise is not None else 0.05, seed)
    if key == "blobs3":
        return gen_blobs(m if m != SYNTHETIC_SIZE else 16, BLOBS3_CENTERS,
                         std if std is not None else 0.8, seed,
                         name="blobs3")
    if key == "iris":
        return select_features(load_iris(), names=IRIS_FEATURES)
    if key == "wine":
        return select_features(load_wine(), top_variance=WINE_TOP_VARIANCE)
    raise ValueError(f"unknown dataset {name!r}")
