"""Image dataset loading: IDX binaries, USPS text files, synthetic blobs.

Every loader produces an :class:`ImageDataset` whose feature rows are the
flattened images (pixel at row r, column c of a width-w image lands in feature
column ``r * w + c``) with all training rows stored before all test rows.
Pixel ranges: IDX images are unsigned bytes rescaled to [0, 1]; USPS text
values are kept in their native [-1, 1] range.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError

_IDX_IMAGES_MAGIC = 2051
_IDX_LABELS_MAGIC = 2049


@dataclass(frozen=True)
class ImageDataset:
    """Flattened features with integer class labels and a train/test split."""

    features: np.ndarray       # n x m float64
    labels: np.ndarray         # n int64, each in [0, num_classes)
    train_indices: np.ndarray  # int64
    test_indices: np.ndarray   # int64
    num_classes: int

    def __post_init__(self):
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ValueError(f"labels shape {self.labels.shape} != ({n},)")
        combined = np.concatenate([self.train_indices, self.test_indices])
        if not np.array_equal(np.sort(combined), np.arange(n)):
            raise ValueError("train/test indices must partition [0, n) without overlap")
        if self.labels.min(initial=0) < 0 or self.labels.max(initial=0) >= self.num_classes:
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite entries")

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def _read_exact(path, expect_magic):
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise FormatError(f"{path}: truncated IDX header")
    magic, count = struct.unpack(">II", data[:8])
    if magic != expect_magic:
        raise FormatError(f"{path}: bad IDX magic {magic}, expected {expect_magic}")
    return data, count


def _read_idx_images(path):
    data, count = _read_exact(path, _IDX_IMAGES_MAGIC)
    if len(data) < 16:
        raise FormatError(f"{path}: truncated IDX image header")
    rows, cols = struct.unpack(">II", data[8:16])
    need = 16 + count * rows * cols
    if len(data) < need:
        raise FormatError(f"{path}: expected {need} bytes, file has {len(data)}")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16, count=count * rows * cols)
    # Row-major flattening: pixel (r, c) -> column r*cols + c.
    features = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    return features, (rows, cols)


def _read_idx_labels(path):
    data, count = _read_exact(path, _IDX_LABELS_MAGIC)
    if len(data) < 8 + count:
        raise FormatError(f"{path}: expected {8 + count} bytes, file has {len(data)}")
    return np.frombuffer(data, dtype=np.uint8, offset=8, count=count).astype(np.int64)


def load_idx_dataset(images_path_train, labels_path_train,
                     images_path_test, labels_path_test) -> ImageDataset:
    """Load an MNIST-layout dataset from the four standard IDX files."""
    train_x, shape_train = _read_idx_images(images_path_train)
    train_y = _read_idx_labels(labels_path_train)
    test_x, shape_test = _read_idx_images(images_path_test)
    test_y = _read_idx_labels(labels_path_test)
    if shape_train != shape_test:
        raise FormatError(f"image shapes differ between splits: {shape_train} vs {shape_test}")
    if train_x.shape[0] != train_y.shape[0]:
        raise FormatError(
            f"train image count {train_x.shape[0]} != label count {train_y.shape[0]}")
    if test_x.shape[0] != test_y.shape[0]:
        raise FormatError(
            f"test image count {test_x.shape[0]} != label count {test_y.shape[0]}")
    features = np.vstack([train_x, test_x])
    labels = np.concatenate([train_y, test_y])
    l = train_x.shape[0]
    n = features.shape[0]
    return ImageDataset(
        features=features,
        labels=labels,
        train_indices=np.arange(l, dtype=np.int64),
        test_indices=np.arange(l, n, dtype=np.int64),
        num_classes=int(labels.max()) + 1,
    )


def save_idx_dataset(ds: ImageDataset, images_path_train, labels_path_train,
                     images_path_test, labels_path_test, image_shape=None):
    """Write ``ds`` back to the four IDX files (features must lie in [0, 1]).

    Inverse of :func:`load_idx_dataset` for byte-derived features: pixels are
    rounded to unsigned bytes, so x/255 values round-trip bit-identically.
    """
    if ds.features.min(initial=0.0) < 0.0 or ds.features.max(initial=0.0) > 1.0:
        raise ValueError("IDX export requires features in [0, 1]")
    m = ds.num_features
    if image_shape is None:
        side = int(round(np.sqrt(m)))
        if side * side != m:
            raise ValueError(f"cannot infer image shape from {m} features; pass image_shape")
        image_shape = (side, side)
    rows, cols = image_shape
    if rows * cols != m:
        raise ValueError(f"image_shape {image_shape} does not match {m} features")

    def write_split(indices, images_path, labels_path):
        pixels = np.round(ds.features[indices] * 255.0).astype(np.uint8)
        with open(images_path, "wb") as fh:
            fh.write(struct.pack(">IIII", _IDX_IMAGES_MAGIC, len(indices), rows, cols))
            fh.write(pixels.tobytes())
        with open(labels_path, "wb") as fh:
            fh.write(struct.pack(">II", _IDX_LABELS_MAGIC, len(indices)))
            fh.write(ds.labels[indices].astype(np.uint8).tobytes())

    write_split(ds.train_indices, images_path_train, labels_path_train)
    write_split(ds.test_indices, images_path_test, labels_path_test)


def _read_usps_file(path):
    rows = []
    labels = []
    width = None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if width is None:
                width = len(fields) - 1
                if width < 1:
                    raise FormatError(f"{path}:{lineno}: no pixel values on line")
            elif len(fields) - 1 != width:
                raise FormatError(
                    f"{path}:{lineno}: expected {width + 1} fields, got {len(fields)}")
            try:
                values = np.array(fields, dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            labels.append(int(values[0]))  # label is a real, truncated toward zero
            rows.append(values[1:])
    if not rows:
        raise FormatError(f"{path}: no samples found")
    return np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64)


def load_usps_dataset(train_path, test_path) -> ImageDataset:
    """Load USPS from whitespace text files: label followed by 256 pixel reals."""
    train_x, train_y = _read_usps_file(train_path)
    test_x, test_y = _read_usps_file(test_path)
    if train_x.shape[1] != test_x.shape[1]:
        raise FormatError(
            f"pixel counts differ between splits: {train_x.shape[1]} vs {test_x.shape[1]}")
    features = np.vstack([train_x, test_x])
    labels = np.concatenate([train_y, test_y])
    l = train_x.shape[0]
    n = features.shape[0]
    return ImageDataset(
        features=features,
        labels=labels,
        train_indices=np.arange(l, dtype=np.int64),
        test_indices=np.arange(l, n, dtype=np.int64),
        num_classes=int(labels.max()) + 1,
    )


def save_usps_dataset(ds: ImageDataset, train_path, test_path):
    """Write ``ds`` in the USPS text layout; %.17g keeps float64 exact."""

    def write_split(indices, path):
        with open(path, "w") as fh:
            for i in indices:
                pixels = " ".join(f"{v:.17g}" for v in ds.features[i])
                fh.write(f"{ds.labels[i]} {pixels}\n")

    write_split(ds.train_indices, train_path)
    write_split(ds.test_indices, test_path)


def synthetic_blobs(n: int, num_classes: int, dim: int, spread: float,
                    seed: int) -> ImageDataset:
    """Well-separated Gaussian clusters for desk-scale tests.

    Class centers sit at distance >= 10 * spread from each other, class sizes
    are balanced, and each class is split 70/30 into train/test.  All
    randomness flows through a single PCG64 stream seeded with ``seed`` (one
    standard-normal block per class, drawn in class order), so identical
    arguments produce bit-identical datasets.
    """
    if not (n >= num_classes >= 2):
        raise ValueError(f"need n >= num_classes >= 2, got n={n}, C={num_classes}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    rng = np.random.default_rng(seed)

    sizes = np.full(num_classes, n // num_classes, dtype=np.int64)
    sizes[: n % num_classes] += 1

    gap = 10.0 * spread
    features = np.empty((n, dim))
    labels = np.empty(n, dtype=np.int64)
    train_rows, test_rows = [], []
    offset = 0
    for c in range(num_classes):
        center = np.zeros(dim)
        center[c % dim] = gap * (1 + c // dim)
        size = int(sizes[c])
        features[offset:offset + size] = center + spread * rng.standard_normal((size, dim))
        labels[offset:offset + size] = c
        n_train = int(size * 0.7 + 0.5)
        train_rows.append(np.arange(offset, offset + n_train))
        test_rows.append(np.arange(offset + n_train, offset + size))
        offset += size

    # Reorder so all training rows precede all test rows.
    order = np.concatenate(train_rows + test_rows)
    l = sum(len(r) for r in train_rows)
    return ImageDataset(
        features=features[order],
        labels=labels[order],
        train_indices=np.arange(l, dtype=np.int64),
        test_indices=np.arange(l, n, dtype=np.int64),
        num_classes=num_classes,
    )


def stratified_subsample(ds: ImageDataset, size: int, seed: int) -> ImageDataset:
    """Seeded stratified subsample preserving the train:test ratio of ``ds``.

    Per-class quotas are proportional with largest-remainder rounding, and
    rows are drawn uniformly without replacement from each class pool
    (classes in ascending order, train pool before test pool).
    """
    n = ds.num_samples
    if not (0 < size <= n):
        raise ValueError(f"subsample size must be in (0, {n}], got {size}")
    rng = np.random.default_rng(seed)
    want_train = int(round(size * len(ds.train_indices) / n))
    want_test = size - want_train

    def draw(pool_indices, want):
        pools = [pool_indices[ds.labels[pool_indices] == c] for c in range(ds.num_classes)]
        quota = _largest_remainder([len(p) for p in pools], want)
        picks = []
        for pool, q in zip(pools, quota):
            if q > len(pool):
                raise ValueError("class pool smaller than its subsample quota")
            if q:
                picks.append(np.sort(rng.choice(pool, size=q, replace=False)))
        return np.concatenate(picks) if picks else np.array([], dtype=np.int64)

    train_rows = draw(ds.train_indices, want_train)
    test_rows = draw(ds.test_indices, want_test)
    order = np.concatenate([train_rows, test_rows])
    return ImageDataset(
        features=ds.features[order],
        labels=ds.labels[order],
        train_indices=np.arange(len(train_rows), dtype=np.int64),
        test_indices=np.arange(len(train_rows), size, dtype=np.int64),
        num_classes=ds.num_classes,
    )


def _largest_remainder(counts, total):
    """Integer quotas proportional to ``counts`` summing exactly to ``total``."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.sum() < total:
        raise ValueError("pool smaller than requested total")
    exact = counts * (total / counts.sum())
    quota = np.floor(exact).astype(np.int64)
    shortfall = total - int(quota.sum())
    if shortfall:
        # Break remainder ties by lower class index.
        order = np.lexsort((np.arange(len(counts)), -(exact - quota)))
        quota[order[:shortfall]] += 1
    return quota
