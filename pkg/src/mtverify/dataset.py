"""Corpus loading, validation, subsampling, and manifest handling.

Two on-disk formats are supported:

* a headerless CSV of 65 numeric columns per row (64 features followed by
  the class label), and
* fixed-width binary image records of 3073 bytes: one label byte followed
  by three 1024-byte channel planes (R, then G, then B), each plane laid
  out row-major over a 32x32 grid.

In memory, vector features are 64-bit floats and image tensors are 32-bit
floats in channel-planar order (m, 3, H, W) with raw values in [0, 255].
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, ValidationError

CSV_COLUMNS = 65
IMAGE_RECORD_BYTES = 3073
IMAGE_SIDE = 32
IMAGE_PLANE = IMAGE_SIDE * IMAGE_SIDE


@dataclass
class LabeledVectorSet:
    """Feature matrix plus integer labels.

    ``class_count`` is the declared number of classes; labels must lie in
    [0, class_count). Pass ``class_count=None`` for corpora whose class
    set is derived from the observed labels (application-style ingestion).
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int | None = 10

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.validate()

    def validate(self):
        if self.features.ndim != 2:
            raise ValidationError(f"features must be 2-d, got shape {self.features.shape}")
        if self.features.shape[0] == 0:
            raise ValidationError("vector set holds no instances")
        if self.labels.shape != (self.features.shape[0],):
            raise ValidationError(
                f"labels shape {self.labels.shape} does not match {self.features.shape[0]} rows")
        if not np.isfinite(self.features).all():
            raise ValidationError("features contain non-finite values")
        if self.class_count is not None:
            bad = (self.labels < 0) | (self.labels >= self.class_count)
            if bad.any():
                idx = int(np.argmax(bad))
                raise ValidationError(
                    f"label {self.labels[idx]} at row {idx} outside 0..{self.class_count - 1}")

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def classes(self):
        return np.unique(self.labels)


@dataclass
class LabeledImageSet:
    """Square RGB images, channel-planar (m, 3, H, W), plus labels."""

    images: np.ndarray
    labels: np.ndarray
    class_count: int | None = 10

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.validate()

    def validate(self):
        if self.images.ndim != 4 or self.images.shape[1] != 3:
            raise ValidationError(f"images must have shape (m, 3, H, W), got {self.images.shape}")
        if self.images.shape[2] != self.images.shape[3]:
            raise ValidationError(
                f"images must be square, got {self.images.shape[2]}x{self.images.shape[3]}")
        if self.images.shape[0] == 0:
            raise ValidationError("image set holds no instances")
        if self.labels.shape != (self.images.shape[0],):
            raise ValidationError("labels do not align with images")
        if not np.isfinite(self.images).all():
            raise ValidationError("images contain non-finite values")
        if self.class_count is not None:
            bad = (self.labels < 0) | (self.labels >= self.class_count)
            if bad.any():
                idx = int(np.argmax(bad))
                raise ValidationError(
                    f"label {self.labels[idx]} at record {idx} outside 0..{self.class_count - 1}")

    @property
    def m(self):
        return self.images.shape[0]

    @property
    def side(self):
        return self.images.shape[2]

    def classes(self):
        return np.unique(self.labels)


@dataclass
class DatasetSplit:
    """A train/test pair drawn from the same corpus."""

    train: LabeledVectorSet | LabeledImageSet
    test: LabeledVectorSet | LabeledImageSet

    def __post_init__(self):
        if type(self.train) is not type(self.test):
            raise ValidationError("train and test halves must be the same kind of set")


def load_digits_csv(path, class_count=10):
    """Read a 65-column headerless CSV into a LabeledVectorSet.

    Column 64 is the label, cast to integer (truncating). Malformed rows
    raise DataFormatError naming the offending row index.
    """
    rows = []
    labels = []
    with open(path, "r", encoding="ascii") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != CSV_COLUMNS:
                raise DataFormatError(f"{path}: row {i} has {len(parts)} fields, expected {CSV_COLUMNS}")
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise DataFormatError(f"{path}: row {i} holds a non-numeric field: {exc}") from exc
            rows.append(values[:-1])
            labels.append(int(values[-1]))
    if not rows:
        raise DataFormatError(f"{path}: no instances")
    try:
        return LabeledVectorSet(np.array(rows), np.array(labels), class_count=class_count)
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def save_digits_csv(vset, path):
    """Write a vector set back to the 65-column CSV layout."""
    if vset.n_features != CSV_COLUMNS - 1:
        raise ValidationError(f"expected {CSV_COLUMNS - 1} features, got {vset.n_features}")
    with open(path, "w", encoding="ascii") as fh:
        for x, y in zip(vset.features, vset.labels):
            fields = [_csv_number(v) for v in x] + [str(int(y))]
            fh.write(",".join(fields) + "\n")


def _csv_number(v):
    f = float(v)
    if f.is_integer():
        return str(int(f))
    return repr(f)


def load_cifar_binary(path, class_count=10):
    """Read fixed-width binary image records into a LabeledImageSet.

    Raises DataFormatError with the byte offset when the file size is not
    a whole number of 3073-byte records.
    """
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        raise DataFormatError(f"{path}: no records")
    if raw.size % IMAGE_RECORD_BYTES != 0:
        offset = (raw.size // IMAGE_RECORD_BYTES) * IMAGE_RECORD_BYTES
        raise DataFormatError(
            f"{path}: {raw.size} bytes is not a whole number of {IMAGE_RECORD_BYTES}-byte "
            f"records (trailing fragment starts at byte {offset})")
    records = raw.reshape(-1, IMAGE_RECORD_BYTES)
    labels = records[:, 0].astype(np.int64)
    planes = records[:, 1:].reshape(-1, 3, IMAGE_SIDE, IMAGE_SIDE)
    try:
        return LabeledImageSet(planes.astype(np.float32), labels, class_count=class_count)
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def save_cifar_binary(iset, path):
    """Write an image set to the binary record layout.

    Only raw-valued sets round-trip: pixel values must be integers in
    [0, 255] and the side length must be 32.
    """
    if iset.side != IMAGE_SIDE:
        raise ValidationError(f"binary records are {IMAGE_SIDE}x{IMAGE_SIDE}, set is {iset.side}x{iset.side}")
    px = iset.images
    if ((px < 0) | (px > 255)).any() or not np.array_equal(px, np.round(px)):
        raise ValidationError("pixel values must be integers in [0, 255] to serialize")
    if ((iset.labels < 0) | (iset.labels > 255)).any():
        raise ValidationError("labels must fit one byte")
    records = np.empty((iset.m, IMAGE_RECORD_BYTES), dtype=np.uint8)
    records[:, 0] = iset.labels.astype(np.uint8)
    records[:, 1:] = px.astype(np.uint8).reshape(iset.m, 3 * IMAGE_PLANE)
    records.tofile(path)


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def subsample_stratified(dset, fraction, seed):
    """Class-stratified subsample preserving the original instance order.

    Per-class counts are fraction*count rounded half-up; the total is then
    trimmed or padded using the largest class so it equals fraction*m
    rounded half-up. fraction=1.0 returns an identical set.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    labels = dset.labels
    m = labels.shape[0]
    target_total = _round_half_up(fraction * m)
    rng = np.random.Generator(np.random.PCG64(seed))
    classes = [int(c) for c in np.unique(labels)]
    shuffled = {}
    counts = {}
    sizes = {}
    for c in classes:
        idx = np.flatnonzero(labels == c)
        shuffled[c] = idx[rng.permutation(idx.size)]
        counts[c] = _round_half_up(fraction * idx.size)
        sizes[c] = idx.size
    # reconcile the per-class roundings against the overall target using
    # the largest class (lowest label wins a size tie)
    largest = max(classes, key=lambda c: (sizes[c], -c))
    total = sum(counts.values())
    while total > target_total and counts[largest] > 0:
        counts[largest] -= 1
        total -= 1
    while total < target_total and counts[largest] < sizes[largest]:
        counts[largest] += 1
        total += 1
    chosen = np.sort(np.concatenate([shuffled[c][:counts[c]] for c in classes]))
    return _take(dset, chosen)


def stratified_split(dset, test_fraction, seed):
    """Split a set into disjoint train/test halves, stratified by class."""
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    test = subsample_stratified(dset, test_fraction, seed)
    test_idx = _match_indices(dset, test)
    mask = np.ones(dset.labels.shape[0], dtype=bool)
    mask[test_idx] = False
    train = _take(dset, np.flatnonzero(mask))
    return DatasetSplit(train=train, test=test)


def _match_indices(dset, subset):
    # recover the subset's row positions; subsample preserves order, so a
    # single forward sweep suffices
    if isinstance(dset, LabeledVectorSet):
        full, part = dset.features, subset.features
    else:
        full, part = dset.images, subset.images
    out = np.empty(part.shape[0], dtype=np.int64)
    j = 0
    for i in range(full.shape[0]):
        if j < part.shape[0] and dset.labels[i] == subset.labels[j] and np.array_equal(full[i], part[j]):
            out[j] = i
            j += 1
    if j != part.shape[0]:
        raise ValidationError("subset rows not found in source set")
    return out


def _take(dset, idx):
    if isinstance(dset, LabeledVectorSet):
        return LabeledVectorSet(dset.features[idx], dset.labels[idx], class_count=dset.class_count)
    return LabeledImageSet(dset.images[idx], dset.labels[idx], class_count=dset.class_count)


def center_crop(iset, side):
    """Crop every image to the central side x side window."""
    if side <= 0 or side > iset.side:
        raise ValidationError(f"cannot crop {iset.side}x{iset.side} images to {side}")
    lo = (iset.side - side) // 2
    out = iset.images[:, :, lo:lo + side, lo:lo + side]
    return LabeledImageSet(np.ascontiguousarray(out), iset.labels, class_count=iset.class_count)


@dataclass
class DatasetManifest:
    """Description of an on-disk corpus: format, file paths, class count."""

    format: str  # "digits_csv" | "image_binary"
    train_paths: list = field(default_factory=list)
    test_paths: list = field(default_factory=list)
    class_count: int = 10
    center_crop: int | None = None

    FORMATS = ("digits_csv", "image_binary")

    def __post_init__(self):
        if self.format not in self.FORMATS:
            raise ValidationError(f"unknown dataset format {self.format!r}")
        if not self.train_paths or not self.test_paths:
            raise ValidationError("manifest needs at least one train path and one test path")


def load_manifest(path):
    """Parse a JSON manifest; relative data paths resolve beside the file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    resolve = lambda p: p if os.path.isabs(p) else os.path.join(base, p)
    try:
        train = doc["train"] if isinstance(doc["train"], list) else [doc["train"]]
        test = doc["test"] if isinstance(doc["test"], list) else [doc["test"]]
        return DatasetManifest(
            format=doc["format"],
            train_paths=[resolve(p) for p in train],
            test_paths=[resolve(p) for p in test],
            class_count=int(doc.get("classes", 10)),
            center_crop=doc.get("center_crop"),
        )
    except KeyError as exc:
        raise DataFormatError(f"{path}: manifest is missing key {exc}") from exc


def load_split(manifest):
    """Materialize a DatasetSplit from a manifest."""
    if manifest.format == "digits_csv":
        loader = lambda p: load_digits_csv(p, class_count=manifest.class_count)
        join = _concat_vec
    else:
        loader = lambda p: load_cifar_binary(p, class_count=manifest.class_count)
        join = _concat_img
    train = join([loader(p) for p in manifest.train_paths])
    test = join([loader(p) for p in manifest.test_paths])
    if manifest.center_crop is not None:
        train = center_crop(train, manifest.center_crop)
        test = center_crop(test, manifest.center_crop)
    return DatasetSplit(train=train, test=test)


def _concat_vec(sets):
    if len(sets) == 1:
        return sets[0]
    return LabeledVectorSet(
        np.concatenate([s.features for s in sets]),
        np.concatenate([s.labels for s in sets]),
        class_count=sets[0].class_count)


def _concat_img(sets):
    if len(sets) == 1:
        return sets[0]
    return LabeledImageSet(
        np.concatenate([s.images for s in sets]),
        np.concatenate([s.labels for s in sets]),
        class_count=sets[0].class_count)
