"""Shared fixtures: corpora on disk, synthetic image sets, tiny configs."""

from __future__ import annotations

import json
import os

import numpy as np
import pytest
from sklearn.datasets import load_digits

from mtverify.cnn.model import ArchDescriptor
from mtverify.cnn.train import TrainConfig
from mtverify.dataset import (
    DatasetSplit,
    LabeledImageSet,
    LabeledVectorSet,
    center_crop,
    save_digits_csv,
    stratified_split,
    subsample_stratified,
)


@pytest.fixture(scope="session")
def digits_vset():
    """The 1797-instance 8x8 digit corpus as a vector set."""
    raw = load_digits()
    return LabeledVectorSet(raw.data.astype(np.float64),
                            raw.target.astype(np.int64), class_count=10)


@pytest.fixture(scope="session")
def digits_split(digits_vset):
    """Stratified 500-train / 150-test digits subset used by the SVM suites."""
    split = stratified_split(digits_vset, 150 / digits_vset.m, seed=5)
    train = subsample_stratified(split.train, 500 / split.train.m, seed=9)
    return DatasetSplit(train=train, test=split.test)


@pytest.fixture(scope="session")
def digits_manifest(digits_split, tmp_path_factory):
    """The digits subset written to CSV files behind a manifest."""
    root = tmp_path_factory.mktemp("digits")
    save_digits_csv(digits_split.train, root / "train.csv")
    save_digits_csv(digits_split.test, root / "test.csv")
    path = root / "manifest.json"
    path.write_text(json.dumps({
        "format": "digits_csv", "train": "train.csv", "test": "test.csv",
        "classes": 10}))
    return str(path)


def synthetic_images(m, seed, classes=10, side=32):
    """Class-separable random RGB images with integer pixels in [0, 255].

    Each class gets a brightened color plane and a bright 3x3 patch at a
    class-specific position inside the central region, so the images stay
    classifiable after center cropping to 12 or 16 pixels.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = (np.arange(m) % classes).astype(np.int64)
    imgs = rng.normal(128.0, 12.0, size=(m, 3, side, side))
    for i in range(m):
        c = int(labels[i])
        imgs[i, c % 3] += 24.0 + 6.0 * (c // 3)
        r = 10 + 3 * (c // 4)
        col = 10 + 3 * (c % 4)
        imgs[i, :, r:r + 3, col:col + 3] += 70.0
    imgs = np.clip(np.rint(imgs), 0, 255).astype(np.float32)
    return LabeledImageSet(imgs, labels, class_count=classes)


@pytest.fixture(scope="session")
def tiny_image_split():
    """A 40-train / 20-test 8x8 image split for fast training tests."""
    return DatasetSplit(train=center_crop(synthetic_images(40, seed=300), 8),
                        test=center_crop(synthetic_images(20, seed=301), 8))


@pytest.fixture(scope="session")
def tiny_arch():
    return ArchDescriptor(side=8, widths=(4, 8), blocks=(1, 1))


@pytest.fixture(scope="session")
def tiny_train_config():
    return TrainConfig(epochs=2, batch_size=10, learning_rate=0.05,
                       eval_every=4, milestones=(1,))


def two_class_blobs(m=30, seed=0, n_features=4, gap=4.0):
    """Two well-separated gaussian clusters labeled 0 and 1."""
    rng = np.random.Generator(np.random.PCG64(seed))
    half = m // 2
    a = rng.normal(0.0, 1.0, size=(half, n_features))
    b = rng.normal(gap, 1.0, size=(m - half, n_features))
    feats = np.vstack([a, b])
    labels = np.array([0] * half + [1] * (m - half), dtype=np.int64)
    order = rng.permutation(m)
    return LabeledVectorSet(feats[order], labels[order], class_count=2)


def small_multiclass(m=48, seed=1, classes=4, n_features=6, gap=5.0):
    """Several separated clusters, one per class, labels 0..classes-1."""
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = rng.normal(0.0, 1.0, size=(classes, n_features)) * gap
    labels = (np.arange(m) % classes).astype(np.int64)
    feats = centers[labels] + rng.normal(0.0, 0.8, size=(m, n_features))
    return LabeledVectorSet(feats, labels, class_count=classes)


def assert_sets_equal(a, b):
    payload_a = a.features if hasattr(a, "features") else a.images
    payload_b = b.features if hasattr(b, "features") else b.images
    assert payload_a.dtype == payload_b.dtype
    assert np.array_equal(payload_a, payload_b)
    assert np.array_equal(a.labels, b.labels)


def write_manifest(path, **fields):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(fields, fh)
    return str(path)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
