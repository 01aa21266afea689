"""Input transforms that drive the metamorphic relations.

Every transform builds a new set; labels are never altered (reordering
moves them with their rows). ``TransformSpec`` is the serializable
description used in run plans and cache keys; each structural transform
has an exact inverse, while per-instance standardization is many-to-one
and reports itself as non-invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cnn.ops import normalize_batch
from ..dataset import LabeledImageSet, LabeledVectorSet
from ..errors import TransformError

CHANNEL_ORDERS = {
    "RGB": (0, 1, 2),
    "RBG": (0, 2, 1),
    "GRB": (1, 0, 2),
    "GBR": (1, 2, 0),
    "BRG": (2, 0, 1),
    "BGR": (2, 1, 0),
}

DIHEDRAL_VARIANTS = (
    "identity", "transpose",
    "rot90", "rot90_transpose",
    "rot180", "rot180_transpose",
    "rot270", "rot270_transpose",
)

# each rotation-then-transpose composite is a reflection, hence self-inverse
DIHEDRAL_INVERSE = {
    "identity": "identity", "transpose": "transpose",
    "rot90": "rot270", "rot270": "rot90", "rot180": "rot180",
    "rot90_transpose": "rot90_transpose",
    "rot180_transpose": "rot180_transpose",
    "rot270_transpose": "rot270_transpose",
}


def dihedral_apply(a, variant):
    """Apply one of the 8 square-grid symmetries to the last two axes."""
    if variant not in DIHEDRAL_VARIANTS:
        raise TransformError(f"unknown dihedral variant {variant!r}")
    if a.shape[-1] != a.shape[-2]:
        raise TransformError(f"dihedral transforms need square grids, got {a.shape[-2]}x{a.shape[-1]}")
    out = a
    if variant.startswith("rot90"):
        out = np.rot90(out, 1, axes=(-2, -1))
    elif variant.startswith("rot180"):
        out = np.rot90(out, 2, axes=(-2, -1))
    elif variant.startswith("rot270"):
        out = np.rot90(out, 3, axes=(-2, -1))
    if variant.endswith("transpose"):
        out = np.swapaxes(out, -2, -1)
    return np.ascontiguousarray(out)


def _check_perm(perm, size, what):
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (size,) or not np.array_equal(np.sort(perm), np.arange(size)):
        raise TransformError(f"{what} must be a permutation of 0..{size - 1}")
    return perm


def permute_features(vset, perm):
    """Reorder feature columns: result column j is source column perm[j]."""
    perm = _check_perm(perm, vset.n_features, "feature permutation")
    return LabeledVectorSet(vset.features[:, perm], vset.labels, class_count=vset.class_count)


def shuffle_instances(dset, perm):
    """Reorder rows (labels travel with their rows)."""
    perm = _check_perm(perm, dset.labels.shape[0], "row permutation")
    if isinstance(dset, LabeledVectorSet):
        return LabeledVectorSet(dset.features[perm], dset.labels[perm], class_count=dset.class_count)
    return LabeledImageSet(dset.images[perm], dset.labels[perm], class_count=dset.class_count)


def shift_features(vset, k):
    """Add the constant k to every feature value."""
    return LabeledVectorSet(vset.features + float(k), vset.labels, class_count=vset.class_count)


def scale_instance(x, k):
    """Multiply one instance by a positive constant."""
    if not k > 0:
        raise TransformError(f"scale factor must be positive, got {k}")
    x = np.asarray(x)
    return x * np.asarray(k, dtype=x.dtype)


def scale_instances(dset, k):
    """Scale every instance of a set by a positive constant."""
    if not k > 0:
        raise TransformError(f"scale factor must be positive, got {k}")
    if isinstance(dset, LabeledVectorSet):
        return LabeledVectorSet(dset.features * float(k), dset.labels, class_count=dset.class_count)
    out = dset.images * np.asarray(k, dtype=dset.images.dtype)
    return LabeledImageSet(out, dset.labels, class_count=dset.class_count)


def permute_channels(iset, order):
    """Reorder the color planes: result plane j is source plane order[j]."""
    if isinstance(order, str):
        try:
            order = CHANNEL_ORDERS[order]
        except KeyError:
            raise TransformError(f"unknown channel order {order!r}") from None
    order = _check_perm(order, 3, "channel order")
    return LabeledImageSet(iset.images[:, order], iset.labels, class_count=iset.class_count)


def dihedral_transform(iset, variant):
    """Apply one square-grid symmetry to every image."""
    return LabeledImageSet(dihedral_apply(iset.images, variant), iset.labels,
                           class_count=iset.class_count)


def normalize_instances(iset):
    """Standardize every instance (the identity-inducing test transform)."""
    return LabeledImageSet(normalize_batch(iset.images), iset.labels,
                           class_count=iset.class_count)


def default_feature_permutation(n):
    """A fixed full-support permutation: cyclic shift by one."""
    return np.roll(np.arange(n), -1)


def default_row_rotation(m):
    """A fixed row reordering that moves every row: rotate by one."""
    if m < 2:
        raise TransformError("need at least 2 rows to move every row")
    return np.roll(np.arange(m), -1)


KINDS = ("feature_permutation", "instance_shuffle", "feature_shift",
         "instance_scale", "channel_order", "dihedral", "normalize")


@dataclass(frozen=True)
class TransformSpec:
    """Serializable description of one transform."""

    kind: str
    params: tuple = ()  # flat (key, value) pairs so the spec stays hashable

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TransformError(f"unknown transform kind {self.kind!r}")

    @classmethod
    def make(cls, kind, **params):
        return cls(kind=kind, params=tuple(sorted(params.items())))

    def param(self, key):
        for k, v in self.params:
            if k == key:
                return v
        raise TransformError(f"transform {self.kind} lacks parameter {key!r}")

    def apply(self, dset):
        if self.kind == "feature_permutation":
            return permute_features(dset, np.asarray(self.param("perm")))
        if self.kind == "instance_shuffle":
            return shuffle_instances(dset, np.asarray(self.param("perm")))
        if self.kind == "feature_shift":
            return shift_features(dset, self.param("k"))
        if self.kind == "instance_scale":
            return scale_instances(dset, self.param("k"))
        if self.kind == "channel_order":
            return permute_channels(dset, self.param("order"))
        if self.kind == "dihedral":
            return dihedral_transform(dset, self.param("variant"))
        return normalize_instances(dset)

    def inverse(self):
        """The spec undoing this one; standardization has none."""
        if self.kind == "feature_permutation" or self.kind == "instance_shuffle":
            perm = np.asarray(self.param("perm"))
            return TransformSpec.make(self.kind, perm=tuple(int(i) for i in np.argsort(perm)))
        if self.kind == "feature_shift":
            return TransformSpec.make(self.kind, k=-self.param("k"))
        if self.kind == "instance_scale":
            return TransformSpec.make(self.kind, k=1.0 / self.param("k"))
        if self.kind == "channel_order":
            order = self.param("order")
            if isinstance(order, str):
                order = CHANNEL_ORDERS[order]
            inv = tuple(int(i) for i in np.argsort(np.asarray(order)))
            return TransformSpec.make(self.kind, order=inv)
        if self.kind == "dihedral":
            return TransformSpec.make(self.kind, variant=DIHEDRAL_INVERSE[self.param("variant")])
        raise TransformError("per-instance standardization is many-to-one; no inverse exists")

    def cache_token(self):
        """Stable string for cache keys and file names."""
        parts = [self.kind]
        for k, v in self.params:
            if isinstance(v, (tuple, list, np.ndarray)):
                v = ",".join(str(x) for x in v)
            parts.append(f"{k}={v}")
        return "__".join(parts)
