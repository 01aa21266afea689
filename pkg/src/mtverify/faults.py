"""Fault-injection catalog: named single-site deviations from the clean pipeline.

Each mutant rewrites exactly one field of a subject configuration. The
catalog is data, not code: the behaviors themselves live behind the
keyword hooks of the training loop, the architecture descriptor, and
the label-column parameter of the vector-subject loader. Applying a
mutant therefore cannot introduce a second accidental deviation.

Mutant ids follow a fixed scheme: ``l<n>``/``r<n>`` are vector-subject
mutants for the linear and rbf kernels, where ``n`` is the feature
column misread as the label; ``c<n>``/``r<n>`` on the image subject
are arbitrary stable names for the cataloged training faults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .cnn.model import ArchDescriptor
from .cnn.train import TrainConfig
from .errors import ValidationError

TARGETS = ("svm-linear", "svm-rbf", "cnn")
LABEL_COLUMN = 64  # the label lives after the 64 feature columns

CRASH_MUTANT_ID = "c0"
CRASH_STEP = 5


@dataclass(frozen=True)
class SvmSubjectConfig:
    """How to build one vector-classifier subject."""

    kernel_kind: str = "linear"
    label_column: int = LABEL_COLUMN
    C: float = 1.0
    kkt_tolerance: float = 1e-8
    max_iterations: int = 5_000_000
    mutant_id: str | None = None

    def __post_init__(self):
        if self.kernel_kind not in ("linear", "rbf"):
            raise ValidationError(f"unknown kernel kind {self.kernel_kind!r}")

    @property
    def family(self):
        return "svm"

    @property
    def target(self):
        return f"svm-{self.kernel_kind}"

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


@dataclass(frozen=True)
class CnnSubjectConfig:
    """How to build and train one image-classifier subject.

    The fault fields default to the clean pipeline; ``apply_mutant``
    rewrites exactly one of them.
    """

    arch: ArchDescriptor
    train: TrainConfig
    loss_variant: str = "standard"
    lr_variant: str = "standard"
    shard_keep: tuple | None = None      # None = train on everything
    swap_train_test: bool = False
    eval_batch_stats: bool = False
    skip_removed: bool = False
    skip_pad_front_only: bool = False
    border_fill: float | None = None
    halve_blocks: bool = False
    crash_at_step: int | None = None
    mutant_id: str | None = None

    @property
    def family(self):
        return "cnn"

    @property
    def target(self):
        return "cnn"

    def effective_arch(self):
        """The architecture actually built, after fault rewrites."""
        changes = {}
        if self.skip_removed:
            changes["use_skip"] = False
        if self.skip_pad_front_only:
            changes["skip_pad_front_only"] = True
        if self.border_fill is not None:
            changes["border_fill"] = self.border_fill
        if self.halve_blocks:
            changes["blocks"] = tuple(max(1, b // 2) for b in self.arch.blocks)
        return dataclasses.replace(self.arch, **changes) if changes else self.arch

    def to_dict(self):
        doc = dataclasses.asdict(self)
        doc["arch"] = self.arch.to_dict()
        doc["train"] = self.train.to_dict()
        if self.shard_keep is not None:
            doc["shard_keep"] = list(self.shard_keep)
        return doc

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc["arch"] = ArchDescriptor.from_dict(doc["arch"])
        doc["train"] = TrainConfig.from_dict(doc["train"])
        if doc.get("shard_keep") is not None:
            doc["shard_keep"] = tuple(doc["shard_keep"])
        return cls(**doc)


@dataclass(frozen=True)
class MutantSpec:
    """One cataloged fault: the config field it rewrites and the bad value."""

    id: str
    target: str       # which subject kind the fault lives in
    category: str
    description: str
    field: str
    value: object

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValidationError(f"unknown target {self.target!r}")

    def to_dict(self):
        value = list(self.value) if isinstance(self.value, tuple) else self.value
        return {"id": self.id, "target": self.target, "category": self.category,
                "description": self.description, "field": self.field, "value": value}


def _svm_label_mutants():
    specs = []
    for kernel, prefix in (("linear", "l"), ("rbf", "r")):
        for column in (2, 5, 10, 11, 26, 34):
            specs.append(MutantSpec(
                id=f"{prefix}{column}", target=f"svm-{kernel}", category="label-source",
                description=f"reads labels from feature column {column} instead of the label column",
                field="label_column", value=column))
    return specs


_CNN_MUTANTS = (
    MutantSpec("c29", "cnn", "loss",
               "applies the weight-decay gradient with its sign flipped, growing weights",
               "loss_variant", "decay_sign_flipped"),
    MutantSpec("c30", "cnn", "loss",
               "adds the decay penalty to the reported loss but omits it from gradients",
               "loss_variant", "decay_not_optimized"),
    MutantSpec("c31", "cnn", "loss",
               "sums per-instance losses instead of averaging, scaling gradients by batch size",
               "loss_variant", "sum_reduction"),
    MutantSpec("c32", "cnn", "loss",
               "computes cross-entropy with base-10 logarithms",
               "loss_variant", "log10"),
    MutantSpec("c43", "cnn", "data-sharding",
               "trains on only the first of five contiguous data shards",
               "shard_keep", (0,)),
    MutantSpec("c44", "cnn", "data-sharding",
               "trains on only the first two of five contiguous data shards",
               "shard_keep", (0, 1)),
    MutantSpec("c45", "cnn", "data-sharding",
               "trains on only the first four of five contiguous data shards",
               "shard_keep", (0, 1, 2, 3)),
    MutantSpec("c9", "cnn", "lr-schedule",
               "never decays the learning rate",
               "lr_variant", "no_decay"),
    MutantSpec("c116", "cnn", "lr-schedule",
               "applies the milestone decay factor every epoch",
               "lr_variant", "decay_every_epoch"),
    MutantSpec("c221", "cnn", "lr-schedule",
               "multiplies the learning rate at each milestone instead of dividing",
               "lr_variant", "growth_at_milestones"),
    MutantSpec("c49", "cnn", "interchange",
               "trains on the test split and evaluates on the training split",
               "swap_train_test", True),
    MutantSpec("r49", "cnn", "interchange",
               "evaluates with per-batch statistics instead of tracked running statistics",
               "eval_batch_stats", True),
    MutantSpec("r6", "cnn", "architecture",
               "removes the identity shortcut from every residual block",
               "skip_removed", True),
    MutantSpec("r67", "cnn", "architecture",
               "builds half as many residual blocks per stage",
               "halve_blocks", True),
    MutantSpec("c50", "cnn", "input-padding",
               "overwrites a two-pixel border ring with a constant fill before standardization",
               "border_fill", 127.5),
    MutantSpec("r48", "cnn", "input-padding",
               "pads shortcut channels at the front only instead of splitting evenly",
               "skip_pad_front_only", True),
    MutantSpec(CRASH_MUTANT_ID, "cnn", "control",
               "raises a runtime error after a fixed number of optimizer steps",
               "crash_at_step", CRASH_STEP),
)

CATALOG = tuple(_svm_label_mutants()) + _CNN_MUTANTS
_BY_ID = {spec.id: spec for spec in CATALOG}
assert len(_BY_ID) == len(CATALOG), "mutant ids must be unique"


def get_mutant(mutant_id):
    try:
        return _BY_ID[mutant_id]
    except KeyError:
        raise ValidationError(f"unknown mutant id {mutant_id!r}") from None


def list_mutants(target=None):
    """Catalog order, optionally restricted to one subject target."""
    if target is not None and target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}")
    return [s for s in CATALOG if target is None or s.target == target]


def apply_mutant(config, mutant_id):
    """Return a copy of ``config`` with the mutant's single field rewritten."""
    spec = get_mutant(mutant_id)
    if config.mutant_id is not None:
        raise ValidationError(
            f"config already carries mutant {config.mutant_id}; faults do not stack")
    if spec.target != config.target:
        raise ValidationError(
            f"mutant {spec.id} targets {spec.target}, not {config.target}")
    return dataclasses.replace(config, **{spec.field: spec.value}, mutant_id=spec.id)


def catalog_json(target=None, indent=2):
    return json.dumps([s.to_dict() for s in list_mutants(target)], indent=indent)
