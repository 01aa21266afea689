"""Run plans: a JSON description of one verification suite.

A plan names the subject target, the dataset manifest, the mutants and
relations to evaluate, and the thresholds. Relative paths inside a
plan file resolve against the file's own directory so plans can ship
next to their data.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from ..cnn.model import ArchDescriptor
from ..cnn.train import TrainConfig
from ..errors import ConfigError
from ..faults import TARGETS, CnnSubjectConfig, SvmSubjectConfig, get_mutant, list_mutants
from ..metamorphic.cnn_mrs import CALIBRATION_SEEDS, SIGMA_FACTOR, TEST_DEVIATION_THRESHOLD, TEST_SCALES
from ..metamorphic.svm_mrs import DEFAULT_SHIFT, DEFAULT_TOLERANCE
from ..metamorphic.verdicts import CNN_MRS, MrId


@dataclass(frozen=True)
class RunPlan:
    """Everything one suite run depends on, thresholds included."""

    target: str
    manifest: str
    seed: int = 0
    subsample_fraction: float = 1.0
    subsample_seed: int = 0
    mutants: tuple | None = None      # None = full catalog; () = baseline only
    mrs: tuple = ()                   # () = every applicable relation
    tolerance: float = DEFAULT_TOLERANCE
    shift_k: float = DEFAULT_SHIFT
    sigma_threshold: float | None = None   # None = calibrate from clean runs
    sigma_factor: float = SIGMA_FACTOR
    calibration_seeds: tuple = CALIBRATION_SEEDS
    test_threshold: float = TEST_DEVIATION_THRESHOLD
    test_scales: tuple = TEST_SCALES
    svm_C: float = 1.0
    svm_kkt_tolerance: float = 1e-8
    arch: ArchDescriptor = field(default_factory=ArchDescriptor)
    train: TrainConfig = field(default_factory=TrainConfig)
    cache_dir: str | None = None

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; expected one of {TARGETS}")
        if not 0 < self.subsample_fraction <= 1:
            raise ConfigError(f"subsample fraction must be in (0, 1], got {self.subsample_fraction}")
        for mid in self.mutants or ():
            spec = get_mutant(mid)
            if spec.target != self.target:
                raise ConfigError(f"mutant {mid} targets {spec.target}, not {self.target}")
        known = {str(mr) for mr in self.applicable_mrs(everything=True)}
        for mr in self.mrs:
            if str(MrId.parse(mr)) not in known:
                raise ConfigError(f"relation {mr} does not apply to target {self.target}")

    @property
    def family(self):
        return "cnn" if self.target == "cnn" else "svm"

    def applicable_mrs(self, everything=False):
        """MrIds this plan evaluates, in fixed column order."""
        if self.target == "cnn":
            ids = list(CNN_MRS)
        elif self.target == "svm-linear":
            ids = [MrId("svm", 1), MrId("svm", 2), MrId("svm", 4)]
        else:
            ids = [MrId("svm", 1), MrId("svm", 2), MrId("svm", 3)]
        if self.mrs and not everything:
            wanted = {str(MrId.parse(m)) for m in self.mrs}
            ids = [mr for mr in ids if str(mr) in wanted]
        return ids

    def mutant_ids(self):
        if self.mutants is None:
            return [spec.id for spec in list_mutants(self.target)]
        return list(self.mutants)

    def clean_config(self):
        """The unmutated subject configuration this plan verifies."""
        if self.family == "svm":
            return SvmSubjectConfig(kernel_kind=self.target.split("-", 1)[1],
                                    C=self.svm_C, kkt_tolerance=self.svm_kkt_tolerance)
        return CnnSubjectConfig(arch=self.arch, train=self.train)

    def to_dict(self):
        doc = dataclasses.asdict(self)
        doc["arch"] = self.arch.to_dict()
        doc["train"] = self.train.to_dict()
        for name in ("mutants", "mrs", "calibration_seeds", "test_scales"):
            if doc[name] is not None:
                doc[name] = list(doc[name])
        return doc

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown plan fields: {sorted(unknown)}")
        if "arch" in doc:
            doc["arch"] = ArchDescriptor.from_dict(doc["arch"])
        if "train" in doc:
            doc["train"] = TrainConfig.from_dict(doc["train"])
        for name in ("mutants", "mrs", "calibration_seeds", "test_scales"):
            if doc.get(name) is not None:
                doc[name] = tuple(doc[name])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(f"bad plan document: {exc}") from None


def save_plan(plan, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(plan.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def load_plan(path):
    """Read a plan; relative manifest/cache paths resolve beside the file."""
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    plan = RunPlan.from_dict(doc)
    base = os.path.dirname(os.path.abspath(path))
    updates = {}
    if not os.path.isabs(plan.manifest):
        updates["manifest"] = os.path.join(base, plan.manifest)
    if plan.cache_dir is not None and not os.path.isabs(plan.cache_dir):
        updates["cache_dir"] = os.path.join(base, plan.cache_dir)
    return dataclasses.replace(plan, **updates) if updates else plan
