"""Seeded SGD training and evaluation for the convnet.

A fixed seed pins everything: weight initialization, per-epoch batch
shuffles, and therefore the whole trajectory and loss trace, bitwise,
for a given kernel backend. Reductions run in a fixed order; nothing in
the loop is parallel.

The training loop carries explicit deviation hooks (loss variant,
learning-rate schedule variant, shard selection, train/test interchange,
a crash step) so single-fault mutants flip exactly one of them. Hook
owners record the site they activated on the returned run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingDivergedError, ValidationError
from . import ops
from .model import build_model

DIVERGENCE_LIMIT = 1e4
SHARD_COUNT = 5

LR_VARIANTS = ("standard", "no_decay", "decay_every_epoch", "growth_at_milestones")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 50
    learning_rate: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 2e-4
    eval_every: int = 20          # steps between test-set trace points
    milestones: tuple = (5, 8)    # epochs at which the rate decays
    decay_factor: float = 0.1

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.eval_every < 1:
            raise ValidationError("epochs, batch_size and eval_every must be positive")
        if not 0.0 < self.decay_factor < 1.0:
            raise ValidationError("decay_factor must lie in (0, 1)")

    def to_dict(self):
        return {
            "epochs": self.epochs, "batch_size": self.batch_size,
            "learning_rate": self.learning_rate, "momentum": self.momentum,
            "weight_decay": self.weight_decay, "eval_every": self.eval_every,
            "milestones": list(self.milestones), "decay_factor": self.decay_factor,
        }

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc["milestones"] = tuple(doc["milestones"])
        return cls(**doc)


@dataclass
class TrainRun:
    """Outcome of one training: config, seed, and the loss trace."""

    config: TrainConfig
    seed: int
    trace: list = field(default_factory=list)  # (step, test_loss, test_accuracy)
    diverged: bool = False
    fault_sites: list = field(default_factory=list)

    def trace_rows(self):
        return [(int(s), float(l), float(a)) for s, l, a in self.trace]


@dataclass
class EvalResult:
    mean_loss: float
    accuracy: float
    per_instance_loss: np.ndarray  # float64, one natural-log cross-entropy each
    predicted: np.ndarray          # int64 class per instance

    def __post_init__(self):
        # the reported mean is the exact mean of the per-instance values
        assert self.mean_loss == float(np.mean(self.per_instance_loss))


def evaluate(model, test, batch_stats=False):
    """Mean cross-entropy and accuracy of a trained model on a test set.

    ``batch_stats=True`` evaluates with training-mode batch-norm
    statistics over the whole test set instead of the running averages
    (a deliberately injectable train/eval interchange).
    """
    logits = model.forward(test.images, train=bool(batch_stats))
    per_loss = ops.cross_entropy_per_instance(logits, test.labels)
    predicted = np.argmax(logits, axis=1).astype(np.int64)
    accuracy = float(np.mean(predicted == test.labels))
    return EvalResult(
        mean_loss=float(np.mean(per_loss)),
        accuracy=accuracy,
        per_instance_loss=per_loss,
        predicted=predicted,
    )


def _learning_rate(cfg, epoch, variant):
    if variant == "no_decay":
        return cfg.learning_rate
    if variant == "decay_every_epoch":
        return cfg.learning_rate * cfg.decay_factor ** epoch
    passed = sum(1 for m in cfg.milestones if epoch >= m)
    if variant == "growth_at_milestones":
        return cfg.learning_rate * (1.0 / cfg.decay_factor) ** passed
    return cfg.learning_rate * cfg.decay_factor ** passed


def shard_indices(m, keep):
    """Row indices of the kept contiguous shards (of SHARD_COUNT total)."""
    bad = [s for s in keep if not 0 <= s < SHARD_COUNT]
    if bad or not keep:
        raise ValidationError(f"shards must be a non-empty subset of 0..{SHARD_COUNT - 1}, got {keep}")
    pieces = np.array_split(np.arange(m), SHARD_COUNT)
    return np.concatenate([pieces[s] for s in sorted(set(keep))])


def train(arch, split, config, seed, *, dtype=np.float32,
          loss_variant="standard", lr_variant="standard", shard_keep=None,
          swap_train_test=False, eval_batch_stats=False, crash_at_step=None):
    """Train a fresh model; returns (model, TrainRun).

    Divergence (non-finite or huge batch loss) raises
    TrainingDivergedError carrying the partial run. The keyword hooks
    are fault-injection sites; the default values reproduce the clean
    pipeline bitwise.
    """
    if lr_variant not in LR_VARIANTS:
        raise ValidationError(f"unknown lr variant {lr_variant!r}")
    run = TrainRun(config=config, seed=seed)
    train_set, test_set = split.train, split.test
    if swap_train_test:
        run.fault_sites.append("data.swap_train_test")
        train_set, test_set = test_set, train_set
    if shard_keep is not None:
        run.fault_sites.append("data.shard_selection")
        idx = shard_indices(train_set.m, shard_keep)
        train_set = type(train_set)(train_set.images[idx], train_set.labels[idx],
                                    class_count=train_set.class_count)
    if loss_variant != "standard":
        run.fault_sites.append("loss." + loss_variant)
    if lr_variant != "standard":
        run.fault_sites.append("schedule." + lr_variant)
    if arch.border_fill is not None:
        run.fault_sites.append("input.border_fill")
    if not arch.use_skip:
        run.fault_sites.append("arch.skip_removed")
    if arch.skip_pad_front_only:
        run.fault_sites.append("arch.skip_pad_alignment")
    if eval_batch_stats:
        run.fault_sites.append("eval.batch_statistics")

    rng = np.random.Generator(np.random.PCG64(seed))
    model = build_model(arch, seed, dtype=dtype)
    params = model.parameters()
    velocity = {name: np.zeros_like(getattr(owner, attr)) for name, owner, attr in params}

    X = train_set.images
    y = train_set.labels
    step = 0
    lr_dtype = np.dtype(dtype).type

    def record_eval():
        res = evaluate(model, test_set, batch_stats=eval_batch_stats)
        run.trace.append((step, res.mean_loss, res.accuracy))

    for epoch in range(config.epochs):
        lr = lr_dtype(_learning_rate(config, epoch, lr_variant))
        order = rng.permutation(X.shape[0])
        for start in range(0, X.shape[0], config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads = model.loss_and_grad(
                X[batch], y[batch], weight_decay=config.weight_decay,
                loss_variant=loss_variant)
            if not np.isfinite(loss) or abs(loss) > DIVERGENCE_LIMIT:
                run.diverged = True
                raise TrainingDivergedError(
                    f"batch loss {loss} at step {step} left the stable regime", run=run)
            for name, owner, attr in params:
                v = velocity[name]
                v *= config.momentum
                v += grads[name]
                setattr(owner, attr, getattr(owner, attr) - lr * v)
            step += 1
            if crash_at_step is not None and step >= crash_at_step:
                run.fault_sites.append("loop.crash")
                raise RuntimeError(f"injected crash at step {step}")
            if step % config.eval_every == 0:
                record_eval()
    if not run.trace or run.trace[-1][0] != step:
        record_eval()
    return model, run
