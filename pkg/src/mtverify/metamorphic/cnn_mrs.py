"""Metamorphic relations over the convolutional classifier.

Two kinds of relation are checked:

Training relations (cnn-1, cnn-2) retrain the subject once per input
variant with the same seed and compare the resulting test-loss traces.
The statistic is sigma_max: the largest per-step population standard
deviation of test loss across the variants. An equivariant pipeline
keeps the traces nearly identical, so sigma_max stays near the noise
floor; a kill is declared when it exceeds a threshold calibrated from
clean runs. A diverged variant forces sigma_max to infinity.

Test-only relations (cnn-3, cnn-4) take an already trained model and
compare per-instance test losses under input changes that per-instance
standardization must absorb: feeding pre-standardized inputs, and
positive rescaling. A kill is declared when any instance moves by at
least the deviation threshold or changes predicted class.

A training subject exposes ``train(split, seed) -> (handle, run)``
where ``run`` has ``trace_rows()`` and ``diverged``; an evaluation
subject exposes ``evaluate(handle, test) -> result`` with
``per_instance_loss`` and ``predicted``. Any subject exception other
than training divergence yields an inconclusive verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import DatasetSplit
from ..errors import TrainingDivergedError, ValidationError
from .transforms import CHANNEL_ORDERS, DIHEDRAL_VARIANTS, TransformSpec, scale_instances
from .verdicts import MrId, MrVerdict

TEST_DEVIATION_THRESHOLD = 0.1
TEST_SCALES = (0.5, 2.0, 29.0)
SIGMA_FACTOR = 3.0
CALIBRATION_SEEDS = (11, 12, 13)


def training_variants(mr):
    """Labelled transforms retrained under one training relation."""
    if mr.family != "cnn" or mr.index not in (1, 2):
        raise ValidationError(f"{mr} is not a training relation")
    if mr.index == 1:
        return [(name, TransformSpec.make("channel_order", order=name))
                for name in CHANNEL_ORDERS]
    return [(name, TransformSpec.make("dihedral", variant=name))
            for name in DIHEDRAL_VARIANTS]


@dataclass
class SigmaMaxReport:
    """Trace bundle behind one training-relation verdict."""

    mr: MrId
    names: list      # variant labels in run order
    traces: dict     # label -> [(step, test_loss, test_accuracy), ...]
    steps: list      # step grid common to every variant
    sigma: np.ndarray
    sigma_max: float
    diverged: list   # labels whose training left the stable regime


def _sigma_series(names, traces):
    lengths = [len(traces.get(n, ())) for n in names]
    if min(lengths) == 0:
        return [], np.zeros(0)
    prefix = min(lengths)
    steps = [traces[names[0]][i][0] for i in range(prefix)]
    losses = np.array(
        [[traces[n][i][1] for i in range(prefix)] for n in names], dtype=np.float64)
    return steps, losses.std(axis=0)


def run_cnn_training_mr(mr, split, subject, seed, threshold):
    """Retrain per variant and compare traces; returns (verdict, report)."""
    variants = training_variants(mr)
    traces = {}
    diverged = []
    for label, spec in variants:
        follow = DatasetSplit(spec.apply(split.train), spec.apply(split.test))
        try:
            _, run = subject.train(follow, seed)
        except TrainingDivergedError as exc:
            diverged.append(label)
            traces[label] = exc.run.trace_rows() if exc.run is not None else []
            continue
        except Exception as exc:  # noqa: BLE001 - subject code is untrusted
            report = SigmaMaxReport(mr=mr, names=[n for n, _ in variants], traces=traces,
                                    steps=[], sigma=np.zeros(0), sigma_max=float("nan"),
                                    diverged=diverged)
            verdict = MrVerdict(mr=mr, status="inconclusive", evidence=float("nan"),
                                threshold=threshold,
                                detail=f"subject raised {exc!r} on variant {label}")
            return verdict, report
        if run.diverged:
            diverged.append(label)
        traces[label] = run.trace_rows()
    names = [n for n, _ in variants]
    steps, sigma = _sigma_series(names, traces)
    sigma_max = float("inf") if diverged else (float(sigma.max()) if sigma.size else 0.0)
    report = SigmaMaxReport(mr=mr, names=names, traces=traces, steps=steps,
                            sigma=sigma, sigma_max=sigma_max, diverged=diverged)
    per_variant = {
        label: float("inf") if label in diverged else float(traces[label][-1][1])
        for label in names if label in diverged or traces.get(label)}
    detail = (f"{len(diverged)} of {len(names)} variants diverged" if diverged
              else f"test-loss spread over {len(names)} variants, {len(steps)} trace points")
    verdict = MrVerdict(mr=mr, status="killed" if sigma_max > threshold else "pass",
                        evidence=sigma_max, threshold=threshold, detail=detail,
                        variants=per_variant)
    return verdict, report


def calibrate_sigma_threshold(mr, split, subject, seeds=CALIBRATION_SEEDS,
                              factor=SIGMA_FACTOR):
    """Kill threshold from clean-run spread: factor x the worst clean sigma_max.

    The subject passed here must be the unmodified implementation; a
    divergence or crash during calibration is a hard error because the
    threshold would be meaningless.
    """
    worst = 0.0
    for seed in seeds:
        verdict, report = run_cnn_training_mr(mr, split, subject, seed,
                                              threshold=float("inf"))
        if verdict.status == "inconclusive" or not np.isfinite(report.sigma_max):
            raise ValidationError(
                f"reference subject failed during {mr} threshold calibration: {verdict.detail}")
        worst = max(worst, report.sigma_max)
    return factor * worst


def _standardizable(images):
    flat = images.reshape(images.shape[0], -1).astype(np.float64)
    return flat.std(axis=1) > 0


def _compare_eval(base, follow):
    dev = float(np.max(np.abs(base.per_instance_loss - follow.per_instance_loss)))
    flips = int(np.sum(base.predicted != follow.predicted))
    return dev, flips


def run_cnn_test_only_mr(mr, model, test, subject,
                         threshold=TEST_DEVIATION_THRESHOLD, scales=TEST_SCALES):
    """Evaluate cnn-3 or cnn-4 on a trained model; returns an MrVerdict."""
    if mr.family != "cnn" or mr.index not in (3, 4):
        raise ValidationError(f"{mr} is not a test-only relation")
    notes = []
    try:
        if mr.index == 3:
            keep = _standardizable(test.images)
            if not keep.any():
                return MrVerdict(mr=mr, status="inconclusive", evidence=float("nan"),
                                 threshold=threshold,
                                 detail="every test instance is constant; nothing to standardize")
            if not keep.all():
                test = type(test)(test.images[keep], test.labels[keep],
                                  class_count=test.class_count)
                notes.append(f"skipped {int((~keep).sum())} constant instances")
            variants = [("standardized",
                         TransformSpec.make("normalize").apply(test))]
        else:
            variants = [(f"scale_{k:g}", scale_instances(test, k)) for k in scales]
        base = subject.evaluate(model, test)
        per_variant = {}
        worst_dev, total_flips = 0.0, 0
        for label, follow_set in variants:
            follow = subject.evaluate(model, follow_set)
            dev, flips = _compare_eval(base, follow)
            per_variant[label] = dev
            worst_dev = max(worst_dev, dev)
            total_flips += flips
    except Exception as exc:  # noqa: BLE001 - subject code is untrusted
        return MrVerdict(mr=mr, status="inconclusive", evidence=float("nan"),
                         threshold=threshold, detail=f"subject raised {exc!r}")
    killed = worst_dev >= threshold or total_flips > 0
    detail = f"{total_flips} class flips"
    if notes:
        detail += "; " + "; ".join(notes)
    return MrVerdict(mr=mr, status="killed" if killed else "pass", evidence=worst_dev,
                     threshold=threshold, detail=detail, variants=per_variant)
