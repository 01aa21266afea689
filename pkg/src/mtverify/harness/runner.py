"""Suite runner: clean baseline plus one row per mutant, one column per relation.

The clean subject is evaluated first and must pass every relation; a
baseline kill means the relations disagree with the unmodified
implementation, so the run aborts instead of producing a meaningless
matrix. Worker threads (MTVERIFY_WORKERS or the ``workers`` argument)
parallelize mutant rows for the vector subjects; image-subject rows
stay sequential because each one is a series of full trainings that
already saturate the numeric kernels.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

from .. import backend
from ..dataset import DatasetSplit, load_manifest, load_split, subsample_stratified
from ..errors import BaselineKilledError, TrainingDivergedError, ValidationError
from ..faults import apply_mutant
from ..metamorphic.cnn_mrs import (
    calibrate_sigma_threshold,
    run_cnn_test_only_mr,
    run_cnn_training_mr,
)
from ..metamorphic.svm_mrs import run_svm_mr
from ..metamorphic.verdicts import MrVerdict
from .cache import atomic_write_json, digest_dataset, read_json
from .report import emit_loss_curves, emit_report
from .subjects import CnnSubject, SvmSubject

CLEAN_ROW = "clean"


@dataclass
class KillMatrix:
    """Verdict grid: rows are subjects (clean first), columns relations."""

    target: str
    mr_ids: list          # column order, e.g. ["svm-1", "svm-2", "svm-4"]
    rows: list            # row order: "clean" then mutant ids
    verdicts: dict        # row -> {mr id -> MrVerdict}
    meta: dict = field(default_factory=dict)

    def verdict(self, row, mr_id):
        return self.verdicts[row][str(mr_id)]

    def row_killed(self, row):
        return any(v.killed for v in self.verdicts[row].values())

    def mutant_rows(self):
        return [r for r in self.rows if r != CLEAN_ROW]

    def to_dict(self):
        return {
            "target": self.target,
            "mr_ids": list(self.mr_ids),
            "rows": list(self.rows),
            "verdicts": {row: {mr: v.to_dict() for mr, v in cells.items()}
                         for row, cells in self.verdicts.items()},
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            target=doc["target"],
            mr_ids=list(doc["mr_ids"]),
            rows=list(doc["rows"]),
            verdicts={row: {mr: MrVerdict.from_dict(v) for mr, v in cells.items()}
                      for row, cells in doc["verdicts"].items()},
            meta=dict(doc.get("meta", {})),
        )


def save_matrix(matrix, path):
    atomic_write_json(matrix.to_dict(), path)


def load_matrix(path):
    return KillMatrix.from_dict(read_json(path))


@dataclass
class SuiteResult:
    """A finished run: the matrix plus the traces behind training relations."""

    matrix: KillMatrix
    sigma_reports: dict   # (row, mr id) -> SigmaMaxReport
    out_dir: str | None = None


def load_plan_data(plan):
    """The train/test split a plan runs against."""
    split = load_split(load_manifest(plan.manifest))
    if plan.subsample_fraction < 1.0:
        split = DatasetSplit(
            train=subsample_stratified(split.train, plan.subsample_fraction,
                                       plan.subsample_seed),
            test=subsample_stratified(split.test, plan.subsample_fraction,
                                      plan.subsample_seed + 1),
        )
    return split


def _resolve_workers(workers):
    if workers is None:
        workers = int(os.environ.get("MTVERIFY_WORKERS", "1"))
    if workers < 1:
        raise ValidationError(f"worker count must be at least 1, got {workers}")
    return workers


def _svm_row(config, split, mrs, plan):
    subject = SvmSubject(config, cache_dir=plan.cache_dir)
    try:
        base = subject.fit_predict(split.train, split.test)
    except Exception as exc:  # noqa: BLE001 - subject code is untrusted
        detail = f"subject raised {exc!r} while training on the base split"
        return {str(mr): MrVerdict(mr=mr, status="inconclusive", evidence=float("nan"),
                                   threshold=plan.tolerance, detail=detail)
                for mr in mrs}
    return {str(mr): run_svm_mr(mr, split, subject, base=base,
                                tolerance=plan.tolerance, shift_k=plan.shift_k)
            for mr in mrs}


def _cnn_row(config, split, mrs, plan, thresholds):
    subject = CnnSubject(config, cache_dir=plan.cache_dir)
    cells = {}
    reports = {}
    base_model = None
    base_failure = None
    if any(mr.index in (3, 4) for mr in mrs):
        try:
            base_model, _ = subject.train(split, plan.seed)
        except TrainingDivergedError:
            base_failure = "training diverged; no stable model to probe"
        except Exception as exc:  # noqa: BLE001 - subject code is untrusted
            base_failure = f"subject raised {exc!r} while training on the base split"
    for mr in mrs:
        if mr.index in (1, 2):
            verdict, report = run_cnn_training_mr(mr, split, subject, plan.seed,
                                                  thresholds[str(mr)])
            reports[str(mr)] = report
        elif base_model is None:
            verdict = MrVerdict(mr=mr, status="inconclusive", evidence=float("nan"),
                                threshold=plan.test_threshold, detail=base_failure)
        else:
            verdict = run_cnn_test_only_mr(mr, base_model, split.test, subject,
                                           threshold=plan.test_threshold,
                                           scales=plan.test_scales)
        cells[str(mr)] = verdict
    return cells, reports


def run_suite(plan, out_dir=None, workers=None):
    """Execute a plan; returns a SuiteResult and optionally writes reports.

    Raises BaselineKilledError (carrying the partial matrix) when the
    clean subject fails any relation.
    """
    started = time.monotonic()
    workers = _resolve_workers(workers)
    split = load_plan_data(plan)
    mrs = plan.applicable_mrs()
    mutants = plan.mutant_ids()
    clean_config = plan.clean_config()
    sigma_reports = {}
    meta = {
        "target": plan.target,
        "seed": plan.seed,
        "backend": backend.active_backend(),
        "train_digest": digest_dataset(split.train),
        "test_digest": digest_dataset(split.test),
        "relations": [str(mr) for mr in mrs],
    }

    thresholds = {}
    if plan.family == "cnn":
        clean_subject = CnnSubject(clean_config, cache_dir=plan.cache_dir)
        for mr in mrs:
            if mr.index not in (1, 2):
                continue
            if plan.sigma_threshold is not None:
                thresholds[str(mr)] = plan.sigma_threshold
            else:
                thresholds[str(mr)] = calibrate_sigma_threshold(
                    mr, split, clean_subject, seeds=plan.calibration_seeds,
                    factor=plan.sigma_factor)
        meta["sigma_thresholds"] = dict(thresholds)

    if plan.family == "svm":
        clean_cells = _svm_row(clean_config, split, mrs, plan)
    else:
        clean_cells, clean_reports = _cnn_row(clean_config, split, mrs, plan, thresholds)
        sigma_reports.update({(CLEAN_ROW, mr): rep for mr, rep in clean_reports.items()})

    matrix = KillMatrix(target=plan.target, mr_ids=[str(mr) for mr in mrs],
                        rows=[CLEAN_ROW], verdicts={CLEAN_ROW: clean_cells}, meta=meta)
    bad = [mr for mr, v in clean_cells.items() if v.status != "pass"]
    if bad:
        meta["elapsed_seconds"] = round(time.monotonic() - started, 3)
        if out_dir is not None:
            _emit(SuiteResult(matrix, sigma_reports, out_dir))
        statuses = ", ".join(f"{mr}: {clean_cells[mr].status}" for mr in bad)
        raise BaselineKilledError(
            f"clean subject failed the baseline gate ({statuses})", matrix=matrix)

    def mutant_row(mutant_id):
        config = apply_mutant(clean_config, mutant_id)
        if plan.family == "svm":
            return mutant_id, _svm_row(config, split, mrs, plan), {}
        cells, reports = _cnn_row(config, split, mrs, plan, thresholds)
        return mutant_id, cells, reports

    if plan.family == "svm" and workers > 1 and len(mutants) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(mutant_row, mutants))
    else:
        results = [mutant_row(mid) for mid in mutants]

    for mutant_id, cells, reports in results:
        matrix.rows.append(mutant_id)
        matrix.verdicts[mutant_id] = cells
        sigma_reports.update({(mutant_id, mr): rep for mr, rep in reports.items()})

    meta["elapsed_seconds"] = round(time.monotonic() - started, 3)
    result = SuiteResult(matrix, sigma_reports, out_dir)
    if out_dir is not None:
        _emit(result)
    return result


def _emit(result):
    os.makedirs(result.out_dir, exist_ok=True)
    emit_report(result.matrix, result.out_dir)
    for (row, mr), report in result.sigma_reports.items():
        emit_loss_curves(report, row, result.out_dir)
