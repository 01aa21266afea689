"""Subjects under verification: thin application shells over the core models.

A subject owns the configuration knobs that the fault catalog rewrites
and exposes the narrow protocol the metamorphic runners drive. The
vector subject re-reads its labels from a configurable row column the
way a sloppy loader would, so a wrong-column fault silently trains on
garbage labels instead of crashing. Both subjects can memoize runs in
a ResultCache keyed by configuration and data content.
"""

from __future__ import annotations

import numpy as np

from ..cnn.checkpoint import load_checkpoint, save_checkpoint
from ..cnn.train import TrainRun, evaluate, train
from ..dataset import LabeledVectorSet
from ..errors import ConfigError, TrainingDivergedError
from ..metamorphic.svm_mrs import SvmPrediction
from ..svm.io import model_from_json, model_to_json
from ..svm.kernels import KernelSpec
from ..svm.multiclass import predict_batch, train_multiclass
from ..svm.smo import SvmTrainConfig
from .cache import ResultCache, cache_key, digest_dataset


class SvmSubject:
    """One-vs-one kernel classifier behind a row-oriented ingestion step."""

    def __init__(self, config, cache_dir=None):
        self.config = config
        self.cache = ResultCache(cache_dir)
        self.fault_sites = []

    @property
    def kernel_kind(self):
        return self.config.kernel_kind

    def _ingest(self, vset):
        """Rebuild full rows and read the label from the configured column."""
        rows = np.hstack([vset.features, vset.labels[:, None].astype(np.float64)])
        column = self.config.label_column
        if not 0 <= column < rows.shape[1]:
            raise ConfigError(
                f"label column {column} outside row width {rows.shape[1]}")
        labels = rows[:, column].astype(np.int64)  # truncating cast, loader-style
        self.fault_sites = []
        if column != rows.shape[1] - 1:
            self.fault_sites.append(f"label.source_column={column}")
        return LabeledVectorSet(rows[:, :vset.n_features], labels, class_count=None)

    def _kernel(self):
        return KernelSpec(kind=self.config.kernel_kind)

    def _train_config(self):
        return SvmTrainConfig(C=self.config.C,
                              kkt_tolerance=self.config.kkt_tolerance,
                              max_iterations=self.config.max_iterations)

    def fit_predict(self, train_set, test_set):
        key = None
        if self.cache.enabled:
            key = cache_key("svm-fit", self.config.to_dict(),
                            digest_dataset(train_set), digest_dataset(test_set))
            doc = self.cache.load(key)
            if doc is not None:
                model = model_from_json(doc["model"])
                return model, _prediction_from_dict(doc["prediction"])
        model = train_multiclass(self._ingest(train_set), self._kernel(),
                                 self._train_config())
        prediction = self.predict(model, test_set)
        if key is not None:
            self.cache.store(key, {"model": model_to_json(model),
                                   "prediction": _prediction_to_dict(prediction)})
        return model, prediction

    def predict(self, model, test_set):
        classes, _, decisions = predict_batch(model, test_set.features)
        return SvmPrediction(classes=model.classes, pairs=model.pairs,
                             predicted=classes, decisions=decisions)


def _prediction_to_dict(p):
    return {"classes": p.classes, "pairs": [list(q) for q in p.pairs],
            "predicted": p.predicted.tolist(), "decisions": p.decisions.tolist()}


def _prediction_from_dict(doc):
    return SvmPrediction(
        classes=list(doc["classes"]),
        pairs=[tuple(q) for q in doc["pairs"]],
        predicted=np.asarray(doc["predicted"], dtype=np.int64),
        decisions=np.asarray(doc["decisions"], dtype=np.float64))


class CnnSubject:
    """Residual convnet trained by the fault-aware loop."""

    def __init__(self, config, cache_dir=None, dtype=np.float32):
        self.config = config
        self.cache = ResultCache(cache_dir)
        self.dtype = np.dtype(dtype)

    def _run_from_doc(self, doc, seed):
        return TrainRun(config=self.config.train, seed=seed,
                        trace=[tuple(row) for row in doc["trace"]],
                        diverged=doc["diverged"],
                        fault_sites=list(doc["fault_sites"]))

    def train(self, split, seed):
        """Train on the split; returns (model, run). Memoizes by content."""
        cfg = self.config
        key = None
        if self.cache.enabled:
            key = cache_key("cnn-train", cfg.to_dict(), digest_dataset(split.train),
                            digest_dataset(split.test), seed, self.dtype.name)
            doc = self.cache.load(key)
            if doc is not None:
                run = self._run_from_doc(doc, seed)
                if doc["diverged"]:
                    raise TrainingDivergedError(doc["message"], run=run)
                return load_checkpoint(self.cache.path(key, ".npz")), run
        try:
            model, run = train(
                cfg.effective_arch(), split, cfg.train, seed, dtype=self.dtype,
                loss_variant=cfg.loss_variant, lr_variant=cfg.lr_variant,
                shard_keep=cfg.shard_keep, swap_train_test=cfg.swap_train_test,
                eval_batch_stats=cfg.eval_batch_stats,
                crash_at_step=cfg.crash_at_step)
        except TrainingDivergedError as exc:
            if key is not None and exc.run is not None:
                self.cache.store(key, {"trace": exc.run.trace_rows(), "diverged": True,
                                       "fault_sites": exc.run.fault_sites,
                                       "message": str(exc)})
            raise
        if key is not None:
            save_checkpoint(model, self.cache.sidecar(key, ".npz"))
            self.cache.store(key, {"trace": run.trace_rows(), "diverged": False,
                                   "fault_sites": run.fault_sites})
        return model, run

    def evaluate(self, model, test_set):
        return evaluate(model, test_set, batch_stats=self.config.eval_batch_stats)


def build_subject(config, cache_dir=None):
    """Subject instance for either configuration kind."""
    if config.family == "svm":
        return SvmSubject(config, cache_dir=cache_dir)
    return CnnSubject(config, cache_dir=cache_dir)
