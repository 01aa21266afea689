"""One-vs-one multiclass classification on top of the binary trainer.

For k observed classes, k*(k-1)/2 machines are trained, one per
unordered class pair (a, b) with a < b; the higher class b sits on the
positive side of each machine. Prediction counts pairwise votes; vote
ties resolve to the lowest class label. The per-instance score is the
sum of the winner's pairwise decision values, each oriented so that a
positive value favors the winner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .kernels import KernelSpec, resolve_gamma
from .smo import BinarySvm, SvmTrainConfig, train_binary_pm1


@dataclass
class DecisionReport:
    """Prediction for one instance: class, score, pairwise decisions."""

    predicted_class: int
    score: float
    decisions: np.ndarray  # aligned with SvmModel.pairs


@dataclass
class SvmModel:
    """A trained one-vs-one ensemble."""

    classes: list          # sorted observed class labels
    pairs: list            # [(a, b), ...] with a < b, lexicographic
    machines: list         # BinarySvm per pair
    kernel: KernelSpec     # resolved spec shared by all machines
    config: SvmTrainConfig

    def pair_index(self, a, b):
        return self.pairs.index((a, b))

    @property
    def converged(self):
        return all(m.converged for m in self.machines)


def train_multiclass(vset, kernel, config=SvmTrainConfig()):
    """Train one machine per class pair of the observed labels.

    A pair that exhausts its iteration budget still contributes its
    best-effort machine; ``model.converged`` reports whether every pair
    reached the KKT tolerance.
    """
    classes = [int(c) for c in np.unique(vset.labels)]
    if len(classes) < 2:
        raise ValidationError(f"multiclass training needs at least 2 classes, got {len(classes)}")
    kernel = resolve_gamma(kernel, vset.features)
    pairs = [(a, b) for i, a in enumerate(classes) for b in classes[i + 1:]]
    machines = []
    for a, b in pairs:
        mask = (vset.labels == a) | (vset.labels == b)
        X = vset.features[mask]
        y = np.where(vset.labels[mask] == b, 1.0, -1.0)
        machines.append(train_binary_pm1(X, y, kernel, config))
    return SvmModel(classes=classes, pairs=pairs, machines=machines, kernel=kernel, config=config)


def decision_matrix(model, X):
    """Pairwise decision values for every row of X, shape (m, n_pairs)."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty((X.shape[0], len(model.pairs)), dtype=np.float64)
    for idx, machine in enumerate(model.machines):
        out[:, idx] = machine.decision_values(X)
    return out


def predict_batch(model, X):
    """Vote over all pairs. Returns (classes, scores, decision matrix)."""
    D = decision_matrix(model, X)
    m = D.shape[0]
    class_pos = {c: i for i, c in enumerate(model.classes)}
    votes = np.zeros((m, len(model.classes)), dtype=np.int64)
    for idx, (a, b) in enumerate(model.pairs):
        winners = np.where(D[:, idx] >= 0.0, class_pos[b], class_pos[a])
        votes[np.arange(m), winners] += 1
    best = np.argmax(votes, axis=1)  # argmax takes the first max: lowest class wins ties
    classes = np.array([model.classes[i] for i in best], dtype=np.int64)
    scores = np.zeros(m, dtype=np.float64)
    for idx, (a, b) in enumerate(model.pairs):
        involved_b = classes == b
        involved_a = classes == a
        scores[involved_b] += D[involved_b, idx]
        scores[involved_a] -= D[involved_a, idx]
    return classes, scores, D


def predict(model, x):
    """DecisionReport for a single instance."""
    classes, scores, D = predict_batch(model, np.asarray(x, dtype=np.float64)[None, :])
    return DecisionReport(predicted_class=int(classes[0]), score=float(scores[0]), decisions=D[0])
