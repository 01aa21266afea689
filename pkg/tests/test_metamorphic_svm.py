"""Relation runners for the vector-classifier subject."""

import numpy as np
import pytest

from mtverify.dataset import DatasetSplit, stratified_split
from mtverify.errors import ValidationError
from mtverify.faults import SvmSubjectConfig
from mtverify.harness.subjects import SvmSubject
from mtverify.metamorphic.svm_mrs import applicable_svm_mrs, run_svm_mr
from mtverify.metamorphic.verdicts import MrId

from conftest import small_multiclass


def _split(seed=1, n_features=6):
    vset = small_multiclass(m=48, seed=seed, classes=4, n_features=n_features)
    return stratified_split(vset, 0.25, seed=2)


def _subject(kernel="linear", label_column=None, n_features=6):
    column = n_features if label_column is None else label_column
    return SvmSubject(SvmSubjectConfig(kernel_kind=kernel, label_column=column))


def test_applicability_sets():
    assert [str(m) for m in applicable_svm_mrs("linear")] == ["svm-1", "svm-2", "svm-4"]
    assert [str(m) for m in applicable_svm_mrs("rbf")] == ["svm-1", "svm-2", "svm-3"]


@pytest.mark.parametrize("kernel", ["linear", "rbf"])
def test_clean_subject_passes_applicable_mrs(kernel):
    split = _split()
    subject = _subject(kernel)
    base = subject.fit_predict(split.train, split.test)
    for mr in applicable_svm_mrs(kernel):
        verdict = run_svm_mr(mr, split, subject, base=base)
        assert verdict.status == "pass", (str(mr), verdict.detail, verdict.evidence)
        assert verdict.evidence <= verdict.threshold


def test_wrong_label_column_is_killed_by_feature_permutation():
    split = _split()
    subject = _subject("linear", label_column=2)
    verdict = run_svm_mr(MrId("svm", 1), split, subject)
    assert verdict.status == "killed"
    assert verdict.evidence > verdict.threshold or "flips" in verdict.detail


def test_wrong_label_column_survives_row_rotation():
    # rotating rows keeps each row intact, so the misread labels travel
    # with their features and the model is unchanged
    split = _split()
    subject = _subject("linear", label_column=2)
    verdict = run_svm_mr(MrId("svm", 2), split, subject)
    assert verdict.status == "pass"


def test_shared_base_avoids_refitting():
    split = _split()
    subject = _subject("rbf")
    calls = []
    original = subject.fit_predict

    def counting(train_set, test_set):
        calls.append(1)
        return original(train_set, test_set)

    subject.fit_predict = counting
    base = subject.fit_predict(split.train, split.test)
    for mr in applicable_svm_mrs("rbf"):
        run_svm_mr(mr, split, subject, base=base)
    # one base fit plus one follow-up fit per retraining relation
    assert len(calls) == 1 + 3


def test_applicability_errors():
    split = _split()
    with pytest.raises(ValidationError):
        run_svm_mr(MrId("svm", 3), split, _subject("linear"))
    with pytest.raises(ValidationError):
        run_svm_mr(MrId("svm", 4), split, _subject("rbf"))
    with pytest.raises(ValidationError):
        run_svm_mr(MrId("cnn", 1), split, _subject("linear"))


def test_subject_crash_is_inconclusive():
    split = _split()

    class Broken:
        kernel_kind = "linear"

        def fit_predict(self, train_set, test_set):
            raise RuntimeError("disk on fire")

    verdict = run_svm_mr(MrId("svm", 1), split, Broken())
    assert verdict.status == "inconclusive"
    assert "disk on fire" in verdict.detail
    assert np.isnan(verdict.evidence)


def test_crash_on_follow_up_only_is_inconclusive():
    split = _split()
    subject = _subject("linear")
    base = subject.fit_predict(split.train, split.test)

    class FailsFollowUps:
        kernel_kind = "linear"

        def fit_predict(self, train_set, test_set):
            raise RuntimeError("follow-up refused")

    verdict = run_svm_mr(MrId("svm", 1), split, FailsFollowUps(), base=base)
    assert verdict.status == "inconclusive"


def test_scaling_identity_runs_without_retraining():
    split = _split()
    subject = _subject("linear")
    base = subject.fit_predict(split.train, split.test)
    subject.fit_predict = lambda *a: (_ for _ in ()).throw(AssertionError("refit"))
    verdict = run_svm_mr(MrId("svm", 4), split, subject, base=base)
    assert verdict.status == "pass"
    assert "scaling_identity" in verdict.variants


def test_rbf_interpolation_breaks_scaling_identity():
    # the spacing identity holds for affine decision surfaces only, so an
    # rbf-shaped subject pretending to be linear gets caught
    split = _split()
    real = _subject("rbf")
    base = real.fit_predict(split.train, split.test)

    class Impostor:
        kernel_kind = "linear"

        def predict(self, model, test_set):
            return real.predict(model, test_set)

        def fit_predict(self, train_set, test_set):
            return real.fit_predict(train_set, test_set)

    verdict = run_svm_mr(MrId("svm", 4), split, Impostor(), base=base)
    assert verdict.status == "killed"


def test_verdict_serialization_handles_non_finite():
    split = _split()
    subject = _subject("rbf")
    verdict = run_svm_mr(MrId("svm", 3), split, subject)
    doc = verdict.to_dict()
    assert doc["mr"] == "svm-3"
    assert doc["status"] == verdict.status
    from mtverify.metamorphic.verdicts import MrVerdict
    back = MrVerdict.from_dict(doc)
    assert back.mr == verdict.mr
    assert back.evidence == verdict.evidence
