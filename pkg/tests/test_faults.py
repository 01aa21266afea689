"""Fault catalog: integrity, single-site application, and mutant liveness."""

import json

import numpy as np
import pytest

from mtverify.cnn.model import ArchDescriptor
from mtverify.cnn.train import TrainConfig, train
from mtverify.errors import ValidationError
from mtverify.faults import (
    CATALOG,
    CRASH_MUTANT_ID,
    CRASH_STEP,
    CnnSubjectConfig,
    SvmSubjectConfig,
    apply_mutant,
    catalog_json,
    get_mutant,
    list_mutants,
)
from mtverify.harness.subjects import SvmSubject
from mtverify.svm.multiclass import decision_matrix

from conftest import small_multiclass


def test_catalog_shape():
    assert len(list_mutants("svm-linear")) == 6
    assert len(list_mutants("svm-rbf")) == 6
    assert len(list_mutants("cnn")) == 17
    assert len(CATALOG) == 29
    ids = [s.id for s in CATALOG]
    assert len(set(ids)) == len(ids)
    with pytest.raises(ValidationError):
        list_mutants("gpu")
    with pytest.raises(ValidationError):
        get_mutant("zz9")


def test_catalog_json_round_trips():
    doc = json.loads(catalog_json("cnn"))
    assert len(doc) == 17
    by_id = {row["id"]: row for row in doc}
    assert by_id["c43"]["value"] == [0]
    assert by_id["c50"]["field"] == "border_fill"
    assert all(set(row) == {"id", "target", "category", "description", "field", "value"}
               for row in doc)


def test_apply_rewrites_exactly_one_field():
    base = SvmSubjectConfig(kernel_kind="linear", label_column=6)
    mutated = apply_mutant(base, "l10")
    assert mutated.label_column == 10
    assert mutated.mutant_id == "l10"
    changed = {k for k in base.to_dict()
               if base.to_dict()[k] != mutated.to_dict()[k]}
    assert changed == {"label_column", "mutant_id"}

    arch = ArchDescriptor(side=8, widths=(4,), blocks=(1,))
    cfg = CnnSubjectConfig(arch=arch, train=TrainConfig())
    mutated = apply_mutant(cfg, "c29")
    assert mutated.loss_variant == "decay_sign_flipped"
    changed = {k for k in cfg.to_dict() if cfg.to_dict()[k] != mutated.to_dict()[k]}
    assert changed == {"loss_variant", "mutant_id"}


def test_faults_do_not_stack():
    base = SvmSubjectConfig(kernel_kind="rbf", label_column=6)
    mutated = apply_mutant(base, "r5")
    with pytest.raises(ValidationError, match="do not stack"):
        apply_mutant(mutated, "r10")


def test_cross_target_application_rejected():
    svm = SvmSubjectConfig(kernel_kind="linear")
    with pytest.raises(ValidationError):
        apply_mutant(svm, "r5")  # rbf fault on a linear subject
    with pytest.raises(ValidationError):
        apply_mutant(svm, "c29")
    cnn = CnnSubjectConfig(arch=ArchDescriptor(side=8, widths=(4,), blocks=(1,)),
                           train=TrainConfig())
    with pytest.raises(ValidationError):
        apply_mutant(cnn, "l2")


def test_effective_arch_rewrites():
    arch = ArchDescriptor(side=8, widths=(4, 8), blocks=(2, 2))
    cfg = CnnSubjectConfig(arch=arch, train=TrainConfig())
    assert cfg.effective_arch() is arch  # clean config builds the arch as-is
    assert apply_mutant(cfg, "r6").effective_arch().use_skip is False
    assert apply_mutant(cfg, "r67").effective_arch().blocks == (1, 1)
    assert apply_mutant(cfg, "c50").effective_arch().border_fill == 127.5
    assert apply_mutant(cfg, "r48").effective_arch().skip_pad_front_only is True


def test_config_round_trips():
    svm = apply_mutant(SvmSubjectConfig(kernel_kind="rbf", label_column=6), "r26")
    assert SvmSubjectConfig.from_dict(svm.to_dict()) == svm
    cnn = apply_mutant(
        CnnSubjectConfig(arch=ArchDescriptor(side=8, widths=(4,), blocks=(1,)),
                         train=TrainConfig()), "c44")
    assert CnnSubjectConfig.from_dict(cnn.to_dict()) == cnn
    assert cnn.shard_keep == (0, 1)


def test_svm_label_mutants_change_the_model():
    vset = small_multiclass(m=48, seed=1, classes=4, n_features=6)
    test = small_multiclass(m=16, seed=2, classes=4, n_features=6)
    base = SvmSubjectConfig(kernel_kind="linear", label_column=6)
    clean_model, clean_pred = SvmSubject(base).fit_predict(vset, test)
    for spec in list_mutants("svm-linear"):
        if spec.value >= vset.n_features:
            continue  # column ids beyond this toy width are digits-scale faults
        subject = SvmSubject(apply_mutant(base, spec.id))
        _, pred = subject.fit_predict(vset, test)
        same = (pred.classes == clean_pred.classes
                and np.array_equal(pred.predicted, clean_pred.predicted)
                and np.allclose(pred.decisions, clean_pred.decisions))
        assert not same, spec.id
        assert any(site.startswith("label.source_column") for site in subject.fault_sites)


def test_clean_config_purity_is_bitwise():
    vset = small_multiclass(m=32, seed=3, classes=4, n_features=6)
    test = small_multiclass(m=12, seed=4, classes=4, n_features=6)
    cfg = SvmSubjectConfig(kernel_kind="rbf", label_column=6)
    model_a, pred_a = SvmSubject(cfg).fit_predict(vset, test)
    model_b, pred_b = SvmSubject(cfg).fit_predict(vset, test)
    assert np.array_equal(pred_a.decisions, pred_b.decisions)
    assert np.array_equal(decision_matrix(model_a, test.features),
                          decision_matrix(model_b, test.features))


@pytest.mark.parametrize("spec", list_mutants("cnn"), ids=lambda s: s.id)
def test_every_cnn_mutant_is_live(spec, tiny_image_split):
    """Each fault must change the training trace (or crash) on a tiny run."""
    # milestone strictly inside the run so every schedule variant departs
    # from the standard one somewhere in the trace
    arch = ArchDescriptor(side=8, widths=(4, 8), blocks=(2, 2))
    cfg = TrainConfig(epochs=3, batch_size=10, learning_rate=0.05,
                      eval_every=2, milestones=(2,))
    base = CnnSubjectConfig(arch=arch, train=cfg)
    mutated = apply_mutant(base, spec.id)

    def run(config):
        model, tr = train(config.effective_arch(), tiny_image_split, config.train,
                          seed=7, loss_variant=config.loss_variant,
                          lr_variant=config.lr_variant, shard_keep=config.shard_keep,
                          swap_train_test=config.swap_train_test,
                          eval_batch_stats=config.eval_batch_stats,
                          crash_at_step=config.crash_at_step)
        return tr

    clean = run(base)
    if spec.id == CRASH_MUTANT_ID:
        with pytest.raises(RuntimeError, match=f"step {CRASH_STEP}"):
            run(mutated)
        return
    got = run(mutated)
    assert got.trace_rows() != clean.trace_rows(), spec.id
    if spec.id != "r67":  # the block-count rewrite has no loop hook to log
        assert got.fault_sites, spec.id
