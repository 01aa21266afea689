"""Kernel definitions, gamma resolution, and the kernel-level identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mtverify.backend import get_backend
from mtverify.errors import ValidationError
from mtverify.svm.kernels import KernelSpec, gram, kernel_eval, resolve_gamma

finite_vectors = hnp.arrays(
    np.float64, st.integers(1, 8),
    elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False))


def test_linear_dot_product():
    assert kernel_eval(KernelSpec("linear"), [1, 2, 3], [1, 2, 3]) == 14.0


def test_rbf_self_similarity():
    spec = KernelSpec("rbf", gamma=0.7)
    assert kernel_eval(spec, [3.0, -1.0], [3.0, -1.0]) == 1.0


def test_rbf_closed_form():
    spec = KernelSpec("rbf", gamma=0.5)
    got = kernel_eval(spec, [0.0, 0.0], [2.0, 0.0])
    assert got == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        kernel_eval(KernelSpec("linear"), [1.0], [1.0, 2.0])


def test_spec_validation():
    with pytest.raises(ValidationError):
        KernelSpec("poly")
    with pytest.raises(ValidationError):
        KernelSpec("linear", gamma=1.0)
    with pytest.raises(ValidationError):
        KernelSpec("rbf", gamma=-1.0)


def test_resolve_gamma_formula():
    feats = np.array([[0.0, 2.0], [4.0, 6.0]])
    spec = resolve_gamma(KernelSpec("rbf"), feats)
    assert spec.gamma == pytest.approx(1.0 / (2 * np.var(feats)))
    # shift invariance of the resolved value
    shifted = resolve_gamma(KernelSpec("rbf"), feats + 11.0)
    assert shifted.gamma == spec.gamma


def test_resolve_gamma_rejects_constant_features():
    with pytest.raises(ValidationError):
        resolve_gamma(KernelSpec("rbf"), np.ones((3, 2)))


@given(a=finite_vectors, b=finite_vectors)
@settings(max_examples=60, deadline=None)
def test_kernel_symmetry(a, b):
    if a.shape != b.shape:
        return
    for spec in (KernelSpec("linear"), KernelSpec("rbf", gamma=0.3)):
        assert kernel_eval(spec, a, b) == kernel_eval(spec, b, a)


near_vectors = hnp.arrays(
    np.float64, st.integers(1, 8),
    elements=st.floats(-3, 3, allow_nan=False, allow_infinity=False))


@given(a=near_vectors, b=near_vectors)
@settings(max_examples=60, deadline=None)
def test_rbf_range(a, b):
    # element range kept small enough that exp cannot underflow to 0
    if a.shape != b.shape:
        return
    k = kernel_eval(KernelSpec("rbf", gamma=0.3), a, b)
    assert 0.0 < k <= 1.0


@given(a=finite_vectors, b=finite_vectors, k=st.floats(-20, 20, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_rbf_shift_identity_exact(a, b, k):
    # explicit per-feature differencing keeps the shifted kernel bitwise
    # equal on values where a+k and b+k are exact (integers are)
    if a.shape != b.shape:
        return
    a = np.rint(a)
    b = np.rint(b)
    k = float(np.rint(k))
    spec = KernelSpec("rbf", gamma=0.25)
    assert kernel_eval(spec, a + k, b + k) == kernel_eval(spec, a, b)


@given(a=finite_vectors, b=finite_vectors, seed=st.integers(0, 99))
@settings(max_examples=60, deadline=None)
def test_permutation_identity_both_kernels(a, b, seed):
    if a.shape != b.shape:
        return
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(a.size)
    for spec in (KernelSpec("linear"), KernelSpec("rbf", gamma=0.4)):
        assert kernel_eval(spec, a[perm], b[perm]) == pytest.approx(
            kernel_eval(spec, a, b), abs=1e-12, rel=1e-12)


def test_gram_matches_pairwise_eval():
    rng = np.random.Generator(np.random.PCG64(12))
    A = rng.normal(size=(5, 3))
    B = rng.normal(size=(4, 3))
    for spec in (KernelSpec("linear"), KernelSpec("rbf", gamma=0.6)):
        K = gram(spec, A, B)
        assert K.shape == (5, 4)
        for i in range(5):
            for j in range(4):
                assert K[i, j] == pytest.approx(kernel_eval(spec, A[i], B[j]),
                                                rel=1e-12, abs=1e-15)


def test_gram_backends_agree():
    rng = np.random.Generator(np.random.PCG64(21))
    A = rng.normal(size=(6, 4))
    B = rng.normal(size=(3, 4))
    np_mod = get_backend("numpy")
    nb_mod = get_backend("numba")
    assert np.allclose(np_mod.linear_gram(A, B), nb_mod.linear_gram(A, B),
                       rtol=1e-12, atol=1e-12)
    assert np.allclose(np_mod.rbf_gram(A, B, 0.3), nb_mod.rbf_gram(A, B, 0.3),
                       rtol=1e-12, atol=1e-12)


def test_rbf_gram_needs_gamma():
    with pytest.raises(ValidationError):
        gram(KernelSpec("rbf"), np.zeros((2, 2)), np.zeros((2, 2)))
