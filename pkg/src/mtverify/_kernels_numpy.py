"""Pure-numpy implementations of the hot numeric kernels.

These are the fallback twins of the jitted kernels in ``_kernels_numba``;
``backend`` picks the active set. Signatures and semantics must stay in
lockstep between the two modules. Each backend is deterministic from run
to run; across backends results agree to float tolerance, not bitwise,
because summation orders differ.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided


def linear_gram(a, b):
    """Pairwise dot products, shape (len(a), len(b))."""
    return a @ b.T


def rbf_gram(a, b, gamma):
    """exp(-gamma * ||a_i - b_j||^2) computed from explicit differences.

    The squared distance is summed over per-feature differences rather
    than expanded into norms, so shifting both inputs by a common
    constant cannot perturb the result through cancellation.
    """
    diff = a[:, None, :] - b[None, :, :]
    return np.exp(-gamma * np.einsum("ijk,ijk->ij", diff, diff))


def smo_solve(K, y, C, tol, max_iter):
    """Two-variable decomposition on the box-constrained dual.

    Minimizes 0.5*a'Qa - sum(a) subject to y'a = 0 and 0 <= a <= C,
    with Q_ij = y_i y_j K_ij. The first index maximizes the violation;
    its partner maximizes the second-order gain of the pair subproblem,
    which keeps hard non-separable problems from zigzagging. Ties break
    toward the lowest index, so the iterate path is deterministic.

    Returns (alpha, grad, iterations, kkt_gap). ``grad`` is Q a - 1;
    convergence means kkt_gap <= tol, measured on the maximal
    violating pair regardless of which partner was stepped.
    """
    m = K.shape[0]
    alpha = np.zeros(m)
    G = -np.ones(m)
    diag = np.ascontiguousarray(np.diag(K))
    neg_inf = -np.inf
    pos_inf = np.inf
    it = 0
    while True:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        v = -y * G
        vi = np.where(up, v, neg_inf)
        vlow = np.where(low, v, pos_inf)
        i = int(np.argmax(vi))
        gap = vi[i] - vlow.min()
        if gap <= tol or it >= max_iter:
            return alpha, G, it, gap
        b = vi[i] - v
        quad = np.maximum(diag[i] + diag - 2.0 * K[i], 1e-12)
        gain = np.where(low & (b > 0.0), -(b * b) / quad, pos_inf)
        j = int(np.argmin(gain))
        step = b[j] / quad[j]
        cap_i = (C - alpha[i]) if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else (C - alpha[j])
        step = min(step, cap_i, cap_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        # clamp float spill so the box constraint stays exact
        if alpha[i] < 0.0:
            alpha[i] = 0.0
        elif alpha[i] > C:
            alpha[i] = C
        if alpha[j] < 0.0:
            alpha[j] = 0.0
        elif alpha[j] > C:
            alpha[j] = C
        G += y * step * (K[:, i] - K[:, j])
        it += 1


def _cols_view(xp, kh, kw, stride, ho, wo):
    n, c, _, _ = xp.shape
    s0, s1, s2, s3 = xp.strides
    shape = (n, c, kh, kw, ho, wo)
    strides = (s0, s1, s2, s3, s2 * stride, s3 * stride)
    return as_strided(xp, shape=shape, strides=strides)


def conv2d_valid(xp, w, stride):
    """Valid cross-correlation of pre-padded input xp (N,C,H,W) with w (O,C,kh,kw)."""
    n, c, hp, wp = xp.shape
    o, _, kh, kw = w.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    cols = _cols_view(xp, kh, kw, stride, ho, wo)
    y = np.tensordot(w, cols, axes=([1, 2, 3], [1, 2, 3]))
    return np.ascontiguousarray(y.transpose(1, 0, 2, 3))


def conv2d_valid_grad_w(xp, dy, kh, kw, stride):
    """Gradient of conv2d_valid w.r.t. the weights."""
    _, _, ho, wo = dy.shape
    cols = _cols_view(xp, kh, kw, stride, ho, wo)
    return np.tensordot(dy, cols, axes=([0, 2, 3], [0, 4, 5]))


def conv2d_valid_grad_x(dy, w, hp, wp, stride):
    """Gradient of conv2d_valid w.r.t. the (pre-padded) input."""
    n, o, ho, wo = dy.shape
    _, c, kh, kw = w.shape
    g = np.tensordot(dy, w, axes=([1], [0]))  # (n, ho, wo, c, kh, kw)
    dxp = np.zeros((n, c, hp, wp), dtype=dy.dtype)
    for ky in range(kh):
        for kx in range(kw):
            patch = g[:, :, :, :, ky, kx].transpose(0, 3, 1, 2)
            dxp[:, :, ky:ky + stride * ho:stride, kx:kx + stride * wo:stride] += patch
    return dxp
