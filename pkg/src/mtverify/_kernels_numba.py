"""Jitted twins of the kernels in ``_kernels_numpy``.

Every function here matches the numpy fallback in signature and
semantics. Each backend is bitwise deterministic run to run: the
compiled code fixes one summation order, even where fastmath lets the
compiler pick it. Agreement across backends is to float tolerance only.
"""

import math

import numpy as np
from numba import njit

# reassociation and FMA on the conv kernels so the row loops vectorize;
# the solver stays strict-IEEE because its pivot choices compare floats
_CONV_FASTMATH = {"reassoc", "nsz", "contract"}


@njit(cache=True)
def linear_gram(a, b):
    ma, n = a.shape
    mb = b.shape[0]
    out = np.empty((ma, mb), dtype=a.dtype)
    for i in range(ma):
        for j in range(mb):
            s = 0.0
            for k in range(n):
                s += a[i, k] * b[j, k]
            out[i, j] = s
    return out


@njit(cache=True)
def rbf_gram(a, b, gamma):
    # squared distance from explicit per-feature differences; shifting
    # both inputs by a common constant cannot perturb it
    ma, n = a.shape
    mb = b.shape[0]
    out = np.empty((ma, mb), dtype=a.dtype)
    for i in range(ma):
        for j in range(mb):
            s = 0.0
            for k in range(n):
                d = a[i, k] - b[j, k]
                s += d * d
            out[i, j] = math.exp(-gamma * s)
    return out


@njit(cache=True)
def smo_solve(K, y, C, tol, max_iter):
    # first index by maximal violation, partner by second-order gain;
    # ties break toward the lowest index in both scans
    m = K.shape[0]
    alpha = np.zeros(m)
    G = -np.ones(m)
    it = 0
    while True:
        gmax = -np.inf
        gmin = np.inf
        i = -1
        for t in range(m):
            v = -y[t] * G[t]
            if ((y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0)) and v > gmax:
                gmax = v
                i = t
            if ((y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C)) and v < gmin:
                gmin = v
        gap = gmax - gmin
        if gap <= tol or it >= max_iter:
            return alpha, G, it, gap
        j = -1
        best = np.inf
        for t in range(m):
            if (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C):
                b = gmax + y[t] * G[t]
                if b > 0.0:
                    q = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if q <= 0.0:
                        q = 1e-12
                    gain = -(b * b) / q
                    if gain < best:
                        best = gain
                        j = t
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        step = (gmax + y[j] * G[j]) / quad
        cap_i = (C - alpha[i]) if y[i] > 0.0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0.0 else (C - alpha[j])
        if cap_i < step:
            step = cap_i
        if cap_j < step:
            step = cap_j
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        if alpha[i] < 0.0:
            alpha[i] = 0.0
        elif alpha[i] > C:
            alpha[i] = C
        if alpha[j] < 0.0:
            alpha[j] = 0.0
        elif alpha[j] > C:
            alpha[j] = C
        for t in range(m):
            G[t] += y[t] * step * (K[t, i] - K[t, j])
        it += 1


@njit(cache=True, fastmath=_CONV_FASTMATH)
def conv2d_valid(xp, w, stride):
    # weight scalar hoisted; the stride-1 nest walks contiguous rows so
    # the inner loop vectorizes
    n, c, hp, wp = xp.shape
    o, _, kh, kw = w.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    y = np.zeros((n, o, ho, wo), dtype=xp.dtype)
    for ni in range(n):
        for oi in range(o):
            for ci in range(c):
                for ky in range(kh):
                    for kx in range(kw):
                        wv = w[oi, ci, ky, kx]
                        if stride == 1:
                            for yi in range(ho):
                                xrow = xp[ni, ci, yi + ky]
                                yrow = y[ni, oi, yi]
                                for xi in range(wo):
                                    yrow[xi] += wv * xrow[xi + kx]
                        else:
                            for yi in range(ho):
                                for xi in range(wo):
                                    y[ni, oi, yi, xi] += wv * xp[ni, ci, yi * stride + ky, xi * stride + kx]
    return y


@njit(cache=True, fastmath=_CONV_FASTMATH)
def conv2d_valid_grad_w(xp, dy, kh, kw, stride):
    n, c, hp, wp = xp.shape
    _, o, ho, wo = dy.shape
    dw = np.zeros((o, c, kh, kw), dtype=xp.dtype)
    for ni in range(n):
        for oi in range(o):
            for ci in range(c):
                for ky in range(kh):
                    for kx in range(kw):
                        s = 0.0
                        if stride == 1:
                            for yi in range(ho):
                                grow = dy[ni, oi, yi]
                                xrow = xp[ni, ci, yi + ky]
                                for xi in range(wo):
                                    s += grow[xi] * xrow[xi + kx]
                        else:
                            for yi in range(ho):
                                for xi in range(wo):
                                    s += dy[ni, oi, yi, xi] * xp[ni, ci, yi * stride + ky, xi * stride + kx]
                        dw[oi, ci, ky, kx] += s
    return dw


@njit(cache=True, fastmath=_CONV_FASTMATH)
def conv2d_valid_grad_x(dy, w, hp, wp, stride):
    n, o, ho, wo = dy.shape
    _, c, kh, kw = w.shape
    dxp = np.zeros((n, c, hp, wp), dtype=dy.dtype)
    for ni in range(n):
        for oi in range(o):
            for ci in range(c):
                for ky in range(kh):
                    for kx in range(kw):
                        wv = w[oi, ci, ky, kx]
                        if stride == 1:
                            for yi in range(ho):
                                grow = dy[ni, oi, yi]
                                orow = dxp[ni, ci, yi + ky]
                                for xi in range(wo):
                                    orow[xi + kx] += wv * grow[xi]
                        else:
                            for yi in range(ho):
                                for xi in range(wo):
                                    dxp[ni, ci, yi * stride + ky, xi * stride + kx] += wv * dy[ni, oi, yi, xi]
    return dxp
