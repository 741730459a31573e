"""Small numba kernels shared by the transform and kernel modules."""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _cosine_transform_dt(w, dt, s):
    # phasor rebuilt exactly every 128 steps to bound drift
    n = w.shape[0]
    m = s.shape[0]
    out = np.empty(m)
    for i in range(m):
        step = s[i] * dt
        cs, sn = math.cos(step), math.sin(step)
        acc = 0.0
        cr, ci = 1.0, 0.0
        for j in range(n):
            if j % 128 == 0:
                cr = math.cos(step * j)
                ci = math.sin(step * j)
            acc += w[j] * cr
            cr, ci = cr * cs - ci * sn, cr * sn + ci * cs
        out[i] = acc
    return out


def cosine_sum(weights, dt, s):
    """Vector of sum_j weights[j] cos(s j dt) over the array ``s``."""
    s = np.ascontiguousarray(np.atleast_1d(np.asarray(s, dtype=float)))
    flat = s.ravel()
    out = _cosine_transform_dt(np.ascontiguousarray(weights, dtype=float), float(dt), flat)
    return out.reshape(s.shape)


def gauss_panels(edges, order):
    """Composite Gauss-Legendre nodes and weights over consecutive edges."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) / 2 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def tanh_pi(s):
    """tanh(pi s) as 1 - 2e^{-2 pi s}/(1 + e^{-2 pi s}); exactly 1 beyond s = 20."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    e = np.exp(-2 * np.pi * np.minimum(a, 20.0))
    val = 1.0 - 2 * e / (1 + e)
    val = np.where(a > 20.0, 1.0, val)
    return np.sign(s) * val
