"""Numba panel kernels for the (n, alpha) oscillatory integrals.

Integrand over n in [x-1, x+1], alpha in [0, pi):

    chi(x - n) F_L(2(theta - alpha)) D^{-1/2} * { e^{i s log D}  (mode 0)
                                                { W(log D)       (mode 1)

with D = e^t cos^2 a + n sin 2a + e^{-t}(n^2+1) sin^2 a.  W is a cubic
Hermite table.  Each coarse cell is split into kn x ka equal panels, each
integrated by tensor Gauss-Legendre of order 8 with an order-6 companion for
the error estimate.
"""

from __future__ import annotations

import math

import numba
import numpy as np

X8, W8 = np.polynomial.legendre.leggauss(8)
X6, W6 = np.polynomial.legendre.leggauss(6)


@numba.njit(cache=True, nogil=True)
def chi_scalar(x):
    ax = abs(x)
    if ax <= 0.5:
        return 1.0
    if ax >= 1.0:
        return 0.0
    y = 2.0 * ax - 1.0
    u = 1.0 / (1.0 - y) - 1.0 / y
    if u >= 0:
        e = math.exp(-u)
        return e / (1.0 + e)
    e = math.exp(u)
    return 1.0 / (1.0 + e)


@numba.njit(cache=True, nogil=True)
def fejer_scalar(psi, L, pref):
    h = 0.5 * psi
    sh = math.sin(h)
    if abs(sh) < 1e-4:
        acc = 1.0
        for n in range(1, L):
            acc += 2.0 * (L - n) / L * math.cos(n * psi)
        return pref * acc
    v = math.sin(L * h) / sh
    return pref * v * v / L


@numba.njit(cache=True, nogil=True)
def hermite_eval(phi, phi0, dphi, tw, tdw):
    u = (phi - phi0) / dphi
    i = int(math.floor(u))
    nmax = tw.shape[0] - 2
    if i < 0:
        i = 0
    elif i > nmax:
        i = nmax
    x = u - i
    x2 = x * x
    x3 = x2 * x
    h00 = 2 * x3 - 3 * x2 + 1
    h10 = x3 - 2 * x2 + x
    h01 = -2 * x3 + 3 * x2
    h11 = x3 - x2
    return (h00 * tw[i] + h10 * dphi * tdw[i]
            + h01 * tw[i + 1] + h11 * dphi * tdw[i + 1])


@numba.njit(cache=True, nogil=True)
def _axis_nodes(lo, hi, k, xs, ws):
    m = xs.shape[0]
    d = (hi - lo) / k
    nodes = np.empty(k * m)
    wts = np.empty(k * m)
    for i in range(k):
        c = lo + (i + 0.5) * d
        for j in range(m):
            nodes[i * m + j] = c + 0.5 * d * xs[j]
            wts[i * m + j] = 0.5 * d * ws[j]
    return nodes, wts


@numba.njit(cache=True, nogil=True)
def _cell(n_lo, n_hi, a_lo, a_hi, kn, ka, x, et, emt, theta, s, L, pref, mode,
          phi0, dphi, tw, tdw, xs, ws, out_panels):
    """Tensor GL over kn x ka panels; writes per-panel (re, im) into out_panels."""
    m = xs.shape[0]
    nn, wn = _axis_nodes(n_lo, n_hi, kn, xs, ws)
    aa, wa = _axis_nodes(a_lo, a_hi, ka, xs, ws)
    chw = np.empty(nn.shape[0])
    for i in range(nn.shape[0]):
        chw[i] = chi_scalar(x - nn[i]) * wn[i]
    ab = 0.0
    for ja in range(ka):
        for jj in range(m):
            q = ja * m + jj
            al = aa[q]
            c = math.cos(al)
            sn = math.sin(al)
            s2 = 2.0 * sn * c
            A = et * c * c
            B = emt * sn * sn
            fj = fejer_scalar(2.0 * (theta - al), L, pref) * wa[q]
            if fj == 0.0:
                continue
            for ia in range(kn):
                rre = 0.0
                rim = 0.0
                rab = 0.0
                for ii in range(m):
                    k = ia * m + ii
                    ch = chw[k]
                    if ch == 0.0:
                        continue
                    n = nn[k]
                    D = A + n * s2 + B * (n * n + 1.0)
                    lg = math.log(D)
                    amp = ch / math.sqrt(D)
                    if mode == 0:
                        ph = s * lg
                        rre += amp * math.cos(ph)
                        rim += amp * math.sin(ph)
                    else:
                        rre += amp * hermite_eval(lg, phi0, dphi, tw, tdw)
                    rab += abs(amp)
                out_panels[ia, ja, 0] += fj * rre
                out_panels[ia, ja, 1] += fj * rim
                ab += abs(fj) * rab
    return ab


@numba.njit(cache=True, nogil=True)
def integrate_cells(n_lo, n_hi, a_lo, a_hi, kn, ka, x, t, theta, s, L, pref, mode,
                    phi0, dphi, tw, tdw, x8, w8, x6, w6):
    nc = n_lo.shape[0]
    out = np.zeros((nc, 4))
    et = math.exp(t)
    emt = math.exp(-t)
    for c in range(nc):
        p8 = np.zeros((kn[c], ka[c], 2))
        p6 = np.zeros((kn[c], ka[c], 2))
        ab = _cell(n_lo[c], n_hi[c], a_lo[c], a_hi[c], kn[c], ka[c], x, et, emt, theta, s, L,
                   pref, mode, phi0, dphi, tw, tdw, x8, w8, p8)
        _cell(n_lo[c], n_hi[c], a_lo[c], a_hi[c], kn[c], ka[c], x, et, emt, theta, s, L,
              pref, mode, phi0, dphi, tw, tdw, x6, w6, p6)
        ser = 0.0
        for i in range(kn[c]):
            for j in range(ka[c]):
                ser += math.hypot(p8[i, j, 0] - p6[i, j, 0], p8[i, j, 1] - p6[i, j, 1])
        out[c, 0] = p8[:, :, 0].sum()
        out[c, 1] = p8[:, :, 1].sum()
        out[c, 2] = ser
        out[c, 3] = ab
    return out


def run_cells(cells, x, t, theta, s, L, pref, mode, table=None):
    n_lo, n_hi, a_lo, a_hi, kn, ka = cells
    if table is None:
        phi0, dphi, tw, tdw = 0.0, 1.0, np.zeros(2), np.zeros(2)
    else:
        phi0, dphi, tw, tdw = table
    return integrate_cells(n_lo, n_hi, a_lo, a_hi, kn.astype(np.int64), ka.astype(np.int64),
                           float(x), float(t), float(theta), float(s), int(L), float(pref),
                           int(mode), float(phi0), float(dphi), tw, tdw, X8, W8, X6, W6)
