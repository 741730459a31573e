"""Microlocal-lift kernel: Fejer weights, oscillatory quadrature, asymptotics.

For a spectral parameter s the horocycle-averaged component is

    kappa_s(x, t, theta) = int_{x-1}^{x+1} int_0^pi chi(x - n) F_L(2(theta - a))
                           e^{(is - 1/2) phi(n, t, a)} da dn,

and the full kernel integrates it against h(s) s tanh(pi s) ds / (2 pi) over
the real line.  Exchanging the order, the full kernel is the same (n, a)
integral with e^{(is-1/2)phi} replaced by e^{-phi/2} W(phi), where

    W(phi) = (1/pi) int_0^inf s h(s) tanh(pi s) cos(s phi) ds.

W is tabulated from g' by a principal-value Hilbert integral, so no
truncation in s is needed.
"""

from __future__ import annotations

import math
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _quad
from ._numerics import gauss_panels, tanh_pi
from .errors import ToleranceNotMet
from .hyperbolic import NakPoint
from .spectral import SmoothCutoff, SpectralWindow, TransformTriple, defect_multiplier, windowed_pair

_CHI = SmoothCutoff()


# ---------------------------------------------------------------------------
# Fejer kernel

@dataclass(frozen=True)
class FejerKernel:
    L: int
    prefactor: float = field(init=False)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        object.__setattr__(self, "prefactor",
                           math.sqrt(3 * self.L / (2 * math.pi * (2 * self.L ** 2 + 1))))

    def coefficient_sum(self) -> float:
        """sum_{|n| <= L} ((L - |n|)/L)^2, summed exactly in integers."""
        L = self.L
        num = L * L + 2 * sum((L - n) ** 2 for n in range(1, L + 1))
        return num / (L * L)

    def normalization(self) -> float:
        """(3L/(2L^2+1)) * coefficient_sum(); equals 1."""
        L = self.L
        num = L * L + 2 * sum((L - n) ** 2 for n in range(1, L + 1))
        return (3 * L * num) / ((2 * L * L + 1) * L * L)

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        h = 0.5 * phi
        sh = np.sin(h)
        small = np.abs(sh) < 1e-4
        with np.errstate(invalid="ignore", divide="ignore"):
            v = np.sin(self.L * h) / np.where(small, 1.0, sh)
        out = self.prefactor * v * v / self.L
        if np.any(small):
            out = np.where(small, self.direct_sum(np.where(small, phi, 0.0)), out)
        return float(out) if out.ndim == 0 else out

    def direct_sum(self, phi):
        phi = np.asarray(phi, dtype=float)
        n = np.arange(1, self.L)
        acc = 1.0 + 2 * np.tensordot(np.cos(np.multiply.outer(phi, n)), (self.L - n) / self.L, axes=1) \
            if self.L > 1 else np.ones_like(phi)
        out = self.prefactor * acc
        return float(out) if np.ndim(out) == 0 else out


def fejer_eval(F: FejerKernel, phi):
    return F(phi)


# ---------------------------------------------------------------------------
# lift fields

@dataclass(frozen=True)
class LiftField:
    window: SpectralWindow
    grid: list
    values: np.ndarray
    err_est: np.ndarray
    variant: str
    s: float | None = None

    def rows(self):
        for p, v, e in zip(self.grid, self.values, self.err_est):
            yield (p.x, p.t, p.theta, v.real, v.imag, e)


@lru_cache(maxsize=16)
def default_triple(w: SpectralWindow) -> TransformTriple:
    return windowed_pair(w)


@lru_cache(maxsize=16)
def default_defect_triple(w: SpectralWindow) -> TransformTriple:
    return defect_multiplier(default_triple(w))


# ---------------------------------------------------------------------------
# asymptotic forms

def kappa_asymptotic(w: SpectralWindow, s: float, p: NakPoint) -> complex:
    F = FejerKernel(w.L)
    pre = math.pi / abs(s) * _CHI(p.x) * math.exp(p.t / 2)
    return complex(pre * (np.exp(1j * s * p.t) * F(2 * p.theta)
                          + np.exp(-1j * s * p.t) * F(math.pi - 2 * p.theta)))


def angular_factor(w: SpectralWindow, theta):
    F = FejerKernel(w.L)
    theta = np.asarray(theta, dtype=float)
    return F(2 * theta) + F(math.pi - 2 * theta)


def main_term(w: SpectralWindow, x, t, theta, profile_t):
    """pi chi(x) e^{t/2} [F(2 theta) + F(pi - 2 theta)] * profile_t."""
    return math.pi * _CHI(np.asarray(x)) * np.exp(np.asarray(t) / 2) * angular_factor(w, theta) * profile_t


def _asymptotic_full(w, p, tri):
    prof = tri.tanh_transform(p.t)
    val = main_term(w, p.x, p.t, p.theta, prof)
    s, ws, hv, tail, _ = tri.spectral_nodes
    budget = math.pi * math.exp(p.t / 2) * float(angular_factor(w, p.theta)) * tail / math.pi
    return complex(val), float(budget)


# ---------------------------------------------------------------------------
# quadrature planning

COARSE_N, COARSE_A = 32, 64
CAP = math.pi / 2


def _cell_layout(x, nn=COARSE_N, na=COARSE_A):
    ne = np.linspace(x - 1.0, x + 1.0, nn + 1)
    ae = np.linspace(0.0, math.pi, na + 1)
    n_lo, a_lo = np.meshgrid(ne[:-1], ae[:-1], indexing="ij")
    n_hi, a_hi = np.meshgrid(ne[1:], ae[1:], indexing="ij")
    return n_lo.ravel(), n_hi.ravel(), a_lo.ravel(), a_hi.ravel()


def _cell_samples(n_lo, n_hi, a_lo, a_hi, t, m=9):
    """|dlogD/dn|, |dlogD/da| maxima and logD range per cell."""
    f = np.linspace(0.0, 1.0, m)
    n = n_lo[:, None, None] + (n_hi - n_lo)[:, None, None] * f[None, :, None]
    a = a_lo[:, None, None] + (a_hi - a_lo)[:, None, None] * f[None, None, :]
    et, emt = math.exp(t), math.exp(-t)
    s2, c2, sa2 = np.sin(2 * a), np.cos(2 * a), np.sin(a) ** 2
    D = et * np.cos(a) ** 2 + n * s2 + emt * (n * n + 1) * sa2
    Dn = s2 + 2 * n * emt * sa2
    Da = s2 * (emt * (n * n + 1) - et) + 2 * n * c2
    gn = np.max(np.abs(Dn / D), axis=(1, 2))
    ga = np.max(np.abs(Da / D), axis=(1, 2))
    lg = np.log(D)
    lo, hi = lg.min(axis=(1, 2)), lg.max(axis=(1, 2))
    # pad by the sample spacing times the gradient bound
    pad = (gn * (n_hi - n_lo) + ga * (a_hi - a_lo)) / (m - 1)
    return gn, ga, lo - pad, hi + pad


def _subdivisions(freq, width, cap):
    return np.maximum(1, np.ceil(freq * width / cap)).astype(np.int64)


def _adaptive(cells, p, L, pref, mode, s, table, tol, freq_n, freq_a,
              max_rounds=6, panel_budget=4e7, refine=1):
    n_lo, n_hi, a_lo, a_hi = cells
    kn = refine * _subdivisions(freq_n, n_hi - n_lo, CAP)
    ka = refine * _subdivisions(freq_a, a_hi - a_lo, CAP)
    res = _quad.run_cells((n_lo, n_hi, a_lo, a_hi, kn, ka), p.x, p.t, p.theta, s, L, pref, mode, table)
    for _ in range(max_rounds):
        err_cells = res[:, 2] + 1e-15 * res[:, 3]
        total = float(np.sum(err_cells))
        if total <= tol:
            break
        bad = err_cells > tol / err_cells.size
        if not np.any(bad):
            bad = err_cells >= np.max(err_cells)
        kn = np.where(bad, 2 * kn, kn)
        ka = np.where(bad, 2 * ka, ka)
        if float(np.sum(kn * ka)) > panel_budget:
            break
        idx = np.nonzero(bad)[0]
        sub = (n_lo[idx], n_hi[idx], a_lo[idx], a_hi[idx], kn[idx], ka[idx])
        res[idx] = _quad.run_cells(sub, p.x, p.t, p.theta, s, L, pref, mode, table)
    val = complex(np.sum(res[:, 0]), np.sum(res[:, 1]))
    err = float(np.sum(res[:, 2] + 1e-15 * res[:, 3]))
    meta = {"panels": int(np.sum(kn * ka)), "rounds": _ + 1}
    return val, err, meta


def kappa_spectral(w: SpectralWindow, s: float, p: NakPoint, tol: float = 1e-8,
                   return_meta: bool = False, refine: int = 1):
    """Double oscillatory integral for the spectral component s; (value, err_est).

    ``refine`` divides every initial panel width by that factor.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    F = FejerKernel(w.L)
    cells = _cell_layout(p.x)
    gn, ga, _, _ = _cell_samples(*cells, p.t)
    freq_n = (abs(s) + 1) * gn * 1.25 + 20.0
    freq_a = (abs(s) + 1) * ga * 1.25 + 2.0 * w.L
    val, err, meta = _adaptive(cells, p, w.L, F.prefactor, 0, s, None, tol, freq_n, freq_a,
                               refine=refine)
    if err > tol:
        raise ToleranceNotMet(f"kappa_spectral reached err {err:.3g} > tol {tol:.3g}", val, err)
    return (val, err, meta) if return_meta else (val, err)


# ---------------------------------------------------------------------------
# W table and full kernel

@dataclass(frozen=True, eq=False)
class WTable:
    phi0: float
    dphi: float
    values: np.ndarray
    slopes: np.ndarray
    bandwidth: float
    interp_err: float

    def __call__(self, phi):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        out = np.array([_quad.hermite_eval(v, self.phi0, self.dphi, self.values, self.slopes)
                        for v in phi.ravel()])
        return out.reshape(phi.shape)

    def packed(self):
        return (self.phi0, self.dphi, self.values, self.slopes)


def hilbert_w(tri: TransformTriple, phi, deriv: int = 0, panels: int = 64, order: int = 16):
    """-(1/pi) p.v. int_{-R}^{R} g^{(1+deriv)}(u)/(u - phi) du minus the tanh correction.

    Equal to (1/pi) int_0^inf s h(s) tanh(pi s) (d/dphi)^deriv cos(s phi) ds.
    """
    R = tri.support_radius
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    radii = [q for q in tri.profile.support_radii() if q <= R] or [R]
    edges = np.unique(np.concatenate([np.linspace(-q, q, panels + 1) for q in radii] + [[-R, R]]))
    u, wu = gauss_panels(edges, order)
    f_u = tri.g_derivs(u, 1 + deriv)[1 + deriv]
    inside = np.abs(phi) < R
    pc = np.where(inside, phi, 0.0)
    fd = tri.g_derivs(pc, 2 + deriv)
    f_phi, df_phi = np.where(inside, fd[1 + deriv], 0.0), np.where(inside, fd[2 + deriv], 0.0)
    out = np.empty(phi.shape)
    for i0 in range(0, phi.size, 512):
        sl = slice(i0, i0 + 512)
        ph = phi[sl][:, None]
        diff = u[None, :] - ph
        close = np.abs(diff) < 1e-9 * R
        num = f_u[None, :] - f_phi[sl][:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            q = np.where(close, df_phi[sl][:, None], num / np.where(close, 1.0, diff))
        pv = q @ wu
        with np.errstate(invalid="ignore", divide="ignore"):
            logt = np.where(inside[sl], np.log(np.abs((R - phi[sl]) / (R + phi[sl]))), 0.0)
        out[sl] = pv + f_phi[sl] * logt
    w0 = -out / math.pi
    # remove (1/pi) int s h (1 - tanh) (d/dphi)^deriv cos(s phi) ds on [0, 8]
    s, ws = gauss_panels(np.linspace(0.0, 8.0, 33), 16)
    coef = ws * s * tri.h(s) * (1.0 - tanh_pi(s)) / math.pi
    if deriv == 0:
        corr = np.cos(np.outer(phi, s)) @ coef
    else:
        corr = -np.sin(np.outer(phi, s)) @ (coef * s)
    return w0 - corr


def _bandwidth(tri: TransformTriple, frac: float = 1e-4) -> float:
    """s below which all but ``frac`` of int |s h(s)| ds lies."""
    s, ws, hv, _, _ = tri.spectral_nodes
    mass = np.cumsum(np.abs(s * hv) * ws)
    if mass[-1] == 0:
        return 1.0
    idx = int(np.searchsorted(mass, (1 - frac) * mass[-1]))
    return float(s[min(idx, s.size - 1)])


_TABLES: "weakref.WeakKeyDictionary[TransformTriple, WTable]" = weakref.WeakKeyDictionary()


def w_table(tri: TransformTriple, phi_max: float) -> WTable:
    cached = _TABLES.get(tri)
    if cached is not None and cached.phi0 <= -phi_max:
        return cached
    phi_max = math.ceil(phi_max * 2) / 2 + 0.5
    bw = _bandwidth(tri)
    dphi = min(0.1 / bw, 1e-3)
    n = int(math.ceil(2 * phi_max / dphi))
    grid = -phi_max + dphi * np.arange(n + 1)
    vals = hilbert_w(tri, grid, 0)
    slopes = hilbert_w(tri, grid, 1)
    # interpolation check at midpoints of a strided subset
    mids = grid[:-1:max(1, n // 2000)] + dphi / 2
    direct = hilbert_w(tri, mids, 0)
    tab = WTable(float(grid[0]), float(dphi), vals, slopes, bw, 0.0)
    err = float(np.max(np.abs(tab(mids) - direct)))
    tab = WTable(float(grid[0]), float(dphi), vals, slopes, bw, err)
    _TABLES[tri] = tab
    return tab


def _phi_extent(x, t):
    n = abs(x) + 1.0
    ch = 0.5 * (math.exp(t) + math.exp(-t) * (n * n + 1))
    return math.acosh(max(ch, 1.0)) + 0.05


def _full_quadrature(w, p, tri, tol):
    F = FejerKernel(w.L)
    table = w_table(tri, _phi_extent(p.x, p.t))
    cells = _cell_layout(p.x, 2 * COARSE_N, 2 * COARSE_A)
    gn, ga, lo, hi = _cell_samples(*cells, p.t)
    band = tri.support_radius
    dist = np.maximum(0.0, np.maximum(lo, -hi) - band)
    s_eff = np.minimum(table.bandwidth, 3.0 / np.maximum(dist, 1e-12))
    freq_n = (s_eff + 1) * gn * 1.25 + 20.0
    freq_a = (s_eff + 1) * ga * 1.25 + 2.0 * w.L
    val, err, meta = _adaptive(cells, p, w.L, F.prefactor, 1, 0.0, table.packed(), tol, freq_n, freq_a)
    # table interpolation error times the integrated amplitude
    amp = math.pi * 2 * 2 * F(0.0) * math.exp(abs(p.t) / 2 + 1)
    err += table.interp_err * amp
    meta["table_points"] = table.values.size
    return val.real, err, meta


def kappa_full(w: SpectralWindow, p: NakPoint, tol: float = 1e-6, mode: str = "quadrature",
               tri: TransformTriple | None = None, return_meta: bool = False):
    """Full kernel: (1/2pi) int kappa_s h(s) s tanh(pi s) ds; returns (value, err_est).

    ``mode="asymptotic"`` substitutes the stationary-phase component, which
    integrates in s to pi chi(x) e^{t/2} [F(2 theta) + F(pi - 2 theta)] g_tanh(t)
    with g_tanh(t) = (1/pi) int_0^inf h tanh(pi s) cos(st) ds.
    """
    tri = tri or default_triple(w)
    if mode == "asymptotic":
        val, err = _asymptotic_full(w, p, tri)
        meta = {}
    elif mode == "quadrature":
        val, err, meta = _full_quadrature(w, p, tri, tol)
        if err > tol:
            raise ToleranceNotMet(f"kappa_full reached err {err:.3g} > tol {tol:.3g}", val, err)
        val = complex(val)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return (val, err, meta) if return_meta else (val, err)


def defect_kappa_full(w: SpectralWindow, p: NakPoint, tol: float = 1e-4, mode: str = "quadrature",
                      tri: TransformTriple | None = None, return_meta: bool = False):
    """Full kernel of the defect multiplier (r^2 - s^2) h(s)."""
    dtri = default_defect_triple(w) if tri is None else defect_multiplier(tri)
    return kappa_full(w, p, tol, mode, dtri, return_meta)


# ---------------------------------------------------------------------------
# batch evaluation

def evaluate_lift_field(w: SpectralWindow, points, variant: str = "full_kappa", s: float | None = None,
                        mode: str = "asymptotic", tol: float = 1e-6, threads: int = 1) -> LiftField:
    points = list(points)
    if variant == "spectral_component":
        if s is None:
            raise ValueError("spectral_component needs s")

        def one(p):
            if mode == "asymptotic":
                return kappa_asymptotic(w, s, p), 0.0
            return kappa_spectral(w, s, p, tol)
    elif variant == "full_kappa":
        tri = default_triple(w)

        def one(p):
            return kappa_full(w, p, tol, mode, tri)
    elif variant == "defect_kappa":
        tri = default_defect_triple(w)

        def one(p):
            return kappa_full(w, p, tol, mode, tri)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(one, points))
    else:
        out = [one(p) for p in points]
    vals = np.array([complex(v) for v, _ in out])
    errs = np.array([float(e) for _, e in out])
    return LiftField(w, points, vals, errs, variant, s)
