"""Spectral window, Fourier pairs and the radial kernel.

Conventions: h(s) = int e^{ist} g(t) dt with g even and real, and
g(t) = 2 Q(sinh^2(t/2)), k(u) = -(1/pi) int_u^inf dQ(w)/sqrt(w - u).

The explicit pair is

    h~(s) = cosh(s/2K) cosh(r/2K) / (cosh(s/K) + cosh(r/K)),
    g~(t) = (K/2) cos(r t) / cosh(pi K t),

and the windowed pair multiplies g~ by chi(t/T) with T = log(r)/C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from ._numerics import cosine_sum, gauss_panels, tanh_pi
from ._taylor import Jet
from .errors import GridTooCoarse, OverflowGuardFailure, ValidationError

TWO_PI = 2 * math.pi
DEFAULT_L_XI = TWO_PI / 16


# ---------------------------------------------------------------------------
# resonance helpers

def resonance_index(r: float, l_xi: float) -> float:
    return r * l_xi / TWO_PI


def resonant_r(l_xi: float, near: float) -> float:
    """Resonant r = 2 pi k / l_xi with integer k >= 1 closest to ``near``."""
    k = max(1, int(round(near * l_xi / TWO_PI)))
    return TWO_PI * k / l_xi


def is_resonant(r: float, l_xi: float, tol: float = 1e-9) -> bool:
    q = resonance_index(r, l_xi)
    return abs(q - round(q)) <= tol and round(q) >= 1


# ---------------------------------------------------------------------------
# cutoff

def _logistic(u):
    e = np.exp(-np.abs(u))
    return np.where(u >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass(frozen=True)
class SmoothCutoff:
    """Even bump: 1 on |x| <= 1/2, 0 on |x| >= 1, smooth step in between.

    On the transition chi(x) = 1 - S(2|x| - 1) with
    S(y) = e^{-1/y} / (e^{-1/y} + e^{-1/(1-y)}) = logistic(1/(1-y) - 1/y).
    """

    inner: float = 0.5
    outer: float = 1.0

    def _y(self, ax):
        return (ax - self.inner) / (self.outer - self.inner)

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        mid = (ax > self.inner) & (ax < self.outer)
        y = np.where(mid, self._y(ax), 0.5)
        step = _logistic(1.0 / (1.0 - y) - 1.0 / y)
        out = np.where(ax <= self.inner, 1.0, 0.0)
        out = np.where(mid, 1.0 - step, out)
        return float(out) if out.ndim == 0 else out

    def jet(self, xj: Jet) -> Jet:
        x0 = xj.c[0]
        ax = np.abs(x0)
        mid = (ax > self.inner) & (ax < self.outer)
        sgn = np.where(x0 >= 0, 1.0, -1.0)
        yj = (xj * sgn - self.inner) * (1.0 / (self.outer - self.inner))
        yj.c[0] = np.where(mid, yj.c[0], 0.5)
        u = (1.0 - yj).recip() - yj.recip()
        out = 1.0 - u.logistic()
        inner = ax <= self.inner
        out.c[0] = np.where(mid, out.c[0], np.where(inner, 1.0, 0.0))
        out.c[1:] = np.where(mid, out.c[1:], 0.0)
        return out

    def derivatives(self, x, order: int) -> np.ndarray:
        return self.jet(Jet.variable(x, order)).derivatives()

    def hat(self, omega, nodes: int = 400) -> np.ndarray:
        """chi^(omega) = int chi(x) e^{i omega x} dx (real by evenness)."""
        omega = np.asarray(omega, dtype=float)
        xs, ws = gauss_panels(np.linspace(self.inner, self.outer, nodes // 20 + 1), 20)
        vals = self(xs) * ws
        flat = np.atleast_1d(omega).ravel()
        with np.errstate(invalid="ignore", divide="ignore"):
            core = np.where(np.abs(flat) < 1e-12, 2 * self.inner,
                            2 * np.sin(flat * self.inner) / np.where(flat == 0, 1, flat))
        trans = 2 * (np.cos(np.outer(flat, xs)) @ vals)
        return (core + trans).reshape(omega.shape)


# ---------------------------------------------------------------------------
# spectral window

@dataclass(frozen=True)
class SpectralWindow:
    """(r, C, K, L, l_xi) for one quasimode construction."""

    r: float
    C: float = 200.0
    l_xi: float = DEFAULT_L_XI
    L_override: int | None = None
    L_cap: int = 4096
    check_resonance: bool = True
    K: float = field(init=False)
    T: float = field(init=False)
    L: int = field(init=False)
    L_uncapped: int = field(init=False)

    def __post_init__(self):
        if not (self.r > 1 and self.C > 0 and self.l_xi > 0):
            raise ValidationError("window needs r > 1, C > 0, l_xi > 0")
        if self.check_resonance and not is_resonant(self.r, self.l_xi):
            near = resonant_r(self.l_xi, self.r)
            raise ValidationError(
                f"r*l_xi must lie in 2*pi*Z; r={self.r!r} is not resonant, nearest resonant r={near!r}")
        logr = math.log(self.r)
        object.__setattr__(self, "K", self.C / (2 * logr))
        object.__setattr__(self, "T", logr / self.C)
        raw = self.L_override if self.L_override is not None else int(math.floor(self.r ** (10 / self.C)))
        raw = max(1, int(raw))
        object.__setattr__(self, "L_uncapped", raw)
        object.__setattr__(self, "L", min(raw, self.L_cap))

    @property
    def L_capped(self) -> bool:
        return self.L < self.L_uncapped

    @property
    def log_r(self) -> float:
        return math.log(self.r)

    def as_dict(self) -> dict:
        return {"r": self.r, "C": self.C, "K": self.K, "T": self.T, "L": self.L,
                "L_uncapped": self.L_uncapped, "L_capped": self.L_capped,
                "l_xi": self.l_xi, "resonance_index": resonance_index(self.r, self.l_xi)}


# ---------------------------------------------------------------------------
# even profiles g(t) with derivatives

class Profile:
    """Even real function with derivatives ``derivs(t, order)``."""

    support = math.inf
    analytic = True

    def derivs(self, t, order: int) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def __call__(self, t):
        return self.derivs(t, 0)[0]

    def __add__(self, other):
        return SumProfile(self, other, 1.0, 1.0)

    def support_radii(self) -> tuple:
        """Support radii of the summands, so quadratures can resolve each scale."""
        return (self.support,)

    def scaled(self, c):
        return SumProfile(self, self, float(c), 0.0)


class ModelProfile(Profile):
    def __init__(self, r, K):
        self.r, self.K = float(r), float(K)
        # sech(pi K t) < 1e-18 beyond this radius
        self.support = 42.0 / (math.pi * self.K)

    def jet(self, tj: Jet) -> Jet:
        return (tj * self.r).cos() * (tj * (math.pi * self.K)).sech() * (0.5 * self.K)

    def derivs(self, t, order):
        return self.jet(Jet.variable(t, order)).derivatives()


class WindowedProfile(ModelProfile):
    def __init__(self, r, K, T, chi: SmoothCutoff):
        super().__init__(r, K)
        self.T, self.chi = float(T), chi
        self.support = self.T

    def jet(self, tj: Jet) -> Jet:
        return super().jet(tj) * self.chi.jet(tj * (1.0 / self.T))


class DefectProfile(Profile):
    """r^2 g + g'' for a base profile g."""

    def __init__(self, base: Profile, r):
        self.base, self.r = base, float(r)
        self.support = base.support
        self.analytic = base.analytic

    def derivs(self, t, order):
        d = self.base.derivs(t, order + 2)
        return self.r ** 2 * d[: order + 1] + d[2:]

    def support_radii(self):
        return self.base.support_radii()


class SumProfile(Profile):
    def __init__(self, p1, p2, c1, c2):
        self.p1, self.p2, self.c1, self.c2 = p1, p2, c1, c2
        self.support = max(p1.support, p2.support)
        self.analytic = p1.analytic and p2.analytic

    def support_radii(self):
        radii = self.p1.support_radii() + (self.p2.support_radii() if self.c2 else ())
        return tuple(sorted(set(radii)))

    def derivs(self, t, order):
        out = self.c1 * self.p1.derivs(t, order)
        if self.c2:
            out = out + self.c2 * self.p2.derivs(t, order)
        return out


class SampledProfile(Profile):
    """Profile known only through half-grid samples (cubic spline)."""

    analytic = False

    def __init__(self, t_half, g_half):
        t_half = np.asarray(t_half, dtype=float)
        self.t, self.g = t_half, np.asarray(g_half, dtype=float)
        self.support = float(t_half[-1])
        self._spline = CubicSpline(t_half, self.g)

    def derivs(self, t, order):
        t = np.abs(np.asarray(t, dtype=float))
        inside = t <= self.support
        tt = np.where(inside, t, self.support)
        out = []
        for k in range(min(order, 3) + 1):
            out.append(np.where(inside, self._spline(tt, k), 0.0))
        while len(out) < order + 1:
            out.append(np.zeros_like(tt))
        return np.stack(out)


# ---------------------------------------------------------------------------
# h evaluators

def model_h(s, r, K):
    """Overflow-safe h~(s) from log-space evaluation of the cosh ratio."""
    s = np.asarray(s, dtype=float)

    def logcosh(x):
        ax = np.abs(x)
        return ax + np.log1p(np.exp(-2 * ax)) - math.log(2.0)

    with np.errstate(over="raise", invalid="raise"):
        try:
            lh = (logcosh(s / (2 * K)) + logcosh(r / (2 * K))
                  - np.logaddexp(logcosh(s / K), logcosh(r / K)))
            out = np.exp(lh)
        except FloatingPointError as exc:
            raise OverflowGuardFailure(f"model pair out of range at r={r}, K={K}") from exc
    if not np.all(np.isfinite(out)):
        raise OverflowGuardFailure(f"model pair out of range at r={r}, K={K}")
    return out


class _ModelH:
    def __init__(self, r, K):
        self.r, self.K = r, K

    def __call__(self, s):
        return model_h(s, self.r, self.K)

    def noise(self, s):
        return np.zeros(np.shape(s))


class _FourierH:
    """h(s) = 2 int_0^R g(t) cos(st) dt by the trapezoid rule on the half grid."""

    def __init__(self, g_half, dt):
        w = 2.0 * dt * np.asarray(g_half, dtype=float)
        w[0] *= 0.5
        w[-1] *= 0.5
        self.weights, self.dt = w, dt

    def __call__(self, s):
        return cosine_sum(self.weights, self.dt, s)

    def noise(self, s):
        # rounding floor of the cosine sum
        return np.full(np.shape(s), 4e-16 * float(np.sum(np.abs(self.weights))))


class _MultipliedH:
    def __init__(self, base, r):
        self.base, self.r = base, r

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return (self.r ** 2 - s ** 2) * self.base(s)

    def noise(self, s):
        s = np.asarray(s, dtype=float)
        return np.abs(self.r ** 2 - s ** 2) * self.base.noise(s)


class _SumH:
    def __init__(self, h1, h2, c1, c2):
        self.h1, self.h2, self.c1, self.c2 = h1, h2, c1, c2

    def __call__(self, s):
        out = self.c1 * self.h1(s)
        if self.c2:
            out = out + self.c2 * self.h2(s)
        return out

    def noise(self, s):
        return abs(self.c1) * self.h1.noise(s) + abs(self.c2) * self.h2.noise(s)


# ---------------------------------------------------------------------------
# transform triple

@dataclass(frozen=True, eq=False)
class TransformTriple:
    """Sampled (g, h) pair with the underlying evaluators kept alongside.

    ``g_t``/``g_vals`` hold the half grid t >= 0 (g is even); ``h_s``/``h_vals``
    the h grid on [0, S_max].
    """

    window: SpectralWindow
    kind: str
    profile: Profile
    h_eval: object
    g_t: np.ndarray
    g_vals: np.ndarray
    h_s: np.ndarray
    h_vals: np.ndarray
    support_radius: float
    dt: float
    ds: float
    decay_constant: float
    h_tail_budget: float
    multiplier_r: float | None = None

    # evaluation -----------------------------------------------------------
    def g(self, t):
        return self.profile(t)

    def g_derivs(self, t, order):
        return self.profile.derivs(t, order)

    def h(self, s):
        out = self.h_eval(s)
        return float(out) if np.ndim(out) == 0 else out

    def g_full(self):
        """Mirrored samples on the symmetric grid [-R, R]."""
        t = np.concatenate([-self.g_t[:0:-1], self.g_t])
        g = np.concatenate([self.g_vals[:0:-1], self.g_vals])
        return t, g

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: "TransformTriple") -> "TransformTriple":
        return _combine(self, other, 1.0, 1.0)

    def __rmul__(self, c) -> "TransformTriple":
        return _combine(self, self, float(c), 0.0)

    # spectral integrals ---------------------------------------------------
    @cached_property
    def spectral_nodes(self):
        """Composite Gauss-Legendre nodes on [0, S_max] with h values."""
        return _spectral_nodes(self)

    def tanh_transform(self, t, power: int = 0):
        """(1/pi) int_0^inf s^power h(s) tanh(pi s) cos(st) ds (power even)."""
        s, w, hv, _, _ = self.spectral_nodes
        coef = w * hv * tanh_pi(s) * s ** power / math.pi
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        out = np.empty(flat.shape)
        for i0 in range(0, flat.size, 256):
            blk = flat[i0:i0 + 256]
            out[i0:i0 + 256] = np.cos(np.outer(blk, s)) @ coef
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def tanh_correction(self, t):
        """(1/pi) int_0^inf h(s) (1 - tanh(pi s)) cos(st) ds."""
        s, w = gauss_panels(np.linspace(0.0, 8.0, 33), 16)
        coef = w * self.h(s) * (1.0 - tanh_pi(s)) / math.pi
        t = np.asarray(t, dtype=float)
        out = np.cos(np.multiply.outer(t, s)) @ coef
        return float(out) if np.ndim(out) == 0 else out


def _combine(a: TransformTriple, b: TransformTriple, ca: float, cb: float) -> TransformTriple:
    if a.window != b.window:
        raise ValidationError("cannot combine triples built on different windows")
    prof = SumProfile(a.profile, b.profile, ca, cb)
    heval = _SumH(a.h_eval, b.h_eval, ca, cb)
    if cb and (a.g_t.shape != b.g_t.shape or not np.allclose(a.g_t, b.g_t)):
        t = a.g_t if a.g_t[-1] >= b.g_t[-1] else b.g_t
    else:
        t = a.g_t
    h_s = a.h_s
    return TransformTriple(
        window=a.window, kind="combination", profile=prof, h_eval=heval,
        g_t=t, g_vals=prof(t), h_s=h_s, h_vals=heval(h_s),
        support_radius=max(a.support_radius, b.support_radius if cb else 0.0),
        dt=float(t[1] - t[0]), ds=a.ds,
        decay_constant=abs(ca) * a.decay_constant + abs(cb) * b.decay_constant,
        h_tail_budget=abs(ca) * a.h_tail_budget + abs(cb) * b.h_tail_budget,
        multiplier_r=None)


def _h_grid(w: SpectralWindow):
    ds = w.K / 16
    n = int(math.ceil((w.r + 40 * w.K) / ds))
    return np.arange(n + 1) * ds, ds


def _decay_fit(s, h, r):
    far = np.abs(r - s) >= 10
    if not np.any(far):
        return 0.0
    return float(np.max(np.abs(h[far]) * np.abs(r - s[far]) ** 3))


def _tail_budget(c, w):
    # int_{|s - r| > 40K} c |s - r|^{-3} ds, one or two sides
    edge = 40 * w.K
    sides = 2 if w.r - edge > 0 else 1
    return sides * c / (2 * edge ** 2)


def model_pair(w: SpectralWindow) -> TransformTriple:
    prof = ModelProfile(w.r, w.K)
    R = prof.support
    dt = min(0.05 / w.r, R / 4096)
    t = np.arange(int(math.ceil(R / dt)) + 1) * dt
    heval = _ModelH(w.r, w.K)
    h_s, ds = _h_grid(w)
    h_vals = heval(h_s)
    # h~ <= (1/2) sech((s - r)/2K) beyond the grid
    tail = 2 * w.K * math.exp(-40 * w.K / (2 * w.K)) * 2
    return TransformTriple(w, "model", prof, heval, t, prof(t), h_s, h_vals, R, dt, ds,
                           _decay_fit(h_s, h_vals, w.r), tail)


def windowed_pair(w: SpectralWindow, chi: SmoothCutoff | None = None) -> TransformTriple:
    chi = chi or SmoothCutoff()
    prof = WindowedProfile(w.r, w.K, w.T, chi)
    dt = min(0.05 / w.r, w.T / 4096)
    n = int(math.ceil(w.T / dt))
    dt = w.T / n
    t = np.arange(n + 1) * dt
    g = prof(t)
    heval = _FourierH(g, dt)
    h_s, ds = _h_grid(w)
    h_vals = heval(h_s)
    c = _decay_fit(h_s, h_vals, w.r)
    return TransformTriple(w, "windowed", prof, heval, t, g, h_s, h_vals, w.T, dt, ds,
                           c, _tail_budget(c, w))


def sampled_pair(w: SpectralWindow, t_half, g_half, kind: str = "sampled") -> TransformTriple:
    """Triple from half-grid samples of an even g (uniform grid from t = 0)."""
    t_half = np.asarray(t_half, dtype=float)
    g_half = np.asarray(g_half, dtype=float)
    dt = float(t_half[1] - t_half[0])
    prof = SampledProfile(t_half, g_half)
    heval = _FourierH(g_half, dt)
    h_s, ds = _h_grid(w)
    h_vals = heval(h_s)
    c = _decay_fit(h_s, h_vals, w.r)
    return TransformTriple(w, kind, prof, heval, t_half, g_half, h_s, h_vals,
                           float(t_half[-1]), dt, ds, c, _tail_budget(c, w))


def defect_multiplier(tri: TransformTriple, r: float | None = None) -> TransformTriple:
    """Triple with h -> (r^2 - s^2) h and g -> r^2 g + g''."""
    r = tri.window.r if r is None else float(r)
    prof = DefectProfile(tri.profile, r)
    heval = _MultipliedH(tri.h_eval, r)
    h_vals = (r ** 2 - tri.h_s ** 2) * tri.h_vals
    c = _decay_fit(tri.h_s, h_vals, r)
    return TransformTriple(tri.window, "defect", prof, heval, tri.g_t, prof(tri.g_t),
                           tri.h_s, h_vals, tri.support_radius, tri.dt, tri.ds,
                           c, _tail_budget(c, tri.window), multiplier_r=r)


def peak_offset(tri: TransformTriple) -> float:
    """argmax of sampled h minus r, in units of the h-grid step."""
    i = int(np.argmax(tri.h_vals))
    return (tri.h_s[i] - tri.window.r) / tri.ds


def H_profile(xi, chi: SmoothCutoff | None = None, order: int = 2) -> np.ndarray:
    """H(xi) = chi(2 xi) / (2 cosh(pi xi)) and its first ``order`` derivatives."""
    chi = chi or SmoothCutoff()
    xj = Jet.variable(xi, order)
    return (chi.jet(xj * 2.0) * (xj * math.pi).sech() * 0.5).derivatives()


def defect_closed_form(w: SpectralWindow, t, chi: SmoothCutoff | None = None) -> np.ndarray:
    """-2 r K^2 sin(rt) H'(Kt) + K^3 cos(rt) H''(Kt), exactly r^2 g + g''."""
    t = np.asarray(t, dtype=float)
    H = H_profile(w.K * t, chi, 2)
    return (-2 * w.r * w.K ** 2 * np.sin(w.r * t) * H[1]
            + w.K ** 3 * np.cos(w.r * t) * H[2])


def convolved_window_h(w: SpectralWindow, s, chi: SmoothCutoff | None = None,
                       reach: float = 60.0) -> np.ndarray:
    """(1/2pi) int h~(s - sigma) T chi^(T sigma) d sigma (convolution route)."""
    chi = chi or SmoothCutoff()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty(s.shape)
    for i, si in enumerate(s):
        lo, hi = si - w.r - reach * w.K, si + w.r + reach * w.K
        npan = int(math.ceil((hi - lo) / (w.K / 4)))
        sig, ws = gauss_panels(np.linspace(lo, hi, npan + 1), 16)
        vals = model_h(si - sig, w.r, w.K) * w.T * chi.hat(w.T * sig)
        out[i] = float(np.sum(vals * ws)) / TWO_PI
    return out


# ---------------------------------------------------------------------------
# spectral quadrature

def _spectral_nodes(tri: TransformTriple):
    """Nodes on [0, S_max]; S_max is where int |h| over [S, 2S] is negligible."""
    w = tri.window
    mass = float(np.sum(np.abs(tri.h_vals))) * tri.ds or 1.0
    S = w.r + 40 * w.K
    S_cap = 2.0e5
    while S < S_cap:
        probe = np.linspace(S, 2 * S, 257)
        hp = np.abs(tri.h(probe))
        floor = tri.h_eval.noise(probe)
        if np.mean(hp) * S < 1e-10 * mass or np.all(hp < 20 * floor):
            break
        S *= 2
    S_max = min(S, S_cap)
    width = min(w.K / 2, 0.5 / max(tri.support_radius, 1e-12), 10.0)
    near = np.linspace(0.0, 8.0, 33)
    far = np.linspace(8.0, S_max, int(math.ceil((S_max - 8.0) / width)) + 1)
    edges = np.concatenate([near, far[1:]])
    s, ws = gauss_panels(edges, 16)
    hv = tri.h(s)
    probe = np.linspace(S_max, 2 * S_max, 257)
    tail = float(np.mean(np.abs(tri.h(probe)))) * S_max
    return s, ws, hv, tail, edges


def spectral_tail_bound(tri: TransformTriple, refine: int = 1) -> float:
    """int_0^inf s^{-1} h(s) tanh(pi s) ds."""
    s, ws, hv, _, edges = tri.spectral_nodes
    if refine > 1:
        frac = np.linspace(0.0, 1.0, refine + 1)[:-1]
        edges = np.append((edges[:-1, None] + np.diff(edges)[:, None] * frac).ravel(), edges[-1])
        s, ws = gauss_panels(edges, 16)
        hv = tri.h(s)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(s > 1e-12, tanh_pi(s) / s, math.pi)
    return float(np.sum(ws * hv * ratio))


# ---------------------------------------------------------------------------
# radial kernel

@dataclass(frozen=True)
class RadialKernel:
    u: np.ndarray
    k: np.ndarray
    omega_max: float
    err_est: float
    _qprime: object = field(repr=False, default=None)
    _order: int = 96

    def __call__(self, u):
        return abs_transform(self._qprime, np.asarray(u, dtype=float), self.omega_max, self._order)


def abs_transform(qprime, u, omega_max, order=96):
    """k(u) = -(2/pi) int_0^{sqrt(W - u)} Q'(u + v^2) dv with v = sqrt(u) sinh(w)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.zeros(u.shape)
    x, wx = np.polynomial.legendre.leggauss(order)
    for i, ui in enumerate(u.ravel()):
        if ui >= omega_max or ui <= 0:
            continue
        wmax = math.asinh(math.sqrt((omega_max - ui) / ui))
        edges = np.linspace(0.0, wmax, 9)
        ww, wq = gauss_panels(edges, order // 8 if order >= 16 else order)
        ch = np.cosh(ww)
        vals = qprime(ui * ch * ch) * math.sqrt(ui) * ch
        out.flat[i] = -2.0 / math.pi * float(np.sum(vals * wq))
    return out


def _qprime_from_spline(spline, support):
    """Q'(w) = g'(t) / sinh(t) at t = 2 asinh(sqrt(w))."""
    def qp(om):
        om = np.asarray(om, dtype=float)
        t = 2 * np.arcsinh(np.sqrt(np.maximum(om, 0.0)))
        inside = t < support
        tt = np.where(inside, t, support)
        small = tt < 1e-6
        d1 = spline(tt, 1)
        d2 = spline(tt, 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.where(small, d2, d1 / np.sinh(np.where(small, 1.0, tt)))
        return np.where(inside, val, 0.0)
    return qp


def radial_kernel(tri: TransformTriple, n_u: int = 256, tol: float = 1e-6,
                  u_min_ratio: float = 1e-8, order: int = 96) -> RadialKernel:
    """Sampled k(u) on a log-spaced grid up to sinh^2(R/2), R the support."""
    R = tri.support_radius
    t, g = tri.g_t, tri.g_vals
    smooth = tri.profile.analytic
    bc = ((1, 0.0), "not-a-knot") if smooth else "not-a-knot"
    fine = CubicSpline(t, g, bc_type=bc)
    coarse = CubicSpline(t[::2], g[::2], bc_type=bc) if t.size > 8 else fine
    mid = 0.5 * (t[1:] + t[:-1])
    scale = float(np.max(np.abs(fine(t, 1)))) or 1.0
    # derivative of a cubic spline converges like step^3: scale the coarse gap
    err = float(np.max(np.abs(fine(mid, 1) - coarse(mid, 1)))) / scale / 8.0
    if err > tol:
        raise GridTooCoarse(f"Q interpolation error estimate {err:.3g} exceeds {tol:.3g}")
    omega_max = math.sinh(R / 2) ** 2
    qp = _qprime_from_spline(fine, R)
    u = omega_max * np.logspace(math.log10(u_min_ratio), 0, n_u)
    u[-1] = omega_max
    k = abs_transform(qp, u, omega_max, order)
    return RadialKernel(u, k, omega_max, err, qp, order)


def spherical_function(s, rho, n_angles: int = 256) -> np.ndarray:
    """phi_s(rho) = (1/pi) int_0^pi y^{1/2 + is} d alpha, y = Im(k_alpha . i e^rho)."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    al = (np.arange(n_angles) + 0.5) * math.pi / n_angles
    er = np.exp(rho)[:, None]
    y = er / (np.cos(al) ** 2 + er ** 2 * np.sin(al) ** 2)
    vals = np.exp((0.5 + 1j * s) * np.log(y))
    return vals.mean(axis=1)


def radial_roundtrip(kern: RadialKernel, s, R: float, nodes: int = 400) -> np.ndarray:
    """2 pi int_0^R k(sinh^2(rho/2)) phi_s(rho) sinh(rho) d rho."""
    rho, wr = gauss_panels(np.linspace(0.0, R, nodes // 20 + 1), 20)
    kv = kern(np.sinh(rho / 2) ** 2)
    out = []
    for si in np.atleast_1d(s):
        phi = spherical_function(si, rho)
        out.append(2 * math.pi * np.sum(kv * phi.real * np.sinh(rho) * wr))
    return np.array(out)


def transform_check(w: SpectralWindow, s, chi: SmoothCutoff | None = None) -> dict:
    """Numerical cosine transforms of g~ and windowed g against their closed forms.

    Model pair: trapezoid transform of sampled g~ versus h~. Windowed pair:
    trapezoid transform of sampled g versus the convolution h~ * T chi^(T .).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    mp = model_pair(w)
    num_model = _FourierH(mp.g_vals, mp.dt)(s)
    ref_model = model_h(s, w.r, w.K)
    wp = windowed_pair(w, chi)
    num_win = wp.h(s)
    ref_win = convolved_window_h(w, s, chi)
    return {
        "s": s,
        "model_numeric": num_model, "model_closed": ref_model,
        "model_rel": np.abs(num_model - ref_model) / np.abs(ref_model),
        "windowed_numeric": num_win, "windowed_convolved": ref_win,
        "windowed_rel": np.abs(num_win - ref_win) / np.abs(ref_win),
    }
