"""Collar mass, total mass, quasimode defect and the dilution arithmetic.

Points of the cylinder are parameterized as a_tau n(y) k_theta with tau in one
period; Haar measure is d tau dy d theta there, and the translate a_{kl}
carries the point to NAK coordinates (y e^{kl + tau}, kl + tau, theta).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._numerics import gauss_panels
from .errors import InvalidGap
from .groups import CollarSpec, GroupModel, project_kappa
from .hyperbolic import a_elem, compose, k_elem, n_elem, nak_decompose
from .kernel import FejerKernel, angular_factor, default_defect_triple, default_triple
from .spectral import SmoothCutoff, SpectralWindow, TransformTriple, model_h, tanh_pi

_CHI = SmoothCutoff()


@dataclass(frozen=True)
class GridSpec:
    tau: int = 64
    y: int = 256
    theta: int = 64

    def halved(self) -> "GridSpec":
        return GridSpec(2 * self.tau, 2 * self.y, 2 * self.theta)


@dataclass
class MassReport:
    window: SpectralWindow
    collar_mass: float
    total_mass: float
    ratio: float
    tail_budget: float
    grid_spec: GridSpec
    collar_up: float = 0.0
    collar_down: float = 0.0
    total_up: float = 0.0
    total_down: float = 0.0
    off_collar: float = 0.0
    theta_marginal: float = 0.0
    eta: float = 0.1
    validation: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = self.window.as_dict()
        d["grid_spec"] = asdict(self.grid_spec)
        return d


@dataclass
class DefectReport:
    window: SpectralWindow
    defect_norm: float
    base_norm: float
    normalized_defect: float
    product_with_log: float
    closed_form_normalized_defect: float = 0.0
    route_gap: float = 0.0
    grid_spec: GridSpec = field(default_factory=GridSpec)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = self.window.as_dict()
        d["grid_spec"] = asdict(self.grid_spec)
        return d


# ---------------------------------------------------------------------------
# cylinder projection on tensor grids

def _tau_nodes(w: SpectralWindow, n: int, t_reach: float):
    """Gauss-Legendre panels (n/2 nodes each) on the supported part of one period."""
    half = min(t_reach, w.l_xi / 2)
    # break at the cutoff plateau edge T/2 and support edge T
    inner = [b for b in (w.T / 2, w.T) if b < half]
    edges = np.array(sorted({-half, half, *inner, *(-b for b in inner)}))
    k = max(16, n // 2)
    if k <= 64:
        return gauss_panels(edges, k)
    sub = -(-k // 64)
    fine = np.concatenate([np.linspace(a, b, sub + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])] + [edges[-1:]])
    return gauss_panels(fine, 64)


def cylinder_field(w: SpectralWindow, profile, tau, y, theta, t_reach: float):
    """kappa-bar on the tensor grid (tau, y, theta) from a t-profile callable.

    Returns array of shape (len(tau), len(y), len(theta)); only translates
    with |kl + tau| <= t_reach contribute.
    """
    ang = angular_factor(w, theta)
    out = np.zeros((tau.size, y.size))
    kmax = int(math.ceil((t_reach + w.l_xi) / w.l_xi))
    for k in range(-kmax, kmax + 1):
        t = k * w.l_xi + tau
        live = np.abs(t) <= t_reach
        if not np.any(live):
            continue
        tl = t[live]
        prof = profile(tl)
        x = y[None, :] * np.exp(tl)[:, None]
        out[live] += math.pi * _CHI(x) * (np.exp(tl / 2) * prof)[:, None]
    return out[:, :, None] * ang[None, None, :]


def _theta_ranges(coll: CollarSpec):
    a = coll.theta_half_width
    up = [(-a, a)]
    down = [(math.pi / 2 - a, math.pi / 2 + a)]
    off = [(a, math.pi / 2 - a), (math.pi / 2 + a, math.pi - a)]
    return up, down, off


def _theta_nodes(ranges, n):
    xs, ws = [], []
    for lo, hi in ranges:
        x, w = gauss_panels(np.array([lo, hi]), n) if n <= 128 else \
            gauss_panels(np.linspace(lo, hi, n // 64 + 1), 64)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _y_nodes(Y, n):
    return gauss_panels(np.linspace(-Y, Y, max(1, n // 32) + 1), 32) if n >= 32 else \
        gauss_panels(np.array([-Y, Y]), n)


def _branch_masses(w, profile, coll, grid, Y, t_reach, cells=None):
    """Masses of the up, down and off-collar angle regions.

    If ``cells`` is a list, appends (region, tau, theta, mass) rows with the
    y-integral already taken.
    """
    tau, wt = _tau_nodes(w, grid.tau, t_reach)
    y, wy = _y_nodes(Y, grid.y)
    up, down, off = _theta_ranges(coll)
    out = {}
    for name, rng in (("up", up), ("down", down), ("off", off)):
        th, wth = _theta_nodes(rng, grid.theta)
        f = cylinder_field(w, profile, tau, y, th, t_reach)
        per = np.einsum("i,j,k,ijk->ik", wt, wy, wth, np.abs(f) ** 2)
        out[name] = float(per.sum())
        if cells is not None:
            for i in range(tau.size):
                for k in range(th.size):
                    cells.append((name, float(tau[i]), float(th[k]), float(per[i, k])))
    return out


def _require_cylinder(G: GroupModel):
    if G.kind != "cylinder":
        raise NotImplementedError("tensor-grid mass integration is implemented for the cylinder model")


def theta_marginal(w: SpectralWindow, coll: CollarSpec, n: int = 256) -> float:
    """int_{|2 theta| <= angle bound} F_L(2 theta)^2 d theta."""
    F = FejerKernel(w.L)
    th, wth = _theta_nodes([(-coll.theta_half_width, coll.theta_half_width)], n)
    return float(np.sum(F(2 * th) ** 2 * wth))


def measure_total_mass(G: GroupModel, w: SpectralWindow, grid: GridSpec = GridSpec(),
                       coll: CollarSpec | None = None, tri: TransformTriple | None = None,
                       cells=None) -> dict:
    """Integral of |kappa-bar|^2 over the whole unit tangent bundle of the cylinder."""
    _require_cylinder(G)
    tri = tri or default_triple(w)
    coll = coll or CollarSpec(w)
    t_reach = 2 * w.T
    Y = math.exp(t_reach)
    m = _branch_masses(w, tri.tanh_transform, coll, grid, Y, t_reach, cells)
    return {"total": m["up"] + m["down"] + m["off"], "up": m["up"], "down": m["down"], "off": m["off"]}


def measure_collar_mass(G: GroupModel, w: SpectralWindow, coll: CollarSpec | None = None,
                        grid: GridSpec = GridSpec(), eta: float = 0.1, n_validate: int = 0,
                        seed: int = 0, tri: TransformTriple | None = None, cells=None,
                        validate_tol: float = 1e-3) -> MassReport:
    """Collar mass on |y| <= eta, collar angles; total mass over the bundle."""
    _require_cylinder(G)
    tri = tri or default_triple(w)
    coll = coll or CollarSpec(w)
    t_reach = 2 * w.T
    ccells = [] if cells is not None else None
    tcells = [] if cells is not None else None
    col = _branch_masses(w, tri.tanh_transform, coll, grid, eta, t_reach, ccells)
    tot = measure_total_mass(G, w, grid, coll, tri, tcells)
    if cells is not None:
        cells.extend(("collar_" + c[0],) + c[1:] for c in ccells if c[0] != "off")
        cells.extend(("total_" + c[0],) + c[1:] for c in tcells)
    collar = col["up"] + col["down"]
    s, ws, hv, tail, _ = tri.spectral_nodes
    # sup of the dropped spectral tail times the measure of the support
    amp = math.pi * math.exp(t_reach / 2) * 2 * FejerKernel(w.L)(0.0)
    budget = (amp * tail / math.pi) ** 2 * (4 * w.T) * 2 * math.exp(t_reach) * math.pi
    rep = MassReport(w, collar, tot["total"], collar / tot["total"], budget, grid,
                     col["up"], col["down"], tot["up"], tot["down"], tot["off"],
                     theta_marginal(w, coll), eta)
    if n_validate:
        rep.validation = validate_against_quadrature(G, w, coll, n_validate, seed, tri, validate_tol)
    return rep


def validate_against_quadrature(G: GroupModel, w: SpectralWindow, coll: CollarSpec, n: int = 32,
                                seed: int = 0, tri: TransformTriple | None = None,
                                tol: float = 1e-3) -> dict:
    """Compare asymptotic and full-quadrature projections at random collar points."""
    tri = tri or default_triple(w)
    rng = np.random.default_rng(seed)
    budget_rel = w.r ** (100 / w.C - 1)
    rows = []
    for _ in range(n):
        tau = rng.uniform(-w.T, w.T)
        y = rng.uniform(-0.1, 0.1)
        th = rng.uniform(-coll.theta_half_width, coll.theta_half_width)
        if rng.uniform() < 0.5:
            th += math.pi / 2
        g = compose(compose(a_elem(tau), n_elem(y)), k_elem(th))
        p = nak_decompose(g)
        va, _ = project_kappa(G, w, p, mode="asymptotic", tri=tri)
        vq, eq = project_kappa(G, w, p, tol=tol, mode="quadrature", tri=tri)
        rows.append((p.x, p.t, p.theta, va.real, vq.real, eq))
    arr = np.array(rows)
    scale = float(np.max(np.abs(arr[:, 3]))) or 1.0
    gap = float(np.max(np.abs(arr[:, 3] - arr[:, 4])))
    return {"points": n, "max_abs_gap": gap, "scale": scale, "budget": budget_rel * scale,
            "passed": bool(gap <= budget_rel * scale), "rows": arr.tolist()}


def measure_defect(G: GroupModel, w: SpectralWindow, grid: GridSpec = GridSpec(),
                   coll: CollarSpec | None = None, tri: TransformTriple | None = None,
                   cells=None) -> DefectReport:
    """Defect norm from the defect multiplier's lift versus the base lift."""
    _require_cylinder(G)
    tri = tri or default_triple(w)
    dtri = default_defect_triple(w) if tri is default_triple(w) else None
    if dtri is None:
        from .spectral import defect_multiplier
        dtri = defect_multiplier(tri)
    coll = coll or CollarSpec(w)
    t_reach = 2 * w.T
    Y = math.exp(t_reach)

    def total(profile, tag=None):
        rows = [] if (cells is not None and tag) else None
        m = _branch_masses(w, profile, coll, grid, Y, t_reach, rows)
        if rows:
            cells.extend((tag + "_" + c[0],) + c[1:] for c in rows)
        return m["up"] + m["down"] + m["off"]

    base = math.sqrt(total(tri.tanh_transform, "base"))
    defect = math.sqrt(total(dtri.tanh_transform, "defect"))
    closed = math.sqrt(total(lambda t: dtri.g(t)))
    base_closed = math.sqrt(total(lambda t: tri.g(t)))
    nd = defect / (w.r * base)
    nd_closed = closed / (w.r * base_closed)
    return DefectReport(w, defect, base, nd, nd * math.log(w.r), nd_closed,
                        abs(nd - nd_closed) / nd_closed, grid)


def spectral_defect_ratio(h, s, weights, r) -> float:
    """sqrt(int (r^2-s^2)^2 h^2 dmu) / (r sqrt(int h^2 dmu)), Plancherel dmu = s tanh(pi s) ds."""
    mu = weights * s * tanh_pi(s)
    return math.sqrt(np.sum((r * r - s * s) ** 2 * h * h * mu)) / (r * math.sqrt(np.sum(h * h * mu)))


def narrow_window_defects(w: SpectralWindow, shrink: float = 100.0) -> dict:
    """Normalized defect of the standard window versus a model window of width K/shrink."""
    tri = default_triple(w)
    s, ws, hv, _, _ = tri.spectral_nodes
    std = spectral_defect_ratio(hv, s, ws, w.r)
    Kn = w.K / shrink
    edges = np.linspace(max(0.0, w.r - 60 * Kn), w.r + 60 * Kn, 241)
    sn, wn = gauss_panels(edges, 16)
    narrow = spectral_defect_ratio(model_h(sn, w.r, Kn), sn, wn, w.r)
    return {"standard": std, "narrow": narrow, "ratio": std / narrow}


# ---------------------------------------------------------------------------
# dilution

@dataclass(frozen=True)
class DiluteReport:
    delta2: float
    combined_defect_bound: float
    bound_over_eps: float
    combined_defect_measured: float | None
    combined_collar_mass_lower: float
    amplitude_lower: float
    concentrates: bool
    r: float
    r_tilde: float

    def as_dict(self):
        return asdict(self)


def dilute(base_defect: float, base_mass_on_collar: float, scar_defect: float, scar_collar_mass: float,
           eigen_gap: float, epsilon: float, C_prime: float, K_weyl: float, r: float) -> DiluteReport:
    """psi + delta2 k-bar with psi an eigenfunction at r~ = r + eigen_gap.

    Defects are absolute norms ||(Delta + 1/4 + r^2) .|| for unit-normalized
    inputs; masses are squared L2 norms on the collar.
    """
    logr = math.log(r)
    if eigen_gap < 0 or eigen_gap > K_weyl / logr + 1e-15:
        raise InvalidGap(f"eigen_gap {eigen_gap!r} outside [0, K_weyl/log r = {K_weyl / logr!r}]")
    if epsilon <= 0 or C_prime < 0 or K_weyl < 0:
        raise ValueError("epsilon must be positive, constants nonnegative")
    delta2 = epsilon / (2 * K_weyl + C_prime)
    rt = r + eigen_gap
    bound = delta2 * (C_prime + 2 * K_weyl) * r / logr
    bound_over_eps = bound / (epsilon * r / logr)
    measured = None
    if scar_defect is not None:
        measured = base_defect + delta2 * (scar_defect + abs(rt * rt - r * r))
    amp = delta2 * math.sqrt(max(scar_collar_mass, 0.0)) - math.sqrt(max(base_mass_on_collar, 0.0))
    lower = amp * amp if amp > 0 else 0.0
    return DiluteReport(delta2, bound, bound_over_eps, measured, lower, amp,
                        bool(base_mass_on_collar < (0.5 * delta2) ** 2 * scar_collar_mass), r, rt)
