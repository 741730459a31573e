"""Fuchsian group models, ball enumeration, Gamma-projection and the collar check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .errors import BallBudgetExceeded, ParseError, ValidationError
from .hyperbolic import (IDENTITY, GroupElement, NakPoint, a_elem, compose, distance_from_i,
                         nak_arrays, nak_matrices, nak_decompose)
from .spectral import SpectralWindow

RELATOR_TOL = 1e-9


# ---------------------------------------------------------------------------
# models

@dataclass(frozen=True)
class GroupModel:
    kind: str
    l_xi: float
    generators: tuple = ()
    axis_word: str = ""
    relators: tuple = ()
    diameter: float = 0.0
    ball_cap: int = 500_000

    def __post_init__(self):
        if self.kind not in ("cylinder", "cocompact"):
            raise ValidationError(f"unknown group kind {self.kind!r}")
        if self.l_xi <= 0:
            raise ValidationError("l_xi must be positive")
        if self.kind == "cylinder":
            object.__setattr__(self, "generators", (a_elem(self.l_xi),))
            object.__setattr__(self, "axis_word", "a")
        else:
            if not self.generators:
                raise ValidationError("cocompact model needs generators")
            for rel in self.relators:
                m = self.word(rel)
                gap = min(np.max(np.abs(m.matrix() - np.eye(2))), np.max(np.abs(m.matrix() + np.eye(2))))
                if gap > RELATOR_TOL:
                    raise ValidationError(f"relator {rel!r} fails by {gap:.3g}")
            axis = self.word(self.axis_word)
            if not axis.is_diagonal(1e-9):
                raise ValidationError("axis word must be diagonal (axis on the imaginary line)")
            length = 2 * math.acosh(max(1.0, axis.trace() / 2))
            if abs(length - self.l_xi) > 1e-8 * max(1.0, self.l_xi):
                raise ValidationError(f"axis translation length {length!r} != l_xi {self.l_xi!r}")
            if self.diameter <= 0:
                object.__setattr__(self, "diameter",
                                   max(distance_from_i(g) for g in self.generators))

    def letter(self, ch: str) -> GroupElement:
        i = ord(ch.lower()) - ord("a")
        if not 0 <= i < len(self.generators):
            raise ValidationError(f"unknown generator symbol {ch!r}")
        g = self.generators[i]
        return g if ch.islower() else g.inverse()

    def word(self, w: str) -> GroupElement:
        out = IDENTITY
        for ch in w:
            out = compose(out, self.letter(ch))
        return out

    def axis(self) -> GroupElement:
        return self.word(self.axis_word)


def cylinder(l_xi: float) -> GroupModel:
    return GroupModel("cylinder", float(l_xi))


def parse_group_text(text: str) -> GroupModel:
    header = None
    gens = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = {}
            for tok in line.split():
                if "=" not in tok:
                    raise ParseError(f"bad header token {tok!r}", lineno)
                k, v = tok.split("=", 1)
                header[k] = v
            if "kind" not in header or "l_xi" not in header:
                raise ParseError("header needs kind= and l_xi=", lineno)
            unknown = set(header) - {"kind", "l_xi", "axis_word", "relator", "diameter"}
            if unknown:
                raise ParseError(f"unknown header keys {sorted(unknown)}", lineno)
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError("generator line needs four numbers a b c d", lineno)
        try:
            a, b, c, d = (float(p) for p in parts)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if abs(a * d - b * c - 1) > 1e-9:
            raise ValidationError(f"line {lineno}: generator determinant {a * d - b * c!r} != 1")
        gens.append(GroupElement(a, b, c, d))
    if header is None:
        raise ParseError("empty group file")
    try:
        l_xi = float(header["l_xi"])
        diam = float(header.get("diameter", 0.0))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if header["kind"] == "cylinder":
        return cylinder(l_xi)
    rel = tuple(r for r in header.get("relator", "").split(",") if r)
    return GroupModel("cocompact", l_xi, tuple(gens), header.get("axis_word", "a"), rel, diam)


def load_group_file(path) -> GroupModel:
    return parse_group_text(Path(path).read_text())


def octagon_group() -> GroupModel:
    """Genus-2 surface from the regular octagon with angles pi/4."""
    text = resources.files("scarlab").joinpath("data/octagon.txt").read_text()
    return parse_group_text(text)


# ---------------------------------------------------------------------------
# ball enumeration

def _canon_rows(m):
    """Sign-canonicalize rows of an (N, 4) array."""
    first = np.argmax(np.abs(m) > 1e-12, axis=1)
    sgn = np.sign(m[np.arange(m.shape[0]), first])
    sgn[sgn == 0] = 1.0
    return m * sgn[:, None]


def _keys(m, digits=7):
    return [tuple(row) for row in np.round(m, digits) + 0.0]


def _cosh_dist(m):
    return 0.5 * np.sum(m * m, axis=1)


def enumerate_ball(G: GroupModel, R: float, cap: int | None = None):
    """All gamma with d(i, gamma.i) <= R, sorted by (trace, entries)."""
    if R <= 0:
        raise ValueError("R must be positive")
    cap = G.ball_cap if cap is None else cap
    if G.kind == "cylinder":
        kmax = int(math.floor(R / G.l_xi + 1e-12))
        if 2 * kmax + 1 > cap:
            raise BallBudgetExceeded(f"{2 * kmax + 1} elements exceed cap {cap}")
        out = [a_elem(k * G.l_xi) for k in range(-kmax, kmax + 1)]
    else:
        out = [GroupElement(*row) for row in _bfs(G, R, cap)]
    return sorted(out, key=lambda g: (round(g.trace(), 9), g.key()))


def _bfs(G, R, cap):
    letters = [G.letter(chr(ord("a") + i)) for i in range(len(G.generators))]
    letters += [g.inverse() for g in letters]
    L = np.array([g.entries() for g in letters])
    prune = math.cosh(R + G.diameter)
    keep = math.cosh(R) * (1 + 1e-12)
    seen = {(1.0, 0.0, 0.0, 1.0)}
    found = [np.array([1.0, 0.0, 0.0, 1.0])]
    frontier = np.array([[1.0, 0.0, 0.0, 1.0]])
    while frontier.size:
        a, b, c, d = (frontier[:, None, i] for i in range(4))
        la, lb, lc, ld = (L[None, :, i] for i in range(4))
        prod = np.stack([a * la + b * lc, a * lb + b * ld, c * la + d * lc, c * lb + d * ld], axis=-1)
        prod = _canon_rows(prod.reshape(-1, 4))
        prod = prod[_cosh_dist(prod) <= prune]
        nxt = []
        for key, row in zip(_keys(prod), prod):
            if key not in seen:
                seen.add(key)
                nxt.append(row)
        if len(seen) > cap:
            raise BallBudgetExceeded(f"ball enumeration exceeded cap {cap}")
        frontier = np.array(nxt) if nxt else np.zeros((0, 4))
        if nxt:
            found.extend(nxt)
    found = np.array(found)
    return found[_cosh_dist(found) <= keep]


# ---------------------------------------------------------------------------
# collar

@dataclass(frozen=True)
class CollarSpec:
    window: SpectralWindow
    x_bound: float = 1.0
    t_bound: float | None = None
    angle_bound: float | None = None
    branch: str = "both"

    def __post_init__(self):
        if self.t_bound is None:
            object.__setattr__(self, "t_bound", self.window.T)
        if self.angle_bound is None:
            object.__setattr__(self, "angle_bound", self.window.r ** (-5 / self.window.C))
        if not (self.x_bound > 0 and self.t_bound > 0 and self.angle_bound > 0):
            raise ValidationError("collar bounds must be positive")
        # the bound applies to |2 theta|, so theta itself stays below pi/4
        if not self.angle_bound < math.pi / 2:
            raise ValidationError("angle bound on |2 theta| must keep |theta| < pi/4")
        if self.branch not in ("up", "down", "both"):
            raise ValidationError(f"unknown branch {self.branch!r}")

    @property
    def theta_half_width(self) -> float:
        return self.angle_bound / 2

    def contains(self, x, t, theta):
        x, t, theta = np.asarray(x), np.asarray(t), np.asarray(theta)
        base = (np.abs(x) <= self.x_bound) & (np.abs(t) <= self.t_bound)
        th = np.mod(theta, math.pi)
        up = np.minimum(th, math.pi - th) <= self.theta_half_width
        down = np.abs(th - math.pi / 2) <= self.theta_half_width
        if self.branch == "up":
            ang = up
        elif self.branch == "down":
            ang = down
        else:
            ang = up | down
        return base & ang

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        """n points of the collar from a scrambled Sobol sequence, columns x, t, theta."""
        eng = qmc.Sobol(d=4, scramble=True, seed=seed)
        # Sobol balance needs a power-of-two draw
        u = eng.random_base2(max(0, math.ceil(math.log2(max(n, 1)))))[:n]
        x = (2 * u[:, 0] - 1) * self.x_bound
        t = (2 * u[:, 1] - 1) * self.t_bound
        th = (2 * u[:, 2] - 1) * self.theta_half_width
        if self.branch == "down":
            th = th + math.pi / 2
        elif self.branch == "both":
            th = np.where(u[:, 3] < 0.5, th, th + math.pi / 2)
        return np.column_stack([x, t, np.mod(th, math.pi)])


# ---------------------------------------------------------------------------
# Gamma-projection

def translates_for(G: GroupModel, p: NakPoint, support: float):
    """Elements gamma that can carry p into the kernel's support."""
    reach = distance_from_i(p.element()) + support + 1.0
    return enumerate_ball(G, reach)


def project_kappa(G: GroupModel, w: SpectralWindow, p_bar: NakPoint, tol: float = 1e-6,
                  mode: str = "asymptotic", tri=None, return_report: bool = False):
    """sum over gamma of kappa_full(gamma . p_bar); returns (value, err_est)."""
    from .kernel import default_triple, kappa_full

    tri = tri or default_triple(w)
    support = tri.support_radius
    g = p_bar.element()
    vals, errs = [], []
    suppressed = 0
    for gamma in translates_for(G, p_bar, support):
        q = nak_decompose(compose(gamma, g))
        if abs(q.t) > 2 * w.T or abs(q.x) > 1 + 2 * w.T:
            suppressed += 1
            continue
        v, e = kappa_full(w, q, tol, mode, tri)
        vals.append(v)
        errs.append(e)
    value = complex(np.sum(np.array(vals, dtype=complex))) if vals else 0j
    err = float(np.sum(errs)) if errs else 0.0
    if return_report:
        return value, err, {"terms": len(vals), "suppressed": suppressed}
    return value, err


def cylinder_wrap_count(t: float, t_bound: float, l_xi: float) -> int:
    """Number of k with |k l + t| <= t_bound."""
    lo = math.ceil((-t_bound - t) / l_xi - 1e-12)
    hi = math.floor((t_bound - t) / l_xi + 1e-12)
    return max(0, hi - lo + 1)


# ---------------------------------------------------------------------------
# collar injectivity

def match_element(ball: np.ndarray, m: np.ndarray):
    """Nearest ball element to each row of m (Frobenius, modulo sign)."""
    d1 = np.linalg.norm(m[:, None, :] - ball[None, :, :], axis=2)
    d2 = np.linalg.norm(m[:, None, :] + ball[None, :, :], axis=2)
    d = np.minimum(d1, d2)
    idx = np.argmin(d, axis=1)
    return idx, d[np.arange(m.shape[0]), idx]


def check_collar_injectivity(G: GroupModel, coll: CollarSpec, n_pairs: int = 10_000, seed: int = 0,
                             match_tol: float = 1e-6, diag_tol: float = 1e-8) -> dict:
    """Verify (U U^{-1}) cap Gamma lies in the diagonal subgroup A by sampling."""
    R = 2 * coll.t_bound + 4
    ball_el = enumerate_ball(G, R)
    ball = np.array([g.entries() for g in ball_el])
    diag = np.array([g.is_diagonal(diag_tol) for g in ball_el])
    pts = coll.sample(2 * n_pairs, seed)
    a, b, c, d = nak_matrices(pts[:, 0], pts[:, 1], pts[:, 2])
    P = np.column_stack([a, b, c, d])
    g1, g2 = P[:n_pairs], P[n_pairs:]
    # g1 g2^{-1} with g2^{-1} = [[d, -b], [-c, a]]
    m = np.column_stack([
        g1[:, 0] * g2[:, 3] - g1[:, 1] * g2[:, 2],
        -g1[:, 0] * g2[:, 1] + g1[:, 1] * g2[:, 0],
        g1[:, 2] * g2[:, 3] - g1[:, 3] * g2[:, 2],
        -g1[:, 2] * g2[:, 1] + g1[:, 3] * g2[:, 0],
    ])
    no_match = diag_match = violation = 0
    min_gap = math.inf
    for i0 in range(0, n_pairs, 2000):
        idx, dist = match_element(ball, m[i0:i0 + 2000])
        hit = dist < match_tol
        min_gap = min(min_gap, float(np.min(dist)))
        no_match += int(np.sum(~hit))
        diag_match += int(np.sum(hit & diag[idx]))
        violation += int(np.sum(hit & ~diag[idx]))
    # translate scan: does any non-diagonal gamma move a sampled collar point into the collar?
    scan_violations = 0
    min_offaxis = math.inf
    for gm, isdiag in zip(ball, diag):
        if isdiag:
            continue
        ga, gb, gc, gd = gm
        x, t, th = nak_arrays(ga * a + gb * c, ga * b + gb * d, gc * a + gd * c, gc * b + gd * d)
        scan_violations += int(np.sum(coll.contains(x, t, th)))
        # displacement of sampled base points x + i e^t under gamma
        z = pts[:, 0] + 1j * np.exp(pts[:, 1])
        gz = (ga * z + gb) / (gc * z + gd)
        chd = 1 + np.abs(gz - z) ** 2 / (2 * z.imag * gz.imag)
        min_offaxis = min(min_offaxis, float(np.min(np.arccosh(chd))))
    return {
        "pairs": n_pairs,
        "ball_radius": R,
        "ball_size": len(ball_el),
        "no_match": no_match,
        "diagonal_match": diag_match,
        "violation": violation,
        "min_match_distance": min_gap,
        "translate_scan_points": int(pts.shape[0]),
        "translate_scan_violations": scan_violations,
        "min_nonaxial_displacement": min_offaxis,
        "total_violations": violation + scan_violations,
    }


def match_pair(G: GroupModel, g1: GroupElement, g2: GroupElement, R: float = 4.0, match_tol: float = 1e-6):
    """Nearest Gamma element to g1 g2^{-1}, or None if farther than match_tol."""
    ball_el = enumerate_ball(G, R)
    ball = np.array([g.entries() for g in ball_el])
    m = compose(g1, g2.inverse())
    idx, dist = match_element(ball, np.array([m.entries()]))
    return ball_el[int(idx[0])] if dist[0] < match_tol else None
