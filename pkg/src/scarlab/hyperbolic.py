"""PSL(2,R) arithmetic, Iwasawa-type coordinates and the horocycle phase.

Group elements are unimodular 2x2 real matrices modulo sign.  The phase

    phi(n, t, alpha) = log(e^t cos^2 a + n sin 2a + e^{-t} (n^2 + 1) sin^2 a)

is the horocycle distance of n(n) a_t k_alpha, and its first and second
derivatives in (n, alpha) are given in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DET_DRIFT = 1e-12


def _canonical(a, b, c, d):
    det = a * d - b * c
    if not det > 0:
        raise ValueError(f"matrix has non-positive determinant {det!r}")
    if abs(det - 1.0) > DET_DRIFT:
        s = math.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
    for v in (a, b, c, d):
        if v != 0.0:
            if v < 0:
                a, b, c, d = -a, -b, -c, -d
            break
    return float(a), float(b), float(c), float(d)


@dataclass(frozen=True)
class GroupElement:
    """Element of PSL(2,R) stored as a sign-canonical unimodular matrix."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = _canonical(self.a, self.b, self.c, self.d)
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)

    @classmethod
    def from_matrix(cls, m) -> "GroupElement":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def trace(self) -> float:
        return abs(self.a + self.d)

    def act(self, z: complex) -> complex:
        """Mobius action on the upper half plane."""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def frobenius2(self) -> float:
        return self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2

    def key(self, digits: int = 9) -> tuple:
        """Hashable rounded canonical form, stable under tiny sign noise."""
        vals = [round(v, digits) for v in self.entries()]
        eps = 10.0 ** (-digits)
        for v in vals:
            if abs(v) > eps:
                if v < 0:
                    vals = [-u for u in vals]
                break
        return tuple(v + 0.0 for v in vals)

    def is_diagonal(self, tol: float = 1e-8) -> bool:
        return abs(self.b) <= tol and abs(self.c) <= tol


IDENTITY = GroupElement(1.0, 0.0, 0.0, 1.0)


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    return GroupElement(
        g1.a * g2.a + g1.b * g2.c,
        g1.a * g2.b + g1.b * g2.d,
        g1.c * g2.a + g1.d * g2.c,
        g1.c * g2.b + g1.d * g2.d,
    )


def n_elem(x: float) -> GroupElement:
    return GroupElement(1.0, x, 0.0, 1.0)


def a_elem(t: float) -> GroupElement:
    e = math.exp(t / 2)
    return GroupElement(e, 0.0, 0.0, 1.0 / e)


def k_elem(theta: float) -> GroupElement:
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(c, -s, s, c)


def _reduce_angle(theta, sign_source):
    """Bring an atan2 angle into [0, pi), flipping the matrix sign if needed."""
    flip = theta < 0
    if flip:
        theta += math.pi
    if theta >= math.pi:
        theta -= math.pi
    return theta, (-1.0 if flip else 1.0)


@dataclass(frozen=True)
class NakPoint:
    """Coordinates of n(x) a_t k_theta."""

    x: float
    t: float
    theta: float

    def element(self) -> GroupElement:
        return compose(compose(n_elem(self.x), a_elem(self.t)), k_elem(self.theta))


@dataclass(frozen=True)
class KanPoint:
    """Coordinates of k_theta a_t n(u)."""

    theta: float
    t: float
    u: float

    def element(self) -> GroupElement:
        return compose(compose(k_elem(self.theta), a_elem(self.t)), n_elem(self.u))


def nak_decompose(g: GroupElement) -> NakPoint:
    a, b, c, d = g.entries()
    theta, sgn = _reduce_angle(math.atan2(c, d), None)
    a, b, c, d = sgn * a, sgn * b, sgn * c, sgn * d
    rho2 = c * c + d * d
    x = (a * math.sin(theta) + b * math.cos(theta)) / math.sqrt(rho2)
    return NakPoint(x, -math.log(rho2), theta)


def kan_decompose(g: GroupElement) -> KanPoint:
    a, b, c, d = g.entries()
    theta, sgn = _reduce_angle(math.atan2(c, a), None)
    a, b, c, d = sgn * a, sgn * b, sgn * c, sgn * d
    rho2 = a * a + c * c
    u = (b * math.cos(theta) + d * math.sin(theta)) / math.sqrt(rho2)
    return KanPoint(theta, math.log(rho2), u)


def horocycle_distance(g: GroupElement) -> float:
    return math.log(g.a ** 2 + g.c ** 2)


def distance_from_i(g: GroupElement) -> float:
    """Hyperbolic distance d(i, g.i) from the Frobenius norm."""
    return math.acosh(max(1.0, 0.5 * g.frobenius2()))


# ---------------------------------------------------------------------------
# vectorized NAK coordinates for batches of matrices (shape (..., 4))

def nak_arrays(a, b, c, d):
    """Vectorized NAK coordinates (x, t, theta) of [[a, b], [c, d]]."""
    theta = np.arctan2(c, d)
    neg = theta < 0
    theta = np.where(neg, theta + np.pi, theta)
    theta = np.where(theta >= np.pi, theta - np.pi, theta)
    sgn = np.where(neg, -1.0, 1.0)
    a, b, c, d = sgn * a, sgn * b, sgn * c, sgn * d
    rho2 = c * c + d * d
    x = (a * np.sin(theta) + b * np.cos(theta)) / np.sqrt(rho2)
    return x, -np.log(rho2), theta


def nak_matrices(x, t, theta):
    """Entries of n(x) a_t k_theta for arrays of coordinates."""
    e = np.exp(np.asarray(t) / 2)
    ct, st = np.cos(theta), np.sin(theta)
    a = e * ct + x / e * st
    b = -e * st + x / e * ct
    c = st / e
    d = ct / e
    return a, b, c, d


# ---------------------------------------------------------------------------
# phase function

def _phase_terms(n, t, alpha):
    n = np.asarray(n, dtype=float)
    t = np.asarray(t, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    et, emt = np.exp(t), np.exp(-t)
    s2, c2 = np.sin(2 * alpha), np.cos(2 * alpha)
    sa2 = np.sin(alpha) ** 2
    ca2 = np.cos(alpha) ** 2
    D = et * ca2 + n * s2 + emt * (n * n + 1) * sa2
    return n, et, emt, s2, c2, sa2, D


def phase(n, t, alpha):
    """phi(n, t, alpha); scalar in, scalar out (numpy broadcasting otherwise)."""
    D = _phase_terms(n, t, alpha)[-1]
    out = np.log(D)
    return float(out) if np.ndim(out) == 0 else out


def phase_grad(n, t, alpha):
    """(dphi/dn, dphi/dalpha)."""
    n, et, emt, s2, c2, sa2, D = _phase_terms(n, t, alpha)
    Dn = s2 + 2 * n * emt * sa2
    Da = s2 * (emt * (n * n + 1) - et) + 2 * n * c2
    gn, ga = Dn / D, Da / D
    if np.ndim(gn) == 0:
        return float(gn), float(ga)
    return gn, ga


def phase_hessian(n, t, alpha):
    """Symmetric matrix [[phi_nn, phi_na], [phi_na, phi_aa]] (trailing axes)."""
    n, et, emt, s2, c2, sa2, D = _phase_terms(n, t, alpha)
    Dn = s2 + 2 * n * emt * sa2
    Da = s2 * (emt * (n * n + 1) - et) + 2 * n * c2
    Dnn = 2 * emt * sa2
    Dna = 2 * c2 + 2 * n * emt * s2
    Daa = 2 * c2 * (emt * (n * n + 1) - et) - 4 * n * s2
    pnn = Dnn / D - Dn * Dn / D ** 2
    pna = Dna / D - Dn * Da / D ** 2
    paa = Daa / D - Da * Da / D ** 2
    H = np.array([[pnn, pna], [pna, paa]])
    if H.ndim > 2:
        H = np.moveaxis(H, (0, 1), (-2, -1))
    return H


def critical_points(t: float):
    """The two critical points of alpha, n -> phi(n, t, alpha): (0,0) and (0, pi/2)."""
    out = []
    for alpha in (0.0, math.pi / 2):
        H = phase_hessian(0.0, t, alpha)
        ev = np.linalg.eigvalsh(H)
        out.append({
            "n": 0.0,
            "alpha": alpha,
            "phi": phase(0.0, t, alpha),
            "phi_nn": H[0, 0],
            "phi_na": H[0, 1],
            "phi_aa": H[1, 1],
            "abs_det_inv_sqrt": abs(np.linalg.det(H)) ** -0.5,
            "signature": int(np.sum(ev > 0) - np.sum(ev < 0)),
        })
    return out
