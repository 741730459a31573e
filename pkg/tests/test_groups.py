import math

import numpy as np
import pytest

from scarlab.errors import BallBudgetExceeded, ParseError, ValidationError
from scarlab.groups import (CollarSpec, check_collar_injectivity, cylinder, cylinder_wrap_count, enumerate_ball,
                            match_pair, octagon_group, parse_group_text, project_kappa, translates_for)
from scarlab.hyperbolic import IDENTITY, NakPoint, a_elem, compose, distance_from_i, nak_decompose
from scarlab.spectral import DEFAULT_L_XI, SpectralWindow

L16 = 2 * math.pi / 16


@pytest.fixture(scope="module")
def w144():
    return SpectralWindow(144.0)


@pytest.fixture(scope="module")
def octagon():
    return octagon_group()


# -- models -----------------------------------------------------------------------

def test_default_axis_length():
    assert DEFAULT_L_XI == pytest.approx(L16, rel=1e-15)


def test_octagon_relator_and_axis(octagon):
    m = octagon.word(octagon.relators[0]).matrix()
    assert min(np.abs(m - np.eye(2)).max(), np.abs(m + np.eye(2)).max()) <= 1e-9
    ax = octagon.axis()
    assert ax.is_diagonal()
    assert 2 * math.acosh(ax.trace() / 2) == pytest.approx(octagon.l_xi, rel=1e-12)
    assert len(octagon.generators) == 4


def test_letter_inverse(octagon):
    g = compose(octagon.letter("b"), octagon.letter("B"))
    assert np.allclose(np.abs(g.matrix()), np.eye(2), atol=1e-12)
    with pytest.raises(ValidationError):
        octagon.letter("z")


def test_parse_group_errors():
    with pytest.raises(ParseError):
        parse_group_text("")
    with pytest.raises(ParseError) as exc:
        parse_group_text("kind=cocompact\n")
    assert exc.value.line == 1
    with pytest.raises(ParseError) as exc:
        parse_group_text("kind=cocompact l_xi=1.0\n1 0 0\n")
    assert exc.value.line == 2
    with pytest.raises(ValidationError):
        parse_group_text("kind=cocompact l_xi=1.0\n1 2 3 4\n")
    with pytest.raises(ParseError):
        parse_group_text("kind=cocompact l_xi=1.0 colour=red\n")


def test_parse_rejects_broken_relator():
    text = "kind=cocompact l_xi=1.0 axis_word=a relator=ab\n" \
           f"{math.exp(0.5)} 0 0 {math.exp(-0.5)}\n2 1 1 1\n"
    with pytest.raises(ValidationError, match="relator"):
        parse_group_text(text)


def test_parse_rejects_axis_length_mismatch():
    text = "kind=cocompact l_xi=2.0 axis_word=a\n" f"{math.exp(0.5)} 0 0 {math.exp(-0.5)}\n"
    with pytest.raises(ValidationError, match="translation length"):
        parse_group_text(text)


def test_parse_cylinder_file():
    G = parse_group_text("# a comment\nkind=cylinder l_xi=0.5\n")
    assert G.kind == "cylinder" and G.l_xi == 0.5


# -- ball enumeration -----------------------------------------------------------------

def test_cylinder_ball_size():
    G = cylinder(L16)
    ball = enumerate_ball(G, 3 * L16)
    assert len(ball) == 7
    assert all(g.is_diagonal() for g in ball)


def test_cylinder_ball_grows_linearly():
    G = cylinder(L16)
    sizes = [len(enumerate_ball(G, R)) for R in (1.0, 2.0, 4.0, 8.0)]
    assert all(n == 2 * math.floor(R / L16) + 1 for n, R in zip(sizes, (1.0, 2.0, 4.0, 8.0)))


def test_ball_cap():
    with pytest.raises(BallBudgetExceeded):
        enumerate_ball(cylinder(L16), 50.0, cap=11)
    with pytest.raises(ValueError):
        enumerate_ball(cylinder(L16), 0.0)


@pytest.fixture(scope="module")
def octagon_balls(octagon):
    return {R: enumerate_ball(octagon, R) for R in (4.0, 5.0, 6.0, 7.0)}


def test_octagon_ball_exponential_growth(octagon_balls):
    # area growth ~ e^R for a cocompact surface group
    for R in (5.0, 6.0):
        ratio = len(octagon_balls[R + 1]) / len(octagon_balls[R])
        assert math.e / 2 <= ratio <= 2 * math.e


def test_octagon_ball_contents(octagon_balls):
    ball = octagon_balls[5.0]
    keys = [g.key() for g in ball]
    assert len(set(keys)) == len(keys)
    assert IDENTITY.key() in keys
    assert all(distance_from_i(g) <= 5.0 + 1e-9 for g in ball)
    inner = {g.key() for g in octagon_balls[4.0]}
    assert inner <= set(keys)
    traces = [round(g.trace(), 9) for g in ball]
    assert traces == sorted(traces)


def test_octagon_ball_closed_under_inverse(octagon_balls):
    keys = {g.key() for g in octagon_balls[5.0]}
    assert all(g.inverse().key() in keys for g in octagon_balls[5.0])


# -- collar ----------------------------------------------------------------------------

def test_collar_defaults(w144):
    c = CollarSpec(w144)
    assert c.t_bound == w144.T
    assert c.angle_bound == pytest.approx(144 ** (-5 / 200), rel=1e-15)
    assert c.theta_half_width == c.angle_bound / 2


def test_collar_validation(w144):
    with pytest.raises(ValidationError):
        CollarSpec(w144, x_bound=0.0)
    with pytest.raises(ValidationError):
        CollarSpec(w144, angle_bound=2.0)
    with pytest.raises(ValidationError):
        CollarSpec(w144, branch="sideways")


def test_collar_contains_branches(w144):
    c = CollarSpec(w144)
    a = c.theta_half_width
    assert c.contains(0.0, 0.0, 0.0) and c.contains(0.0, 0.0, math.pi - a / 2)
    assert c.contains(0.0, 0.0, math.pi / 2 + a / 2)
    assert not c.contains(0.0, 0.0, math.pi / 4)
    assert not c.contains(1.5, 0.0, 0.0)
    assert not c.contains(0.0, 2 * w144.T, 0.0)
    up = CollarSpec(w144, branch="up")
    assert up.contains(0.0, 0.0, 0.0) and not up.contains(0.0, 0.0, math.pi / 2)


def test_collar_sample_inside(w144):
    c = CollarSpec(w144)
    pts = c.sample(1000, seed=3)
    assert pts.shape == (1000, 3)
    assert np.all(c.contains(pts[:, 0], pts[:, 1], pts[:, 2]))
    assert np.array_equal(pts, c.sample(1000, seed=3))
    down = CollarSpec(w144, branch="down").sample(64)
    assert np.all(np.abs(down[:, 2] - math.pi / 2) <= c.theta_half_width)


# -- projection -------------------------------------------------------------------------

def test_wrap_count_formula():
    assert cylinder_wrap_count(0.0, 0.1, L16) == 1
    assert cylinder_wrap_count(0.0, 1.0, L16) == 2 * math.floor(1.0 / L16) + 1
    assert cylinder_wrap_count(0.0, 0.01, 1.0) == 1
    assert cylinder_wrap_count(0.5, 0.1, 1.0) == 0


def test_projection_single_term_regime(w144):
    # 2T < l/2 so exactly one translate is supported
    G = cylinder(w144.l_xi)
    p = NakPoint(0.1, 0.2 * w144.T, 0.05)
    from scarlab.kernel import kappa_full
    v, _, info = project_kappa(G, w144, p, return_report=True)
    assert info["terms"] == 1
    assert v == pytest.approx(kappa_full(w144, p, mode="asymptotic")[0], rel=1e-14)


def test_projection_invariant_under_axis(w144):
    G = cylinder(w144.l_xi)
    p = NakPoint(0.05, 0.3 * w144.T, 0.01)
    q = nak_decompose(compose(a_elem(w144.l_xi), p.element()))
    assert project_kappa(G, w144, q)[0] == pytest.approx(project_kappa(G, w144, p)[0], rel=1e-10)


def test_projection_zero_off_support(w144):
    G = cylinder(w144.l_xi)
    v, _ = project_kappa(G, w144, NakPoint(0.0, w144.l_xi / 2, 0.0))
    assert v == 0


def test_translates_cover_support(w144):
    G = cylinder(w144.l_xi)
    assert len(translates_for(G, NakPoint(0.0, 0.0, 0.0), 2 * w144.T)) >= 1


# -- collar injectivity ----------------------------------------------------------------------

def test_match_pair_identity(octagon):
    g = NakPoint(0.1, 0.01, 0.02).element()
    assert match_pair(octagon, g, g).key() == IDENTITY.key()
    assert match_pair(octagon, a_elem(octagon.l_xi), IDENTITY).is_diagonal()


def test_collar_injectivity_small_run(octagon, w144):
    res = check_collar_injectivity(octagon, CollarSpec(w144), n_pairs=500, seed=1)
    assert res["total_violations"] == 0
    assert res["diagonal_match"] + res["no_match"] + res["violation"] == 500
    assert res["min_nonaxial_displacement"] > 2 * w144.T


def test_collar_injectivity_cylinder_never_violates(w144):
    res = check_collar_injectivity(cylinder(w144.T / 4), CollarSpec(w144), n_pairs=200, seed=0)
    assert res["total_violations"] == 0


def test_collar_injectivity_detects_horocycle_shift(w144):
    # a non-diagonal element moving collar points by 0.5 along x must be caught
    from scarlab.groups import GroupModel
    from scarlab.hyperbolic import n_elem
    G = GroupModel("cocompact", 50.0, (a_elem(50.0), n_elem(0.5)), "a", (), 1.0, 10_000)
    res = check_collar_injectivity(G, CollarSpec(w144), n_pairs=200, seed=0)
    assert res["translate_scan_violations"] > 0 and res["total_violations"] > 0
