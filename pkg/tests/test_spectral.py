import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scarlab.errors import GridTooCoarse, OverflowGuardFailure, ValidationError
from scarlab.kernel import default_triple
from scarlab.spectral import (H_profile, SmoothCutoff, SpectralWindow, convolved_window_h, defect_closed_form,
                              defect_multiplier, is_resonant, model_h, model_pair, peak_offset, radial_kernel,
                              radial_roundtrip, resonant_r, sampled_pair, spectral_tail_bound, transform_check,
                              windowed_pair)

L16 = 2 * math.pi / 16
RS = (48.0, 144.0, 400.0)  # resonant values nearest e^4, e^5, e^6


@pytest.fixture(scope="module")
def w144():
    return SpectralWindow(144.0)


# -- window ---------------------------------------------------------------------

def test_window_derived_quantities(w144):
    assert w144.K == 200 / (2 * math.log(144))
    assert w144.T == math.log(144) / 200
    assert w144.L == math.floor(144 ** (10 / 200)) == 1


def test_window_L_cap_reported():
    w = SpectralWindow(144.0, C=1.0, L_cap=4096)
    assert w.L == 4096 and w.L_capped and w.L_uncapped > 4096


def test_window_rejects_nonresonant_and_names_nearest():
    with pytest.raises(ValidationError, match="nearest resonant r=144"):
        SpectralWindow(148.0)


def test_resonance_helpers():
    assert resonant_r(L16, math.e ** 5) == pytest.approx(144.0)
    assert is_resonant(160.0, L16) and not is_resonant(148.0, L16)


# -- cutoff ---------------------------------------------------------------------

def test_cutoff_plateau_and_support():
    chi = SmoothCutoff()
    x = np.linspace(-0.5, 0.5, 101)
    assert np.all(chi(x) == 1.0)
    assert np.all(chi(np.array([1.0, -1.0, 1.3, -7.0])) == 0.0)
    v = chi(np.linspace(0.55, 0.95, 41))
    assert np.all((v > 0) & (v < 1)) and np.all(np.diff(v) < 0)
    assert np.all(np.diff(chi(np.linspace(0.5, 1.0, 501))) <= 0)


@given(st.floats(-1.5, 1.5))
@settings(max_examples=200, deadline=None)
def test_cutoff_even(x):
    chi = SmoothCutoff()
    assert chi(np.array(x)) == chi(np.array(-x))


def test_cutoff_derivatives_match_finite_differences():
    chi = SmoothCutoff()
    h = 1e-5
    for x in np.linspace(0.55, 0.95, 9):
        d = chi.derivatives(x, 2)
        assert d[1] == pytest.approx((chi(x + h) - chi(x - h)) / (2 * h), abs=1e-6 * (1 + abs(d[1])))
        h2 = 1e-4
        fd2 = (chi(x + h2) - 2 * chi(x) + chi(x - h2)) / h2 ** 2
        assert d[2] == pytest.approx(fd2, abs=1e-4 * (1 + abs(d[2])))


# -- model pair -------------------------------------------------------------------

def test_model_h_matches_naive_formula_small_arguments():
    r, K = 10.0, 1.0
    for s in np.linspace(0, 20, 41):
        naive = math.cosh(s / (2 * K)) * math.cosh(r / (2 * K)) / (math.cosh(s / K) + math.cosh(r / K))
        assert model_h(np.array([s]), r, K)[0] == pytest.approx(naive, rel=1e-13)
    assert model_h(np.array([r]), r, K)[0] == pytest.approx(math.cosh(r / 2) ** 2 / (2 * math.cosh(r)), rel=1e-13)


def test_model_h_overflow_safe_large_ratio():
    v = model_h(np.array([5000.0, 5010.0]), 5000.0, 10.0)
    assert np.all(np.isfinite(v)) and v[0] == pytest.approx(0.25, rel=1e-12)  # cosh^2(r/2K)/(2 cosh(r/K)) -> 1/4


def test_model_h_guard():
    with pytest.raises(OverflowGuardFailure):
        model_h(np.array([1e308]), 1e308, 1e-300)


def test_model_g_at_zero(w144):
    tri = model_pair(w144)
    assert tri.g(0.0) == pytest.approx(w144.K / 2, rel=1e-15)


def test_model_transform_at_random_points(w144):
    rng = np.random.default_rng(0)
    s = rng.uniform(w144.r - 5, w144.r + 5, 20)
    d = transform_check(w144, s)
    assert np.max(d["model_rel"]) < 1e-8


@pytest.mark.parametrize("near", [50.0, 100.0, 200.0])
def test_fourier_pair_identity_wide_range(near):
    r = resonant_r(L16, near)
    w = SpectralWindow(r)
    lo = max(0.0, r - 5 * w.K * math.log(r))
    s = np.linspace(lo, r + 5 * w.K * math.log(r), 200)
    tri = model_pair(w)
    from scarlab.spectral import _FourierH
    num = _FourierH(tri.g_vals, tri.dt)(s)
    ref = model_h(s, w.r, w.K)
    assert np.max(np.abs(num - ref) / ref) < 1e-8


# -- windowed pair ------------------------------------------------------------------

def test_windowed_support_and_plateau(w144):
    tri = windowed_pair(w144)
    T = w144.T
    t_out = np.linspace(T * (1 + 1e-12), 3 * T, 50)
    assert np.all(tri.g(t_out) == 0.0) and np.all(tri.g(-t_out) == 0.0)
    t_in = np.linspace(-T / 2, T / 2, 101)
    mp = model_pair(w144)
    assert np.array_equal(tri.g(t_in), mp.g(t_in))


def test_windowed_fft_vs_convolution(w144):
    s = np.linspace(w144.r - 5 * w144.K, w144.r + 5 * w144.K, 25)
    num = windowed_pair(w144).h(s)
    conv = convolved_window_h(w144, s)
    assert np.max(np.abs(num - conv) / np.abs(conv)) < 1e-6


def test_windowed_h_real_and_g_even(w144):
    tri = windowed_pair(w144)
    t = np.linspace(0, w144.T, 33)
    assert np.array_equal(tri.g(t), tri.g(-t))
    assert np.isrealobj(tri.h_vals)


def test_decay_constant_bounds_far_values(w144):
    tri = windowed_pair(w144)
    far = np.abs(tri.h_s - w144.r) >= 10
    c = tri.decay_constant
    assert 0 < c < np.inf
    assert np.all(np.abs(tri.h_vals[far]) <= c * np.abs(tri.h_s[far] - w144.r) ** -3 * (1 + 1e-12))


def test_peak_location_at_large_r():
    tri = windowed_pair(SpectralWindow(400.0))
    assert abs(peak_offset(tri)) <= 1.0


# -- defect multiplier --------------------------------------------------------------

def test_defect_vanishes_at_r(w144):
    d = defect_multiplier(windowed_pair(w144))
    assert d.h(np.array([w144.r]))[0] == 0.0


def test_defect_closed_form(w144):
    d = defect_multiplier(windowed_pair(w144))
    t = np.linspace(-w144.T, w144.T, 301)
    ref = defect_closed_form(w144, t)
    assert np.max(np.abs(d.g(t) - ref)) <= 1e-9 * np.max(np.abs(ref))


def test_defect_main_term_scale(w144):
    # -rK sin(rt) K H'(Kt) carries the rK scale, the K^3 H'' term is lower order
    K, r = w144.K, w144.r
    t = 0.3 * w144.T
    H = H_profile(K * t)
    lead = -2 * r * K ** 2 * math.sin(r * t) * H[1]
    full = defect_closed_form(w144, np.array([t]))[0]
    assert abs(full - lead) <= K ** 3 * abs(H[2]) * (1 + 1e-12)


def test_defect_g_even_and_matches_fd(w144):
    tri = windowed_pair(w144)
    d = defect_multiplier(tri)
    t = np.linspace(0, 0.95 * w144.T, 40)
    assert np.allclose(d.g(t), d.g(-t), rtol=0, atol=1e-12)
    h = 1e-4 / w144.r
    g2 = tri.g_derivs(t, 2)[2]
    fd = (tri.g(t + h) - 2 * tri.g(t) + tri.g(t - h)) / h ** 2
    assert np.all(np.abs(g2 - fd) <= 1e-4 * (1 + np.abs(g2)))


# -- tail bound --------------------------------------------------------------------

def test_spectral_tail_bound_scale_stable():
    vals = [spectral_tail_bound(default_triple(SpectralWindow(r))) * r * math.log(r) for r in RS]
    assert max(vals) / min(vals) <= 3.0


def test_spectral_tail_bound_refinement(w144):
    tri = default_triple(w144)
    a = spectral_tail_bound(tri)
    b = spectral_tail_bound(tri, refine=2)
    assert abs(a - b) <= 1e-6 * abs(a)


def test_tail_integrand_positive_where_h_positive(w144):
    s, ws, hv, _, _ = default_triple(w144).spectral_nodes
    pos = (hv > 0) & (s > 0)
    assert np.all(hv[pos] * np.tanh(np.pi * s[pos]) / s[pos] > 0)


# -- radial kernel -------------------------------------------------------------------

def test_radial_kernel_support(w144):
    tri = windowed_pair(w144)
    kern = radial_kernel(tri)
    wmax = math.sinh(w144.T / 2) ** 2
    assert np.all(kern(np.linspace(wmax, 3 * wmax, 17)) == 0.0)
    assert np.all(kern.u <= wmax)


def _triangle(w, n):
    t = np.linspace(0, w.T, n + 1)
    return sampled_pair(w, t, np.maximum(0.0, 1 - t / w.T), "triangle")


def test_radial_kernel_triangle_grid_refinement(w144):
    a = radial_kernel(_triangle(w144, 4096), tol=1e-3)
    b = radial_kernel(_triangle(w144, 8192), tol=1e-3)
    rel = math.sqrt(np.sum((a.k - b.k) ** 2) / np.sum(b.k ** 2))
    assert rel <= 1e-6


def test_radial_kernel_roundtrip(w144):
    tri = windowed_pair(w144)
    kern = radial_kernel(tri)
    s = np.array([w144.r - 1, w144.r, w144.r + 1])
    back = radial_roundtrip(kern, s, w144.T)
    ref = tri.h(s)
    assert np.max(np.abs(back - ref) / np.abs(ref)) <= 1e-4


def test_radial_kernel_grid_too_coarse(w144):
    t = np.linspace(0, w144.T, 9)
    g = np.cos(w144.r * 40 * t)
    with pytest.raises(GridTooCoarse):
        radial_kernel(sampled_pair(w144, t, g), tol=1e-9)
