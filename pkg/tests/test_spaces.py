import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad, simpson
from scipy.special import gamma, j0

from qwave import (BoundaryTrace, Bump1D, ExpDecay1D, Gaussian1D, LinearProblem, PlaneField,
                   Profile, SeparableField, WaveField, admissible_pair, bessel_potential_norm,
                   boundary_space_norm, extension_bound_ratio, hardy_quotient,
                   linear_estimate_ratio, norm_report, slobodecki_seminorm, sobolev_norm_plane,
                   strichartz_norm, utm_solve, zero_extension_norm)
from qwave.exceptions import (BOutOfRange, ParameterOutOfRange, ResolutionWarning,
                              SupportViolation)
from qwave.spaces import (REPORT_KEYS, _profile_pair_weights, alpha_max,
                          fourier_equivalence_constant, homogeneous_fourier_seminorm,
                          sample_quadrant)

GAUSS = lambda a, b: np.exp(-(a * a + b * b))


@pytest.fixture(scope="module")
def gauss_field():
    return PlaneField.from_function(GAUSS, 6.0, 0.1)


def test_zero_field_norms():
    z = PlaneField.from_function(lambda a, b: 0 * a * b, 2.0, 0.1)
    assert sobolev_norm_plane(z, 0.3) == 0
    assert bessel_potential_norm(z, 0.3, 4) == 0
    assert slobodecki_seminorm(z, 0.3, "plane") == 0


def test_l2_of_gaussian(gauss_field):
    assert sobolev_norm_plane(gauss_field, 0.0) == pytest.approx(math.sqrt(math.pi / 2),
                                                                rel=1e-12)
    assert bessel_potential_norm(gauss_field, 0.0, 2) == pytest.approx(math.sqrt(math.pi / 2),
                                                                      rel=1e-12)


def test_sobolev_norm_radial_oracle(gauss_field):
    s = 0.4
    # |u^(k)|^2 = pi^2 e^{-|k|^2/2}; ||u||^2 = (2 pi)^-2 int (1 + r^2)^s |u^|^2 2 pi r dr
    val = quad(lambda r: (1 + r * r) ** s * math.pi ** 2 * math.exp(-r * r / 2) * 2 * math.pi * r,
               0, np.inf)[0]
    assert sobolev_norm_plane(gauss_field, s) == pytest.approx(math.sqrt(val / (4 * math.pi ** 2)),
                                                              rel=1e-10)


def test_bessel_potential_radial_oracle(gauss_field):
    s, p = 0.4, 6
    v = lambda r: quad(lambda k: (1 + k * k) ** (s / 2) * math.pi * math.exp(-k * k / 4)
                       * j0(k * r) * k, 0, 60, limit=400)[0] / (2 * math.pi)
    rr = np.linspace(0, 8, 801)
    vv = np.array([v(r) for r in rr])
    oracle = simpson(2 * math.pi * rr * np.abs(vv) ** p, x=rr) ** (1 / p)
    assert bessel_potential_norm(gauss_field, s, p) == pytest.approx(oracle, rel=1e-6)


def test_resolution_warning_on_rough_field():
    x = 0.5 * np.arange(-8, 9)
    rough = PlaneField(x, x, np.where(np.abs(x[:, None]) + np.abs(x[None, :]) < 1, 1.0, 0.0))
    with pytest.warns(ResolutionWarning):
        sobolev_norm_plane(rough, 0.45)


def test_slobodecki_plane_matches_fourier_constant():
    s = 0.3
    f = PlaneField.from_function(GAUSS, 4.0, 0.05)
    ratio = slobodecki_seminorm(f, s, "plane") ** 2 / homogeneous_fourier_seminorm(f, s) ** 2
    assert ratio == pytest.approx(fourier_equivalence_constant(s), rel=1e-3)
    exact = math.sqrt(math.pi / 2 * 2 ** s * math.gamma(s + 1))
    # the |k|^{2s} cusp at k = 0 limits the discrete sum to about 1e-3
    assert homogeneous_fourier_seminorm(f, s) == pytest.approx(exact, rel=1e-3)


def test_slobodecki_quadrant_decomposition():
    # plane^2 - quadrant^2 = 2 int_Q |u(y)|^2 kappa(y) dy, kappa(y) = int_{R^2 \ Q} |x-y|^{-2-2s} dx
    s, c, w = 0.3, 1.2, 0.6
    u = lambda a, b: np.exp(-((a - c) ** 2 + (b - c) ** 2) / w ** 2)
    B = math.sqrt(math.pi) * gamma(s + 0.5) / (2 * gamma(s + 1))

    def kappa(y1, y2):
        # half-planes x1 < 0 and x2 < 0 overlap in the third quadrant
        half = B * (y1 ** (-2 * s) + y2 ** (-2 * s)) / s
        # int_{z1 > y1, z2 > y2} |z|^{-2-2s} dz in polar form
        r0 = lambda th: max(y1 / math.cos(th), y2 / math.sin(th))
        third = quad(lambda th: r0(th) ** (-2 * s), 0, math.pi / 2,
                     points=[math.atan2(y2, y1)])[0] / (2 * s)
        return half - third

    g, wg = np.polynomial.legendre.leggauss(24)
    xs, ws = (g + 1) / 2 * 4, wg / 2 * 4
    cross = sum(ws[i] * ws[j] * u(xs[i], xs[j]) ** 2 * kappa(xs[i], xs[j])
                for i in range(24) for j in range(24))
    h = 0.025
    n = int(round(5 / h))
    x = h * np.arange(n + 1)
    sq = slobodecki_seminorm(PlaneField(x, x, u(x[:, None], x[None, :])), s, "quadrant")
    sp = slobodecki_seminorm(sample_quadrant(u, h, 5), s, "plane")
    assert sp ** 2 - sq ** 2 == pytest.approx(2 * cross, rel=2e-3)


def test_slobodecki_dilation_scaling():
    u = lambda a, b: np.exp(-a - b) * (1 + a * b)
    s, lam, h = 0.3, 2.0, 0.025
    x = h * np.arange(int(12 / h) + 1)
    A = slobodecki_seminorm(PlaneField(x, x, u(x[:, None], x[None, :])), s)
    B = slobodecki_seminorm(PlaneField(x, x, u(lam * x[:, None], lam * x[None, :])), s)
    assert B ** 2 / A ** 2 == pytest.approx(lam ** (2 * s - 2), rel=2e-3)


@pytest.mark.parametrize("s, alpha, q, p", [
    (0, 3, 3, 6), (0, 2, 4, 4), (Fraction(1, 4), 2, Fraction(16, 3), Fraction(16, 5)),
])
def test_admissible_pair_examples(s, alpha, q, p):
    pair = admissible_pair(s, alpha)
    assert (pair.q, pair.p) == (q, p)
    assert 1 / pair.q + 1 / pair.p == Fraction(1, 2)


def test_admissible_pair_ranges():
    assert alpha_max(Fraction(2, 5)) == Fraction(13, 3)
    with pytest.raises(ParameterOutOfRange):
        admissible_pair(0.5, 2)
    with pytest.raises(ParameterOutOfRange):
        admissible_pair(0.4, 5)
    with pytest.raises(ParameterOutOfRange):
        admissible_pair(0, 1.5)


def _exp_trace(T=1.0):
    return BoundaryTrace.separable(T, ((1.0, ExpDecay1D(1, 1), Profile("exp", 1.0)),))


def test_boundary_norm_zero_and_range():
    assert boundary_space_norm(BoundaryTrace.zero(1.0), 0.25, 0.25) == 0.0
    with pytest.raises(BOutOfRange):
        boundary_space_norm(_exp_trace(), 0.0, 0.5)


def test_boundary_norm_b0_closed_form():
    # sigma = b = 0: (2 pi)^-1 int_{|k|<=40} |g^(k)|^2 dk * 2 pi int_0^1 e^{-2t} dt
    want = math.sqrt(2 * math.atan(40) * (1 - math.exp(-2)) / 2)
    assert boundary_space_norm(_exp_trace(), 0.0, 0.0) == pytest.approx(want, rel=1e-10)


def test_profile_weight_against_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 20
    b, T = 0.25, 1.0
    e = [(1.0, -1.0)]
    kap = np.array([0.0, 4.0, 100.0])
    got = _profile_pair_weights(e, e, kap, b, T, 2 * 1600 + 140).real
    e1 = mp.e ** -1
    for k, g in zip(kap, got):
        w = lambda nu: (1 + (k - nu) ** 2) ** b / (1 + nu ** 2)
        # algebraic nu^{2b-2} tails need explicit breakpoints for tanh-sinh
        pts = sorted({-mp.inf, -1e4, -1e3, -100, -10, 0, 10, k - 50, k, k + 50, k + 500, 1e4,
                      mp.inf})
        flat = mp.quad(w, pts)
        osc = mp.quadosc(lambda nu: w(nu) * mp.cos(nu), [0, mp.inf], omega=1) \
            + mp.quadosc(lambda nu: w(-nu) * mp.cos(nu), [0, mp.inf], omega=1)
        want = ((1 + e1 ** 2) * flat - 2 * e1 * osc) / (2 * mp.pi)
        assert abs(g - float(want)) <= 1e-8 * float(want)


def test_boundary_norm_dft_path_close_to_exact():
    tr = _exp_trace()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        dft = boundary_space_norm(tr, 0.25, 0.25, method="dft")
    exact = boundary_space_norm(tr, 0.25, 0.25, method="exact")
    assert dft == pytest.approx(exact, rel=1e-2)


def test_strichartz_norm_of_free_gaussian():
    T, h = 0.5, 0.1
    x = h * np.arange(1, 121)
    times = np.linspace(0, T, 41)
    fields = []
    for t in times:
        z = 1 + 4j * t
        r2 = (x[:, None] - 6) ** 2 + (x[None, :] - 6) ** 2
        fields.append(WaveField(x, x, np.exp(-r2 / z) / z, t))
    # ||u(t)||_4^4 = pi / (4 (1 + 16 t^2)); integrate in time
    want = (math.pi / 4 * math.atan(2) / 4) ** 0.25
    assert strichartz_norm(fields, 0.0, (4, 4), T) == pytest.approx(want, rel=1e-4)
    with pytest.raises(ValueError):
        strichartz_norm(fields[:-1], 0.0, (4, 4), T)


BUMP = SeparableField(((1.0, Bump1D(1, 1.5, 0.5), Bump1D(1, 1.5, 0.5)),))


def test_hardy_quotient_properties():
    base = hardy_quotient(BUMP, 0.25)
    assert 0 < base < 1 and np.isfinite(base)
    near = SeparableField(((1.0, Bump1D(1, 0.6, 0.5), Bump1D(1, 0.6, 0.5)),))
    # moving the support toward the axes grows the weighted numerator
    h = 0.02
    x = h * np.arange(1, 151)
    d = np.minimum(x[:, None], x[None, :]) ** -0.5
    num = lambda f: np.sum(d * np.abs(f(x[:, None], x[None, :])) ** 2)
    assert num(near) > num(BUMP)
    assert np.isfinite(hardy_quotient(near, 0.25))
    assert hardy_quotient(BUMP, 0.01) <= 1.0
    assert hardy_quotient(BUMP, 0.25, h=0.01) == pytest.approx(base, rel=1e-2)


def test_hardy_quotient_rejects_boundary_support():
    touching = SeparableField(((1.0, ExpDecay1D(1, 1), ExpDecay1D(1, 1)),))
    with pytest.raises(SupportViolation):
        hardy_quotient(touching, 0.25)
    with pytest.raises(ParameterOutOfRange):
        hardy_quotient(BUMP, 0.5)


def test_extension_ratio_l2_is_one():
    ed = SeparableField(((1.0, ExpDecay1D(1, 1), ExpDecay1D(1, 1)),))
    assert extension_bound_ratio(ed, 0.0, h=0.1, L=14) == pytest.approx(1.0, abs=1e-12)


def test_extension_ratio_refinement_stable():
    ed = SeparableField(((1.0, ExpDecay1D(1, 1), ExpDecay1D(1, 1)),))
    r = {s: [extension_bound_ratio(ed, s, h=h, L=14) for h in (0.1, 0.05)]
         for s in (0.25, 0.45)}
    for v in r.values():
        assert np.isfinite(v).all() and abs(v[1] / v[0] - 1) <= 0.02
    assert r[0.45][1] >= r[0.25][1]


def _exp_zero_extension_oracle(s):
    # theta = atan k in both variables; the cos^{-2s} endpoint factor goes to QUADPACK's
    # algebraic weight
    H = math.pi / 2
    sing = lambda t: (math.cos(t) / (H - t)) ** (-2 * s) if t < H else 1.0

    def inner(c2):
        f = lambda t: (math.cos(t) ** 2 + c2 * math.sin(t) ** 2) ** s * sing(t)
        return 2 * quad(f, 0, H, weight="alg", wvar=(0, -2 * s), epsabs=1e-14,
                        epsrel=1e-12, limit=200)[0]

    f = lambda t: inner(math.cos(t) ** 2) * sing(t)
    total = 2 * quad(f, 0, H, weight="alg", wvar=(0, -2 * s), epsabs=1e-13, epsrel=1e-11,
                     limit=200)[0]
    return math.sqrt(total) / (2 * math.pi)


@pytest.mark.parametrize("s", [0.0, 0.25, 0.45])
def test_zero_extension_norm_exp_decay(s):
    ed = SeparableField(((1.0, ExpDecay1D(1, 1), ExpDecay1D(1, 1)),))
    assert zero_extension_norm(ed, s) == pytest.approx(_exp_zero_extension_oracle(s),
                                                       rel=1e-10)


def test_zero_extension_norm_matches_grid_for_smooth_data():
    f = SeparableField(((1.0, Bump1D(1, 3, 1), Gaussian1D(1, 2, 0.7)),
                        (-0.5, Gaussian1D(1, 4, 1), Bump1D(1, 2.5, 1.5))))
    grid = sobolev_norm_plane(sample_quadrant(f, 0.02, 8), 0.25, warn=False)
    assert zero_extension_norm(f, 0.25) == pytest.approx(grid, rel=1e-7)


def test_grid_misses_jump_tail():
    # the edge jump puts a k^{2s-2} tail beyond any grid's Nyquist frequency
    ed = SeparableField(((1.0, ExpDecay1D(1, 1), ExpDecay1D(1, 1)),))
    grid = sobolev_norm_plane(sample_quadrant(ed, 0.05, 14), 0.45, warn=False)
    assert grid < 0.6 * zero_extension_norm(ed, 0.45)


def test_linear_estimate_ratio_flags_zero_data():
    p = LinearProblem(T=0.5)
    x = 0.25 * np.arange(1, 17)
    b = utm_solve(p, x, np.linspace(0, 0.5, 5))
    r = linear_estimate_ratio(p, b, 0.0, (4, 4))
    assert r.zero_denominator and r.numerator == 0


def test_norm_report_fields():
    ga = SeparableField(((1.0, Gaussian1D(1, 3, 1), Gaussian1D(1, 3, 1)),))
    rep = norm_report(LinearProblem(u0=ga, T=0.5), 0, 3)
    d = rep.to_dict()
    assert tuple(d) == REPORT_KEYS[:6] + ("q", "p", "data_size_D", "lifespan", "c_constant")
    assert (d["q"], d["p"]) == ("3", "6")
    assert d["hs_u0"] == pytest.approx(math.sqrt(math.pi / 2), rel=1e-6)
    assert d["x_g0_low"] == 0.0


def test_norms_absolutely_homogeneous(gauss_field):
    lam = -2.5 + 1.0j
    scaled = gauss_field * lam
    pairs = [(sobolev_norm_plane, (0.3,)), (bessel_potential_norm, (0.3, 4)),
             (slobodecki_seminorm, (0.3, "plane"))]
    for fn, args in pairs:
        assert fn(scaled, *args) == pytest.approx(abs(lam) * fn(gauss_field, *args), rel=1e-8)
    g = gauss_field
    later = PlaneField(g.x1_nodes, g.x2_nodes, 0.5 * g.values, 1.0)
    series = [gauss_field, later]
    pair = admissible_pair(0, 3)
    assert strichartz_norm([f * lam for f in series], 0.0, pair, 1.0) == pytest.approx(
        abs(lam) * strichartz_norm(series, 0.0, pair, 1.0), rel=1e-8)
    tr = _exp_trace()
    tr3 = BoundaryTrace.separable(1.0, ((3.0, ExpDecay1D(1, 1), Profile("exp", 1.0)),))
    assert boundary_space_norm(tr3, 0.25, 0.25) == pytest.approx(
        3 * boundary_space_norm(tr, 0.25, 0.25), rel=1e-8)


def test_sobolev_norm_monotone_in_s(gauss_field):
    vals = [sobolev_norm_plane(gauss_field, s, warn=False) for s in (0, 0.1, 0.25, 0.4, 1.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_boundary_space_embedding():
    tr = _exp_trace()
    for b in (0.0, 0.25, 0.4):
        low = boundary_space_norm(tr, 0.0, b)
        assert all(boundary_space_norm(tr, sig, b) >= low for sig in (0.1, 0.25, 0.5))
