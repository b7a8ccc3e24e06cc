import numpy as np
import pytest
from scipy.integrate import quad

from qwave import ContourPath, QuadratureConfig
from qwave.exceptions import QuadratureFailure
from qwave.quadrature import (integrate_ray, integrate_real_axis, integrate_time,
                              laguerre_rule, panel_rule, rule_from_breaks, symmetric_rule)


def test_config_rejects_bad_values():
    with pytest.raises(ValueError, match="k_max"):
        QuadratureConfig(k_max=-1)
    with pytest.raises(ValueError, match="time_nodes"):
        QuadratureConfig(time_nodes=2)
    assert QuadratureConfig().with_(abs_tol=1e-8).abs_tol == 1e-8


def test_panel_rule_integrates_polynomials():
    x, w = panel_rule(0.0, 2.0, order=6)
    assert w.sum() == pytest.approx(2.0, abs=1e-14)
    assert w @ x ** 5 == pytest.approx(2.0 ** 6 / 6, rel=1e-13)


def test_symmetric_rule_mirrors_nodes():
    k, w = symmetric_rule(10.0, rate=3.0)
    np.testing.assert_array_equal(k, -k[::-1])
    np.testing.assert_array_equal(w, w[::-1])
    assert np.all(np.diff(k) > 0)


def test_real_axis_gaussian():
    res = integrate_real_axis(lambda k: np.exp(-k ** 2))
    assert res.value == pytest.approx(np.sqrt(np.pi), abs=1e-10)


def test_real_axis_shifted_phase():
    res = integrate_real_axis(lambda k: np.exp(2j * k - k ** 2), phase_bound=2.0)
    assert abs(res.value - np.sqrt(np.pi) * np.exp(-1.0)) < 1e-10


def test_real_axis_quadratic_phase_against_dense_rule():
    f = lambda k: np.exp(1j * k ** 2) * np.exp(-k ** 2 / 4)
    x, w = panel_rule(-40.0, 40.0, order=8, max_width=0.01)
    oracle = w @ f(x)
    got = integrate_real_axis(f, QuadratureConfig(abs_tol=1e-9),
                              phase_bound=lambda k: 2 * abs(k) + 1).value
    assert abs(got - oracle) < 1e-8
    # closed form: sqrt(pi / (1/4 - i))
    assert abs(oracle - np.sqrt(np.pi / (0.25 - 1j))) < 1e-10


@pytest.mark.parametrize("f, rate, expected", [
    (lambda r: np.exp(-2 * r), 2.0, 0.5),
    (lambda r: r * np.exp(-r), 1.0, 1.0),
])
def test_ray_closed_forms(f, rate, expected):
    assert integrate_ray(f, rate).value == pytest.approx(expected, abs=1e-12)


def test_ray_oscillatory_against_truncated_rule():
    f = lambda r: np.exp(-0.3 * r) * np.exp(0.1j * r ** 2)
    re = quad(lambda r: f(r).real, 0, 200, limit=5000)[0]
    im = quad(lambda r: f(r).imag, 0, 200, limit=5000)[0]
    got = integrate_ray(f, 0.3, QuadratureConfig(abs_tol=1e-9), phase_bound=lambda r: 0.2 * r)
    assert abs(got.value - (re + 1j * im)) < 1e-7


def test_laguerre_rule_on_plain_integrands():
    x, w = laguerre_rule(32, 2.0)
    assert w @ np.exp(-2 * x) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("f, expected", [
    (lambda t: np.ones_like(t), 1.0),
    (lambda t: t ** 3, 0.25),
    (lambda t: np.exp(10j * t), (np.exp(10j) - 1) / 10j),
])
def test_time_integral(f, expected):
    assert abs(integrate_time(f, 0.0, 1.0, phase_bound=10).value - expected) < 1e-10


def test_time_integral_gives_up():
    cfg = QuadratureConfig(max_panels=8, abs_tol=1e-14)
    with pytest.raises(QuadratureFailure):
        integrate_time(lambda t: np.exp(1e4j * t ** 2), 0.0, 1.0, cfg)


def test_contour_quadrant_boundary_closes():
    # analytic and decaying in the first quadrant
    f = lambda k: np.exp(1j * k) / (k + 1)
    path = ContourPath.quadrant_boundary()
    res = path.integrate(f, QuadratureConfig(k_max=200, abs_tol=1e-9), decay_rates=[1.0, 0.0],
                         phase_bounds=[0.0, 1.0])
    # the rays cancel up to the truncated real tail, O(1/k_max)
    assert abs(res.value) < 2e-2


def test_two_level_estimate_shrinks_with_panel_width():
    f = lambda x: np.exp(np.sin(3 * x))

    def q(n):
        x, w = rule_from_breaks(np.linspace(0, 3, n + 1), 2)
        return np.dot(w, f(x))

    est = [abs(q(2 * n) - q(n)) for n in (8, 16, 32)]
    assert est[1] <= est[0] / 2 and est[2] <= est[1] / 2


def test_contour_orientation_signed_lengths():
    cfg = QuadratureConfig(k_max=10.0)
    res = ContourPath.quadrant_boundary().integrate(lambda k: np.ones_like(k), cfg)
    # down the imaginary ray (-i * 10), then out along the real ray (+10)
    assert res.value == pytest.approx(10 - 10j, abs=1e-12)


def test_ray_without_decay_matches_real_axis_half():
    cfg = QuadratureConfig(k_max=30.0, abs_tol=1e-10)
    f = lambda k: np.exp(1j * 2 * k - 0.1 * k) / (1 + k * k)
    a = integrate_ray(f, 0.0, cfg, phase_bound=2.0).value
    b = integrate_real_axis(f, cfg, phase_bound=2.0, a=0.0, b=30.0, check_tail=False).value
    assert abs(a - b) <= 2 * cfg.abs_tol
