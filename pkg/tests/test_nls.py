import json
import math
from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone

from qwave import (FdConfig, Gaussian1D, LinearProblem, NlsProblem, PicardSolver,
                   SeparableField, WaveField, cn_solve, compare_fields, fixed_point_residual,
                   lifespan_bound, nonlinear_estimate_ratio, picard_solve, picard_step,
                   utm_solve)
from qwave.exceptions import NoConvergence, ParameterOutOfRange
from qwave.nls import nonlinearity


def _gauss_nls(amp=0.1, T=0.1, sign=1, alpha=3):
    u0 = SeparableField(((1.0, Gaussian1D(amp, 3, 1), Gaussian1D(1, 3, 1)),))
    return NlsProblem(LinearProblem(u0=u0, T=T), s=0, alpha=alpha, sign=sign)


def test_nonlinearity_examples():
    x = np.array([1.0, 2.0])
    f = WaveField(x, x, np.array([[2.0, 0], [0, 0]]))
    for sign in (1, -1):
        assert nonlinearity(f, 3, sign).values[0, 0] == sign * 8
        g = WaveField(x, x, np.array([[1j, 0], [0, 0]]))
        assert nonlinearity(g, 2, sign).values[0, 0] == sign * 1j
    assert not np.any(nonlinearity(f.with_values(np.zeros((2, 2))), 3, 1).values)


def test_problem_validation():
    with pytest.raises(ParameterOutOfRange):
        _gauss_nls(sign=2)
    with pytest.raises(ParameterOutOfRange):
        NlsProblem(LinearProblem(T=1.0), s=0.4, alpha=5)
    assert _gauss_nls().pair.q == 3


def test_zero_data_converges_at_once():
    prob = NlsProblem(LinearProblem(T=0.1))
    x = 0.5 * np.arange(1, 9)
    bundle, log = picard_solve(prob, x, np.linspace(0, 0.1, 5))
    assert log.converged and len(log) == 1
    assert not np.any(bundle.values)


@pytest.fixture(scope="module")
def small_run():
    prob = _gauss_nls()
    x = 0.2 * np.arange(1, 41)
    times = np.linspace(0, 0.1, 11)
    bundle, log = picard_solve(prob, x, times, tol=1e-8)
    return prob, x, times, bundle, log


def test_first_iterate_is_linear_solution(small_run):
    prob, x, times, _, _ = small_run
    lin = utm_solve(prob.linear, x, times)
    zero = [f.with_values(np.zeros_like(f.values)) for f in lin.fields]
    np.testing.assert_allclose(picard_step(prob, zero).values, lin.values, atol=1e-14)


def test_small_gaussian_contracts(small_run):
    prob, _, _, bundle, log = small_run
    assert log.converged and len(log) <= 8
    assert max(log.factors) < 0.5
    assert fixed_point_residual(prob, bundle) <= 2e-8
    recs = [json.loads(line) for line in log.to_jsonl().splitlines()]
    assert [r["iteration"] for r in recs] == list(range(1, len(log) + 1))


def test_sign_linearity_of_second_iterate(small_run):
    prob, x, times, _, _ = small_run
    lin = utm_solve(prob.linear, x, times)
    plus = picard_step(prob, lin)
    minus = picard_step(_gauss_nls(sign=-1), lin)
    np.testing.assert_allclose(plus.values - minus.values,
                               -2j * plus.term_breakdown["J"], atol=1e-13)


def test_pde_residual_and_fd_gap():
    prob = _gauss_nls()
    h = 0.1
    x = h * np.arange(1, 81)
    times = np.linspace(0, 0.1, 11)
    bundle, _ = picard_solve(prob, x, times, tol=1e-10)
    u = bundle.values
    dt = times[1] - times[0]
    j = 5
    ut = (u[j + 1] - u[j - 1]) / (2 * dt)
    U = u[j]
    lap = (U[2:, 1:-1] + U[:-2, 1:-1] + U[1:-1, 2:] + U[1:-1, :-2] - 4 * U[1:-1, 1:-1]) / h ** 2
    core = U[1:-1, 1:-1]
    res = 1j * ut[1:-1, 1:-1] + lap - np.abs(core) ** 2 * core
    assert np.abs(res).max() <= 1e-2
    fd = cn_solve(prob, FdConfig(L=12.0, n=120, dt=1e-3), [0.05, 0.1])
    sol = [bundle.fields[5], bundle.fields[10]]
    assert compare_fields(sol, fd, region=(1.0, 6.0))["rel_l2"] <= 2e-2


def test_large_data_does_not_contract():
    prob = _gauss_nls(amp=10.0, T=1.0)
    x = 0.25 * np.arange(1, 61)
    with pytest.raises(NoConvergence) as err:
        picard_solve(prob, x, np.linspace(0, 1.0, 21))
    assert err.value.log is not None and len(err.value.log) >= 3


def test_picard_estimator():
    est = PicardSolver(tol=1e-6, max_iter=5)
    assert clone(est).get_params()["max_iter"] == 5
    with pytest.raises(TypeError):
        est.fit(LinearProblem(T=1.0))
    est.fit(NlsProblem(LinearProblem(T=0.1)))
    b = est.solve(0.5 * np.arange(1, 5), np.linspace(0, 0.1, 3))
    assert est.log_.converged and b.values.shape == (3, 4, 4)


def test_lifespan_examples():
    assert lifespan_bound(1, 0, 2, 1) == (1 / 16, False, False)
    assert Fraction(lifespan_bound(1, 0, 2, 1).t_max) == Fraction(1, 16)
    crit = lifespan_bound(1, 0, 3, 1)
    assert crit.t_max == 0 and crit.critical
    small = lifespan_bound(0.1, 0, 3, 1)
    assert small.unconstrained and small.critical
    assert lifespan_bound(0, 0.25, 2).unconstrained
    # T = A^{-1/e}, e = (3 - s - alpha (1 - s)) / 2
    D, s, a, c = 0.7, 0.25, 2.5, 0.5
    e = (3 - s - a * (1 - s)) / 2
    assert lifespan_bound(D, s, a, c).t_max == pytest.approx(
        ((2 * c) ** a * D ** (a - 1)) ** (-1 / e), rel=1e-14)
    with pytest.raises(ParameterOutOfRange):
        lifespan_bound(1, 0, 3, 0)


def _series(values_fn, h=0.2, n=30, times=np.linspace(0, 1, 11)):
    x = h * np.arange(1, n + 1)
    return [WaveField(x, x, values_fn(x[:, None], x[None, :], t), t) for t in times]


def test_nonlinear_ratios_flags_and_zero_difference():
    zero = _series(lambda a, b, t: 0 * a * b)
    r1, r2 = nonlinear_estimate_ratio(zero, zero, 0, 3, 1.0)
    assert r1.zero_denominator
    g = _series(lambda a, b, t: np.exp(-(a - 3) ** 2 - (b - 3) ** 2) + 0 * t)
    r1, r2 = nonlinear_estimate_ratio(g, g, 0, 3, 1.0)
    assert math.isfinite(r1.value) and r1.value > 0
    assert r2.value == 0 and r2.numerator == 0


def test_difference_norms_non_increasing(small_run):
    d = small_run[4].diff_norms
    assert all(b <= a for a, b in zip(d[1:], d[2:]))


def test_small_data_linear_limit():
    x = 0.2 * np.arange(1, 41)
    times = np.linspace(0, 0.1, 11)
    scaled = []
    for eps in (0.1, 0.01, 0.001):
        prob = _gauss_nls(amp=eps)
        u, _ = picard_solve(prob, x, times, tol=1e-6 * eps ** 3)
        lin = utm_solve(prob.linear, x, times)
        scaled.append(np.abs(u.values - lin.values).max() / eps ** 3)
    assert max(scaled) / min(scaled) <= 1.01
