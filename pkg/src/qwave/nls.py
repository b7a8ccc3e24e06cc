"""Nonlinear quarter-plane problem by Picard iteration of the linear solution map."""

from __future__ import annotations

import json
import math
import time as _time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import NoConvergence, ParameterOutOfRange
from .linear import GridForcing, LinearProblem, SolutionBundle, UTMSolver
from .spaces import (AdmissiblePair, PlaneField, RatioResult, admissible_pair,
                     sobolev_norm_plane, strichartz_norm, time_integral, zero_extend)
from .transforms import WaveField


@dataclass
class NlsProblem:
    """i u_t + Laplacian u = sign |u|^{alpha-1} u with the data of ``linear``."""

    linear: LinearProblem
    s: float = 0.0
    alpha: float = 3.0
    sign: int = 1
    pair: AdmissiblePair = field(init=False)

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ParameterOutOfRange("sign must be +1 (defocusing) or -1 (focusing)")
        if not self.linear.f.is_zero:
            raise ValueError("the forcing slot is reserved for the nonlinearity")
        self.pair = admissible_pair(self.s, self.alpha)

    @property
    def T(self):
        return self.linear.T


def _power(u, alpha, sign):
    u = np.asarray(u, dtype=complex)
    return sign * np.abs(u) ** (alpha - 1) * u


def nonlinearity(fld: WaveField, alpha, sign) -> WaveField:
    """Pointwise sign * |u|^{alpha-1} u."""
    return fld.with_values(_power(fld.values, float(alpha), sign))


# bookkeeping -------------------------------------------------------------------

@dataclass
class IterationLog:
    records: list = field(default_factory=list)
    converged: bool = False

    def add(self, **rec):
        self.records.append(rec)

    @property
    def factors(self):
        return [r["factor"] for r in self.records if r["factor"] is not None]

    @property
    def diff_norms(self):
        return [r["diff_norm"] for r in self.records]

    def __len__(self):
        return len(self.records)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


def _series_norm(fields, prob: NlsProblem):
    return strichartz_norm(fields, prob.s, prob.pair, prob.T)


def _plane(fields, edges=None):
    out = []
    for f in fields:
        eg, eh = edges(f) if edges else (None, None)
        out.append(zero_extend(f, eg, eh))
    return out


def _edges(lin: LinearProblem):
    def edges(f):
        return lin.g0(f.x1_nodes, f.time), lin.h0(f.x2_nodes, f.time)
    return edges


def _forcing_from(prob: NlsProblem, fields) -> GridForcing:
    """Nonlinearity of the iterate on the grid x_j = j h, j = 0..n, edges from the data."""
    lin = prob.linear
    x = fields[0].x1_nodes
    if not np.array_equal(x, fields[0].x2_nodes):
        raise ValueError("Picard iteration needs the same nodes in x1 and x2")
    xb = np.concatenate([[0.0], x])
    times = np.array([f.time for f in fields])
    vals = np.empty((times.size, xb.size, xb.size), dtype=complex)
    for i, f in enumerate(fields):
        t = f.time
        vals[i, 1:, 1:] = f.values
        vals[i, 1:, 0] = lin.g0(x, t)
        vals[i, 0, 1:] = lin.h0(x, t)
        vals[i, 0, 0] = lin.g0(0.0, t)
    return GridForcing(times, xb, _power(vals, float(prob.alpha), prob.sign))


class _Iteration:
    """Linear part computed once; each step only adds the Duhamel term."""

    def __init__(self, prob: NlsProblem, x, times, solver: UTMSolver | None = None):
        self.prob = prob
        self.x = np.asarray(x, dtype=float)
        self.times = np.asarray(times, dtype=float)
        self.solver = solver or UTMSolver()
        self.solver.fit(prob.linear)
        self.linear = self.solver.solve(self.x, self.x, self.times)

    def step(self, fields):
        F = _forcing_from(self.prob, fields)
        out, Js = [], []
        for lf in self.linear.fields:
            J = self.solver.forcing_term(F, self.x, self.x, lf.time)
            Js.append(J)
            out.append(lf.with_values(lf.values - 1j * J))
        self.last_J = np.stack(Js)
        return out

    def bundle(self, fields, J, diag):
        tb = dict(self.linear.term_breakdown)
        tb["J"] = J if J is not None else np.zeros_like(tb["I"])
        return SolutionBundle(fields, tb, diag)


def picard_step(prob: NlsProblem, u_n, solver: UTMSolver | None = None) -> SolutionBundle:
    """One application of the iteration map to the series ``u_n``."""
    fields = getattr(u_n, "fields", u_n)
    it = _Iteration(prob, fields[0].x1_nodes, [f.time for f in fields], solver)
    out = it.step(fields)
    return it.bundle(out, it.last_J, {})


def picard_solve(prob: NlsProblem, x, times, tol: float = 1e-8, max_iter: int = 20,
                 solver: UTMSolver | None = None, patience: int = 3):
    """Iterate from the zero guess until the Strichartz difference norm is <= tol.

    ``times`` must span [0, T]. Raises NoConvergence when the contraction
    factor stays >= 1 for ``patience`` consecutive iterations.
    """
    times = np.asarray(times, dtype=float)
    it = _Iteration(prob, x, times, solver)
    zero = [lf.with_values(np.zeros_like(lf.values)) for lf in it.linear.fields]
    log = IterationLog()
    u = zero
    prev, bad, J = None, 0, None
    edges = _edges(prob.linear)
    for n in range(1, max_iter + 1):
        t0 = _time.perf_counter()
        # the zero guess has zero nonlinearity, so iterate 1 is the linear solution
        if n == 1:
            new = it.linear.fields
        else:
            new = it.step(u)
            J = it.last_J
        diff = [a.with_values(a.values - b.values) for a, b in zip(new, u)]
        dn = _series_norm(_plane(diff), prob)
        un = _series_norm(_plane(new, edges), prob)
        factor = None
        if prev is not None:
            factor = dn / prev if prev > 0 else 0.0
        log.add(iteration=n, strichartz_norm=un, diff_norm=dn, factor=factor,
                wall_time=_time.perf_counter() - t0)
        u = new
        if dn <= tol:
            log.converged = True
            break
        if not np.isfinite(dn) or (factor is not None and factor >= 1):
            bad += 1
        else:
            bad = 0
        if bad >= patience:
            raise NoConvergence(
                f"contraction factor >= 1 for {patience} consecutive iterations; "
                "T too large for the data", log=log)
        prev = dn
    if not log.converged:
        warnings.warn(f"Picard iteration stopped at max_iter={max_iter} with difference "
                      f"norm {log.records[-1]['diff_norm']:.3e}", RuntimeWarning, stacklevel=2)
    diag = {"iterations": len(log), "converged": log.converged}
    return it.bundle(u, J, diag), log


def fixed_point_residual(prob: NlsProblem, bundle, solver: UTMSolver | None = None) -> float:
    """Strichartz norm of u - picard_step(u)."""
    fields = bundle.fields
    stepped = picard_step(prob, fields, solver).fields
    diff = [a.with_values(a.values - b.values) for a, b in zip(fields, stepped)]
    return _series_norm(_plane(diff), prob)


class PicardSolver(BaseEstimator):
    """Estimator form of :func:`picard_solve`; ``fit`` takes an NlsProblem."""

    def __init__(self, config=None, tol: float = 1e-8, max_iter: int = 20):
        self.config = config
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, problem: NlsProblem, y=None):
        if not isinstance(problem, NlsProblem):
            raise TypeError("PicardSolver.fit expects an NlsProblem")
        self.problem_ = problem
        return self

    def solve(self, x, times) -> SolutionBundle:
        check_is_fitted(self, "problem_")
        bundle, self.log_ = picard_solve(self.problem_, x, times, self.tol, self.max_iter,
                                         UTMSolver(self.config))
        return bundle


# lifespan ----------------------------------------------------------------------

class Lifespan(NamedTuple):
    t_max: float
    unconstrained: bool = False
    critical: bool = False

    def to_json_value(self):
        return "unconstrained" if self.unconstrained else self.t_max


def _frac(v):
    """Exact rational for ints, Fractions and floats with short binary expansions."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    f = Fraction(float(v))
    return f if f.denominator <= 2 ** 20 else None


def lifespan_bound(report_or_D, s, alpha, c: float = 1.0) -> Lifespan:
    """Largest T with (2c)^alpha D^{alpha-1} T^{(3-s-alpha(1-s))/2} < 1.

    At the critical alpha the exponent vanishes: unconstrained when the
    small-data condition (2c)^alpha D^{alpha-1} < 1 holds, zero otherwise.
    ``c`` is a heuristic stand-in for the unspecified constant of the estimate.
    """
    D = getattr(report_or_D, "data_size_D", report_or_D)
    if c <= 0:
        raise ParameterOutOfRange("c must be positive")
    if D == 0:
        return Lifespan(math.inf, unconstrained=True)
    fs, fa, fc, fD = _frac(s), _frac(alpha), _frac(c), _frac(D)
    exact = None not in (fs, fa, fc, fD) and fa.denominator == 1
    if exact:
        e = (3 - fs - fa * (1 - fs)) / 2
        A = (2 * fc) ** int(fa) * fD ** (int(fa) - 1)
    else:
        e = (3 - float(s) - float(alpha) * (1 - float(s))) / 2
        A = (2 * float(c)) ** float(alpha) * float(D) ** (float(alpha) - 1)
    if e < 0:
        raise ParameterOutOfRange("alpha above the critical exponent")
    if e == 0:
        if A < 1:
            return Lifespan(math.inf, unconstrained=True, critical=True)
        return Lifespan(0.0, critical=True)
    if exact:
        inv = 1 / e
        if inv.denominator == 1:
            return Lifespan(float(Fraction(1) / A ** int(inv)))
    return Lifespan(float(A) ** (-1.0 / float(e)))


# nonlinear estimates --------------------------------------------------------------

def nonlinear_estimate_ratio(phi, psi, s, alpha, T):
    """Empirical forms of the power and difference estimates on a time series.

    ratio1 = ||N(phi)||_{L^1 H^s} / (T^{(q-alpha)/q} ||phi||^alpha_{L^q H^{s,p}})
    ratio2 = ||N(phi) - N(psi)||_{L^1 H^s} /
             (T^{(q-alpha)/q} (||phi||^{alpha-1} + ||psi||^{alpha-1}) ||phi - psi||)
    with N(u) = |u|^{alpha-1} u and the pair from :func:`admissible_pair`.
    """
    pair = admissible_pair(s, alpha)
    q = float(pair.q)
    a = float(alpha)
    phi = [f if isinstance(f, PlaneField) else zero_extend(f) for f in getattr(phi, "fields", phi)]
    psi = [f if isinstance(f, PlaneField) else zero_extend(f) for f in getattr(psi, "fields", psi)]
    times = [f.time for f in phi]
    sf = float(s)

    def l1(series):
        return time_integral([sobolev_norm_plane(f, sf, warn=False) for f in series], times, T)

    def N(f):
        return PlaneField(f.x1_nodes, f.x2_nodes, _power(f.values, a, 1), f.time)

    nphi = strichartz_norm(phi, sf, pair, T)
    npsi = strichartz_norm(psi, sf, pair, T)
    tf = T ** ((q - a) / q)
    num1 = l1([N(f) for f in phi])
    den1 = tf * nphi ** a
    r1 = (RatioResult(math.inf, num1, den1, True) if den1 == 0
          else RatioResult(num1 / den1, num1, den1))
    dN = [PlaneField(f.x1_nodes, f.x2_nodes, N(f).values - N(g).values, f.time)
          for f, g in zip(phi, psi)]
    dd = [PlaneField(f.x1_nodes, f.x2_nodes, f.values - g.values, f.time) for f, g in zip(phi, psi)]
    num2 = l1(dN)
    den2 = tf * (nphi ** (a - 1) + npsi ** (a - 1)) * strichartz_norm(dd, sf, pair, T)
    if num2 == 0:
        r2 = RatioResult(0.0, 0.0, den2)
    elif den2 == 0:
        r2 = RatioResult(math.inf, num2, den2, True)
    else:
        r2 = RatioResult(num2 / den2, num2, den2)
    return r1, r2
