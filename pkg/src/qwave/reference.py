"""Crank-Nicolson ADI finite differences on a truncated quarter-plane.

An independent oracle for the transform solver: second order in space and
time, Dirichlet data g0, h0 on the near walls and zero on the far walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import FarWallLeak, GridMismatch, ValidationError
from .linear import GridForcing, LinearProblem
from .transforms import WaveField

LEAK_TOL = 1e-4
SETUP_TOL = 1e-8


@dataclass(frozen=True)
class FdConfig:
    L: float = 12.0
    n: int = 256
    dt: float = 1e-3
    far_bc: str = "zero"

    def __post_init__(self):
        errs = []
        if not self.L > 0:
            errs.append(("fd.L", "must be positive"))
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 4):
            errs.append(("fd.n", "must be an integer >= 4"))
        if not self.dt > 0:
            errs.append(("fd.dt", "must be positive"))
        if self.far_bc != "zero":
            errs.append(("fd.far_bc", "only zero Dirichlet far walls are supported"))
        if errs:
            raise ValidationError(errs)

    @property
    def h(self):
        return self.L / self.n

    @property
    def nodes(self):
        """Interior nodes x_j = j h, j = 1..n-1."""
        return self.h * np.arange(1, self.n)

    def refined(self):
        return FdConfig(self.L, 2 * self.n, self.dt / 2, self.far_bc)


def _check_far_walls(prob: LinearProblem, cfg: FdConfig, times):
    x = cfg.h * np.arange(cfg.n + 1)
    L = np.full_like(x, cfg.L)
    worst = float(np.abs(prob.u0(L, x)).max(initial=0.0))
    worst = max(worst, float(np.abs(prob.u0(x, L)).max(initial=0.0)))
    for t in np.linspace(0.0, max(times), 9):
        worst = max(worst, abs(complex(prob.g0(cfg.L, t))), abs(complex(prob.h0(cfg.L, t))))
    if worst > SETUP_TOL:
        raise FarWallLeak(f"data modulus {worst:.2e} at the far walls exceeds {SETUP_TOL:g}; "
                          "increase L")


class _Tridiag:
    """LU factors of I - coef * D2 (3-point second difference), reused every step."""

    def __init__(self, m, h, coef):
        off = np.full(m - 1, -coef / h ** 2, dtype=complex)
        diag = np.full(m, 1 + 2 * coef / h ** 2, dtype=complex)
        self.f = lapack.zgttrf(off, diag, off.copy())
        if self.f[-1] != 0:
            raise np.linalg.LinAlgError("singular tridiagonal system")

    def solve(self, rhs):
        dl, d, du, du2, ipiv, _ = self.f
        x, info = lapack.zgttrs(dl, d, du, du2, ipiv, rhs)
        return x


def _d2(U, h, axis):
    """Second difference along ``axis`` of the full (edges included) array, interior only."""
    if axis == 0:
        return (U[2:, 1:-1] - 2 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / h ** 2
    return (U[1:-1, 2:] - 2 * U[1:-1, 1:-1] + U[1:-1, :-2]) / h ** 2


class _Stepper:
    def __init__(self, prob, cfg: FdConfig, nonlinear=None):
        self.prob = prob
        self.cfg = cfg
        self.nl = nonlinear  # (alpha, sign) or None
        n = cfg.n
        self.x = cfg.h * np.arange(n + 1)
        self.f = prob.f
        if isinstance(self.f, GridForcing):
            raise TypeError("the finite-difference oracle takes analytic forcing only")

    def tri(self, m, h, c):
        key = (m, h, c)
        if getattr(self, "_tri_key", None) != key:
            self._tri = _Tridiag(m, h, c)
            self._tri_key = key
        return self._tri

    def edges(self, U, t):
        """Write Dirichlet values at time t into the full array."""
        x = self.x
        U[:, 0] = self.prob.g0(x, t)
        U[0, :] = self.prob.h0(x, t)
        U[-1, :] = 0
        U[:, -1] = 0
        return U

    def forcing(self, t, Umid=None):
        out = np.zeros((self.cfg.n - 1,) * 2, dtype=complex)
        if not self.f.is_zero:
            xi = self.x[1:-1]
            out += self.f(xi[:, None], xi[None, :], t)
        if self.nl is not None and Umid is not None:
            a, sg = self.nl
            out += sg * np.abs(Umid) ** (a - 1) * Umid
        return out

    def step(self, U, t, dt, F):
        """Peaceman-Rachford step for u_t = i(D11 + D22)u - i F."""
        h = self.cfg.h
        c = 0.5j * dt
        m = self.cfg.n - 1
        # boundary values of the intermediate level on the x1 = 0 wall
        x = self.x
        b0 = np.asarray(self.prob.h0(x, t), dtype=complex) * np.ones_like(x)
        b1 = np.asarray(self.prob.h0(x, t + dt), dtype=complex) * np.ones_like(x)
        b0[-1] = b1[-1] = 0
        d2b0 = np.zeros_like(b0)
        d2b1 = np.zeros_like(b1)
        d2b0[1:-1] = (b0[2:] - 2 * b0[1:-1] + b0[:-2]) / h ** 2
        d2b1[1:-1] = (b1[2:] - 2 * b1[1:-1] + b1[:-2]) / h ** 2
        star_wall = 0.5 * ((b1 - c * d2b1) + (b0 + c * d2b0))
        # sweep 1: implicit in x1, explicit in x2
        rhs = U[1:-1, 1:-1] + c * _d2(U, h, 1) - 0.5j * dt * F
        rhs[0, :] += c / h ** 2 * star_wall[1:-1]
        S = np.zeros_like(U)
        S[1:-1, 1:-1] = self.tri(m, h, c).solve(rhs)
        S[0, :] = star_wall
        # sweep 2: implicit in x2, explicit in x1
        rhs = S[1:-1, 1:-1] + c * _d2(S, h, 0) - 0.5j * dt * F
        g1 = np.asarray(self.prob.g0(x, t + dt), dtype=complex) * np.ones_like(x)
        rhs[:, 0] += c / h ** 2 * g1[1:-1]
        V = S  # reuse the buffer, interior and walls are overwritten below
        V[1:-1, 1:-1] = self.tri(m, h, c).solve(rhs.T).T
        return self.edges(V, t + dt)


def cn_solve(prob, cfg: FdConfig, times, correctors: int = 2):
    """Crank-Nicolson ADI run; returns WaveFields on the interior nodes at ``times``.

    ``prob`` is a LinearProblem or an NlsProblem; the nonlinear term uses the
    midpoint value with ``correctors`` fixed-point sweeps per step.
    """
    nonlinear = None
    if hasattr(prob, "linear"):
        nonlinear = (float(prob.alpha), prob.sign)
        prob = prob.linear
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    _check_far_walls(prob, cfg, times)
    st = _Stepper(prob, cfg, nonlinear)
    x = st.x
    U = np.zeros((cfg.n + 1,) * 2, dtype=complex)
    U[1:-1, 1:-1] = prob.u0(x[1:-1, None], x[None, 1:-1])
    st.edges(U, 0.0)
    out, t = [], 0.0
    for target in times:
        span = target - t
        nsteps = int(math.ceil(span / cfg.dt - 1e-9)) if span > 0 else 0
        dt = span / nsteps if nsteps else 0.0
        for _ in range(nsteps):
            if nonlinear is None:
                U = st.step(U, t, dt, st.forcing(t + 0.5 * dt))
            else:
                V = U
                for _ in range(correctors + 1):
                    mid = 0.5 * (U[1:-1, 1:-1] + V[1:-1, 1:-1])
                    V = st.step(U, t, dt, st.forcing(t + 0.5 * dt, mid))
                U = V
            t += dt
            leak = max(np.abs(U[-2, :]).max(), np.abs(U[:, -2]).max())
            if not np.isfinite(leak) or leak > LEAK_TOL:
                raise FarWallLeak(f"|u| = {leak:.2e} next to the far wall at t = {t:.4g}")
        t = target
        out.append(WaveField(x[1:-1], x[1:-1], U[1:-1, 1:-1].copy(), float(target)))
    return out


def discrete_mass(field: WaveField) -> float:
    h = float(field.x1_nodes[1] - field.x1_nodes[0])
    return float(np.sum(np.abs(field.values) ** 2) * h * h)


def compare_fields(a, b, region=(1.0, 6.0)):
    """Relative L2 (b is the reference), sup and per-time errors on region^2.

    The two series must share times and nodes inside the region; nothing is
    interpolated.
    """
    fa = getattr(a, "fields", a)
    fb = getattr(b, "fields", b)
    if len(fa) != len(fb):
        raise GridMismatch("series have different numbers of slices")
    lo, hi = region
    per, num, den, sup = [], 0.0, 0.0, 0.0
    for u, v in zip(fa, fb):
        if abs(u.time - v.time) > 1e-12:
            raise GridMismatch(f"times differ: {u.time} vs {v.time}")
        sel = []
        for xa, xb in ((u.x1_nodes, v.x1_nodes), (u.x2_nodes, v.x2_nodes)):
            ma = (xa >= lo - 1e-12) & (xa <= hi + 1e-12)
            mb = (xb >= lo - 1e-12) & (xb <= hi + 1e-12)
            if ma.sum() != mb.sum() or not np.allclose(xa[ma], xb[mb], rtol=0, atol=1e-10):
                raise GridMismatch("nodes inside the region do not coincide")
            sel.append((ma, mb))
        (m1a, m1b), (m2a, m2b) = sel
        d = u.values[np.ix_(m1a, m2a)] - v.values[np.ix_(m1b, m2b)]
        ref = v.values[np.ix_(m1b, m2b)]
        e2, r2 = float(np.sum(np.abs(d) ** 2)), float(np.sum(np.abs(ref) ** 2))
        s = float(np.abs(d).max(initial=0.0))
        per.append({"time": u.time, "rel_l2": math.sqrt(e2 / r2) if r2 > 0 else math.sqrt(e2),
                    "sup": s})
        num += e2
        den += r2
        sup = max(sup, s)
    return {"rel_l2": math.sqrt(num / den) if den > 0 else math.sqrt(num), "sup": sup,
            "per_time": per}


class CrankNicolsonSolver(BaseEstimator):
    """Estimator form of :func:`cn_solve`."""

    def __init__(self, L: float = 12.0, n: int = 256, dt: float = 1e-3, correctors: int = 2):
        self.L = L
        self.n = n
        self.dt = dt
        self.correctors = correctors

    def fit(self, problem, y=None):
        self.problem_ = problem
        self.config_ = FdConfig(self.L, self.n, self.dt)
        return self

    def solve(self, times):
        check_is_fitted(self, "problem_")
        return cn_solve(self.problem_, self.config_, times, self.correctors)
