"""Unified-transform evaluation of the forced linear Schrodinger equation on
the quarter-plane with Dirichlet data.

The solution is

    u = I - i J + K1 + K2

with I the initial-data term, J the forcing term and K1, K2 the boundary
terms carried by g0 (edge x2 = 0) and h0 (edge x1 = 0). Each term is a double
spectral integral; all of them are evaluated on one symmetric k-grid so that
odd combinations like g^(k) - g^(-k) are exact reflections of arrays.
"""

from __future__ import annotations

import time as _time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import CornerMismatchWarning, InsufficientGrid, SlowDecay
from .families import (ZERO_FIELD, ZERO_FORCING, SeparableField)
from .quadrature import (QuadratureConfig, laguerre_rule, panel_rule, symmetric_rule)
from .transforms import BoundaryTrace, WaveField, hlft_matrix
from .validation import check_nodes, check_times

FOUR_PI2 = 4 * np.pi ** 2


@dataclass
class GridForcing:
    """Forcing sampled on a uniform grid x_j = j h (j = 0..n, edges included)
    at uniformly spaced times; used for Picard iterates."""

    times: np.ndarray
    x_nodes: np.ndarray
    values: np.ndarray  # (len(times), len(x), len(x))

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.x_nodes = np.asarray(self.x_nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.times.size, self.x_nodes.size, self.x_nodes.size):
            raise ValueError("GridForcing values must have shape (nt, nx, nx)")
        if self.x_nodes[0] != 0.0:
            raise ValueError("GridForcing grid must start at the boundary x = 0")
        self._spline = None

    @property
    def is_zero(self):
        return not np.any(self.values)

    @property
    def h(self):
        return float(self.x_nodes[1] - self.x_nodes[0])

    def at(self, t):
        if self._spline is None:
            if self.times.size >= 4:
                self._spline = CubicSpline(self.times, self.values, axis=0)
            else:
                from scipy.interpolate import interp1d
                self._spline = interp1d(self.times, self.values, axis=0)
        return self._spline(t)

    def __call__(self, x1, x2, t):
        raise TypeError("GridForcing is sampled; use .at(t) for grid values")


@dataclass
class LinearProblem:
    u0: SeparableField = ZERO_FIELD
    f: object = ZERO_FORCING
    g0: Optional[BoundaryTrace] = None
    h0: Optional[BoundaryTrace] = None
    T: float = 1.0
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)
    corner_residual: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        self.g0 = self.g0 if self.g0 is not None else BoundaryTrace.zero(self.T)
        self.h0 = self.h0 if self.h0 is not None else BoundaryTrace.zero(self.T)
        for name, tr in (("g0", self.g0), ("h0", self.h0)):
            if abs(tr.T - self.T) > 1e-12 * self.T:
                raise ValueError(f"{name}.T = {tr.T} differs from problem T = {self.T}")
        ts = np.linspace(0.0, self.T, 33)
        self.corner_residual = float(np.max(np.abs(self.g0(0.0, ts) - self.h0(0.0, ts))))
        if self.corner_residual > 1e-8:
            warnings.warn(f"corner data mismatch |g0(0,t) - h0(0,t)| = "
                          f"{self.corner_residual:.2e}", CornerMismatchWarning, stacklevel=2)

    def scaled_sum(self, a, other: "LinearProblem", b) -> "LinearProblem":
        """The problem with data a*self + b*other."""
        if isinstance(self.f, GridForcing) or isinstance(other.f, GridForcing):
            raise TypeError("superposition of sampled forcing is not supported")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CornerMismatchWarning)
            return LinearProblem(a * self.u0 + b * other.u0, a * self.f + b * other.f,
                                 a * self.g0 + b * other.g0, a * self.h0 + b * other.h0,
                                 self.T, self.cfg)


@dataclass
class SolutionBundle:
    fields: list
    term_breakdown: dict
    diagnostics: dict

    def __post_init__(self):
        tb = self.term_breakdown
        for j, fld in enumerate(self.fields):
            recon = tb["I"][j] - 1j * tb["J"][j] + tb["K1"][j] + tb["K2"][j]
            scale = max(1.0, float(np.abs(fld.values).max(initial=0.0)))
            assert np.allclose(recon, fld.values, rtol=0, atol=1e-13 * scale), \
                "breakdown does not sum to field"

    @property
    def times(self):
        return np.array([f.time for f in self.fields])

    @property
    def values(self):
        return np.stack([f.values for f in self.fields])


# spectral engine --------------------------------------------------------------

def _odd(v, axis=0):
    """v(k) - v(-k) on a symmetric grid."""
    return v - np.flip(v, axis=axis)


class _Engine:
    """Quadrature grids and cached transforms for one (config, horizon, x-range)."""

    def __init__(self, cfg: QuadratureConfig, T: float, x_max: float,
                 tail_correction: bool = True):
        self.cfg = cfg
        self.T = float(T)
        self.x_max = float(x_max)
        self.tail_correction = tail_correction
        K = cfg.k_max
        m = cfg.time_nodes
        self.k, self.wk = symmetric_rule(K, lambda k: self.x_max + 2 * k * self.T, m,
                                         cfg.max_panels)
        half = self.k.size // 2
        self.kp, self.wp = self.k[half:], self.wk[half:]
        self.r, self.wr = panel_rule(0.0, K, lambda r: 2 * r * self.T + 1.0, m,
                                     max_panels=cfg.max_panels)
        self.omega_max = 2 * K * K
        self._ft_cache = {}
        self._time_rules = {}
        self._a0_cache = {}
        self._psi_cache = {}
        self._last = {}
        yl, wl = laguerre_rule(40, 1.0)
        self._lag = (np.asarray(yl), np.asarray(wl))

    # helpers ---------------------------------------------------------------
    def time_rule(self, upper):
        key = round(float(upper), 14)
        if key not in self._time_rules:
            self._time_rules[key] = panel_rule(0.0, upper, self.omega_max,
                                               self.cfg.time_nodes,
                                               max_panels=10 * self.cfg.max_panels)
        return self._time_rules[key]

    def ft1(self, f):
        """Half-line transform of a 1-D family on the k-grid (cached)."""
        if f not in self._ft_cache:
            E, x = hlft_matrix(self.k, f.support(), f.scale(), self.cfg)
            self._ft_cache[f] = E @ f(x) if x.size else np.zeros(self.k.size, complex)
        return self._ft_cache[f]

    def prop(self, x, t):
        """E[x, k] = w_k e^{ikx - ik^2 t}."""
        return np.exp(1j * np.outer(x, self.k) - 1j * (self.k ** 2) * t) * self.wk

    # terms ------------------------------------------------------------------
    def initial(self, u0: SeparableField, x1, x2, t):
        out = np.zeros((x1.size, x2.size), dtype=complex)
        if u0.is_zero:
            return out
        E1 = self.prop(x1, t)
        E2 = E1 if np.array_equal(x1, x2) else self.prop(x2, t)
        for c, a, b in u0.terms:
            if c == 0 or a.is_zero or b.is_zero:
                continue
            out += c * np.outer(E1 @ _odd(self.ft1(a)), E2 @ _odd(self.ft1(b)))
        return out / FOUR_PI2

    def forcing(self, f, x1, x2, t):
        """The J-sum (the solution carries -i J)."""
        out = np.zeros((x1.size, x2.size), dtype=complex)
        if f is None or f.is_zero or t <= 0:
            return out
        if isinstance(f, GridForcing):
            return self.forcing_grid(f, x1, x2, t)
        tn, wt = panel_rule(0.0, t, self.omega_max, self.cfg.time_nodes,
                            max_panels=10 * self.cfg.max_panels)
        E1 = self.prop(x1, t)
        E2 = E1 if np.array_equal(x1, x2) else self.prop(x2, t)
        k2 = self.k ** 2
        for c, a, b, p in f.terms:
            if c == 0 or a.is_zero or b.is_zero:
                continue
            aodd, bodd = _odd(self.ft1(a)), _odd(self.ft1(b))
            wtp = wt * p(tn)
            for s in range(0, tn.size, 512):
                ph = np.exp(1j * np.outer(k2, tn[s:s + 512]))
                P1 = E1 @ (aodd[:, None] * ph)
                P2 = E2 @ (bodd[:, None] * ph)
                out += c * (P1 * wtp[s:s + 512]) @ P2.T
        return out / FOUR_PI2

    def forcing_grid(self, F: GridForcing, x1, x2, t):
        """J-sum for sampled forcing: per time node a propagator Q = E S with
        S the odd-extension grid transform; f^ is band-limited to pi/(2h)."""
        h = F.h
        ks_max = min(self.cfg.k_max, np.pi / (2 * h))
        key = ("grid", h, F.x_nodes.size, ks_max)
        if key not in self._ft_cache:
            ks, wks = symmetric_rule(ks_max, lambda k: F.x_nodes[-1] + 2 * k * self.T,
                                     self.cfg.time_nodes, self.cfg.max_panels)
            wx = np.full(F.x_nodes.size, h)
            wx[0] = wx[-1] = 0.5 * h
            S = -2j * np.sin(np.outer(ks, F.x_nodes)) * wx
            self._ft_cache[key] = (ks, wks, S, {})
        ks, wks, S, qcache = self._ft_cache[key]

        def Q(x, tau):
            qk = (round(tau, 13), x.tobytes())
            if qk not in qcache:
                E = np.exp(1j * np.outer(x, ks) - 1j * ks ** 2 * tau) * wks
                qcache[qk] = E @ S
            return qcache[qk]

        # panels follow the sample times so the spline is smooth on each one
        br = np.concatenate([F.times[F.times < t], [t]])
        br = br[br >= 0]
        if br[0] > 0:
            br = np.concatenate([[0.0], br])
        out = np.zeros((x1.size, x2.size), dtype=complex)
        from .quadrature import rule_from_breaks
        tq, wq = rule_from_breaks(br, self.cfg.time_nodes)
        fvals = F.at(tq)
        same = np.array_equal(x1, x2)
        for tp, w, fv in zip(tq, wq, fvals):
            Q1 = Q(x1, t - tp)
            Q2 = Q1 if same else Q(x2, t - tp)
            out += w * (Q1 @ fv @ Q2.T)
        return out / FOUR_PI2

    def _phi(self, xb, t, tn):
        """Phi[n, x] for the contour in the second variable, s = t_n - t."""
        key = ("phi", round(t, 14), tn.size, tn[-1], xb.tobytes())
        hit = self._last.get("phi")
        if hit is not None and hit[0] == key:
            return hit[1]
        s = tn - t
        out = np.zeros((tn.size, xb.size), dtype=complex)
        kp, wp, r, wr = self.kp, self.wp, self.r, self.wr
        Xr = np.exp(1j * np.outer(kp, xb))
        Xi = np.exp(-np.outer(r, xb))
        for a in range(0, tn.size, 1024):
            sa = s[a:a + 1024]
            out[a:a + 1024] = (np.exp(1j * np.outer(sa, kp ** 2)) * (2 * kp * wp)) @ Xr
            out[a:a + 1024] += (np.exp(-1j * np.outer(sa, r ** 2)) * (2 * r * wr)) @ Xi
        self._last["phi"] = (key, out)
        return out

    def _psi(self, x, s, sign):
        """int_K^inf 2k e^{ikx + ik^2 s} / (i (k^2 + a^2)) dk along K + sign*i*y,
        for a = k on the non-negative half of the k-grid.

        Valid when sign*(x + 2Ks) > 0. Returns array (len(kp), len(x)).
        """
        key = ("psi", round(s, 14), sign, x.tobytes())
        if key in self._psi_cache:
            return self._psi_cache[key]
        K = self.cfg.k_max
        a2 = self.kp ** 2
        rate = sign * (x + 2 * K * s)
        yl, wl = self._lag
        y = yl[None, :] / rate[:, None]
        kk = K + sign * 1j * y
        num = sign * 1j * 2 * kk * np.exp(1j * kk * x[:, None] + 1j * kk ** 2 * s) \
            * (wl[None, :] / rate[:, None]) / 1j
        out = np.einsum("xl,axl->ax", num, 1.0 / (kk[None, :, :] ** 2 + a2[:, None, None]))
        if len(self._psi_cache) > 64:
            self._psi_cache.clear()
        self._psi_cache[key] = out
        return out

    def _full(self, half):
        """Odd-symmetric array on the full k-grid from its k >= 0 half."""
        return np.concatenate([-half[::-1], half])

    def _a0(self, trace, U):
        """A0[k, n] = w_n e^{ik^2 t_n} (g^(k,t_n) - g^(-k,t_n)) for k >= 0."""
        tn, wt = self.time_rule(U)
        key = (id(trace), round(U, 14))
        hit = self._a0_cache.get(key)
        if hit is not None and hit[0] is trace:
            return hit[1]
        gh = trace.build_cache(self.k, tn, self.cfg)
        half = self.k.size // 2
        A = np.empty((half, tn.size), dtype=complex)
        kp2 = self.kp ** 2
        for a in range(0, tn.size, 512):
            sl = slice(a, a + 512)
            A[:, sl] = (gh[half:, sl] - gh[half - 1::-1, sl]) \
                * (wt[sl] * np.exp(1j * np.outer(kp2, tn[sl])))
        if len(self._a0_cache) >= 4:
            self._a0_cache.clear()
        self._a0_cache[key] = (trace, A)
        return A

    def boundary(self, trace: BoundaryTrace, xa, xb, t, upper=None):
        """K-term of a trace on the edge x_b = 0: matrix over (xa, xb).

        For g0 call with (x1, x2); for h0 call with (x2, x1) and transpose.
        ``upper`` is the tilde-transform upper limit (T by default).
        """
        out = np.zeros((xa.size, xb.size), dtype=complex)
        if trace.is_zero:
            return out
        U = self.T if upper is None else float(upper)
        tn, wt = self.time_rule(U)
        A0 = self._a0(trace, U)
        Mh = A0 @ self._phi(xb, t, tn)
        if self.tail_correction:
            Mh += self._boundary_tail(trace, xb, t, U)
        return (self.prop(xa, t) @ self._full(Mh)) / FOUR_PI2

    def _endpoint_odd(self, trace, tt):
        """g^(k, tt) - g^(-k, tt) for k >= 0."""
        key = (id(trace), trace._cache_key, round(tt, 14))
        hit = self._ft_cache.get(key)
        if hit is None or hit[0] is not trace:
            v = trace._hlft_grid(self.k, np.array([tt]), self.cfg)[:, 0]
            half = self.k.size // 2
            hit = (trace, v[half:] - v[half - 1::-1])
            self._ft_cache[key] = hit
        return hit[1]

    def _boundary_tail(self, trace, xb, t, U):
        """Asymptotic correction for the real ray beyond k_max (k >= 0 half).

        For large real k2 the tilde transform is dominated by its endpoint
        terms [e^{i w U} g^(U) - g^(0)] / (i w); the remaining k2-integral is
        done exactly on a contour rotated into the decaying half-plane.
        """
        K = self.cfg.k_max
        kp2 = self.kp ** 2
        gU = self._endpoint_odd(trace, U)
        out = (gU * np.exp(1j * kp2 * U))[:, None] * self._psi(xb, U - t, +1)
        ok = 2 * K * t - xb > 1.0
        if np.any(ok):
            g0 = self._endpoint_odd(trace, 0.0)
            out[:, ok] -= g0[:, None] * self._psi(xb[ok], -t, -1)
        return out

    def boundary_real_axis(self, trace: BoundaryTrace, xa, xb, t):
        """Same K-term with the k_b integral over the whole real line and the
        tilde upper limit equal to t (the form before contour deformation)."""
        out = np.zeros((xa.size, xb.size), dtype=complex)
        if trace.is_zero or t <= 0:
            return out
        K = self.cfg.k_max
        tn, wt = self.time_rule(t)
        A0 = self._a0(trace, t)
        k, w = self.k, self.wk
        k2 = k ** 2
        Xr = np.exp(1j * np.outer(k, xb))
        Mh = np.zeros((A0.shape[0], xb.size), dtype=complex)
        for a in range(0, tn.size, 512):
            sl = slice(a, a + 512)
            Phi = (np.exp(1j * np.outer(tn[sl] - t, k2)) * (2 * k * w)) @ Xr
            Mh += A0[:, sl] @ Phi
        if self.tail_correction:
            kp2 = self.kp ** 2
            gt = self._endpoint_odd(trace, t)
            g0 = self._endpoint_odd(trace, 0.0)
            Mh += (gt * np.exp(1j * kp2 * t))[:, None] * (
                self._psi(xb, 0.0, +1) - self._psi(-xb, 0.0, -1))
            Mh += g0[:, None] * self._psi(-xb, -t, -1)
            ok = 2 * K * t - xb > 1.0
            if np.any(ok):
                Mh[:, ok] -= g0[:, None] * self._psi(xb[ok], -t, -1)
        return (self.prop(xa, t) @ self._full(Mh)) / FOUR_PI2


# public term functions ---------------------------------------------------------

def _engine_for(cfg, T, xs):
    return _Engine(cfg, T, max(float(np.max(xs)), 1.0))


def eval_initial_terms(u0, x1, x2, t, cfg: QuadratureConfig | None = None):
    cfg = cfg or QuadratureConfig()
    eng = _engine_for(cfg, max(t, 1e-3), [x1, x2])
    return complex(eng.initial(u0, np.array([x1], float), np.array([x2], float), t)[0, 0])


def inverse_quarter_plane(u0: SeparableField, x1, x2, cfg: QuadratureConfig | None = None):
    """(2 pi)^-2 int int e^{ik.x} u0^(k) dk on the solver's k-grid at any real points.

    Inside the quadrant this reproduces u0; outside it should vanish.
    """
    cfg = cfg or QuadratureConfig()
    x1 = np.atleast_1d(np.asarray(x1, float))
    x2 = np.atleast_1d(np.asarray(x2, float))
    eng = _engine_for(cfg, 1e-3, np.abs(np.concatenate([x1, x2])))
    E1, E2 = eng.prop(x1, 0.0), eng.prop(x2, 0.0)
    out = np.zeros((x1.size, x2.size), dtype=complex)
    for c, a, b in u0.terms:
        if c == 0 or a.is_zero or b.is_zero:
            continue
        out += c * np.outer(E1 @ eng.ft1(a), E2 @ eng.ft1(b))
    return out / FOUR_PI2


def eval_forcing_terms(f, x1, x2, t, cfg: QuadratureConfig | None = None):
    cfg = cfg or QuadratureConfig()
    eng = _engine_for(cfg, max(t, 1e-3), [x1, x2])
    return complex(eng.forcing(f, np.array([x1], float), np.array([x2], float), t)[0, 0])


def eval_boundary_term_g(g0, x1, x2, t, T, cfg: QuadratureConfig | None = None,
                         upper=None):
    cfg = cfg or QuadratureConfig()
    if not x2 > 0:
        raise InsufficientGrid("the boundary term needs x2 > 0")
    _warn_slow(x2, cfg)
    eng = _engine_for(cfg, T, [x1, x2])
    return complex(eng.boundary(g0, np.array([x1], float), np.array([x2], float), t,
                                upper)[0, 0])


def eval_boundary_term_h(h0, x1, x2, t, T, cfg: QuadratureConfig | None = None,
                         upper=None):
    cfg = cfg or QuadratureConfig()
    if not x1 > 0:
        raise InsufficientGrid("the boundary term needs x1 > 0")
    _warn_slow(x1, cfg)
    eng = _engine_for(cfg, T, [x1, x2])
    return complex(eng.boundary(h0, np.array([x2], float), np.array([x1], float), t,
                                upper)[0, 0])


def _warn_slow(xmin, cfg):
    if xmin < 1.0 / cfg.k_max:
        warnings.warn(f"evaluation at distance {xmin:g} from the edge is below "
                      f"1/k_max; the imaginary-ray integrand barely decays",
                      SlowDecay, stacklevel=3)


# estimator ------------------------------------------------------------------------

class UTMSolver(BaseEstimator):
    """Estimator wrapper around the solution formula.

    ``fit`` takes a :class:`LinearProblem`; ``predict`` takes an array of
    (x1, x2, t) rows and returns complex values; ``solve`` evaluates on a
    tensor grid and returns a :class:`SolutionBundle`.
    """

    def __init__(self, config: QuadratureConfig | None = None, tilde_upper: str = "T",
                 tail_correction: bool = True):
        self.config = config
        self.tilde_upper = tilde_upper
        self.tail_correction = tail_correction

    def fit(self, problem: LinearProblem, y=None):
        if not isinstance(problem, LinearProblem):
            raise TypeError("UTMSolver.fit expects a LinearProblem")
        if self.tilde_upper not in ("T", "t"):
            raise ValueError("tilde_upper must be 'T' or 't'")
        self.problem_ = problem
        self.config_ = self.config or problem.cfg
        self._engines = {}
        return self

    def _engine(self, x_max):
        bucket = float(np.ceil(max(x_max, 1.0)))
        for b, eng in self._engines.items():
            if b >= bucket:
                return eng
        eng = _Engine(self.config_, self.problem_.T, bucket, self.tail_correction)
        self._engines = {bucket: eng}
        return eng

    def terms(self, x1, x2, t):
        """Dict of the I, J, K1, K2 matrices on the tensor grid at time t."""
        check_is_fitted(self, "problem_")
        p = self.problem_
        x1 = check_nodes(x1, "x1")
        x2 = check_nodes(x2, "x2")
        check_times([t], p.T)
        eng = self._engine(max(x1[-1], x2[-1]))
        upper = None if self.tilde_upper == "T" else t
        _warn_slow(min(x1[0], x2[0]), self.config_)
        return {
            "I": eng.initial(p.u0, x1, x2, t),
            "J": eng.forcing(p.f, x1, x2, t),
            "K1": eng.boundary(p.g0, x1, x2, t, upper),
            "K2": eng.boundary(p.h0, x2, x1, t, upper).T,
        }

    def solve(self, x1, x2, times) -> SolutionBundle:
        check_is_fitted(self, "problem_")
        x1 = check_nodes(x1, "x1")
        x2 = check_nodes(x2, "x2")
        times = check_times(times, self.problem_.T)
        fields, tb = [], {"I": [], "J": [], "K1": [], "K2": []}
        t0 = _time.perf_counter()
        for t in times:
            parts = self.terms(x1, x2, t)
            vals = parts["I"] - 1j * parts["J"] + parts["K1"] + parts["K2"]
            for name in tb:
                tb[name].append(parts[name])
            fields.append(WaveField(x1, x2, vals, float(t)))
        eng = self._engine(max(x1[-1], x2[-1]))
        diag = {
            "k_nodes": int(eng.k.size),
            "ray_nodes": int(eng.r.size),
            "time_nodes": int(eng.time_rule(self.problem_.T)[0].size),
            "wall_time": _time.perf_counter() - t0,
            "corner_residual": self.problem_.corner_residual,
            "k_max": self.config_.k_max,
            "abs_tol": self.config_.abs_tol,
        }
        return SolutionBundle(fields, {k: np.stack(v) for k, v in tb.items()}, diag)

    def predict(self, X):
        """Values at rows (x1, x2, t) of X."""
        check_is_fitted(self, "problem_")
        X = check_array(X, dtype=float, ensure_min_features=3)
        if X.shape[1] != 3:
            raise ValueError("predict expects rows (x1, x2, t)")
        out = np.empty(X.shape[0], dtype=complex)
        for t in np.unique(X[:, 2]):
            rows = np.flatnonzero(X[:, 2] == t)
            u1, i1 = np.unique(X[rows, 0], return_inverse=True)
            u2, i2 = np.unique(X[rows, 1], return_inverse=True)
            parts = self.terms(u1, u2, t)
            vals = parts["I"] - 1j * parts["J"] + parts["K1"] + parts["K2"]
            out[rows] = vals[i1, i2]
        return out

    def forcing_term(self, f, x1, x2, t):
        """J-sum for an arbitrary forcing with the fitted engine (caches reused)."""
        check_is_fitted(self, "problem_")
        x1 = check_nodes(x1, "x1")
        x2 = check_nodes(x2, "x2")
        return self._engine(max(x1[-1], x2[-1])).forcing(f, x1, x2, t)

    def boundary_term_real_axis(self, x1, x2, t):
        """K1 from the real-axis form, used to check contour closing."""
        check_is_fitted(self, "problem_")
        x1 = check_nodes(x1, "x1")
        x2 = check_nodes(x2, "x2")
        eng = self._engine(max(x1[-1], x2[-1]))
        return eng.boundary_real_axis(self.problem_.g0, x1, x2, t)

    def boundary_term(self, x1, x2, t, upper=None):
        check_is_fitted(self, "problem_")
        x1 = check_nodes(x1, "x1")
        x2 = check_nodes(x2, "x2")
        eng = self._engine(max(x1[-1], x2[-1]))
        return eng.boundary(self.problem_.g0, x1, x2, t, upper)


def utm_solve(prob: LinearProblem, grid, times, **kw) -> SolutionBundle:
    """Solve on the tensor grid ``grid`` = (x1_nodes, x2_nodes) or a single
    node array used for both axes."""
    if isinstance(grid, (tuple, list)) and len(grid) == 2 and np.ndim(grid[0]) == 1:
        x1, x2 = grid
    else:
        x1 = x2 = grid
    return UTMSolver(**kw).fit(prob).solve(x1, x2, times)


# global relation -------------------------------------------------------------------

def _trap_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _forcing_tilde(f, k1, k2, omega, t, cfg, x_nodes=None):
    """int_0^t e^{i omega t'} f^(k1, k2, t') dt'."""
    from .quadrature import integrate_time
    from .transforms import half_line_ft
    if f is None or f.is_zero or t <= 0:
        return 0j
    if isinstance(f, GridForcing):
        w = _trap_weights(f.x_nodes.size, f.h)
        e1 = w * np.exp(-1j * k1 * f.x_nodes)
        e2 = w * np.exp(-1j * k2 * f.x_nodes)
        ts = f.times[f.times <= t + 1e-12]
        vals = np.array([e1 @ f.values[j] @ e2 for j in range(ts.size)])
        from scipy.integrate import simpson
        return complex(simpson(np.exp(1j * omega * ts) * vals, x=ts))
    coefs = [(c * half_line_ft(a, k1, cfg) * half_line_ft(b, k2, cfg), p)
             for c, a, b, p in f.terms if c != 0]

    def g(tt):
        return np.exp(1j * omega * tt) * sum(c * p(tt) for c, p in coefs)

    return integrate_time(g, 0.0, t, cfg, phase_bound=abs(omega) + 1.0).value


def global_relation_residual(bundle: SolutionBundle, prob: LinearProblem, k1: float,
                             k2: float, t: float) -> float:
    """Modulus of the global relation evaluated with the computed solution.

    The bundle must hold fields on a uniform grid x_j = j h (j >= 1) in both
    directions at uniformly spaced times starting at 0 and including t. The
    Neumann traces come from one-sided second-order differences at the edge,
    where the Dirichlet data supply the j = 0 values.
    """
    from scipy.integrate import simpson
    from .transforms import quarter_plane_ft, tilde_transform
    from .validation import uniform_spacing

    cfg = prob.cfg
    fl = bundle.fields
    x1, x2 = fl[0].x1_nodes, fl[0].x2_nodes
    if x1.size < 3 or x2.size < 3:
        raise InsufficientGrid("need at least two nodes next to each edge")
    h = uniform_spacing(x1, "x1")
    if abs(uniform_spacing(x2, "x2") - h) > 1e-9 * h or abs(x1[0] - h) > 1e-9 * h \
            or abs(x2[0] - h) > 1e-9 * h:
        raise InsufficientGrid("grid must be x_j = j h in both directions, starting at j = 1")
    times = bundle.times
    j_end = np.flatnonzero(np.abs(times - t) <= 1e-12 * max(1.0, t))
    if j_end.size == 0:
        raise InsufficientGrid(f"bundle has no field at t = {t}")
    tt = times[:j_end[0] + 1]
    if tt[0] != 0.0 or (tt.size > 2 and np.ptp(np.diff(tt)) > 1e-9 * tt[-1]):
        raise InsufficientGrid("bundle times must be uniform from 0 up to t")
    xf1 = np.concatenate([[0.0], x1])
    xf2 = np.concatenate([[0.0], x2])
    w1 = _trap_weights(xf1.size, h) * np.exp(-1j * k1 * xf1)
    w2 = _trap_weights(xf2.size, h) * np.exp(-1j * k2 * xf2)
    omega = k1 ** 2 + k2 ** 2

    def full(j):
        s = tt[j]
        U = np.empty((xf1.size, xf2.size), dtype=complex)
        U[1:, 1:] = fl[j].values
        U[1:, 0] = prob.g0(x1, s)
        U[0, 1:] = prob.h0(x2, s)
        U[0, 0] = 0.5 * (prob.g0(0.0, s) + prob.h0(0.0, s))
        return U

    h1hat = np.empty(tt.size, dtype=complex)
    g1hat = np.empty(tt.size, dtype=complex)
    for j in range(tt.size):
        U = full(j)
        h1hat[j] = w2 @ ((-3 * U[0, :] + 4 * U[1, :] - U[2, :]) / (2 * h))
        g1hat[j] = w1 @ ((-3 * U[:, 0] + 4 * U[:, 1] - U[:, 2]) / (2 * h))
        if j == tt.size - 1:
            uhat = w1 @ U @ w2
    phase = np.exp(1j * omega * tt)
    h1t = simpson(phase * h1hat, x=tt) if tt.size > 1 else 0j
    g1t = simpson(phase * g1hat, x=tt) if tt.size > 1 else 0j
    h0t = tilde_transform(prob.h0, k2, omega, t, cfg)
    g0t = tilde_transform(prob.g0, k1, omega, t, cfg)
    u0hat = quarter_plane_ft(prob.u0, k1, k2, cfg)
    ft = _forcing_tilde(prob.f, k1, k2, omega, t, cfg)
    res = (np.exp(1j * omega * t) * uhat - u0hat + (1j * h1t - k1 * h0t)
           + (1j * g1t - k2 * g0t) + 1j * ft)
    return float(abs(res))
