"""Half-line and quarter-plane Fourier transforms, tilde time-transforms and
the data containers that hold them."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import NonDecayingTrace
from .families import Func1D, SeparableField, free_gaussian
from .quadrature import (QuadratureConfig, integrate_ray, integrate_real_axis,
                         integrate_time, panel_rule)

_LOG_EPS = 40.0


def dispersion(k1, k2):
    """omega = k1^2 + k2^2; complex k only occurs on the rays of the contour."""
    return k1 ** 2 + k2 ** 2


@dataclass
class WaveField:
    x1_nodes: np.ndarray
    x2_nodes: np.ndarray
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.x1_nodes = np.asarray(self.x1_nodes, dtype=float)
        self.x2_nodes = np.asarray(self.x2_nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        for name, x in (("x1_nodes", self.x1_nodes), ("x2_nodes", self.x2_nodes)):
            if x.ndim != 1 or x.size == 0:
                raise ValueError(f"{name} must be a non-empty 1-D array")
            if np.any(x <= 0) or np.any(np.diff(x) <= 0):
                raise ValueError(f"{name} must be strictly increasing and positive")
        if self.values.shape != (self.x1_nodes.size, self.x2_nodes.size):
            raise ValueError(f"values shape {self.values.shape} does not match "
                             f"grid {(self.x1_nodes.size, self.x2_nodes.size)}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        if not self.time >= 0:
            raise ValueError("time must be >= 0")

    def with_values(self, values) -> "WaveField":
        return WaveField(self.x1_nodes, self.x2_nodes, values, self.time)


@dataclass(frozen=True)
class SpectralSample:
    k1: complex
    k2: complex
    value: complex

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("spectral value must be finite")


def _key(*arrays) -> str:
    h = hashlib.sha1()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()


def hlft_matrix(k, support, scale, cfg: QuadratureConfig, order: int | None = None):
    """Matrix E[k, x] = w_x e^{-ikx} on a composite rule over ``support``.

    Returns (E, x). Panels resolve both the oscillation e^{-ikx} and the
    function scale.
    """
    k = np.asarray(k, dtype=float)
    lo, hi = support
    if hi <= lo:
        return np.zeros((k.size, 0), dtype=complex), np.zeros(0)
    kmax = float(np.max(np.abs(k))) if k.size else 0.0
    x, w = panel_rule(lo, hi, rate=max(kmax, 1.0), order=order or cfg.time_nodes,
                      max_width=scale, max_panels=10 * cfg.max_panels)
    return np.exp(-1j * np.outer(k, x)) * w[None, :], x


class BoundaryTrace:
    """Dirichlet datum on one edge, as a function of (distance along edge, time)."""

    def __init__(self, evaluator: Callable, T: float, family_tag: str = "custom",
                 support=(0.0, 20.0), scale: float = 0.5, real_valued: bool = False,
                 terms: Optional[tuple] = None, params: Optional[dict] = None):
        if not T > 0:
            raise ValueError("trace horizon T must be positive")
        self.evaluator = evaluator
        self.T = float(T)
        self.family_tag = family_tag
        self.support = (float(support[0]), float(support[1]))
        self.scale = float(scale)
        self.real_valued = bool(real_valued)
        self.terms = terms
        self.params = params or {}
        self.hlft_cache = None
        self._cache_key = None

    # constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, T):
        return cls(lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape,
                                         dtype=complex),
                   T, "zero", (0.0, 0.0), 1.0, True, terms=())

    @classmethod
    def separable(cls, T, terms, family_tag="separable"):
        """terms: tuple of (coef, Func1D, Profile)."""
        terms = tuple(t for t in terms if not (t[0] == 0 or t[1].is_zero))
        if not terms:
            return cls.zero(T)

        def ev(x, t):
            x = np.asarray(x, dtype=float)
            out = np.zeros(np.broadcast(x, np.asarray(t)).shape, dtype=complex)
            for c, f, p in terms:
                out = out + c * f(x) * p(t)
            return out

        lo = min(f.support()[0] for _, f, _ in terms)
        hi = max(f.support()[1] for _, f, _ in terms)
        sc = min(f.scale() for _, f, _ in terms)
        real = all(np.isreal(c) and p.real_valued for c, _, p in terms)
        return cls(ev, T, family_tag, (lo, hi), sc, real, terms=terms)

    @classmethod
    def free_gaussian(cls, T, amp=1.0, center=(3.0, 3.0), width=1.0, slot="g0"):
        """Trace of the free planar evolution of a Gaussian on x2=0 (g0) or x1=0 (h0)."""
        c = tuple(float(v) for v in center)
        if slot == "g0":
            def ev(x, t):
                return free_gaussian(x, 0.0, t, amp, c, width)
            ca = c[0]
        elif slot == "h0":
            def ev(x, t):
                return free_gaussian(0.0, x, t, amp, c, width)
            ca = c[1]
        else:
            raise ValueError("slot must be 'g0' or 'h0'")
        w_eff = np.sqrt(width ** 4 + 16 * T ** 2) / width
        half = w_eff * np.sqrt(_LOG_EPS + np.log(max(abs(amp), 1.0)))
        sup = (max(0.0, ca - half), ca + half)
        return cls(ev, T, "free_evolution_trace", sup, 0.5 * width, False,
                   params={"amp": amp, "center": list(c), "width": width})

    # arithmetic ------------------------------------------------------------
    @property
    def is_zero(self):
        return self.terms is not None and len(self.terms) == 0

    def __call__(self, x, t):
        return self.evaluator(x, t)

    def __add__(self, other: "BoundaryTrace"):
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.terms is not None and other.terms is not None:
            return BoundaryTrace.separable(self.T, self.terms + other.terms, "sum")
        f, g = self.evaluator, other.evaluator
        return BoundaryTrace(lambda x, t: f(x, t) + g(x, t), self.T, "sum",
                             (min(self.support[0], other.support[0]),
                              max(self.support[1], other.support[1])),
                             min(self.scale, other.scale),
                             self.real_valued and other.real_valued)

    def __mul__(self, lam):
        if self.terms is not None:
            return BoundaryTrace.separable(
                self.T, tuple((lam * c, f, p) for c, f, p in self.terms), self.family_tag)
        f = self.evaluator
        return BoundaryTrace(lambda x, t: lam * f(x, t), self.T, self.family_tag,
                             self.support, self.scale,
                             self.real_valued and np.isreal(lam))

    __rmul__ = __mul__

    # transforms ------------------------------------------------------------
    def hlft(self, k, t, cfg: QuadratureConfig | None = None):
        """Fresh quadrature of g^(k, t) = int_0^inf e^{-ikx} g(x, t) dx.

        ``k`` scalar or 1-D, ``t`` scalar or 1-D; result has shape
        (len(k), len(t)) squeezed like the inputs.
        """
        cfg = cfg or QuadratureConfig()
        ks = np.atleast_1d(np.asarray(k, dtype=float))
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = self._hlft_grid(ks, ts, cfg, order=10)
        if np.ndim(t) == 0:
            out = out[:, 0]
        if np.ndim(k) == 0:
            out = out[0]
        return out

    def _hlft_grid(self, k, t, cfg, order=None):
        if self.is_zero:
            return np.zeros((k.size, t.size), dtype=complex)
        E, x = hlft_matrix(k, self.support, self.scale, cfg, order)
        if self.terms is not None:
            out = np.zeros((k.size, t.size), dtype=complex)
            for c, f, p in self.terms:
                out += c * np.outer(E @ f(x), p(t))
            return out
        out = np.empty((k.size, t.size), dtype=complex)
        step = max(1, int(2e6 // max(x.size, 1)))
        for j in range(0, t.size, step):
            tt = t[j:j + step]
            out[:, j:j + step] = E @ self.evaluator(x[:, None], tt[None, :])
        return out

    def build_cache(self, k_nodes, t_nodes, cfg: QuadratureConfig | None = None):
        """Table of g^(k_i, t_n); rebuilt only when the grid changes."""
        cfg = cfg or QuadratureConfig()
        key = _key(k_nodes, t_nodes, [cfg.k_max, cfg.time_nodes])
        if self._cache_key != key:
            self.hlft_cache = self._hlft_grid(np.asarray(k_nodes, float),
                                              np.asarray(t_nodes, float), cfg)
            self._cache_key = key
        return self.hlft_cache


def half_line_ft(g, k, cfg: QuadratureConfig | None = None, *, support=None,
                 decay_rate: float = 0.0) -> complex:
    """int_0^inf e^{-ikx} g(x) dx for a named 1-D family or a decaying callable."""
    cfg = cfg or QuadratureConfig()
    if not getattr(g, "decaying", True):
        raise NonDecayingTrace(f"{getattr(g, 'name', g)!r} is not integrable on the half-line")
    if isinstance(g, Func1D):
        if g.is_zero:
            return 0j
        support = g.support()
    k = float(k)

    def f(x):
        return np.exp(-1j * k * x) * g(x)

    if support is not None:
        lo, hi = support
        if hi <= lo:
            return 0j
        return integrate_real_axis(f, cfg, phase_bound=abs(k), a=lo, b=hi,
                                   check_tail=False).value
    if decay_rate > 0:
        return integrate_ray(f, decay_rate, cfg, phase_bound=abs(k)).value
    raise NonDecayingTrace("callable without support or decay rate")


def quarter_plane_ft(phi, k1, k2, cfg: QuadratureConfig | None = None, *,
                     support=None) -> complex:
    """int int_{R+^2} e^{-ik1x1-ik2x2} phi dx.

    Separable fields are transformed as products of half-line transforms;
    other callables phi(x1, x2) need ``support`` = ((lo1, hi1), (lo2, hi2))
    and are integrated with a tensor composite rule refined until stable.
    """
    cfg = cfg or QuadratureConfig()
    if isinstance(phi, SeparableField):
        return complex(sum(c * half_line_ft(a, k1, cfg) * half_line_ft(b, k2, cfg)
                           for c, a, b in phi.terms if c != 0))
    if support is None:
        raise NonDecayingTrace("quarter_plane_ft needs a support box for plain callables")
    (a1, b1), (a2, b2) = support
    n = 4
    prev = None
    while True:
        x1, w1 = panel_rule(a1, b1, rate=max(abs(k1), 1.0), order=8,
                            max_width=(b1 - a1) / n)
        x2, w2 = panel_rule(a2, b2, rate=max(abs(k2), 1.0), order=8,
                            max_width=(b2 - a2) / n)
        vals = phi(x1[:, None], x2[None, :])
        val = complex((w1 * np.exp(-1j * k1 * x1)) @ vals @ (w2 * np.exp(-1j * k2 * x2)))
        if prev is not None and abs(val - prev) <= cfg.abs_tol * 1e-3:
            return val
        prev = val
        n *= 2
        if n > 4096:
            return val


def tilde_transform(trace, k: float, omega: float, t_upper: float,
                    cfg: QuadratureConfig | None = None) -> complex:
    """int_0^{t_upper} e^{i omega t'} g^(k, t') dt'.

    ``trace`` is a BoundaryTrace, or any callable (k, t) -> g^(k, t).
    """
    cfg = cfg or QuadratureConfig()
    if isinstance(trace, BoundaryTrace):
        if not 0 <= t_upper <= trace.T * (1 + 1e-12):
            raise ValueError("t_upper must lie in [0, T]")
        if trace.is_zero:
            return 0j

        def ghat(t):
            return trace.hlft(k, t, cfg)
    else:
        def ghat(t):
            return np.broadcast_to(np.asarray(trace(k, t), dtype=complex), np.shape(t))

    def f(t):
        return np.exp(1j * omega * t) * ghat(t)

    return integrate_time(f, 0.0, float(t_upper), cfg,
                          phase_bound=abs(omega) + 1.0).value
