"""Quadrature engines for oscillatory real-axis integrals, ray integrals and
finite time windows.

Oscillation is controlled by a phase-derivative bound supplied by the caller:
panels are never wider than half of the local oscillation period, and each
panel carries a fixed-order Gauss-Legendre rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_laguerre

from .exceptions import QuadratureFailure, SlowDecay, TruncationWarning


@dataclass(frozen=True)
class QuadratureConfig:
    k_max: float = 40.0
    abs_tol: float = 1e-5
    max_panels: int = 20000
    time_nodes: int = 6
    laguerre_nodes: int = 32

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(f"{k}: {v}" for k, v in problems))

    def violations(self):
        out = []
        if not (np.isfinite(self.k_max) and self.k_max > 0):
            out.append(("k_max", "must be positive"))
        if not (self.abs_tol >= 1e-14):
            out.append(("abs_tol", "must be >= 1e-14"))
        if int(self.max_panels) != self.max_panels or self.max_panels <= 0:
            out.append(("max_panels", "must be a positive integer"))
        if int(self.time_nodes) != self.time_nodes or self.time_nodes < 4:
            out.append(("time_nodes", "must be an integer >= 4"))
        if int(self.laguerre_nodes) != self.laguerre_nodes or self.laguerre_nodes < 8:
            out.append(("laguerre_nodes", "must be an integer >= 8"))
        return out

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)


class QuadResult(NamedTuple):
    value: complex
    error: float


@lru_cache(maxsize=64)
def _legendre(m: int):
    x, w = leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=16)
def _laguerre(n: int):
    x, w = roots_laguerre(n)
    # weights for integrating f directly: w_i e^{x_i}
    wf = np.exp(np.log(w) + x)
    x.setflags(write=False)
    wf.setflags(write=False)
    return x, wf


def _as_rate(rate) -> Callable[[float], float]:
    if callable(rate):
        return lambda x: float(abs(rate(x)))
    c = float(abs(rate))
    return lambda x: c


def panel_breaks(a: float, b: float, rate=0.0, max_width: float | None = None,
                 max_panels: int = 20000) -> np.ndarray:
    """Panel boundaries on [a, b] with width <= pi / local phase rate."""
    if b < a:
        raise ValueError("need a <= b")
    if b == a:
        return np.array([a, b])
    r = _as_rate(rate)
    cap = (b - a) if max_width is None else min(max_width, b - a)
    br = [a]
    x = a
    while x < b:
        h = cap
        r0 = r(x)
        if r0 > 0:
            h = min(h, np.pi / r0)
        r1 = r(min(x + h, b))
        if r1 > 0:
            h = min(h, np.pi / max(r0, r1))
        x = min(x + h, b)
        if b - x < 1e-12 * max(1.0, abs(b)):
            x = b
        br.append(x)
        if len(br) > max_panels + 1:
            raise QuadratureFailure(
                f"panel budget {max_panels} exhausted on [{a}, {b}]")
    return np.asarray(br)


def rule_from_breaks(br: np.ndarray, order: int):
    xg, wg = _legendre(order)
    lo, hi = br[:-1], br[1:]
    half = 0.5 * (hi - lo)
    nodes = (half[:, None] * xg[None, :] + 0.5 * (hi + lo)[:, None]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def panel_rule(a: float, b: float, rate=0.0, order: int = 6,
               max_width: float | None = None, max_panels: int = 20000):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    return rule_from_breaks(panel_breaks(a, b, rate, max_width, max_panels), order)


def symmetric_rule(k_max: float, rate=0.0, order: int = 6, max_panels: int = 20000):
    """Composite rule on [-k_max, k_max] mirrored about 0, nodes increasing.

    ``rate`` is evaluated at |k|. Node j and node -1-j are negatives of each
    other, which the solver relies on for odd combinations.
    """
    kp, wp = panel_rule(0.0, k_max, rate, order, max_panels=max_panels)
    return np.concatenate([-kp[::-1], kp]), np.concatenate([wp[::-1], wp])


def laguerre_rule(n: int, decay: float):
    """Nodes and weights for int_0^inf f(r) dr when f ~ e^{-decay r}."""
    x, wf = _laguerre(int(n))
    return x / decay, wf / decay


def _adaptive(f, br: np.ndarray, order: int, tol: float, max_panels: int):
    """Bisect panels until each panel's two-level difference is within its share of tol."""
    lo = np.asarray(br[:-1], dtype=float)
    hi = np.asarray(br[1:], dtype=float)
    total_len = br[-1] - br[0]
    done_val = 0j
    done_err = 0.0
    n_panels = len(lo)
    for _ in range(60):
        if len(lo) == 0:
            break
        mid = 0.5 * (lo + hi)
        coarse = _panel_sums(f, lo, hi, order)
        fine = _panel_sums(f, lo, mid, order) + _panel_sums(f, mid, hi, order)
        err = np.abs(fine - coarse)
        share = tol * (hi - lo) / total_len
        ok = err <= np.maximum(share, 1e-15 * np.abs(fine))
        done_val += fine[ok].sum()
        done_err += err[ok].sum()
        bad = ~ok
        n_panels += int(bad.sum())
        if n_panels > max_panels:
            raise QuadratureFailure(
                f"adaptive refinement exceeded {max_panels} panels")
        lo, hi = (np.concatenate([lo[bad], mid[bad]]),
                  np.concatenate([mid[bad], hi[bad]]))
    else:
        raise QuadratureFailure("adaptive refinement did not settle")
    return done_val, done_err


def _panel_sums(f, lo, hi, order):
    xg, wg = _legendre(order)
    half = 0.5 * (hi - lo)
    nodes = half[:, None] * xg[None, :] + 0.5 * (hi + lo)[:, None]
    vals = np.asarray(f(nodes.ravel()), dtype=complex).reshape(nodes.shape)
    return (vals * wg[None, :]).sum(axis=1) * half


def _tail_check(f, ends: Sequence[float], tol: float):
    amp = 0.0
    for e in ends:
        v = np.asarray(f(np.array([e], dtype=float)), dtype=complex)
        amp = max(amp, float(np.abs(v).max()) * max(abs(e), 1.0))
    if amp > tol:
        warnings.warn(f"truncated tail may exceed tolerance (bound {amp:.2e})",
                      TruncationWarning, stacklevel=3)
    return amp


def integrate_real_axis(f, cfg: QuadratureConfig | None = None, phase_bound=0.0,
                        a: float | None = None, b: float | None = None,
                        check_tail: bool = True) -> QuadResult:
    """Integral of a vectorized f over [a, b], default [-k_max, k_max].

    ``phase_bound`` is a constant or a callable giving the local bound on the
    phase derivative; it fixes the initial panel layout, after which panels
    are bisected until the two-level estimates agree.
    """
    cfg = cfg or QuadratureConfig()
    a = -cfg.k_max if a is None else float(a)
    b = cfg.k_max if b is None else float(b)
    if b == a:
        return QuadResult(0j, 0.0)
    br = panel_breaks(a, b, phase_bound, max_width=(b - a) / 8,
                      max_panels=cfg.max_panels)
    val, err = _adaptive(f, br, cfg.time_nodes, cfg.abs_tol, cfg.max_panels)
    if check_tail:
        ends = [e for e, bound in ((a, -cfg.k_max), (b, cfg.k_max)) if e == bound]
        if ends:
            _tail_check(f, ends, cfg.abs_tol)
    return QuadResult(complex(val), float(err))


def integrate_ray(f, decay_rate: float, cfg: QuadratureConfig | None = None,
                  extent: float | None = None, phase_bound=0.0) -> QuadResult:
    """Integral of f over r in [0, inf).

    With decay_rate > 0 a Gauss-Laguerre rule with that exponential weight is
    tried at n and 2n nodes; if the two disagree (oscillatory integrands) the
    integral is truncated where e^{-decay_rate r} is negligible and done with
    the adaptive panel rule. With decay_rate == 0 the ray is cut at
    ``extent`` (default k_max).
    """
    cfg = cfg or QuadratureConfig()
    if decay_rate < 0:
        raise ValueError("decay_rate must be >= 0")
    if 0 < decay_rate < 1.0 / cfg.k_max:
        warnings.warn(f"decay rate {decay_rate:g} below 1/k_max; ray integral "
                      "converges slowly", SlowDecay, stacklevel=2)
    if decay_rate > 0:
        n = cfg.laguerre_nodes
        x1, w1 = laguerre_rule(n, decay_rate)
        x2, w2 = laguerre_rule(2 * n, decay_rate)
        v1 = complex(np.dot(w1, np.asarray(f(x1), dtype=complex)))
        v2 = complex(np.dot(w2, np.asarray(f(x2), dtype=complex)))
        err = abs(v2 - v1)
        if err <= cfg.abs_tol:
            return QuadResult(v2, err)
        amp = max(1.0, float(np.abs(np.asarray(f(np.array([0.0])))).max()))
        cut = np.log(10.0 * amp / cfg.abs_tol) / decay_rate
        extent = cut if extent is None else min(extent, cut)
    elif extent is None:
        extent = cfg.k_max
    br = panel_breaks(0.0, extent, phase_bound, max_width=extent / 8,
                      max_panels=cfg.max_panels)
    val, err = _adaptive(f, br, cfg.time_nodes, cfg.abs_tol, cfg.max_panels)
    return QuadResult(complex(val), float(err))


def integrate_time(f, a: float, b: float, cfg: QuadratureConfig | None = None,
                   phase_bound: float = 0.0) -> QuadResult:
    """Composite Gauss-Legendre on [a, b] with uniform doubling of panels."""
    cfg = cfg or QuadratureConfig()
    if b < a:
        raise ValueError("integrate_time needs a <= b")
    if b == a:
        return QuadResult(0j, 0.0)
    n = max(1, int(np.ceil((b - a) * abs(phase_bound) / np.pi)))
    prev = None
    while True:
        br = np.linspace(a, b, n + 1)
        x, w = rule_from_breaks(br, cfg.time_nodes)
        val = complex(np.dot(w, np.asarray(f(x), dtype=complex)))
        if prev is not None:
            err = abs(val - prev)
            if err <= cfg.abs_tol:
                return QuadResult(val, err)
        prev = val
        n *= 2
        if n > cfg.max_panels:
            raise QuadratureFailure(f"time integral on [{a}, {b}] not converged "
                                    f"within {cfg.max_panels} panels")


@dataclass(frozen=True)
class Segment:
    origin: complex
    direction: complex
    orientation: int

    def __post_init__(self):
        if self.direction not in (1, 1j):
            raise ValueError("segment direction must be 1 or i")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")


@dataclass(frozen=True)
class ContourPath:
    """Piecewise-straight contour made of rays starting at ``origin``."""

    segments: tuple = field(default_factory=tuple)

    @classmethod
    def quadrant_boundary(cls) -> "ContourPath":
        # imaginary ray from i*inf down to 0, then the real ray out to +inf
        return cls((Segment(0j, 1j, -1), Segment(0j, 1 + 0j, 1)))

    def integrate(self, f, cfg: QuadratureConfig | None = None,
                  decay_rates: Sequence[float] | None = None,
                  phase_bounds: Sequence | None = None) -> QuadResult:
        """Sum over segments of orientation * direction * int_0^L f(origin + direction r) dr."""
        cfg = cfg or QuadratureConfig()
        decay_rates = decay_rates or [0.0] * len(self.segments)
        phase_bounds = phase_bounds or [0.0] * len(self.segments)
        total, err = 0j, 0.0
        for seg, lam, pb in zip(self.segments, decay_rates, phase_bounds):
            g = (lambda r, s=seg: f(s.origin + s.direction * np.asarray(r)))
            res = integrate_ray(g, lam, cfg, phase_bound=pb)
            total += seg.orientation * seg.direction * res.value
            err += res.error
        return QuadResult(total, err)
