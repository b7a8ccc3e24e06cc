"""Norms and functional-analytic quantities.

Plane fields live on uniform tensor grids; Sobolev and Bessel-potential norms
are computed with the unitary discrete Fourier transform, so the s = 0 norm
is exactly the discrete L^2 norm. Quarter-plane fields enter through
:func:`zero_extend`.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad, simpson
from scipy.special import gamma

from .exceptions import (BOutOfRange, ParameterOutOfRange, ResolutionWarning,
                         SupportViolation)
from .families import ExpDecay1D, SeparableField
from .quadrature import QuadratureConfig, panel_rule, rule_from_breaks
from .transforms import BoundaryTrace, hlft_matrix

TAIL_FRACTION = 0.01


@dataclass
class PlaneField:
    """Samples on a uniform tensor grid over a rectangle of R^2."""

    x1_nodes: np.ndarray
    x2_nodes: np.ndarray
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.x1_nodes = np.asarray(self.x1_nodes, dtype=float)
        self.x2_nodes = np.asarray(self.x2_nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.x1_nodes.size, self.x2_nodes.size):
            raise ValueError("values shape does not match the grid")
        d1, d2 = np.diff(self.x1_nodes), np.diff(self.x2_nodes)
        if d1.size == 0 or d2.size == 0 or np.ptp(d1) > 1e-9 * d1[0] \
                or np.ptp(d2) > 1e-9 * d2[0] or abs(d1[0] - d2[0]) > 1e-9 * d1[0]:
            raise ValueError("PlaneField needs a uniform grid with equal spacing")

    @property
    def h(self):
        return float(self.x1_nodes[1] - self.x1_nodes[0])

    @classmethod
    def from_function(cls, f, half_width, h, time=0.0):
        x = h * np.arange(-int(round(half_width / h)), int(round(half_width / h)) + 1)
        return cls(x, x, f(x[:, None], x[None, :]), time)

    def __mul__(self, lam):
        return PlaneField(self.x1_nodes, self.x2_nodes, lam * self.values, self.time)

    __rmul__ = __mul__


def sample_quadrant(u, h, L, time=0.0):
    """Zero extension of a quarter-plane function sampled on [-L, L]^2.

    Values on the axes get half weight (quarter at the corner), matching the
    trapezoid rule for the one-sided integrals.
    """
    n = int(round(L / h))
    x = h * np.arange(-n, n + 1)
    xp = h * np.arange(0, n + 1)
    vals = np.zeros((x.size, x.size), dtype=complex)
    q = np.asarray(u(xp[:, None], xp[None, :]), dtype=complex)
    q[0, :] *= 0.5
    q[:, 0] *= 0.5
    vals[n:, n:] = q
    return PlaneField(x, x, vals, time)


def zero_extend(field, edge_g=None, edge_h=None) -> PlaneField:
    """Extension by zero of a quarter-plane WaveField on x_j = j h (j >= 1).

    The result lives on the symmetric grid h*(-n..n). Optional edge values
    g(x1_j), h(x2_j) on the axes are inserted with half weight.
    """
    if isinstance(field, PlaneField):
        return field
    x1, x2 = field.x1_nodes, field.x2_nodes
    h = float(x1[1] - x1[0])
    if abs(x1[0] - h) > 1e-9 * h or abs(x2[0] - h) > 1e-9 * h \
            or abs(x2[1] - x2[0] - h) > 1e-9 * h:
        raise ValueError("zero_extend needs nodes x_j = j h, j >= 1, in both directions")
    n = max(x1.size, x2.size)
    x = h * np.arange(-n, n + 1)
    vals = np.zeros((x.size, x.size), dtype=complex)
    vals[n + 1:n + 1 + x1.size, n + 1:n + 1 + x2.size] = field.values
    if edge_g is not None:
        vals[n + 1:n + 1 + x1.size, n] = 0.5 * np.asarray(edge_g)
    if edge_h is not None:
        vals[n, n + 1:n + 1 + x2.size] = 0.5 * np.asarray(edge_h)
    return PlaneField(x, x, vals, field.time)


def _spectrum(field: PlaneField, pad: int = 2):
    n1, n2 = field.values.shape
    N1, N2 = pad * n1, pad * n2
    F = np.fft.fft2(field.values, s=(N1, N2))
    k1 = 2 * np.pi * np.fft.fftfreq(N1, field.h)
    k2 = 2 * np.pi * np.fft.fftfreq(N2, field.h)
    K2 = k1[:, None] ** 2 + k2[None, :] ** 2
    return F, K2, (N1, N2)


def _check_tail(weighted, K2, label):
    kn2 = np.max(K2)
    outer = K2 > 0.25 * kn2
    tot = weighted.sum()
    if tot > 0 and math.sqrt(weighted[outer].sum() / tot) > TAIL_FRACTION:
        warnings.warn(f"{label}: spectral tail above {TAIL_FRACTION:.0%} of the norm; "
                      "refine the grid", ResolutionWarning, stacklevel=3)


def sobolev_norm_plane(field: PlaneField, s: float, warn: bool = True) -> float:
    """||(1+|k|^2)^{s/2} F phi||_{L^2} with the unitary normalization (s=0 gives L^2)."""
    if s < 0:
        raise ParameterOutOfRange("s must be >= 0")
    F, K2, (N1, N2) = _spectrum(field)
    weighted = (1 + K2) ** s * np.abs(F) ** 2
    if warn and s > 0:
        _check_tail(weighted, K2, "sobolev_norm_plane")
    return float(math.sqrt(weighted.sum() * field.h ** 2 / (N1 * N2)))


def homogeneous_fourier_seminorm(field: PlaneField, s: float) -> float:
    """(1/(2 pi)^2 int |k|^{2s} |F phi|^2 dk)^{1/2}."""
    F, K2, (N1, N2) = _spectrum(field, pad=4)
    return float(math.sqrt((K2 ** s * np.abs(F) ** 2).sum() * field.h ** 2 / (N1 * N2)))


def bessel_potential_norm(field: PlaneField, s: float, p: float, warn: bool = True) -> float:
    """L^p norm of the inverse transform of (1+|k|^2)^{s/2} F phi."""
    if s < 0 or p < 2:
        raise ParameterOutOfRange("need s >= 0 and p >= 2")
    p = float(p)
    if s == 0:
        v = field.values
    else:
        F, K2, _ = _spectrum(field)
        if warn:
            _check_tail((1 + K2) ** s * np.abs(F) ** 2, K2, "bessel_potential_norm")
        v = np.fft.ifft2((1 + K2) ** (s / 2) * F)
    if not np.isfinite(p):
        return float(np.abs(v).max())
    return float((np.sum(np.abs(v) ** p) * field.h ** 2) ** (1 / p))


# admissible pairs -----------------------------------------------------------------

@dataclass(frozen=True)
class AdmissiblePair:
    q: Fraction
    p: Fraction

    def __post_init__(self):
        if Fraction(1) / self.q + Fraction(1) / self.p != Fraction(1, 2):
            raise ParameterOutOfRange("1/q + 1/p must equal 1/2")
        if not self.p >= 2:
            raise ParameterOutOfRange("p must be >= 2")


def alpha_max(s) -> Fraction:
    s = Fraction(s).limit_denominator(10 ** 12) if isinstance(s, float) else Fraction(s)
    return (3 - s) / (1 - s)


def admissible_pair(s, alpha) -> AdmissiblePair:
    """q = 2 alpha / ((1-s)(alpha-1)), p = 2 alpha / (1 + (alpha-1) s), exactly."""
    s = Fraction(s).limit_denominator(10 ** 12) if isinstance(s, float) else Fraction(s)
    a = Fraction(alpha).limit_denominator(10 ** 12) if isinstance(alpha, float) \
        else Fraction(alpha)
    if not 0 <= s < Fraction(1, 2):
        raise ParameterOutOfRange(f"s = {s} outside [0, 1/2)")
    if not 2 <= a <= (3 - s) / (1 - s):
        raise ParameterOutOfRange(f"alpha = {a} outside [2, (3-s)/(1-s)] = "
                                  f"[2, {(3 - s) / (1 - s)}]")
    q = 2 * a / ((1 - s) * (a - 1))
    p = 2 * a / (1 + (a - 1) * s)
    pair = AdmissiblePair(q, p)
    assert 1 / pair.q + 1 / pair.p == Fraction(1, 2)
    return pair


# Slobodecki seminorm -------------------------------------------------------------

def _corr(a, b):
    """c[z] = sum_x a[x] * b[x + z] over all (circular) shifts."""
    return np.fft.ifft2(np.conj(np.fft.fft2(np.conj(a))) * np.fft.fft2(b))


def _shift_diffs(u, alphas, shape):
    """sum over alpha of sum_x alpha(x) alpha(x+z) |u(x+z) - u(x)|^2 for each shift z."""
    n1, n2 = u.shape
    U = np.zeros(shape, dtype=complex)
    U[:n1, :n2] = u
    A2 = np.abs(U) ** 2
    D = np.zeros(shape)
    for c, al in alphas:
        D += c * (2 * _corr(al, al * A2).real - 2 * _corr(al * np.conj(U), al * U).real)
    return D


def _box_complement(Za, Zb, s):
    """int over z1, z2 > 0 with z1 > Za or z2 > Zb of |z|^{-2-2s}."""
    B = math.sqrt(math.pi) * gamma(s + 0.5) / (2 * gamma(s + 1))
    part1 = B * Za ** (-2 * s) / (2 * s)
    part2 = quad(lambda z1: quad(lambda z2: (z1 * z1 + z2 * z2) ** (-1 - s), Zb, np.inf)[0],
                 0, Za)[0]
    return part1 + part2


def slobodecki_seminorm(field: PlaneField, s: float, domain: str = "quadrant") -> float:
    """(int int_{O x O} |u(x)-u(y)|^2 / |x-y|^{2+2s} dx dy)^{1/2}.

    For domain 'quadrant' the nodes must be x_j = j h, j >= 0, with u given on
    the closed quadrant and vanishing beyond the box. For 'plane' u vanishes
    outside the sampled box.

    Written as int |z|^{-2-2s} D(z) dz with D(z) = int |u(x+z) - u(x)|^2 over
    admissible x. D is computed for every lattice shift with FFT
    correlations; near z = 0 the quadratic model z.M.z (M the gradient Gram
    matrix) is subtracted and integrated exactly; beyond the lattice the
    shifted copies no longer overlap and D reduces to tail masses of |u|^2.
    """
    if not 0 < s < 1:
        raise ParameterOutOfRange("Slobodecki seminorm needs 0 < s < 1")
    if domain not in ("quadrant", "plane"):
        raise ValueError("domain must be 'quadrant' or 'plane'")
    u = np.asarray(field.values, dtype=complex)
    h = field.h
    n1, n2 = u.shape
    if not np.any(u):
        return 0.0
    if domain == "quadrant":
        if abs(field.x1_nodes[0]) > 1e-12 or abs(field.x2_nodes[0]) > 1e-12:
            raise ValueError("quadrant fields must start at x = 0")
        # lattice over the infinite quadrant (ones beyond the box); the last
        # third of each axis stands for negative coordinates and stays empty
        shape = (3 * n1, 3 * n2)
        e1 = np.zeros(shape[0]); e1[0] = 1
        e2 = np.zeros(shape[1]); e2[0] = 1
        o1 = np.zeros(shape[0]); o1[:2 * n1] = 1
        o2 = np.zeros(shape[1]); o2[:2 * n2] = 1
        a1, a2 = o1 - 0.5 * e1, o2 - 0.5 * e2
        # trapezoid weight of the overlap region factorizes per axis as
        # h (a(x) a(y) + e(x) e(y) / 4)
        alphas = [(1.0, np.outer(a1, a2)), (0.25, np.outer(e1, a2)),
                  (0.25, np.outer(a1, e2)), (1 / 16, np.outer(e1, e2))]
        W = np.outer(a1[:n1], a2[:n2]) * h * h
    else:
        shape = (2 * n1, 2 * n2)
        ones = np.ones(shape)
        alphas = [(1.0, ones)]
        W = np.full((n1, n2), h * h)
    D = h * h * _shift_diffs(u, alphas, shape)
    p = np.fft.fftfreq(shape[0], 1.0 / shape[0])
    q = np.fft.fftfreq(shape[1], 1.0 / shape[1])
    Z1 = (h * p)[:, None]
    Z2 = (h * q)[None, :]
    R2 = Z1 ** 2 + Z2 ** 2
    g1, g2 = np.gradient(u, h, h, edge_order=2)
    M11 = float(np.sum(W * np.abs(g1) ** 2))
    M22 = float(np.sum(W * np.abs(g2) ** 2))
    M12 = float(np.sum(W * (g1 * np.conj(g2)).real))
    rho = 3 * h
    model = (M11 * Z1 ** 2 + 2 * M12 * Z1 * Z2 + M22 * Z2 ** 2) * np.exp(-R2 / rho ** 2)
    L1, L2 = h * (n1 - 1), h * (n2 - 1)
    inside = (np.abs(Z1) <= L1 + 1e-9 * h) & (np.abs(Z2) <= L2 + 1e-9 * h) & (R2 > 0)
    kern = np.where(inside, np.where(R2 > 0, R2, 1.0) ** (-1 - s), 0.0)
    total = h * h * float(np.sum(kern * (D - model)))
    total += 0.5 * math.pi * (M11 + M22) * rho ** (2 - 2 * s) * gamma(1 - s)
    total += _far_field(np.abs(u) ** 2 * W, h, s, L1 + 0.5 * h, L2 + 0.5 * h, domain)
    return float(math.sqrt(max(total, 0.0)))


def _far_field(mass_density, h, s, Z1, Z2, domain):
    mass = float(mass_density.sum())
    if domain == "plane":
        # D(z) = 2 mass in all four quadrants of z
        return 2 * mass * 2 * (_box_complement(Z1, Z2, s) + _box_complement(Z2, Z1, s))
    # 2 * int F(z) |z|^{-2-2s}; F = mass when z >= 0, a tail mass of |u|^2
    # on the mixed-sign quadrants, zero when both components are negative
    total = mass * _box_complement(Z1, Z2, s)
    m1 = np.cumsum(mass_density.sum(axis=1)[::-1])[::-1]
    m2 = np.cumsum(mass_density.sum(axis=0)[::-1])[::-1]
    for m, Zb in ((m1, Z2), (m2, Z1)):
        a = h * np.arange(m.size)
        inner = np.array([quad(lambda z2: (ai * ai + z2 * z2) ** (-1 - s), Zb, np.inf)[0]
                          for ai in a])
        total += float(np.sum(m * inner) * h)
    return 2 * total


def fourier_equivalence_constant(s: float) -> float:
    """C(s) with |u|_{W^s(R^2)}^2 = C(s) (2 pi)^{-2} int |k|^{2s} |F u|^2 dk."""
    return 2 * math.pi * gamma(1 - s) / (s * 4 ** s * gamma(1 + s))


# boundary spaces -------------------------------------------------------------------

def _profile_transform(exps, nu, T):
    """int_0^T e^{i nu t} p(t) dt for p = sum beta e^{gamma t}."""
    out = np.zeros(np.shape(nu), dtype=complex)
    for beta, gam in exps:
        z = 1j * nu + gam
        small = np.abs(z) * T < 1e-8
        zs = np.where(small, 1.0, z)
        out += beta * np.where(small, T + 0.5 * z * T * T, np.expm1(zs * T) / zs)
    return out


def _cheb_nodes(a, b, n):
    x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def _profile_pair_weights(e1, e2, kappas, b, T, V0):
    """(1/2 pi) int (1 + (kappa - nu)^2)^b P1(nu) conj(P2(nu)) dnu for each kappa.

    |nu| <= V0 by composite Gauss-Legendre on the combined (pole free)
    integrand; the tails split into non-oscillatory and e^{+-i nu T} parts,
    integrated with QAGI / QAWF on a Chebyshev grid in kappa and
    interpolated (V0 is far beyond the kappa range, so the tails are smooth
    in kappa).
    """
    width = min(0.5, math.pi / (4 * T))
    nu, wn = panel_rule(-V0, V0, order=10, max_width=width, max_panels=10 ** 7)
    prod = _profile_transform(e1, nu, T) * np.conj(_profile_transform(e2, nu, T)) * wn
    out = np.empty(kappas.size, dtype=complex)
    for i0 in range(0, kappas.size, 64):
        kk = kappas[i0:i0 + 64]
        out[i0:i0 + 64] = ((1 + (kk[:, None] - nu[None, :]) ** 2) ** b) @ prod
    if b == 0:
        # Parseval: the full-line integral is known exactly in this case
        exact = _l2_time(e1, e2, T)
        return np.full(kappas.size, exact / (2 * np.pi), dtype=complex)
    kmax = float(kappas.max()) if kappas.size else 0.0
    cheb = _cheb_nodes(0.0, max(kmax, 1.0), 24)
    tails = np.array([_tails(e1, e2, kap, b, T, V0) for kap in cheb])
    coef_re = np.polynomial.chebyshev.chebfit(2 * cheb / max(kmax, 1.0) - 1, tails.real, 23)
    coef_im = np.polynomial.chebyshev.chebfit(2 * cheb / max(kmax, 1.0) - 1, tails.imag, 23)
    y = 2 * kappas / max(kmax, 1.0) - 1
    cheb = np.polynomial.chebyshev.chebval
    out += cheb(y, coef_re) + 1j * cheb(y, coef_im)
    return out / (2 * np.pi)


def _l2_time(e1, e2, T):
    """2 pi int_0^T p1 conj(p2) dt (the b = 0 value before the 1/(2 pi))."""
    tot = 0j
    for b1, g1 in e1:
        for b2, g2 in e2:
            g = g1 + np.conj(g2)
            tot += b1 * np.conj(b2) * (T if abs(g) * T < 1e-12 else np.expm1(g * T) / g)
    return 2 * np.pi * tot


def _tails(e1, e2, kap, b, T, V0):
    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-11)
    total = 0j
    for sgn in (1.0, -1.0):
        for b1, g1 in e1:
            for b2, g2 in e2:
                # P1 conj(P2) term: b1 conj(b2) (e^{z1 T} - 1)(e^{conj(z2) T} - 1) / (z1 conj(z2))
                c0 = np.exp((g1 + np.conj(g2)) * T) + 1
                cp = -np.exp(g1 * T)  # multiplies e^{i nu T}
                cm = -np.exp(np.conj(g2) * T)  # multiplies e^{-i nu T}
                coef = b1 * np.conj(b2)

                def R(m, part):
                    nu = sgn * m
                    val = (1 + (kap - nu) ** 2) ** b / ((1j * nu + g1) * (-1j * nu + np.conj(g2)))
                    return val.real if part == 0 else val.imag

                def q(part, weight=None):
                    if weight is None:
                        return quad(R, V0, np.inf, args=(part,), **opts)[0]
                    return quad(R, V0, np.inf, args=(part,), weight=weight, wvar=T,
                                limlst=200, epsabs=1e-13)[0]

                flat = q(0) + 1j * q(1)
                cos = q(0, "cos") + 1j * q(1, "cos")
                sin = q(0, "sin") + 1j * q(1, "sin")
                # e^{+-i nu T} with nu = sgn m
                ep = cos + 1j * sgn * sin
                em = cos - 1j * sgn * sin
                total += coef * (c0 * flat + cp * ep + cm * em)
    return total


def _check_b(b):
    if not 0 <= b < 0.5:
        raise BOutOfRange(f"b = {b} must lie in [0, 1/2) for the zero-extension form")


def boundary_space_norm(trace: BoundaryTrace, sigma: float, b: float, T: float | None = None,
                        cfg: QuadratureConfig | None = None, method: str = "auto") -> float:
    """(int (1+k^2)^sigma ||e^{i k^2 t} g^(k, t)||^2_{H^b(0,T)} dk)^{1/2}, |k| <= k_max.

    The inner norm is the H^b(R) norm (unitary weight (1+tau^2)^b) of the
    zero extension of t -> e^{i k^2 t} g^(k, t). Separable traces go through
    the exact time transforms of their exponential profiles; other traces
    use a discrete Fourier transform on a refined time grid.
    """
    _check_b(b)
    if sigma < 0:
        raise ParameterOutOfRange("sigma must be >= 0")
    cfg = cfg or QuadratureConfig()
    T = float(trace.T if T is None else T)
    if trace.is_zero:
        return 0.0
    if method == "auto":
        method = "exact" if trace.terms is not None else "dft"
    K = cfg.k_max
    kn, wk = panel_rule(0.0, K, order=10, max_width=0.5)
    if method == "exact":
        if trace.terms is None:
            raise ValueError("exact method needs a separable trace")
        V0 = 2 * K * K + 100 + 40 / T + max(abs(np.imag(g)) for _, _, p in trace.terms
                                            for _, g in p.exponentials())
        kap = kn ** 2
        total = np.zeros(kn.size)
        xs_ft = {}
        for i, (c1, f1, p1) in enumerate(trace.terms):
            for j, (c2, f2, p2) in enumerate(trace.terms):
                for f in (f1, f2):
                    if f not in xs_ft:
                        E, x = hlft_matrix(np.concatenate([kn, -kn]), f.support(), f.scale(),
                                           cfg, 10)
                        xs_ft[f] = E @ f(x)
                M = _profile_pair_weights(p1.exponentials(), p2.exponentials(), kap, b, T, V0)
                a1, a2 = xs_ft[f1], xs_ft[f2]
                # both signs of k share kappa = k^2
                both = (a1[:kn.size] * np.conj(a2[:kn.size]) + a1[kn.size:] * np.conj(a2[kn.size:]))
                total += (c1 * np.conj(c2) * both * M).real
        val = float(np.sum(wk * (1 + kn ** 2) ** sigma * total))
        return math.sqrt(max(val, 0.0))
    return _boundary_norm_dft(trace, sigma, b, T, cfg, kn, wk)


def _boundary_norm_dft(trace, sigma, b, T, cfg, kn, wk):
    K = cfg.k_max
    rate = K * K + 10.0
    nt = int(2 ** math.ceil(math.log2(4 * rate * T / math.pi + 16)))
    t = np.linspace(0.0, T, nt + 1)
    dt = T / nt
    k = np.concatenate([-kn[::-1], kn])
    wkk = np.concatenate([wk[::-1], wk])
    G = trace._hlft_grid(k, t, cfg) * np.exp(1j * np.outer(k ** 2, t))
    G[:, 0] *= 0.5
    G[:, -1] *= 0.5
    P = 8 * nt
    F = np.fft.fft(G, n=P, axis=1) * dt
    tau = 2 * np.pi * np.fft.fftfreq(P, dt)
    wt = (1 + tau ** 2) ** b
    inner = (np.abs(F) ** 2 * wt).sum(axis=1) / (P * dt)
    weighted = np.abs(F) ** 2 * wt
    outer = np.abs(tau) > 0.5 * np.abs(tau).max()
    if weighted[:, outer].sum() > TAIL_FRACTION ** 2 * weighted.sum():
        warnings.warn("boundary_space_norm: time spectrum not resolved", ResolutionWarning,
                      stacklevel=3)
    val = float(np.sum(wkk * (1 + k ** 2) ** sigma * inner))
    return math.sqrt(max(val, 0.0))


# space-time norms -----------------------------------------------------------------

def _as_plane_series(series, edges=None):
    """List of PlaneFields from a SolutionBundle, WaveFields or PlaneFields."""
    fields = getattr(series, "fields", series)
    out = []
    for i, f in enumerate(fields):
        if isinstance(f, PlaneField):
            out.append(f)
        else:
            eg, eh = edges(f) if edges is not None else (None, None)
            out.append(zero_extend(f, eg, eh))
    return out


def _pair_qp(pair):
    if isinstance(pair, AdmissiblePair):
        return float(pair.q), float(pair.p)
    q, p = pair
    return float(q), float(p)


def time_integral(values, times, T):
    """Simpson rule over slices that must span [0, T]."""
    times = np.asarray(times, dtype=float)
    if times.size < 2 or abs(times[0]) > 1e-12 * max(T, 1) or abs(times[-1] - T) > 1e-9 * max(T, 1):
        raise ValueError("time slices must span [0, T] including both endpoints")
    return float(simpson(np.asarray(values, dtype=float), x=times))


def strichartz_norm(series, s: float, pair, T: float, edges=None) -> float:
    """(int_0^T ||u(t)||_{H^{s,p}}^q dt)^{1/q} from per-slice Bessel-potential norms."""
    fields = _as_plane_series(series, edges)
    q, p = _pair_qp(pair)
    if not fields:
        return 0.0
    times = [f.time for f in fields]
    vals = [bessel_potential_norm(f, s, p, warn=False) ** q for f in fields]
    return time_integral(vals, times, T) ** (1 / q)


# Appendix-type properties -----------------------------------------------------

def _quadrant_extent(field):
    if isinstance(field, SeparableField):
        hi = max(max(a.support()[1], b.support()[1]) for _, a, b in field.terms)
        return hi
    return None


def hardy_quotient(field, s: float, h: float = 0.02, L: float | None = None) -> float:
    """int delta^{-2s} |u|^2 / (||u||_{L^2}^2 + |u|_{W^s}^2), delta = min(x1, x2)."""
    if not 0 < s < 0.5:
        raise ParameterOutOfRange("hardy_quotient needs 0 < s < 1/2")
    if isinstance(field, SeparableField):
        for c, a, b in field.terms:
            if c != 0 and (a.support()[0] <= 0 or b.support()[0] <= 0):
                raise SupportViolation("support touches the axes")
    L = L or (_quadrant_extent(field) or 10.0) + 0.5
    n = int(round(L / h))
    x = h * np.arange(n + 1)
    u = np.asarray(field(x[:, None], x[None, :]), dtype=complex)
    if np.abs(u[0]).max() > 1e-14 or np.abs(u[:, 0]).max() > 1e-14:
        raise SupportViolation("field does not vanish on the axes")
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2
    W = np.outer(w, w)
    delta = np.minimum(x[:, None], x[None, :])
    a2 = np.abs(u) ** 2
    mask = delta > 0
    num = float(np.sum(W[mask] * delta[mask] ** (-2 * s) * a2[mask]))
    l2 = float(np.sum(W * a2))
    semi = slobodecki_seminorm(PlaneField(x, x, u), s, "quadrant")
    return num / (l2 + semi ** 2)


def _extensions(u, h, L, damping=1.0):
    n = int(round(L / h))
    x = h * np.arange(-n, n + 1)
    X1, X2 = x[:, None], x[None, :]
    even = np.asarray(u(np.abs(X1), np.abs(X2)), dtype=complex)
    damp = even * np.exp(-damping * (np.maximum(-X1, 0) + np.maximum(-X2, 0)))
    return {
        "zero": sample_quadrant(u, h, L),
        "even": PlaneField(x, x, even),
        "damped": PlaneField(x, x, damp),
    }


_K_LOW = 40.0  # end of the uniform part of the k rule
_K_ASYMPTOTIC = 400.0  # beyond: two-term integration by parts
_TAIL_MAP_MAX = 25.0


def _hl_transform(f, k):
    """int_0^inf e^{-ikx} f(x) dx of one factor, vectorised over k."""
    k = np.asarray(k, dtype=float)
    if f.is_zero:
        return np.zeros(k.shape, dtype=complex)
    if isinstance(f, ExpDecay1D):
        return f.amp / (f.rate + 1j * k)
    out = np.empty(k.shape, dtype=complex)
    near = np.abs(k) <= _K_ASYMPTOTIC
    width = min(f.scale(), math.pi / _K_ASYMPTOTIC)
    lo, hi = f.support()
    n = max(1, int(math.ceil((hi - lo) / width)))
    x, w = rule_from_breaks(np.linspace(lo, hi, n + 1), 8)
    fx = w * f(x)
    for i in np.array_split(np.flatnonzero(near), max(1, near.sum() // 64)):
        out[i] = np.exp(-1j * np.outer(k[i], x)) @ fx
    # only the jump at x = 0 survives at high frequency
    d = 1e-4
    f0 = float(f(np.array([0.0]))[0])
    f1 = float((-3 * f0 + 4 * f(np.array([d]))[0] - f(np.array([2 * d]))[0]) / (2 * d))
    ik = 1j * k[~near]
    out[~near] = f0 / ik + f1 / ik ** 2
    return out


def _k_rule(s, dk, tail_panels):
    """Nodes and weights on R: uniform panels on |k| <= _K_LOW, then the map
    k = _K_LOW (1-u)^{-m} that turns the k^{2s-2} tail of a jump into a
    bounded integrand in u."""
    low, wl = rule_from_breaks(np.linspace(-_K_LOW, _K_LOW,
                                          int(math.ceil(2 * _K_LOW / dk)) + 1), 8)
    m = min(2.0 / (1.0 - 2.0 * s), _TAIL_MAP_MAX)
    u, wu = rule_from_breaks(np.linspace(0.0, 1.0, tail_panels + 1), 16)
    kt = _K_LOW * (1 - u) ** (-m)
    wt = wu * _K_LOW * m * (1 - u) ** (-m - 1)
    return (np.concatenate([-kt[::-1], low, kt]), np.concatenate([wt[::-1], wl, wt]))


def zero_extension_norm(field: SeparableField, s: float, dk: float = 0.25,
                        tail_panels: int = 32) -> float:
    """||zero extension of field||_{H^s(R^2)} from exact half-line transforms.

    A grid spectrum misses the k^{2s-2} tail of the jump at the edges, which
    carries most of the norm as s -> 1/2; here the tail is integrated.
    """
    if not 0 <= s < 0.5:
        raise ParameterOutOfRange("zero_extension_norm needs 0 <= s < 1/2")
    k, w = _k_rule(s, dk, tail_panels)
    terms = [(c, _hl_transform(a, k), _hl_transform(b, k)) for c, a, b in field.terms
             if c != 0 and not (a.is_zero or b.is_zero)]
    if not terms:
        return 0.0
    k2 = k * k
    total = 0.0
    for i in np.array_split(np.arange(k.size), max(1, k.size // 256)):
        W = (1 + k2[i, None] + k2[None, :]) ** s
        for c, A, B in terms:
            for c2, A2, B2 in terms:
                P = w[i] * c * A[i] * np.conj(c2 * A2[i])
                Q = w * B * np.conj(B2)
                total += float(np.real(P @ W @ Q))
    return math.sqrt(max(total, 0.0)) / (2 * math.pi)


def extension_bound_ratio(field, s: float, h: float = 0.05, L: float | None = None,
                          details: bool = False):
    """||zero extension||_{H^s(R^2)} / min over {zero, even, damped reflection}.

    The minimum over the dictionary stands in for the (uncomputable)
    restriction-norm infimum. For separable fields the zero extension is
    normed exactly (:func:`zero_extension_norm`); the two reflections are
    continuous across the edges and converge quickly on the grid.
    """
    if not 0 <= s < 0.5:
        raise ParameterOutOfRange("extension_bound_ratio needs 0 <= s < 1/2")
    L = L or (_quadrant_extent(field) or 10.0)
    ext = _extensions(field, h, L)
    if isinstance(field, SeparableField):
        ext["zero"] = None
    norms = {k: (zero_extension_norm(field, s) if v is None
                 else sobolev_norm_plane(v, s, warn=False)) for k, v in ext.items()}
    best = min(norms.values())
    ratio = norms["zero"] / best if best > 0 else 1.0
    return (ratio, norms) if details else ratio


# estimate ratios ---------------------------------------------------------------

@dataclass
class RatioResult:
    value: float
    numerator: float
    denominator: float
    zero_denominator: bool = False


def _ratio(num, den):
    if den == 0:
        return RatioResult(math.inf, num, den, True)
    return RatioResult(num / den, num, den)


def _forcing_l1(f, T, h, L, s, n_time=16):
    from .linear import GridForcing

    if getattr(f, "is_zero", False):
        return 0.0
    t, w = rule_from_breaks(np.linspace(0.0, T, 3), n_time // 2)
    vals = []
    for tn in t:
        if isinstance(f, GridForcing):
            x = f.x_nodes
            v = f.at(tn)
            n = x.size - 1
            xs = h * np.arange(-n, n + 1)
            full = np.zeros((xs.size, xs.size), dtype=complex)
            q = v.copy()
            q[0] *= 0.5
            q[:, 0] *= 0.5
            full[n:, n:] = q
            vals.append(sobolev_norm_plane(PlaneField(xs, xs, full), s, warn=False))
        else:
            vals.append(sobolev_norm_plane(sample_quadrant(f.at(tn), h, L), s, warn=False))
    return float(np.dot(w, vals))


def _bundle_edges(prob):
    def edges(field):
        return (prob.g0(field.x1_nodes, field.time), prob.h0(field.x2_nodes, field.time))
    return edges


def linear_estimate_ratio(prob, bundle, s: float, pair, cfg: QuadratureConfig | None = None
                          ) -> RatioResult:
    """[sup_t ||u(t)||_{H^s} + ||u||_{L^q H^{s,p}}] / [||u0||_{H^s} + X-norms + ||f||_{L^1 H^s}].

    Quarter-plane norms are taken through the zero extension. ``bundle``
    must hold slices at times spanning [0, T].
    """
    cfg = cfg or prob.cfg
    edges = _bundle_edges(prob)
    fields = _as_plane_series(bundle, edges)
    T = prob.T
    sup = max(sobolev_norm_plane(f, s, warn=False) for f in fields)
    num = sup + strichartz_norm(fields, s, pair, T)
    h = fields[0].h
    Lx = float(fields[0].x1_nodes[-1])
    den = sobolev_norm_plane(sample_quadrant(prob.u0, h, Lx), s, warn=False)
    for tr in (prob.g0, prob.h0):
        if not tr.is_zero:
            den += boundary_space_norm(tr, 0.0, (2 * s + 1) / 4, T, cfg)
            den += boundary_space_norm(tr, s, 0.25, T, cfg)
    den += _forcing_l1(prob.f, T, h, Lx, s)
    return _ratio(num, den)


# reports ---------------------------------------------------------------------------

REPORT_KEYS = ("hs_u0", "x_g0_low", "x_g0_high", "x_h0_low", "x_h0_high", "f_l1hs",
               "q", "p", "data_size_D", "lifespan", "c_constant")


@dataclass
class NormReport:
    hs_u0: float
    x_g0_low: float
    x_g0_high: float
    x_h0_low: float
    x_h0_high: float
    f_l1hs: float
    pair: AdmissiblePair
    c_constant: float = 1.0
    lifespan: float | str | None = None

    @property
    def data_size_D(self) -> float:
        return (self.hs_u0 + self.x_g0_low + self.x_g0_high + self.x_h0_low + self.x_h0_high)

    def to_dict(self):
        life = self.lifespan
        if hasattr(life, "to_json_value"):
            life = life.to_json_value()
        return {
            "hs_u0": self.hs_u0, "x_g0_low": self.x_g0_low, "x_g0_high": self.x_g0_high,
            "x_h0_low": self.x_h0_low, "x_h0_high": self.x_h0_high, "f_l1hs": self.f_l1hs,
            "q": str(self.pair.q), "p": str(self.pair.p),
            "data_size_D": self.data_size_D, "lifespan": life, "c_constant": self.c_constant,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def norm_report(prob, s, alpha, c: float = 1.0, h: float = 0.05, L: float = 12.0,
                cfg: QuadratureConfig | None = None) -> NormReport:
    """All data norms of a LinearProblem plus pair and lifespan."""
    from .nls import lifespan_bound

    cfg = cfg or prob.cfg
    pair = admissible_pair(s, alpha)
    sf = float(s)
    xs = []
    for tr in (prob.g0, prob.h0):
        if tr.is_zero:
            xs += [0.0, 0.0]
        else:
            xs += [boundary_space_norm(tr, 0.0, (2 * sf + 1) / 4, prob.T, cfg),
                   boundary_space_norm(tr, sf, 0.25, prob.T, cfg)]
    rep = NormReport(
        hs_u0=sobolev_norm_plane(sample_quadrant(prob.u0, h, L), sf, warn=False),
        x_g0_low=xs[0], x_g0_high=xs[1], x_h0_low=xs[2], x_h0_high=xs[3],
        f_l1hs=_forcing_l1(prob.f, prob.T, h, L, sf),
        pair=pair, c_constant=c)
    rep.lifespan = lifespan_bound(rep, s, alpha, c)
    return rep
