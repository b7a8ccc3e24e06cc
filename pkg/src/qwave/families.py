"""Named analytic data families.

Initial data and forcing are finite sums of separable products
``c * a(x1) * b(x2)`` (times a time profile for forcing), which keeps their
quarter-plane transforms exact products of half-line transforms. Boundary
traces are wrapped in :class:`qwave.transforms.BoundaryTrace`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import NonDecayingTrace, ValidationError

FAMILIES = ("zero", "gaussian", "exp_decay", "bump", "free_evolution_trace")
PROFILES = ("const", "exp", "sin", "cos", "expi")

_LOG_EPS = 40.0  # e^{-40} ~ 4e-18, below double precision relative to O(1) data


@dataclass(frozen=True)
class Profile:
    kind: str = "const"
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in PROFILES:
            raise ValueError(f"unknown time profile {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        r = self.rate
        if self.kind == "const":
            return np.ones_like(t, dtype=complex)
        if self.kind == "exp":
            return np.exp(-r * t).astype(complex)
        if self.kind == "sin":
            return np.sin(r * t).astype(complex)
        if self.kind == "cos":
            return np.cos(r * t).astype(complex)
        return np.exp(1j * r * t)

    @property
    def real_valued(self):
        return self.kind != "expi"

    def exponentials(self):
        """(beta, gamma) pairs with p(t) = sum beta * exp(gamma * t)."""
        r = self.rate
        return {
            "const": [(1.0, 0.0)],
            "exp": [(1.0, -r)],
            "sin": [(-0.5j, 1j * r), (0.5j, -1j * r)],
            "cos": [(0.5, 1j * r), (0.5, -1j * r)],
            "expi": [(1.0, 1j * r)],
        }[self.kind]

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate}


# one-dimensional building blocks ---------------------------------------------

class Func1D:
    name = "base"
    decaying = True

    def __call__(self, x):
        raise NotImplementedError

    def support(self) -> Tuple[float, float]:
        """Interval of [0, inf) outside which the function is negligible."""
        raise NotImplementedError

    def scale(self) -> float:
        """Length over which the function changes appreciably."""
        return 1.0

    @property
    def is_zero(self):
        return False


@dataclass(frozen=True)
class Zero1D(Func1D):
    name = "zero"

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def support(self):
        return (0.0, 0.0)

    @property
    def is_zero(self):
        return True


@dataclass(frozen=True)
class Gaussian1D(Func1D):
    amp: float = 1.0
    center: float = 0.0
    width: float = 1.0
    name = "gaussian"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.exp(-((x - self.center) / self.width) ** 2)

    def support(self):
        half = self.width * np.sqrt(_LOG_EPS + np.log(max(abs(self.amp), 1.0)))
        return (max(0.0, self.center - half), max(0.0, self.center + half))

    def scale(self):
        return 0.5 * self.width

    @property
    def is_zero(self):
        return self.amp == 0


@dataclass(frozen=True)
class ExpDecay1D(Func1D):
    amp: float = 1.0
    rate: float = 1.0
    name = "exp_decay"

    def __post_init__(self):
        if not self.rate > 0:
            raise NonDecayingTrace(f"exp_decay needs rate > 0, got {self.rate}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.exp(-self.rate * x)

    def support(self):
        return (0.0, (_LOG_EPS + np.log(max(abs(self.amp), 1.0))) / self.rate)

    def scale(self):
        return 1.0 / self.rate

    @property
    def is_zero(self):
        return self.amp == 0


@dataclass(frozen=True)
class Bump1D(Func1D):
    """amp * exp(1 - 1/(1 - y^2)) with y = (x - center)/radius, zero for |y| >= 1."""

    amp: float = 1.0
    center: float = 1.5
    radius: float = 0.5
    name = "bump"

    def __call__(self, x):
        y = (np.asarray(x, dtype=float) - self.center) / self.radius
        out = np.zeros_like(y)
        m = np.abs(y) < 1
        out[m] = self.amp * np.exp(1.0 - 1.0 / (1.0 - y[m] ** 2))
        return out

    def support(self):
        return (max(0.0, self.center - self.radius), max(0.0, self.center + self.radius))

    def scale(self):
        return self.radius / 8

    @property
    def is_zero(self):
        return self.amp == 0


# quarter-plane functions -----------------------------------------------------

@dataclass(frozen=True)
class SeparableField:
    """sum_r coef_r * a_r(x1) * b_r(x2) on the closed quarter-plane."""

    terms: tuple = ()

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape, dtype=complex)
        for c, a, b in self.terms:
            out = out + c * a(x1) * b(x2)
        return out

    def grid(self, x1, x2):
        """Values on the tensor grid x1 (rows) by x2 (columns)."""
        return self(np.asarray(x1)[:, None], np.asarray(x2)[None, :])

    @property
    def is_zero(self):
        return all(c == 0 or a.is_zero or b.is_zero for c, a, b in self.terms)

    @property
    def real_valued(self):
        return all(np.isreal(c) for c, _, _ in self.terms)

    def __add__(self, other):
        return SeparableField(self.terms + other.terms)

    def __mul__(self, lam):
        return SeparableField(tuple((lam * c, a, b) for c, a, b in self.terms))

    __rmul__ = __mul__


@dataclass(frozen=True)
class SeparableForcing:
    """sum_r coef_r * a_r(x1) * b_r(x2) * p_r(t)."""

    terms: tuple = ()

    def __call__(self, x1, x2, t):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2, np.asarray(t)).shape, dtype=complex)
        for c, a, b, p in self.terms:
            out = out + c * a(x1) * b(x2) * p(t)
        return out

    def at(self, t) -> SeparableField:
        return SeparableField(tuple((c * complex(p(t)), a, b) for c, a, b, p in self.terms))

    @property
    def is_zero(self):
        return all(c == 0 or a.is_zero or b.is_zero for c, a, b, _ in self.terms)

    def __add__(self, other):
        return SeparableForcing(self.terms + other.terms)

    def __mul__(self, lam):
        return SeparableForcing(tuple((lam * c, a, b, p) for c, a, b, p in self.terms))

    __rmul__ = __mul__


ZERO_FIELD = SeparableField(((0.0, Zero1D(), Zero1D()),))
ZERO_FORCING = SeparableForcing(((0.0, Zero1D(), Zero1D(), Profile()),))


def free_gaussian(x1, x2, t, amp=1.0, center=(3.0, 3.0), width=1.0):
    """Free Schrodinger evolution on the plane of amp*exp(-|x-c|^2/width^2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    t = np.asarray(t, dtype=float)
    w2 = width ** 2
    z = w2 + 4j * t
    r2 = (x1 - center[0]) ** 2 + (x2 - center[1]) ** 2
    return amp * (w2 / z) * np.exp(-r2 / z)


# descriptor parsing ----------------------------------------------------------

def _pair(v, path, errors):
    if np.ndim(v) == 0:
        return float(v), float(v)
    v = list(v)
    if len(v) != 2:
        errors.append((path, "expected a number or a pair"))
        return 0.0, 0.0
    return float(v[0]), float(v[1])


def _profile(params, path, errors) -> Profile:
    spec = params.get("time", {"kind": "const"})
    if isinstance(spec, str):
        spec = {"kind": spec}
    try:
        return Profile(spec.get("kind", "const"), float(spec.get("rate", 0.0)))
    except ValueError as exc:
        errors.append((path + ".time", str(exc)))
        return Profile()


def _func1d(family, params, axis, path, errors) -> Func1D:
    amp = float(params.get("amp", 1.0)) if axis == 0 else 1.0
    if family == "zero":
        return Zero1D()
    if family == "gaussian":
        c = _pair(params.get("center", 3.0), path + ".center", errors)[axis]
        w = _pair(params.get("width", 1.0), path + ".width", errors)[axis]
        if w <= 0:
            errors.append((path + ".width", "must be positive"))
            w = 1.0
        return Gaussian1D(amp, c, w)
    if family == "exp_decay":
        r = _pair(params.get("rate", 1.0), path + ".rate", errors)[axis]
        if r <= 0:
            errors.append((path + ".rate", "must be positive (family must decay)"))
            r = 1.0
        return ExpDecay1D(amp, r)
    if family == "bump":
        c = _pair(params.get("center", 1.5), path + ".center", errors)[axis]
        r = _pair(params.get("radius", 0.5), path + ".radius", errors)[axis]
        if r <= 0:
            errors.append((path + ".radius", "must be positive"))
            r = 0.5
        return Bump1D(amp, c, r)
    errors.append((path + ".family", f"unknown family {family!r}"))
    return Zero1D()


def _check_family(desc, path, errors, allowed):
    fam = desc.get("family", "zero")
    if fam not in FAMILIES:
        errors.append((path + ".family", f"not in registered set {FAMILIES}"))
        return None
    if fam not in allowed:
        errors.append((path + ".family", f"{fam!r} not allowed here"))
        return None
    return fam


def build_initial(desc: dict, path="initial", errors=None) -> SeparableField:
    own = errors is None
    errors = [] if own else errors
    fam = _check_family(desc, path, errors, ("zero", "gaussian", "exp_decay", "bump"))
    params = desc.get("params", {})
    out = ZERO_FIELD
    if fam and fam != "zero":
        a = _func1d(fam, params, 0, path + ".params", errors)
        b = _func1d(fam, params, 1, path + ".params", errors)
        out = SeparableField(((1.0, a, b),))
    if own and errors:
        raise ValidationError(errors)
    return out


def build_forcing(desc: dict, path="forcing", errors=None) -> SeparableForcing:
    own = errors is None
    errors = [] if own else errors
    fam = _check_family(desc, path, errors, ("zero", "gaussian", "exp_decay", "bump"))
    params = desc.get("params", {})
    out = ZERO_FORCING
    if fam and fam != "zero":
        a = _func1d(fam, params, 0, path + ".params", errors)
        b = _func1d(fam, params, 1, path + ".params", errors)
        out = SeparableForcing(((1.0, a, b, _profile(params, path + ".params", errors)),))
    if own and errors:
        raise ValidationError(errors)
    return out


def build_trace(desc: dict, T: float, slot: str, path=None, errors=None):
    """Boundary trace for slot 'g0' (on x2 = 0) or 'h0' (on x1 = 0)."""
    from .transforms import BoundaryTrace

    path = path or ("boundary_" + slot)
    own = errors is None
    errors = [] if own else errors
    fam = _check_family(desc, path, errors, FAMILIES)
    params = desc.get("params", {})
    out = BoundaryTrace.zero(T)
    if fam == "free_evolution_trace":
        c = _pair(params.get("center", 3.0), path + ".params.center", errors)
        w = float(params.get("width", 1.0))
        amp = float(params.get("amp", 1.0))
        if w <= 0:
            errors.append((path + ".params.width", "must be positive"))
            w = 1.0
        out = BoundaryTrace.free_gaussian(T, amp, c, w, slot)
    elif fam and fam != "zero":
        f = _func1d(fam, params, 0, path + ".params", errors)
        prof = _profile(params, path + ".params", errors)
        out = BoundaryTrace.separable(T, ((1.0, f, prof),), family_tag=fam)
    if own and errors:
        raise ValidationError(errors)
    return out
