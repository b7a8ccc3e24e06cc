"""JSON problem files: loading, validation and serialisation.

Every violation found in a file is collected with its field path and reported
in one :class:`ValidationError`, so a user fixes a file in one pass.
"""

from __future__ import annotations

import copy
import json
import math
import warnings
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .exceptions import CornerMismatchWarning, ParseError, ValidationError
from .families import build_forcing, build_initial, build_trace
from .quadrature import QuadratureConfig
from .reference import FdConfig

SCHEMA_VERSION = 1
DATA_SLOTS = ("initial", "boundary_g0", "boundary_h0", "forcing")


def _zero_desc():
    return {"family": "zero", "params": {}}


def _default_grid(T=1.0):
    return {"x_min": 0.5, "x_max": 6.0, "n": 12, "times": [T]}


def _default_quadrature():
    q = QuadratureConfig()
    return {f.name: getattr(q, f.name) for f in fields(q)}


def _default_fd():
    d = FdConfig()
    return {f.name: getattr(d, f.name) for f in fields(d)}


@dataclass
class ProblemFile:
    schema_version: int = SCHEMA_VERSION
    s: float = 0.0
    alpha: float = 3.0
    sign: int = 1
    T: float = 1.0
    initial: dict = field(default_factory=_zero_desc)
    boundary_g0: dict = field(default_factory=_zero_desc)
    boundary_h0: dict = field(default_factory=_zero_desc)
    forcing: dict = field(default_factory=_zero_desc)
    grid: dict = field(default_factory=_default_grid)
    quadrature: dict = field(default_factory=_default_quadrature)
    fd: dict = field(default_factory=_default_fd)
    constants: dict = field(default_factory=lambda: {"c": 1.0})

    # builders ------------------------------------------------------------
    def quadrature_config(self) -> QuadratureConfig:
        return QuadratureConfig(**self.quadrature)

    def fd_config(self) -> FdConfig:
        return FdConfig(**self.fd)

    def nodes(self):
        g = self.grid
        return np.linspace(g["x_min"], g["x_max"], int(g["n"]))

    def times(self):
        return np.asarray(self.grid["times"], dtype=float)

    def linear_problem(self, with_forcing=True):
        from .linear import LinearProblem

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CornerMismatchWarning)
            return LinearProblem(
                u0=build_initial(self.initial),
                f=build_forcing(self.forcing if with_forcing else _zero_desc()),
                g0=build_trace(self.boundary_g0, self.T, "g0"),
                h0=build_trace(self.boundary_h0, self.T, "h0"),
                T=self.T, cfg=self.quadrature_config())

    def nls_problem(self):
        from .nls import NlsProblem

        if self.forcing.get("family", "zero") != "zero":
            raise ValidationError([("forcing.family",
                                    "the nonlinear problem has no external forcing")])
        return NlsProblem(self.linear_problem(), s=self.s, alpha=self.alpha, sign=self.sign)

    def to_dict(self) -> dict:
        return {f.name: copy.deepcopy(getattr(self, f.name)) for f in fields(self)}


# validation ------------------------------------------------------------------

def _exact(v) -> Fraction:
    # decimal literal in the file -> exact rational (0.4 is 2/5, not its binary float)
    return Fraction(repr(float(v)))


def _number(d, key, path, errors, default=None, integer=False):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append((path, f"expected a number, got {v!r}"))
        return None
    if not math.isfinite(v):
        errors.append((path, "must be finite"))
        return None
    if integer and int(v) != v:
        errors.append((path, "must be an integer"))
        return None
    return int(v) if integer else float(v)


def _check_params(params, path, errors):
    if not isinstance(params, dict):
        errors.append((path, "params must be a map"))
        return
    for k, v in params.items():
        p = f"{path}.{k}"
        if k == "time":
            if isinstance(v, str):
                continue
            if not isinstance(v, dict):
                errors.append((p, "expected a profile name or {kind, rate}"))
            elif "rate" in v and (isinstance(v["rate"], bool)
                                  or not isinstance(v["rate"], (int, float))):
                errors.append((p + ".rate", "expected a number"))
            continue
        vals = v if isinstance(v, list) else [v]
        if not vals or any(isinstance(x, bool) or not isinstance(x, (int, float))
                           or not math.isfinite(x) for x in vals):
            errors.append((p, f"expected a finite number or list of numbers, got {v!r}"))


def _validate_data(raw, errors, T):
    for slot in DATA_SLOTS:
        desc = raw.get(slot, _zero_desc())
        if not isinstance(desc, dict) or "family" not in desc:
            errors.append((slot, "expected a descriptor {family, params}"))
            continue
        extra = set(desc) - {"family", "params"}
        if extra:
            errors.append((slot, f"unknown keys {sorted(extra)}"))
        params = desc.get("params", {})
        n_before = len(errors)
        _check_params(params, slot + ".params", errors)
        if len(errors) > n_before:
            continue
        if slot == "initial":
            build_initial(desc, slot, errors)
        elif slot == "forcing":
            build_forcing(desc, slot, errors)
        elif T is not None:
            try:
                build_trace(desc, T, slot.split("_")[1], slot, errors)
            except Exception as exc:  # family constructor rejected the parameters
                errors.append((slot, str(exc)))


def _validate_grid(g, errors, T):
    if not isinstance(g, dict):
        errors.append(("grid", "expected a map"))
        return
    extra = set(g) - {"x_min", "x_max", "n", "times"}
    if extra:
        errors.append(("grid", f"unknown keys {sorted(extra)}"))
    lo = _number(g, "x_min", "grid.x_min", errors)
    hi = _number(g, "x_max", "grid.x_max", errors)
    n = _number(g, "n", "grid.n", errors, integer=True)
    if lo is not None and lo <= 0:
        errors.append(("grid.x_min", "must be > 0 (evaluation stays inside the quadrant)"))
    if lo is not None and hi is not None and hi <= lo:
        errors.append(("grid.x_max", "must exceed x_min"))
    if n is not None and n < 2:
        errors.append(("grid.n", "must be >= 2"))
    times = g.get("times")
    if not isinstance(times, list) or not times:
        errors.append(("grid.times", "expected a non-empty list"))
        return
    bad = [t for t in times if isinstance(t, bool) or not isinstance(t, (int, float))]
    if bad:
        errors.append(("grid.times", f"non-numeric entries {bad}"))
        return
    if any(b < a for a, b in zip(times, times[1:])):
        errors.append(("grid.times", "must be non-decreasing"))
    if T is not None and any(t < 0 or t > T for t in times):
        errors.append(("grid.times", f"must lie in [0, T] = [0, {T}]"))


def _validate_config(raw, key, cls, errors):
    d = raw.get(key, {})
    if not isinstance(d, dict):
        errors.append((key, "expected a map"))
        return
    names = {f.name for f in fields(cls)}
    extra = set(d) - names
    if extra:
        errors.append((key, f"unknown keys {sorted(extra)}"))
        return
    if cls is QuadratureConfig:
        merged = {**_default_quadrature(), **d}
        for k, v in merged.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                errors.append((f"{key}.{k}", "expected a number"))
                return
        errors.extend((f"{key}.{k}", m)
                      for k, m in QuadratureConfig.violations(SimpleNamespace(**merged)))
        return
    try:
        cls(**d)
    except ValidationError as exc:
        errors.extend(exc.violations)
    except TypeError as exc:
        errors.append((key, str(exc)))


def validate(raw: dict) -> ProblemFile:
    """Validate a decoded problem file and fill defaults."""
    if not isinstance(raw, dict):
        raise ValidationError([("", "top level must be a JSON object")])
    errors = []
    known = {f.name for f in fields(ProblemFile)}
    extra = set(raw) - known
    if extra:
        errors.append(("", f"unknown keys {sorted(extra)}"))
    ver = _number(raw, "schema_version", "schema_version", errors, SCHEMA_VERSION, True)
    if ver is not None and ver != SCHEMA_VERSION:
        errors.append(("schema_version", f"unsupported version {ver}"))
    s = _number(raw, "s", "s", errors, 0.0)
    alpha = _number(raw, "alpha", "alpha", errors, 3.0)
    if s is not None and not 0 <= s < 0.5:
        errors.append(("s", f"s = {s} outside the well-posedness range [0, 1/2)"))
    elif s is not None and alpha is not None:
        top = (3 - _exact(s)) / (1 - _exact(s))
        if not 2 <= _exact(alpha) <= top:
            errors.append(("alpha", f"alpha = {alpha} outside [2, (3-s)/(1-s)] = "
                                    f"[2, {top}] ~ [2, {float(top):.4g}]"))
    sign = _number(raw, "sign", "sign", errors, 1, True)
    if sign is not None and sign not in (1, -1):
        errors.append(("sign", "must be +1 (defocusing) or -1 (focusing)"))
    T = _number(raw, "T", "T", errors, 1.0)
    if T is not None and T <= 0:
        errors.append(("T", "must be positive"))
        T = None
    _validate_data(raw, errors, T)
    _validate_grid(raw.get("grid", _default_grid(T or 1.0)), errors, T)
    _validate_config(raw, "quadrature", QuadratureConfig, errors)
    _validate_config(raw, "fd", FdConfig, errors)
    consts = raw.get("constants", {"c": 1.0})
    if not isinstance(consts, dict):
        errors.append(("constants", "expected a map"))
    else:
        c = _number(consts, "c", "constants.c", errors, 1.0)
        if c is not None and c <= 0:
            errors.append(("constants.c", "must be positive"))
        if set(consts) - {"c"}:
            errors.append(("constants", f"unknown keys {sorted(set(consts) - {'c'})}"))
    if errors:
        raise ValidationError(errors)

    out = ProblemFile()
    for name in ("s", "alpha", "T"):
        setattr(out, name, float(raw.get(name, getattr(out, name))))
    out.sign = int(raw.get("sign", 1))
    for slot in DATA_SLOTS:
        desc = copy.deepcopy(raw.get(slot, _zero_desc()))
        desc.setdefault("params", {})
        setattr(out, slot, desc)
    g = copy.deepcopy(raw.get("grid", _default_grid(out.T)))
    out.grid = {"x_min": float(g["x_min"]), "x_max": float(g["x_max"]), "n": int(g["n"]),
                "times": [float(t) for t in g["times"]]}
    out.quadrature = {**_default_quadrature(), **raw.get("quadrature", {})}
    out.fd = {**_default_fd(), **raw.get("fd", {})}
    out.constants = {"c": float(consts.get("c", 1.0))}
    return out


def loads(text: str) -> ProblemFile:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError([("", f"invalid JSON: {exc}")]) from None
    return validate(raw)


def load_problem(path) -> ProblemFile:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError([("", f"cannot read {p}: {exc.strerror}")]) from None
    return loads(text)


def serialize(spec: ProblemFile) -> str:
    return json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n"


def save_problem(spec: ProblemFile, path):
    Path(path).write_text(serialize(spec))
