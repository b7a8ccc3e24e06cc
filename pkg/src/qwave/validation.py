"""Input checks shared by the estimators."""

import numpy as np

from .exceptions import InsufficientGrid


def check_nodes(x, name="x", x_min=0.0):
    """1-D strictly increasing finite nodes, all > x_min."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(np.diff(x) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    if x[0] <= x_min:
        raise InsufficientGrid(f"{name} must lie strictly inside the quadrant "
                               f"(> {x_min}), got {x[0]}")
    return x


def check_times(times, T):
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1:
        raise ValueError("times must be 1-D")
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")
    if np.any(t < 0) or np.any(t > T * (1 + 1e-12)):
        raise ValueError(f"times must lie in [0, {T}]")
    return t


def uniform_spacing(x, name="x", rtol=1e-9):
    """Spacing of a uniform grid, or raise."""
    d = np.diff(np.asarray(x, dtype=float))
    if d.size == 0 or np.ptp(d) > rtol * d.mean():
        raise InsufficientGrid(f"{name} must be a uniform grid")
    return float(d.mean())
