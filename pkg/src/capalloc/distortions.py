"""Distortion functions ``[0, 1] -> [0, 1]`` and a small named registry."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SHAPES = ("convex", "concave", "linear")


class DistortionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DistortionFunction:
    """A non-decreasing ``g`` with ``g(0) = 0``, ``g(1) = 1`` and its derivative.

    ``shape`` is ``"convex"`` (reward side), ``"concave"`` (risk side) or
    ``"linear"`` for the identity, which is both. ``params`` is the JSON form
    used to rebuild the function from the registry.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    shape: str
    name: str
    params: dict = field(default_factory=dict)
    knots: tuple[float, ...] = ()

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DistortionError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        self.validate()

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))

    def is_convex(self) -> bool:
        return self.shape in ("convex", "linear")

    def is_concave(self) -> bool:
        return self.shape in ("concave", "linear")

    def validate(self) -> None:
        ends = self.eval(np.array([0.0, 1.0]))
        if abs(ends[0]) > 1e-12 or abs(ends[1] - 1.0) > 1e-12:
            raise DistortionError(f"{self.name}: need g(0)=0 and g(1)=1, got {ends.tolist()}")
        grid = np.linspace(0.0, 1.0, 1001)
        vals = self.eval(grid)
        if np.any(np.diff(vals) < -1e-12):
            raise DistortionError(f"{self.name}: not non-decreasing")
        step = 1e-6
        t = np.linspace(0.01, 0.99, 99)
        if self.knots:
            # derivative is one-sided at table knots
            near = np.min(np.abs(t[:, None] - np.asarray(self.knots)[None, :]), axis=1)
            t = t[near > 10 * step]
        fd = (self.eval(t + step) - self.eval(t - step)) / (2 * step)
        bad = np.abs(fd - self.deriv(t)) > 1e-4
        if np.any(bad):
            t0 = float(t[np.argmax(bad)])
            raise DistortionError(f"{self.name}: derivative disagrees with finite difference at t={t0}")

    def to_json(self):
        return dict(self.params)


def identity() -> DistortionFunction:
    return DistortionFunction(
        eval=lambda t: np.asarray(t, dtype=float).copy(),
        deriv=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        shape="linear",
        name="identity",
        params={"name": "identity"},
    )


def power(p: float, name: str | None = None) -> DistortionFunction:
    """``t ** p``: convex for ``p > 1``, concave for ``p < 1``."""
    p = float(p)
    if not p > 0:
        raise DistortionError(f"power distortion needs p > 0, got {p}")
    if p == 1.0:
        return identity()
    shape = "convex" if p > 1 else "concave"

    def deriv(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return p * np.power(t, p - 1.0)

    params = {"name": "sqrt"} if name == "sqrt" else {"name": "power", "p": p}
    return DistortionFunction(
        eval=lambda t: np.power(np.asarray(t, dtype=float), p),
        deriv=deriv,
        shape=shape,
        name=name or f"power({p:g})",
        params=params,
    )


def sqrt() -> DistortionFunction:
    return power(0.5, name="sqrt")


def dual_power(p: float) -> DistortionFunction:
    """``1 - (1 - t) ** p``: concave for ``p > 1``, convex for ``p < 1``."""
    p = float(p)
    if not p > 0:
        raise DistortionError(f"dual_power distortion needs p > 0, got {p}")
    if p == 1.0:
        return identity()

    def deriv(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return p * np.power(1.0 - t, p - 1.0)

    return DistortionFunction(
        eval=lambda t: 1.0 - np.power(1.0 - np.asarray(t, dtype=float), p),
        deriv=deriv,
        shape="concave" if p > 1 else "convex",
        name=f"dual_power({p:g})",
        params={"name": "dual_power", "p": p},
    )


def table(points) -> DistortionFunction:
    """Piecewise-linear distortion through ``(t, value)`` pairs covering [0, 1].

    The derivative uses the slope of the segment to the right of ``t`` (left
    segment at ``t = 1``). Shape is inferred from the slopes.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DistortionError("table distortion needs a list of (t, value) pairs")
    ts, vs = pts[:, 0], pts[:, 1]
    if np.any(np.diff(ts) <= 0) or ts[0] != 0.0 or ts[-1] != 1.0:
        raise DistortionError("table t values must increase strictly from 0 to 1")
    slopes = np.diff(vs) / np.diff(ts)
    ds = np.diff(slopes)
    if np.all(np.abs(ds) <= 1e-12):
        shape = "linear"
    elif np.all(ds >= -1e-12):
        shape = "convex"
    elif np.all(ds <= 1e-12):
        shape = "concave"
    else:
        raise DistortionError("table distortion is neither convex nor concave")

    def deriv(t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, slopes.size - 1)
        return slopes[k]

    return DistortionFunction(
        eval=lambda t: np.interp(np.asarray(t, dtype=float), ts, vs),
        deriv=deriv,
        shape=shape,
        name="table",
        params={"table": pts.tolist()},
        knots=tuple(float(t) for t in ts[1:-1]),
    )


_REGISTRY = {
    "identity": lambda: identity(),
    "sqrt": lambda: sqrt(),
    "power": power,
    "dual_power": dual_power,
}


def from_json(obj) -> DistortionFunction:
    """Build from ``"sqrt"``, ``"power:2"``, ``{"name": "power", "p": 2}`` or ``{"table": [...]}``."""
    if isinstance(obj, DistortionFunction):
        return obj
    if isinstance(obj, str):
        name, *args = obj.split(":")
        obj = {"name": name}
        if args:
            obj["p"] = float(args[0])
    if not isinstance(obj, dict):
        raise DistortionError(f"cannot interpret distortion {obj!r}")
    if "table" in obj:
        return table(obj["table"])
    name = obj.get("name")
    if name not in _REGISTRY:
        raise DistortionError(f"unknown distortion {name!r}; known: {sorted(_REGISTRY)} or a table")
    if name in ("power", "dual_power"):
        if "p" not in obj:
            raise DistortionError(f"distortion {name!r} needs parameter 'p'")
        return _REGISTRY[name](obj["p"])
    return _REGISTRY[name]()
