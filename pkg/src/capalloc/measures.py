"""Risk measures, reward measures and the discrete Choquet integral.

Risk measures follow the sign convention ``rho(X + m) = rho(X) - m``: they
are evaluated on outcomes (profits), not on losses.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from . import _kernels
from . import distortions as dist
from .distortions import DistortionFunction
from .scenario import ScenarioSet, as_outcome, expectation, quantile, support

DENSITY_TOL = 1e-10


class MeasureError(ValueError):
    pass


class MeasureOverflowError(MeasureError, OverflowError):
    pass


class DistortionShapeWarning(UserWarning):
    pass


def choquet_integral(phi: DistortionFunction, x, scn: ScenarioSet) -> float:
    """``E_phi[X]`` on a finite support.

    With distinct support points ``v_1 < ... < v_r`` this is
    ``sum_k v_k * (phi(P[X >= v_k]) - phi(P[X >= v_{k+1}]))``.
    """
    s = support(x, scn)
    upper = np.concatenate(([1.0], 1.0 - s.cdf[:-1]))
    return float(_kernels.choquet_sorted(s.values, np.asarray(phi(upper), dtype=float)))


def _shifted_exp(x, a):
    """``exp(-a x - shift)`` and ``shift``; the largest term is exactly 1."""
    with np.errstate(over="ignore"):
        z = -a * x
    if not np.all(np.isfinite(z)):
        raise MeasureOverflowError(f"exp(-a*X) overflows for a={a}; rescale a or the outcomes")
    shift = float(np.max(z))
    return np.exp(z - shift), shift


def _finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise MeasureOverflowError(f"{what} is not finite; rescale a or the outcomes")
    return value


# -- risk measures ------------------------------------------------------------

class RiskMeasureSpec:
    kind: ClassVar[str]

    def evaluate(self, x, scn: ScenarioSet) -> float:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


def _check_level(level):
    level = float(level)
    if not 0.0 < level < 1.0:
        raise MeasureError(f"level must lie in (0, 1), got {level}")
    return level


@dataclass(frozen=True)
class ExpectedShortfall(RiskMeasureSpec):
    level: float
    kind: ClassVar[str] = "es"

    def __post_init__(self):
        object.__setattr__(self, "level", _check_level(self.level))

    def tail(self, x, scn):
        """Support view and tail weights; the boundary atom gets a fractional weight."""
        s = support(x, scn)
        return s, _kernels.tail_weights(s.sorted_probs, self.level)

    def evaluate(self, x, scn):
        s, w = self.tail(x, scn)
        return -float(_kernels.weighted_sum(w, s.sorted_values)) / self.level

    def to_json(self):
        return {"kind": self.kind, "level": self.level}


@dataclass(frozen=True)
class Entropic(RiskMeasureSpec):
    a: float
    kind: ClassVar[str] = "entropic"

    def __post_init__(self):
        if not float(self.a) > 0:
            raise MeasureError(f"entropic parameter a must be > 0, got {self.a}")
        object.__setattr__(self, "a", float(self.a))

    def evaluate(self, x, scn):
        x = as_outcome(x, scn)
        e, shift = _shifted_exp(x, self.a)
        mean = _kernels.weighted_sum(scn.probs, e)
        return _finite((shift + math.log(mean)) / self.a, "entropic risk")

    def to_json(self):
        return {"kind": self.kind, "a": self.a}


@dataclass(frozen=True)
class Distortion(RiskMeasureSpec):
    """``rho(X) = E_psi[-X]`` with concave ``psi``."""

    psi: DistortionFunction
    kind: ClassVar[str] = "distortion"

    def __post_init__(self):
        if not self.psi.is_concave():
            warnings.warn(
                f"distortion risk measure with non-concave {self.psi.name}; it will not be coherent",
                DistortionShapeWarning,
                stacklevel=3,
            )

    def evaluate(self, x, scn):
        return choquet_integral(self.psi, -as_outcome(x, scn), scn)

    def to_json(self):
        return {"kind": self.kind, "psi": self.psi.to_json()}


@dataclass(frozen=True)
class DistortionExponential(RiskMeasureSpec):
    """``rho(X) = (1/a) ln E_psi[exp(-a X)]``."""

    psi: DistortionFunction
    a: float
    kind: ClassVar[str] = "distortion_exponential"

    def __post_init__(self):
        if not float(self.a) > 0:
            raise MeasureError(f"distortion-exponential parameter a must be > 0, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        if not self.psi.is_concave():
            warnings.warn(
                f"distortion-exponential risk measure with non-concave {self.psi.name}",
                DistortionShapeWarning,
                stacklevel=3,
            )

    def evaluate(self, x, scn):
        x = as_outcome(x, scn)
        e, shift = _shifted_exp(x, self.a)
        c = choquet_integral(self.psi, e, scn)
        return _finite((shift + math.log(c)) / self.a, "distortion-exponential risk")

    def to_json(self):
        return {"kind": self.kind, "psi": self.psi.to_json(), "a": self.a}


@dataclass(frozen=True)
class ValueAtRisk(RiskMeasureSpec):
    """``-q_level(X)``; not subadditive, kept as a control case."""

    level: float
    kind: ClassVar[str] = "var"

    def __post_init__(self):
        object.__setattr__(self, "level", _check_level(self.level))

    def evaluate(self, x, scn):
        return -quantile(x, scn, self.level)

    def to_json(self):
        return {"kind": self.kind, "level": self.level}


# -- reward measures ----------------------------------------------------------

class RewardMeasureSpec:
    kind: ClassVar[str]

    def evaluate(self, x, scn: ScenarioSet) -> float:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Expectation(RewardMeasureSpec):
    kind: ClassVar[str] = "expectation"

    def evaluate(self, x, scn):
        return expectation(x, scn)

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class Robust(RewardMeasureSpec):
    """``min_Q E_Q[X]`` over a finite set of densities with respect to P."""

    densities: tuple
    kind: ClassVar[str] = "robust"

    def __post_init__(self):
        if len(self.densities) == 0:
            raise MeasureError("the set of densities must be non-empty")
        dens = []
        for d in self.densities:
            d = np.array(d, dtype=float)
            if d.ndim != 1 or not np.all(np.isfinite(d)) or np.any(d < 0):
                raise MeasureError("densities must be finite, non-negative vectors")
            d.setflags(write=False)
            dens.append(d)
        object.__setattr__(self, "densities", tuple(dens))

    def check_densities(self, scn: ScenarioSet) -> None:
        for q, d in enumerate(self.densities):
            if d.size != scn.m:
                raise MeasureError(f"density {q} has {d.size} entries, scenario set has {scn.m}")
            mass = _kernels.weighted_sum(scn.probs, d)
            if abs(mass - 1.0) > DENSITY_TOL:
                raise MeasureError(f"density {q} integrates to {mass!r}, expected 1")

    def expectations(self, x, scn) -> np.ndarray:
        x = as_outcome(x, scn)
        self.check_densities(scn)
        return np.array([_kernels.weighted_sum(scn.probs * d, x) for d in self.densities])

    def evaluate(self, x, scn):
        return float(np.min(self.expectations(x, scn)))

    def to_json(self):
        return {"kind": self.kind, "densities": [d.tolist() for d in self.densities]}


@dataclass(frozen=True)
class Distorted(RewardMeasureSpec):
    """``theta(X) = E_phi[X]`` with convex ``phi``."""

    phi: DistortionFunction
    kind: ClassVar[str] = "distorted"

    def __post_init__(self):
        if not self.phi.is_convex():
            warnings.warn(
                f"distorted reward measure with non-convex {self.phi.name}; it will not be superadditive",
                DistortionShapeWarning,
                stacklevel=3,
            )

    def evaluate(self, x, scn):
        return choquet_integral(self.phi, x, scn)

    def to_json(self):
        return {"kind": self.kind, "phi": self.phi.to_json()}


def evaluate_risk(spec: RiskMeasureSpec, x, scn: ScenarioSet) -> float:
    return spec.evaluate(x, scn)


def evaluate_reward(spec: RewardMeasureSpec, x, scn: ScenarioSet) -> float:
    return spec.evaluate(x, scn)


# -- serialization ------------------------------------------------------------

def spec_from_json(obj) -> RiskMeasureSpec | RewardMeasureSpec:
    if isinstance(obj, (RiskMeasureSpec, RewardMeasureSpec)):
        return obj
    if not isinstance(obj, dict) or "kind" not in obj:
        raise MeasureError(f"measure spec must be a JSON object with a 'kind', got {obj!r}")
    kind = obj["kind"]
    try:
        if kind == "es":
            return ExpectedShortfall(obj["level"])
        if kind == "var":
            return ValueAtRisk(obj["level"])
        if kind == "entropic":
            return Entropic(obj["a"])
        if kind == "distortion":
            return Distortion(dist.from_json(obj["psi"]))
        if kind == "distortion_exponential":
            return DistortionExponential(dist.from_json(obj["psi"]), obj["a"])
        if kind == "expectation":
            return Expectation()
        if kind == "robust":
            return Robust(tuple(obj["densities"]))
        if kind == "distorted":
            return Distorted(dist.from_json(obj["phi"]))
    except KeyError as exc:
        raise MeasureError(f"measure {kind!r} is missing parameter {exc.args[0]!r}") from None
    raise MeasureError(f"unknown measure kind {kind!r}")


def spec_to_json(spec) -> dict:
    return spec.to_json()


def parse_spec(text: str):
    """Parse a JSON object or the short form used on the command line.

    Short forms: ``es:0.25``, ``var:0.25``, ``entropic:1``, ``expectation``,
    ``distortion:sqrt``, ``distortion:dual_power:2``,
    ``distortion_exponential:sqrt:0.5`` (distortion, then ``a``),
    ``distorted:power:2``.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            return spec_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise MeasureError(f"invalid JSON measure spec: {exc}") from None
    kind, _, rest = text.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind in ("es", "var"):
            return spec_from_json({"kind": kind, "level": float(args[0])})
        if kind == "entropic":
            return spec_from_json({"kind": kind, "a": float(args[0])})
        if kind == "expectation":
            return Expectation()
        if kind in ("distortion", "distorted"):
            key = "psi" if kind == "distortion" else "phi"
            return spec_from_json({"kind": kind, key: ":".join(args)})
        if kind == "distortion_exponential":
            return spec_from_json(
                {"kind": kind, "psi": ":".join(args[:-1]), "a": float(args[-1])}
            )
    except (IndexError, ValueError) as exc:
        if isinstance(exc, (MeasureError, dist.DistortionError)):
            raise
        raise MeasureError(f"cannot parse measure spec {text!r}") from None
    raise MeasureError(f"unknown measure kind {kind!r}")
