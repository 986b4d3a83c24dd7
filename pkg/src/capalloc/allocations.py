"""Capital allocation principles and their certificates.

All allocations are taken at the aggregate ``X = X_1 + ... + X_n`` of a
:class:`~capalloc.scenario.ScenarioSet`. To allocate at a scaled portfolio
``sum_i u_i X_i`` pass ``scn.with_positions(u[:, None] * scn.positions)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .distortions import DistortionFunction
from .measures import (
    Distorted,
    Distortion,
    DistortionExponential,
    Entropic,
    Expectation,
    ExpectedShortfall,
    MeasureError,
    RewardMeasureSpec,
    RiskMeasureSpec,
    Robust,
    _shifted_exp,
)
from .scenario import ScenarioSet, aggregate, as_outcome, support

KINDS = (
    "individual",
    "with_without",
    "normalized_with_without",
    "subgradient",
    "supergradient",
    "gradient_fd",
    "gradient_analytic",
    "marginal_contribution",
    "reward_gradient",
)
DEFAULT_STEP = 1e-4
ZERO_DENOM = 1e-12


class AllocationError(ValueError):
    pass


class TiedValuesError(AllocationError):
    """The aggregate has tied scenario values so the gradient is not unique."""


@dataclass(frozen=True, eq=False)
class AllocationVector:
    """Per-position capital (or reward) numbers with provenance."""

    values: np.ndarray
    kind: str
    labels: tuple[str, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size != len(self.labels):
            raise AllocationError(f"allocation needs {len(self.labels)} entries, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise AllocationError(f"{self.kind} allocation has non-finite entries: {vals.tolist()}")
        if self.kind not in KINDS:
            raise AllocationError(f"unknown allocation kind {self.kind!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    def total(self) -> float:
        return float(_kernels.cumulative(self.values)[-1])

    def __getitem__(self, i):
        return float(self.values[i])

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "labels": list(self.labels),
            "values": self.values.tolist(),
            "meta": dict(self.meta),
        }


@dataclass(frozen=True, eq=False)
class ScenarioDensity:
    """Density with respect to P; pairs with outcomes as ``E[d Y]``."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or not np.all(np.isfinite(vals)):
            raise AllocationError("density must be a finite 1-D vector")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def pair(self, y, scn: ScenarioSet) -> float:
        y = as_outcome(y, scn)
        if self.values.size != scn.m:
            raise AllocationError(f"density has {self.values.size} entries, scenario set has {scn.m}")
        return float(_kernels.weighted_sum(scn.probs * self.values, y))

    def __mul__(self, c):
        return ScenarioDensity(c * self.values, dict(self.meta))

    __rmul__ = __mul__

    def to_json(self):
        return {"values": self.values.tolist(), "meta": dict(self.meta)}


def _ones(scn):
    return np.ones(scn.n)


def _total(scn):
    return aggregate(scn, _ones(scn))


def _without(scn, i):
    u = _ones(scn)
    u[i] = 0.0
    return aggregate(scn, u)


# -- elementary allocations --------------------------------------------------

def individual_allocation(spec: RiskMeasureSpec | RewardMeasureSpec, scn: ScenarioSet) -> AllocationVector:
    """``k_i = rho(X_i)`` (or ``t_i = theta(X_i)`` for a reward spec)."""
    vals = [spec.evaluate(scn.positions[i], scn) for i in range(scn.n)]
    return AllocationVector(vals, "individual", scn.labels, {"measure": spec.to_json()})


def with_without_allocation(spec: RiskMeasureSpec, scn: ScenarioSet) -> AllocationVector:
    """``k_i = rho(X) - rho(X - X_i)``."""
    r = spec.evaluate(_total(scn), scn)
    vals = [r - spec.evaluate(_without(scn, i), scn) for i in range(scn.n)]
    return AllocationVector(vals, "with_without", scn.labels, {"measure": spec.to_json(), "rho_X": r})


def normalized_with_without(spec: RiskMeasureSpec, scn: ScenarioSet) -> AllocationVector:
    """With-without rescaled so that the components add up to ``rho(X)``."""
    ww = with_without_allocation(spec, scn)
    r = ww.meta["rho_X"]
    denom = ww.total()
    if abs(denom) <= ZERO_DENOM:
        raise AllocationError(
            "normalization is only possible if sum_j (rho(X) - rho(X - X_j)) is nonzero; "
            f"got {denom!r}"
        )
    vals = ww.values * (r / denom)
    meta = {"measure": spec.to_json(), "rho_X": r, "denominator": denom}
    return AllocationVector(vals, "normalized_with_without", scn.labels, meta)


def check_full_allocation(k: AllocationVector, rho_x: float) -> float:
    """Residual ``sum_i k_i - rho(X)``."""
    return k.total() - float(rho_x)


# -- densities ---------------------------------------------------------------

def _distinct_support(x, scn, what):
    s = support(x, scn)
    if not s.distinct:
        dup = s.sorted_values[1:][s.sorted_values[1:] == s.sorted_values[:-1]]
        raise TiedValuesError(
            f"{what}: F_X not strictly increasing; subgradient not unique at ties "
            f"(tied aggregate value {float(dup[0])!r})"
        )
    return s


def _scatter(order, sorted_vals):
    out = np.empty_like(sorted_vals)
    out[order] = sorted_vals
    return out


def _risk_weights(psi: DistortionFunction, s, weights: str) -> np.ndarray:
    """Probability weights ``pi_j`` in ascending-x order for a concave risk distortion."""
    F = s.scenario_cdf
    if weights == "exact":
        prev = np.concatenate(([0.0], F[:-1]))
        return np.asarray(psi(F), dtype=float) - np.asarray(psi(prev), dtype=float)
    if weights == "derivative":
        return s.sorted_probs * np.asarray(psi.deriv(F), dtype=float)
    raise AllocationError(f"weights must be 'exact' or 'derivative', got {weights!r}")


def _reward_weights(phi: DistortionFunction, s, weights: str) -> np.ndarray:
    """Probability weights in ascending-x order for a reward distortion."""
    F = s.scenario_cdf
    prev = np.concatenate(([0.0], F[:-1]))
    if weights == "exact":
        return np.asarray(phi(1.0 - prev), dtype=float) - np.asarray(phi(1.0 - F), dtype=float)
    if weights == "derivative":
        return s.sorted_probs * np.asarray(phi.deriv(1.0 - F), dtype=float)
    raise AllocationError(f"weights must be 'exact' or 'derivative', got {weights!r}")


def subgradient_density(spec: RiskMeasureSpec, x, scn: ScenarioSet) -> ScenarioDensity:
    """A ``xi`` with ``rho(x + Y) >= rho(x) + E[xi Y]`` for every ``Y``."""
    x = as_outcome(x, scn)
    if isinstance(spec, ExpectedShortfall):
        s, w = spec.tail(x, scn)
        xi = _scatter(s.order, -w / (spec.level * s.sorted_probs))
    elif isinstance(spec, Entropic):
        e, _ = _shifted_exp(x, spec.a)
        xi = -e / _kernels.weighted_sum(scn.probs, e)
    elif isinstance(spec, Distortion):
        s = _distinct_support(x, scn, "distortion subgradient")
        pi = _risk_weights(spec.psi, s, "exact")
        xi = _scatter(s.order, -pi / s.sorted_probs)
    elif isinstance(spec, DistortionExponential):
        s = _distinct_support(x, scn, "distortion-exponential subgradient")
        pi = _risk_weights(spec.psi, s, "exact")
        e, _ = _shifted_exp(s.sorted_values, spec.a)
        pe = pi * e
        xi = _scatter(s.order, -pe / (s.sorted_probs * _kernels.cumulative(pe)[-1]))
    else:
        raise MeasureError(f"no subgradient construction for measure kind {spec.kind!r}")
    return ScenarioDensity(xi, {"measure": spec.to_json(), "side": "risk"})


def supergradient_density(spec: RewardMeasureSpec, x, scn: ScenarioSet) -> ScenarioDensity:
    """A ``d`` with ``theta(x + Y) <= theta(x) + E[d Y]`` for every ``Y``."""
    x = as_outcome(x, scn)
    meta = {"measure": spec.to_json(), "side": "reward"}
    if isinstance(spec, Expectation):
        return ScenarioDensity(np.ones(scn.m), meta)
    if isinstance(spec, Robust):
        q = int(np.argmin(spec.expectations(x, scn)))  # lowest index among ties
        meta["argmin"] = q
        return ScenarioDensity(spec.densities[q], meta)
    if isinstance(spec, Distorted):
        s = _distinct_support(x, scn, "distorted supergradient")
        w = _reward_weights(spec.phi, s, "exact")
        return ScenarioDensity(_scatter(s.order, w / s.sorted_probs), meta)
    raise MeasureError(f"no supergradient construction for measure kind {spec.kind!r}")


def subgradient_allocation(xi: ScenarioDensity, scn: ScenarioSet) -> AllocationVector:
    """``k_i = E[xi X_i]``."""
    if xi.values.size != scn.m:
        raise AllocationError(f"density has {xi.values.size} entries, scenario set has {scn.m}")
    vals = [xi.pair(scn.positions[i], scn) for i in range(scn.n)]
    kind = "supergradient" if xi.meta.get("side") == "reward" else "subgradient"
    return AllocationVector(vals, kind, scn.labels, {k: v for k, v in xi.meta.items()})


def supergradient_allocation(d: ScenarioDensity, scn: ScenarioSet) -> AllocationVector:
    """``t_i = E[d X_i]``; same pairing as :func:`subgradient_allocation`."""
    return subgradient_allocation(ScenarioDensity(d.values, {**d.meta, "side": "reward"}), scn)


# -- gradients ---------------------------------------------------------------

def _check_step(step):
    step = float(step)
    if not 0.0 < step <= 0.1:
        raise AllocationError(f"fd step must lie in (0, 0.1], got {step}")
    return step


def fd_partials(fn, scn: ScenarioSet, u=None, step: float = DEFAULT_STEP) -> np.ndarray:
    """Centered differences of ``u -> fn(sum_j u_j X_j)`` in each ``u_i``."""
    step = _check_step(step)
    u = _ones(scn) if u is None else np.asarray(u, dtype=float)
    out = np.empty(scn.n)
    for i in range(scn.n):
        up, dn = u.copy(), u.copy()
        up[i] += step
        dn[i] -= step
        out[i] = (fn(aggregate(scn, up)) - fn(aggregate(scn, dn))) / (2 * step)
    return out


def gradient_allocation_fd(spec, scn: ScenarioSet, step: float = DEFAULT_STEP) -> AllocationVector:
    """Euler allocation by centered differences; works for risk or reward specs."""
    vals = fd_partials(lambda x: spec.evaluate(x, scn), scn, None, step)
    side = "reward" if isinstance(spec, RewardMeasureSpec) else "risk"
    meta = {"measure": spec.to_json(), "step": float(step), "scheme": "centered", "side": side}
    return AllocationVector(vals, "gradient_fd", scn.labels, meta)


def analytic_gradient_distortion_exponential(
    psi: DistortionFunction, a: float, scn: ScenarioSet, weights: str = "exact"
) -> AllocationVector:
    """``k_i = E[-X_i e^{-aX} w] / E[e^{-aX} w]`` with distortion weights ``w``.

    ``weights="exact"`` uses the increments of ``psi`` over each atom, which
    is the exact gradient of the scenario-space measure. ``"derivative"``
    uses ``psi'(F_X(X))`` literally; the two agree as atoms shrink.
    """
    if not float(a) > 0:
        raise MeasureError(f"distortion-exponential parameter a must be > 0, got {a}")
    x = _total(scn)
    s = _distinct_support(x, scn, "distortion-exponential gradient")
    pi = _risk_weights(psi, s, weights)
    e, _ = _shifted_exp(s.sorted_values, float(a))
    pe = pi * e
    z = _kernels.cumulative(pe)[-1]
    vals = [-_kernels.weighted_sum(pe, scn.positions[i][s.order]) / z for i in range(scn.n)]
    meta = {"psi": psi.to_json(), "a": float(a), "weights": weights}
    return AllocationVector(vals, "gradient_analytic", scn.labels, meta)


def analytic_gradient_distortion(
    psi: DistortionFunction, scn: ScenarioSet, weights: str = "exact"
) -> AllocationVector:
    """``k_i = E[-X_i psi'(F_X(X))]``, exact discrete weights by default."""
    x = _total(scn)
    s = _distinct_support(x, scn, "distortion gradient")
    pi = _risk_weights(psi, s, weights)
    vals = [-_kernels.weighted_sum(pi, scn.positions[i][s.order]) for i in range(scn.n)]
    return AllocationVector(vals, "gradient_analytic", scn.labels, {"psi": psi.to_json(), "weights": weights})


def gradient_reward_allocation_distorted(
    phi: DistortionFunction, scn: ScenarioSet, weights: str = "exact"
) -> AllocationVector:
    """``t_i = E[X_i phi'(1 - F_X(X))]``, exact discrete weights by default."""
    x = _total(scn)
    s = _distinct_support(x, scn, "distorted reward gradient")
    w = _reward_weights(phi, s, weights)
    vals = [_kernels.weighted_sum(w, scn.positions[i][s.order]) for i in range(scn.n)]
    return AllocationVector(vals, "reward_gradient", scn.labels, {"phi": phi.to_json(), "weights": weights})


def entropic_gradient_allocation(a: float, scn: ScenarioSet) -> AllocationVector:
    """Gibbs allocation ``E[-X_i e^{-aX}] / E[e^{-aX}]`` of the entropic measure."""
    xi = subgradient_density(Entropic(a), _total(scn), scn)
    vals = [xi.pair(scn.positions[i], scn) for i in range(scn.n)]
    return AllocationVector(vals, "gradient_analytic", scn.labels, {"measure": Entropic(a).to_json()})
