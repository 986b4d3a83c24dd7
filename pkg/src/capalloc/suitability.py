"""Checks that a capital allocation sends the right performance signals.

Each verifier perturbs one position at a time, ``X -> X +/- h X_i``, and
tests whether comparing the position's standalone performance with the
aggregate ratio correctly predicts the direction in which the reward-risk
ratio moves. Ratio premises are compared in cross-multiplied form, e.g.
``theta(X_i) rho(X) - k_i theta(X)``, so small or negative ``k_i`` and
``rho(X)`` need no division.

The existential "for all small enough h" is approximated on a descending
grid: position ``i`` is tested at every grid step at which ``rho`` keeps its
sign under ``X +/- h X_i``. When stability holds below some ``h*`` this is
every grid ``h <= h*``; testing per step keeps verdicts monotone, so a
verdict satisfied on a grid stays satisfied on any sub-grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .allocations import AllocationVector
from .axioms import condition_a_table
from .measures import RewardMeasureSpec, RiskMeasureSpec
from .performance import ratio
from .scenario import ScenarioSet, aggregate

DEFAULT_TOL = 1e-9
FD_TOL = 1e-4
SATISFIED, VIOLATED, VACUOUS = "satisfied", "violated", "vacuous"
EXIT_CODES = {SATISFIED: 0, VIOLATED: 3, VACUOUS: 4}
TAGS = (
    "def_3_2",
    "def_3_5",
    "def_3_7",
    "thm_3_3_conditions",
    "thm_3_6_conditions",
    "game_def_4_1",
)
GRID_NOTE = "small-h quantifier approximated by every sign-stable grid step"


class SuitabilityError(ValueError):
    pass


@dataclass(frozen=True)
class HGrid:
    """Strictly decreasing positive perturbation sizes."""

    steps: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)

    def __post_init__(self):
        steps = tuple(float(h) for h in self.steps)
        if not steps:
            raise SuitabilityError("h grid must be non-empty")
        if any(not (h > 0 and math.isfinite(h)) for h in steps):
            raise SuitabilityError(f"h grid entries must be positive and finite, got {steps}")
        if any(b >= a for a, b in zip(steps, steps[1:])):
            raise SuitabilityError(f"h grid must be strictly decreasing, got {steps}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def parse(cls, text: str) -> "HGrid":
        try:
            return cls(tuple(float(s) for s in text.split(",") if s.strip()))
        except ValueError:
            raise SuitabilityError(f"cannot parse h grid {text!r}") from None

    @classmethod
    def geometric(cls, start: float, levels: int) -> "HGrid":
        return cls(tuple(start * 10.0 ** (-j) for j in range(levels)))

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)


def _grid(grid) -> HGrid:
    if grid is None:
        return HGrid()
    if isinstance(grid, HGrid):
        return grid
    return HGrid(tuple(grid))


@dataclass
class PositionOutcome:
    index: int
    label: str
    status: str
    checked: tuple[float, ...] = ()
    witness: dict | None = None
    note: str | None = None

    def to_json(self):
        return {
            "index": self.index,
            "label": self.label,
            "status": self.status,
            "checked_h": list(self.checked),
            "witness": self.witness,
            "note": self.note,
        }


@dataclass
class SuitabilityVerdict:
    definition: str
    positions: list[PositionOutcome]
    tol: float
    grid: tuple[float, ...]
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        states = {p.status for p in self.positions}
        if VIOLATED in states:
            return VIOLATED
        if SATISFIED in states:
            return SATISFIED
        return VACUOUS

    @property
    def violations(self) -> list[PositionOutcome]:
        return [p for p in self.positions if p.status == VIOLATED]

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self):
        return {
            "definition": self.definition,
            "status": self.status,
            "tol": self.tol,
            "grid": list(self.grid),
            "positions": [p.to_json() for p in self.positions],
            "notes": list(self.notes),
            "extra": self.extra,
        }


def _values(k) -> np.ndarray:
    return np.asarray(k.values if isinstance(k, AllocationVector) else k, dtype=float)


def _assemble(tag, outcomes, tol, grid, notes=(), extra=None):
    return SuitabilityVerdict(tag, outcomes, tol, tuple(grid), list(notes), extra or {})


def _outcome(i, label, checked, witness, note=None):
    if witness is not None:
        return PositionOutcome(i, label, VIOLATED, tuple(checked), witness, note)
    if not checked:
        return PositionOutcome(i, label, VACUOUS, (), None, note)
    return PositionOutcome(i, label, SATISFIED, tuple(checked), None, note)


def stable_steps(rho_spec: RiskMeasureSpec, scn: ScenarioSet, grid) -> list[tuple[float, ...]]:
    """Per position, the grid steps on which ``rho`` keeps its sign."""
    grid = _grid(grid)
    table = condition_a_table(rho_spec, scn, None, grid.steps)
    return [tuple(h for h, ok in zip(grid.steps, table[i]) if ok) for i in range(scn.n)]


def _geq(a: float, b: float, tol: float) -> bool:
    """``a >= b`` with slack, exact on infinities."""
    if a == b:
        return True
    return a - b >= -tol


def _gt(a: float, b: float, margin: float) -> bool:
    if a == math.inf and b < math.inf:
        return True
    if a == b:
        return False
    return a - b > margin


# -- sufficient conditions ----------------------------------------------------

def check_thm33_conditions(k, rho_spec: RiskMeasureSpec, scn: ScenarioSet, grid=None, tol: float = DEFAULT_TOL) -> SuitabilityVerdict:
    """``h k_i <= rho(X + h X_i) - rho(X)`` and ``h k_i >= rho(X) - rho(X - h X_i)``."""
    grid = _grid(grid)
    kv = _values(k)
    x = scn.total()
    r = rho_spec.evaluate(x, scn)
    slack = tol * max(1.0, abs(r))
    outcomes = []
    for i, steps in enumerate(stable_steps(rho_spec, scn, grid)):
        xi = scn.positions[i]
        witness, checked = None, []
        for h in steps:
            up = rho_spec.evaluate(x + h * xi, scn) - r
            dn = r - rho_spec.evaluate(x - h * xi, scn)
            checked.append(h)
            if h * kv[i] > up + slack:
                witness = {"h": h, "condition": "upper", "h_k": h * kv[i], "rho_increment": up}
            elif h * kv[i] < dn - slack:
                witness = {"h": h, "condition": "lower", "h_k": h * kv[i], "rho_increment": dn}
            if witness:
                break
        note = None if steps else "sign of rho not stable on the grid"
        outcomes.append(_outcome(i, scn.labels[i], checked, witness, note))
    return _assemble("thm_3_3_conditions", outcomes, tol, grid.steps, [GRID_NOTE], {"rho_X": r})


def check_thm36_conditions(
    t, k, theta_spec: RewardMeasureSpec, rho_spec: RiskMeasureSpec, scn: ScenarioSet, grid=None, tol: float = DEFAULT_TOL
) -> SuitabilityVerdict:
    """Reward and risk increment bounds for ``(t, k)`` along each position."""
    grid = _grid(grid)
    tv, kv = _values(t), _values(k)
    x = scn.total()
    th, r = theta_spec.evaluate(x, scn), rho_spec.evaluate(x, scn)
    slack = tol * max(1.0, abs(r), abs(th))
    outcomes = []
    for i, steps in enumerate(stable_steps(rho_spec, scn, grid)):
        xi = scn.positions[i]
        witness, checked = None, []
        for h in steps:
            th_up = theta_spec.evaluate(x + h * xi, scn) - th
            th_dn = th - theta_spec.evaluate(x - h * xi, scn)
            r_up = rho_spec.evaluate(x + h * xi, scn) - r
            r_dn = r - rho_spec.evaluate(x - h * xi, scn)
            checked.append(h)
            tests = (
                ("reward-upper", h * tv[i] >= th_up - slack, h * tv[i], th_up),
                ("reward-lower", h * tv[i] <= th_dn + slack, h * tv[i], th_dn),
                ("risk-upper", h * kv[i] <= r_up + slack, h * kv[i], r_up),
                ("risk-lower", h * kv[i] >= r_dn - slack, h * kv[i], r_dn),
            )
            for name, ok, lhs, rhs in tests:
                if not ok:
                    witness = {"h": h, "condition": name, "h_alloc": lhs, "increment": rhs}
                    break
            if witness:
                break
        note = None if steps else "sign of rho not stable on the grid"
        outcomes.append(_outcome(i, scn.labels[i], checked, witness, note))
    return _assemble("thm_3_6_conditions", outcomes, tol, grid.steps, [GRID_NOTE], {"theta_X": th, "rho_X": r})


# -- definitions on the aggregate --------------------------------------------

def _perturbed_ratio(theta_spec, rho_spec, x, scn):
    th, r = theta_spec.evaluate(x, scn), rho_spec.evaluate(x, scn)
    return th, r, ratio(th, r)


def _def_3_2_single(kv, theta_spec, rho_spec, scn, grid, tol):
    x = scn.total()
    T, R = theta_spec.evaluate(x, scn), rho_spec.evaluate(x, scn)
    a0 = ratio(T, R)
    outcomes = []
    for i, steps in enumerate(stable_steps(rho_spec, scn, grid)):
        xi = scn.positions[i]
        Ti = theta_spec.evaluate(xi, scn)
        lhs, rhs = Ti * R, kv[i] * T
        d = lhs - rhs
        p_tol = tol * max(1.0, abs(lhs), abs(rhs))
        g1, g3 = d >= -p_tol, d <= p_tol
        witness, checked = None, []
        for h in steps:
            checked.append(h)
            cache = {}

            def side(sign):
                if sign not in cache:
                    cache[sign] = _perturbed_ratio(theta_spec, rho_spec, x + sign * h * xi, scn)
                return cache[sign]

            required = []
            if T >= 0:
                if g1:
                    required.append(("G1", -1, "alpha(X) >= alpha(X - hX_i)", lambda a: _geq(a0, a, tol)))
                if g3:
                    required.append(("G3", +1, "alpha(X) >= alpha(X + hX_i)", lambda a: _geq(a0, a, tol)))
            if T <= 0:
                if g1:
                    required.append(("G1", +1, "alpha(X + hX_i) >= alpha(X)", lambda a: _geq(a, a0, tol)))
                if g3:
                    required.append(("G3", -1, "alpha(X - hX_i) >= alpha(X)", lambda a: _geq(a, a0, tol)))
            for premise, sign, text, ok in required:
                th_h, r_h, a_h = side(sign)
                if not ok(a_h):
                    witness = {
                        "h": h,
                        "premise": premise,
                        "premise_lhs": lhs,
                        "premise_rhs": rhs,
                        "conclusion": text,
                        "alpha_X": a0,
                        "alpha_perturbed": a_h,
                        "theta_perturbed": th_h,
                        "rho_perturbed": r_h,
                    }
                    break
            if witness:
                break
        note = None if steps else "sign of rho not stable on the grid"
        outcomes.append(_outcome(i, scn.labels[i], checked, witness, note))
    return outcomes, {"theta_X": T, "rho_X": R, "alpha_X": a0}


def verify_def_3_2(
    k,
    theta_spec: RewardMeasureSpec,
    rho_spec: RiskMeasureSpec,
    scn: ScenarioSet,
    grid=None,
    tol: float = DEFAULT_TOL,
    allocate: Callable[[ScenarioSet], AllocationVector] | None = None,
    redecompositions: int = 0,
    seed: int = 0,
) -> SuitabilityVerdict:
    """Weak-inequality suitability of ``k`` with the reward-risk ratio at ``X``.

    With ``allocate`` and ``redecompositions > 0`` the rule is also checked on
    random decompositions of the same aggregate; those are reported under
    ``extra["redecompositions"]`` and do not change the main verdict.
    """
    grid = _grid(grid)
    outcomes, extra = _def_3_2_single(_values(k), theta_spec, rho_spec, scn, grid, tol)
    notes = [GRID_NOTE]
    if allocate is not None and redecompositions > 0:
        rng = np.random.default_rng(seed)
        scale = float(np.max(np.abs(scn.positions))) or 1.0
        batch = []
        for _ in range(redecompositions):
            z = rng.normal(scale=scale, size=scn.positions.shape)
            z -= z.mean(axis=0, keepdims=True)
            alt = scn.with_positions(scn.positions + z, scn.labels)
            sub, _ = _def_3_2_single(_values(allocate(alt)), theta_spec, rho_spec, alt, grid, tol)
            status = _assemble("def_3_2", sub, tol, grid.steps).status
            batch.append(status)
        extra["redecompositions"] = {"seed": seed, "count": redecompositions, "statuses": batch}
    return _assemble("def_3_2", outcomes, tol, grid.steps, notes, extra)


def verify_def_3_5(
    t, k, theta_spec: RewardMeasureSpec, rho_spec: RiskMeasureSpec, scn: ScenarioSet, grid=None, tol: float = DEFAULT_TOL
) -> SuitabilityVerdict:
    """Strict-inequality suitability of a reward-risk pair ``(t, k)`` at ``X``.

    Only portfolios whose reward and risk are both positive or both negative
    are in scope. A premise counts as strict when ``|t_i rho(X) - k_i theta(X)|``
    exceeds ``tol`` relative to its terms; a strict conclusion needs a ratio
    change larger than ``tol * h``.
    """
    grid = _grid(grid)
    tv, kv = _values(t), _values(k)
    x = scn.total()
    T, R = theta_spec.evaluate(x, scn), rho_spec.evaluate(x, scn)
    extra = {"theta_X": T, "rho_X": R}
    if not ((T > 0 and R > 0) or (T < 0 and R < 0)):
        note = "portfolio outside the same-sign domain"
        outcomes = [PositionOutcome(i, scn.labels[i], VACUOUS, (), None, note) for i in range(scn.n)]
        return _assemble("def_3_5", outcomes, tol, grid.steps, [GRID_NOTE, note], extra)
    a0 = ratio(T, R)
    extra["alpha_X"] = a0
    outcomes = []
    for i, steps in enumerate(stable_steps(rho_spec, scn, grid)):
        xi = scn.positions[i]
        lhs, rhs = tv[i] * R, kv[i] * T
        e = lhs - rhs
        if abs(e) <= tol * max(1.0, abs(lhs), abs(rhs)):
            outcomes.append(PositionOutcome(i, scn.labels[i], VACUOUS, (), None, "premise equality"))
            continue
        if T > 0:
            sign, text = (-1, "alpha(X) > alpha(X - hX_i)") if e > 0 else (+1, "alpha(X) > alpha(X + hX_i)")
            ok = lambda a, h: _gt(a0, a, tol * h)  # noqa: E731
        else:
            sign, text = (+1, "alpha(X + hX_i) > alpha(X)") if e > 0 else (-1, "alpha(X - hX_i) > alpha(X)")
            ok = lambda a, h: _gt(a, a0, tol * h)  # noqa: E731
        witness, checked = None, []
        for h in steps:
            checked.append(h)
            th_h, r_h, a_h = _perturbed_ratio(theta_spec, rho_spec, x + sign * h * xi, scn)
            if not ok(a_h, h):
                witness = {
                    "h": h,
                    "premise": "t_i/k_i > theta/rho" if e > 0 else "t_i/k_i < theta/rho",
                    "premise_lhs": lhs,
                    "premise_rhs": rhs,
                    "conclusion": text,
                    "alpha_X": a0,
                    "alpha_perturbed": a_h,
                    "theta_perturbed": th_h,
                    "rho_perturbed": r_h,
                }
                break
        note = None if steps else "sign of rho not stable on the grid"
        outcomes.append(_outcome(i, scn.labels[i], checked, witness, note))
    return _assemble("def_3_5", outcomes, tol, grid.steps, [GRID_NOTE], extra)


# -- portfolio-weight formulation --------------------------------------------

def portfolio_functions(theta_spec: RewardMeasureSpec, rho_spec: RiskMeasureSpec, scn: ScenarioSet):
    """``u -> theta(sum u_i X_i)`` and ``u -> rho(sum u_i X_i)``."""

    def theta_fn(u):
        return theta_spec.evaluate(aggregate(scn, u), scn)

    def rho_fn(u):
        return rho_spec.evaluate(aggregate(scn, u), scn)

    return theta_fn, rho_fn


def partials(fn: Callable[[np.ndarray], float], u, step: float = 1e-4) -> np.ndarray:
    """Centered-difference gradient of a function of portfolio weights."""
    u = np.asarray(u, dtype=float)
    out = np.empty(u.size)
    for i in range(u.size):
        up, dn = u.copy(), u.copy()
        up[i] += step
        dn[i] -= step
        out[i] = (fn(up) - fn(dn)) / (2 * step)
    return out


def gradient_pair(theta_fn, rho_fn, u, step: float = 1e-4):
    """Gradient reward-risk allocation ``(t, k)`` at ``u`` by centered differences."""
    return partials(theta_fn, u, step), partials(rho_fn, u, step)


def _same_sign(a, b):
    return (a > 0 and b > 0) or (a < 0 and b < 0)


def verify_def_3_7(
    t,
    k,
    theta_fn: Callable,
    rho_fn: Callable,
    u,
    step: float = 1e-4,
    levels: int = 3,
    tol: float = DEFAULT_TOL,
    labels: Sequence[str] | None = None,
) -> SuitabilityVerdict:
    """Two-sided strict chain of the ratio along each coordinate of ``u``.

    The grid is ``step * 10^-j`` for ``j < levels``; coordinate ``i`` is tested
    for every grid ``s`` whose neighbours ``u +/- s e_i`` stay in the
    same-sign region.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    labels = tuple(labels) if labels is not None else tuple(f"X{i + 1}" for i in range(n))
    grid = HGrid.geometric(step, levels)
    tv, kv = _values(t), _values(k)
    T, R = theta_fn(u), rho_fn(u)
    extra = {"theta_u": T, "rho_u": R, "u": u.tolist()}
    if not _same_sign(T, R):
        note = "u outside the same-sign region"
        outcomes = [PositionOutcome(i, labels[i], VACUOUS, (), None, note) for i in range(n)]
        return _assemble("def_3_7", outcomes, tol, grid.steps, [GRID_NOTE, note], extra)
    a0 = T / R
    extra["alpha_u"] = a0
    outcomes = []
    for i in range(n):
        lhs, rhs = tv[i] * R, kv[i] * T
        e = lhs - rhs
        if abs(e) <= tol * max(1.0, abs(lhs), abs(rhs)):
            outcomes.append(PositionOutcome(i, labels[i], VACUOUS, (), None, "premise equality"))
            continue
        vals = {}
        for s in grid:
            for sign in (-1, 1):
                v = u.copy()
                v[i] += sign * s
                vals[(s, sign)] = (theta_fn(v), rho_fn(v))
        steps = [s for s in grid if all(_same_sign(*vals[(s, sg)]) for sg in (-1, 1))]
        witness, checked = None, []
        for s in steps:
            checked.append(s)
            a_up = vals[(s, 1)][0] / vals[(s, 1)][1]
            a_dn = vals[(s, -1)][0] / vals[(s, -1)][1]
            m = tol * s
            ok = (a_up - a0 > m and a0 - a_dn > m) if e > 0 else (a_dn - a0 > m and a0 - a_up > m)
            if not ok:
                witness = {
                    "s": s,
                    "premise": "t_i/k_i > theta/rho" if e > 0 else "t_i/k_i < theta/rho",
                    "premise_lhs": lhs,
                    "premise_rhs": rhs,
                    "required": "increasing" if e > 0 else "decreasing",
                    "alpha_minus": a_dn,
                    "alpha_u": a0,
                    "alpha_plus": a_up,
                }
                break
        note = None if steps else "neighbours leave the same-sign region"
        outcomes.append(_outcome(i, labels[i], checked, witness, note))
    return _assemble("def_3_7", outcomes, tol, grid.steps, [GRID_NOTE], extra)


@dataclass
class CounterexampleWitness:
    """A reward ``theta = t_scale * rho`` under which ``k`` gives a wrong signal."""

    index: int
    t_scale: float
    gradient: float
    k_i: float
    premise_value: float
    required: str
    alphas: list[dict]
    max_deviation: float

    @property
    def chain_holds(self) -> bool:
        return False

    def to_json(self):
        return {
            "index": self.index,
            "t_scale": self.t_scale,
            "gradient": self.gradient,
            "k_i": self.k_i,
            "premise_value": self.premise_value,
            "required": self.required,
            "alphas": self.alphas,
            "max_deviation": self.max_deviation,
            "chain_holds": self.chain_holds,
        }


def gradient_uniqueness_counterexample(
    k, rho_fn: Callable, u, i: int, t_scale: float, step: float = 1e-4, levels: int = 3
) -> CounterexampleWitness:
    """Refute a non-gradient ``k_i`` with the reward ``theta = t_scale * rho``.

    Then ``t_i = t_scale * d rho / d u_i`` and the premise is strict, but the
    ratio equals ``t_scale`` everywhere, so no strict chain can hold.
    """
    if not t_scale > 0:
        raise SuitabilityError(f"t_scale must be > 0, got {t_scale}")
    u = np.asarray(u, dtype=float)
    kv = _values(k)
    r = rho_fn(u)
    if abs(r) <= 1e-12:
        raise SuitabilityError("rho_X(u) is zero; the ratio is undefined")
    g = float(partials(rho_fn, u, step)[i])
    if abs(kv[i] - g) <= 10 * FD_TOL * max(1.0, abs(g)):
        raise SuitabilityError("k already matches the gradient; no counterexample exists")
    theta_fn = lambda v: t_scale * rho_fn(v)  # noqa: E731
    t_i = t_scale * g
    e = t_i * r - kv[i] * theta_fn(u)
    alphas, dev = [], 0.0
    a0 = theta_fn(u) / r
    for s in HGrid.geometric(step, levels):
        row = {"s": s}
        for name, sign in (("minus", -1), ("plus", 1)):
            v = u.copy()
            v[i] += sign * s
            rv = rho_fn(v)
            row[name] = theta_fn(v) / rv if rv != 0 else math.nan
        row["u"] = a0
        dev = max(dev, *(abs(row[key] - t_scale) for key in ("minus", "u", "plus")))
        alphas.append(row)
    return CounterexampleWitness(
        index=i,
        t_scale=float(t_scale),
        gradient=g,
        k_i=float(kv[i]),
        premise_value=e,
        required="increasing" if e > 0 else "decreasing",
        alphas=alphas,
        max_deviation=dev,
    )
