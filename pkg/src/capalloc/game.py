"""Non-divisible positions as a cooperative game.

Coalition reward and cost are ``theta`` and ``rho`` of the summed members;
the empty coalition has both equal to zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .allocations import AllocationVector
from .measures import RewardMeasureSpec, RiskMeasureSpec
from .scenario import ScenarioSet, aggregate
from .suitability import (
    DEFAULT_TOL,
    SATISFIED,
    VACUOUS,
    VIOLATED,
    PositionOutcome,
    SuitabilityVerdict,
)

ENUMERATION_CAP = 20
HYPOTHESIS_TOL = 1e-9


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class Coalition:
    members: tuple[int, ...]

    def __init__(self, members: Iterable[int] = ()):
        object.__setattr__(self, "members", tuple(sorted(set(int(i) for i in members))))

    @classmethod
    def from_mask(cls, mask: int) -> "Coalition":
        return cls(i for i in range(mask.bit_length()) if mask >> i & 1)

    @property
    def mask(self) -> int:
        out = 0
        for i in self.members:
            out |= 1 << i
        return out

    def __contains__(self, i):
        return i in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def add(self, i: int) -> "Coalition":
        return Coalition((*self.members, i))

    def remove(self, i: int) -> "Coalition":
        return Coalition(j for j in self.members if j != i)

    def __str__(self):
        return "{" + ",".join(str(i + 1) for i in self.members) + "}"


@dataclass(eq=False)
class GameInstance:
    scn: ScenarioSet
    theta_spec: RewardMeasureSpec
    rho_spec: RiskMeasureSpec
    cache: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.scn.n

    def grand(self) -> Coalition:
        return Coalition(range(self.n))

    def _check(self, S: Coalition) -> Coalition:
        S = S if isinstance(S, Coalition) else Coalition(S)
        bad = [i for i in S if not 0 <= i < self.n]
        if bad:
            raise GameError(f"coalition member {bad[0]} outside 0..{self.n - 1}")
        return S

    def values(self, S) -> tuple[float, float]:
        S = self._check(S)
        key = S.mask
        if key not in self.cache:
            if not S.members:
                self.cache[key] = (0.0, 0.0)
            else:
                u = np.zeros(self.n)
                u[list(S.members)] = 1.0
                x = aggregate(self.scn, u)
                self.cache[key] = (self.theta_spec.evaluate(x, self.scn), self.rho_spec.evaluate(x, self.scn))
        return self.cache[key]


def coalition_values(game: GameInstance, S) -> tuple[float, float]:
    """``(theta(S), c(S))``."""
    return game.values(S)


def is_admissible(game: GameInstance, S) -> bool:
    th, c = game.values(S)
    return (th > 0 and c > 0) or (th < 0 and c < 0)


def all_coalitions(n: int) -> list[Coalition]:
    if n > ENUMERATION_CAP:
        raise GameError(
            f"coalition enumeration capped at n={ENUMERATION_CAP}; got n={n}, pass an explicit coalition list"
        )
    return [Coalition.from_mask(mask) for mask in range(1, 1 << n)]


def admissible_coalitions(game: GameInstance, coalitions: Iterable | None = None) -> list[Coalition]:
    """Non-empty coalitions whose reward and cost are both positive or both negative."""
    if coalitions is None:
        cands = all_coalitions(game.n)
    else:
        cands = [c if isinstance(c, Coalition) else Coalition(c) for c in coalitions]
    return [S for S in cands if len(S) and is_admissible(game, S)]


def gamma(game: GameInstance, S) -> float:
    th, c = game.values(S)
    if not (th > 0 and c > 0) and not (th < 0 and c < 0):
        if th == 0 or c == 0:
            raise GameError(f"coalition {Coalition(S)} not admissible: reward {th!r} or cost {c!r} is zero")
        raise GameError(f"coalition {Coalition(S)} not admissible: reward {th!r} and cost {c!r} differ in sign")
    return th / c


def marginal_contribution(game: GameInstance, S, i: int) -> float:
    """``c(S + i) - c(S)``."""
    S = game._check(S)
    if i in S:
        raise GameError(f"position {i} already in coalition {S}")
    return game.values(S.add(i))[1] - game.values(S)[1]


def marginal_allocation(game: GameInstance, S) -> dict[int, float]:
    S = game._check(S)
    return {i: marginal_contribution(game, S, i) for i in range(game.n) if i not in S}


def _kappa(kappa, S, i):
    if callable(kappa):
        return float(kappa(S, i))
    return float(kappa[i])


def verify_def_4_1(game: GameInstance, kappa, S, tol: float = DEFAULT_TOL) -> SuitabilityVerdict:
    """Does comparing ``theta({i}) / kappa_i(S)`` with ``gamma(S)`` predict whether adding ``i`` helps?

    ``kappa`` is either a callable ``(S, i) -> float`` or a mapping from
    outsider index to its allocation.
    """
    S = game._check(S)
    labels = game.scn.labels
    outcomes = []
    extra = {"coalition": list(S.members)}
    if not is_admissible(game, S):
        note = "coalition not admissible"
        outcomes = [PositionOutcome(i, labels[i], VACUOUS, (), None, note) for i in range(game.n) if i not in S]
        return SuitabilityVerdict("game_def_4_1", outcomes, tol, (), [note], extra)
    th_s, c_s = game.values(S)
    g_s = th_s / c_s
    extra["gamma_S"] = g_s
    for i in range(game.n):
        if i in S:
            continue
        T = S.add(i)
        if not is_admissible(game, T):
            outcomes.append(PositionOutcome(i, labels[i], VACUOUS, (), None, "S+i not admissible"))
            continue
        k_i = _kappa(kappa, S, i)
        th_i = game.values(Coalition([i]))[0]
        lhs, rhs = th_i * c_s, k_i * th_s
        f = lhs - rhs
        if abs(f) <= tol * max(1.0, abs(lhs), abs(rhs)):
            outcomes.append(PositionOutcome(i, labels[i], VACUOUS, (), None, "premise equality"))
            continue
        g_t = gamma(game, T)
        ok = g_t - g_s > tol if f > 0 else g_s - g_t > tol
        witness = None
        if not ok:
            witness = {
                "premise": "theta(i)/kappa_i > gamma(S)" if f > 0 else "theta(i)/kappa_i < gamma(S)",
                "premise_lhs": lhs,
                "premise_rhs": rhs,
                "kappa_i": k_i,
                "gamma_S": g_s,
                "gamma_S_plus_i": g_t,
            }
        status = VIOLATED if witness else SATISFIED
        outcomes.append(PositionOutcome(i, labels[i], status, (), witness))
    return SuitabilityVerdict("game_def_4_1", outcomes, tol, (), [], extra)


def check_prop_4_2(game: GameInstance, kappa, S, tol: float = HYPOTHESIS_TOL) -> SuitabilityVerdict:
    """Bounds ``kappa_i(S) >= c(S+i) - c(S)`` (cost positive) or ``<=`` (cost negative).

    Requires reward additivity ``theta(S+i) = theta(S) + theta({i})`` for every
    outsider ``i``; if it fails the verdict is vacuous and records the residual.
    """
    S = game._check(S)
    labels = game.scn.labels
    outsiders = [i for i in range(game.n) if i not in S]
    residuals = {}
    for i in outsiders:
        residuals[i] = game.values(S.add(i))[0] - game.values(S)[0] - game.values(Coalition([i]))[0]
    extra = {"coalition": list(S.members), "additivity_residuals": {str(i): r for i, r in residuals.items()}}
    worst = max((abs(r) for r in residuals.values()), default=0.0)
    if worst > tol:
        note = f"reward not additive at S: max residual {worst!r}"
        outcomes = [PositionOutcome(i, labels[i], VACUOUS, (), None, note) for i in outsiders]
        return SuitabilityVerdict("game_def_4_1", outcomes, tol, (), [note], extra)
    outcomes = []
    for i in outsiders:
        c_t = game.values(S.add(i))[1]
        bound = c_t - game.values(S)[1]
        k_i = _kappa(kappa, S, i)
        if c_t > 0:
            ok, cond = k_i >= bound - tol, "kappa_i >= c(S+i) - c(S)"
        elif c_t < 0:
            ok, cond = k_i <= bound + tol, "kappa_i <= c(S+i) - c(S)"
        else:
            outcomes.append(PositionOutcome(i, labels[i], VACUOUS, (), None, "c(S+i) = 0"))
            continue
        witness = None if ok else {"condition": cond, "kappa_i": k_i, "bound": bound}
        outcomes.append(PositionOutcome(i, labels[i], VIOLATED if witness else SATISFIED, (), witness))
    return SuitabilityVerdict("game_def_4_1", outcomes, tol, (), ["sufficient bounds"], extra)


@dataclass
class PropertyReport:
    efficiency_residual: float
    efficient: bool
    symmetric_pairs: list[tuple[int, int]]
    symmetry_ok: bool
    symmetry_witness: dict | None
    dummies: list[int]
    dummy_ok: bool
    dummy_witness: dict | None

    def to_json(self):
        return {
            "efficiency": {"residual": self.efficiency_residual, "holds": self.efficient},
            "symmetry": {
                "pairs": [list(p) for p in self.symmetric_pairs],
                "holds": self.symmetry_ok,
                "witness": self.symmetry_witness,
            },
            "dummy": {"players": self.dummies, "holds": self.dummy_ok, "witness": self.dummy_witness},
        }


def check_allocation_properties(game: GameInstance, kappa_on_N, tol: float = HYPOTHESIS_TOL) -> PropertyReport:
    """Efficiency, symmetry and dummy-player checks for an allocation of the grand coalition."""
    n = game.n
    if n > ENUMERATION_CAP:
        raise GameError(f"property checks enumerate coalitions; capped at n={ENUMERATION_CAP}, got n={n}")
    k = np.asarray(kappa_on_N.values if isinstance(kappa_on_N, AllocationVector) else kappa_on_N, dtype=float)
    c_n = game.values(game.grand())[1]
    resid = float(np.cumsum(k)[-1]) - c_n
    efficient = abs(resid) <= tol * max(1.0, abs(c_n))
    cost = lambda S: game.values(S)[1]  # noqa: E731

    def subsets(excluded):
        rest = [j for j in range(n) if j not in excluded]
        for r in range(len(rest) + 1):
            for combo in itertools.combinations(rest, r):
                yield Coalition(combo)

    pairs, sym_ok, sym_w = [], True, None
    for i, j in itertools.combinations(range(n), 2):
        if all(abs(cost(S.add(i)) - cost(S.add(j))) <= tol * max(1.0, abs(cost(S.add(i)))) for S in subsets({i, j})):
            pairs.append((i, j))
            if abs(k[i] - k[j]) > tol * max(1.0, abs(k[i])) and sym_ok:
                sym_ok, sym_w = False, {"i": i, "j": j, "kappa_i": float(k[i]), "kappa_j": float(k[j])}
    dummies, dum_ok, dum_w = [], True, None
    for i in range(n):
        ci = cost(Coalition([i]))
        if all(abs(cost(S.add(i)) - ci - cost(S)) <= tol * max(1.0, abs(cost(S.add(i)))) for S in subsets({i})):
            dummies.append(i)
            if abs(k[i] - ci) > tol * max(1.0, abs(ci)) and dum_ok:
                dum_ok, dum_w = False, {"i": i, "kappa_i": float(k[i]), "standalone": ci}
    return PropertyReport(resid, efficient, pairs, sym_ok, sym_w, dummies, dum_ok, dum_w)


def game_allocation(game: GameInstance, rule: Callable[[GameInstance, Coalition, int], float]):
    """Wrap ``rule(game, S, i)`` as the ``kappa`` callable of the verifiers."""
    return lambda S, i: rule(game, S, i)
