"""Randomized auditing of risk/reward axioms and the sign-stability condition (A)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measures import RewardMeasureSpec, RiskMeasureSpec, MeasureError
from .scenario import ScenarioSet, aggregate

SLACK = 1e-9
DEFAULT_H_GRID = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)

RISK_AXIOMS = ("M", "T", "S", "P", "C")
REWARD_AXIOMS = ("M_bar", "T_bar", "C_bar", "S_bar", "P")


@dataclass
class AxiomStatus:
    status: str  # "passed" | "failed" | "not-applicable"
    witness: dict | None = None

    def to_json(self):
        return {"status": self.status, "witness": self.witness}


@dataclass
class AxiomReport:
    results: dict[str, AxiomStatus]
    trials: int
    seed: int
    measure: dict = field(default_factory=dict)

    def passed(self, axiom: str) -> bool:
        return self.results[axiom].status == "passed"

    def failed(self, axiom: str) -> bool:
        return self.results[axiom].status == "failed"

    def to_json(self):
        return {
            "measure": self.measure,
            "trials": self.trials,
            "seed": self.seed,
            "axioms": {k: v.to_json() for k, v in self.results.items()},
        }


def _draw(rng: np.random.Generator, scn: ScenarioSet) -> np.ndarray:
    """Random outcome: a mix of position combinations, Gaussian noise and sparse shocks."""
    kind = rng.integers(3)
    if kind == 0:
        u = rng.normal(size=scn.n)
        return aggregate(scn, u) + rng.normal(scale=0.5, size=scn.m)
    if kind == 1:
        return rng.normal(scale=5.0, size=scn.m)
    x = np.zeros(scn.m)
    hits = rng.choice(scn.m, size=min(scn.m, int(rng.integers(1, 3))), replace=False)
    x[hits] = -rng.uniform(5.0, 20.0, size=hits.size)
    return x


def _lst(a):
    return np.asarray(a, dtype=float).tolist()


def check_risk_axioms(spec: RiskMeasureSpec, scn: ScenarioSet, trials: int = 500, seed: int = 0) -> AxiomReport:
    """Search for violations of (M), (T), (S), (P), (C); the first one found is the witness."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rho = lambda x: spec.evaluate(x, scn)  # noqa: E731
    rng = np.random.default_rng(seed)
    results = {}

    def run(name, make):
        for _ in range(trials):
            witness = make()
            if witness is not None:
                results[name] = AxiomStatus("failed", witness)
                return
        results[name] = AxiomStatus("passed")

    def mono():
        y = _draw(rng, scn)
        x = y + np.abs(_draw(rng, scn))
        lhs, rhs = rho(x), rho(y)
        if lhs > rhs + SLACK:
            return {"X": _lst(x), "Y": _lst(y), "rho_X": lhs, "rho_Y": rhs}

    def trans():
        x = _draw(rng, scn)
        m = float(rng.uniform(-10, 10))
        lhs, rhs = rho(x + m), rho(x) - m
        if abs(lhs - rhs) > SLACK:
            return {"X": _lst(x), "m": m, "rho_X_plus_m": lhs, "rho_X_shifted": rhs}

    def sub():
        x, y = _draw(rng, scn), _draw(rng, scn)
        lhs, rhs = rho(x + y), rho(x) + rho(y)
        if lhs > rhs + SLACK:
            return {"X": _lst(x), "Y": _lst(y), "rho_sum": lhs, "sum_rho": rhs}

    def pos():
        x = _draw(rng, scn)
        lam = float(rng.uniform(0.0, 5.0))
        lhs, rhs = rho(lam * x), lam * rho(x)
        if abs(lhs - rhs) > SLACK:
            return {"X": _lst(x), "lambda": lam, "rho_lambda_X": lhs, "lambda_rho_X": rhs}

    def conv():
        x, y = _draw(rng, scn), _draw(rng, scn)
        lam = float(rng.uniform(0.0, 1.0))
        lhs = rho(lam * x + (1 - lam) * y)
        rhs = lam * rho(x) + (1 - lam) * rho(y)
        if lhs > rhs + SLACK:
            return {"X": _lst(x), "Y": _lst(y), "lambda": lam, "rho_mix": lhs, "mix_rho": rhs}

    for name, make in zip(RISK_AXIOMS, (mono, trans, sub, pos, conv)):
        run(name, make)
    return AxiomReport(results, trials, seed, spec.to_json())


def check_reward_axioms(spec: RewardMeasureSpec, scn: ScenarioSet, trials: int = 500, seed: int = 0) -> AxiomReport:
    """Mirror of :func:`check_risk_axioms` for (M-bar), (T-bar), (C-bar), (S-bar), (P)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    theta = lambda x: spec.evaluate(x, scn)  # noqa: E731
    rng = np.random.default_rng(seed)
    results = {}

    def run(name, make):
        for _ in range(trials):
            witness = make()
            if witness is not None:
                results[name] = AxiomStatus("failed", witness)
                return
        results[name] = AxiomStatus("passed")

    def mono():
        y = _draw(rng, scn)
        x = y + np.abs(_draw(rng, scn))
        lhs, rhs = theta(x), theta(y)
        if lhs < rhs - SLACK:
            return {"X": _lst(x), "Y": _lst(y), "theta_X": lhs, "theta_Y": rhs}

    def trans():
        x = _draw(rng, scn)
        m = float(rng.uniform(-10, 10))
        lhs, rhs = theta(x + m), theta(x) + m
        if abs(lhs - rhs) > SLACK:
            return {"X": _lst(x), "m": m, "theta_X_plus_m": lhs, "theta_X_shifted": rhs}

    def conc():
        x, y = _draw(rng, scn), _draw(rng, scn)
        lam = float(rng.uniform(0.0, 1.0))
        lhs = theta(lam * x + (1 - lam) * y)
        rhs = lam * theta(x) + (1 - lam) * theta(y)
        if lhs < rhs - SLACK:
            return {"X": _lst(x), "Y": _lst(y), "lambda": lam, "theta_mix": lhs, "mix_theta": rhs}

    def sup():
        x, y = _draw(rng, scn), _draw(rng, scn)
        lhs, rhs = theta(x + y), theta(x) + theta(y)
        if lhs < rhs - SLACK:
            return {"X": _lst(x), "Y": _lst(y), "theta_sum": lhs, "sum_theta": rhs}

    def pos():
        x = _draw(rng, scn)
        lam = float(rng.uniform(0.0, 5.0))
        lhs, rhs = theta(lam * x), lam * theta(x)
        if abs(lhs - rhs) > SLACK:
            return {"X": _lst(x), "lambda": lam, "theta_lambda_X": lhs, "lambda_theta_X": rhs}

    for name, make in zip(REWARD_AXIOMS, (mono, trans, conc, sup, pos)):
        run(name, make)
    return AxiomReport(results, trials, seed, spec.to_json())


def condition_a_table(spec: RiskMeasureSpec, scn: ScenarioSet, u=None, h_grid=DEFAULT_H_GRID) -> np.ndarray:
    """``table[i, g]`` is True when ``rho(X -/+ h_g X_i)`` keep the sign of ``rho(X)``.

    Position ``i`` of the portfolio ``u`` is ``u_i X_i``. If ``rho(X) = 0`` the
    condition imposes nothing and every entry is True.
    """
    u = np.ones(scn.n) if u is None else np.asarray(u, dtype=float)
    x = aggregate(scn, u)
    r = spec.evaluate(x, scn)
    table = np.ones((scn.n, len(h_grid)), dtype=bool)
    if abs(r) < 1e-12:
        return table
    sign = np.sign(r)
    for i in range(scn.n):
        xi = u[i] * scn.positions[i]
        for g, h in enumerate(h_grid):
            lo = spec.evaluate(x - h * xi, scn)
            hi = spec.evaluate(x + h * xi, scn)
            table[i, g] = np.sign(lo) == sign and np.sign(hi) == sign
    return table


def check_condition_A(spec: RiskMeasureSpec, scn: ScenarioSet, u=None, h_grid=DEFAULT_H_GRID) -> np.ndarray:
    """Per-position booleans: sign of ``rho`` preserved at every ``h`` in the grid."""
    u = np.ones(scn.n) if u is None else np.asarray(u, dtype=float)
    r = spec.evaluate(aggregate(scn, u), scn)
    if abs(r) < 1e-12:
        raise MeasureError("sign of rho(X) indeterminate: |rho(X)| < 1e-12")
    return condition_a_table(spec, scn, u, h_grid).all(axis=1)
