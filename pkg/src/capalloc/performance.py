"""Reward-risk ratios on the extended reals and portfolio classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .measures import Expectation, RiskMeasureSpec
from .scenario import ScenarioSet, aggregate

ZERO_CONVENTION = "zero-convention"
INFINITY_CONVENTION = "infinity-convention"
PLAIN_QUOTIENT = "plain-quotient"


@dataclass(frozen=True)
class RatioValue:
    value: float
    case: str

    def __post_init__(self):
        if self.case == ZERO_CONVENTION and self.value != 0.0:
            raise ValueError("zero-convention ratio must be 0")
        if self.case == INFINITY_CONVENTION and self.value != math.inf:
            raise ValueError("infinity-convention ratio must be +inf")

    def __float__(self):
        return self.value

    def to_json(self):
        v = "inf" if self.value == math.inf else self.value
        return {"value": v, "case": self.case}


class PortfolioClass(str, enum.Enum):
    BOTH_POSITIVE = "both-positive"
    BOTH_NEGATIVE = "both-negative"
    ARBITRAGE = "arbitrage"
    IRRATIONAL = "irrational"


def rrr(theta_val: float, rho_val: float) -> RatioValue:
    """``theta / rho`` with ``0`` for irrational and ``+inf`` for arbitrage portfolios.

    ``0/0`` is 0. A negative reward against zero risk has no stated value
    and is mapped to 0 as well.
    """
    t, r = float(theta_val), float(rho_val)
    if t <= 0 and r > 0:
        return RatioValue(0.0, ZERO_CONVENTION)
    if t > 0 and r <= 0:
        return RatioValue(math.inf, INFINITY_CONVENTION)
    if r == 0:
        # t <= 0 here: 0/0, or a negative reward at zero risk
        return RatioValue(0.0, ZERO_CONVENTION)
    q = t / r
    return RatioValue(q + 0.0, PLAIN_QUOTIENT)  # + 0.0 turns -0.0 into 0.0


def ratio(theta_val: float, rho_val: float) -> float:
    return rrr(theta_val, rho_val).value


def rorac(scn: ScenarioSet, u, rho_spec: RiskMeasureSpec) -> RatioValue:
    """Mean over risk of the portfolio ``sum_i u_i X_i``."""
    x = aggregate(scn, u)
    return rrr(Expectation().evaluate(x, scn), rho_spec.evaluate(x, scn))


def classify_portfolio(theta_val: float, rho_val: float) -> PortfolioClass:
    t, r = float(theta_val), float(rho_val)
    if t > 0 and r <= 0:
        return PortfolioClass.ARBITRAGE
    if t <= 0 and r > 0:
        return PortfolioClass.IRRATIONAL
    if t > 0 and r > 0:
        return PortfolioClass.BOTH_POSITIVE
    if t == 0 and r == 0:
        # theta <= 0 branch: counted with the irrational portfolios
        return PortfolioClass.IRRATIONAL
    return PortfolioClass.BOTH_NEGATIVE
