"""Capital allocation, reward-risk ratios and suitability checks on finite scenario spaces."""

from ._kernels import BACKEND
from .scenario import (
    ScenarioError,
    ScenarioFormatError,
    ScenarioSet,
    aggregate,
    empirical_cdf,
    expectation,
    load_scenarios,
    parse_scenarios,
    quantile,
)
from .measures import (
    Distorted,
    Distortion,
    DistortionExponential,
    Entropic,
    Expectation,
    ExpectedShortfall,
    MeasureError,
    Robust,
    ValueAtRisk,
    choquet_integral,
    evaluate_reward,
    evaluate_risk,
    parse_spec,
    spec_from_json,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ScenarioError",
    "ScenarioFormatError",
    "ScenarioSet",
    "aggregate",
    "empirical_cdf",
    "expectation",
    "load_scenarios",
    "parse_scenarios",
    "quantile",
    "Distorted",
    "Distortion",
    "DistortionExponential",
    "Entropic",
    "Expectation",
    "ExpectedShortfall",
    "MeasureError",
    "Robust",
    "ValueAtRisk",
    "choquet_integral",
    "evaluate_reward",
    "evaluate_risk",
    "parse_spec",
    "spec_from_json",
]
