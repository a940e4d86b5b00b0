"""Sample size and trial length for an optimal design.

An optimal design estimates the semi-difference tau with variance
sigma^2 / m, where m = w (3 N3 + 2 N2) is the number of sessions.  The usual
normal-approximation power calculation then fixes m, and m fixes w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtri


@dataclass(frozen=True)
class PlanInputs:
    tau0: float
    sigma: float
    alpha: float = 0.05
    power: float = 0.80
    n3: int = 0
    n2: int = 0

    def __post_init__(self):
        if self.tau0 == 0:
            raise ValueError("undetectable difference: tau0 must be non-zero")
        if self.tau0 < 0:
            raise ValueError(f"tau0 must be positive, got {self.tau0}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.power < 1:
            raise ValueError(f"power must lie in (0, 1), got {self.power}")
        if self.n3 < 0 or self.n2 < 0 or self.n3 + self.n2 < 1:
            raise ValueError(f"need at least one patient, got n3={self.n3}, n2={self.n2}")


def z_sum(alpha: float, power: float) -> float:
    """z_{1-alpha/2} + z_{power}; 2.8016 for a two-sided 5% test at 80% power."""
    return float(ndtri(1 - alpha / 2) + ndtri(power))


def required_observations(inputs: PlanInputs) -> int:
    return math.ceil((z_sum(inputs.alpha, inputs.power) * inputs.sigma / inputs.tau0) ** 2)


def required_weeks(m: int, n3: int, n2: int, round_even: bool = True) -> int:
    per_week = 3 * n3 + 2 * n2
    if per_week < 1:
        raise ValueError("need at least one patient")
    w = -(-m // per_week)
    if round_even and w % 2:
        w += 1
    return w


def estimator_variance(w: int, n3: int, n2: int, sigma: float) -> float:
    return sigma ** 2 / (w * (3 * n3 + 2 * n2))


@dataclass(frozen=True)
class Plan:
    m: int
    weeks: int
    planned_m: int
    variance: float

    def as_dict(self) -> dict:
        return {"m": self.m, "weeks": self.weeks, "planned_m": self.planned_m,
                "variance": self.variance}


def plan_trial(inputs: PlanInputs, round_even: bool = True) -> Plan:
    """``m`` is the required number of observations; ``planned_m`` what the trial delivers."""
    m = required_observations(inputs)
    w = required_weeks(m, inputs.n3, inputs.n2, round_even)
    return Plan(m=m, weeks=w, planned_m=w * (3 * inputs.n3 + 2 * inputs.n2),
                variance=estimator_variance(w, inputs.n3, inputs.n2, inputs.sigma))
