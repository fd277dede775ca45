"""Consistent estimators of a decreasing density at the ends of its support.

The Grenander estimator is inconsistent at 0, but evaluated at a shrinking
abscissa it is consistent.  ``simple_*`` use a fixed abscissa n^(-1/3) or
n^(-1/5); ``adaptive_*`` plug in estimates of the constant that minimises the
asymptotic MSE; ``order_stat_zero`` and ``numerical_derivative_zero`` are
scale-equivariant alternatives built on the order statistic X_{m:n}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .core import Sample, StepDensity, grenander

if TYPE_CHECKING:
    from .penalized import AlphaRecipe

#: Minimiser of E(D_R[W(t) - t^(k+1)](c))^2, shared by k = 1 and k = 2.
CSTAR = 0.345

METHODS = (
    "simple_k1",
    "adaptive_k1",
    "simple_k2",
    "adaptive_k2",
    "order_stat",
    "numerical_derivative",
    "endpoint_one",
    "penalized",
)


class DegenerateEstimate(ValueError):
    """The plug-in quantities needed by an estimator are not usable."""


@dataclass(frozen=True)
class AdaptiveTuning:
    c_star: float
    b_hat: float
    deriv_hat: float
    bandwidth: float


@dataclass(frozen=True)
class ZeroEstimate:
    value: float
    method: str
    tuning: AdaptiveTuning | AlphaRecipe | None = None

    def as_lines(self) -> list[str]:
        lines = [f"value={self.value!r}", f"method={self.method}"]
        if self.tuning is not None:
            for key, val in vars(self.tuning).items():
                if isinstance(val, (int, float, bool)):
                    lines.append(f"{key}={val!r}")
        return lines


def _fit(s: Sample, density: Optional[StepDensity]) -> StepDensity:
    if s.n < 2:
        raise ValueError("boundary estimators need at least two observations")
    return grenander(s) if density is None else density


def simple_zero(s: Sample, density: Optional[StepDensity] = None) -> ZeroEstimate:
    d = _fit(s, density)
    return ZeroEstimate(d(s.n ** (-1 / 3)), "simple_k1")


def deriv_zero(s: Sample, density: Optional[StepDensity] = None) -> float:
    """Clamped finite-difference estimate of f'(0); always <= -n^(-1/3)."""
    d = _fit(s, density)
    n = s.n
    diff = n ** (1 / 6) * (d(n ** (-1 / 6)) - d(n ** (-1 / 3)))
    return min(diff, -(n ** (-1 / 3)))


def adaptive_zero(
    s: Sample, c_star: float = CSTAR, density: Optional[StepDensity] = None
) -> ZeroEstimate:
    d = _fit(s, density)
    n = s.n
    f_s = simple_zero(s, d).value
    if f_s <= 0:
        raise DegenerateEstimate("simple estimate is 0; B21 cannot be formed")
    slope = deriv_zero(s, d)
    b_hat = 4 ** (1 / 3) * f_s ** (1 / 3) * abs(slope) ** (-2 / 3)
    bandwidth = c_star * b_hat * n ** (-1 / 3)
    return ZeroEstimate(
        d(bandwidth), "adaptive_k1", AdaptiveTuning(c_star, b_hat, slope, bandwidth)
    )


def simple_zero_k2(s: Sample, density: Optional[StepDensity] = None) -> ZeroEstimate:
    d = _fit(s, density)
    return ZeroEstimate(d(s.n ** (-1 / 5)), "simple_k2")


def second_deriv_zero(s: Sample, density: Optional[StepDensity] = None) -> float:
    """Clamped estimate of f''(0) for densities with f'(0) = 0; always <= -n^(-1/5)."""
    d = _fit(s, density)
    n = s.n
    diff = 2 * n ** (1 / 4) * (d(n ** (-1 / 8)) - d(n ** (-1 / 5)))
    return min(diff, -(n ** (-1 / 5)))


def adaptive_zero_k2(
    s: Sample, c_star: float = CSTAR, density: Optional[StepDensity] = None
) -> ZeroEstimate:
    d = _fit(s, density)
    n = s.n
    f_s = simple_zero_k2(s, d).value
    if f_s <= 0:
        raise DegenerateEstimate("simple k=2 estimate is 0; B22 cannot be formed")
    curv = second_deriv_zero(s, d)
    b_hat = 36 ** (1 / 5) * f_s ** (1 / 5) * abs(curv) ** (-2 / 5)
    bandwidth = c_star * b_hat * n ** (-1 / 5)
    return ZeroEstimate(
        d(bandwidth), "adaptive_k2", AdaptiveTuning(c_star, b_hat, curv, bandwidth)
    )


def order_stat_index(n: int, a: float) -> int:
    """m = floor(a n^(2/3)), guarded against n^(2/3) landing just below an integer."""
    if a <= 0:
        raise ValueError("a must be positive")
    m = math.floor(a * n ** (2 / 3) + 1e-9)
    if not 1 <= m <= n:
        raise ValueError(f"m = floor(a n^(2/3)) = {m} is outside 1..{n}; adjust a")
    return m


def order_stat_zero(
    s: Sample, a: float = 1.0, density: Optional[StepDensity] = None
) -> ZeroEstimate:
    d = _fit(s, density)
    m = order_stat_index(s.n, a)
    return ZeroEstimate(d(s.order_stat(m)), "order_stat")


def numerical_derivative_zero(s: Sample, a: float = 1.0) -> ZeroEstimate:
    """F_n(X_{m:n}) / X_{m:n} = (m / n) / X_{m:n}."""
    if s.n < 2:
        raise ValueError("boundary estimators need at least two observations")
    m = order_stat_index(s.n, a)
    x = s.order_stat(m)
    if x == 0:
        raise DegenerateEstimate(f"X_(m:n) = 0 for m = {m}")
    return ZeroEstimate((m / s.n) / x, "numerical_derivative")


def endpoint_one(
    s: Sample, upper: float = 1.0, density: Optional[StepDensity] = None
) -> ZeroEstimate:
    """Estimate f(upper-) by the Grenander estimate at upper - n^(-1/3)."""
    if s.values[-1] > upper:
        raise ValueError(f"observation {s.values[-1]} exceeds the support end {upper}")
    d = _fit(s, density)
    x = upper - s.n ** (-1 / 3)
    if x < 0:
        raise ValueError("support end is shorter than n^(-1/3)")
    return ZeroEstimate(d(x), "endpoint_one")
