"""Test distributions and reproducible sample generation.

Every replication draws from its own generator seeded by
``(seed, rep_index, n)``, so a replication's sample does not depend on how
many other replications ran before it or in which process.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import special, stats

from .core import Sample

FAMILIES = ("exponential", "half_normal", "uniform01", "custom_inverse_cdf")

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class ConditionWarning(UserWarning):
    """The distribution does not satisfy the regularity needed at the boundary."""


class AnalyticBoundary(NamedTuple):
    f0: float
    fk0: float
    k: int


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: dict = field(default_factory=dict)
    analytic: Optional[AnalyticBoundary] = None
    support_upper: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.family == "custom_inverse_cdf" and "inverse_cdf" not in self.params:
            raise ValueError("custom_inverse_cdf needs params['inverse_cdf']")

    @property
    def f0(self) -> float:
        return analytic_boundary(self).f0

    def cdf(self, x):
        if self.family == "exponential":
            return stats.expon.cdf(x)
        if self.family == "half_normal":
            return stats.halfnorm.cdf(x)
        if self.family == "uniform01":
            return stats.uniform.cdf(x)
        if "cdf" in self.params:
            return self.params["cdf"](x)
        raise ValueError("custom distribution has no cdf")


def exponential() -> DistributionSpec:
    return DistributionSpec("exponential")


def half_normal() -> DistributionSpec:
    return DistributionSpec("half_normal")


def uniform01() -> DistributionSpec:
    return DistributionSpec("uniform01", support_upper=1.0)


def custom(
    inverse_cdf: Callable[[np.ndarray], np.ndarray],
    analytic: Optional[AnalyticBoundary] = None,
    cdf: Optional[Callable] = None,
    support_upper: Optional[float] = None,
) -> DistributionSpec:
    params = {"inverse_cdf": inverse_cdf}
    if cdf is not None:
        params["cdf"] = cdf
    if analytic is not None:
        analytic = AnalyticBoundary(*analytic)
    return DistributionSpec("custom_inverse_cdf", params, analytic, support_upper)


def by_name(name: str) -> DistributionSpec:
    makers = {"exponential": exponential, "half_normal": half_normal, "uniform01": uniform01}
    try:
        return makers[name]()
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {tuple(makers)}") from None


def analytic_boundary(spec: DistributionSpec) -> AnalyticBoundary:
    """(f(0), f^(k)(0), k) with k the order of the first nonvanishing derivative."""
    if spec.family == "exponential":
        return AnalyticBoundary(1.0, -1.0, 1)
    if spec.family == "half_normal":
        # f(x) = sqrt(2/pi) exp(-x^2/2): f'(0) = 0, f''(0) = -f(0)
        return AnalyticBoundary(SQRT_2_OVER_PI, -SQRT_2_OVER_PI, 2)
    if spec.family == "uniform01":
        warnings.warn(
            "uniform01 has all derivatives 0 at the origin; only the upper "
            "endpoint results apply",
            ConditionWarning,
            stacklevel=2,
        )
        return AnalyticBoundary(1.0, 0.0, 0)
    if spec.analytic is None:
        raise ValueError("custom distribution without an analytic block")
    return spec.analytic


def rng_for(seed: int, rep_index: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(rep_index), *map(int, extra)])


def draw(spec: DistributionSpec, n: int, seed: int, rep_index: int) -> Sample:
    """Inverse-CDF sample of size n, deterministic per (seed, rep_index, n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = rng_for(seed, rep_index, n).random(n)
    if spec.family == "exponential":
        x = -np.log1p(-u)
    elif spec.family == "half_normal":
        x = math.sqrt(2.0) * special.erfinv(u)
    elif spec.family == "uniform01":
        x = u
    else:
        x = np.asarray(spec.params["inverse_cdf"](u), dtype=float)
    x.sort()
    return Sample(x)
