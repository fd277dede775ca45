"""Penalized NPMLE of a nonincreasing density and its adaptive smoothing parameter.

The estimator maximises

    L(f) = (1/n) sum_i log f(X_i) - alpha f(0+)

over nonincreasing densities on [0, inf).  With a Lagrange multiplier gamma
for the unit-mass constraint, the penalty alpha h_1 merges into the first
cell of the mass term, so for fixed gamma the problem is the Grenander
problem on the data shifted right by alpha / gamma, scaled by 1 / gamma.
The multiplier is then fixed by the mass constraint, a one-dimensional root
problem in u = 1 / gamma:

    u - alpha u^2 s_1(alpha u) = 1,

where s_1(shift) is the first LCM slope of the shifted ECDF vertices.  When
alpha >= X_(n) the multiplier vanishes and the optimum is the uniform
density 1/alpha on [0, alpha], which puts mass beyond the last observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ._hull import upper_hull
from .boundary import ZeroEstimate
from .core import Sample, StepDensity, ecdf_vertices

#: alpha_n = 0.649 beta^(-1/3) n^(-2/3) is the asymptotically optimal smoothing.
ALPHA_CONSTANT = 0.649
#: Pilot smoothing parameters tabulated for small samples.
PILOT_ALPHA0 = {50: 0.0516, 100: 0.0325, 200: 0.0205}
PILOT_BETA = 0.5
DEFAULT_Q = 1 / 3


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class PenalizedFit:
    density: StepDensity
    alpha: float
    objective: float
    x_m: float
    multiplier: float

    @property
    def value_at_zero(self) -> float:
        return float(self.density.heights[0])


@dataclass(frozen=True)
class AlphaRecipe:
    alpha0: float
    q: float
    beta_hat: float
    alpha_hat: float
    x_m: float
    fallback: bool


def theoretical_alpha(n: int, beta: float = PILOT_BETA) -> float:
    return ALPHA_CONSTANT * beta ** (-1 / 3) * n ** (-2 / 3)


def default_alpha0(n: int) -> float:
    """Pilot alpha_0: tabulated values, the theoretical choice for n >= 1000,
    and log-log interpolation in n in between (power-law extrapolation below 50).
    """
    if n >= 1000:
        return theoretical_alpha(n)
    ns = np.array([50.0, 100.0, 200.0, 1000.0])
    vals = np.array([*PILOT_ALPHA0.values(), theoretical_alpha(1000)])
    logn = math.log(n)
    if n < 50:
        slope = (math.log(vals[1]) - math.log(vals[0])) / (math.log(100) - math.log(50))
        return float(vals[0] * math.exp(slope * (logn - math.log(50))))
    return float(np.exp(np.interp(logn, np.log(ns), np.log(vals))))


def objective(density: StepDensity, s: Sample, alpha: float) -> float:
    f = density(s.values)
    if np.any(f <= 0):
        return -math.inf
    return float(np.mean(np.log(f)) - alpha * density.heights[0])


def _shifted_hull(x, y, shift):
    xs = np.concatenate(([0.0], x + shift))
    ys = np.concatenate(([0.0], y))
    idx = upper_hull(xs, ys)
    slopes = np.diff(ys[idx]) / np.diff(xs[idx])
    return idx, slopes


def penalized_fit(s: Sample, alpha: float) -> PenalizedFit:
    """Maximiser of the penalized log-likelihood for smoothing parameter alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    v = ecdf_vertices(s)
    if v[0, 0] != 0.0 or v[0, 1] != 0.0 or v.shape[0] < 2:
        raise ValueError("penalized fit needs observations away from 0")
    x, y = v[1:, 0], v[1:, 1]

    if alpha >= x[-1]:
        density = StepDensity([0.0, alpha], [1.0 / alpha])
        return PenalizedFit(density, alpha, objective(density, s, alpha), math.nan, math.inf)

    def first_slope(shift):
        return float(np.max(y / (x + shift)))

    def mass_gap(u):
        return u - alpha * u * u * first_slope(alpha * u) - 1.0

    lo, hi = 1.0, 2.0
    while mass_gap(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise SolverError("could not bracket the mass multiplier")
    u = brentq(mass_gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

    idx, slopes = _shifted_hull(x, y, alpha * u)
    # hull index i >= 1 refers to vertex x[i - 1]
    breakpoints = np.concatenate(([0.0], x[idx[1:] - 1]))
    heights = u * slopes
    keep = np.append(np.diff(heights) < 0, True)
    if not keep.all():
        # equal heights after rounding: merge the cells
        breakpoints = np.append(0.0, breakpoints[1:][keep])
        heights = heights[keep]
    density = StepDensity(breakpoints, heights)
    x_m = float(breakpoints[2]) if heights.shape[0] >= 3 else math.nan
    return PenalizedFit(density, alpha, objective(density, s, alpha), x_m, u)


def alpha_recipe(
    s: Sample, alpha0: Optional[float] = None, q: float = DEFAULT_Q
) -> AlphaRecipe:
    """Data-driven smoothing parameter from a pilot fit.

    beta_hat = max(f(0) (f(0) - f(x_m)) / (2 x_m), n^(-q)), where x_m is the
    second jump of the pilot fit and f(x_m) the level just after it (the fit
    taken right-continuous there); alpha_hat = 0.649 beta_hat^(-1/3) n^(-2/3).
    A pilot with fewer than two jumps has no x_m; beta_hat then falls back to
    the floor n^(-q) and the recipe is flagged.
    """
    if not 0 < q < 0.5:
        raise ValueError("q must lie in (0, 0.5)")
    n = s.n
    if alpha0 is None:
        alpha0 = default_alpha0(n)
    pilot = penalized_fit(s, alpha0)
    floor = n ** (-q)
    if math.isnan(pilot.x_m):
        beta_hat, fallback = floor, True
    else:
        h = pilot.density.heights
        beta_hat = float(max(h[0] * (h[0] - h[2]) / (2 * pilot.x_m), floor))
        fallback = False
    alpha_hat = float(theoretical_alpha(n, beta_hat))
    return AlphaRecipe(alpha0, q, beta_hat, alpha_hat, pilot.x_m, fallback)


def penalized_zero(
    s: Sample, alpha0: Optional[float] = None, q: float = DEFAULT_Q
) -> ZeroEstimate:
    recipe = alpha_recipe(s, alpha0, q)
    fit = penalized_fit(s, recipe.alpha_hat)
    return ZeroEstimate(fit.value_at_zero, "penalized", recipe)
