"""Empirical CDF, least concave majorant and the Grenander density estimate.

The Grenander estimator of a nonincreasing density on [0, inf) is the left
derivative of the least concave majorant (LCM) of the empirical distribution
function.  Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from ._hull import exact_upper_hull


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Sample:
    """Observations sorted ascending (the order statistics)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def order_stat(self, m: int) -> float:
        """The m-th order statistic X_{m:n}, 1-based."""
        if not 1 <= m <= self.n:
            raise ValueError(f"order statistic index {m} outside 1..{self.n}")
        return float(self.values[m - 1])

    def scaled(self, sigma: float) -> "Sample":
        return Sample(self.values * sigma)


@dataclass(frozen=True)
class ConcaveMajorant:
    """Piecewise-linear concave function through its touch points.

    ``knots`` is an array of shape (k, 2) holding (x, y) pairs with strictly
    increasing x, starting at (0, 0).
    """

    knots: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "knots", _frozen(self.knots).reshape(-1, 2))

    @property
    def x(self) -> np.ndarray:
        return self.knots[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.knots[:, 1]

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    def __call__(self, t):
        # constant beyond the last knot, like the empirical CDF it dominates
        return np.interp(t, self.x, self.y)


@dataclass(frozen=True)
class StepDensity:
    """Left-continuous nonincreasing step function.

    Takes the value ``heights[i]`` on ``(breakpoints[i], breakpoints[i + 1]]``,
    ``heights[0]`` at zero and 0 beyond the last breakpoint.
    """

    breakpoints: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        b = _frozen(self.breakpoints)
        h = _frozen(self.heights)
        if b.ndim != 1 or h.ndim != 1 or b.shape[0] != h.shape[0] + 1:
            raise ValueError("need len(breakpoints) == len(heights) + 1")
        if b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must start at 0 and strictly increase")
        if np.any(h <= 0) or np.any(np.diff(h) >= 0):
            raise ValueError("heights must be positive and strictly decreasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "heights", h)

    @property
    def mass(self) -> float:
        return float(np.dot(self.heights, np.diff(self.breakpoints)))

    @property
    def support_end(self) -> float:
        return float(self.breakpoints[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("density is defined on [0, inf) only")
        idx = np.maximum(np.searchsorted(self.breakpoints, x, side="left"), 1)
        padded = np.append(self.heights, 0.0)
        out = padded[np.minimum(idx, padded.shape[0]) - 1]
        return float(out) if out.ndim == 0 else out

    def to_csv(self) -> str:
        rows = ["breakpoint,height"]
        for b, h in zip(self.breakpoints, np.append(self.heights, 0.0)):
            rows.append(f"{float(b)!r},{float(h)!r}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "StepDensity":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if lines[0].replace(" ", "") != "breakpoint,height":
            raise ValueError("expected header 'breakpoint,height'")
        pairs = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        return cls(pairs[:, 0], pairs[:-1, 1])


def ingest(raw: Iterable[float]) -> Sample:
    """Validate raw observations and return them as a sorted Sample."""
    values = np.asarray(list(raw), dtype=float)
    if values.size == 0:
        raise ValueError("empty sample")
    for i, v in enumerate(values):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value at index {i}")
        if v < 0:
            raise ValueError(f"negative value at index {i}")
    return Sample(np.sort(values, kind="stable"))


def read_sample(path) -> Sample:
    """One decimal literal per line; blank lines and ``#`` comments are skipped."""
    raw = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            raw.append(float(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    return ingest(raw)


def format_sample(sample: Sample, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines.extend(repr(float(v)) for v in sample.values)
    return "\n".join(lines) + "\n"


def _ecdf_counts(s: Sample):
    """Distinct abscissae (with the origin) and cumulative counts as exact floats."""
    x = s.values
    last_of_run = np.append(x[1:] != x[:-1], True)
    counts = (np.flatnonzero(last_of_run) + 1).astype(float)
    xs = np.concatenate(([0.0], x[last_of_run]))
    cs = np.concatenate(([0.0], counts))
    if xs[1] == 0.0:
        # an atom at the origin would put a vertical jump at x = 0
        xs, cs = xs[1:], cs[1:]
    return xs, cs


def ecdf_vertices(s: Sample) -> np.ndarray:
    """Vertices (0, 0), (X_(i), F_n(X_(i))) of the empirical CDF, ties collapsed."""
    xs, cs = _ecdf_counts(s)
    return np.column_stack((xs, cs / s.n))


def lcm(vertices) -> ConcaveMajorant:
    """Least concave majorant of the piecewise-linear interpolation of ``vertices``."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    x, y = v[:, 0], v[:, 1]
    if x[0] != 0.0 or y[0] != 0.0:
        raise ValueError("vertices must start at (0, 0)")
    if np.any(np.diff(x) <= 0):
        raise ValueError("vertex x-coordinates must be strictly increasing")
    if np.any(np.diff(y) < 0):
        raise ValueError("vertex y-coordinates must be nondecreasing")
    return ConcaveMajorant(v[exact_upper_hull(np.ascontiguousarray(x), np.ascontiguousarray(y))])


def grenander(s: Sample) -> StepDensity:
    """The NPMLE of a nonincreasing density: slopes of the LCM of F_n.

    The hull is taken over the integer counts n F_n rather than the rounded
    values of F_n, so collinear ECDF vertices are recognised exactly.
    """
    if s.values[0] == 0.0:
        raise ValueError("an observation at 0 makes the NPMLE unbounded at the origin")
    xs, cs = _ecdf_counts(s)
    idx = exact_upper_hull(xs, cs)
    bx, bc = xs[idx], cs[idx]
    slopes = np.diff(bc) / (s.n * np.diff(bx))
    while np.any(np.diff(slopes) >= 0):
        # distinct chord slopes can round to the same float; merge those cells
        keep = np.append(True, np.append(np.diff(slopes) < 0, True))
        bx, bc = bx[keep], bc[keep]
        slopes = np.diff(bc) / (s.n * np.diff(bx))
    return StepDensity(bx, slopes)


def evaluate(d: StepDensity, x: float) -> float:
    if x < 0:
        raise ValueError(f"cannot evaluate the density at negative x={x}")
    return d(x)


def inverse_process(s: Sample, a: float) -> float:
    """U_n(a): the last time t >= 0 at which F_n(t) - a t is maximal.

    Between observations F_n(t) - a t decreases, so only t = 0 and the
    observations are candidates.
    """
    if a <= 0:
        raise ValueError("the inverse process needs a > 0")
    v = ecdf_vertices(s)
    vals = v[:, 1] - a * v[:, 0]
    last = vals.shape[0] - 1 - int(np.argmax(vals[::-1]))
    return float(v[last, 0])


def switching_check(s: Sample, a: float, x: float) -> bool:
    """Whether f_n(x) <= a and U_n(a) <= x agree for this (a, x)."""
    return bool((evaluate(grenander(s), x) <= a) == (inverse_process(s, a) <= x))
