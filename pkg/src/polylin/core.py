"""Domain types: partitions, polygonal functions, and approximation targets.

A polygonal function is continuous and piecewise linear over a partition
``a = x_0 < x_1 < ... < x_N = b``; it is determined by its ordinates at the
knots and can be written in the nodal ("hat") basis, where basis function i
peaks at knot i and vanishes at every other knot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Partition",
    "PolygonalFunction",
    "TargetFunction",
    "VectorTargetFunction",
    "hat_basis",
    "from_samples",
    "as_target",
]

# Relative slack when classifying a partition as uniform.
UNIFORM_REL_TOL = 1e-12


@dataclass(frozen=True)
class Partition:
    """Strictly increasing knots spanning a closed interval.

    ``is_uniform`` is decided once at construction: all widths must agree
    with (b - a)/N to within ``UNIFORM_REL_TOL`` relative to the span.
    Instances are immutable; the knot array is marked read-only.
    """

    knots: np.ndarray
    is_uniform: bool = field(init=False)

    def __post_init__(self) -> None:
        knots = np.array(self.knots, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise ValueError("a partition needs at least two knots")
        if not np.all(np.isfinite(knots)):
            raise ValueError("knots must be finite")
        widths = np.diff(knots)
        if np.any(widths <= 0.0):
            raise ValueError("knots must be strictly increasing")
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        span = float(knots[-1] - knots[0])
        target = span / widths.size
        uniform = bool(np.max(np.abs(widths - target)) <= UNIFORM_REL_TOL * span)
        object.__setattr__(self, "is_uniform", uniform)

    @property
    def n_segments(self) -> int:
        return self.knots.size - 1

    @property
    def a(self) -> float:
        return float(self.knots[0])

    @property
    def b(self) -> float:
        return float(self.knots[-1])

    @property
    def interval(self) -> tuple[float, float]:
        return self.a, self.b

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.knots)

    def __len__(self) -> int:
        return self.knots.size


@dataclass(frozen=True)
class PolygonalFunction:
    """Continuous piecewise-linear function: a partition plus knot ordinates."""

    partition: Partition
    ordinates: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.ordinates, dtype=float)
        if v.shape != (self.partition.knots.size,):
            raise ValueError(
                f"expected {self.partition.knots.size} ordinates, got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("ordinates must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "ordinates", v)


@dataclass(frozen=True)
class TargetFunction:
    """Function to approximate on a closed interval.

    ``eval`` must accept numpy arrays (and scalars) and evaluate elementwise.
    ``second_derivative`` is either analytic or the built-in central-difference
    fallback; ``second_derivative_kind`` records which one this instance carries,
    since curvature-equalized knot placement is only as good as f''.
    """

    eval: Callable
    second_derivative: Callable
    domain: tuple[float, float]
    second_derivative_kind: str = "analytic"

    def __post_init__(self) -> None:
        a, b = self.domain
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ValueError(f"degenerate domain [{a}, {b}]")
        if self.second_derivative_kind not in ("analytic", "numeric"):
            raise ValueError(f"unknown kind {self.second_derivative_kind!r}")

    def __call__(self, x):
        return self.eval(x)

    def d2(self, x):
        return self.second_derivative(x)

    @staticmethod
    def create(
        eval: Callable,
        domain: tuple[float, float],
        second_derivative: Callable | None = None,
    ) -> "TargetFunction":
        """Build a target; without an analytic f'' a numeric fallback is used."""
        if second_derivative is not None:
            return TargetFunction(eval, second_derivative, domain, "analytic")
        d2 = _difference_second_derivative(eval, domain)
        return TargetFunction(eval, d2, domain, "numeric")


@dataclass(frozen=True)
class VectorTargetFunction:
    """Several scalar targets sharing one domain, approximated on one partition."""

    components: tuple[TargetFunction, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("need at least one component")
        dom = comps[0].domain
        for c in comps[1:]:
            if c.domain != dom:
                raise ValueError(f"component domains differ: {c.domain} vs {dom}")
        object.__setattr__(self, "components", comps)

    @property
    def domain(self) -> tuple[float, float]:
        return self.components[0].domain

    def __len__(self) -> int:
        return len(self.components)


# Relative step of the difference stencil below; also the structure scale
# of the resulting second derivative, since features narrower than the
# stencil are averaged away and values carry ~1e-16/step^2 rounding jitter.
FD_REL_STEP = 1e-5


def _difference_second_derivative(f: Callable, domain: tuple[float, float]) -> Callable:
    """Central second difference with the stencil shifted inward at the ends."""
    a, b = domain

    def d2(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        step = np.maximum(FD_REL_STEP, FD_REL_STEP * np.abs(x))
        center = np.clip(x, a + step, b - step)
        out = (f(center + step) - 2.0 * f(center) + f(center - step)) / step**2
        return float(out[0]) if scalar else out

    return d2


def hat_basis(p: Partition, i: int, x):
    """Evaluate nodal basis function i of the partition at x.

    Rises linearly from knot i-1 to knot i, falls to knot i+1, zero elsewhere;
    the first and last basis functions are one-sided. Accepts scalars or arrays
    within [a, b].
    """
    n = p.n_segments
    if not 0 <= i <= n:
        raise IndexError(f"basis index {i} outside 0..{n}")
    k = p.knots
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < k[0]) or np.any(x > k[-1]):
        raise ValueError("x outside the partition interval")
    out = np.zeros_like(x)
    if i > 0:
        mask = (x >= k[i - 1]) & (x <= k[i])
        out[mask] = (x[mask] - k[i - 1]) / (k[i] - k[i - 1])
    if i < n:
        mask = (x > k[i]) & (x <= k[i + 1]) if i > 0 else (x >= k[i]) & (x <= k[i + 1])
        out[mask] = (k[i + 1] - x[mask]) / (k[i + 1] - k[i])
    return float(out[0]) if scalar else out


def from_samples(p: Partition, f: TargetFunction) -> PolygonalFunction:
    """Interpolating polygonal function: ordinates are f at the knots."""
    vals = np.asarray(f.eval(p.knots), dtype=float)
    if vals.shape != p.knots.shape:
        raise ValueError("target did not evaluate elementwise over the knots")
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise ValueError(f"non-finite sample at knot {bad} (x={p.knots[bad]})")
    return PolygonalFunction(p, vals)


def as_target(g: PolygonalFunction) -> TargetFunction:
    """View a polygonal function as a target (its own second derivative is 0 a.e.)."""
    knots = g.partition.knots
    v = g.ordinates

    def eval(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        idx = np.clip(np.searchsorted(knots, x, side="right"), 1, knots.size - 1)
        d = (x - knots[idx - 1]) / (knots[idx] - knots[idx - 1])
        out = (1.0 - d) * v[idx - 1] + d * v[idx]
        return float(out[0]) if scalar else out

    def d2(x):
        x = np.asarray(x, dtype=float)
        return 0.0 if x.ndim == 0 else np.zeros_like(x)

    return TargetFunction(eval, d2, (float(knots[0]), float(knots[-1])), "analytic")
