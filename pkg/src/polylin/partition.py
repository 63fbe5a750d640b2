"""Knot placement: uniform grids and curvature-equalized grids.

The equalizing rule spaces knots by the local density |f''(x)|^(1/3),
normalized over [a, b]: knot i sits where the cumulative normalized density
reaches i/N.  Regions of high curvature then receive proportionally more
knots, which (asymptotically) equalizes the approximation error that each
segment contributes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import FD_REL_STEP, Partition, TargetFunction
from .quadrature import integrate_segments

__all__ = [
    "LinearTargetError",
    "KnotDistribution",
    "uniform_partition",
    "knot_density",
    "build_distribution",
    "optimized_partition",
]

# Dense tabulation of the cumulative density; refinement inside each cell
# is adaptive, so the cell count only needs to localize features.
GRID_PANELS = 4096
# Relative accuracy of the tabulated cumulative density.
CUMULATIVE_REL_TOL = 1e-10
# Bisection stops when the bracket is this narrow, relative to b - a.
ROOT_ABSCISSA_TOL = 1e-12
# Plateau slack: the inversion picks the leftmost point whose cumulative
# value reaches the target minus this, which lands on the left edge of any
# flat stretch while staying far below meaningful density differences.
PLATEAU_SLACK = 1e-12
# Floor between consecutive knots, relative to b - a.
MIN_SPACING = 1e-12


class LinearTargetError(ValueError):
    """The second derivative vanishes identically: every partition is exact."""


def _density_accuracy(numeric: bool, a: float, b: float):
    """(rel_tol, resolve_floor) for integrals of a second-derivative-based
    density.  A difference-quotient second derivative carries rounding
    jitter around 1e-16/step^2 and resolves no structure narrower than its
    stencil, so integrals over it are held to a matching relative accuracy
    instead of the absolute default."""
    if not numeric:
        return CUMULATIVE_REL_TOL, None
    floor = min(FD_REL_STEP * max(1.0, abs(a), abs(b)), (b - a) / 256.0)
    return 1e-6, floor


def uniform_partition(a: float, b: float, n: int) -> Partition:
    """N equal segments over [a, b]."""
    if not np.isfinite(a) or not np.isfinite(b) or not a < b:
        raise ValueError(f"invalid interval [{a}, {b}]")
    if n < 1:
        raise ValueError(f"need at least one segment, got {n}")
    return Partition(np.linspace(a, b, n + 1))


def knot_density(f: TargetFunction, x):
    """Local knot density |f''(x)|^(1/3)."""
    vals = np.asarray(f.d2(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("second derivative is not finite on the interval")
    return np.cbrt(np.abs(vals))


@dataclass(frozen=True)
class KnotDistribution:
    """Tabulated cumulative knot density, invertible to a knot placement.

    ``grid``/``cumulative`` hold the running integral of the density over a
    dense mesh of [a, b]; ``normalizer`` is the full integral, so the
    normalized distribution is cumulative/normalizer with range [0, 1].
    """

    grid: np.ndarray
    cumulative: np.ndarray
    normalizer: float
    density: Callable
    rel_tol: float = CUMULATIVE_REL_TOL
    resolve_floor: float | None = None

    def __post_init__(self) -> None:
        for name in ("grid", "cumulative"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def value(self, x):
        """Normalized cumulative distribution at x (vectorized, in [0, 1])."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        a, b = self.interval
        if np.any(x < a) or np.any(x > b):
            raise ValueError("x outside the tabulated interval")
        idx = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, self.grid.size - 2)
        base = self.cumulative[idx]
        start = self.grid[idx]
        tail = integrate_segments(
            lambda t, _s: self.density(t),
            panels=(start, x, np.arange(x.size), x.size),
            abs_tol=self.rel_tol * max(self.normalizer, np.finfo(float).tiny),
            resolve_floor=self.resolve_floor,
        )
        out = (base + tail) / self.normalizer
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out


def _distribution_from_density(
    density: Callable,
    a: float,
    b: float,
    *,
    rel_tol: float = CUMULATIVE_REL_TOL,
    resolve_floor: float | None = None,
) -> KnotDistribution:
    """Tabulate the cumulative integral of a nonnegative density over [a, b]."""
    if not np.isfinite(a) or not np.isfinite(b) or not a < b:
        raise ValueError(f"invalid interval [{a}, {b}]")
    grid = np.linspace(a, b, GRID_PANELS + 1)
    pieces = integrate_segments(
        lambda x, _s: density(x),
        grid,
        abs_tol=1e-300,
        rel_tol=rel_tol,
        resolve_floor=resolve_floor,
    )
    cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
    normalizer = float(cumulative[-1])
    if normalizer <= 0.0:
        raise LinearTargetError(
            "knot density integrates to zero (target is linear); any partition is exact"
        )
    return KnotDistribution(grid, cumulative, normalizer, density, rel_tol, resolve_floor)


def build_distribution(f: TargetFunction, a: float, b: float) -> KnotDistribution:
    """Cumulative distribution of |f''|^(1/3) over [a, b]."""
    _check_subinterval(f, a, b)
    rel, floor = _density_accuracy(f.second_derivative_kind == "numeric", a, b)
    return _distribution_from_density(
        lambda x: knot_density(f, x), a, b, rel_tol=rel, resolve_floor=floor
    )


def invert_distribution(dist: KnotDistribution, targets: np.ndarray) -> np.ndarray:
    """Abscissae where the normalized cumulative density crosses each target.

    Bisection on the leftmost point whose value reaches target - PLATEAU_SLACK:
    on a flat stretch of the distribution this resolves ties to the left edge.
    """
    targets = np.asarray(targets, dtype=float)
    a, b = dist.interval
    span = b - a
    values = dist.cumulative / dist.normalizer
    want = targets - PLATEAU_SLACK
    idx = np.clip(np.searchsorted(values, want, side="left"), 1, dist.grid.size - 1)
    lo = dist.grid[idx - 1].copy()
    hi = dist.grid[idx].copy()
    base_idx = idx - 1
    segs = np.arange(targets.size)

    while True:
        active = (hi - lo) > ROOT_ABSCISSA_TOL * span
        if not np.any(active):
            break
        mid = np.where(active, 0.5 * (lo + hi), hi)
        tail = integrate_segments(
            lambda t, s: dist.density(t),
            panels=(dist.grid[base_idx], mid, segs, targets.size),
            abs_tol=dist.rel_tol * dist.normalizer,
            resolve_floor=dist.resolve_floor,
        )
        fmid = (dist.cumulative[base_idx] + tail) / dist.normalizer
        reached = fmid >= want
        hi = np.where(active & reached, mid, hi)
        lo = np.where(active & ~reached, mid, lo)
    return hi


def optimized_partition(f: TargetFunction, a: float, b: float, n: int) -> Partition:
    """Curvature-equalized partition: knot i sits at the i/N density quantile."""
    if n < 1:
        raise ValueError(f"need at least one segment, got {n}")
    dist = build_distribution(f, a, b)
    if n == 1:
        return Partition(np.array([a, b]))
    targets = np.arange(1, n) / n
    interior = invert_distribution(dist, targets)
    knots = np.concatenate([[a], interior, [b]])
    return Partition(_enforce_spacing(knots))


def _enforce_spacing(knots: np.ndarray) -> np.ndarray:
    """Nudge coincident knots apart by the minimum spacing, keeping ends fixed."""
    span = knots[-1] - knots[0]
    eps = MIN_SPACING * span
    out = knots.copy()
    for i in range(1, out.size):
        if out[i] < out[i - 1] + eps:
            out[i] = out[i - 1] + eps
    for i in range(out.size - 2, 0, -1):
        if out[i] > out[i + 1] - eps:
            out[i] = out[i + 1] - eps
    out[0] = knots[0]
    out[-1] = knots[-1]
    return out


def _check_subinterval(f: TargetFunction, a: float, b: float) -> None:
    lo, hi = f.domain
    if a < lo or b > hi:
        raise ValueError(f"[{a}, {b}] outside the target domain [{lo}, {hi}]")
