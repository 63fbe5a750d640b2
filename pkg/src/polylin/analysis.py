"""Error measurement, a-priori error bounds, and segment budgeting.

Bounds follow the small-segment expansion of the L1 interpolation error:
per segment it behaves like h^3 |f''| / 12, which sums to

    uniform grid:      (b-a)^2 / (12 N^2) * integral of |f''|
    equalized grid:    1 / (12 N^2) * (integral of |f''|^(1/3))^3

and the best L1 line on a segment beats the interpolant by the fixed
factor 3/8.  The bounds are asymptotic in N: measured errors track them
closely once each segment's curvature is nearly constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PolygonalFunction, TargetFunction
from .partition import LinearTargetError, _density_accuracy, knot_density
from .quadrature import default_tolerance, integrate_segments

__all__ = [
    "BoundEstimate",
    "BEST_L1_FACTOR",
    "l1_distance",
    "per_interval_errors",
    "error_bound",
    "bound_uniform_interpolant",
    "bound_optimized_interpolant",
    "min_segments_for_tolerance",
    "partition_gain",
]

# Best L1 line vs interpolating line, per segment, asymptotically.
BEST_L1_FACTOR = 3.0 / 8.0

BOUND_KINDS = (
    "uniform_interpolant",
    "optimized_interpolant",
    "uniform_best_l1",
    "optimized_best_l1",
)


@dataclass(frozen=True)
class BoundEstimate:
    """An a-priori L1 error bound for one approximant kind."""

    value: float
    kind: str
    n_segments: int
    interval: tuple[float, float]


def _residual(f: TargetFunction, g: PolygonalFunction):
    knots = g.partition.knots
    h = g.partition.widths
    v = g.ordinates

    def fun(x, seg):
        d = (x - knots[seg]) / h[seg]
        return np.asarray(f.eval(x), dtype=float) - ((1.0 - d) * v[seg] + d * v[seg + 1])

    return fun


def per_interval_errors(
    f: TargetFunction, g: PolygonalFunction, *, tol: float | None = None
) -> np.ndarray:
    """L1 error contributed by each segment of g's partition."""
    _check_domains(f, g)
    if tol is None:
        tol = default_tolerance()
    return integrate_segments(
        _residual(f, g), g.partition.knots, abs_tol=tol, absolute=True
    )


def l1_distance(f: TargetFunction, g: PolygonalFunction, *, tol: float | None = None) -> float:
    """Integral of |f - g| over g's interval."""
    return float(np.sum(per_interval_errors(f, g, tol=tol)))


def _curvature_integrals(f: TargetFunction, a: float, b: float, tol: float):
    """(integral of |f''|, integral of |f''|^(1/3)) over [a, b]."""
    edges = np.linspace(a, b, 65)
    rel, floor = _density_accuracy(f.second_derivative_kind == "numeric", a, b)
    rel = max(rel, 1e-10)
    total_abs = integrate_segments(
        lambda x, _s: np.asarray(f.d2(x), dtype=float),
        edges,
        abs_tol=tol,
        rel_tol=rel,
        resolve_floor=floor,
        absolute=True,
    )
    total_density = integrate_segments(
        lambda x, _s: knot_density(f, x),
        edges,
        abs_tol=tol,
        rel_tol=rel,
        resolve_floor=floor,
    )
    return float(np.sum(total_abs)), float(np.sum(total_density))


def error_bound(f: TargetFunction, a: float, b: float, n: int, kind: str) -> BoundEstimate:
    """A-priori L1 error bound for N segments of the given approximant kind."""
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    if n < 1:
        raise ValueError(f"need at least one segment, got {n}")
    _check_interval(f, a, b)
    tol = default_tolerance()
    curv, density = _curvature_integrals(f, a, b, tol)
    if kind.startswith("uniform"):
        value = (b - a) ** 2 / (12.0 * n * n) * curv
    else:
        value = density**3 / (12.0 * n * n)
    if kind.endswith("best_l1"):
        value *= BEST_L1_FACTOR
    return BoundEstimate(value, kind, n, (a, b))


def bound_uniform_interpolant(f: TargetFunction, a: float, b: float, n: int) -> BoundEstimate:
    return error_bound(f, a, b, n, "uniform_interpolant")


def bound_optimized_interpolant(f: TargetFunction, a: float, b: float, n: int) -> BoundEstimate:
    return error_bound(f, a, b, n, "optimized_interpolant")


def min_segments_for_tolerance(
    f: TargetFunction, a: float, b: float, tolerance: float, kind: str
) -> int:
    """Smallest N whose bound meets the tolerance, from the real-valued root.

    The interpolant kinds solve bound(N) = tolerance for real N and round up;
    the best-L1 kinds scale the interpolant root by sqrt(3/8) first, then
    round up.  A linear target needs a single segment.
    """
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    if not tolerance > 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    _check_interval(f, a, b)
    tol = default_tolerance()
    curv, density = _curvature_integrals(f, a, b, tol)
    if kind.startswith("uniform"):
        raw = (b - a) ** 2 * curv / 12.0
    else:
        raw = density**3 / 12.0
    n_real = math.sqrt(raw / tolerance)
    if kind.endswith("best_l1"):
        n_real *= math.sqrt(BEST_L1_FACTOR)
    return max(1, math.ceil(n_real))


def partition_gain(f: TargetFunction, a: float, b: float) -> float:
    """Bound ratio uniform/equalized: how much knot placement alone buys.

    Equals ((b-a)^2 * integral of |f''|) / (integral of |f''|^(1/3))^3,
    which is 1 exactly when |f''| is constant and grows with curvature
    concentration.
    """
    _check_interval(f, a, b)
    tol = default_tolerance()
    curv, density = _curvature_integrals(f, a, b, tol)
    if density == 0.0 or curv == 0.0:
        raise LinearTargetError("gain undefined: |f''| integrates to zero")
    return (b - a) ** 2 * curv / density**3


def _check_interval(f: TargetFunction, a: float, b: float) -> None:
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ValueError(f"invalid interval [{a}, {b}]")
    lo, hi = f.domain
    if a < lo or b > hi:
        raise ValueError(f"[{a}, {b}] outside the target domain [{lo}, {hi}]")


def _check_domains(f: TargetFunction, g: PolygonalFunction) -> None:
    lo, hi = f.domain
    if g.partition.a < lo or g.partition.b > hi:
        raise ValueError(
            f"approximant interval [{g.partition.a}, {g.partition.b}] "
            f"outside the target domain [{lo}, {hi}]"
        )
