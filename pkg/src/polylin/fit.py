"""Polygonal approximants on a fixed partition.

Three fits, in increasing cost: the interpolant (sample at the knots), the
least-squares projection (tridiagonal normal equations), and the least
absolute deviation fit.  The L1 cost is nonsmooth, so the latter minimizes
a smoothed surrogate whose sign function is tanh(k * residual), sharpening
k over a fixed schedule; each stage runs damped Newton iterations warm
started from the previous stage, with the least-squares projection as the
initial guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import thomas
from .analysis import l1_distance
from .core import Partition, PolygonalFunction, TargetFunction, from_samples
from .quadrature import QuadratureError, default_tolerance, integrate_segments

__all__ = [
    "FitOptions",
    "FitReport",
    "interpolant",
    "l2_projection",
    "best_l1_fit",
    "best_l1_segment",
    "smoothed_cost",
    "smoothed_gradient",
    "solve_tridiagonal",
]

solve_tridiagonal = thomas

# Hessian regularization: start at this multiple of ||H||_inf, double on
# breakdown or non-descent, give up past this cap.
REG_INIT = 1e-12
REG_CAP = 1e8
# Line search: halve at most this many times before declaring a stall.
MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class FitOptions:
    """Knobs for the least-absolute-deviation solve.

    ``k_schedule`` lists dimensionless sharpness multipliers; the effective
    smoothing of each stage is multiplier * smoothing_k * N/(b - a), so the
    transition width of the smoothed sign shrinks with the segment width.
    ``max_newton_iters`` caps iterations per stage.  ``quadrature_tol`` is
    the total integration budget (split per segment); None defers to the
    package default (see POLYLIN_QUAD_TOL).
    """

    smoothing_k: float = 1.0
    k_schedule: tuple[float, ...] = (1e2, 1e3, 1e4, 1e5)
    param_tol: float = 1e-16
    cost_tol: float = 1e-10
    max_newton_iters: int = 50
    quadrature_tol: float | None = None

    def __post_init__(self) -> None:
        if not self.smoothing_k > 0:
            raise ValueError("smoothing_k must be positive")
        ks = tuple(float(k) for k in self.k_schedule)
        if not ks or any(k <= 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("k_schedule must be positive and strictly increasing")
        object.__setattr__(self, "k_schedule", ks)
        if not (self.param_tol > 0 and self.cost_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")
        if self.quadrature_tol is not None and not self.quadrature_tol > 0:
            raise ValueError("quadrature_tol must be positive")


@dataclass(frozen=True)
class FitReport:
    """Outcome of a least-absolute-deviation solve."""

    iterations: int
    final_cost: float
    final_gradient_norm: float
    converged: bool
    function_evals: int
    stage_function_evals: tuple[int, ...] = ()


def interpolant(f: TargetFunction, p: Partition) -> PolygonalFunction:
    """Polygonal interpolant: ordinates are f at the knots."""
    _check_partition_domain(f, p)
    return from_samples(p, f)


def l2_projection(f: TargetFunction, p: Partition, *, tol: float | None = None) -> PolygonalFunction:
    """Least-squares polygonal fit via the tridiagonal normal equations.

    The nodal-basis Gramian has rows h/6 * [1, 4, 1] scaled by the local
    segment widths (halved at the ends); the load vector needs one
    two-component quadrature pass over the segments.
    """
    _check_partition_domain(f, p)
    if tol is None:
        tol = default_tolerance()
    h = p.widths
    n = p.n_segments
    diag = np.empty(n + 1)
    diag[0] = h[0] / 3.0
    diag[-1] = h[-1] / 3.0
    if n > 1:
        diag[1:-1] = (h[:-1] + h[1:]) / 3.0
    off = h / 6.0

    knots = p.knots

    def load(x, seg):
        d = (x - knots[seg]) / h[seg]
        fx = np.asarray(f.eval(x), dtype=float)
        return np.stack([fx * (1.0 - d), fx * d], axis=1)

    try:
        parts = integrate_segments(load, knots, ncomp=2, abs_tol=tol)
    except QuadratureError as exc:
        raise QuadratureError(f"load-vector quadrature failed: {exc}") from exc
    b = np.zeros(n + 1)
    b[:-1] += parts[:, 0]
    b[1:] += parts[:, 1]

    c = thomas(off, diag, off, b)
    return PolygonalFunction(p, c)


# -- smoothed L1 machinery ---------------------------------------------------


def _softabs(eps: np.ndarray, k: float) -> np.ndarray:
    # (1/k) log cosh(k eps), written to avoid overflow; antiderivative of tanh.
    z = k * np.abs(eps)
    return np.abs(eps) + (np.log1p(np.exp(-2.0 * z)) - np.log(2.0)) / k


def _terms(f, p, v, k, tol, with_derivatives):
    """Per-segment integrals of the smoothed cost and, optionally, the
    pieces that assemble its gradient and tridiagonal Hessian."""
    knots = p.knots
    h = p.widths
    n = p.n_segments
    ncomp = 6 if with_derivatives else 1

    def integrand(x, seg):
        d = (x - knots[seg]) / h[seg]
        eps = np.asarray(f.eval(x), dtype=float) - ((1.0 - d) * v[seg] + d * v[seg + 1])
        if not with_derivatives:
            return _softabs(eps, k)
        t = np.tanh(k * eps)
        w = k * (1.0 - t * t)  # k sech^2(k eps)
        return np.stack(
            [
                _softabs(eps, k),
                t * (1.0 - d),
                t * d,
                w * (1.0 - d) ** 2,
                w * (1.0 - d) * d,
                w * d * d,
            ],
            axis=1,
        )

    # Component budgets: the cost integral keeps the full absolute tolerance
    # for trustworthy line-search comparisons; gradient components answer to
    # the stationarity test at ten times that, which keeps sigmoid-band
    # rounding jitter inside budget; curvature components scale like k, only
    # steer Newton directions, and so get a relative floor.
    abs_floors = (0.0, 10.0 * tol, 10.0 * tol, 0.0, 0.0, 0.0)
    rel_floors = (0.0, 0.0, 0.0, 1e-9, 1e-9, 1e-9)
    out = integrate_segments(
        integrand,
        knots,
        ncomp=ncomp,
        abs_tol=tol,
        abs_floor=abs_floors if with_derivatives else None,
        rel_floor=rel_floors if with_derivatives else None,
        resolve_floor=_structure_scale(f, p, v, k),
    )
    return out if with_derivatives else out.reshape(n, 1)


def _structure_scale(f, p, v, k):
    """Per-segment width of the sharpest feature the smoothed integrands can
    hold: the sigmoid transition band 1/(k |residual slope|), capped by the
    segment itself, with margin for Simpson to resolve it to rounding noise."""
    knots = p.knots
    h = p.widths
    mids = knots[:-1] + 0.5 * h
    e_lo = np.asarray(f.eval(knots[:-1]), dtype=float) - v[:-1]
    e_mid = np.asarray(f.eval(mids), dtype=float) - 0.5 * (v[:-1] + v[1:])
    e_hi = np.asarray(f.eval(knots[1:]), dtype=float) - v[1:]
    slope = np.maximum(np.abs(e_mid - e_lo), np.abs(e_hi - e_mid)) / (0.5 * h)
    band = np.full_like(h, np.inf)
    np.divide(1.0, k * slope, out=band, where=slope > 0.0)
    return np.minimum(h, band) / 64.0


def _assemble(parts: np.ndarray, n: int):
    cost = float(np.sum(parts[:, 0]))
    g = np.zeros(n + 1)
    g[:-1] -= parts[:, 1]
    g[1:] -= parts[:, 2]
    diag = np.zeros(n + 1)
    diag[:-1] += parts[:, 3]
    diag[1:] += parts[:, 5]
    off = parts[:, 4].copy()
    return cost, g, diag, off


def smoothed_cost(f: TargetFunction, p: Partition, v, k: float, *, tol: float | None = None) -> float:
    """Smoothed L1 cost of ordinates v at sharpness k."""
    v = np.asarray(v, dtype=float)
    if tol is None:
        tol = default_tolerance()
    parts = _terms(f, p, v, k, tol, False)
    return float(np.sum(parts[:, 0]))


def smoothed_gradient(f: TargetFunction, p: Partition, v, k: float, *, tol: float | None = None) -> np.ndarray:
    """Gradient of the smoothed L1 cost with respect to the ordinates."""
    v = np.asarray(v, dtype=float)
    if tol is None:
        tol = default_tolerance()
    parts = _terms(f, p, v, k, tol, True)
    _, g, _, _ = _assemble(parts, p.n_segments)
    return g


def best_l1_fit(
    f: TargetFunction, p: Partition, opts: FitOptions | None = None
) -> tuple[PolygonalFunction, FitReport]:
    """Least-absolute-deviation polygonal fit on a fixed partition.

    Returns the fitted function and a report; ``converged`` means the final
    smoothed gradient's infinity norm reached cost_tol.  Divergence does not
    raise: the best iterate found is returned with converged=False.
    """
    _check_partition_domain(f, p)
    if opts is None:
        opts = FitOptions()
    tol = opts.quadrature_tol if opts.quadrature_tol is not None else default_tolerance()
    n = p.n_segments
    span = p.b - p.a
    v = l2_projection(f, p, tol=tol).ordinates.copy()

    total_evals = 0
    total_iters = 0
    stage_evals: list[int] = []
    grad_norm = np.inf
    converged = False

    g = np.zeros(n + 1)
    for mult in opts.k_schedule:
        k = mult * opts.smoothing_k * n / span
        evals = 0

        cost, g, diag, off = _assemble(_terms(f, p, v, k, tol, True), n)
        evals += 1
        converged = False
        for _ in range(opts.max_newton_iters):
            grad_norm = float(np.max(np.abs(g)))
            if grad_norm <= opts.cost_tol:
                converged = True
                break

            step = _newton_step(g, diag, off)
            if step is None:
                break
            total_iters += 1
            gTs = float(np.dot(g, step))

            # Full Newton step first (gradient and Hessian come along for
            # free); on rejection backtrack with cost-only evaluations.
            v_try = v + step
            full = _assemble(_terms(f, p, v_try, k, tol, True), n)
            cost_try, g_try, diag_try, off_try = full
            evals += 1
            slack = 1e-14 * abs(cost)
            if cost_try <= cost + 1e-4 * gTs + slack:
                moved = float(np.max(np.abs(step)))
            else:
                alpha = 0.5
                accepted = False
                for _bt in range(MAX_BACKTRACKS):
                    v_try = v + alpha * step
                    cost_try = float(np.sum(_terms(f, p, v_try, k, tol, False)))
                    evals += 1
                    if cost_try <= cost + 1e-4 * alpha * gTs + slack:
                        accepted = True
                        break
                    alpha *= 0.5
                if not accepted:
                    # Steeply nonquadratic region: keep the full step anyway
                    # if it at least shrinks the gradient, else give up.
                    if float(np.max(np.abs(full[1]))) < grad_norm:
                        v = v + step
                        cost, g, diag, off = full
                        continue
                    break
                moved = float(np.max(np.abs(alpha * step)))
                cost_try, g_try, diag_try, off_try = _assemble(_terms(f, p, v_try, k, tol, True), n)
                evals += 1

            v, cost, g, diag, off = v_try, cost_try, g_try, diag_try, off_try
            if moved <= opts.param_tol:
                grad_norm = float(np.max(np.abs(g)))
                converged = grad_norm <= opts.cost_tol
                break
        else:
            grad_norm = float(np.max(np.abs(g)))
            converged = grad_norm <= opts.cost_tol

        total_evals += evals
        stage_evals.append(evals)

    grad_norm = float(np.max(np.abs(g)))
    result = PolygonalFunction(p, v)
    final_cost = l1_distance(f, result, tol=tol)
    report = FitReport(
        iterations=total_iters,
        final_cost=final_cost,
        final_gradient_norm=grad_norm,
        converged=converged,
        function_evals=total_evals,
        stage_function_evals=tuple(stage_evals),
    )
    return result, report


def _newton_step(g, diag, off):
    """Solve (H + lam I) s = -g with escalating regularization; None if hopeless."""
    scale = float(np.max(np.abs(diag)) + np.max(np.abs(off), initial=0.0))
    if scale == 0.0:
        return None
    lam = REG_INIT * scale
    while lam <= REG_CAP * scale:
        try:
            s = thomas(off, diag + lam, off, -g)
        except np.linalg.LinAlgError:
            lam *= 2.0
            continue
        if np.all(np.isfinite(s)) and float(np.dot(g, s)) < 0.0:
            return s
        lam *= 2.0
    return None


def best_l1_segment(
    f: TargetFunction, x_lo: float, x_hi: float, *, tol: float | None = None
) -> tuple[float, float, float]:
    """Best L1 line on one segment, by interpolating f at the quarter points.

    For f with one sign of curvature on the segment, the optimal line meets f
    at x_lo + h/4 and x_lo + 3h/4.  Returns the endpoint displacements from f
    (line minus f at each end) and the resulting L1 error.
    """
    if not x_hi > x_lo:
        raise ValueError(f"degenerate segment [{x_lo}, {x_hi}]")
    lo, hi = f.domain
    if x_lo < lo or x_hi > hi:
        raise ValueError(f"segment [{x_lo}, {x_hi}] outside the target domain [{lo}, {hi}]")
    if tol is None:
        tol = default_tolerance()
    h = x_hi - x_lo
    q1 = x_lo + 0.25 * h
    q2 = x_lo + 0.75 * h
    y1 = float(f.eval(np.asarray(q1)))
    y2 = float(f.eval(np.asarray(q2)))
    slope = (y2 - y1) / (q2 - q1)

    def line(x):
        return y1 + slope * (x - q1)

    dy_lo = line(x_lo) - float(f.eval(np.asarray(x_lo)))
    dy_hi = line(x_hi) - float(f.eval(np.asarray(x_hi)))
    err = integrate_segments(
        lambda x, _s: np.asarray(f.eval(x), dtype=float) - line(x),
        np.linspace(x_lo, x_hi, 9),
        abs_tol=tol,
        absolute=True,
    )
    return dy_lo, dy_hi, float(np.sum(err))


def _check_partition_domain(f: TargetFunction, p: Partition) -> None:
    lo, hi = f.domain
    if p.a < lo or p.b > hi:
        raise ValueError(f"partition [{p.a}, {p.b}] outside the target domain [{lo}, {hi}]")
