"""Batched adaptive Simpson quadrature over segmented intervals.

One engine serves every integral in the package: panels are refined in
lockstep across all segments, so the integrand is always evaluated on one
numpy array per refinement level.  Integrands may be vector valued (several
components sharing the same sample points), and absolute-value integrands
get sign-aware refinement: a panel whose sampled values change sign is
bisected until the sign is resolved or the panel is negligibly narrow.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "QuadratureError",
    "default_tolerance",
    "integrate",
    "integrate_abs",
    "integrate_segments",
]


class QuadratureError(RuntimeError):
    """Adaptive refinement failed (non-finite integrand or tolerance not met)."""


# Rounding floor: no panel is asked to beat ~1000 ulps of its own value
# scale, which is where Richardson differences drown in cancellation noise
# for large-magnitude integrands (e.g. sharpness-scaled weights).
NOISE_EPS = 2e-13
# Refinement abort: fail loudly rather than exhaust memory.
PANEL_CAP = 4_000_000


def default_tolerance() -> float:
    """Absolute tolerance target; POLYLIN_QUAD_TOL overrides the built-in 1e-12."""
    raw = os.environ.get("POLYLIN_QUAD_TOL", "").strip()
    if raw:
        try:
            tol = float(raw)
        except ValueError as exc:
            raise ValueError(f"POLYLIN_QUAD_TOL is not a number: {raw!r}") from exc
        if not tol > 0.0:
            raise ValueError(f"POLYLIN_QUAD_TOL must be positive, got {tol}")
        return tol
    return 1e-12


def _call(fun, x, seg, ncomp):
    vals = np.asarray(fun(x, seg), dtype=float)
    if ncomp == 1:
        vals = vals.reshape(x.size, 1)
    if vals.shape != (x.size, ncomp):
        raise ValueError(f"integrand returned shape {vals.shape}, expected ({x.size}, {ncomp})")
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand value")
    return vals


def integrate_segments(
    fun,
    edges=None,
    *,
    panels=None,
    ncomp: int = 1,
    abs_tol: float | None = None,
    rel_tol: float = 0.0,
    abs_floor=None,
    rel_floor=None,
    resolve_floor=None,
    absolute: bool = False,
    min_levels: int = 2,
    max_levels: int = 52,
):
    """Integrate ``fun`` over each segment, returning per-segment totals.

    fun(x, seg) -> (npts,) or (npts, ncomp); ``seg`` carries the segment index
    of every sample point so local quantities (barycentric coordinates, local
    ordinates) can be formed without searching.

    Segments come either from ``edges`` (array of N+1 breakpoints -> N
    segments) or from ``panels`` = (lo, hi, seg, nseg) for scattered panels
    tagged with destination indices.  The absolute error is budgeted across
    panels in proportion to width, so the summed error is below
    max(abs_tol, rel_tol * |total|).

    ``abs_floor`` and ``rel_floor`` optionally give one nonnegative number
    per component, loosening that component's acceptance without touching
    the others: abs_floor[c] raises component c's absolute tolerance above
    ``abs_tol``, and rel_floor[c] accepts a panel's component c once its
    error drops below rel_floor[c] * |panel integral|.  Use them for
    components whose magnitude grows with a sharpness parameter and that
    are only needed to modest accuracy, so the shared absolute budget does
    not force them into cancellation-noise-limited refinement.

    ``resolve_floor`` declares the caller's finest structure scale: a width
    (scalar, or one per segment) below which the integrand is known to be
    smooth, so a panel that narrow still refusing its budget is chasing
    rounding jitter.  Such panels are accepted with their residual recorded,
    which keeps noise from doubling the panel population all the way down to
    ulp-wide panels.  Residuals are totalled per component and checked
    against each component's own allowance at the end.

    With ``absolute=True`` (ncomp must be 1) the result is the integral of
    |fun| while sign changes force bisection.

    Returns an (nseg,) array, or (nseg, ncomp) when ncomp > 1.
    """
    if abs_tol is None:
        abs_tol = default_tolerance()
    if absolute and ncomp != 1:
        raise ValueError("absolute integration is scalar only")
    floors = None
    if rel_floor is not None:
        floors = np.asarray(rel_floor, dtype=float).reshape(1, -1)
        if floors.size != ncomp or np.any(floors < 0.0):
            raise ValueError("rel_floor needs one nonnegative entry per component")
        if not np.any(floors > 0.0):
            floors = None
    abs_floors = None
    if abs_floor is not None:
        abs_floors = np.asarray(abs_floor, dtype=float).reshape(1, -1)
        if abs_floors.size != ncomp or np.any(abs_floors < 0.0):
            raise ValueError("abs_floor needs one nonnegative entry per component")
        if not np.any(abs_floors > 0.0):
            abs_floors = None
    res_floor = None
    if resolve_floor is not None:
        res_floor = np.asarray(resolve_floor, dtype=float)
        if res_floor.ndim not in (0, 1) or np.any(res_floor < 0.0):
            raise ValueError("resolve_floor must be a nonnegative width")

    if edges is not None:
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        lo = edges[:-1].copy()
        hi = edges[1:].copy()
        seg = np.arange(edges.size - 1)
        nseg = edges.size - 1
    elif panels is not None:
        lo, hi, seg, nseg = panels
        lo = np.asarray(lo, dtype=float).copy()
        hi = np.asarray(hi, dtype=float).copy()
        seg = np.asarray(seg, dtype=np.intp).copy()
        if np.any(hi < lo):
            raise ValueError("panel with hi < lo")
    else:
        raise ValueError("pass edges or panels")

    totals = np.zeros((nseg, ncomp))
    # Zero-width panels contribute nothing; drop them up front.
    keep = hi > lo
    lo, hi, seg = lo[keep], hi[keep], seg[keep]
    if lo.size == 0:
        return totals[:, 0] if ncomp == 1 else totals

    total_width = float(np.sum(hi - lo))
    kink_floor = total_width * 2.0**-40

    mid = 0.5 * (lo + hi)
    f_lo = _call(fun, lo, seg, ncomp)
    f_mid = _call(fun, mid, seg, ncomp)
    f_hi = _call(fun, hi, seg, ncomp)

    def simpson(w, va, vm, vb):
        body = np.abs if absolute else (lambda z: z)
        return (w / 6.0)[:, None] * (body(va) + 4.0 * body(vm) + body(vb))

    S = simpson(hi - lo, f_lo, f_mid, f_hi)
    leftover = np.zeros(ncomp)

    for level in range(max_levels + 1):
        if lo.size == 0:
            break
        if lo.size > PANEL_CAP:
            raise QuadratureError(
                f"refinement reached {lo.size} active panels; "
                "integrand is too rough for the requested tolerance"
            )
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        pts = np.concatenate([lm, rm])
        segs2 = np.concatenate([seg, seg])
        vals = _call(fun, pts, segs2, ncomp)
        f_lm, f_rm = vals[: lo.size], vals[lo.size :]

        half = 0.5 * (hi - lo)
        S_l = simpson(half, f_lo, f_lm, f_mid)
        S_r = simpson(half, f_mid, f_rm, f_hi)
        S2 = S_l + S_r
        err = (S2 - S) / 15.0

        # Width-proportional error budget, optionally scaled by a running
        # estimate of the total when a relative tolerance is requested.
        tol_line = abs_tol
        if rel_tol > 0.0:
            estimate = float(np.sum(totals[:, 0]) + np.sum(S2[:, 0]))
            tol_line = max(abs_tol, rel_tol * abs(estimate))
        w = hi - lo
        thr = (tol_line / total_width) * w[:, None]
        if abs_floors is not None:
            thr = np.maximum(thr, (abs_floors / total_width) * w[:, None])
        # The budget is raised by a rounding floor: Richardson differences
        # below NOISE_EPS times the sampled value scale are cancellation
        # noise, and chasing them refines forever without gaining a digit.
        vmax = np.abs(f_lo)
        for arr in (f_lm, f_mid, f_rm, f_hi):
            vmax = np.maximum(vmax, np.abs(arr))
        limit = np.maximum(thr, NOISE_EPS * vmax * w[:, None])
        if floors is not None:
            limit = np.maximum(limit, floors * np.abs(S2))
        ok = np.all(np.abs(err) <= limit, axis=1)

        if absolute:
            sgn = np.sign(np.concatenate(
                [f_lo, f_lm, f_mid, f_rm, f_hi], axis=1))
            changes = (sgn.max(axis=1) > 0) & (sgn.min(axis=1) < 0)
            # A mixed panel whose whole sampled mass sits inside its own
            # budget cannot move the total by more than that budget, so the
            # crossing need not be located; near-zero residuals otherwise
            # drag the bisection into their rounding noise.
            changes &= vmax[:, 0] * w > thr[:, 0]
            ok &= ~changes | (hi - lo <= kink_floor)

        if level < min_levels:
            ok &= False

        # A panel too narrow to split (midpoint collides with an endpoint, or
        # width below the kink floor or the caller's structure scale, where
        # refinement only chases rounding jitter) cannot improve; accept it
        # and record the residual error per component.
        narrow = w <= kink_floor
        if res_floor is not None:
            narrow |= w <= (res_floor if res_floor.ndim == 0 else res_floor[seg])
        degenerate = (lm <= lo) | (rm >= hi) | narrow
        if level == max_levels:
            degenerate |= True
        stuck = degenerate & ~ok
        if np.any(stuck):
            leftover += np.sum(np.abs(err[stuck]), axis=0)
            ok |= degenerate

        if np.any(ok):
            contrib = S2[ok] + err[ok]
            idx = seg[ok]
            for c in range(ncomp):
                totals[:, c] += np.bincount(idx, weights=contrib[:, c], minlength=nseg)

        bad = ~ok
        if not np.any(bad):
            lo = lo[:0]
            break
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        seg = np.concatenate([seg[bad], seg[bad]])
        f_lo = np.concatenate([f_lo[bad], f_mid[bad]])
        f_hi = np.concatenate([f_mid[bad], f_hi[bad]])
        f_mid = np.concatenate([f_lm[bad], f_rm[bad]])
        mid = np.concatenate([lm[bad], rm[bad]])
        S = np.concatenate([S_l[bad], S_r[bad]])

    # Residuals are judged per component against that component's own
    # allowance, so a harmless relative-floor remainder in one component
    # cannot masquerade as a failure of the absolute-budget components.
    scale = np.sum(np.abs(totals), axis=0)
    allow = np.maximum(abs_tol, rel_tol * scale)
    if abs_floors is not None:
        allow = np.maximum(allow, abs_floors[0])
    if floors is not None:
        allow = np.maximum(allow, floors[0] * scale)
    if np.any(leftover > 10.0 * allow):
        c = int(np.argmax(leftover / allow))
        raise QuadratureError(
            f"residual error {leftover[c]:.3e} in component {c} "
            "above tolerance after refinement"
        )
    return totals[:, 0] if ncomp == 1 else totals


def integrate(fun, a: float, b: float, *, abs_tol=None, rel_tol=0.0, init_panels=8) -> float:
    """Integral of a scalar integrand over [a, b]; fun takes one array argument."""
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    edges = np.linspace(a, b, init_panels + 1)
    parts = integrate_segments(
        lambda x, _s: fun(x), edges, abs_tol=abs_tol, rel_tol=rel_tol
    )
    return float(np.sum(parts))


def integrate_abs(fun, a: float, b: float, *, abs_tol=None, rel_tol=0.0, init_panels=8) -> float:
    """Integral of |fun| over [a, b] with sign-aware refinement of the panels."""
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    edges = np.linspace(a, b, init_panels + 1)
    parts = integrate_segments(
        lambda x, _s: fun(x), edges, abs_tol=abs_tol, rel_tol=rel_tol, absolute=True
    )
    return float(np.sum(parts))
