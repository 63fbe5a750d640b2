"""Adaptive Simpson engine: closed forms, kinks, floors, failure paths."""

import numpy as np
import pytest

from polylin.quadrature import (
    QuadratureError,
    default_tolerance,
    integrate,
    integrate_abs,
    integrate_segments,
)


def test_polynomial_and_transcendental_closed_forms():
    assert abs(integrate(lambda x: x**2, 0.0, 1.0) - 1.0 / 3.0) <= 1e-13
    assert abs(integrate(np.sin, 0.0, np.pi) - 2.0) <= 1e-12
    assert abs(integrate(np.exp, 0.0, 1.0) - (np.e - 1.0)) <= 1e-12
    assert abs(integrate(lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0) - np.pi / 4.0) <= 1e-12


def test_absolute_value_with_interior_kink():
    # integral of |x - c| over [0, 1] is (c^2 + (1-c)^2) / 2
    assert abs(integrate_abs(lambda x: x - 0.3, 0.0, 1.0) - 0.29) <= 1e-12
    assert abs(integrate_abs(lambda x: x - 1.0 / 3.0, 0.0, 1.0) - 5.0 / 18.0) <= 1e-12
    assert abs(integrate_abs(np.sin, 0.0, 2.0 * np.pi) - 4.0) <= 1e-11


def test_segment_totals_match_per_segment_antiderivative():
    edges = np.array([0.0, 0.25, 1.0, 2.0])
    out = integrate_segments(lambda x, seg: x**2, edges)
    expected = np.diff(edges**3) / 3.0
    assert out.shape == (3,)
    assert np.max(np.abs(out - expected)) <= 1e-12


def test_multi_component_shares_sample_points():
    edges = np.array([0.0, 0.5, 1.0])
    out = integrate_segments(
        lambda x, seg: np.stack([x, x**2, np.cos(x)], axis=1), edges, ncomp=3
    )
    assert out.shape == (2, 3)
    expected = np.stack(
        [np.diff(edges**2) / 2.0, np.diff(edges**3) / 3.0, np.diff(np.sin(edges))],
        axis=1,
    )
    assert np.max(np.abs(out - expected)) <= 1e-12


def test_segment_index_argument_is_consistent():
    edges = np.array([0.0, 1.0, 3.0])

    def fun(x, seg):
        assert np.all((x >= edges[seg]) & (x <= edges[seg + 1]))
        return np.ones_like(x)

    out = integrate_segments(fun, edges)
    assert np.allclose(out, [1.0, 2.0], atol=1e-13)


def test_scattered_panels_accumulate_by_tag():
    lo = np.array([0.0, 2.0, 0.5, 3.0])
    hi = np.array([0.5, 3.0, 1.0, 3.0])  # last panel zero width
    seg = np.array([0, 1, 0, 1])
    out = integrate_segments(lambda x, s: x, panels=(lo, hi, seg, 2))
    assert abs(out[0] - 0.5) <= 1e-13  # two halves of [0, 1]
    assert abs(out[1] - 2.5) <= 1e-13
    empty = integrate_segments(
        lambda x, s: x, panels=(np.array([1.0]), np.array([1.0]), np.array([0]), 1)
    )
    assert empty[0] == 0.0


def test_relative_tolerance_path():
    big = integrate_segments(
        lambda x, seg: 1e8 * x**2,
        np.array([0.0, 1.0]),
        abs_tol=1e-30,
        rel_tol=1e-9,
    )
    assert abs(big[0] - 1e8 / 3.0) <= 1e-8 * 1e8 / 3.0


def test_steep_sigmoid_ramp_converges():
    # Amplitude-one ramp: value jitter near the transition sits around
    # k * ulp, far above the absolute budget, so acceptance must come from
    # the rounding floor rather than endless bisection.
    k = 1e6
    out = integrate_segments(lambda x, seg: np.tanh(k * (x - 1.0 / 3.0)), np.array([0.0, 1.0]))
    assert abs(out[0] - 1.0 / 3.0) <= 1e-10


def test_resolve_floor_forces_honest_failure_on_rough_integrand():
    edges = np.array([0.0, 1.0])
    c = 1.0 / 3.0
    cusp = lambda x, seg: np.sqrt(np.abs(x - c))
    exact = (2.0 / 3.0) * (c**1.5 + (1.0 - c) ** 1.5)
    fine = integrate_segments(cusp, edges)
    assert abs(fine[0] - exact) <= 1e-11
    # Claiming the integrand is smooth below width 0.2 stops refinement at
    # panels that still carry real cusp error; the residual check must trip.
    with pytest.raises(QuadratureError, match="residual"):
        integrate_segments(cusp, edges, resolve_floor=0.2)


def test_resolve_floor_harmless_on_smooth_integrand():
    out = integrate_segments(lambda x, seg: x**2, np.array([0.0, 1.0]), resolve_floor=0.25)
    assert abs(out[0] - 1.0 / 3.0) <= 1e-12


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError, match="non-finite"):
        integrate(lambda x: np.where(x == 0.0, np.inf, 1.0), 0.0, 1.0)


def test_wrong_shape_integrand_raises():
    with pytest.raises(ValueError, match="shape"):
        integrate_segments(lambda x, seg: np.ones((x.size, 2)), np.array([0.0, 1.0]))


def test_argument_validation():
    edges = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        integrate_segments(lambda x, seg: x, np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        integrate_segments(lambda x, seg: x)
    with pytest.raises(ValueError):
        integrate_segments(lambda x, seg: x, edges, ncomp=2, absolute=True)
    with pytest.raises(ValueError, match="rel_floor"):
        integrate_segments(lambda x, seg: x, edges, rel_floor=(1e-9, 1e-9))
    with pytest.raises(ValueError, match="abs_floor"):
        integrate_segments(lambda x, seg: x, edges, abs_floor=(-1.0,))
    with pytest.raises(ValueError, match="resolve_floor"):
        integrate_segments(lambda x, seg: x, edges, resolve_floor=-0.1)
    with pytest.raises(ValueError, match="hi < lo"):
        integrate_segments(
            lambda x, s: x, panels=(np.array([1.0]), np.array([0.0]), np.array([0]), 1)
        )


def test_default_tolerance_env_override(monkeypatch):
    monkeypatch.delenv("POLYLIN_QUAD_TOL", raising=False)
    assert default_tolerance() == 1e-12
    monkeypatch.setenv("POLYLIN_QUAD_TOL", "1e-9")
    assert default_tolerance() == 1e-9
    monkeypatch.setenv("POLYLIN_QUAD_TOL", "banana")
    with pytest.raises(ValueError, match="POLYLIN_QUAD_TOL"):
        default_tolerance()
    monkeypatch.setenv("POLYLIN_QUAD_TOL", "-1e-9")
    with pytest.raises(ValueError, match="positive"):
        default_tolerance()


def test_loose_tolerance_is_respected():
    exact = np.e - 1.0
    loose = integrate(np.exp, 0.0, 1.0, abs_tol=1e-4)
    assert abs(loose - exact) <= 1e-4
