#!/usr/bin/env python3

"""Tests for numerics module."""

import math

import pytest
from scipy.special import gamma as scipy_gamma

from errors import BracketError, ConfigError, ConvergenceError, DomainError, StiffnessError
from numerics import (
    OdeState,
    QuadratureSpec,
    SolverSettings,
    find_root,
    gamma_fn,
    integrate,
    ordered_map,
    propagate_schrodinger,
    state_wronskian,
    wrap_half_pi,
    wrap_to_pi,
)


@pytest.mark.parametrize("x", [0.1, 0.25, 0.5, 1.0, 1.5, 2.5, 3.0, 7.3, 12.5, 20.0])
def test_gamma_matches_scipy(x):
    """Lanczos gamma agrees with scipy to near machine precision."""
    assert gamma_fn(x) == pytest.approx(scipy_gamma(x), rel=1e-12)


def test_gamma_special_values():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)


def test_gamma_recurrence():
    for x in [0.1 + 0.4 * i for i in range(25)]:
        assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.inf, math.nan])
def test_gamma_rejects_non_positive(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_integrate_finite_interval():
    assert integrate(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)
    assert integrate(math.exp, 1.0, 1.0) == 0.0


def test_integrate_reciprocal_tail():
    assert integrate(lambda x: math.exp(-x), 0.0, math.inf) == pytest.approx(1.0, rel=1e-10)
    assert integrate(lambda x: x ** -2, 1.0, math.inf) == pytest.approx(1.0, rel=1e-10)


def test_integrate_logarithmic_tail():
    """Slow algebraic decay x^(-3/2) through the logarithmic map."""
    spec = QuadratureSpec().with_tail("logarithmic")
    assert integrate(lambda x: (1.0 + x) ** -1.5, 0.0, math.inf, spec) == pytest.approx(2.0, rel=1e-9)


def test_integrate_quadpack_tail():
    spec = QuadratureSpec(tail_substitution="none")
    value = integrate(lambda x: math.exp(-x * x), 0.0, math.inf, spec)
    assert value == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-10)


def test_integrate_is_stable_under_halved_tolerances():
    exact = math.pi / (2.0 * math.sqrt(2.0))
    f = lambda x: 1.0 / (1.0 + x ** 4)
    coarse = integrate(f, 0.0, math.inf, QuadratureSpec(abs_tol=1e-8, rel_tol=1e-8))
    fine = integrate(f, 0.0, math.inf, QuadratureSpec(abs_tol=5e-9, rel_tol=5e-9))
    assert abs(coarse - fine) <= 2e-8
    assert fine == pytest.approx(exact, rel=1e-8)


def test_integrate_reports_divergence():
    spec = QuadratureSpec(max_subdivisions=50)
    with pytest.raises(ConvergenceError) as excinfo:
        integrate(lambda x: 1.0 / x, 0.0, 1.0, spec, operation="unit_integral")
    assert excinfo.value.operation == "unit_integral"
    assert excinfo.value.best_estimate is not None


@pytest.mark.parametrize(
    "kwargs",
    [{"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_subdivisions": 0}, {"tail_substitution": "cubic"}],
)
def test_quadrature_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        QuadratureSpec(**kwargs)


def test_solver_settings_validation():
    with pytest.raises(ConfigError):
        SolverSettings(ode_tol=0.0)
    with pytest.raises(ConfigError):
        SolverSettings(wkb_eps=0.5)
    with pytest.raises(ConfigError):
        SolverSettings(step_fraction=2.0)


def test_settings_from_env(monkeypatch):
    monkeypatch.setenv("SAEXT_ODE_TOL", "1e-8")
    monkeypatch.setenv("SAEXT_WKB_EPS", "0.01")
    monkeypatch.setenv("SAEXT_QUAD_ABS_TOL", "1e-9")
    settings = SolverSettings.from_env()
    assert settings.ode_tol == 1e-8
    assert settings.wkb_eps == 0.01
    assert settings.quad.abs_tol == 1e-9
    assert settings.quad.rel_tol == 1e-10


def test_find_root():
    assert find_root(math.cos, 0.0, 2.0) == pytest.approx(0.5 * math.pi, abs=1e-12)
    assert find_root(lambda x: x - 1.0, 1.0, 3.0) == 1.0


def test_find_root_needs_a_bracket():
    with pytest.raises(BracketError) as excinfo:
        find_root(lambda x: x * x + 1.0, -1.0, 1.0, operation="unit_root")
    assert excinfo.value.operation == "unit_root"


def test_wrapping():
    assert wrap_to_pi(2.0 * math.pi + 0.5) == pytest.approx(0.5)
    assert wrap_to_pi(-0.25) == pytest.approx(-0.25)
    assert wrap_half_pi(math.pi + 0.3) == pytest.approx(0.3)
    assert wrap_half_pi(-0.2) == pytest.approx(-0.2)
    assert -0.5 * math.pi <= wrap_half_pi(17.0) < 0.5 * math.pi


def test_free_propagation():
    """psi'' = -psi from (0, 1, 0) gives cos x in both directions."""
    Q = lambda x: -1.0
    state = propagate_schrodinger(Q, OdeState(0.0, 1.0, 0.0), 2.0)
    assert state.x == 2.0
    assert state.psi.real == pytest.approx(math.cos(2.0), abs=1e-8)
    assert state.dpsi.real == pytest.approx(-math.sin(2.0), abs=1e-8)

    back = propagate_schrodinger(Q, OdeState(0.0, 1.0, 0.0), -3.0)
    assert back.psi.real == pytest.approx(math.cos(3.0), abs=1e-8)


def test_propagates_gaussian_ground_state():
    """psi = exp(-x^2/2) solves psi'' = (x^2 - 1) psi."""
    end = propagate_schrodinger(lambda x: x * x - 1.0, OdeState(0.0, 1.0, 0.0), 1.0)
    assert end.psi.real == pytest.approx(math.exp(-0.5), rel=1e-8)
    assert end.dpsi.real == pytest.approx(-math.exp(-0.5), rel=1e-8)


def test_even_solution_is_even():
    """Independent right and left propagation of the even solution of -x^4 at E = 1."""
    Q = lambda x: -(x ** 4) - 1.0
    start = OdeState(0.0, 1.0, 0.0)
    right = propagate_schrodinger(Q, start, 3.0)
    left = propagate_schrodinger(Q, start, -3.0)
    scale = max(abs(right.psi), abs(right.dpsi))
    assert abs(left.psi - right.psi) <= 1e-7 * scale
    assert abs(left.dpsi + right.dpsi) <= 1e-7 * scale


def test_propagation_conserves_wronskian():
    tol = 1e-10
    Q = lambda x: -(1.0 + x ** 4)
    a = propagate_schrodinger(Q, OdeState(0.0, 1.0, 0.0), 3.0, tol)
    b = propagate_schrodinger(Q, OdeState(0.0, 0.0, 1.0), 3.0, tol)
    assert abs(state_wronskian(a, b) + 1.0) <= 10.0 * tol


def test_propagation_overflow_is_reported():
    with pytest.raises(StiffnessError) as excinfo:
        propagate_schrodinger(lambda x: 1e6, OdeState(0.0, 1.0, 1.0), 1.0, operation="unit_step")
    assert excinfo.value.operation == "unit_step"


def test_ode_state_must_be_finite():
    with pytest.raises(DomainError):
        OdeState(0.0, complex(math.inf, 0.0), 0.0)


@pytest.mark.parametrize("jobs", [1, 4])
def test_ordered_map_keeps_input_order(jobs):
    items = list(range(20))
    assert ordered_map(lambda i: i * i, items, jobs=jobs) == [i * i for i in items]
