#!/usr/bin/env python3

"""Tests for wkb module."""

import cmath
import math

import pytest

from errors import DomainError
from potentials import QES, CoshKar, PowerLaw
from wkb import (
    PhaseTriple,
    coefficients,
    coefficients_by_quadrature,
    complex_turning_points,
    continued_potential,
    gamma_integral,
    phase_triple,
    total_transmission_energies,
    tunneling_beta,
    tunneling_beta_closed_form,
    tunneling_data,
    wkb_alpha_theta,
    wkb_phase,
    wkb_phase_closed_form,
    wkb_reflection_estimate,
)

P_GRID = [1.25, 1.5, 2.0, 3.0, 5.0]


def test_coefficients_at_p_two():
    k = coefficients(2.0)
    assert k.A == pytest.approx(0.8740, abs=1e-3)
    assert k.B == pytest.approx(1.2360498, abs=1e-6)
    assert k.C == pytest.approx(0.8740192, abs=1e-6)


@pytest.mark.parametrize("p", P_GRID)
def test_closed_forms_match_quadrature(p):
    closed, quad = coefficients(p), coefficients_by_quadrature(p)
    assert closed.A == pytest.approx(quad.A, abs=1e-8)
    assert closed.B == pytest.approx(quad.B, abs=1e-8)
    assert closed.C == pytest.approx(quad.C, abs=1e-8)


@pytest.mark.parametrize("p", P_GRID)
def test_c_equals_b_cos(p):
    k = coefficients(p)
    assert k.C == pytest.approx(k.B * math.cos(math.pi / (2.0 * p)), abs=1e-10)


def test_coefficients_need_p_above_one():
    with pytest.raises(DomainError):
        coefficients(1.0)


@pytest.mark.parametrize("a,p", [(1.0, 2.0), (2.0, 1.5), (0.5, 3.0)])
@pytest.mark.parametrize("E", [-3.0, -0.5, 0.7, 4.0])
def test_phase_quadrature_matches_closed_form(a, p, E):
    pot = PowerLaw(a, p)
    assert wkb_phase(pot, E) == pytest.approx(wkb_phase_closed_form(a, p, E), rel=1e-8, abs=1e-10)


def test_phase_at_unit_energy():
    pot = PowerLaw(1.0, 2.0)
    assert wkb_phase(pot, 1.0) == pytest.approx(1.23605, abs=1e-5)
    assert wkb_phase(pot, -1.0) == pytest.approx(-coefficients(2.0).A, rel=1e-8)
    assert wkb_phase(pot, 0.0) == 0.0


@pytest.mark.parametrize("pot", [PowerLaw(1.0, 2.0), QES(2.0, 2), CoshKar(1.0, 1.0)], ids=repr)
def test_phase_increases_with_energy(pot):
    energies = [pot.v_max - 6.0 + 0.75 * i for i in range(17)]
    phis = [wkb_phase(pot, E) for E in energies]
    assert all(b > a for a, b in zip(phis, phis[1:]))


def test_tunneling_beta():
    pot = PowerLaw(1.0, 2.0)
    assert tunneling_beta(pot, -1.0) == pytest.approx(coefficients(2.0).C, rel=1e-8)
    assert tunneling_beta(pot, -5.0) == pytest.approx(tunneling_beta_closed_form(1.0, 2.0, -5.0), rel=1e-8)
    with pytest.raises(DomainError):
        tunneling_beta(pot, 1.0)


def test_alpha_below_the_barrier():
    alpha, theta = wkb_alpha_theta(PowerLaw(1.0, 2.0), -1.0)
    assert alpha == pytest.approx(1.3958, abs=1e-3)
    assert theta == 0.0


def test_alpha_vanishes_at_total_transmission():
    pot = PowerLaw(1.0, 2.0)
    for E in total_transmission_energies(1.0, 2.0, 3):
        alpha, _ = wkb_alpha_theta(pot, E)
        assert alpha == pytest.approx(0.0, abs=1e-9)


def test_alpha_stays_in_range():
    for pot in (PowerLaw(1.0, 2.0), QES(2.0, 2), CoshKar(1.0, 1.0)):
        for E in (pot.v_max - 2.0, pot.v_max + 0.5, pot.v_max + 5.0):
            t = phase_triple(pot, E)
            assert 0.0 <= t.alpha <= 0.5 * math.pi


def test_phase_triple_validates_alpha():
    with pytest.raises(DomainError):
        PhaseTriple(E=1.0, phi=0.0, alpha=2.0, theta=0.0)


def test_total_transmission_energies():
    assert total_transmission_energies(1.0, 2.0, 3) == pytest.approx([1.3765, 5.9558, 11.769], rel=1e-3)
    with pytest.raises(DomainError):
        total_transmission_energies(1.0, 2.0, 0)


def test_power_law_complex_turning_points():
    pot = PowerLaw(1.0, 2.0)
    points = complex_turning_points(pot, 3.0)
    assert len(points) == 2
    assert points[1] == pytest.approx(-points[0].conjugate())
    for z in points:
        assert continued_potential(pot, z) == pytest.approx(3.0, abs=1e-10)


@pytest.mark.parametrize("pot", [QES(2.0, 2), CoshKar(1.0, 1.0), CoshKar(1.0, 2.0)], ids=repr)
def test_complex_turning_points_are_roots(pot):
    E = pot.v_max + 2.0
    points = complex_turning_points(pot, E)
    assert points
    for z in points:
        assert 0.0 < z.imag < math.pi
        assert continued_potential(pot, z) == pytest.approx(E, abs=1e-9)


def test_complex_turning_points_need_energy_above_barrier():
    with pytest.raises(DomainError):
        complex_turning_points(PowerLaw(1.0, 2.0), -1.0)


def test_gamma_integral_closed_form():
    """For -x^4 at E = 1 the root is e^(i pi/4) and gamma = e^(i pi/4) C(2)."""
    z = cmath.exp(0.25j * math.pi)
    gamma = gamma_integral(PowerLaw(1.0, 2.0), 1.0, z)
    assert gamma == pytest.approx(z * coefficients(2.0).C, abs=1e-10)


def test_gamma_integral_is_contour_independent():
    pot = PowerLaw(1.0, 2.0)
    z = complex_turning_points(pot, 4.0)[0]
    assert gamma_integral(pot, 4.0, z, bend=0.1) == pytest.approx(gamma_integral(pot, 4.0, z), abs=1e-9)


def test_gamma_integral_mirror_symmetry():
    pot = QES(2.0, 2)
    E = pot.v_max + 1.5
    z = complex_turning_points(pot, E)[0]
    assert gamma_integral(pot, E, -z.conjugate()) == pytest.approx(-gamma_integral(pot, E, z).conjugate())


def test_reflection_estimate_matches_power_law_formula():
    pot = PowerLaw(1.0, 2.0)
    for E in (2.0, 4.5):
        kc = E ** 0.75 * coefficients(2.0).C
        expected = (2.0 * math.pi / 3.0) * abs(math.cos(2.0 * kc * math.cos(math.pi / 4.0))) \
            * math.exp(-2.0 * kc * math.sin(math.pi / 4.0))
        assert abs(wkb_reflection_estimate(pot, E)) == pytest.approx(expected, rel=1e-8)


def test_tunneling_data():
    pot = PowerLaw(1.0, 2.0)
    below = tunneling_data(pot, -1.0)
    assert below.beta == pytest.approx(coefficients(2.0).C, rel=1e-8)
    assert below.complex_turning_points == []

    above = tunneling_data(pot, 2.0)
    assert above.beta == 0.0
    assert len(above.gammas) == len(above.complex_turning_points) == 2
