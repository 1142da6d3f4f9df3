#!/usr/bin/env python3

"""Tests for scattering module."""

import cmath
import math

import numpy as np
import pytest

from errors import DataQualityError, DomainError
from numerics import SolverSettings, wrap_half_pi
from potentials import QES, CoshKar, PowerLaw, wkb_validity_radius
from scattering import (
    ScatteringAmplitudes,
    alpha_theta_from_parity,
    extract_alpha_theta,
    parity_offset,
    parity_phase_numeric,
    parity_phase_sweep,
    phase_mismatch,
    reflection_sweep,
    signed_parity_gap,
    solve_scattering,
    tt_energies_numeric,
)
from verify import NUMERIC_TT0
from wkb import total_transmission_energies

X4 = PowerLaw(1.0, 2.0)


def test_alpha_theta_inversion():
    alpha, theta = 0.3, 0.7
    amps = ScatteringAmplitudes.from_coefficients(
        1.0, -1j * math.sin(alpha) * cmath.exp(1j * theta), math.cos(alpha) * cmath.exp(1j * theta)
    )
    assert amps.residual_unitarity == pytest.approx(0.0, abs=1e-15)
    assert amps.unitarity_phase == pytest.approx(0.0, abs=1e-15)
    assert phase_mismatch(amps) == pytest.approx(0.0, abs=1e-12)
    assert extract_alpha_theta(amps) == pytest.approx((alpha, theta))


def test_extract_rejects_non_unitary_amplitudes():
    amps = ScatteringAmplitudes.from_coefficients(1.0, 0.5, 0.5)
    with pytest.raises(DataQualityError) as excinfo:
        extract_alpha_theta(amps)
    assert excinfo.value.residual == pytest.approx(0.5)


@pytest.mark.parametrize("pot,E", [(X4, 3.0), (X4, 0.8), (X4, -1.0), (QES(2.0, 2), 0.0), (CoshKar(1.0, 1.0), 0.5)],
                         ids=["x4-above", "x4-low", "x4-below", "qes", "coshkar"])
def test_scattering_conserves_flux(pot, E):
    amps = solve_scattering(pot, E)
    assert amps.residual_unitarity <= 1e-6
    assert abs(amps.unitarity_phase) <= 1e-6
    assert amps.x_max == pytest.approx(wkb_validity_radius(pot, E, 0.005))


def test_tunneling_suppresses_transmission():
    deep = solve_scattering(X4, -4.0)
    shallow = solve_scattering(X4, -1.0)
    assert deep.transmission_probability < shallow.transmission_probability < 1.0


def test_reflection_is_small_at_total_transmission():
    E0 = total_transmission_energies(1.0, 2.0, 1)[0]
    assert solve_scattering(X4, E0).reflection_probability < 0.05


def test_parity_phase_is_independent_of_x_max():
    settings = SolverSettings()
    for parity in ("even", "odd"):
        base = parity_phase_numeric(X4, 3.0, parity, settings)
        doubled = parity_phase_numeric(X4, 3.0, parity, settings,
                                       x_max=2.0 * wkb_validity_radius(X4, 3.0, settings.wkb_eps))
        assert abs(wrap_half_pi(doubled.delta - base.delta)) < 1e-4


def test_parity_phase_rejects_unknown_parity():
    with pytest.raises(DomainError):
        parity_phase_numeric(X4, 3.0, "up")


def test_parity_route_agrees_with_scattering():
    """alpha from the two parity phases equals arccos|T| from the complex route."""
    for E in (0.8, 3.0):
        alpha_parity, _ = alpha_theta_from_parity(X4, E)
        alpha_scatter, _ = extract_alpha_theta(solve_scattering(X4, E))
        assert alpha_parity == pytest.approx(alpha_scatter, abs=1e-3)


def test_theta_is_small_at_higher_total_transmission_energies():
    for E in (5.9558, 11.769):
        _, theta = alpha_theta_from_parity(X4, E)
        assert abs(theta) < 0.1


def test_parity_offsets_are_small_above_the_barrier():
    for parity in ("even", "odd"):
        assert abs(parity_offset(X4, 6.0, parity)) < 0.25


def test_signed_gap_changes_sign_at_total_transmission():
    E0 = total_transmission_energies(1.0, 2.0, 1)[0]
    assert signed_parity_gap(X4, 0.8 * E0) * signed_parity_gap(X4, 1.2 * E0) < 0.0


def test_numeric_alpha_is_continuous_across_the_barrier_top():
    below, _ = alpha_theta_from_parity(X4, -0.01)
    above, _ = alpha_theta_from_parity(X4, 0.01)
    assert abs(below - above) < 0.05


def test_phase_sweep_is_continuous():
    energies = np.linspace(-2.0, 8.0, 21)
    sweep = parity_phase_sweep(X4, energies, "even", jobs=2)
    assert [p.E for p in sweep] == pytest.approx(list(energies))
    steps = np.diff([p.delta for p in sweep])
    assert np.all(np.abs(steps) < 0.5 * math.pi)


def test_phase_sweep_needs_increasing_energies():
    with pytest.raises(DomainError):
        parity_phase_sweep(X4, [2.0, 1.0], "even")


@pytest.mark.slow
def test_reflection_minima_match_total_transmission():
    """The closed form is 7% low for the lowest mode and within 5% above it."""
    sweep = reflection_sweep(X4, np.linspace(0.5, 13.0, 41), jobs=4)
    assert [a.E for a in sweep] == pytest.approx(list(np.linspace(0.5, 13.0, 41)))
    assert max(a.residual_unitarity for a in sweep) <= 1e-6

    minima = tt_energies_numeric(X4, 0.5, 13.0, samples=41, jobs=4)
    assert len(minima) == 3
    assert minima[0].E == pytest.approx(NUMERIC_TT0, rel=1e-4)
    for found, closed in zip(minima[1:], total_transmission_energies(1.0, 2.0, 3)[1:]):
        assert found.E == pytest.approx(closed, rel=0.05)
    assert all(found.reflection_probability < 0.05 for found in minima)


@pytest.mark.slow
def test_qes_exact_state_energy_is_reflectionless():
    E2 = 0.25 * (4.0 - 5.0) + math.sqrt(5.0)
    assert solve_scattering(QES(2.0, 2), E2).reflection_probability <= 1e-3


def test_tt_energies_numeric_validates_grid():
    with pytest.raises(DomainError):
        tt_energies_numeric(X4, 5.0, 1.0)
