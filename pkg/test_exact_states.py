#!/usr/bin/env python3

"""Tests for exact_states module."""

import math

import numpy as np
import pytest

from errors import DomainError
from exact_states import (
    CoshPowerIntegral,
    koley_kar_pair,
    qes_energies,
    qes_movers,
    qes_states,
    qes_wronskian_closed_forms,
    qes_wronskian_table,
    schrodinger_residual,
    wronskian_at,
    wronskian_limits,
)
from potentials import QES, CoshKar

WRONSKIANS_B2 = {
    ("psi1+", "psi1-"): -0.3819660,
    ("psi1+", "psi2-"): 1.0,
    ("psi2+", "psi1-"): 1.0,
    ("psi2+", "psi2-"): -2.6180340,
    ("psi1+", "psi2+"): 0.0,
    ("psi1-", "psi2-"): 0.0,
}


def test_qes_energies():
    assert qes_energies(2.0) == pytest.approx((-2.4860680, 1.9860680), abs=1e-7)


def test_states_carry_their_energies():
    states = qes_states(2.0)
    e1, e2 = qes_energies(2.0)
    assert states["psi1+"].E == states["psi1-"].E == e1
    assert states["psi2+"].E == states["psi2-"].E == e2


@pytest.mark.parametrize("label", ["psi1+", "psi1-", "psi2+", "psi2-"])
def test_qes_states_solve_the_equation(label):
    state = qes_states(2.0)[label]
    assert schrodinger_residual(state, QES(2.0, 2), state.E) <= 1e-8


@pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
def test_qes_states_for_other_b(b):
    for state in qes_states(b).values():
        assert schrodinger_residual(state, QES(b, 2), state.E) <= 1e-8


def test_residual_detects_a_wrong_energy():
    state = qes_states(2.0)["psi1+"]
    assert schrodinger_residual(state, QES(2.0, 2), state.E + 0.1) > 1e-3


def test_residual_grid_is_bounded():
    state = qes_states(2.0)["psi1+"]
    with pytest.raises(DomainError):
        schrodinger_residual(state, QES(2.0, 2), state.E, grid=[0.0, 7.0])


def test_qes_state_parity():
    states = qes_states(2.0)
    for x in (0.3, 1.2, 2.5):
        assert states["psi1+"].value(-x) == pytest.approx(states["psi1+"].value(x))
        assert states["psi2-"].value(-x) == pytest.approx(-states["psi2-"].value(x))


def test_closed_form_second_derivative_matches_finite_difference():
    state = qes_states(2.0)["psi2+"]
    h = 1e-4
    for x in (0.4, 1.5):
        fd = (state.derivative(x + h) - state.derivative(x - h)) / (2.0 * h)
        assert state.second_derivative(x) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_movers_combine_into_parity_states():
    states, movers = qes_states(2.0), qes_movers(2.0)
    for j in ("1", "2"):
        right, left = movers[f"psi{j}r"], movers[f"psi{j}l"]
        for x in (-1.3, 0.0, 0.7, 2.2):
            assert 0.5 * (right.value(x) + left.value(x)) == pytest.approx(states[f"psi{j}+"].value(x))
            assert (right.value(x) - left.value(x)) / 2j == pytest.approx(states[f"psi{j}-"].value(x))
            assert 0.5 * (right.derivative(x) + left.derivative(x)) == \
                pytest.approx(states[f"psi{j}+"].derivative(x))


def test_movers_solve_the_equation():
    pot = QES(2.0, 2)
    for mover in qes_movers(2.0).values():
        assert schrodinger_residual(mover, pot, mover.E) <= 1e-6


@pytest.mark.parametrize("nu", [1.0, 2.0, 1.5])
def test_cosh_power_pair_solves_the_equation(nu):
    pot = CoshKar(1.0, nu)
    for state in koley_kar_pair(1.0, nu).values():
        assert state.E == pytest.approx(-0.25 * nu * nu)
        assert schrodinger_residual(state, pot, state.E) <= 1e-8


def test_cosh_power_pair_wronskian_is_constant():
    """W[psi+, psi-] = -sqrt(A1) everywhere."""
    pair = koley_kar_pair(2.0, 1.0)
    for x in (-3.0, 0.0, 0.5, 2.75):
        assert wronskian_at(pair["psi+"], pair["psi-"], x).real == pytest.approx(-math.sqrt(2.0), rel=1e-9)


def test_cosh_power_integral():
    F = CoshPowerIntegral(1.0)
    for x in (0.1, 0.8, 2.3):
        assert F(x) == pytest.approx(math.sinh(x), rel=1e-12)
        assert F(-x) == -F(x)
    assert F(0.0) == 0.0

    F2 = CoshPowerIntegral(2.0)
    assert F2(1.7) == pytest.approx(0.5 * (1.7 + math.sinh(1.7) * math.cosh(1.7)), rel=1e-12)


def test_koley_kar_pair_validates_parameters():
    with pytest.raises(DomainError):
        koley_kar_pair(-1.0, 1.0)
    with pytest.raises(DomainError):
        qes_states(0.0)


def test_wronskian_table_at_b_two():
    rows = qes_wronskian_table(2.0)
    assert {row.pair for row in rows} == set(WRONSKIANS_B2)
    for row in rows:
        assert row.limit_plus == pytest.approx(WRONSKIANS_B2[row.pair], abs=1e-6)
        assert row.limit_plus == pytest.approx(row.closed_form, abs=1e-6)
        assert row.equal


def test_closed_forms_match_b_over_two():
    for b in (0.5, 1.0, 3.0):
        forms = qes_wronskian_closed_forms(b)
        assert forms[("psi1+", "psi2-")] == pytest.approx(0.5 * b)
        assert forms[("psi1+", "psi1-")] * forms[("psi2+", "psi2-")] == pytest.approx(0.25 * b * b)


def test_wronskian_limits_without_closed_form():
    states = qes_states(1.0)
    limit = wronskian_limits(states["psi2+"], states["psi1-"])
    assert limit.closed_form is None
    assert limit.limit_plus == pytest.approx(0.5, abs=1e-6)
    assert limit.equal


def test_wronskian_is_constant_for_same_energy_states():
    states = qes_states(2.0)
    values = [wronskian_at(states["psi1+"], states["psi1-"], x).real for x in np.linspace(-3.0, 3.0, 7)]
    assert values == pytest.approx([values[0]] * len(values), abs=1e-10)


def _closed_form_states():
    return list(qes_states(2.0).values()) + list(koley_kar_pair(1.0, 1.5).values())


@pytest.mark.parametrize("state", _closed_form_states(), ids=lambda s: s.label)
def test_derivative_matches_finite_difference(state):
    h = 1e-5
    for x in (-1.7, 0.3, 1.1, 2.4):
        fd = (state.value(x + h) - state.value(x - h)) / (2.0 * h)
        assert state.derivative(x) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_wronskian_parity():
    """Same-parity Wronskians are odd in x, cross-parity ones even."""
    states = qes_states(2.0)
    for x in (0.4, 1.3, 2.6):
        same = wronskian_at(states["psi1+"], states["psi2+"], x)
        assert wronskian_at(states["psi1+"], states["psi2+"], -x) == pytest.approx(-same, abs=1e-12)
        same_odd = wronskian_at(states["psi1-"], states["psi2-"], x)
        assert wronskian_at(states["psi1-"], states["psi2-"], -x) == pytest.approx(-same_odd, abs=1e-12)
        cross = wronskian_at(states["psi1+"], states["psi2-"], x)
        assert wronskian_at(states["psi1+"], states["psi2-"], -x) == pytest.approx(cross, abs=1e-12)
