"""
Numerical scattering at fixed energy.

Two independent routes:
  * solve_scattering: complex R, T by matching a propagated transmitted
    wave onto the WKB incoming/outgoing basis at +x_max.
  * parity_phase_numeric: real even/odd solutions launched from the origin,
    their asymptotic phase offsets read off in amplitude-phase form.

The parity route feeds quantization; the complex route reports R and T.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from errors import (
    AsymptoticsNotReachedError,
    DataQualityError,
    DomainError,
    ProjectionError,
)
from numerics import (
    OdeState,
    SolverSettings,
    integrate,
    ordered_map,
    propagate_schrodinger,
    state_wronskian,
    wrap_half_pi,
    wrap_to_pi,
)
from potentials import Potential, wkb_validity_radius
from wkb import reference_point, wkb_phase

logger = logging.getLogger(__name__)

PARITIES = ("even", "odd")
READOFF_SPREAD = 0.01


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Reflection and transmission for unit incident amplitude."""

    E: float
    R: complex
    T: complex
    x_max: float
    residual_unitarity: float

    @classmethod
    def from_coefficients(cls, E: float, R: complex, T: complex, x_max: float = math.nan) -> "ScatteringAmplitudes":
        return cls(E=E, R=complex(R), T=complex(T), x_max=x_max,
                   residual_unitarity=abs(abs(R) ** 2 + abs(T) ** 2 - 1.0))

    @property
    def reflection_probability(self) -> float:
        return abs(self.R) ** 2

    @property
    def transmission_probability(self) -> float:
        return abs(self.T) ** 2

    @property
    def unitarity_phase(self) -> float:
        """Re(conj(T) R); zero for a symmetric potential."""
        return (self.T.conjugate() * self.R).real


@dataclass(frozen=True)
class ParityPhase:
    """Asymptotic offset delta of the even (cos form) or odd (sin form) solution."""

    E: float
    parity: str
    delta: float


@dataclass(frozen=True)
class ReflectionMinimum:
    E: float
    reflection_probability: float


@dataclass(frozen=True)
class ParityReadoff:
    delta: float
    phi: float
    spread: float
    x_max: float


def _local_momentum(pot: Potential, E: float, x: float) -> Tuple[float, float, float]:
    """k = sqrt(E - V) and its first two derivatives."""
    k = math.sqrt(E - pot.value(x))
    dk = -pot.derivative(x) / (2.0 * k)
    d2k = (-pot.second_derivative(x) - 2.0 * dk * dk) / (2.0 * k)
    return k, dk, d2k


def _momentum(pot: Potential, E: float):
    return lambda x: math.sqrt(max(E - pot.value(x), 0.0))


def _check_allowed(pot: Potential, E: float, x: float, operation: str) -> None:
    if not E - pot.value(x) > 0.0:
        raise ProjectionError(f"x={x} is not in the classically allowed region at E={E}", operation=operation)


def solve_scattering(pot: Potential, E: float, settings: Optional[SolverSettings] = None) -> ScatteringAmplitudes:
    """
    R and T at energy E.

    A pure transmitted wave is imposed at -x_max, propagated to +x_max and
    projected onto u_in/out = k^(-1/2) exp(-/+ i S), S = int_{x0}^x k, with
    u' = (+/- i k - k'/2k) u. W[u_in, u_out] = -2i exactly, so the flux
    identity |c_in|^2 - |c_out|^2 = 1 survives the projection.

    Raises:
        StiffnessError: from the propagator.
        ProjectionError: x_max outside the allowed region, or a degenerate projection.
    """
    settings = settings or SolverSettings()
    x_max = wkb_validity_radius(pot, E, settings.wkb_eps)
    _check_allowed(pot, E, x_max, "solve_scattering")
    x0 = reference_point(pot, E)

    S = integrate(_momentum(pot, E), x0, x_max, settings.quad, operation="solve_scattering")
    k, dk, _ = _local_momentum(pot, E, x_max)
    g = dk / (2.0 * k)
    amp = k ** -0.5
    u_out = OdeState(x_max, amp * cmath.exp(1j * S), (1j * k - g) * amp * cmath.exp(1j * S))
    u_in = OdeState(x_max, amp * cmath.exp(-1j * S), (-1j * k - g) * amp * cmath.exp(-1j * S))

    # the transmitted wave at -x_max is the mirror image of u_out
    start = OdeState(-x_max, u_out.psi, -u_out.dpsi)
    end = propagate_schrodinger(
        lambda x: pot.value(x) - E, start, x_max,
        tol=settings.ode_tol, step_fraction=settings.step_fraction, operation="solve_scattering",
    )

    c_in = state_wronskian(end, u_out) / (-2j)
    c_out = state_wronskian(end, u_in) / (2j)
    if not (cmath.isfinite(c_in) and abs(c_in) > 0.0):
        raise ProjectionError(f"incident amplitude vanished at E={E}", operation="solve_scattering")

    amps = ScatteringAmplitudes.from_coefficients(E, c_out / c_in, 1.0 / c_in, x_max)
    logger.debug(
        "E=%g x_max=%.4g |R|^2=%.6g |T|^2=%.6g residual=%.2e",
        E, x_max, amps.reflection_probability, amps.transmission_probability, amps.residual_unitarity,
    )
    return amps


def phase_mismatch(amps: ScatteringAmplitudes) -> float:
    """Distance of arg(R exp(-i theta)) from -pi/2; meaningful when |R| is not tiny."""
    theta = cmath.phase(amps.T)
    return abs(wrap_to_pi(cmath.phase(amps.R * cmath.exp(-1j * theta)) + 0.5 * math.pi))


def extract_alpha_theta(amps: ScatteringAmplitudes, tol: float = 1e-6) -> Tuple[float, float]:
    """
    Invert T = cos(alpha) e^(i theta), R = -i sin(alpha) e^(i theta).

    Raises:
        DataQualityError: | |R|^2 + |T|^2 - 1 | exceeds tol.
    """
    if amps.residual_unitarity > tol:
        raise DataQualityError(
            f"unitarity residual {amps.residual_unitarity:.2e} above {tol:.0e}",
            residual=amps.residual_unitarity,
            operation="extract_alpha_theta",
        )
    alpha = math.acos(min(abs(amps.T), 1.0))
    theta = cmath.phase(amps.T) if amps.T != 0 else cmath.phase(1j * amps.R)
    if abs(amps.R) > 1e-3:
        mismatch = phase_mismatch(amps)
        if mismatch > 0.01:
            logger.warning("R and T phases disagree by %.3g rad at E=%g", mismatch, amps.E)
    return alpha, theta


def _tail_correction(pot: Potential, E: float, x: float, settings: SolverSettings) -> float:
    """int_x^inf of the second-order WKB phase density [(3/4)(k'/k)^2 - (1/2) k''/k] / (2k)."""
    def density(s: float) -> float:
        k, dk, d2k = _local_momentum(pot, E, s)
        return (0.75 * (dk / k) ** 2 - 0.5 * d2k / k) / (2.0 * k)

    return integrate(density, x, math.inf, settings.quad.with_tail("reciprocal"), operation="parity_phase_numeric")


def parity_readoff(pot: Potential, E: float, parity: str, settings: SolverSettings, x_max: Optional[float]) -> ParityReadoff:
    if parity not in PARITIES:
        raise DomainError(f"parity must be one of {PARITIES}, got {parity!r}")
    x1 = x_max if x_max is not None else wkb_validity_radius(pot, E, settings.wkb_eps)
    _check_allowed(pot, E, x1, "parity_phase_numeric")

    Q = lambda x: pot.value(x) - E
    start = OdeState(0.0, 1.0, 0.0) if parity == "even" else OdeState(0.0, 0.0, 1.0)
    first = propagate_schrodinger(Q, start, x1, tol=settings.ode_tol,
                                  step_fraction=settings.step_fraction, operation="parity_phase_numeric")
    k1 = math.sqrt(E - pot.value(x1))
    x2 = x1 + 0.5 * math.pi / k1
    second = propagate_schrodinger(Q, first, x2, tol=settings.ode_tol,
                                   step_fraction=settings.step_fraction, operation="parity_phase_numeric")

    phi = wkb_phase(pot, E, settings.quad)
    x0 = reference_point(pot, E)
    k = _momentum(pot, E)
    S1 = integrate(k, x0, x1, settings.quad, operation="parity_phase_numeric")
    S2 = S1 + integrate(k, x1, x2, settings.quad, operation="parity_phase_numeric")

    def offset(state: OdeState, S: float) -> float:
        kk, dk, _ = _local_momentum(pot, E, state.x)
        psi, dpsi = state.psi.real, state.dpsi.real
        slope = dpsi + dk / (2.0 * kk) * psi
        angle = math.atan2(-slope / math.sqrt(kk), math.sqrt(kk) * psi)
        return angle - S + phi + _tail_correction(pot, E, state.x, settings)

    d1, d2 = offset(first, S1), offset(second, S2)
    spread = abs(wrap_half_pi(d2 - d1))
    if spread > READOFF_SPREAD:
        raise AsymptoticsNotReachedError(
            f"read-off at x={x1:.4g} and x={x2:.4g} disagrees by {spread:.3g} rad (E={E}, {parity})",
            spread=spread,
            operation="parity_phase_numeric",
        )
    delta = d1 + 0.5 * wrap_half_pi(d2 - d1)
    if parity == "odd":
        delta += 0.5 * math.pi
    return ParityReadoff(delta=wrap_to_pi(delta), phi=phi, spread=spread, x_max=x1)


def parity_phase_numeric(
    pot: Potential,
    E: float,
    parity: str,
    settings: Optional[SolverSettings] = None,
    x_max: Optional[float] = None,
) -> ParityPhase:
    """
    Asymptotic phase offset of the parity solution at E.

    even: psi(0) = 1, psi'(0) = 0, psi ~ k^(-1/2) cos(u(x) + delta)
    odd:  psi(0) = 0, psi'(0) = 1, psi ~ k^(-1/2) sin(u(x) + delta)
    with u(x) = int_0^x sqrt(-V). delta is defined modulo pi.

    Raises:
        AsymptoticsNotReachedError: two read-offs a quarter wavelength apart disagree.
    """
    r = parity_readoff(pot, E, parity, settings or SolverSettings(), x_max)
    return ParityPhase(E=E, parity=parity, delta=r.delta)


def parity_offset(pot: Potential, E: float, parity: str, settings: Optional[SolverSettings] = None) -> float:
    """delta - phi reduced to [-pi/2, pi/2): the (theta -/+ alpha)/2 part of the phase."""
    r = parity_readoff(pot, E, parity, settings or SolverSettings(), None)
    return wrap_half_pi(r.delta - r.phi)


def alpha_theta_from_parity(pot: Potential, E: float, settings: Optional[SolverSettings] = None) -> Tuple[float, float]:
    """(alpha, theta) from delta_odd - delta_even = alpha and delta_even + delta_odd - 2 phi = theta (mod pi)."""
    settings = settings or SolverSettings()
    even = parity_readoff(pot, E, "even", settings, None)
    odd = parity_readoff(pot, E, "odd", settings, None)
    alpha = abs(wrap_half_pi(odd.delta - even.delta))
    theta = wrap_half_pi(even.delta + odd.delta - 2.0 * even.phi)
    return alpha, theta


def signed_parity_gap(pot: Potential, E: float, settings: Optional[SolverSettings] = None) -> float:
    """delta_odd - delta_even reduced mod pi; changes sign at total transmission."""
    settings = settings or SolverSettings()
    even = parity_readoff(pot, E, "even", settings, None)
    odd = parity_readoff(pot, E, "odd", settings, None)
    return wrap_half_pi(odd.delta - even.delta)


_MAX_REFINE_DEPTH = 6
_REFINE_JUMP = 0.25 * math.pi


def _continue_phase(pot, parity, settings, e_a, delta_a, phi_a, e_b, read_b: ParityReadoff, depth: int) -> float:
    # phi predicts the phase advance; the read-off fixes the residue mod pi
    predicted = read_b.phi - phi_a
    correction = wrap_half_pi(read_b.delta - delta_a - predicted)
    if abs(correction) > _REFINE_JUMP and depth < _MAX_REFINE_DEPTH:
        e_mid = 0.5 * (e_a + e_b)
        read_mid = parity_readoff(pot, e_mid, parity, settings, None)
        delta_mid = _continue_phase(pot, parity, settings, e_a, delta_a, phi_a, e_mid, read_mid, depth + 1)
        return _continue_phase(pot, parity, settings, e_mid, delta_mid, read_mid.phi, e_b, read_b, depth + 1)
    return delta_a + predicted + correction


def parity_phase_sweep(
    pot: Potential,
    energies: Sequence[float],
    parity: str,
    settings: Optional[SolverSettings] = None,
    jobs: int = 1,
    progress: bool = False,
) -> List[ParityPhase]:
    """
    parity_phase_numeric over an increasing energy grid, unwrapped so that
    delta is continuous in E. The grid is bisected locally wherever the
    read-off departs from the WKB prediction by more than pi/4.
    """
    settings = settings or SolverSettings()
    energies = [float(e) for e in energies]
    if any(b <= a for a, b in zip(energies, energies[1:])):
        raise DomainError("parity_phase_sweep needs strictly increasing energies")
    if not energies:
        return []

    reads = ordered_map(lambda e: parity_readoff(pot, e, parity, settings, None), energies, jobs=jobs,
                        desc=f"{parity} phases", progress=progress)
    deltas = [reads[0].delta]
    for i in range(1, len(energies)):
        deltas.append(_continue_phase(
            pot, parity, settings, energies[i - 1], deltas[-1], reads[i - 1].phi, energies[i], reads[i], 0,
        ))
    return [ParityPhase(E=e, parity=parity, delta=d) for e, d in zip(energies, deltas)]


def reflection_sweep(
    pot: Potential,
    energies: Sequence[float],
    settings: Optional[SolverSettings] = None,
    jobs: int = 1,
    progress: bool = False,
) -> List[ScatteringAmplitudes]:
    settings = settings or SolverSettings()
    return ordered_map(lambda e: solve_scattering(pot, float(e), settings), energies, jobs=jobs,
                       desc="scattering", progress=progress)


def refine_reflection_minima(
    pot: Potential,
    sweep: Sequence[ScatteringAmplitudes],
    settings: Optional[SolverSettings] = None,
) -> List[ReflectionMinimum]:
    """Interior local minima of |R|^2 along a sweep, refined by bounded minimisation."""
    settings = settings or SolverSettings()
    energies = [a.E for a in sweep]
    r2 = [a.reflection_probability for a in sweep]

    minima = []
    for i in range(1, len(sweep) - 1):
        if r2[i] < r2[i - 1] and r2[i] <= r2[i + 1]:
            res = minimize_scalar(
                lambda e: solve_scattering(pot, e, settings).reflection_probability,
                bounds=(energies[i - 1], energies[i + 1]),
                method="bounded",
                options={"xatol": 1e-7 * max(1.0, abs(energies[i]))},
            )
            minima.append(ReflectionMinimum(E=float(res.x), reflection_probability=float(res.fun)))
            logger.debug("|R|^2 minimum %.3g at E=%.8g", res.fun, res.x)
    return minima


def tt_energies_numeric(
    pot: Potential,
    emin: float,
    emax: float,
    samples: int = 60,
    settings: Optional[SolverSettings] = None,
    jobs: int = 1,
    progress: bool = False,
) -> List[ReflectionMinimum]:
    """Total-transmission candidates: minima of |R(E)|^2 on [emin, emax]."""
    if not (emin < emax and samples >= 3):
        raise DomainError(f"need emin < emax and samples >= 3, got [{emin}, {emax}], {samples}")
    settings = settings or SolverSettings()
    sweep = reflection_sweep(pot, np.linspace(emin, emax, samples), settings, jobs, progress)
    return refine_reflection_minima(pot, sweep, settings)
