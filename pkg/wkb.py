"""
Semiclassical estimates: the WKB phase phi(E), the power-law coefficients
A(p), B(p), C(p), the tunneling exponent beta, above-barrier reflection from
complex turning points, and the total-transmission energies.

Reference-point policy: x0 is the outermost turning point when E < V_max and
0 otherwise. phi, alpha and theta are all measured against it.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from errors import DomainError, EstimationError
from numerics import QuadratureSpec, gamma_fn, integrate
from potentials import QES, CoshKar, Potential, PowerLaw, turning_point

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class WkbCoefficients:
    p: float
    A: float
    B: float
    C: float


@dataclass(frozen=True)
class PhaseTriple:
    E: float
    phi: float
    alpha: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= HALF_PI:
            raise DomainError(f"alpha={self.alpha} outside [0, pi/2]")
        if not math.isfinite(self.phi):
            raise DomainError("phi must be finite")


@dataclass(frozen=True)
class TunnelingData:
    E: float
    beta: float
    complex_turning_points: List[complex] = field(default_factory=list)
    gammas: List[complex] = field(default_factory=list)


def _check_p(p: float) -> None:
    if not p > 1.0:
        raise DomainError(f"WKB coefficients need p > 1, got {p}")


@lru_cache(maxsize=64)
def coefficients(p: float) -> WkbCoefficients:
    """A(p), B(p), C(p) from their Gamma-function closed forms."""
    _check_p(p)
    q = 1.0 / (2.0 * p)
    sqrt_pi = math.sqrt(math.pi)
    denom = (p - 1.0) * (p + 1.0)
    A = p * gamma_fn(1.5 - q) * sqrt_pi / (denom * gamma_fn(1.0 - q))
    B = p * gamma_fn(q) * gamma_fn(1.5 - q) / (denom * sqrt_pi)
    C = sqrt_pi * gamma_fn(1.0 + q) / (2.0 * gamma_fn(1.5 + q))
    return WkbCoefficients(p=p, A=A, B=B, C=C)


def coefficients_by_quadrature(p: float, spec: Optional[QuadratureSpec] = None) -> WkbCoefficients:
    """Direct quadrature of the defining integrals, in cancellation-free form."""
    _check_p(p)
    spec = (spec or QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)).with_tail("logarithmic")

    # sqrt(xi^2p - 1) - xi^p rewritten as -r/(1 + sqrt(1 - r^2)), r = xi^-p;
    # the mapped tail reaches xi ~ 1e304 where xi^p overflows
    def a_tail(xi: float) -> float:
        r = xi ** -p
        return r / (1.0 + math.sqrt(max(1.0 - r * r, 0.0)))

    def b_integrand(z: float) -> float:
        if z <= 1.0:
            zp = z ** p
            return 1.0 / (math.sqrt(1.0 + zp * zp) + zp)
        r = z ** -p
        return r / (math.sqrt(1.0 + r * r) + 1.0)

    A = integrate(a_tail, 1.0, math.inf, spec, operation="coefficients_by_quadrature") + 1.0 / (p + 1.0)
    B = integrate(b_integrand, 0.0, math.inf, spec, operation="coefficients_by_quadrature")
    C = integrate(lambda xi: math.sqrt(max(1.0 - xi ** (2.0 * p), 0.0)), 0.0, 1.0, spec,
                  operation="coefficients_by_quadrature")
    return WkbCoefficients(p=p, A=A, B=B, C=C)


def _energy_scale(a: float, p: float, E: float) -> float:
    return a ** (-1.0 / p) * abs(E) ** (0.5 * (1.0 / p + 1.0))


def wkb_phase_closed_form(a: float, p: float, E: float) -> float:
    if E == 0.0:
        return 0.0
    k = coefficients(p)
    if E < 0.0:
        return -_energy_scale(a, p, E) * k.A
    return _energy_scale(a, p, E) * k.B


def tunneling_beta_closed_form(a: float, p: float, E: float) -> float:
    if E >= 0.0:
        raise DomainError(f"no barrier above E=0 for a power law, got E={E}")
    return _energy_scale(a, p, E) * coefficients(p).C


def reference_point(pot: Potential, E: float) -> float:
    return turning_point(pot, E) if E < pot.v_max else 0.0


def _tail_spec(pot: Potential, spec: Optional[QuadratureSpec]) -> QuadratureSpec:
    spec = spec or QuadratureSpec()
    slow = pot.asymptotic.slow_tail
    return spec.with_tail("logarithmic" if slow else "reciprocal")


def wkb_phase(pot: Potential, E: float, spec: Optional[QuadratureSpec] = None) -> float:
    """
    phi(E) = int_{x0}^inf (sqrt(E-V) - sqrt(-V)) dx - int_0^{x0} sqrt(-V) dx.
    """
    x0 = reference_point(pot, E)

    def tail(x: float) -> float:
        v = pot.value(x)
        if math.isinf(v):
            return 0.0
        # sqrt(E-V) - sqrt(-V) without cancellation
        return E / (math.sqrt(max(E - v, 0.0)) + math.sqrt(-v))

    phi = integrate(tail, x0, math.inf, _tail_spec(pot, spec), operation="wkb_phase")
    if x0 > 0.0:
        phi -= integrate(lambda x: math.sqrt(-pot.value(x)), 0.0, x0, spec, operation="wkb_phase")
    return phi


def tunneling_beta(pot: Potential, E: float, spec: Optional[QuadratureSpec] = None) -> float:
    """beta = int_0^{x0} sqrt(V - E) dx over the barrier, T ~ exp(-2 beta)."""
    if not E < pot.v_max:
        raise DomainError(f"tunneling_beta needs E < V_max={pot.v_max}, got E={E}")
    x0 = turning_point(pot, E)
    return integrate(lambda x: math.sqrt(max(pot.value(x) - E, 0.0)), 0.0, x0, spec,
                     operation="tunneling_beta")


def continued_potential(pot: Potential, z: complex) -> complex:
    """V(z) continued off the real axis, using evenness in the left half-plane."""
    return pot.complex_value(-z if z.real < 0.0 else z)


def _newton_polish(pot: Potential, E: float, z: complex, max_iter: int = 60) -> Optional[complex]:
    scale = max(1.0, abs(E))
    f = E - pot.complex_value(z)
    for _ in range(max_iter):
        df = -pot.complex_derivative(z)
        if df == 0 or not cmath.isfinite(f):
            return None
        step = f / df
        lam = 1.0
        while lam > 1e-6:
            trial = z - lam * step
            f_trial = E - pot.complex_value(trial)
            if cmath.isfinite(f_trial) and abs(f_trial) < abs(f):
                break
            lam *= 0.5
        else:
            break
        z, f = trial, f_trial
        if abs(f) <= 1e-13 * scale or abs(lam * step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z if abs(f) <= 1e-10 * scale else None


def _qes_seeds(pot: QES, E: float) -> List[complex]:
    # E - V = 0 with u = sinh^2 z:  (b^2/4) u^2 + (b^2/4 + E) u + (E + c) = 0
    q = 0.25 * pot.b ** 2
    roots = np.roots([q, q + E, E + pot.c])
    seeds = []
    for u in roots:
        for w in (cmath.sqrt(complex(u)), -cmath.sqrt(complex(u))):
            base = cmath.asinh(w)
            seeds.extend([base, 1j * math.pi - base, base + 2j * math.pi])
    return seeds


def _coshkar_seeds(pot: CoshKar, E: float) -> List[complex]:
    reach = math.acosh((abs(E) / pot.a1 + 2.0) ** (1.0 / (2.0 * pot.nu))) + 1.0
    return [complex(re, im) for re in np.linspace(0.0, reach, 12) for im in np.linspace(0.1, 3.0, 10)]


def complex_turning_points(pot: Potential, E: float) -> List[complex]:
    """
    The complex roots of E - V(z) = 0 nearest the real axis (Im z in (0, pi)),
    a right-half-plane root plus its mirror -conj(z).

    Raises:
        DomainError: E <= V_max, the turning points are real.
        EstimationError: no root found.
    """
    if not E > pot.v_max:
        raise DomainError(f"complex turning points need E > V_max={pot.v_max}, got E={E}")

    if isinstance(pot, PowerLaw):
        z = (E / pot.a ** 2) ** (1.0 / (2.0 * pot.p)) * cmath.exp(1j * math.pi / (2.0 * pot.p))
        return [z, -z.conjugate()]

    seeds = _qes_seeds(pot, E) if isinstance(pot, QES) else _coshkar_seeds(pot, E)
    found: List[complex] = []
    for seed in seeds:
        z = _newton_polish(pot, E, seed)
        if z is None:
            continue
        z = complex(abs(z.real), z.imag)
        if not 1e-9 < z.imag < math.pi - 1e-9:
            continue
        if all(abs(z - other) > 1e-8 for other in found):
            found.append(z)

    if not found:
        raise EstimationError(f"no complex turning point found at E={E}", operation="complex_turning_points")
    nearest = min(found, key=lambda r: (round(r.imag, 10), r.real))
    logger.debug("complex turning point at E=%g: %s (from %d candidates)", E, nearest, len(found))
    if nearest.real <= 1e-12:
        return [complex(0.0, nearest.imag)]
    return [nearest, -nearest.conjugate()]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def gamma_integral(pot: Potential, E: float, z: complex, bend: float = 0.0) -> complex:
    """
    gamma = int_0^z sqrt(E - V(x)) dx along 0 -> z, optionally bowed so the
    midpoint moves by bend*|z| perpendicular to the chord.

    The square root starts positive at x = 0 and follows its branch continuously.
    Roots in the left half-plane use gamma(-conj z) = -conj(gamma(z)).
    """
    if z.real < 0.0:
        return -gamma_integral(pot, E, -z.conjugate(), -bend).conjugate()

    # tau = 1 - u^2 regularises the square-root zero at the endpoint
    u = 0.5 * (_GL_NODES + 1.0)
    w = 0.5 * _GL_WEIGHTS
    tau = 1.0 - u * u
    order = np.argsort(tau)
    tau, u, w = tau[order], u[order], w[order]

    path = z * (tau + 4j * bend * tau * (1.0 - tau))
    dpath = z * (1.0 + 4j * bend * (1.0 - 2.0 * tau))

    prev = cmath.sqrt(E - pot.complex_value(0.0))
    total = 0.0 + 0.0j
    for x, dx, ui, wi in zip(path, dpath, u, w):
        root = cmath.sqrt(E - continued_potential(pot, complex(x)))
        if abs(root - prev) > abs(root + prev):
            root = -root
        prev = root
        total += wi * root * dx * 2.0 * ui
    return complex(total)


def tunneling_data(pot: Potential, E: float, spec: Optional[QuadratureSpec] = None) -> TunnelingData:
    if E < pot.v_max:
        return TunnelingData(E=E, beta=tunneling_beta(pot, E, spec))
    points = complex_turning_points(pot, E)
    return TunnelingData(E=E, beta=0.0, complex_turning_points=points,
                         gammas=[gamma_integral(pot, E, z) for z in points])


def wkb_reflection_estimate(pot: Potential, E: float) -> complex:
    """Above-barrier reflection R ~ sum_j (-i pi/3) exp(2 i gamma_j)."""
    points = complex_turning_points(pot, E)
    return sum((-1j * math.pi / 3.0) * cmath.exp(2j * gamma_integral(pot, E, z)) for z in points)


def wkb_alpha_theta(pot: Potential, E: float, spec: Optional[QuadratureSpec] = None) -> Tuple[float, float]:
    """
    Leading-order (alpha, theta).

    Below the barrier alpha = arccos(exp(-2 beta)); above it alpha = |R|
    from the turning-point estimate, clamped to [0, pi/2]. theta = 0 in both
    branches (the mirrored roots make R purely imaginary).
    """
    if E < pot.v_max:
        beta = tunneling_beta(pot, E, spec)
        return math.acos(math.exp(-2.0 * beta)), 0.0

    if isinstance(pot, PowerLaw):
        p = pot.p
        kc = _energy_scale(pot.a, p, E) * coefficients(p).C
        estimate = (2.0 * math.pi / 3.0) * abs(math.cos(2.0 * kc * math.cos(math.pi / (2.0 * p)))) \
            * math.exp(-2.0 * kc * math.sin(math.pi / (2.0 * p)))
    else:
        estimate = abs(wkb_reflection_estimate(pot, E))
    return min(max(estimate, 0.0), HALF_PI), 0.0


def phase_triple(pot: Potential, E: float, spec: Optional[QuadratureSpec] = None) -> PhaseTriple:
    alpha, theta = wkb_alpha_theta(pot, E, spec)
    return PhaseTriple(E=E, phi=wkb_phase(pot, E, spec), alpha=alpha, theta=theta)


def total_transmission_energies(a: float, p: float, count: int) -> List[float]:
    """E_n = [(2n+1) pi a^(1/p) / (4 C(p) cos(pi/2p))]^(2p/(p+1)), n = 0..count-1."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a}")
    c = coefficients(p).C
    base = math.pi * a ** (1.0 / p) / (4.0 * c * math.cos(math.pi / (2.0 * p)))
    return [((2 * n + 1) * base) ** (2.0 * p / (p + 1.0)) for n in range(count)]
