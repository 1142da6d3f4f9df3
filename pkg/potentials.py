"""
Catalog of symmetric potentials unbounded from below, and the classical
helpers built on them (turning points, flight time, WKB validity radius).

Units: 2m = hbar = 1, so the Schrodinger equation reads psi'' + (E - V) psi = 0.
"""
from __future__ import annotations

import cmath
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from errors import ConfigError, DomainError, TurningPointError
from numerics import QuadratureSpec, find_root, integrate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AsymptoticDescriptor:
    """
    How fast a potential falls off.

    kind/rate describe the leading behaviour (V ~ -x^(2*rate) for "power",
    V ~ -exp(rate*x) for "exponential"). The bound fields give a certified
    envelope: V(x) <= -bound_coeff * |x|^(2*bound_exponent) for |x| >= bound_x1.
    """

    kind: str
    rate: float
    bound_exponent: float
    bound_coeff: float
    bound_x1: float

    def envelope(self, x: float) -> float:
        return -self.bound_coeff * abs(x) ** (2.0 * self.bound_exponent)

    @property
    def slow_tail(self) -> bool:
        """Tail integrands decay like x^(-rate); below rate 2 they need the logarithmic map."""
        return self.kind == "power" and self.rate < 2.0


class Potential(ABC):
    """Even potential V(x) with its analytic continuation and derivatives."""

    family: str = ""

    @abstractmethod
    def _value(self, ax: float) -> float: ...

    @abstractmethod
    def _derivative(self, ax: float) -> float: ...

    @abstractmethod
    def _second_derivative(self, ax: float) -> float: ...

    @abstractmethod
    def complex_value(self, z: complex) -> complex: ...

    @abstractmethod
    def complex_derivative(self, z: complex) -> complex: ...

    @property
    @abstractmethod
    def x_peak(self) -> float:
        """Non-negative location of V_max."""

    @property
    @abstractmethod
    def asymptotic(self) -> AsymptoticDescriptor: ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...

    def value(self, x: float) -> float:
        try:
            return self._value(abs(x))
        except OverflowError:
            return -math.inf

    def derivative(self, x: float) -> float:
        try:
            return math.copysign(1.0, x) * self._derivative(abs(x))
        except OverflowError:
            return -math.copysign(math.inf, x)

    def second_derivative(self, x: float) -> float:
        try:
            return self._second_derivative(abs(x))
        except OverflowError:
            return -math.inf

    __call__ = value

    @property
    def v_max(self) -> float:
        return self.value(self.x_peak)


@dataclass(frozen=True)
class PowerLaw(Potential):
    """V = -a^2 |x|^(2p)."""

    a: float = 1.0
    p: float = 2.0
    family = "power"

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"PowerLaw needs a > 0, got {self.a}")
        if not self.p > 1:
            raise DomainError(f"PowerLaw needs p > 1, got {self.p}")

    def _value(self, ax: float) -> float:
        return -self.a ** 2 * ax ** (2.0 * self.p)

    def _derivative(self, ax: float) -> float:
        return -2.0 * self.p * self.a ** 2 * ax ** (2.0 * self.p - 1.0)

    def _second_derivative(self, ax: float) -> float:
        p = self.p
        return -2.0 * p * (2.0 * p - 1.0) * self.a ** 2 * ax ** (2.0 * p - 2.0)

    # principal branch, valid in the right half-plane
    def complex_value(self, z: complex) -> complex:
        return -self.a ** 2 * complex(z) ** (2.0 * self.p)

    def complex_derivative(self, z: complex) -> complex:
        return -2.0 * self.p * self.a ** 2 * complex(z) ** (2.0 * self.p - 1.0)

    @property
    def x_peak(self) -> float:
        return 0.0

    @property
    def asymptotic(self) -> AsymptoticDescriptor:
        return AsymptoticDescriptor("power", self.p, self.p, self.a ** 2, 0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "a": self.a, "p": self.p}


@dataclass(frozen=True)
class QES(Potential):
    """Quasi-exactly solvable V = -(b^2/4) sinh^2 x - (n^2 - 1/4) sech^2 x."""

    b: float = 2.0
    n: int = 2
    family = "qes"

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"QES needs b > 0, got {self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"QES needs a positive integer n, got {self.n}")

    @property
    def c(self) -> float:
        return self.n ** 2 - 0.25

    def _value(self, ax: float) -> float:
        return -0.25 * self.b ** 2 * math.sinh(ax) ** 2 - self.c / math.cosh(ax) ** 2

    def _derivative(self, ax: float) -> float:
        sech2 = 1.0 / math.cosh(ax) ** 2
        return -0.5 * self.b ** 2 * math.sinh(ax) * math.cosh(ax) + 2.0 * self.c * sech2 * math.tanh(ax)

    def _second_derivative(self, ax: float) -> float:
        sech2 = 1.0 / math.cosh(ax) ** 2
        t = math.tanh(ax)
        return (
            -0.5 * self.b ** 2 * (math.cosh(ax) ** 2 + math.sinh(ax) ** 2)
            + 2.0 * self.c * (sech2 ** 2 - 2.0 * sech2 * t * t)
        )

    def complex_value(self, z: complex) -> complex:
        return -0.25 * self.b ** 2 * cmath.sinh(z) ** 2 - self.c / cmath.cosh(z) ** 2

    def complex_derivative(self, z: complex) -> complex:
        sh, ch = cmath.sinh(z), cmath.cosh(z)
        return -0.5 * self.b ** 2 * sh * ch + 2.0 * self.c * sh / ch ** 3

    @property
    def x_peak(self) -> float:
        ratio = 4.0 * self.c / self.b ** 2
        if ratio <= 1.0:
            return 0.0
        return math.acosh(ratio ** 0.25)

    @property
    def asymptotic(self) -> AsymptoticDescriptor:
        # sinh x >= e^x / 4 for x >= 1 and e^(2x) >= x^4
        return AsymptoticDescriptor("exponential", 2.0, 2.0, self.b ** 2 / 64.0, 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "b": self.b, "n": int(self.n)}


@dataclass(frozen=True)
class CoshKar(Potential):
    """V = -A1 cosh^(2 nu) x - kappa sech^2 x, kappa = (nu/2)(nu/2 + 1)."""

    a1: float = 1.0
    nu: float = 1.0
    family = "coshkar"

    def __post_init__(self):
        if not (self.a1 > 0 and self.nu > 0):
            raise DomainError(f"CoshKar needs A1 > 0 and nu > 0, got A1={self.a1}, nu={self.nu}")

    @property
    def kappa(self) -> float:
        return 0.5 * self.nu * (0.5 * self.nu + 1.0)

    def _value(self, ax: float) -> float:
        ch = math.cosh(ax)
        return -self.a1 * ch ** (2.0 * self.nu) - self.kappa / ch ** 2

    def _derivative(self, ax: float) -> float:
        ch, sh = math.cosh(ax), math.sinh(ax)
        return -2.0 * self.nu * self.a1 * ch ** (2.0 * self.nu - 1.0) * sh + 2.0 * self.kappa * sh / ch ** 3

    def _second_derivative(self, ax: float) -> float:
        nu, ch, sh = self.nu, math.cosh(ax), math.sinh(ax)
        sech2 = 1.0 / ch ** 2
        t = math.tanh(ax)
        return (
            -2.0 * nu * self.a1 * ((2.0 * nu - 1.0) * ch ** (2.0 * nu - 2.0) * sh ** 2 + ch ** (2.0 * nu))
            + 2.0 * self.kappa * (sech2 ** 2 - 2.0 * sech2 * t * t)
        )

    def complex_value(self, z: complex) -> complex:
        ch = cmath.cosh(z)
        return -self.a1 * ch ** (2.0 * self.nu) - self.kappa / ch ** 2

    def complex_derivative(self, z: complex) -> complex:
        ch, sh = cmath.cosh(z), cmath.sinh(z)
        return -2.0 * self.nu * self.a1 * ch ** (2.0 * self.nu - 1.0) * sh + 2.0 * self.kappa * sh / ch ** 3

    @property
    def x_peak(self) -> float:
        ratio = self.kappa / (self.nu * self.a1)
        if ratio <= 1.0:
            return 0.0
        return math.acosh(ratio ** (1.0 / (2.0 * self.nu + 2.0)))

    @property
    def asymptotic(self) -> AsymptoticDescriptor:
        # cosh^(2nu) x >= x^4 once nu (x - ln 2) >= 2 ln x, and stays so for x >= 2/nu
        x1 = max(1.0, 2.0 / self.nu)
        while self.nu * (x1 - math.log(2.0)) < 2.0 * math.log(x1):
            x1 *= 1.25
        return AsymptoticDescriptor("exponential", 2.0 * self.nu, 2.0, self.a1, x1)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "a1": self.a1, "nu": self.nu}


FAMILIES = {"power": PowerLaw, "qes": QES, "coshkar": CoshKar}


def potential_from_dict(spec: Dict[str, Any]) -> Potential:
    """Build a potential from {"family": "power"|"qes"|"coshkar", ...params}."""
    family = spec.get("family")
    try:
        if family == "power":
            return PowerLaw(a=float(spec.get("a", 1.0)), p=float(spec.get("p", 2.0)))
        if family == "qes":
            return QES(b=float(spec.get("b", 2.0)), n=int(spec.get("n", 2)))
        if family == "coshkar":
            a1 = spec.get("a1", spec.get("A1", 1.0))
            return CoshKar(a1=float(a1), nu=float(spec.get("nu", 1.0)))
    except (TypeError, DomainError) as e:
        raise ConfigError(f"invalid {family} parameters: {e}") from e
    raise ConfigError(f"unknown potential family {family!r}; expected one of {sorted(FAMILIES)}")


@dataclass(frozen=True)
class ClassicalData:
    E: float
    x0: Optional[float]
    t_E: float


def eval_potential(pot: Potential, x: float) -> float:
    return pot.value(x)


def turning_point(pot: Potential, E: float) -> float:
    """
    Outermost x0 > 0 with V(x0) = E.

    Beyond x_peak each family decreases monotonically, so the root in
    [x_peak, inf) is unique.

    Raises:
        DomainError: E >= V_max, there is no barrier to turn at.
    """
    v_max = pot.v_max
    if not E < v_max:
        raise DomainError(f"no turning point: E={E} is not below V_max={v_max}")

    if isinstance(pot, PowerLaw):
        return pot.a ** (-1.0 / pot.p) * (-E) ** (1.0 / (2.0 * pot.p))

    lo = pot.x_peak
    hi = lo + 1.0
    while pot.value(hi) > E:
        hi *= 2.0
    x0 = find_root(lambda x: pot.value(x) - E, lo, hi, tol=1e-14, operation="turning_point")
    logger.debug("turning point of %r at E=%g: x0=%.12g", pot, E, x0)
    return x0


def flight_time(
    pot: Potential,
    E: float,
    x_from: float,
    x_to: float = math.inf,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """
    Classical travel time t = integral of dx / sqrt(2 (E - V(x))) from x_from to x_to.

    Raises:
        TurningPointError: E - V(x) vanishes somewhere on the path
            (an integrable zero exactly at x_from is allowed when V'(x_from) != 0).
    """
    spec = spec or QuadratureSpec()
    slack = 1e-9 * max(1.0, abs(E))
    v_sup = pot.v_max if x_from <= pot.x_peak else pot.value(x_from)
    if E < v_sup - slack or (x_from <= pot.x_peak and E <= v_sup + slack):
        raise TurningPointError(
            f"E={E} does not exceed V on [{x_from}, {x_to}] (sup V = {v_sup})",
            operation="flight_time",
        )

    def integrand(x: float) -> float:
        gap = E - pot.value(x)
        if gap <= 0.0:
            return math.inf
        return 1.0 / math.sqrt(2.0 * gap)

    if math.isinf(x_to):
        slow = pot.asymptotic.slow_tail
        spec = spec.with_tail("logarithmic" if slow else "reciprocal")
    return integrate(integrand, x_from, x_to, spec, operation="flight_time")


def classical_data(pot: Potential, E: float, spec: Optional[QuadratureSpec] = None) -> ClassicalData:
    """Turning point (None above the barrier) and flight time from it to infinity."""
    x0 = turning_point(pot, E) if E < pot.v_max else None
    t_E = flight_time(pot, E, x0 if x0 is not None else 0.0, spec=spec)
    return ClassicalData(E=E, x0=x0, t_E=t_E)


_RADIUS_GRID = 4000


def wkb_validity_radius(pot: Potential, E: float, eps: float) -> float:
    """
    Smallest x_max such that for every x >= x_max
        |V'(x)| / |V(x) - E|^(3/2) <= eps   and   |V(x)| >= 100 max(|E|, 1).
    """
    if not 0.0 < eps <= 0.1:
        raise DomainError(f"eps must lie in (0, 0.1], got {eps}")
    floor = 100.0 * max(abs(E), 1.0)

    def margin(x: float) -> float:
        v = pot.value(x)
        q = abs(v - E)
        if q == 0.0:
            return math.inf
        adiabatic = abs(pot.derivative(x)) / q ** 1.5 - eps
        depth = (floor - abs(v)) / floor
        return max(adiabatic, depth)

    x_hi = 1.0
    while margin(x_hi) > 0.0 or margin(2.0 * x_hi) > 0.0:
        x_hi *= 2.0

    xs = np.linspace(0.0, 2.0 * x_hi, _RADIUS_GRID + 1)
    failing = np.flatnonzero([margin(float(x)) > 0.0 for x in xs])
    if failing.size == 0:
        return 0.0
    i = int(failing[-1])
    return find_root(margin, float(xs[i]), float(xs[i + 1]), tol=1e-12, operation="wkb_validity_radius")
