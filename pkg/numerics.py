"""
Numerical foundation: gamma function, adaptive quadrature with tail
substitutions, bracketed root finding and an adaptive integrator for
psi'' = Q(x) psi with complex-valued solutions.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq
from tqdm import tqdm

from errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    StiffnessError,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

TAIL_SUBSTITUTIONS = ("none", "reciprocal", "logarithmic")

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def gamma_fn(x: float) -> float:
    """Gamma function for real x > 0 (Lanczos, ~1e-15 relative)."""
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError(f"gamma_fn needs a finite positive argument, got {x}")
    if x < 0.5:
        # recurrence instead of reflection: the argument stays positive
        return gamma_fn(x + 1.0) / x
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += coeff / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_TWO_PI * math.exp((z + 0.5) * math.log(t) - t) * acc


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and tail handling for integrate()."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_substitution: str = "reciprocal"

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ConfigError("max_subdivisions must be >= 1")
        if self.tail_substitution not in TAIL_SUBSTITUTIONS:
            raise ConfigError(
                f"tail_substitution must be one of {TAIL_SUBSTITUTIONS}, got {self.tail_substitution!r}"
            )

    @classmethod
    def from_env(cls) -> "QuadratureSpec":
        return cls(
            abs_tol=float(os.environ.get("SAEXT_QUAD_ABS_TOL", 1e-10)),
            rel_tol=float(os.environ.get("SAEXT_QUAD_REL_TOL", 1e-10)),
            max_subdivisions=int(os.environ.get("SAEXT_QUAD_LIMIT", 2000)),
        )

    def with_tail(self, tail_substitution: str) -> "QuadratureSpec":
        return replace(self, tail_substitution=tail_substitution)


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances shared by the scattering and spectrum solvers."""

    ode_tol: float = 1e-10
    wkb_eps: float = 0.005
    step_fraction: float = 0.1
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not self.ode_tol > 0:
            raise ConfigError("ode_tol must be strictly positive")
        if not 0 < self.wkb_eps <= 0.1:
            raise ConfigError("wkb_eps must lie in (0, 0.1]")
        if not 0 < self.step_fraction <= 1:
            raise ConfigError("step_fraction must lie in (0, 1]")

    @classmethod
    def from_env(cls) -> "SolverSettings":
        return cls(
            ode_tol=float(os.environ.get("SAEXT_ODE_TOL", 1e-10)),
            wkb_eps=float(os.environ.get("SAEXT_WKB_EPS", 0.005)),
            quad=QuadratureSpec.from_env(),
        )


def _finite_or_zero(value: float) -> float:
    # mapped tails may evaluate at x ~ 1e300; the integrand has decayed there
    return value if math.isfinite(value) else 0.0


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    operation: str = "integrate",
) -> float:
    """
    Adaptive quadrature of f over [a, b], b may be +inf.

    For b = +inf the interval is mapped to [0, 1):
      reciprocal:  x = a + t/(1-t)
      logarithmic: x = a + exp(u) - 1,  u = t/(1-t)
      none:        QUADPACK's own infinite-range transform
    Integrands handed to the reciprocal map must decay at least like x^(-1-eps).

    Raises:
        ConvergenceError: subdivision limit hit, or error estimate far above
            the requested tolerance. best_estimate carries the value.
    """
    spec = spec or QuadratureSpec()
    if a == b:
        return 0.0

    if math.isinf(b) and b > 0 and spec.tail_substitution == "reciprocal":
        def mapped(t: float) -> float:
            s = 1.0 - t
            return _finite_or_zero(f(a + t / s) / (s * s))
        lo, hi, g = 0.0, 1.0, mapped
    elif math.isinf(b) and b > 0 and spec.tail_substitution == "logarithmic":
        def mapped(t: float) -> float:
            s = 1.0 - t
            u = t / s
            if u > 700.0:
                return 0.0
            return _finite_or_zero(f(a + math.expm1(u)) * math.exp(u) / (s * s))
        lo, hi, g = 0.0, 1.0, mapped
    else:
        lo, hi, g = a, b, f

    result = quad(
        g, lo, hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abserr, info = float(result[0]), float(result[1]), result[2]
    target = max(spec.abs_tol, spec.rel_tol * abs(value))
    if len(result) > 3:
        exhausted = info.get("last", 0) >= spec.max_subdivisions
        if exhausted or abserr > 100.0 * target or not math.isfinite(value):
            raise ConvergenceError(
                f"quadrature over [{a}, {b}] did not converge (estimate {value}, error {abserr:.2e})",
                best_estimate=value,
                operation=operation,
            )
        logger.debug("quad flagged [%s, %s] but error %.2e is acceptable", a, b, abserr)
    return value


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    *,
    operation: str = "find_root",
) -> float:
    """Brent's method on a sign-changing bracket [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if not (math.isfinite(flo) and math.isfinite(fhi)) or flo * fhi > 0.0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}", operation=operation
        )
    root, info = brentq(f, lo, hi, xtol=tol, maxiter=200, full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError(
            f"Brent iteration stopped after {info.iterations} steps",
            best_estimate=root,
            operation=operation,
        )
    return float(root)


def wrap_to_pi(angle: float) -> float:
    """Principal value of an angle modulo 2*pi, in [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def wrap_half_pi(angle: float) -> float:
    """Principal value of an angle modulo pi, in [-pi/2, pi/2)."""
    return (angle + 0.5 * math.pi) % math.pi - 0.5 * math.pi


@dataclass(frozen=True)
class OdeState:
    """A point (x, psi, dpsi/dx) on a solution of psi'' = Q psi."""

    x: float
    psi: complex
    dpsi: complex

    def __post_init__(self):
        if not (math.isfinite(self.x) and np.isfinite(self.psi) and np.isfinite(self.dpsi)):
            raise DomainError(f"non-finite ODE state at x={self.x}")


def state_wronskian(first: OdeState, second: OdeState) -> complex:
    """psi1' psi2 - psi1 psi2' for two states at the same x."""
    return first.dpsi * second.psi - first.psi * second.dpsi


_SEGMENT_STEPS = 64
_CAP_SAMPLES = 9


def _step_cap(Q: Callable[[float], float], x0: float, x1: float, step_fraction: float) -> float:
    qs = np.array([Q(x) for x in np.linspace(x0, x1, _CAP_SAMPLES)])
    allowed = qs < 0.0
    if not allowed.any():
        return np.inf
    return step_fraction * 2.0 * math.pi / math.sqrt(float(np.max(-qs[allowed])))


def propagate_schrodinger(
    Q: Callable[[float], float],
    start: OdeState,
    to_x: float,
    tol: float = 1e-10,
    *,
    step_fraction: float = 0.1,
    operation: str = "propagate_schrodinger",
) -> OdeState:
    """
    Integrate psi'' = Q(x) psi from start.x to to_x with DOP853.

    The step is capped at step_fraction of the local wavelength 2*pi/sqrt(|Q|)
    wherever Q < 0; the cap is re-evaluated per segment of ~64 capped steps.

    Raises:
        StiffnessError: the integrator could not reach to_x.
    """
    def rhs(x: float, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], Q(x) * y[0]])

    y = np.array([start.psi, start.dpsi], dtype=complex)
    atol = 1e-3 * tol * max(abs(start.psi), abs(start.dpsi), 1.0)
    x = float(start.x)
    direction = 1.0 if to_x >= x else -1.0

    while (to_x - x) * direction > 0.0:
        remaining = abs(to_x - x)
        q_here = Q(x)
        if q_here < 0.0:
            seg = _SEGMENT_STEPS * step_fraction * 2.0 * math.pi / math.sqrt(-q_here)
        else:
            seg = 1.0
        x_next = to_x if seg >= remaining else x + direction * seg
        cap = _step_cap(Q, x, x_next, step_fraction)
        sol = solve_ivp(
            rhs, (x, x_next), y,
            method="DOP853",
            rtol=tol,
            atol=atol,
            max_step=cap,
        )
        if sol.status != 0:
            raise StiffnessError(
                f"integration stalled: {sol.message}",
                x_reached=float(sol.t[-1]),
                operation=operation,
            )
        x, y = x_next, sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise StiffnessError("solution overflowed", x_reached=x, operation=operation)

    return OdeState(x=float(to_x), psi=complex(y[0]), dpsi=complex(y[1]))


def ordered_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    jobs: int = 1,
    desc: Optional[str] = None,
    progress: bool = False,
) -> List[R]:
    """
    Apply fn to every item, optionally on a thread pool.

    Results come back in input order whatever the completion order.
    """
    items = list(items)
    bar = tqdm(total=len(items), desc=desc, disable=not progress, file=sys.stderr, leave=False)
    results: List[R] = []
    try:
        if jobs <= 1 or len(items) <= 1:
            for item in items:
                results.append(fn(item))
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for result in pool.map(fn, items):
                    results.append(result)
                    bar.update(1)
    finally:
        bar.close()
    return results
