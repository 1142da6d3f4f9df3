"""
Closed-form states: the n = 2 total-transmission modes of the QES potential,
the cosh-power pair, Schrodinger residuals and asymptotic Wronskian limits.
"""
from __future__ import annotations

import cmath
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from errors import ConvergenceError, DomainError
from numerics import QuadratureSpec, integrate
from potentials import Potential

logger = logging.getLogger(__name__)

Scalar = Callable[[float], complex]


@dataclass(frozen=True)
class StateFunction:
    """A closed-form solution with its hand-derived derivatives."""

    label: str
    E: float
    value_fn: Scalar
    derivative_fn: Scalar
    second_derivative_fn: Optional[Scalar] = None

    def evaluate(self, x: float) -> Tuple[complex, complex]:
        return self.value_fn(x), self.derivative_fn(x)

    def value(self, x: float) -> complex:
        return self.value_fn(x)

    def derivative(self, x: float) -> complex:
        return self.derivative_fn(x)

    def second_derivative(self, x: float) -> complex:
        if self.second_derivative_fn is not None:
            return self.second_derivative_fn(x)
        # sixth-order central difference of the derivative
        h = 1e-3
        d = self.derivative_fn
        return (45.0 * (d(x + h) - d(x - h)) - 9.0 * (d(x + 2 * h) - d(x - 2 * h)) + (d(x + 3 * h) - d(x - 3 * h))) / (60.0 * h)


@dataclass(frozen=True)
class WronskianLimit:
    pair: Tuple[str, str]
    limit_plus: float
    limit_minus: float
    closed_form: Optional[float] = None

    @property
    def equal(self) -> bool:
        return abs(self.limit_plus - self.limit_minus) <= 1e-6


def qes_energies(b: float) -> Tuple[float, float]:
    root = math.sqrt(b * b + 1.0)
    base = 0.25 * (b * b - 5.0)
    return base - root, base + root


def _mover_constants(b: float) -> Tuple[float, float]:
    # roots of lambda^2 - (2/b) lambda - 1 = 0, ordered to match (E1, E2)
    root = math.sqrt(b * b + 1.0)
    return (1.0 - root) / b, (1.0 + root) / b


def _qes_parity_state(b: float, lam: float, parity: int, label: str, E: float) -> StateFunction:
    half_b = 0.5 * b

    def parts(x: float):
        s, c = math.sinh(x), math.cosh(x)
        w, dw, d2w = half_b * s, half_b * c, half_b * s
        sw, cw = math.sin(w), math.cos(w)
        if parity > 0:
            h = cw - lam * s * sw
            dh = -dw * sw - lam * c * sw - lam * s * dw * cw
            d2h = (-d2w * sw - dw * dw * cw - lam * s * sw - 2.0 * lam * c * dw * cw
                   - lam * s * d2w * cw + lam * s * dw * dw * sw)
        else:
            h = sw + lam * s * cw
            dh = dw * cw + lam * c * cw - lam * s * dw * sw
            d2h = (d2w * cw - dw * dw * sw + lam * s * cw - 2.0 * lam * c * dw * sw
                   - lam * s * d2w * sw - lam * s * dw * dw * cw)
        return c ** -1.5, math.tanh(x), h, dh, d2h

    def value(x: float) -> complex:
        g, _, h, _, _ = parts(x)
        return complex(g * h)

    def derivative(x: float) -> complex:
        g, t, h, dh, _ = parts(x)
        return complex(g * (dh - 1.5 * t * h))

    def second(x: float) -> complex:
        g, t, h, dh, d2h = parts(x)
        return complex(g * (d2h - 3.0 * t * dh + (3.75 * t * t - 1.5) * h))

    return StateFunction(label, E, value, derivative, second)


def qes_states(b: float) -> Dict[str, StateFunction]:
    """
    The four parity states of the QES potential with n = 2:

        psi+ = cosh^(-3/2) x [cos w - lambda sinh x sin w]
        psi- = cosh^(-3/2) x [sin w + lambda sinh x cos w],   w = (b/2) sinh x

    keyed psi1+, psi1-, psi2+, psi2- (energies E1 < E2).
    """
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    e1, e2 = qes_energies(b)
    lam1, lam2 = _mover_constants(b)
    return {
        "psi1+": _qes_parity_state(b, lam1, +1, "psi1+", e1),
        "psi1-": _qes_parity_state(b, lam1, -1, "psi1-", e1),
        "psi2+": _qes_parity_state(b, lam2, +1, "psi2+", e2),
        "psi2-": _qes_parity_state(b, lam2, -1, "psi2-", e2),
    }


def _qes_mover(b: float, lam: float, direction: int, label: str, E: float) -> StateFunction:
    half_b = 0.5 * b
    sign = 1j * direction

    def value(x: float) -> complex:
        s, c = math.sinh(x), math.cosh(x)
        return c ** -1.5 * (1.0 + sign * lam * s) * cmath.exp(sign * half_b * s)

    def derivative(x: float) -> complex:
        s, c, t = math.sinh(x), math.cosh(x), math.tanh(x)
        amp = 1.0 + sign * lam * s
        d_amp = sign * lam * c
        phase = cmath.exp(sign * half_b * s)
        return c ** -1.5 * phase * (d_amp + amp * (sign * half_b * c - 1.5 * t))

    return StateFunction(label, E, value, derivative)


def qes_movers(b: float) -> Dict[str, StateFunction]:
    """
    Right (r) and left (l) moving total-transmission modes
        psi_j(r,l) = cosh^(-3/2) x (1 +- i lambda_j sinh x) exp(+- i w).
    The parity states are (r + l)/2 and (r - l)/(2i).
    """
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    e1, e2 = qes_energies(b)
    lam1, lam2 = _mover_constants(b)
    return {
        "psi1r": _qes_mover(b, lam1, +1, "psi1r", e1),
        "psi1l": _qes_mover(b, lam1, -1, "psi1l", e1),
        "psi2r": _qes_mover(b, lam2, +1, "psi2r", e2),
        "psi2l": _qes_mover(b, lam2, -1, "psi2l", e2),
    }


class CoshPowerIntegral:
    """F(x) = int_0^x cosh^nu, odd in x, from cached cumulative samples on a 1/4 grid."""

    _STEP = 0.25
    _SPEC = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-14)

    def __init__(self, nu: float):
        self.nu = nu
        self._knots = [0.0]
        self._lock = threading.Lock()

    def _segment(self, a: float, b: float) -> float:
        return integrate(lambda t: math.cosh(t) ** self.nu, a, b, self._SPEC, operation="koley_kar_pair")

    def __call__(self, x: float) -> float:
        ax = abs(x)
        i = int(ax / self._STEP)
        with self._lock:
            while len(self._knots) <= i:
                k = len(self._knots)
                self._knots.append(self._knots[-1] + self._segment((k - 1) * self._STEP, k * self._STEP))
            base = self._knots[i]
        value = base + self._segment(i * self._STEP, ax)
        return math.copysign(value, x) if x != 0.0 else 0.0


def koley_kar_pair(a1: float, nu: float) -> Dict[str, StateFunction]:
    """
    psi+- = cosh^(-nu/2) x {cos, sin}(sqrt(A1) F(x)), F = int_0^x cosh^nu,
    at E = -nu^2/4 for V = -A1 cosh^(2 nu) x - (nu/2)(nu/2 + 1) sech^2 x.
    """
    if not (a1 > 0 and nu > 0):
        raise DomainError(f"need A1 > 0 and nu > 0, got A1={a1}, nu={nu}")
    F = CoshPowerIntegral(nu)
    root_a = math.sqrt(a1)
    kappa = 0.5 * nu * (0.5 * nu + 1.0)
    energy = -0.25 * nu * nu

    def parts(x: float):
        c, s, t = math.cosh(x), math.sinh(x), math.tanh(x)
        u = c ** (-0.5 * nu)
        du = -0.5 * nu * t * u
        d2u = u * (kappa * t * t - 0.5 * nu)
        W = root_a * F(x)
        dW = root_a * c ** nu
        d2W = root_a * nu * c ** (nu - 1.0) * s
        return u, du, d2u, math.cos(W), math.sin(W), dW, d2W

    def plus_value(x):
        u, _, _, cw, _, _, _ = parts(x)
        return complex(u * cw)

    def plus_derivative(x):
        u, du, _, cw, sw, dW, _ = parts(x)
        return complex(du * cw - u * dW * sw)

    def plus_second(x):
        u, du, d2u, cw, sw, dW, d2W = parts(x)
        return complex(d2u * cw - 2.0 * du * dW * sw - u * d2W * sw - u * dW * dW * cw)

    def minus_value(x):
        u, _, _, _, sw, _, _ = parts(x)
        return complex(u * sw)

    def minus_derivative(x):
        u, du, _, cw, sw, dW, _ = parts(x)
        return complex(du * sw + u * dW * cw)

    def minus_second(x):
        u, du, d2u, cw, sw, dW, d2W = parts(x)
        return complex(d2u * sw + 2.0 * du * dW * cw + u * d2W * cw - u * dW * dW * sw)

    return {
        "psi+": StateFunction("psi+", energy, plus_value, plus_derivative, plus_second),
        "psi-": StateFunction("psi-", energy, minus_value, minus_derivative, minus_second),
    }


def wronskian_at(f: StateFunction, g: StateFunction, x: float) -> complex:
    """W[f, g](x) = f'(x) g(x) - f(x) g'(x)."""
    fv, fd = f.evaluate(x)
    gv, gd = g.evaluate(x)
    return fd * gv - fv * gd


_LIMIT_START = 4.0
_LIMIT_RATIO = 1.5
_LIMIT_CAP = 31.0
_LIMIT_TOL = 1e-7


def _limit(f: StateFunction, g: StateFunction, side: float) -> float:
    trace: List[float] = []
    x = _LIMIT_START
    while x <= _LIMIT_CAP:
        trace.append(wronskian_at(f, g, side * x).real)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= _LIMIT_TOL:
            return trace[-1]
        x *= _LIMIT_RATIO
    raise ConvergenceError(
        f"W[{f.label}, {g.label}] at {'+' if side > 0 else '-'}inf did not settle: {trace}",
        best_estimate=trace[-1] if trace else None,
        operation="wronskian_limits",
    )


def wronskian_limits(f: StateFunction, g: StateFunction, closed_form: Optional[float] = None) -> WronskianLimit:
    """Limits of W[f, g] as x -> +inf and x -> -inf along x = 4, 6, 9, 13.5, ..."""
    return WronskianLimit(
        pair=(f.label, g.label),
        limit_plus=_limit(f, g, 1.0),
        limit_minus=_limit(f, g, -1.0),
        closed_form=closed_form,
    )


def qes_wronskian_closed_forms(b: float) -> Dict[Tuple[str, str], float]:
    root = math.sqrt(b * b + 1.0)
    return {
        ("psi1+", "psi1-"): -(b * b + 2.0 - 2.0 * root) / (2.0 * b),
        ("psi1+", "psi2-"): 0.5 * b,
        ("psi2+", "psi1-"): 0.5 * b,
        ("psi2+", "psi2-"): -(b * b + 2.0 + 2.0 * root) / (2.0 * b),
        ("psi1+", "psi2+"): 0.0,
        ("psi1-", "psi2-"): 0.0,
    }


def qes_wronskian_table(b: float) -> List[WronskianLimit]:
    states = qes_states(b)
    return [
        wronskian_limits(states[left], states[right], closed)
        for (left, right), closed in qes_wronskian_closed_forms(b).items()
    ]


RESIDUAL_GRID = np.linspace(-6.0, 6.0, 241)


def schrodinger_residual(f: StateFunction, pot: Potential, E: float, grid=None) -> float:
    """sup over the grid of |f'' + (E - V) f| / (1 + |f''|)."""
    xs = RESIDUAL_GRID if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.abs(xs) > 6.0):
        raise DomainError("residual grid must lie within |x| <= 6")
    worst = 0.0
    for x in xs:
        x = float(x)
        d2 = f.second_derivative(x)
        worst = max(worst, abs(d2 + (E - pot.value(x)) * f.value(x)) / (1.0 + abs(d2)))
    return worst
