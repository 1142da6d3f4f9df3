"""
Self-adjoint extensions as spectra: parity sectors quantized from reference
energies by

    Phi(E_n) = Phi(E_ref) + n pi,    Phi+- = phi + (theta -+ alpha)/2,

assembled into two-parameter, one-parameter (vanishing Wronskian) and
total-transmission-referenced spectra, with degenerate pairs linked.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from errors import BracketError, ConfigError, ConvergenceError, DomainError
from numerics import SolverSettings, find_root, ordered_map, wrap_half_pi
from potentials import Potential, PowerLaw
from scattering import parity_readoff, signed_parity_gap
from wkb import (
    coefficients,
    total_transmission_energies,
    wkb_alpha_theta,
    wkb_phase,
    wkb_phase_closed_form,
    wkb_reflection_estimate,
)

logger = logging.getLogger(__name__)

SCHEMES = ("two_parameter", "one_parameter_vanishing_wronskian", "tt_reference")
PHASE_SOURCES = ("numeric", "wkb_estimate")
_SIGNS = {"+": "even", "-": "odd", "even": "even", "odd": "odd"}
_LABELS = {"even": "+", "odd": "-"}

_SCAN_POINTS = 9
_PHASE_MARGIN = 0.5 * math.pi + 0.25


def _parity(label: str) -> str:
    try:
        return _SIGNS[label]
    except KeyError:
        raise DomainError(f"parity must be '+', '-', 'even' or 'odd', got {label!r}") from None


@dataclass(frozen=True)
class SpectrumSpec:
    pot: Potential
    e_ref_plus: float
    e_ref_minus: float
    n_min: int = 0
    n_max: int = 3
    scheme: str = "two_parameter"
    phase_source: str = "numeric"
    degeneracy_tol: float = 1e-4

    def __post_init__(self):
        if self.n_min > self.n_max:
            raise ConfigError(f"n_min={self.n_min} exceeds n_max={self.n_max}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.phase_source not in PHASE_SOURCES:
            raise ConfigError(f"phase_source must be one of {PHASE_SOURCES}, got {self.phase_source!r}")
        if not self.degeneracy_tol > 0:
            raise ConfigError("degeneracy_tol must be positive")

    @property
    def n_range(self) -> range:
        return range(self.n_min, self.n_max + 1)


@dataclass
class EnergyLevel:
    E: float
    parity: str
    n: int
    degenerate_with: Optional[int] = None
    ambiguous: bool = False


@dataclass
class SpectrumResult:
    levels: List[EnergyLevel]
    scheme: str
    degenerate_pairs: List[Tuple[int, int]] = field(default_factory=list)
    references: Dict[str, float] = field(default_factory=dict)

    @property
    def ambiguous(self) -> List[int]:
        return [i for i, level in enumerate(self.levels) if level.ambiguous]

    def sector(self, parity: str) -> List[EnergyLevel]:
        label = _LABELS[_parity(parity)]
        return [level for level in self.levels if level.parity == label]

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"n": lv.n, "parity": lv.parity, "energy": lv.E, "degenerate_with": lv.degenerate_with}
                for lv in self.levels
            ],
            "degenerate_pairs": [list(pair) for pair in self.degenerate_pairs],
            "scheme": self.scheme,
            "references": dict(self.references),
            "ambiguous": self.ambiguous,
        }


def _phi(pot: Potential, E: float, settings: SolverSettings) -> float:
    if isinstance(pot, PowerLaw):
        return wkb_phase_closed_form(pot.a, pot.p, E)
    return wkb_phase(pot, E, settings.quad)


def sector_phase(
    pot: Potential,
    E: float,
    parity: str,
    phase_source: str = "numeric",
    settings: Optional[SolverSettings] = None,
) -> float:
    """
    Phi(E) for one parity sector.

    numeric:      phi + (delta - phi reduced mod pi), delta from the parity read-off
    wkb_estimate: phi + (theta -+ alpha)/2 with the leading-order alpha, theta
    """
    settings = settings or SolverSettings()
    parity = _parity(parity)
    if phase_source == "numeric":
        r = parity_readoff(pot, E, parity, settings, None)
        return r.phi + wrap_half_pi(r.delta - r.phi)
    if phase_source == "wkb_estimate":
        alpha, theta = wkb_alpha_theta(pot, E, settings.quad)
        sign = -1.0 if parity == "even" else 1.0
        return _phi(pot, E, settings) + 0.5 * (theta + sign * alpha)
    raise ConfigError(f"phase_source must be one of {PHASE_SOURCES}, got {phase_source!r}")


def _energy_for_phi(pot: Potential, value: float, anchor: float, settings: SolverSettings) -> float:
    """E with phi(E) = value; phi increases monotonically without bound."""
    f = lambda e: _phi(pot, e, settings) - value
    step = max(1.0, abs(anchor))
    if f(anchor) < 0.0:
        lo, hi = anchor, anchor + step
        while f(hi) < 0.0:
            lo, hi, step = hi, hi + 2.0 * step, 2.0 * step
    else:
        lo, hi = anchor - step, anchor
        while f(lo) > 0.0:
            lo, hi, step = lo - 2.0 * step, lo, 2.0 * step
    return find_root(f, lo, hi, tol=1e-10 * max(1.0, abs(anchor)), operation="quantize_sector")


def _solve_phase(pot, parity, target, anchor, phase_source, settings) -> List[float]:
    phase = lambda e: sector_phase(pot, e, parity, phase_source, settings) - target
    e_lo = _energy_for_phi(pot, target - _PHASE_MARGIN, anchor, settings)
    e_hi = _energy_for_phi(pot, target + _PHASE_MARGIN, anchor, settings)

    for points in (_SCAN_POINTS, 4 * _SCAN_POINTS):
        grid = np.linspace(e_lo, e_hi, points)
        values = [phase(float(e)) for e in grid]
        roots = []
        for a, b, fa, fb in zip(grid, grid[1:], values, values[1:]):
            if fa == 0.0:
                roots.append(float(a))
            elif fa * fb < 0.0:
                root = find_root(phase, float(a), float(b), tol=1e-11 * max(1.0, abs(a)),
                                 operation="quantize_sector")
                # a sign change across a wrap jump is not a level
                if abs(phase(root)) < 1e-6:
                    roots.append(root)
        if values[-1] == 0.0:
            roots.append(float(grid[-1]))
        if roots:
            return roots
    raise ConvergenceError(f"no level with Phi = {target:.6g} in [{e_lo:.6g}, {e_hi:.6g}]",
                           operation="quantize_sector")


def _quantize(pot, parity, base_phase, anchor, n_range, phase_source, settings, reference=None) -> List[EnergyLevel]:
    label = _LABELS[parity]
    levels: List[EnergyLevel] = []
    for n in n_range:
        if n == 0 and reference is not None:
            levels.append(EnergyLevel(E=reference, parity=label, n=0))
            continue
        roots = _solve_phase(pot, parity, base_phase + n * math.pi, anchor, phase_source, settings)
        if len(roots) > 1:
            logger.warning("%d candidate %s levels for n=%d: %s", len(roots), label, n, roots)
        levels.extend(EnergyLevel(E=e, parity=label, n=n, ambiguous=len(roots) > 1) for e in roots)
    return levels


def quantize_sector(
    pot: Potential,
    E_ref: float,
    parity: str,
    n_range: Iterable[int],
    phase_source: str = "numeric",
    settings: Optional[SolverSettings] = None,
) -> List[EnergyLevel]:
    """
    Levels E_n of one parity sector with Phi(E_n) = Phi(E_ref) + n pi.

    n = 0 returns E_ref itself. Several roots in one pi-slot are all
    returned, flagged ambiguous.
    """
    settings = settings or SolverSettings()
    parity = _parity(parity)
    if not math.isfinite(E_ref):
        raise DomainError(f"E_ref must be finite, got {E_ref}")
    base = sector_phase(pot, E_ref, parity, phase_source, settings)
    return _quantize(pot, parity, base, E_ref, n_range, phase_source, settings, reference=E_ref)


def tt_degeneracy_factor(p: float) -> float:
    """1/(2 cos^2(pi/2p)); the TT-referenced spectrum is degenerate iff this is 1."""
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p}")
    # 2 cos^2(x) = 1 + cos(2x) keeps p = 2 exact
    return 1.0 / (1.0 + math.cos(math.pi / p))


def _signed_reflection(pot: Potential, E: float, phase_source: str, settings: SolverSettings) -> float:
    if phase_source == "numeric":
        return signed_parity_gap(pot, E, settings)
    if isinstance(pot, PowerLaw):
        p = pot.p
        kc = pot.a ** (-1.0 / p) * E ** (0.5 * (1.0 / p + 1.0)) * coefficients(p).C
        return math.cos(2.0 * kc * math.cos(math.pi / (2.0 * p))) * math.exp(-2.0 * kc * math.sin(math.pi / (2.0 * p)))
    return (1j * wkb_reflection_estimate(pot, E)).real


def tt_reference_energy(
    pot: Potential,
    guess: float,
    phase_source: str = "numeric",
    settings: Optional[SolverSettings] = None,
) -> float:
    """The total-transmission energy nearest a guess above the barrier top."""
    settings = settings or SolverSettings()
    if isinstance(pot, PowerLaw) and phase_source == "wkb_estimate":
        count = 1
        energies = total_transmission_energies(pot.a, pot.p, count)
        while energies[-1] < guess:
            count *= 2
            energies = total_transmission_energies(pot.a, pot.p, count)
        return min(energies, key=lambda e: abs(e - guess))

    floor = pot.v_max + 1e-6 * max(1.0, abs(pot.v_max))
    f = lambda e: _signed_reflection(pot, e, phase_source, settings)
    width = 0.25 * max(1.0, abs(guess))
    for _ in range(4):
        grid = np.linspace(max(guess - width, floor), guess + width, _SCAN_POINTS)
        values = [f(float(e)) for e in grid]
        brackets = [
            (float(a), float(b)) for a, b, fa, fb in zip(grid, grid[1:], values, values[1:])
            if fa * fb <= 0.0 and abs(fa - fb) < 0.5 * math.pi
        ]
        if brackets:
            a, b = min(brackets, key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - guess))
            return find_root(f, a, b, tol=1e-11 * max(1.0, abs(guess)), operation="tt_reference_energy")
        width *= 2.0
    raise BracketError(f"no total-transmission energy near {guess}", operation="tt_reference_energy")


def link_degeneracies(levels: List[EnergyLevel], tol: float) -> List[Tuple[int, int]]:
    """Pair each even level with the closest odd level within tol * max(1, |E|)."""
    pairs = []
    taken = set()
    for i, lv in enumerate(levels):
        if lv.parity != "+":
            continue
        best, best_gap = None, math.inf
        for j, other in enumerate(levels):
            if other.parity != "-" or j in taken:
                continue
            gap = abs(lv.E - other.E)
            if gap <= tol * max(1.0, abs(lv.E)) and gap < best_gap:
                best, best_gap = j, gap
        if best is not None:
            taken.add(best)
            lv.degenerate_with = best
            levels[best].degenerate_with = i
            pairs.append((min(i, best), max(i, best)))
    return sorted(pairs)


def build_spectrum(spec: SpectrumSpec, settings: Optional[SolverSettings] = None, jobs: int = 1) -> SpectrumResult:
    settings = settings or SolverSettings()
    pot, source = spec.pot, spec.phase_source
    references: Dict[str, float] = {}

    if spec.scheme == "tt_reference":
        e_tt = tt_reference_energy(pot, spec.e_ref_plus, source, settings)
        references["tt"] = e_tt
        tasks = [("even", e_tt), ("odd", e_tt)]
    elif spec.scheme == "two_parameter":
        references.update({"plus": spec.e_ref_plus, "minus": spec.e_ref_minus})
        tasks = [("even", spec.e_ref_plus), ("odd", spec.e_ref_minus)]
    else:
        references["plus"] = spec.e_ref_plus
        tasks = [("even", spec.e_ref_plus), ("odd", None)]

    def run(task):
        parity, e_ref = task
        if e_ref is not None:
            return quantize_sector(pot, e_ref, parity, spec.n_range, source, settings)
        # vanishing Wronskian: Phi-(E) = Phi+(E_ref+) + (m + 1/2) pi
        base = sector_phase(pot, spec.e_ref_plus, "even", source, settings) + 0.5 * math.pi
        return _quantize(pot, "odd", base, spec.e_ref_plus, spec.n_range, source, settings)

    sectors = ordered_map(run, tasks, jobs=min(jobs, 2))
    levels = sorted((lv for sector in sectors for lv in sector), key=lambda lv: (lv.E, lv.parity))
    pairs = link_degeneracies(levels, spec.degeneracy_tol)
    logger.info("%s spectrum: %d levels, %d degenerate pairs", spec.scheme, len(levels), len(pairs))
    return SpectrumResult(levels=levels, scheme=spec.scheme, degenerate_pairs=pairs, references=references)


def _cosine_phase(pot: Potential, level: EnergyLevel, settings: SolverSettings) -> float:
    parity = _parity(level.parity)
    delta = parity_readoff(pot, level.E, parity, settings, None).delta
    return delta if parity == "even" else delta - 0.5 * math.pi


def asymptotic_wronskian(
    pot: Potential,
    level_a: EnergyLevel,
    level_b: EnergyLevel,
    settings: Optional[SolverSettings] = None,
) -> Tuple[float, float]:
    """
    Limits of W[psi_a, psi_b] at +inf and -inf, normalised by the product of
    the WKB amplitudes of the two parity solutions.

    With psi ~ k^(-1/2) cos(u + delta_c) on the right, W(+inf) = sin(delta_c_b - delta_c_a);
    reflecting x -> -x gives W(-inf) = -p_a p_b W(+inf).
    """
    settings = settings or SolverSettings()
    w_plus = math.sin(_cosine_phase(pot, level_b, settings) - _cosine_phase(pot, level_a, settings))
    p_a = 1.0 if level_a.parity == "+" else -1.0
    p_b = 1.0 if level_b.parity == "+" else -1.0
    return w_plus, -p_a * p_b * w_plus
