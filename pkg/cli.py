#!/usr/bin/env python3
"""
CLI for self-adjoint extension computations on potentials unbounded below.

Usage: python cli.py <command> [options]

Every JSON artifact carries {"potential", "config", "results"}; numbers are
written with 12 significant digits so identical configs give identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from errors import ConfigError, DomainError, NumericsError
from exact_states import qes_wronskian_table
from numerics import SolverSettings, ordered_map
from potentials import FAMILIES, Potential, QES, PowerLaw, flight_time, potential_from_dict
from scattering import alpha_theta_from_parity, extract_alpha_theta, solve_scattering, tt_energies_numeric
from spectrum import SpectrumSpec, build_spectrum
from verify import CHECKS, VerificationRunner
from wkb import phase_triple, total_transmission_energies, wkb_phase

logger = logging.getLogger("saext")

COMMANDS = ("phases", "scatter", "spectrum", "tt-modes", "wronskian", "flight-time", "verify")
SCHEME_NAMES = {"two": "two_parameter", "one": "one_parameter_vanishing_wronskian", "tt": "tt_reference"}
METHOD_NAMES = {"numeric": "numeric", "wkb": "wkb_estimate"}
CSV_HEADER = ("energy", "phi", "alpha", "theta", "method")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICS = 0, 1, 2, 3


@dataclass
class CommandConfig:
    command: str
    potential: Dict[str, Any] = field(default_factory=lambda: {"family": "power", "a": 1.0, "p": 2.0})
    energy: Optional[float] = None
    emin: Optional[float] = None
    emax: Optional[float] = None
    samples: int = 25
    eref_plus: Optional[float] = None
    eref_minus: Optional[float] = None
    scheme: str = "two"
    method: str = "numeric"
    n_min: int = 0
    n_max: int = 3
    count: int = 3
    numeric: bool = False
    x_from: float = 0.0
    x_to: float = math.inf
    out: Optional[str] = None
    fmt: str = "json"
    jobs: int = 1
    settings: SolverSettings = field(default_factory=SolverSettings)

    def validate(self) -> Potential:
        """Check the config and build its potential; raises ConfigError."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.scheme not in SCHEME_NAMES:
            raise ConfigError(f"--scheme must be one of {sorted(SCHEME_NAMES)}")
        if self.method not in METHOD_NAMES:
            raise ConfigError(f"--method must be one of {sorted(METHOD_NAMES)}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.fmt == "csv" and self.command != "phases":
            raise ConfigError("CSV output is only available for phases")
        if self.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if self.command in ("phases", "tt-modes") and (self.command == "phases" or self.numeric):
            if self.emin is None or self.emax is None:
                raise ConfigError("--emin and --emax are required")
            if not self.emin < self.emax:
                raise ConfigError(f"grid needs emin < emax, got [{self.emin}, {self.emax}]")
            if self.samples < 2:
                raise ConfigError("--samples must be >= 2")
            if self.command == "tt-modes" and self.samples < 3:
                raise ConfigError("--samples must be >= 3 to locate |R|^2 minima")
        if self.command in ("scatter", "flight-time") and self.energy is None:
            raise ConfigError("--energy is required")
        if self.command == "spectrum" and self.eref_plus is None:
            raise ConfigError("--eref-plus is required")
        if self.command == "spectrum" and self.scheme == "two" and self.eref_minus is None:
            raise ConfigError("--eref-minus is required for the two-parameter scheme")
        if self.n_min > self.n_max:
            raise ConfigError("--n-min exceeds --n-max")
        pot = potential_from_dict(self.potential)
        if self.command == "wronskian" and not isinstance(pot, QES):
            raise ConfigError("wronskian tables exist for --potential qes only")
        if self.command == "tt-modes" and not self.numeric and not isinstance(pot, PowerLaw):
            raise ConfigError("closed-form TT energies exist for --potential power only; add --numeric")
        return pot

    def provenance(self) -> Dict[str, Any]:
        s = self.settings
        config = {
            "command": self.command,
            "tolerances": {"ode": s.ode_tol, "quad_abs": s.quad.abs_tol, "quad_rel": s.quad.rel_tol,
                           "wkb_eps": s.wkb_eps},
        }
        extra = {
            "phases": {"emin": self.emin, "emax": self.emax, "samples": self.samples, "method": self.method},
            "scatter": {"energy": self.energy},
            "spectrum": {"eref_plus": self.eref_plus, "eref_minus": self.eref_minus,
                         "scheme": SCHEME_NAMES[self.scheme], "method": METHOD_NAMES[self.method],
                         "n_min": self.n_min, "n_max": self.n_max},
            "tt-modes": {"count": self.count, "numeric": self.numeric, "emin": self.emin, "emax": self.emax,
                         "samples": self.samples},
            "wronskian": {},
            "flight-time": {"energy": self.energy, "x_from": self.x_from, "x_to": self.x_to},
            "verify": {},
        }[self.command]
        config.update(extra)
        return config


def rounded(value: Any) -> Any:
    """Round every float to 12 significant digits, recursively."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
        return float(f"{value:.12g}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v) for v in value]
    return value


def status(message: str):
    print(message, file=sys.stderr)


def run_phases(pot: Potential, config: CommandConfig) -> List[List[Any]]:
    """Rows (energy, phi, alpha, theta, method) in ascending energy."""
    energies = [float(e) for e in np.linspace(config.emin, config.emax, config.samples)]
    settings = config.settings
    status(f"📈 Phases for {pot.family} on [{config.emin}, {config.emax}] ({config.samples} points, {config.method})")

    def row(E: float) -> List[Any]:
        if config.method == "wkb":
            t = phase_triple(pot, E, settings.quad)
            return [E, t.phi, t.alpha, t.theta, "wkb"]
        alpha, theta = alpha_theta_from_parity(pot, E, settings)
        return [E, wkb_phase(pot, E, settings.quad), alpha, theta, "numeric"]

    return ordered_map(row, energies, jobs=config.jobs, desc="phases", progress=True)


def run_scatter(pot: Potential, config: CommandConfig) -> Dict[str, Any]:
    status(f"🌊 Scattering off {pot.family} at E={config.energy}")
    amps = solve_scattering(pot, config.energy, config.settings)
    alpha, theta = extract_alpha_theta(amps)
    return {
        "energy": amps.E,
        "R": {"re": amps.R.real, "im": amps.R.imag},
        "T": {"re": amps.T.real, "im": amps.T.imag},
        "alpha": alpha,
        "theta": theta,
        "unitarity_residual": amps.residual_unitarity,
        "x_max": amps.x_max,
    }


def run_spectrum(pot: Potential, config: CommandConfig) -> Dict[str, Any]:
    scheme = SCHEME_NAMES[config.scheme]
    status(f"🎼 Building {scheme} spectrum for {pot.family} ({METHOD_NAMES[config.method]} phases)")
    spec = SpectrumSpec(
        pot,
        e_ref_plus=config.eref_plus,
        e_ref_minus=config.eref_minus if config.eref_minus is not None else config.eref_plus,
        n_min=config.n_min,
        n_max=config.n_max,
        scheme=scheme,
        phase_source=METHOD_NAMES[config.method],
    )
    result = build_spectrum(spec, config.settings, jobs=config.jobs)
    status(f"✅ {len(result.levels)} levels, {len(result.degenerate_pairs)} degenerate pairs")
    if result.ambiguous:
        status(f"⚠️  Ambiguous levels at indices {result.ambiguous}")
    return result.to_dict()


def run_tt_modes(pot: Potential, config: CommandConfig) -> Dict[str, Any]:
    results: Dict[str, Any] = {}
    if isinstance(pot, PowerLaw):
        results["closed_form"] = total_transmission_energies(pot.a, pot.p, config.count)
    if config.numeric:
        status(f"🔎 Scanning |R|^2 on [{config.emin}, {config.emax}] ({config.samples} points)")
        minima = tt_energies_numeric(pot, config.emin, config.emax, config.samples, config.settings,
                                     jobs=config.jobs, progress=True)
        results["numeric"] = [{"energy": m.E, "reflection_probability": m.reflection_probability} for m in minima]
    return results


def run_wronskian(pot: QES, config: CommandConfig) -> List[Dict[str, Any]]:
    status(f"🧮 Wronskian limits for QES b={pot.b}")
    return [
        {"pair": list(row.pair), "plus_infinity": row.limit_plus, "minus_infinity": row.limit_minus,
         "closed_form": row.closed_form}
        for row in qes_wronskian_table(pot.b)
    ]


def run_flight_time(pot: Potential, config: CommandConfig) -> float:
    return flight_time(pot, config.energy, config.x_from, config.x_to, config.settings.quad)


def run_verify(config: CommandConfig) -> Dict[str, Any]:
    """Run the acceptance checks and print an execution log like a pipeline run."""
    runner = VerificationRunner(config.settings)

    status("🤖 Running acceptance checks")
    status("=" * 50)

    def report(result):
        icon = "✅" if result.success else "❌"
        status(f"{icon} {result.check_name} ({result.seconds:.1f}s)")
        if result.error:
            status(f"   Error: {result.error}")

    result = runner.run(list(CHECKS), on_result=report)
    passed = sum(1 for entry in result["execution_log"] if entry["success"])
    status(f"\n{'🎉' if result['success'] else '❌'} {passed}/{len(CHECKS)} checks passed")
    return result


def emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
        status(f"💾 Saved to {out}")
    else:
        sys.stdout.write(text)


def to_csv(rows: List[List[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run(config: CommandConfig) -> int:
    """Dispatch one command; returns the process exit code."""
    try:
        pot = config.validate()
    except (ConfigError, DomainError) as e:
        status(f"❌ Invalid configuration: {e}")
        return EXIT_CONFIG

    try:
        if config.command == "verify":
            result = run_verify(config)
            emit(json.dumps(rounded({"potential": pot.to_dict(), "config": config.provenance(),
                                     "results": result}), indent=2) + "\n", config.out)
            return EXIT_OK if result["success"] else EXIT_FAILED

        if config.command == "phases":
            rows = run_phases(pot, config)
            if config.fmt == "csv":
                emit(to_csv(rows), config.out)
                return EXIT_OK
            results: Any = [dict(zip(CSV_HEADER, row)) for row in rows]
        elif config.command == "scatter":
            results = run_scatter(pot, config)
        elif config.command == "spectrum":
            results = run_spectrum(pot, config)
        elif config.command == "tt-modes":
            results = run_tt_modes(pot, config)
        elif config.command == "wronskian":
            results = run_wronskian(pot, config)
        else:
            results = run_flight_time(pot, config)
    except NumericsError as e:
        # the message already starts with the operation name
        status(f"❌ Numerical failure in {e}")
        return EXIT_NUMERICS
    except DomainError as e:
        status(f"❌ {e}")
        return EXIT_NUMERICS

    document = {"potential": pot.to_dict(), "config": config.provenance(), "results": results}
    emit(json.dumps(rounded(document), indent=2) + "\n", config.out)
    return EXIT_OK


def settings_from_args(args: argparse.Namespace) -> SolverSettings:
    settings = SolverSettings.from_env()
    if args.tol_ode is not None:
        settings = replace(settings, ode_tol=args.tol_ode)
    if args.tol_eps is not None:
        settings = replace(settings, wkb_eps=args.tol_eps)
    if args.tol_quad is not None:
        settings = replace(settings, quad=replace(settings.quad, abs_tol=args.tol_quad, rel_tol=args.tol_quad))
    return settings


def potential_spec_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    names = {"power": ("a", "p"), "qes": ("b", "n"), "coshkar": ("a1", "nu")}[args.potential]
    spec: Dict[str, Any] = {"family": args.potential}
    for name in names:
        value = getattr(args, name)
        if value is not None:
            spec[name] = value
    for name in ("a", "p", "b", "n", "a1", "nu"):
        if name not in names and getattr(args, name) is not None:
            raise ConfigError(f"--{name} does not apply to --potential {args.potential}")
    return spec


def config_from_args(args: argparse.Namespace) -> CommandConfig:
    fmt = args.format or ("csv" if args.command == "phases" else "json")
    return CommandConfig(
        command=args.command,
        potential=potential_spec_from_args(args),
        energy=args.energy,
        emin=args.emin,
        emax=args.emax,
        samples=args.samples,
        eref_plus=args.eref_plus,
        eref_minus=args.eref_minus,
        scheme=args.scheme,
        method=args.method,
        n_min=args.n_min,
        n_max=args.n_max,
        count=args.count,
        numeric=args.numeric,
        x_from=args.x_from,
        x_to=args.x_to,
        out=args.out,
        fmt=fmt,
        jobs=args.jobs,
        settings=settings_from_args(args),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Self-adjoint extensions of symmetric potentials unbounded below",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # WKB phase table for -x^4
  python cli.py phases --potential power --a 1 --p 2 --emin -5 --emax 10 --samples 31

  # Reflection and transmission at one energy
  python cli.py scatter --potential power --a 1 --p 2 --energy 3

  # Spectrum referenced to the lowest total-transmission energy
  python cli.py spectrum --potential power --scheme tt --eref-plus 1.4 --n-min -2 --n-max 2

  # Total-transmission energies, closed form and |R|^2 minima
  python cli.py tt-modes --potential power --a 1 --p 2 --count 3 --numeric --emin 0.5 --emax 13

  # Exact QES Wronskian table
  python cli.py wronskian --potential qes --b 2

  # Classical time to reach infinity
  python cli.py flight-time --potential power --a 1 --p 2 --energy 0 --from 1

  # Acceptance checks
  python cli.py verify
        """,
    )
    parser.add_argument("command", choices=COMMANDS, help="What to compute")

    pot = parser.add_argument_group("potential")
    pot.add_argument("--potential", choices=sorted(FAMILIES), default="power", help="Potential family")
    pot.add_argument("--a", type=float, help="power: V = -a^2 |x|^(2p)")
    pot.add_argument("--p", type=float, help="power: exponent, p > 1")
    pot.add_argument("--b", type=float, help="qes: sinh^2 coefficient b^2/4")
    pot.add_argument("--n", type=int, help="qes: sech^2 index")
    pot.add_argument("--a1", type=float, help="coshkar: cosh^(2 nu) amplitude")
    pot.add_argument("--nu", type=float, help="coshkar: cosh exponent")

    energy = parser.add_argument_group("energy")
    energy.add_argument("--energy", type=float, help="Single energy")
    energy.add_argument("--emin", type=float, help="Grid start")
    energy.add_argument("--emax", type=float, help="Grid end")
    energy.add_argument("--samples", type=int, default=25, help="Grid points (default 25)")
    energy.add_argument("--eref-plus", type=float, help="Even-sector reference energy")
    energy.add_argument("--eref-minus", type=float, help="Odd-sector reference energy")

    method = parser.add_argument_group("method")
    method.add_argument("--scheme", choices=sorted(SCHEME_NAMES), default="two", help="Spectrum scheme")
    method.add_argument("--method", choices=sorted(METHOD_NAMES), default="numeric", help="Phase source")
    method.add_argument("--n-min", type=int, default=0, help="Lowest level index")
    method.add_argument("--n-max", type=int, default=3, help="Highest level index")
    method.add_argument("--count", type=int, default=3, help="Number of closed-form TT energies")
    method.add_argument("--numeric", action="store_true", help="tt-modes: also locate |R|^2 minima")
    method.add_argument("--from", "--x-from", dest="x_from", type=float, default=0.0, help="flight-time start")
    method.add_argument("--x-to", type=float, default=math.inf, help="flight-time end (default inf)")

    output = parser.add_argument_group("output")
    output.add_argument("--out", help="Write the artifact here instead of stdout")
    output.add_argument("--format", choices=["csv", "json"], help="Artifact format")
    output.add_argument("--jobs", type=int, default=int(os.environ.get("SAEXT_JOBS", 1)), help="Worker threads")
    output.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    tol = parser.add_argument_group("tolerances")
    tol.add_argument("--tol-ode", type=float, help="ODE tolerance (SAEXT_ODE_TOL)")
    tol.add_argument("--tol-quad", type=float, help="Quadrature abs/rel tolerance (SAEXT_QUAD_*_TOL)")
    tol.add_argument("--tol-eps", type=float, help="WKB validity eps (SAEXT_WKB_EPS)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else os.environ.get("SAEXT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = config_from_args(args)
    except (ConfigError, ValueError) as e:
        status(f"❌ Invalid configuration: {e}")
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
