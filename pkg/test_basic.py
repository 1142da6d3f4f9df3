#!/usr/bin/env python3
"""
Quick smoke test of the toolkit: imports, the check registry and a few fast checks.
"""

import pytest

import verify
from verify import CHECKS, VerificationRunner

QUICK_CHECKS = ["wkb-coefficients", "cb-relation", "tt-energies", "flight-time"]


def test_modules_import():
    """Every module loads without side effects."""
    import cli  # noqa: F401
    import exact_states  # noqa: F401
    import numerics  # noqa: F401
    import potentials  # noqa: F401
    import scattering  # noqa: F401
    import spectrum  # noqa: F401
    import wkb  # noqa: F401


def test_check_registry():
    assert len(CHECKS) == 10
    assert set(QUICK_CHECKS) <= set(CHECKS)


def test_quick_checks_pass():
    runner = VerificationRunner()
    seen = []
    result = runner.run(QUICK_CHECKS, on_result=seen.append)

    assert result["success"], result["execution_log"]
    assert [r.check_name for r in seen] == QUICK_CHECKS
    assert [entry["check"] for entry in result["execution_log"]] == QUICK_CHECKS
    assert set(result["results"]) == set(QUICK_CHECKS)


def test_failing_check_is_logged(monkeypatch):
    def broken(settings):
        raise verify.CheckFailed("tolerance exceeded")

    monkeypatch.setitem(CHECKS, "broken", broken)
    result = VerificationRunner().run(["tt-energies", "broken"])

    assert not result["success"]
    assert "broken" not in result["results"]
    entry = result["execution_log"][-1]
    assert entry["check"] == "broken"
    assert entry["success"] is False
    assert entry["error"] == "CheckFailed: tolerance exceeded"


@pytest.mark.slow
def test_all_checks_pass():
    assert VerificationRunner().run()["success"]
