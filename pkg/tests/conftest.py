"""Shared fixtures.  The expensive runs are computed once per session."""
from __future__ import annotations

import json
import pathlib

import pytest

from ksprofile import (ModelParams, SelfSimilarSolution, find_critical_lambda,
                       minimize_constrained)
from ksprofile.selfsim import algebraic_tail, gaussian_tail
from ksprofile.shooting import solve

DATA = pathlib.Path(__file__).parent / "data"

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(lines):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}")


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion, then assert it.

    The line is printed immediately (visible with ``-s``) and repeated in the
    terminal summary.
    """
    def record(k: int, ok: bool, detail: str):
        ok = bool(ok)
        request.config.stash[_LINES].append((k, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}")
        assert ok, f"criterion {k}: {detail}"
    return record


@pytest.fixture(scope="session")
def goldens():
    return json.loads((DATA / "oracle_goldens.json").read_text())


@pytest.fixture(scope="session")
def params_a2():
    """N=1, alpha=2: kappa = -1/2, q = 3."""
    return ModelParams.create(1, 1.0, 1.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def params_a15():
    """N=1, alpha=1.5: kappa = -1, q = 2.5."""
    return ModelParams.create(1, 1.0, 1.0, 1.0, 1.5)


@pytest.fixture(scope="session")
def crit_a2(params_a2):
    return find_critical_lambda(params_a2, (0.01, 100.0))


@pytest.fixture(scope="session")
def crit_a15(params_a15):
    return find_critical_lambda(params_a15, (0.01, 100.0))


@pytest.fixture(scope="session")
def half_a2(params_a2, crit_a2):
    """Global profile at half the critical parameter."""
    return solve(params_a2, 0.5 * crit_a2.lambda_star)


@pytest.fixture(scope="session")
def sss_a2(half_a2):
    return SelfSimilarSolution.from_profile(half_a2, tail=algebraic_tail(half_a2))


@pytest.fixture(scope="session")
def sss_a15(crit_a15):
    lo, hi = crit_a15.profiles
    return SelfSimilarSolution.from_profile(lo, tail=gaussian_tail(lo, hi))


@pytest.fixture(scope="session")
def var_a15(params_a15):
    return minimize_constrained(params_a15)
