"""Shared fixtures: hypothesis profile and the session-wide acceptance sweeps."""

from __future__ import annotations

import time

import pytest
from hypothesis import HealthCheck, settings

from vvlab.analysis import DEFAULT_EPS, channel_preset, convergence_sweep, pipe_preset

settings.register_profile(
    "vvlab", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("vvlab")


def _timed_sweep(case, problem):
    t0 = time.perf_counter()
    table = convergence_sweep(case, problem, DEFAULT_EPS, keep_trajectories=True)
    table.metadata["wall_seconds"] = time.perf_counter() - t0
    return table


@pytest.fixture(scope="session")
def channel_sweep():
    """Reference channel problem swept over the default viscosities."""
    return _timed_sweep("channel", channel_preset("reference"))


@pytest.fixture(scope="session")
def pipe_sweep():
    """Reference pipe problem swept over the default viscosities."""
    return _timed_sweep("pipe", pipe_preset("reference"))


@pytest.fixture(scope="session")
def csf_sweep():
    """Rigid-rotation CSF problem swept over the default viscosities."""
    return _timed_sweep("csf", pipe_preset("csf"))


# --------------------------------------------------------------------------
# Acceptance summary: one PASS/FAIL line per criterion at the end of the run
# --------------------------------------------------------------------------

ACCEPTANCE_LINES: dict = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """Record ``(criterion, passed, detail)``; the line is printed now and in the summary."""

    def record(criterion: int, passed: bool, detail: str) -> str:
        line = f"CRITERION {criterion}: {'PASS' if passed else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES[criterion] = line
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
