from pathlib import Path

import numpy as np
import pytest

from teleconnect.report import PipelineConfig, run_analysis

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def default_config() -> PipelineConfig:
    return PipelineConfig.from_file(FIXTURES / "default_config.json")


@pytest.fixture(scope="session")
def report(default_config):
    """One in-memory pipeline run on the shipped fixtures, shared across modules."""
    return run_analysis(default_config)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary -----------------------------------------------------------

_CRITERIA: dict = {}
_SESSION_START = [0.0]


def record_criterion(number, line, details):
    _CRITERIA[number] = (line, details)


def pytest_sessionstart(session):
    import time

    _SESSION_START[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time

    if not _CRITERIA:
        return
    elapsed = time.perf_counter() - _SESSION_START[0]
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number][0])
    status = "PASS" if elapsed < 60 else "FAIL"
    terminalreporter.write_line(f"criterion 7 (runtime): {status}: full suite took {elapsed:.1f} s (limit 60 s)")
