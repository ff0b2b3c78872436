import warnings
from pathlib import Path

import pytest

from lambert3b.scenario_io import load_scenario
from lambert3b.two_body import derive_constants

FIXTURES = Path(__file__).parent / "fixtures"


def load(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return load_scenario(FIXTURES / f"{name}.toml")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def pinned():
    cfg, icfg = load("pinned")
    return cfg, icfg, derive_constants(cfg)


@pytest.fixture(scope="session")
def deep():
    cfg, icfg = load("deep_escape")
    return cfg, icfg, derive_constants(cfg)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in REPORT:
        terminalreporter.write_line(line)
