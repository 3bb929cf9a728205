import hypothesis
import pytest

from nrmobility.config import ScenarioConfig, config_hash
from nrmobility.engine import run

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")


_RUNS = {}


def cached_run(cfg: ScenarioConfig, elements: int):
    """Full simulations are expensive; share them across tests by (config, element count).

    Configs hold a dict field and are not hashable, so the cache keys on the config hash.
    """
    key = (config_hash(cfg), elements)
    if key not in _RUNS:
        _RUNS[key] = run(cfg, elements)
    return _RUNS[key]


@pytest.fixture
def default_cfg():
    return ScenarioConfig().validate()


@pytest.fixture
def short_cfg():
    return ScenarioConfig(sim_duration=3.0, num_ues=4).validate()


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, passed: bool, detail: str) -> None:
    """Record (and print) one acceptance verdict line."""
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
