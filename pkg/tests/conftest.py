from __future__ import annotations

import pytest

from htnact.fixtures import fixture_text
from htnact.syntax import parse_domain, parse_problem, parse_scenario


@pytest.fixture(scope="session")
def rover():
    result = parse_domain(fixture_text("rover.htn"), "rover")
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.value


@pytest.fixture(scope="session")
def rover_jump():
    result = parse_domain(fixture_text("rover_jump.htn"), "rover-jump")
    assert result.ok
    return result.value


@pytest.fixture(scope="session")
def rover_problem(rover):
    result = parse_problem(fixture_text("rover.prob"), rover)
    assert result.ok
    return result.value


@pytest.fixture(scope="session")
def rover_nocali(rover):
    result = parse_problem(fixture_text("rover_nocali.prob"), rover)
    assert result.ok
    return result.value


@pytest.fixture(scope="session")
def walkthrough_scenario(rover):
    result = parse_scenario(fixture_text("walkthrough.evt"), rover)
    assert result.ok
    return result.value


@pytest.fixture(scope="session")
def walkthrough_script():
    return fixture_text("walkthrough.choices")


@pytest.fixture(scope="session")
def agent_walkthrough_script():
    return fixture_text("agent_walkthrough.choices")
