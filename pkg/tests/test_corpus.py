from __future__ import annotations

from htnact.corpus import corpus, random_case
from htnact.domain import validate_domain


def test_cases_are_reproducible():
    a = random_case(5)
    b = random_case(5)
    assert a.domain == b.domain
    assert a.network == b.network
    assert a.state == b.state


def test_cases_validate_and_respect_bounds():
    for case in corpus(30, 0):
        assert validate_domain(case.domain).ok
        per_symbol: dict[str, int] = {}
        for m in case.domain.methods:
            per_symbol[m.head.symbol] = per_symbol.get(m.head.symbol, 0) + 1
            assert 1 < len(m.body.tasks) <= 4
        assert all(n <= 3 for n in per_symbol.values())
        constants = {c.name for c in case.domain.constants}
        assert len(constants) <= 6
        assert len(case.network.tasks) <= 2


def test_schedules_obey_the_observation_stipulation():
    from htnact.agent import check_observable

    for case in corpus(20, 50, with_schedule=True):
        for batch in case.schedule.values():
            for _, task in batch:
                assert check_observable(task, case.domain) is None
