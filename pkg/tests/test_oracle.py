from __future__ import annotations

import pytest

from htnact.constraints import (
    Before,
    Between,
    Constraint,
    LabelRef,
    Ordering,
    TaskNetwork,
)
from htnact.domain import Method, Operator, make_domain
from htnact.model import Atom, Constant, LabelledTask, Literal, Task, Variable
from htnact.oracle import completions, solutions_bounded

loc1 = Constant("loc1")


def net(tasks, constraints=()):
    return TaskNetwork(frozenset(tasks), frozenset(constraints))


@pytest.fixture(scope="module")
def tiny():
    """Two effects-bearing actions and one refinable task."""
    p, q = Atom("p"), Atom("q")
    operators = [
        Operator("mk", (), (), (p,), ()),
        Operator("rm", (), (), (), (p,)),
        Operator("chk", (), (Literal(p),), (q,), ()),
    ]
    body = net(
        [LabelledTask("1", Task("mk")), LabelledTask("2", Task("chk"))],
        [Constraint(Ordering(LabelRef("1"), LabelRef("2")))],
    )
    methods = [Method("m", Task("go"), body)]
    return make_domain("tiny", operators, methods)


def test_completions_of_unordered_pair(tiny):
    d = net([LabelledTask("a", Task("mk")), LabelledTask("b", Task("rm"))])
    got = completions(d, frozenset(), tiny)
    assert got == {
        (Task("mk"), Task("rm")),
        (Task("rm"), Task("mk")),
    }


def test_completions_collapse_identical_tasks(tiny):
    d = net([LabelledTask("a", Task("nop")), LabelledTask("b", Task("nop"))])
    got = completions(d, frozenset(), tiny)
    assert got == {(Task("nop"), Task("nop"))}


def test_completions_empty_for_nonprimitive_network(tiny):
    d = net([LabelledTask("a", Task("go"))])
    assert completions(d, frozenset(), tiny) == frozenset()


def test_completions_respect_executability(tiny):
    d = net([LabelledTask("a", Task("chk"))])
    assert completions(d, frozenset(), tiny) == frozenset()
    assert completions(d, frozenset({Atom("p")}), tiny) == {(Task("chk"),)}


def test_completions_check_before_constraints_positionally(tiny):
    # b requires p just before it; only the order that asserts p first works
    d = net(
        [LabelledTask("a", Task("mk")), LabelledTask("b", Task("rm"))],
        [
            Constraint(Ordering(LabelRef("a"), LabelRef("b"))),
            Constraint(Before(Literal(Atom("p")), LabelRef("b"))),
        ],
    )
    assert completions(d, frozenset(), tiny) == {(Task("mk"), Task("rm"))}
    unordered = net(
        [LabelledTask("a", Task("mk")), LabelledTask("b", Task("rm"))],
        [Constraint(Before(Literal(Atom("p")), LabelRef("b")))],
    )
    assert completions(unordered, frozenset(), tiny) == {(Task("mk"), Task("rm"))}


def test_completions_check_negated_before(tiny):
    d = net(
        [LabelledTask("a", Task("mk")), LabelledTask("b", Task("rm"))],
        [Constraint(Before(Literal(Atom("p")), LabelRef("b")), negated=True)],
    )
    assert completions(d, frozenset(), tiny) == {(Task("rm"), Task("mk"))}


def test_completions_check_after_constraints(tiny):
    from htnact.constraints import After

    d = net(
        [LabelledTask("a", Task("mk")), LabelledTask("b", Task("rm"))],
        [Constraint(After(LabelRef("a"), Literal(Atom("p"))))],
    )
    # p must hold right after a: rm must not immediately follow... it may,
    # since the check is the state just after a, before b runs
    assert completions(d, frozenset(), tiny) == {
        (Task("mk"), Task("rm")),
        (Task("rm"), Task("mk")),
    }
    d2 = net(
        [LabelledTask("a", Task("nop")), LabelledTask("b", Task("mk"))],
        [Constraint(After(LabelRef("a"), Literal(Atom("p"))))],
    )
    assert completions(d2, frozenset(), tiny) == {
        (Task("mk"), Task("nop")),
    }


def test_completions_check_between_constraints(tiny):
    d = net(
        [
            LabelledTask("a", Task("mk")),
            LabelledTask("b", Task("rm")),
            LabelledTask("c", Task("nop")),
        ],
        [
            Constraint(Ordering(LabelRef("a"), LabelRef("c"))),
            Constraint(Between(LabelRef("a"), Literal(Atom("p")), LabelRef("c"))),
        ],
    )
    got = completions(d, frozenset(), tiny)
    # rm between a and c would break the window requirement on p
    assert (Task("mk"), Task("rm"), Task("nop")) not in got
    assert (Task("mk"), Task("nop"), Task("rm")) in got
    assert (Task("rm"), Task("mk"), Task("nop")) in got


def test_completions_ground_variables_against_the_universe():
    move = Operator(
        "goto",
        (Variable("W"),),
        (Literal(Atom("at", (Variable("W"),)), positive=False),),
        (Atom("at", (Variable("W"),)),),
        (),
    )
    domain = make_domain("g", [move], [])
    d = net([LabelledTask("a", Task("goto", (Variable("W"),)))])
    state = frozenset({Atom("at", (loc1,)), Atom("near", (Constant("x"),))})
    got = completions(d, state, domain)
    assert got == {(Task("goto", (Constant("x"),)),)}


def test_solutions_of_primitive_network_equal_completions(tiny):
    d = net([LabelledTask("a", Task("mk"))])
    assert solutions_bounded(d, frozenset(), tiny, 3) == completions(
        d, frozenset(), tiny
    )


def test_solutions_grow_monotonically_with_depth(tiny):
    d = net([LabelledTask("g", Task("go")), LabelledTask("z", Task("nop"))])
    shallow = solutions_bounded(d, frozenset(), tiny, 1)
    deeper = solutions_bounded(d, frozenset(), tiny, 2)
    deepest = solutions_bounded(d, frozenset(), tiny, 3)
    assert shallow <= deeper <= deepest
    assert deeper == deepest  # stabilizes once everything is primitive


def test_solutions_depth_zero_rejected(tiny):
    d = net([LabelledTask("a", Task("mk"))])
    with pytest.raises(ValueError):
        solutions_bounded(d, frozenset(), tiny, 0)


def test_rover_solution_set(rover, rover_nocali):
    solutions = solutions_bounded(
        rover_nocali.network, rover_nocali.state, rover, 4
    )
    rendered = {" . ".join(map(str, s)) for s in solutions}
    assert rendered == {
        "monitor . estabConn . extData(loc1) . sendExtData(loc1) . breakConn"
    }


def test_rover_solutions_never_mix_recipes(rover, rover_nocali):
    solutions = solutions_bounded(
        rover_nocali.network, rover_nocali.state, rover, 4
    )
    for seq in solutions:
        symbols = {t.symbol for t in seq}
        assert not ({"calibrate", "estabConn"} <= symbols)


def test_completions_are_permutations_of_the_tasks(tiny):
    d = net([LabelledTask("a", Task("mk")), LabelledTask("b", Task("rm"))])
    for seq in completions(d, frozenset(), tiny):
        assert sorted(t.symbol for t in seq) == ["mk", "rm"]
