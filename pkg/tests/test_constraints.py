from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from htnact.constraints import (
    Before,
    Constraint,
    FirstRef,
    LabelRef,
    LastRef,
    Ordering,
    holds,
    precedence_closure,
    rewrite_labels,
    transitive_closure,
)
from htnact.model import Atom, Constant, Literal, Variable


def ordc(a: str, b: str) -> Constraint:
    return Constraint(Ordering(LabelRef(a), LabelRef(b)))


def test_transitive_closure_adds_chain_edge():
    closed = transitive_closure(frozenset({ordc("1", "2"), ordc("2", "3")}))
    assert ordc("1", "3") in closed


def test_transitive_closure_empty():
    assert transitive_closure(frozenset()) == frozenset()


def test_transitive_closure_no_chain():
    formula = frozenset({ordc("a", "b")})
    assert transitive_closure(formula) == formula


def test_transitive_closure_idempotent_and_monotone():
    formula = frozenset({ordc("1", "2"), ordc("2", "3"), ordc("3", "4")})
    once = transitive_closure(formula)
    assert transitive_closure(once) == once
    assert formula <= once
    assert all(isinstance(c.body, Ordering) for c in once - formula)


labels = st.sampled_from(["1", "2", "3", "4"])


@given(st.sets(st.tuples(labels, labels), max_size=6))
def test_transitive_closure_idempotent_random(pairs):
    formula = frozenset(ordc(a, b) for a, b in pairs)
    once = transitive_closure(formula)
    assert transitive_closure(once) == once
    assert formula <= once


def test_rewrite_labels_inside_first():
    lander = Literal(Atom("lander", (Variable("L"),)))
    before = Constraint(Before(lander, FirstRef(frozenset({"11", "12"}))))
    rewritten = rewrite_labels(
        rewrite_labels(frozenset({before}), "11", frozenset({"8", "9", "10"})),
        "12",
        frozenset({"8", "9", "10"}),
    )
    assert rewritten == frozenset(
        {Constraint(Before(lander, FirstRef(frozenset({"8", "9", "10"}))))}
    )


def test_rewrite_labels_without_mention_is_identity():
    formula = frozenset({ordc("a", "b")})
    assert rewrite_labels(formula, "zz", frozenset({"q"})) == formula


def test_rewrite_labels_can_drop_from_last():
    c = Constraint(Ordering(LastRef(frozenset({"11", "12"})), LabelRef("7")))
    got = rewrite_labels(frozenset({c}), "11", frozenset())
    assert got == frozenset(
        {Constraint(Ordering(LastRef(frozenset({"12"})), LabelRef("7")))}
    )


def test_rewrite_preserves_constraint_count():
    lander = Literal(Atom("lander", (Variable("L"),)))
    formula = frozenset(
        {
            Constraint(Before(lander, FirstRef(frozenset({"1", "2"})))),
            ordc("1", "2"),
        }
    )
    got = rewrite_labels(formula, "1", frozenset({"x", "y"}))
    assert len(got) == len(formula)


def test_holds_positive_membership():
    cali = Atom("cali")
    assert holds(Literal(cali), frozenset({cali}))
    assert not holds(Literal(cali), frozenset())


def test_holds_negative_closed_world():
    low = Literal(Atom("lowCharge"), positive=False)
    assert holds(low, frozenset())
    assert not holds(low, frozenset({Atom("lowCharge")}))


def test_holds_ground_atom_with_arguments():
    did = Atom("didExp", (Constant("loc1"),))
    state = frozenset({Atom("raw"), Atom("cali"), did, Atom("lander", (Constant("lan1"),))})
    assert holds(Literal(did), state)


def test_holds_equality_builtin():
    same = Literal(Atom("=", (Constant("a"), Constant("a"))))
    diff = Literal(Atom("=", (Constant("a"), Constant("b"))))
    assert holds(same, frozenset())
    assert not holds(diff, frozenset())
    assert holds(diff.negated(), frozenset())


def test_holds_rejects_non_ground():
    lit = Literal(Atom("p", (Variable("X"),)))
    with pytest.raises(ValueError):
        holds(lit, frozenset())


def test_precedence_closure_sees_through_last_sets():
    formula = frozenset(
        {Constraint(Ordering(LastRef(frozenset({"8", "9"})), LabelRef("10")))}
    )
    closure = precedence_closure(formula)
    assert ("8", "10") in closure and ("9", "10") in closure


def test_formula_equality_is_order_insensitive():
    assert frozenset({ordc("a", "b"), ordc("b", "c")}) == frozenset(
        {ordc("b", "c"), ordc("a", "b")}
    )
