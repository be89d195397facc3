"""Conjunctive constraint formulas over partially ordered labelled tasks.

A constraint formula is a finite set (conjunction) of possibly negated
constraints: orderings between task references, and before / after / between
state-constraints.  A task reference is a plain label or a ``first[...]`` /
``last[...]`` expression over a label set, denoting the task eventually
ordered first or last among those the labels yield.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .model import (
    EQUALITY_SYMBOL,
    Atom,
    LabelledTask,
    Literal,
    Substitution,
    Task,
    label_key,
    labelled_task_key,
    substitute,
)


@dataclass(frozen=True)
class LabelRef:
    label: str

    def substitute(self, theta: Substitution) -> "LabelRef":
        return self

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class FirstRef:
    labels: frozenset[str]

    def substitute(self, theta: Substitution) -> "FirstRef":
        return self

    def __str__(self) -> str:
        return f"first[{','.join(sorted(self.labels, key=label_key))}]"


@dataclass(frozen=True)
class LastRef:
    labels: frozenset[str]

    def substitute(self, theta: Substitution) -> "LastRef":
        return self

    def __str__(self) -> str:
        return f"last[{','.join(sorted(self.labels, key=label_key))}]"


TaskRef = Union[LabelRef, FirstRef, LastRef]


def ref_labels(ref: TaskRef) -> frozenset[str]:
    if isinstance(ref, LabelRef):
        return frozenset((ref.label,))
    return ref.labels


def ref_mentions(ref: TaskRef, label: str) -> bool:
    return label in ref_labels(ref)


@dataclass(frozen=True)
class Ordering:
    before: TaskRef
    after: TaskRef

    def substitute(self, theta: Substitution) -> "Ordering":
        return self

    def __str__(self) -> str:
        return f"ord {self.before} < {self.after}"


@dataclass(frozen=True)
class Before:
    literal: Literal
    ref: TaskRef

    def substitute(self, theta: Substitution) -> "Before":
        return Before(self.literal.substitute(theta), self.ref)

    def __str__(self) -> str:
        return f"before {self.literal} {self.ref}"


@dataclass(frozen=True)
class After:
    ref: TaskRef
    literal: Literal

    def substitute(self, theta: Substitution) -> "After":
        return After(self.ref, self.literal.substitute(theta))

    def __str__(self) -> str:
        return f"after {self.ref} {self.literal}"


@dataclass(frozen=True)
class Between:
    start: TaskRef
    literal: Literal
    end: TaskRef

    def substitute(self, theta: Substitution) -> "Between":
        return Between(self.start, self.literal.substitute(theta), self.end)

    def __str__(self) -> str:
        return f"between {self.start} {self.literal} {self.end}"


ConstraintBody = Union[Ordering, Before, After, Between]


@dataclass(frozen=True)
class Constraint:
    body: ConstraintBody
    negated: bool = False

    def substitute(self, theta: Substitution) -> "Constraint":
        return Constraint(self.body.substitute(theta), self.negated)

    def refs(self) -> tuple[TaskRef, ...]:
        b = self.body
        if isinstance(b, Ordering):
            return (b.before, b.after)
        if isinstance(b, Before):
            return (b.ref,)
        if isinstance(b, After):
            return (b.ref,)
        return (b.start, b.end)

    def labels(self) -> frozenset[str]:
        out: set[str] = set()
        for ref in self.refs():
            out |= ref_labels(ref)
        return frozenset(out)

    def mentions(self, label: str) -> bool:
        return any(ref_mentions(ref, label) for ref in self.refs())

    def rewrite_refs(self, fn) -> "Constraint":
        b = self.body
        if isinstance(b, Ordering):
            new: ConstraintBody = Ordering(fn(b.before), fn(b.after))
        elif isinstance(b, Before):
            new = Before(b.literal, fn(b.ref))
        elif isinstance(b, After):
            new = After(fn(b.ref), b.literal)
        else:
            new = Between(fn(b.start), b.literal, fn(b.end))
        if new == b:
            return self
        return Constraint(new, self.negated)

    def __str__(self) -> str:
        return f"not {self.body}" if self.negated else str(self.body)


Formula = frozenset  # frozenset[Constraint]


def constraint_key(c: Constraint) -> str:
    return str(c)


def render_formula(formula: Iterable[Constraint]) -> str:
    return " & ".join(sorted(map(str, formula)))


@dataclass(frozen=True)
class TaskNetwork:
    """A set of labelled tasks together with a conjunctive constraint formula."""

    tasks: frozenset[LabelledTask]
    formula: frozenset[Constraint]

    def substitute(self, theta: Substitution) -> "TaskNetwork":
        return TaskNetwork(
            substitute(self.tasks, theta), substitute(self.formula, theta)
        )

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(lt.label for lt in self.tasks)

    def task_of(self, label: str) -> LabelledTask:
        for lt in self.tasks:
            if lt.label == label:
                return lt
        raise KeyError(label)

    def sorted_tasks(self) -> list[LabelledTask]:
        return sorted(self.tasks, key=labelled_task_key)

    def __str__(self) -> str:
        tasks = " ".join(str(t) for t in self.sorted_tasks())
        return f"<{tasks} | {render_formula(self.formula)}>"


EMPTY_NETWORK = TaskNetwork(frozenset(), frozenset())


def network(tasks: Iterable[LabelledTask], formula: Iterable[Constraint] = ()) -> TaskNetwork:
    return TaskNetwork(frozenset(tasks), frozenset(formula))


def transitive_closure(formula: frozenset) -> frozenset:
    """Close plain-label ordering chains: add (a < c) whenever (a < b), (b < c).

    Only positive orderings between plain labels participate; the result adds
    only Ordering constraints and is idempotent.
    """
    edges: set[tuple[str, str]] = set()
    for c in formula:
        if (
            not c.negated
            and isinstance(c.body, Ordering)
            and isinstance(c.body.before, LabelRef)
            and isinstance(c.body.after, LabelRef)
        ):
            edges.add((c.body.before.label, c.body.after.label))
    closed = set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for c, d in list(closed):
                if b == c and (a, d) not in closed:
                    closed.add((a, d))
                    changed = True
    extra = {
        Constraint(Ordering(LabelRef(a), LabelRef(b)))
        for a, b in closed - edges
    }
    return frozenset(formula) | extra


def rewrite_labels(formula: frozenset, label: str, replacement: frozenset) -> frozenset:
    """Replace ``label`` with ``replacement`` inside first[]/last[] label sets."""
    return rewrite_label_set(formula, frozenset((label,)), replacement)


def rewrite_label_set(
    formula: frozenset, old: frozenset, replacement: frozenset
) -> frozenset:
    """Replace any occurrence of labels from ``old`` in first[]/last[] sets."""

    def rewrite(ref: TaskRef) -> TaskRef:
        if isinstance(ref, FirstRef) and ref.labels & old:
            return FirstRef((ref.labels - old) | replacement)
        if isinstance(ref, LastRef) and ref.labels & old:
            return LastRef((ref.labels - old) | replacement)
        return ref

    return frozenset(c.rewrite_refs(rewrite) for c in formula)


def holds(literal: Literal, state: frozenset) -> bool:
    """Closed-world ground literal evaluation against a state.

    The binary symbol '=' is built in: its extension is the identity over
    the constant universe.
    """
    if not literal.is_ground:
        raise ValueError(f"literal {literal} is not ground")
    atom = literal.atom
    if atom.symbol == EQUALITY_SYMBOL and len(atom.args) == 2:
        value = atom.args[0] == atom.args[1]
    else:
        value = atom in state
    return value if literal.positive else not value


def satisfies(state: frozenset, literals: Iterable[Literal]) -> bool:
    return all(holds(lit, state) for lit in literals)


def ordering_edges(formula: Iterable[Constraint]) -> set[tuple[str, str]]:
    """Label pairs (a, b) where a is guaranteed to precede b in any completion.

    A positive ordering contributes an edge from every label known to finish
    before the right side begins: plain labels and whole last[] sets on the
    left, plain labels and whole first[] sets on the right.
    """
    edges: set[tuple[str, str]] = set()
    for c in formula:
        if c.negated or not isinstance(c.body, Ordering):
            continue
        left, right = c.body.before, c.body.after
        if isinstance(left, LabelRef):
            lefts: frozenset[str] = frozenset((left.label,))
        elif isinstance(left, LastRef):
            lefts = left.labels
        else:
            lefts = frozenset()
        if isinstance(right, LabelRef):
            rights: frozenset[str] = frozenset((right.label,))
        elif isinstance(right, FirstRef):
            rights = right.labels
        else:
            rights = frozenset()
        edges |= {(a, b) for a in lefts for b in rights}
    return edges


def precedence_closure(formula: Iterable[Constraint]) -> set[tuple[str, str]]:
    """Transitive closure of the guaranteed-precedence edges."""
    edges = ordering_edges(formula)
    succ: dict[str, set[str]] = {}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
    closed: set[tuple[str, str]] = set()
    for start in succ:
        stack = list(succ[start])
        seen: set[str] = set()
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            closed.add((start, node))
            stack.extend(succ.get(node, ()))
    return closed


def equality_constraint(left, right, ref: TaskRef, negated: bool = False) -> Constraint:
    """Encode a variable-binding requirement as a before state-constraint."""
    literal = Literal(Atom(EQUALITY_SYMBOL, (left, right)))
    return Constraint(Before(literal, ref), negated)
