"""First-order machinery: terms, atoms, literals, states, tasks and substitutions.

Terms are function-free: a term is either a variable or a constant.  By
convention (enforced by the parser, not by these classes) identifiers that
start with an upper-case letter are variables and everything else is a
constant, so the two namespaces never collide.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

EQUALITY_SYMBOL = "="


@dataclass(frozen=True, order=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Constant:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Variable, Constant]


def term_key(term: Term) -> tuple:
    return (isinstance(term, Variable), term.name)


@dataclass(frozen=True)
class Atom:
    """A predicate applied to function-free terms."""

    symbol: str
    args: tuple[Term, ...] = ()

    def substitute(self, theta: "Substitution") -> "Atom":
        return Atom(self.symbol, tuple(theta.term(a) for a in self.args))

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(a, Variable) for a in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Literal:
    """An atom with a polarity flag; ``!`` marks negative literals."""

    atom: Atom
    positive: bool = True

    def substitute(self, theta: "Substitution") -> "Literal":
        return Literal(self.atom.substitute(theta), self.positive)

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    @property
    def is_ground(self) -> bool:
        return self.atom.is_ground

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"!{self.atom}"


@dataclass(frozen=True)
class Task:
    """A task occurrence: an n-ary task symbol over function-free terms."""

    symbol: str
    args: tuple[Term, ...] = ()

    def substitute(self, theta: "Substitution") -> "Task":
        return Task(self.symbol, tuple(theta.term(a) for a in self.args))

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(a, Variable) for a in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class LabelledTask:
    """A construct ``label: task`` tying a unique label to a task occurrence."""

    label: str
    task: Task

    def substitute(self, theta: "Substitution") -> "LabelledTask":
        return LabelledTask(self.label, self.task.substitute(theta))

    def __str__(self) -> str:
        return f"{self.label}:{self.task}"


def label_key(label: str) -> tuple[int, str]:
    """Shortlex ordering for task labels, so '9' sorts before '10'."""
    return (len(label), label)


def labelled_task_key(lt: LabelledTask) -> tuple:
    return label_key(lt.label)


State = frozenset  # frozenset[Atom]; all atoms ground, closed-world semantics


class Substitution(Mapping[Variable, Term]):
    """An immutable, normalized mapping from variables to terms.

    Normalization resolves variable-to-variable chains and drops identity
    bindings, which makes application idempotent: applying a substitution
    twice equals applying it once.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping: Optional[Mapping[Variable, Term]] = None):
        resolved: dict[Variable, Term] = {}
        raw = dict(mapping) if mapping else {}
        for var in raw:
            term = raw[var]
            seen = {var}
            while isinstance(term, Variable) and term in raw and term not in seen:
                seen.add(term)
                term = raw[term]
            if term != var:
                resolved[var] = term
        object.__setattr__(self, "_map", resolved)
        object.__setattr__(self, "_hash", None)

    def term(self, t: Term) -> Term:
        if isinstance(t, Variable):
            return self._map.get(t, t)
        return t

    def get(self, key, default=None):
        return self._map.get(key, default)

    def compose(self, later: "Substitution") -> "Substitution":
        """Substitution equivalent to applying ``self`` first, then ``later``."""
        combined: dict[Variable, Term] = {
            v: later.term(t) for v, t in self._map.items()
        }
        for v, t in later._map.items():
            combined.setdefault(v, t)
        return Substitution(combined)

    def items_sorted(self) -> list[tuple[Variable, Term]]:
        return sorted(self._map.items(), key=lambda vt: vt[0].name)

    def __getitem__(self, key: Variable) -> Term:
        return self._map[key]

    def __iter__(self) -> Iterator[Variable]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __bool__(self) -> bool:
        return bool(self._map)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Substitution):
            return NotImplemented
        return self._map == other._map

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(
                self, "_hash", hash(frozenset(self._map.items()))
            )
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}/{t}" for v, t in self.items_sorted())
        return "{" + inner + "}"


EMPTY_SUBSTITUTION = Substitution()


def substitute(value, theta: Substitution):
    """Apply ``theta`` to any term-bearing value, preserving its structure."""
    if isinstance(value, Variable):
        return theta.term(value)
    if isinstance(value, Constant) or value is None:
        return value
    if isinstance(value, tuple):
        return tuple(substitute(v, theta) for v in value)
    if isinstance(value, frozenset):
        return frozenset(substitute(v, theta) for v in value)
    sub = getattr(value, "substitute", None)
    if sub is not None:
        return sub(theta)
    raise TypeError(f"cannot substitute into {type(value).__name__}")


def match_task(task: Task, head: Task) -> Optional[Substitution]:
    """Unique substitution theta with ``head * theta == task``, if any.

    ``head`` is a method head, whose arguments are distinct variables; the
    match therefore never needs backtracking.  Returns None on a symbol or
    arity mismatch.
    """
    if task.symbol != head.symbol or len(task.args) != len(head.args):
        return None
    binding: dict[Variable, Term] = {}
    for pattern, actual in zip(head.args, task.args):
        if isinstance(pattern, Variable):
            if pattern in binding and binding[pattern] != actual:
                return None
            binding[pattern] = actual
        elif pattern != actual:
            return None
    return Substitution(binding)


def variables_of(value) -> frozenset[Variable]:
    """All variables occurring anywhere in a term-bearing value."""
    found: set[Variable] = set()
    _collect(value, found, Variable)
    return frozenset(found)


def constants_of(value) -> frozenset[Constant]:
    """All constants occurring anywhere in a term-bearing value."""
    found: set[Constant] = set()
    _collect(value, found, Constant)
    return frozenset(found)


def _collect(value, found: set, kind) -> None:
    if isinstance(value, kind):
        found.add(value)
        return
    if isinstance(value, (Variable, Constant, str, bool, int)) or value is None:
        return
    if isinstance(value, (tuple, frozenset, list, set)):
        for v in value:
            _collect(v, found, kind)
        return
    if hasattr(value, "__dataclass_fields__"):
        for name in value.__dataclass_fields__:
            _collect(getattr(value, name), found, kind)
        return
    raise TypeError(f"cannot walk {type(value).__name__}")


class NameGenerator:
    """Fresh label and variable names for one engine run.

    Keeps a requested base name when it has never been used, otherwise
    appends the smallest numeric suffix that makes it fresh.  Labels and
    variables live in separate namespaces.
    """

    def __init__(self, labels: Iterable[str] = (), variables: Iterable[str] = ()):
        self._labels = set(labels)
        self._variables = set(variables)

    def label(self, base: str = "n") -> str:
        name = self._pick(self._labels, base)
        self._labels.add(name)
        return name

    def variable(self, base: str = "V") -> Variable:
        name = self._pick(self._variables, base)
        self._variables.add(name)
        return Variable(name)

    def reserve_label(self, name: str) -> None:
        self._labels.add(name)

    def reserve_variable(self, name: str) -> None:
        self._variables.add(name)

    def clone(self) -> "NameGenerator":
        return NameGenerator(self._labels, self._variables)

    @staticmethod
    def _pick(used: set[str], base: str) -> str:
        if base not in used:
            return base
        k = 2
        while f"{base}_{k}" in used:
            k += 1
        return f"{base}_{k}"
