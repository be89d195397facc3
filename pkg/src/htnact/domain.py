"""Operators, methods, domains, fresh renaming and domain validation.

A domain partitions task symbols into primitive ones (backed by exactly one
operator) and non-primitive ones (backed by one or more methods, kept in
declaration order).  ``nop`` is a reserved primitive with empty precondition
and effects; every domain carries it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .constraints import (
    After,
    Before,
    Between,
    Constraint,
    FirstRef,
    LabelRef,
    LastRef,
    Ordering,
    TaskNetwork,
    precedence_closure,
    ref_labels,
)
from .model import (
    Atom,
    Constant,
    LabelledTask,
    Literal,
    NameGenerator,
    Substitution,
    Task,
    Variable,
    constants_of,
    variables_of,
)

NOP_SYMBOL = "nop"


@dataclass(frozen=True)
class Operator:
    """A STRIPS-like operator for one primitive task symbol."""

    symbol: str
    params: tuple[Variable, ...] = ()
    precondition: tuple[Literal, ...] = ()
    add: tuple[Atom, ...] = ()
    delete: tuple[Atom, ...] = ()

    def instantiate(self, task: Task) -> tuple[tuple[Literal, ...], tuple[Atom, ...], tuple[Atom, ...]]:
        """Precondition and effects with parameters bound to the task's arguments."""
        if task.symbol != self.symbol or len(task.args) != len(self.params):
            raise ValueError(f"operator {self.symbol}/{len(self.params)} does not match {task}")
        theta = Substitution(dict(zip(self.params, task.args)))
        pre = tuple(l.substitute(theta) for l in self.precondition)
        add = tuple(a.substitute(theta) for a in self.add)
        dele = tuple(a.substitute(theta) for a in self.delete)
        return pre, add, dele


NOP_OPERATOR = Operator(NOP_SYMBOL)


@dataclass(frozen=True)
class Method:
    """A non-primitive task head paired with the task network that refines it."""

    name: str
    head: Task
    body: TaskNetwork


@dataclass(frozen=True)
class Domain:
    name: str
    operators: tuple[Operator, ...]
    methods: tuple[Method, ...]

    @cached_property
    def operator_index(self) -> dict[str, Operator]:
        return {op.symbol: op for op in self.operators}

    @cached_property
    def method_index(self) -> dict[str, tuple[tuple[int, Method], ...]]:
        index: dict[str, list[tuple[int, Method]]] = {}
        for i, m in enumerate(self.methods):
            index.setdefault(m.head.symbol, []).append((i, m))
        return {sym: tuple(ms) for sym, ms in index.items()}

    def is_primitive(self, symbol: str) -> bool:
        return symbol in self.operator_index

    def is_nonprimitive(self, symbol: str) -> bool:
        return symbol in self.method_index

    def operator_for(self, task: Task) -> Operator:
        try:
            return self.operator_index[task.symbol]
        except KeyError:
            raise KeyError(f"no operator for task symbol {task.symbol!r}") from None

    def methods_for(self, symbol: str) -> tuple[tuple[int, Method], ...]:
        return self.method_index.get(symbol, ())

    @cached_property
    def constants(self) -> frozenset[Constant]:
        return constants_of(self.operators) | constants_of(
            tuple((m.head, m.body) for m in self.methods)
        )

    @cached_property
    def declared_labels(self) -> frozenset[str]:
        out: set[str] = set()
        for m in self.methods:
            out |= m.body.labels
        return frozenset(out)


def make_domain(name: str, operators: Iterable[Operator], methods: Iterable[Method]) -> Domain:
    """Build a domain, adding the reserved ``nop`` operator when absent."""
    ops = tuple(operators)
    if not any(op.symbol == NOP_SYMBOL for op in ops):
        ops = ops + (NOP_OPERATOR,)
    return Domain(name, ops, tuple(methods))


def fresh_rename(
    body: TaskNetwork, gen: NameGenerator, keep: frozenset = frozenset()
) -> TaskNetwork:
    """An isomorphic copy of ``body`` with fresh labels and fresh variables.

    Variables in ``keep`` (a method head's parameters, about to be bound by a
    match) are left alone; everything else is standardized apart.
    """
    label_map = {lab: gen.label(lab) for lab in sorted(body.labels)}
    var_map = {
        v: gen.variable(v.name)
        for v in sorted(variables_of(body))
        if v not in keep
    }
    theta = Substitution(var_map)

    def rename_ref(ref):
        if isinstance(ref, LabelRef):
            return LabelRef(label_map.get(ref.label, ref.label))
        labels = frozenset(label_map.get(l, l) for l in ref.labels)
        if isinstance(ref, FirstRef):
            return FirstRef(labels)
        return LastRef(labels)

    tasks = frozenset(
        LabelledTask(label_map[lt.label], lt.task.substitute(theta))
        for lt in body.tasks
    )
    formula = frozenset(
        c.substitute(theta).rewrite_refs(rename_ref) for c in body.formula
    )
    return TaskNetwork(tasks, formula)


def run_generator(labels: Iterable[str] = (), values=()) -> NameGenerator:
    """A fresh-name generator seeded with the names visible at run time.

    Method templates are intentionally not reserved: their labels and free
    variables only ever reach a run through renamed instances, so the first
    instantiation may keep the declared names.
    """
    return NameGenerator(labels, (v.name for v in variables_of(tuple(values))))


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    check: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.check}] {self.subject}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        lines = [f"error {v}" for v in self.violations]
        lines += [f"warning {w}" for w in self.warnings]
        return "\n".join(lines) if lines else "domain valid"


def body_is_big_enough(method: Method) -> bool:
    return len(method.body.tasks) > 1


def body_has_trailing_task(method: Method) -> bool:
    return find_trailing_task(method.body) is not None


def find_trailing_task(body: TaskNetwork) -> Optional[str]:
    """A task ordered after every other task and carrying no after-constraint."""
    closure = precedence_closure(body.formula)
    labels = body.labels
    after_constrained = {
        lab
        for c in body.formula
        if isinstance(c.body, After)
        for lab in ref_labels(c.body.ref)
    }
    for lab in sorted(labels):
        others = labels - {lab}
        if all((other, lab) in closure for other in others) and lab not in after_constrained:
            return lab
    return None


def ordering_consistent(body: TaskNetwork) -> bool:
    """No cycle among guaranteed precedences, and no ordering both asserted and denied."""
    closure = precedence_closure(body.formula)
    if any((a, a) in closure for a, _ in closure):
        return False
    for c in body.formula:
        if c.negated and isinstance(c.body, Ordering):
            before, after = c.body.before, c.body.after
            if isinstance(before, LabelRef) and isinstance(after, LabelRef):
                if (before.label, after.label) in closure:
                    return False
    return True


def validate_domain(domain: Domain) -> ValidationReport:
    """Check every assumption the acting semantics relies on; never raises."""
    report = ValidationReport()

    seen_ops: set[str] = set()
    for op in domain.operators:
        subject = f"operator {op.symbol}"
        if op.symbol in seen_ops:
            report.violations.append(
                Violation("unique-operator", subject, "task symbol has more than one operator")
            )
        seen_ops.add(op.symbol)
        if len(set(op.params)) != len(op.params):
            report.violations.append(
                Violation("operator-params", subject, "parameters are not distinct")
            )
        free = (
            variables_of(op.precondition) | variables_of(op.add) | variables_of(op.delete)
        ) - set(op.params)
        if free:
            names = ", ".join(sorted(v.name for v in free))
            report.violations.append(
                Violation("operator-params", subject, f"variables not in parameter list: {names}")
            )
        if op.symbol == NOP_SYMBOL and (op.precondition or op.add or op.delete):
            report.violations.append(
                Violation("reserved-nop", subject, "nop must have empty precondition and effects")
            )
        if op.symbol in domain.method_index:
            report.violations.append(
                Violation("symbol-kind", subject, "task symbol is both operator- and method-backed")
            )

    seen_labels: dict[str, str] = {}
    for method in domain.methods:
        subject = f"method {method.name}"
        if len(set(method.head.args)) != len(method.head.args) or any(
            not isinstance(a, Variable) for a in method.head.args
        ):
            report.violations.append(
                Violation("method-head", subject, "head arguments must be distinct variables")
            )
        if not body_is_big_enough(method):
            report.violations.append(
                Violation("body-size", subject, "method body must contain more than one task")
            )
        if not body_has_trailing_task(method):
            report.violations.append(
                Violation(
                    "trailing-task",
                    subject,
                    "no task ordered after all others and free of after-constraints",
                )
            )
        if not ordering_consistent(method.body):
            report.violations.append(
                Violation("ordering-consistency", subject, "inconsistent ordering constraints")
            )
        for lt in method.body.tasks:
            owner = seen_labels.get(lt.label)
            if owner is not None and owner != method.name:
                report.violations.append(
                    Violation(
                        "label-uniqueness",
                        subject,
                        f"label {lt.label} already used in {owner}",
                    )
                )
            seen_labels[lt.label] = method.name
            symbol = lt.task.symbol
            if not domain.is_primitive(symbol) and not domain.is_nonprimitive(symbol):
                report.violations.append(
                    Violation("symbol-kind", subject, f"task symbol {symbol!r} has no operator or method")
                )
        for c in method.body.formula:
            if c.negated and isinstance(c.body, Ordering):
                left = c.body.before
                if isinstance(left, LabelRef):
                    lt = _task_by_label(method.body, left.label)
                    if lt is not None and domain.is_nonprimitive(lt.task.symbol):
                        report.warnings.append(
                            Violation(
                                "negated-ordering-left",
                                subject,
                                f"negated ordering on non-primitive task {left.label} does not "
                                "defer it; only actions are deferred by negated orderings",
                            )
                        )
            if isinstance(c.body, Between) and isinstance(c.body.end, LastRef):
                report.warnings.append(
                    Violation(
                        "between-last-end",
                        subject,
                        "between-constraint ending in a last[] expression is never realised",
                    )
                )
            if isinstance(c.body, After) and isinstance(c.body.ref, FirstRef):
                report.warnings.append(
                    Violation(
                        "after-first",
                        subject,
                        "after-constraint on a first[] expression is never evaluated",
                    )
                )

    return report


def _task_by_label(body: TaskNetwork, label: str) -> Optional[LabelledTask]:
    for lt in body.tasks:
        if lt.label == label:
            return lt
    return None
