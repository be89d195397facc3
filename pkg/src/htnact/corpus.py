"""Seeded random domains, problems and event schedules for verification.

Generated domains stay inside desk-scale bounds (at most 3 methods per task
symbol, 4 tasks per body, hierarchy depth 3, 6 constants, 6 predicates) and
always satisfy the validator's assumptions by construction.  A worst-case
expansion estimate rejects cases whose exhaustive exploration or oracle
enumeration would be disproportionate.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .constraints import (
    Before,
    Between,
    Constraint,
    LabelRef,
    Ordering,
    TaskNetwork,
    After,
)
from .domain import Domain, Method, Operator, make_domain, validate_domain
from .model import Atom, Constant, LabelledTask, Literal, Task, Variable


@dataclass
class CorpusCase:
    seed: int
    domain: Domain
    network: TaskNetwork
    state: frozenset
    schedule: dict = field(default_factory=dict)


def _random_literal(rng: random.Random, atoms: list[Atom], positive_bias=0.7) -> Literal:
    return Literal(rng.choice(atoms), rng.random() < positive_bias)


def _ground_atoms(predicates: list[tuple[str, int]], constants: list[Constant]) -> list[Atom]:
    atoms = []
    for symbol, arity in predicates:
        if arity == 0:
            atoms.append(Atom(symbol))
        else:
            atoms.extend(Atom(symbol, (c,)) for c in constants)
    return atoms


def _body_constraints(
    rng: random.Random,
    tasks: list[LabelledTask],
    atoms: list[Atom],
) -> set[Constraint]:
    constraints: set[Constraint] = set()
    labels = [lt.label for lt in tasks]
    # orderings follow the declaration order so the precedence stays acyclic;
    # the last task is always ordered after everything else
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if j == len(labels) - 1 or rng.random() < 0.4:
                constraints.add(
                    Constraint(Ordering(LabelRef(labels[i]), LabelRef(labels[j])))
                )
    for lt in tasks[:-1]:
        if rng.random() < 0.5:
            constraints.add(
                Constraint(
                    Before(_random_literal(rng, atoms), LabelRef(lt.label)),
                    rng.random() < 0.15,
                )
            )
        if rng.random() < 0.12:
            constraints.add(
                Constraint(After(LabelRef(lt.label), _random_literal(rng, atoms)))
            )
    if len(tasks) >= 3 and rng.random() < 0.2:
        left, right = tasks[0].label, tasks[-1].label
        constraints.add(
            Constraint(
                Between(
                    LabelRef(left), _random_literal(rng, atoms), LabelRef(right)
                ),
                rng.random() < 0.2,
            )
        )
        constraints.add(Constraint(Ordering(LabelRef(left), LabelRef(right))))
    return constraints


def _expansion_bound(domain: Domain, network: TaskNetwork) -> int:
    """Worst-case number of simultaneous tasks over any run."""
    cache: dict[str, int] = {}

    def weight(symbol: str) -> int:
        if domain.is_primitive(symbol):
            return 1
        if symbol in cache:
            return cache[symbol]
        cache[symbol] = 1  # cycle guard; generated hierarchies are stratified
        best = 1
        for _, method in domain.methods_for(symbol):
            total = sum(weight(lt.task.symbol) for lt in method.body.tasks)
            best = max(best, total)
        cache[symbol] = best
        return best

    return sum(weight(lt.task.symbol) for lt in network.tasks)


def random_case(seed: int, with_schedule: bool = False) -> CorpusCase:
    """A validated random case; resamples internally until the bounds hold."""
    for attempt in range(50):
        case = _try_case(random.Random(seed * 1009 + attempt), seed, with_schedule)
        if case is not None:
            return case
    raise RuntimeError(f"could not generate a case for seed {seed}")


def _try_case(rng: random.Random, seed: int, with_schedule: bool) -> Optional[CorpusCase]:
    constants = [Constant(f"c{i + 1}") for i in range(rng.randint(2, 3))]
    predicates = [
        (f"p{i + 1}", 1 if rng.random() < 0.35 else 0)
        for i in range(rng.randint(2, 4))
    ]
    atoms = _ground_atoms(predicates, constants)

    operators = []
    n_ops = rng.randint(3, 5)
    for i in range(n_ops):
        arity = 1 if rng.random() < 0.3 else 0
        params = (Variable("X"),) if arity else ()
        pre = []
        for _ in range(rng.randint(0, 2)):
            pre.append(_random_literal(rng, atoms))
        add = [rng.choice(atoms) for _ in range(rng.randint(0, 2))]
        delete = [rng.choice(atoms)] if rng.random() < 0.4 else []
        operators.append(
            Operator(f"a{i + 1}", params, tuple(pre), tuple(add), tuple(delete))
        )
    # a couple of unconditional operators keep schedules and bodies healthy
    operators.append(Operator("evt1", (), (), (rng.choice(atoms),), ()))
    operators.append(Operator("evt2", (), (), (), (rng.choice(atoms),)))
    operators.append(Operator("nop"))

    primitive_symbols = [op.symbol for op in operators]
    label_counter = [0]

    def next_label() -> str:
        label_counter[0] += 1
        return f"n{label_counter[0]}"

    def make_task(symbols: list[str]) -> Task:
        symbol = rng.choice(symbols)
        if symbol in primitive_symbols:
            op = next(o for o in operators if o.symbol == symbol)
            if op.params:
                return Task(symbol, (rng.choice(constants),))
            return Task(symbol)
        return Task(symbol)

    methods = []
    level1 = [f"g{i + 1}" for i in range(rng.randint(1, 2))]
    level2 = [f"h{i + 1}" for i in range(rng.randint(0, 1))]
    method_counter = [0]

    def build_methods(symbol: str, callable_symbols: list[str]) -> None:
        for _ in range(rng.randint(1, 3)):
            method_counter[0] += 1
            size = rng.randint(2, 3)
            body_tasks = [
                LabelledTask(next_label(), make_task(callable_symbols))
                for _ in range(size - 1)
            ]
            tail_symbols = [s for s in callable_symbols if s in primitive_symbols]
            body_tasks.append(
                LabelledTask(next_label(), make_task(tail_symbols))
            )
            constraints = _body_constraints(rng, body_tasks, atoms)
            methods.append(
                Method(
                    f"m{method_counter[0]}",
                    Task(symbol),
                    TaskNetwork(frozenset(body_tasks), frozenset(constraints)),
                )
            )

    for symbol in level1:
        build_methods(symbol, primitive_symbols)
    for symbol in level2:
        build_methods(symbol, primitive_symbols + level1)

    domain = make_domain(f"random{seed}", operators, methods)
    if not validate_domain(domain).ok:
        return None

    top_symbols = level2 + level1 if (level2 and rng.random() < 0.5) else level1
    initial_tasks = [
        LabelledTask(f"T{i + 1}", make_task(top_symbols + primitive_symbols[:2]))
        for i in range(rng.randint(1, 2))
    ]
    formula: set[Constraint] = set()
    if len(initial_tasks) == 2 and rng.random() < 0.3:
        formula.add(
            Constraint(
                Ordering(
                    LabelRef(initial_tasks[0].label),
                    LabelRef(initial_tasks[1].label),
                )
            )
        )
    network = TaskNetwork(frozenset(initial_tasks), frozenset(formula))
    if _expansion_bound(domain, network) > 6:
        return None

    state = frozenset(a for a in atoms if rng.random() < 0.45)

    schedule: dict[int, tuple] = {}
    if with_schedule:
        observable = ["evt1", "evt2"] + level1
        for iteration in range(rng.randint(1, 4)):
            if rng.random() < 0.7:
                batch = tuple(
                    (None, make_task(observable))
                    for _ in range(rng.randint(1, 2))
                )
                if batch:
                    schedule[iteration] = batch
        total = _expansion_bound(domain, network) + sum(
            _expansion_bound(domain, TaskNetwork(frozenset(
                LabelledTask(f"E{i}", t) for i, (_, t) in enumerate(batch)
            ), frozenset()))
            for batch in schedule.values()
        )
        if total > 8:
            return None

    return CorpusCase(seed, domain, network, state, schedule)


def corpus(count: int, start_seed: int = 0, with_schedule: bool = False) -> list[CorpusCase]:
    return [random_case(start_seed + i, with_schedule) for i in range(count)]
