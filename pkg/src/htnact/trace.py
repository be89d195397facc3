"""Execution traces: construction, classification, validation and rewriting.

A trace is a sequence of configurations produced by the execution semantics,
optionally interleaved with observation steps (d-traces).  This module also
provides the strategies that resolve the semantics' nondeterminism, an
exhaustive searcher used by the verification suites, and the constructive
rewriting that eliminates complete-replacement steps from a trace while
preserving the actions performed.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, replace as dc_replace
from typing import Callable, Iterable, Iterator, Optional

from .acting import (
    ACTION,
    INITIAL,
    OBSERVATION,
    REDUCTION,
    REPLACEMENT,
    Configuration,
    ReductionCouple,
    RunContext,
    Step,
    action_result,
    applicable_substitutions,
    exec_all,
    extracted_literals,
    initial_configuration,
    is_blocked,
    is_successful,
    is_trace_blocked,
    make_context,
    ordered_alternatives,
    primary_tasks,
    replace_tasks,
    smallest_replaceable,
    update_couples,
    _replace_in_couples,
)
from .constraints import TaskNetwork, satisfies
from .model import (
    Substitution,
    Task,
    label_key,
    labelled_task_key,
    substitute,
)
from .reduction import Body, reduce_task

SUCCESSFUL = "successful"
BLOCKED = "blocked"
OPEN = "open"


class TraceError(Exception):
    """A recorded step cannot be reproduced from its predecessor."""


@dataclass
class Trace:
    steps: list[Step]
    ctx: RunContext
    budget_exhausted: bool = False

    @property
    def initial(self) -> Configuration:
        return self.steps[0].config

    @property
    def final(self) -> Configuration:
        return self.steps[-1].config

    def __len__(self) -> int:
        return len(self.steps)

    def classification(self) -> str:
        if is_successful(self.final):
            return SUCCESSFUL
        if is_trace_blocked(self.final, self.ctx):
            return BLOCKED
        return OPEN

    def actions_performed(self) -> tuple[Task, ...]:
        theta = self.final.theta
        return tuple(
            substitute(s.task, theta) for s in self.steps if s.kind == ACTION
        )

    def action_labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.steps if s.kind == ACTION)

    def complete_replacement_free(self) -> bool:
        return not any(
            s.kind == REPLACEMENT and s.complete for s in self.steps
        )

    def partial_replacement_free(self) -> bool:
        return not any(
            s.kind == REPLACEMENT and not s.complete for s in self.steps
        )

    def jump_free(self) -> bool:
        return not any(s.kind == REPLACEMENT and s.jump for s in self.steps)

    def freedom_flags(self) -> dict[str, bool]:
        return {
            "complete_replacement_free": self.complete_replacement_free(),
            "partial_replacement_free": self.partial_replacement_free(),
            "jump_free": self.jump_free(),
        }


# -- strategies ----------------------------------------------------------------

class Strategy:
    """Deterministic chooser over the non-empty execution choice sets."""

    wants_all_bindings = False

    def choose(self, trace: list[Step], steps: tuple[Step, ...]) -> Optional[Step]:
        raise NotImplementedError


class DefaultStrategy(Strategy):
    """Applicable action at the smallest primary label, then reduction of the
    smallest non-primitive label with its first untried body, then replacement
    of a smallest replaceable couple (non-jumps first)."""

    def choose(self, trace, steps):
        def key(step: Step) -> tuple:
            rank = {ACTION: 0, REDUCTION: 1, REPLACEMENT: 2}[step.kind]
            jump = 1 if step.jump else 0
            return (rank, jump, label_key(step.label or ""),
                    step.body.index if step.body else -1)

        return min(steps, key=key)


class RandomStrategy(Strategy):
    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def choose(self, trace, steps):
        return self.rng.choice(list(steps))


@dataclass(frozen=True)
class Directive:
    kind: str
    label: str
    method: Optional[str] = None

    def matches(self, step: Step) -> bool:
        if step.kind != self.kind or step.label != self.label:
            return False
        if self.method is not None:
            return step.body is not None and step.body.method == self.method
        return True

    def __str__(self) -> str:
        if self.kind == ACTION:
            return f"act {self.label}"
        verb = "reduce" if self.kind == REDUCTION else "replace"
        return f"{verb} {self.label} with {self.method}"


_DIRECTIVE_RE = re.compile(
    r"^(?:(act)\s+(\S+)|(reduce|replace)\s+(\S+)\s+with\s+(\S+))$"
)


def parse_directives(text: str) -> list[Directive]:
    directives = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DIRECTIVE_RE.match(line)
        if not m:
            raise ValueError(f"bad choice directive: {raw.strip()!r}")
        if m.group(1):
            directives.append(Directive(ACTION, m.group(2)))
        else:
            kind = REDUCTION if m.group(3) == "reduce" else REPLACEMENT
            directives.append(Directive(kind, m.group(4), m.group(5)))
    return directives


class ScriptedStrategy(Strategy):
    """Replays an explicit list of choices; each must match a legal execution.

    The run stops cleanly when the script is exhausted.  A directive that
    matches none of the available executions is an error.
    """

    def __init__(self, directives: Iterable[Directive]):
        self.directives = list(directives)
        self.position = 0

    def choose(self, trace, steps):
        if self.position >= len(self.directives):
            return None
        directive = self.directives[self.position]
        for step in steps:
            if directive.matches(step):
                self.position += 1
                return step
        available = "; ".join(s.describe() for s in steps)
        raise TraceError(
            f"directive {directive} matches no execution (available: {available})"
        )


# -- running -------------------------------------------------------------------

DEFAULT_BUDGET = 10_000


def start_trace(network: TaskNetwork, state: frozenset, domain) -> Trace:
    cfg = initial_configuration(network, state, domain)
    ctx = make_context(domain, cfg)
    return Trace([Step(INITIAL, cfg)], ctx)


def run(
    cfg0: Configuration,
    strategy: Strategy,
    budget: int = DEFAULT_BUDGET,
    ctx: Optional[RunContext] = None,
) -> Trace:
    """Extend a trace from ``cfg0`` until it is successful, blocked or out of budget."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    ctx = ctx or make_context(cfg0.domain, cfg0)
    trace = Trace([Step(INITIAL, cfg0)], ctx)
    for _ in range(budget):
        if is_successful(trace.final) or is_trace_blocked(trace.final, ctx):
            return trace
        steps = exec_all(trace.final, ctx, strategy.wants_all_bindings)
        if not steps:
            return trace
        chosen = strategy.choose(trace.steps, steps)
        if chosen is None:
            return trace
        ctx.absorb(chosen.config)
        trace.steps.append(chosen)
    trace.budget_exhausted = not (
        is_successful(trace.final) or is_trace_blocked(trace.final, ctx)
    )
    return trace


# -- validation and replay -----------------------------------------------------

def _couple_by_origin(config: Configuration, origin: Optional[str]) -> ReductionCouple:
    for couple in config.couples:
        if couple.origin == origin:
            return couple
    raise TraceError(f"no reduction couple with origin {origin!r}")


def replay_step(prev: Configuration, recorded: Step, ctx: RunContext) -> Step:
    """Recompute ``recorded`` from ``prev`` using the choice it documents.

    Succeeds only when the choice is legal from ``prev``; the resulting step
    is built deterministically from the recorded label, binding and body, so
    a valid trace replays to exactly its recorded configurations.
    """
    primary = primary_tasks(prev.network, prev.domain)
    if recorded.kind == ACTION:
        lt = prev.network.task_of(recorded.label)
        if lt not in primary:
            raise TraceError(f"action {recorded.label} is not primary")
        theta = recorded.binding or Substitution()
        op = prev.domain.operator_for(lt.task)
        pre, _, _ = op.instantiate(lt.task)
        formula = [l.substitute(theta) for l in pre]
        formula += [
            l.substitute(theta)
            for l in extracted_literals(recorded.label, prev.network)
        ]
        if any(not l.is_ground for l in formula):
            raise TraceError(f"binding for {recorded.label} is not ground")
        if not satisfies(prev.state, formula):
            raise TraceError(f"action {recorded.label} is not applicable")
        network, state, couples = action_result(
            recorded.label, prev.state, prev.network, theta, prev.couples, prev.domain
        )
        config = Configuration(
            network, state, couples, prev.domain, prev.theta.compose(theta)
        )
        return dc_replace(recorded, config=config, task=lt.task.substitute(theta))

    if recorded.kind == REDUCTION:
        lt = prev.network.task_of(recorded.label)
        if lt not in primary:
            raise TraceError(f"reduced task {recorded.label} is not primary")
        if not prev.domain.is_nonprimitive(lt.task.symbol):
            raise TraceError(f"reduced task {recorded.label} is primitive")
        body = recorded.body
        network = reduce_task(prev.network, recorded.label, body.network)
        new_couple = _couple_by_origin(recorded.config, recorded.label)
        if new_couple.pursued != body.network.tasks:
            raise TraceError(
                f"couple for {recorded.label} does not pursue the chosen body"
            )
        couples = _replace_in_couples(prev.couples, lt, body) | {new_couple}
        config = Configuration(
            network, prev.state, frozenset(couples), prev.domain, prev.theta
        )
        return dc_replace(recorded, config=config, task=lt.task)

    if recorded.kind == REPLACEMENT:
        couple = _couple_by_origin(prev, recorded.label)
        body = recorded.body
        if body not in couple.alternatives:
            raise TraceError(
                f"body {body.method} is not an untried alternative of {recorded.label}"
            )
        primary_labels = frozenset(lt.label for lt in primary)
        if not (couple.labels & primary_labels):
            raise TraceError(f"couple {recorded.label} meets no primary task")
        if not is_blocked(couple.pursued, prev.network, prev.state, ctx):
            raise TraceError(f"couple {recorded.label} is not blocked")
        present = couple.labels & prev.network.labels
        network = replace_tasks(couple.pursued, body.network, prev.network)
        couples = update_couples(present, couple, body, prev.couples)
        config = Configuration(network, prev.state, couples, prev.domain, prev.theta)
        return dc_replace(
            recorded,
            config=config,
            removed=present,
            added=body.network.labels,
            complete=couple.labels <= prev.network.labels,
            jump=couple not in smallest_replaceable(prev.couples),
        )

    if recorded.kind == OBSERVATION:
        observed = recorded.observed
        network = TaskNetwork(
            prev.network.tasks | observed, prev.network.formula
        )
        couples = set()
        for c in prev.couples:
            if c.origin is None:
                couples.add(dc_replace(c, pursued=c.pursued | observed))
            else:
                couples.add(c)
        config = Configuration(
            network, prev.state, frozenset(couples), prev.domain, prev.theta
        )
        return dc_replace(recorded, config=config)

    raise TraceError(f"cannot replay step kind {recorded.kind}")


def validate_trace(trace: Trace) -> list[str]:
    """Check every step against the execution semantics; return the problems."""
    problems: list[str] = []
    first = trace.steps[0]
    if first.kind != INITIAL:
        problems.append("trace does not start with an initial step")
        return problems
    expected_top = ReductionCouple(None, first.config.network.tasks)
    tops = [c for c in first.config.couples if c.origin is None]
    if len(tops) != 1 or tops[0].pursued != expected_top.pursued or tops[0].alternatives:
        problems.append("initial couples are not a single top-level couple over the tasks")
    ctx = make_context(trace.initial.domain, trace.initial)
    for i in range(1, len(trace.steps)):
        prev = trace.steps[i - 1].config
        recorded = trace.steps[i]
        try:
            redone = replay_step(prev, recorded, ctx)
        except (TraceError, KeyError, ValueError) as exc:
            problems.append(f"step {i} ({recorded.describe()}): {exc}")
            continue
        if redone.config != recorded.config:
            problems.append(
                f"step {i} ({recorded.describe()}): recomputed configuration differs"
            )
        for flag in ("complete", "jump"):
            if getattr(redone, flag) != getattr(recorded, flag):
                problems.append(
                    f"step {i} ({recorded.describe()}): {flag} flag differs"
                )
    return problems


# -- complete-replacement elimination -------------------------------------------

def _first_complete_replacement(steps: list[Step]) -> Optional[int]:
    for i, step in enumerate(steps):
        if step.kind == REPLACEMENT and step.complete:
            return i
    return None


def eliminate_complete_replacements(trace: Trace) -> Trace:
    """An equivalent trace without complete-replacement steps.

    Repeatedly redirects the reduction that introduced the eventually-replaced
    body to the alternative the replacement chose, replays the unrelated steps
    in between, re-inserts the abandoned body as an untried alternative, and
    replays the rest of the trace.  Actions performed are preserved and the
    trace never grows.
    """
    steps = list(trace.steps)
    ctx = make_context(trace.initial.domain, trace.initial)
    while True:
        m = _first_complete_replacement(steps)
        if m is None:
            break
        replacement = steps[m]
        origin = replacement.label
        correct = replacement.body
        i = next(
            (
                j
                for j in range(1, m)
                if steps[j].kind == REDUCTION and steps[j].label == origin
            ),
            None,
        )
        if i is None:
            raise TraceError(
                f"no reduction of {origin} precedes its complete replacement"
            )
        incorrect = steps[i].body
        old_couple = _couple_by_origin(steps[i].config, origin)
        alternatives = ordered_alternatives(
            [b for b in old_couple.alternatives if b != correct] + [incorrect]
        )

        subtree = set(incorrect.network.labels)
        skipped: set[int] = set()
        for j in range(i + 1, m):
            step = steps[j]
            if step.kind == REDUCTION and step.label in subtree:
                subtree |= set(step.body.network.labels)
                skipped.add(j)
            elif step.removed & subtree:
                raise TraceError(
                    f"step {j} touches the replaced subtree before the replacement"
                )

        prev = steps[i - 1].config
        lt = prev.network.task_of(origin)
        network = reduce_task(prev.network, origin, correct.network)
        couples = _replace_in_couples(prev.couples, lt, correct) | {
            ReductionCouple(origin, correct.network.tasks, alternatives)
        }
        config = Configuration(
            network, prev.state, frozenset(couples), prev.domain, prev.theta
        )
        new_steps = steps[:i] + [
            Step(
                REDUCTION,
                config,
                label=origin,
                task=lt.task,
                body=correct,
                removed=frozenset((origin,)),
                added=correct.network.labels,
            )
        ]
        for j in range(i + 1, m):
            if j in skipped:
                continue
            new_steps.append(replay_step(new_steps[-1].config, steps[j], ctx))
        _check_junction(new_steps[-1].config, steps[m].config, origin, incorrect)
        for j in range(m + 1, len(steps)):
            new_steps.append(replay_step(new_steps[-1].config, steps[j], ctx))
        steps = new_steps
    return Trace(steps, trace.ctx, trace.budget_exhausted)


def _check_junction(
    new_cfg: Configuration,
    old_cfg: Configuration,
    origin: str,
    restored: Body,
) -> None:
    """The rebuilt trace must meet the original where the eliminated
    replacement had landed, with two sanctioned differences: the redirected
    couple holds the abandoned body back among its untried alternatives, and
    constraints of the abandoned body that migrated onto the replacing tasks
    through their first[]/last[] expressions are absent (the rebuilt branch
    never carried that body, so it is strictly less constrained)."""
    if (
        new_cfg.network.tasks != old_cfg.network.tasks
        or not new_cfg.network.formula <= old_cfg.network.formula
        or new_cfg.state != old_cfg.state
        or new_cfg.theta != old_cfg.theta
    ):
        raise TraceError("rebuilt trace diverges from the original at the junction")
    expected = set()
    for couple in old_cfg.couples:
        if couple.origin == origin:
            expected.add(
                dc_replace(
                    couple,
                    alternatives=ordered_alternatives(
                        set(couple.alternatives) | {restored}
                    ),
                )
            )
        else:
            expected.add(couple)
    if frozenset(expected) != new_cfg.couples:
        raise TraceError("rebuilt couples diverge from the original at the junction")


# -- exhaustive exploration ------------------------------------------------------

class SearchBudgetExceeded(Exception):
    pass


def canonical_key(cfg: Configuration) -> str:
    """A renaming-invariant fingerprint of a configuration (minus bindings).

    Labels are renamed in a deterministic traversal order, so configurations
    that differ only by the names their fresh labels happened to get collapse
    to one key.  Distinct structures always produce distinct keys.
    """
    mapping: dict[str, str] = {}

    def rename(label: str) -> str:
        if label not in mapping:
            mapping[label] = f"#{len(mapping)}"
        return mapping[label]

    pieces: list[str] = []
    for lt in sorted(
        cfg.network.tasks, key=lambda t: (str(t.task), label_key(t.label))
    ):
        pieces.append(f"{rename(lt.label)}:{lt.task}")
    for c in sorted(cfg.network.formula, key=str):
        for lab in sorted(c.labels(), key=label_key):
            rename(lab)
    pieces.append("|")
    for c in sorted(cfg.network.formula, key=str):
        pieces.append(_rename_constraint(c, rename))
    pieces.append("@" + " ".join(sorted(map(str, cfg.state))))
    for couple in sorted(
        cfg.couples,
        key=lambda c: (
            c.origin is not None,
            label_key(c.origin or ""),
        ),
    ):
        origin = rename(couple.origin) if couple.origin else "top"
        members = " ".join(
            sorted(
                f"{rename(lt.label)}:{lt.task}"
                for lt in sorted(
                    couple.pursued, key=lambda t: (str(t.task), label_key(t.label))
                )
            )
        )
        alts = []
        for body in couple.alternatives:
            inner_tasks = " ".join(
                f"{rename(lt.label)}:{lt.task}"
                for lt in sorted(
                    body.network.tasks,
                    key=lambda t: (str(t.task), label_key(t.label)),
                )
            )
            inner_formula = " & ".join(
                sorted(
                    _rename_constraint(c, rename) for c in body.network.formula
                )
            )
            alts.append(f"{body.index}<{inner_tasks}|{inner_formula}>")
        pieces.append(f"[{origin}: {members} ! {' '.join(alts)}]")
    return "\n".join(pieces)


def _rename_constraint(c, rename) -> str:
    from .constraints import FirstRef, LabelRef, LastRef

    def ref_str(ref):
        if isinstance(ref, LabelRef):
            return rename(ref.label)
        inner = ",".join(sorted((rename(l) for l in ref.labels)))
        return ("first[" if isinstance(ref, FirstRef) else "last[") + inner + "]"

    b = c.body
    name = type(b).__name__
    parts = [name]
    for ref in c.refs():
        parts.append(ref_str(ref))
    lit = getattr(b, "literal", None)
    if lit is not None:
        parts.append(str(lit))
    if c.negated:
        parts.append("~")
    return " ".join(parts)


def successful_action_sequences(
    cfg0: Configuration,
    ctx: RunContext,
    allow_partial: bool = True,
    allow_complete: bool = True,
    max_nodes: int = 200_000,
) -> frozenset:
    """Action sequences of every successful trace reachable from ``cfg0``.

    Explores all executions (all ground bindings included), optionally
    skipping partial- or complete-replacement edges.  Memoized on canonical
    configuration form.
    """
    memo: dict[str, frozenset] = {}
    visited = 0

    def explore(cfg: Configuration) -> frozenset:
        nonlocal visited
        if is_successful(cfg):
            return frozenset({()})
        key = canonical_key(cfg)
        if key in memo:
            return memo[key]
        visited += 1
        if visited > max_nodes:
            raise SearchBudgetExceeded(f"more than {max_nodes} configurations")
        memo[key] = frozenset()  # cycle guard; configurations never recur
        sequences = set()
        for step in exec_all(cfg, ctx.for_config(cfg), all_bindings=True):
            if step.kind == REPLACEMENT:
                if step.complete and not allow_complete:
                    continue
                if not step.complete and not allow_partial:
                    continue
            suffixes = explore(step.config)
            if step.kind == ACTION:
                # bindings ground the task at execution time, so the head is
                # final and the suffix set is label- and binding-free
                sequences |= {(step.task,) + s for s in suffixes}
            else:
                sequences |= suffixes
        memo[key] = frozenset(sequences)
        return memo[key]

    return explore(cfg0)


def iter_successful_traces(
    cfg0: Configuration,
    ctx: RunContext,
    allow_partial: bool = True,
    allow_complete: bool = True,
    action_target: Optional[tuple[Task, ...]] = None,
    max_nodes: int = 200_000,
) -> Iterator[Trace]:
    """All successful traces from ``cfg0``, depth-first.

    With ``action_target`` set, branches whose performed actions stop being a
    prefix of the target are pruned, and only traces performing exactly the
    target are yielded.
    """
    visited = 0

    def prefix_ok(actions: tuple[Task, ...]) -> bool:
        if action_target is None:
            return True
        return actions == action_target[: len(actions)]

    def walk(steps: list[Step], actions: tuple[Task, ...]) -> Iterator[list[Step]]:
        nonlocal visited
        visited += 1
        if visited > max_nodes:
            raise SearchBudgetExceeded(f"more than {max_nodes} configurations")
        cfg = steps[-1].config
        if is_successful(cfg):
            if action_target is None or actions == action_target:
                yield steps
            return
        for step in exec_all(cfg, ctx.for_config(cfg), all_bindings=True):
            if step.kind == REPLACEMENT:
                if step.complete and not allow_complete:
                    continue
                if not step.complete and not allow_partial:
                    continue
            extended = actions
            if step.kind == ACTION:
                extended = actions + (step.task,)
                if not prefix_ok(extended):
                    continue
            yield from walk(steps + [step], extended)

    for found in walk([Step(INITIAL, cfg0)], ()):
        yield Trace(list(found), ctx)


def sample_traces(
    cfg0: Configuration,
    ctx: RunContext,
    count: int,
    require: Optional[Callable[[Trace], bool]] = None,
    max_nodes: int = 100_000,
) -> list[Trace]:
    """Depth-first sample of maximal traces, optionally filtered."""
    collected: list[Trace] = []
    visited = 0

    def walk(steps: list[Step]) -> None:
        nonlocal visited
        if len(collected) >= count:
            return
        visited += 1
        if visited > max_nodes:
            return
        cfg = steps[-1].config
        nexts = exec_all(cfg, ctx.for_config(cfg), all_bindings=True)
        if not nexts:
            trace = Trace(list(steps), ctx)
            if require is None or require(trace):
                collected.append(trace)
            return
        for step in nexts:
            walk(steps + [step])
            if len(collected) >= count:
                return

    walk([Step(INITIAL, cfg0)])
    return collected
