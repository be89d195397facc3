"""Operational semantics of acting over task networks.

A configuration couples a task network with a state, a set of reduction
couples and the domain.  Three kinds of execution rewrite configurations:

* execution via reduction refines a primary non-primitive task with a
  relevant method body and records the untried alternatives;
* execution via action performs an applicable primary action, updating the
  state and realising the constraints that are settled by it;
* execution via replacement swaps a blocked pursued set for an untried
  alternative body, recovering from failure.

All values are immutable; the only mutable collaborator is the fresh-name
generator confined to one run context.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace as dc_replace
from typing import Iterator, Optional

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
    holds,
    ref_labels,
    satisfies,
)
from .domain import Domain, NOP_SYMBOL
from .model import (
    Atom,
    Constant,
    EMPTY_SUBSTITUTION,
    LabelledTask,
    Literal,
    NameGenerator,
    Substitution,
    Task,
    Variable,
    constants_of,
    label_key,
    labelled_task_key,
    substitute,
    variables_of,
)
from .reduction import Body, has_relevant_method, reduce_task, relevant_method_bodies

INITIAL = "initial"
REDUCTION = "reduction"
ACTION = "action"
REPLACEMENT = "replacement"
OBSERVATION = "observation"


@dataclass(frozen=True)
class ReductionCouple:
    """Pursued refinements of one reduced task plus its untried alternatives.

    ``origin`` is the label of the task whose reduction created this couple;
    the top-level couple has no origin.  Alternatives are kept sorted by the
    declaring method's position so couple equality is syntactic.
    """

    origin: Optional[str]
    pursued: frozenset[LabelledTask]
    alternatives: tuple[Body, ...] = ()

    def substitute(self, theta: Substitution) -> "ReductionCouple":
        return ReductionCouple(
            self.origin,
            substitute(self.pursued, theta),
            substitute(self.alternatives, theta),
        )

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(lt.label for lt in self.pursued)

    def sort_key(self) -> tuple:
        return (self.origin is not None, label_key(self.origin or ""))

    def __str__(self) -> str:
        tasks = " ".join(
            str(lt) for lt in sorted(self.pursued, key=labelled_task_key)
        )
        alts = ",".join(b.method for b in self.alternatives)
        origin = self.origin or "top"
        return f"<{origin}: {tasks} | {alts or '-'}>"


def ordered_alternatives(bodies) -> tuple[Body, ...]:
    return tuple(sorted(bodies, key=Body.sort_key))


@dataclass(frozen=True)
class Configuration:
    """One node of an execution trace."""

    network: TaskNetwork
    state: frozenset
    couples: frozenset
    domain: Domain = field(repr=False)
    theta: Substitution = EMPTY_SUBSTITUTION

    def substitute(self, theta: Substitution) -> "Configuration":
        return Configuration(
            self.network.substitute(theta),
            self.state,
            substitute(self.couples, theta),
            self.domain,
            self.theta,
        )

    def sorted_couples(self) -> list[ReductionCouple]:
        return sorted(self.couples, key=ReductionCouple.sort_key)


@dataclass
class RunContext:
    """Mutable per-run collaborators: fresh names and the constant universe."""

    domain: Domain
    gen: NameGenerator
    universe: tuple[Constant, ...]

    def clone(self) -> "RunContext":
        return RunContext(self.domain, self.gen.clone(), self.universe)

    def for_config(self, config: "Configuration") -> "RunContext":
        """A context whose fresh names avoid exactly what ``config`` mentions.

        Branching explorations use this instead of sharing one generator:
        labels are fresh with respect to the configuration at hand, and the
        constant universe stays the run-wide one.
        """
        return make_context(self.domain, config, universe=self.universe)

    def absorb(self, config: "Configuration") -> None:
        """Commit every name a chosen configuration mentions to the generator.

        Candidate executions rename method bodies against a throwaway fork of
        the generator; once one is chosen, its names become taken for the
        rest of the run.
        """
        labels, variables = _names_of_config(config)
        for label in labels:
            self.gen.reserve_label(label)
        for name in variables:
            self.gen.reserve_variable(name)

    def extend_universe(self, constants) -> None:
        merged = set(self.universe) | set(constants)
        self.universe = tuple(sorted(merged))


def initial_configuration(
    network: TaskNetwork, state: frozenset, domain: Domain
) -> Configuration:
    top = ReductionCouple(None, network.tasks)
    return Configuration(network, state, frozenset((top,)), domain)


def _names_of_config(config: "Configuration") -> tuple[set, set]:
    labels: set[str] = set(config.network.labels)
    values: list = [config.network]
    for couple in config.couples:
        labels |= couple.labels
        values.append(couple)
        for body in couple.alternatives:
            labels |= body.network.labels
    variables = {v.name for v in variables_of(tuple(values))}
    return labels, variables


def make_context(
    domain: Domain,
    config: Configuration,
    *label_sources,
    universe: Optional[tuple] = None,
) -> RunContext:
    labels, variables = _names_of_config(config)
    for source in label_sources:
        labels |= set(source)
    gen = NameGenerator(labels, variables)
    if universe is None:
        universe = tuple(
            sorted(
                constants_of(config.network)
                | constants_of(config.state)
                | domain.constants
            )
        )
    return RunContext(domain, gen, universe)


@dataclass(frozen=True)
class Step:
    """One trace element: the configuration reached and how it was reached."""

    kind: str
    config: Configuration
    label: Optional[str] = None
    task: Optional[Task] = None
    binding: Optional[Substitution] = None
    body: Optional[Body] = None
    removed: frozenset = frozenset()
    added: frozenset = frozenset()
    complete: Optional[bool] = None
    jump: Optional[bool] = None
    observed: frozenset = frozenset()

    def describe(self) -> str:
        if self.kind == ACTION:
            return f"action {self.label}:{self.task}"
        if self.kind == REDUCTION:
            return f"reduction {self.label} with {self.body.method}"
        if self.kind == REPLACEMENT:
            mode = "complete" if self.complete else "partial"
            jump = " jump" if self.jump else ""
            return f"replacement {self.label} with {self.body.method} ({mode}{jump})"
        if self.kind == OBSERVATION:
            tasks = " ".join(
                str(lt) for lt in sorted(self.observed, key=labelled_task_key)
            )
            return f"observation {tasks}"
        return self.kind


# -- primary tasks -------------------------------------------------------------

def primary_tasks(d: TaskNetwork, domain: Optional[Domain] = None) -> frozenset:
    """Tasks with no other task required to precede them.

    A task is excluded when its label occurs on the right of a positive
    ordering constraint, or when it is an action deferred by a negated
    ordering of the form not(n < x) or not(last[{n}] < x).
    """
    excluded: set[str] = set()
    deferred: set[str] = set()
    for c in d.formula:
        if not isinstance(c.body, Ordering):
            continue
        if not c.negated:
            excluded |= ref_labels(c.body.after)
        else:
            left = c.body.before
            if isinstance(left, LabelRef):
                deferred.add(left.label)
            elif isinstance(left, LastRef) and len(left.labels) == 1:
                deferred |= left.labels
    out = set()
    for lt in d.tasks:
        if lt.label in excluded:
            continue
        if lt.label in deferred and (
            domain is None or domain.is_primitive(lt.task.symbol)
        ):
            continue
        out.add(lt)
    return frozenset(out)


# -- relevant constraints and applicability ------------------------------------

def _executed_ref(ref, live_labels: frozenset) -> bool:
    """Does ``ref`` denote an already-executed action?"""
    if isinstance(ref, LabelRef):
        return ref.label not in live_labels
    return isinstance(ref, LastRef) and not ref.labels


def relevant_constraints(label: str, d: TaskNetwork) -> frozenset:
    """Constraints that must be evaluated just before executing ``label``.

    Collects possibly negated before-constraints aimed at the action (directly
    or through a first[] expression), after- and between-constraints whose
    left reference was already executed, and negated between-constraints that
    survived to the first action of their right endpoint.
    """
    live = d.labels
    out = set()
    for c in d.formula:
        b = c.body
        if isinstance(b, Before):
            ref = b.ref
            if (isinstance(ref, LabelRef) and ref.label == label) or (
                isinstance(ref, FirstRef) and label in ref.labels
            ):
                out.add(c)
        elif isinstance(b, After):
            if _executed_ref(b.ref, live):
                out.add(c)
        elif isinstance(b, Between):
            if not _executed_ref(b.start, live):
                continue
            if not c.negated:
                out.add(c)
            else:
                end = b.end
                if (isinstance(end, LabelRef) and end.label == label) or (
                    isinstance(end, FirstRef) and label in end.labels
                ):
                    out.add(c)
    return frozenset(out)


def extracted_literals(label: str, d: TaskNetwork) -> frozenset:
    """Literals the relevant constraints require to hold, negation folded in."""
    out = set()
    for c in relevant_constraints(label, d):
        literal = c.body.literal
        out.add(literal if not c.negated else literal.negated())
    return frozenset(out)


def _unify_literal(literal: Literal, atom: Atom, binding: dict) -> Optional[dict]:
    if literal.atom.symbol != atom.symbol or len(literal.atom.args) != len(atom.args):
        return None
    out = dict(binding)
    for pat, val in zip(literal.atom.args, atom.args):
        pat = out.get(pat, pat) if isinstance(pat, Variable) else pat
        if isinstance(pat, Variable):
            out[pat] = val
        elif pat != val:
            return None
    return out


def applicable_substitutions(
    label: str,
    d: TaskNetwork,
    state: frozenset,
    ctx: RunContext,
    limit: Optional[int] = 1,
) -> tuple[Substitution, ...]:
    """Ground substitutions under which ``label`` is applicable in ``state``.

    The action's precondition and extracted literals must all hold.  Positive
    literals are matched against the state first; residual unbound variables
    (including any left in the task's own arguments) range over the constant
    universe.  Enumeration order is deterministic, so the first result is the
    canonical binding.
    """
    lt = d.task_of(label)
    op = ctx.domain.operator_for(lt.task)
    pre, _, _ = op.instantiate(lt.task)
    literals = sorted(
        set(pre) | set(extracted_literals(label, d)), key=str
    )
    positives = [l for l in literals if l.positive]
    negatives = [l for l in literals if not l.positive]
    atoms = sorted(state, key=str)
    results: list[Substitution] = []
    seen: set[Substitution] = set()

    def emit(binding: dict) -> bool:
        theta = Substitution(binding)
        for lit in negatives:
            if not holds(lit.substitute(theta), state):
                return False
        if theta in seen:
            return False
        seen.add(theta)
        results.append(theta)
        return limit is not None and len(results) >= limit

    def ground_residuals(binding: dict) -> bool:
        free = sorted(
            {
                v
                for v in variables_of(lt.task) | variables_of(tuple(literals))
                if not isinstance(binding.get(v, v), Constant)
            },
            key=lambda v: v.name,
        )
        if not free:
            return emit(binding)
        for values in itertools.product(ctx.universe, repeat=len(free)):
            extended = dict(binding)
            extended.update(zip(free, values))
            if emit(extended):
                return True
        return False

    def solve(index: int, binding: dict) -> bool:
        if index == len(positives):
            return ground_residuals(binding)
        literal = positives[index].substitute(Substitution(binding))
        if literal.is_ground:
            if holds(literal, state):
                return solve(index + 1, binding)
            return False
        if literal.atom.symbol == "=" and len(literal.atom.args) == 2:
            left, right = literal.atom.args
            if isinstance(left, Variable) and isinstance(right, Constant):
                extended = dict(binding)
                extended[left] = right
                return solve(index + 1, extended)
            if isinstance(right, Variable) and isinstance(left, Constant):
                extended = dict(binding)
                extended[right] = left
                return solve(index + 1, extended)
            return False
        for atom in atoms:
            unified = _unify_literal(literal, atom, binding)
            if unified is not None and solve(index + 1, unified):
                return True
        return False

    solve(0, {})
    return tuple(results)


def is_applicable(
    label: str, d: TaskNetwork, state: frozenset, ctx: RunContext
) -> Optional[Substitution]:
    found = applicable_substitutions(label, d, state, ctx, limit=1)
    return found[0] if found else None


# -- realised constraints and action results -----------------------------------

def realised_constraints(label: str, d: TaskNetwork) -> frozenset:
    """Constraints settled by executing ``label`` and removable afterwards."""
    realised = set()
    for c in d.formula:
        if isinstance(c.body, Ordering):
            if not c.negated:
                left = c.body.before
                if (isinstance(left, LabelRef) and left.label == label) or (
                    isinstance(left, LastRef) and left.labels == frozenset((label,))
                ):
                    realised.add(c)
            else:
                right = c.body.after
                if (isinstance(right, LabelRef) and right.label == label) or (
                    isinstance(right, FirstRef) and label in right.labels
                ):
                    realised.add(c)
    for c in relevant_constraints(label, d):
        if isinstance(c.body, Between):
            end = c.body.end
            if (isinstance(end, LabelRef) and end.label == label) or (
                isinstance(end, FirstRef) and label in end.labels
            ):
                realised.add(c)
        else:
            realised.add(c)
    return frozenset(realised)


def _strip_from_last(ref, label: str):
    if isinstance(ref, LastRef) and label in ref.labels:
        return LastRef(ref.labels - {label})
    return ref


def action_result(
    label: str,
    state: frozenset,
    d: TaskNetwork,
    theta: Substitution,
    couples: frozenset,
    domain: Domain,
) -> tuple[TaskNetwork, frozenset, frozenset]:
    """Result of executing the applicable action ``label`` under ``theta``.

    The action leaves the task set, its effects rewrite the state, realised
    constraints disappear, the label is dropped from last[] expressions,
    between-constraints that became trivial are pruned, and negated
    between-constraints whose escape literal now holds are discharged.  The
    binding is applied to the whole resulting triple.
    """
    lt = d.task_of(label)
    op = domain.operator_for(lt.task)
    ground_task = lt.task.substitute(theta)
    if not ground_task.is_ground:
        raise ValueError(f"executing non-ground task {ground_task}")
    _, add, delete = op.instantiate(ground_task)
    new_state = frozenset((state - frozenset(delete)) | frozenset(add))

    survivors = []
    live_after = d.labels - {label}
    for c in d.formula - realised_constraints(label, d):
        c = c.rewrite_refs(lambda ref: _strip_from_last(ref, label))
        b = c.body
        if isinstance(b, Between):
            end = b.end
            if (isinstance(end, LabelRef) and end.label == label) or (
                isinstance(end, FirstRef) and label in end.labels
            ):
                continue  # right endpoint reached first: holds trivially
            if c.negated and _executed_ref(b.start, live_after):
                escaped = holds(b.literal.negated().substitute(theta), new_state)
                if escaped:
                    continue
        survivors.append(c)

    tasks = frozenset(t for t in d.tasks if t.label != label)
    network = TaskNetwork(tasks, frozenset(survivors))
    network = network.substitute(theta)
    couples = substitute(couples, theta)
    return network, new_state, couples


# -- the three kinds of execution ----------------------------------------------

def exec_via_action(
    cfg: Configuration, ctx: RunContext, all_bindings: bool = False
) -> tuple[Step, ...]:
    steps = []
    for lt in sorted(primary_tasks(cfg.network, cfg.domain), key=labelled_task_key):
        if not cfg.domain.is_primitive(lt.task.symbol):
            continue
        limit = None if all_bindings else 1
        for theta in applicable_substitutions(
            lt.label, cfg.network, cfg.state, ctx, limit=limit
        ):
            network, state, couples = action_result(
                lt.label, cfg.state, cfg.network, theta, cfg.couples, cfg.domain
            )
            config = Configuration(
                network, state, couples, cfg.domain, cfg.theta.compose(theta)
            )
            steps.append(
                Step(
                    ACTION,
                    config,
                    label=lt.label,
                    task=lt.task.substitute(theta),
                    binding=theta,
                    removed=frozenset((lt.label,)),
                )
            )
    return tuple(steps)


def _replace_in_couples(couples: frozenset, target: LabelledTask, body: Body) -> frozenset:
    out = set()
    for couple in couples:
        if target in couple.pursued:
            pursued = (couple.pursued - {target}) | body.network.tasks
            out.add(dc_replace(couple, pursued=frozenset(pursued)))
        else:
            out.add(couple)
    return frozenset(out)


def exec_via_reduction(cfg: Configuration, ctx: RunContext) -> tuple[Step, ...]:
    steps = []
    for lt in sorted(primary_tasks(cfg.network, cfg.domain), key=labelled_task_key):
        if not cfg.domain.is_nonprimitive(lt.task.symbol):
            continue
        # candidates rename against a fork; the chosen step's names are
        # committed by the caller via RunContext.absorb
        bodies = relevant_method_bodies(lt.task, cfg.domain, ctx.gen.clone())
        for body in bodies:
            remaining = ordered_alternatives(b for b in bodies if b is not body)
            network = reduce_task(cfg.network, lt.label, body.network)
            couples = _replace_in_couples(cfg.couples, lt, body)
            couples = couples | {
                ReductionCouple(lt.label, body.network.tasks, remaining)
            }
            config = Configuration(
                network, cfg.state, frozenset(couples), cfg.domain, cfg.theta
            )
            steps.append(
                Step(
                    REDUCTION,
                    config,
                    label=lt.label,
                    task=lt.task,
                    body=body,
                    removed=frozenset((lt.label,)),
                    added=body.network.labels,
                )
            )
    return tuple(steps)


def is_blocked(
    pursued: frozenset, d: TaskNetwork, state: frozenset, ctx: RunContext
) -> bool:
    """Is every primary member of ``pursued`` unable to make progress?"""
    members = {lt for lt in primary_tasks(d, ctx.domain) if lt in pursued}
    if not members:
        raise ValueError("pursued set shares no primary task with the network")
    for lt in members:
        if ctx.domain.is_primitive(lt.task.symbol):
            if is_applicable(lt.label, d, state, ctx) is not None:
                return False
        elif has_relevant_method(lt.task, ctx.domain):
            return False
    return True


def replace_tasks(pursued: frozenset, body: TaskNetwork, d: TaskNetwork) -> TaskNetwork:
    """Swap the still-present part of ``pursued`` for the tasks of ``body``.

    Constraint occurrences of the replaced labels inside first[]/last[]
    expressions are redirected to the body's labels, then every constraint
    still mentioning any pursued label (executed members included) is dropped.
    """
    pursued_labels = frozenset(lt.label for lt in pursued)
    present = frozenset(lt for lt in d.tasks if lt.label in pursued_labels)
    present_labels = frozenset(lt.label for lt in present)
    new_labels = body.labels

    def redirect(ref):
        if isinstance(ref, FirstRef) and ref.labels & present_labels:
            return FirstRef((ref.labels - present_labels) | new_labels)
        if isinstance(ref, LastRef) and ref.labels & present_labels:
            return LastRef((ref.labels - present_labels) | new_labels)
        return ref

    kept = []
    for c in d.formula:
        c = c.rewrite_refs(redirect)
        if c.labels() & pursued_labels:
            continue
        kept.append(c)
    tasks = (d.tasks - present) | body.tasks
    return TaskNetwork(frozenset(tasks), frozenset(kept) | body.formula)


def update_couples(
    replaced_labels: frozenset,
    couple: ReductionCouple,
    body: Body,
    couples: frozenset,
) -> frozenset:
    """Propagate a replacement through the reduction couples.

    The chosen alternative is consumed; couples subsuming the replaced one are
    rewritten to pursue the new tasks; couples still mentioning a replaced
    label are dropped entirely.
    """
    out = set()
    for c in couples:
        if c == couple:
            c = dc_replace(
                c, alternatives=tuple(b for b in c.alternatives if b != body)
            )
        if c.labels >= couple.labels:
            pursued = frozenset(
                lt for lt in c.pursued if lt.label not in replaced_labels
            ) | body.network.tasks
            c = dc_replace(c, pursued=pursued)
        if c.labels & replaced_labels:
            continue
        out.add(c)
    return frozenset(out)


def smallest_replaceable(couples: frozenset) -> frozenset:
    """Couples with alternatives left that no smaller replaceable couple undercuts."""
    out = set()
    for c in couples:
        if not c.alternatives:
            continue
        ok = True
        for other in couples:
            if other == c:
                continue
            if other.labels >= c.labels:
                continue
            if other.labels < c.labels and not other.alternatives:
                continue
            if not (other.labels & c.labels):
                continue
            ok = False
            break
        if ok:
            out.add(c)
    return frozenset(out)


def exec_via_replacement(cfg: Configuration, ctx: RunContext) -> tuple[Step, ...]:
    steps = []
    primary_labels = frozenset(
        lt.label for lt in primary_tasks(cfg.network, cfg.domain)
    )
    smallest = smallest_replaceable(cfg.couples)
    for couple in cfg.sorted_couples():
        if not couple.alternatives:
            continue
        if not (couple.labels & primary_labels):
            continue
        if not is_blocked(couple.pursued, cfg.network, cfg.state, ctx):
            continue
        present = couple.labels & cfg.network.labels
        complete = couple.labels <= cfg.network.labels
        for body in couple.alternatives:
            network = replace_tasks(couple.pursued, body.network, cfg.network)
            couples = update_couples(present, couple, body, cfg.couples)
            config = Configuration(
                network, cfg.state, couples, cfg.domain, cfg.theta
            )
            steps.append(
                Step(
                    REPLACEMENT,
                    config,
                    label=couple.origin,
                    body=body,
                    removed=present,
                    added=body.network.labels,
                    complete=complete,
                    jump=couple not in smallest,
                )
            )
    return tuple(steps)


def exec_all(
    cfg: Configuration, ctx: RunContext, all_bindings: bool = False
) -> tuple[Step, ...]:
    """Every execution possible from ``cfg``: actions, reductions, replacements."""
    if not cfg.network.tasks:
        return ()
    return (
        exec_via_action(cfg, ctx, all_bindings)
        + exec_via_reduction(cfg, ctx)
        + exec_via_replacement(cfg, ctx)
    )


def is_successful(cfg: Configuration) -> bool:
    return not cfg.network.tasks


def is_trace_blocked(cfg: Configuration, ctx: RunContext) -> bool:
    """Every couple meeting a primary task is blocked with nothing left to try."""
    primary_labels = frozenset(
        lt.label for lt in primary_tasks(cfg.network, cfg.domain)
    )
    for couple in cfg.couples:
        if not (couple.labels & primary_labels):
            continue
        if couple.alternatives:
            return False
        if not is_blocked(couple.pursued, cfg.network, cfg.state, ctx):
            return False
    return True
