"""Continual sense-reason-act loop over dynamic execution traces.

Each iteration first absorbs newly observed tasks as top-level tasks (an
observation step appended to the d-trace), then, while the d-trace is neither
successful nor blocked, performs one execution step chosen by the strategy.
A blocked d-trace idles; only new observations can unblock it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace as dc_replace
from typing import Callable, Iterable, Optional

from .acting import (
    INITIAL,
    OBSERVATION,
    Configuration,
    ReductionCouple,
    RunContext,
    Step,
    exec_all,
    initial_configuration,
    is_successful,
    is_trace_blocked,
    make_context,
)
from .constraints import TaskNetwork
from .domain import Domain, NOP_SYMBOL
from .model import LabelledTask, Task, constants_of, labelled_task_key
from .reduction import has_relevant_method
from .trace import Strategy, Trace

NOP_LABEL = "0"


class ObservationError(Exception):
    pass


@dataclass
class EventSource:
    """Pull interface yielding the tasks observed at each loop iteration."""

    def poll(self, iteration: int) -> tuple[tuple[Optional[str], Task], ...]:
        raise NotImplementedError

    def exhausted_after(self) -> Optional[int]:
        """Last iteration that can still yield tasks, when known."""
        return None


@dataclass
class ScriptedEvents(EventSource):
    """Iteration-indexed schedule of observed tasks."""

    schedule: dict[int, tuple[tuple[Optional[str], Task], ...]] = field(
        default_factory=dict
    )

    def poll(self, iteration: int):
        return self.schedule.get(iteration, ())

    def exhausted_after(self) -> Optional[int]:
        return max(self.schedule, default=-1)


@dataclass
class CallbackEvents(EventSource):
    """Reads one observation batch per iteration from a callback.

    The callback returns an iterable of tasks, or None when the feed is
    closed; used for the interactive line-fed source.
    """

    callback: Callable[[int], Optional[Iterable[tuple[Optional[str], Task]]]]
    closed: bool = False

    def poll(self, iteration: int):
        if self.closed:
            return ()
        batch = self.callback(iteration)
        if batch is None:
            self.closed = True
            return ()
        return tuple(batch)

    def exhausted_after(self) -> Optional[int]:
        return -1 if self.closed else None


def initial_agent_configuration(state: frozenset, domain: Domain) -> Configuration:
    nop = LabelledTask(NOP_LABEL, Task(NOP_SYMBOL))
    network = TaskNetwork(frozenset((nop,)), frozenset())
    return initial_configuration(network, state, domain)


def top_couple(config: Configuration) -> ReductionCouple:
    """The unique top-level couple: no origin and nothing left to try."""
    tops = [c for c in config.couples if c.origin is None]
    if len(tops) != 1:
        raise ValueError(f"expected one top-level couple, found {len(tops)}")
    if tops[0].alternatives:
        raise ValueError("top-level couple has alternatives")
    return tops[0]


def check_observable(task: Task, domain: Domain) -> Optional[str]:
    """Why ``task`` falls outside the observed-task stipulation, if it does."""
    if not task.is_ground:
        return f"observed task {task} is not ground"
    if domain.is_primitive(task.symbol):
        op = domain.operator_for(task)
        if op.precondition:
            return (
                f"observed primitive task {task} has a non-empty precondition"
            )
        return None
    if domain.is_nonprimitive(task.symbol):
        if not has_relevant_method(task, domain):
            return f"observed task {task} has no relevant method"
        return None
    return f"observed task {task} has no operator or method"


def observe(
    config: Configuration,
    tasks: Iterable[tuple[Optional[str], Task]],
    ctx: RunContext,
    strict: bool = False,
    warn: Optional[Callable[[str], None]] = None,
) -> tuple[Configuration, frozenset]:
    """Insert newly observed tasks as top-level tasks.

    Tasks get fresh labels (an explicitly provided label is kept if still
    free) and are added to the network and the top-level couple; the formula
    is untouched.  Stipulation violations are rejected under ``strict`` and
    reported through ``warn`` otherwise.
    """
    labelled = []
    for wanted_label, task in tasks:
        problem = check_observable(task, ctx.domain)
        if problem is not None:
            if strict or "no operator or method" in problem or "not ground" in problem:
                raise ObservationError(problem)
            if warn is not None:
                warn(problem)
        label = ctx.gen.label(wanted_label or "t")
        labelled.append(LabelledTask(label, task))
    observed = frozenset(labelled)
    if not observed:
        return config, observed
    ctx.extend_universe(constants_of(observed))
    network = TaskNetwork(config.network.tasks | observed, config.network.formula)
    top = top_couple(config)
    couples = (config.couples - {top}) | {
        dc_replace(top, pursued=top.pursued | observed)
    }
    new_config = Configuration(
        network, config.state, frozenset(couples), config.domain, config.theta
    )
    return new_config, observed


@dataclass
class LoopResult:
    dtrace: Trace
    iterations: int
    stopped_on: str  # "success" | "blocked" | "iterations" | "events-exhausted"


def sra_step(
    config: Configuration,
    iteration: int,
    events: EventSource,
    strategy: Strategy,
    dtrace: Trace,
    ctx: RunContext,
    strict: bool = False,
    warn: Optional[Callable[[str], None]] = None,
) -> Configuration:
    """One loop iteration: sense, then at most one execution step."""
    batch = events.poll(iteration)
    config2, observed = observe(config, batch, ctx, strict=strict, warn=warn)
    if observed:
        dtrace.steps.append(Step(OBSERVATION, config2, observed=observed))
    if is_successful(config2) or is_trace_blocked(config2, ctx):
        return config2
    choices = exec_all(config2, ctx, strategy.wants_all_bindings)
    if not choices:
        return config2
    chosen = strategy.choose(dtrace.steps, choices)
    if chosen is None:
        return config2
    ctx.absorb(chosen.config)
    dtrace.steps.append(chosen)
    return chosen.config


def run_agent(
    state: frozenset,
    domain: Domain,
    events: EventSource,
    strategy: Strategy,
    max_iterations: int = 1000,
    stop_on_success: bool = True,
    strict: bool = False,
    warn: Optional[Callable[[str], None]] = None,
) -> LoopResult:
    """Run the sense-reason-act loop from the initial no-op configuration.

    The loop itself is endless; this driver stops after ``max_iterations``,
    on success (when requested), or once a scripted event source is drained
    and the d-trace cannot move anymore.
    """
    config = initial_agent_configuration(state, domain)
    ctx = make_context(domain, config)
    dtrace = Trace([Step(INITIAL, config)], ctx)
    stopped = "iterations"
    iteration = 0
    while iteration < max_iterations:
        config = sra_step(
            config, iteration, events, strategy, dtrace, ctx, strict, warn
        )
        iteration += 1
        if stop_on_success and is_successful(config):
            stopped = "success"
            break
        last_event = events.exhausted_after()
        if last_event is not None and iteration > last_event:
            # nothing more will ever be observed; stop once the trace can no
            # longer move (or the choice script has nothing left to say)
            if is_successful(config):
                stopped = "success"
                break
            if is_trace_blocked(config, ctx):
                stopped = "blocked"
                break
            if _script_done(strategy):
                stopped = "events-exhausted"
                break
    return LoopResult(dtrace, iteration, stopped)


def _script_done(strategy: Strategy) -> bool:
    position = getattr(strategy, "position", None)
    directives = getattr(strategy, "directives", None)
    return (
        position is not None
        and directives is not None
        and position >= len(directives)
    )


def observed_union(dtrace: Trace) -> frozenset:
    """Every task ever present at the top level, initial no-op included."""
    out = set(dtrace.initial.network.tasks)
    for step in dtrace.steps:
        if step.kind == OBSERVATION:
            out |= step.observed
    return frozenset(out)


def dtrace_to_trace(dtrace: Trace) -> Trace:
    """Fold observation steps away by propagating observed tasks backwards.

    Repeatedly takes the last observation step, removes it, and adds its
    tasks to the network and top-level couple of every earlier configuration.
    The result is a plain execution trace of the union network under the
    original initial state, performing the same actions.
    """
    steps = list(dtrace.steps)
    while True:
        index = None
        for i in range(len(steps) - 1, -1, -1):
            if steps[i].kind == OBSERVATION:
                index = i
                break
        if index is None:
            break
        observed = steps[index].observed
        del steps[index]
        for i in range(index):
            step = steps[i]
            cfg = step.config
            network = TaskNetwork(cfg.network.tasks | observed, cfg.network.formula)
            couples = set()
            for couple in cfg.couples:
                if couple.origin is None:
                    couples.add(
                        dc_replace(couple, pursued=couple.pursued | observed)
                    )
                else:
                    couples.add(couple)
            steps[i] = dc_replace(
                step,
                config=Configuration(
                    network, cfg.state, frozenset(couples), cfg.domain, cfg.theta
                ),
            )
    return Trace(steps, dtrace.ctx, dtrace.budget_exhausted)
