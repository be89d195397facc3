"""Verification suites tying the acting semantics to the planning oracle.

Each suite checks one of the formal properties at desk scale: extendability
of open traces, the equivalence between partial-replacement-free successful
traces and planned solutions, complete-replacement elimination, acting-only
solutions, unavoidable jumps, and the soundness of dynamic traces.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .acting import (
    Configuration,
    exec_all,
    initial_configuration,
    is_successful,
    is_trace_blocked,
    make_context,
)
from .agent import ScriptedEvents, dtrace_to_trace, run_agent
from .constraints import TaskNetwork
from .corpus import CorpusCase
from .domain import Domain
from .model import Task
from .oracle import solutions_bounded
from .trace import (
    DefaultStrategy,
    REPLACEMENT,
    SearchBudgetExceeded,
    Trace,
    canonical_key,
    eliminate_complete_replacements,
    iter_successful_traces,
    sample_traces,
    successful_action_sequences,
    validate_trace,
)


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    checked: int = 0
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.checked} checks)" if self.checked else ""
        out = f"{self.suite}: {status}{extra}"
        for d in self.details:
            out += f"\n  {d}"
        return out


def _render_sequence(actions: Iterable[Task]) -> str:
    return " . ".join(str(a) for a in actions) or "(empty)"


def acting_solution_set(
    network: TaskNetwork, state: frozenset, domain: Domain, max_nodes: int = 200_000
) -> frozenset:
    """Action sequences of all successful partial-replacement-free traces."""
    cfg = initial_configuration(network, state, domain)
    ctx = make_context(domain, cfg)
    return successful_action_sequences(
        cfg, ctx, allow_partial=False, allow_complete=True, max_nodes=max_nodes
    )


def check_equivalence(
    network: TaskNetwork, state: frozenset, domain: Domain, depth: int = 4
) -> Optional[str]:
    """Compare exhaustive acting against the oracle; None when they agree."""
    acted = acting_solution_set(network, state, domain)
    planned = solutions_bounded(network, state, domain, depth)
    if acted == planned:
        return None
    only_acting = sorted(map(_render_sequence, acted - planned))[:3]
    only_oracle = sorted(map(_render_sequence, planned - acted))[:3]
    parts = []
    if only_acting:
        parts.append("acting-only: " + " | ".join(only_acting))
    if only_oracle:
        parts.append("oracle-only: " + " | ".join(only_oracle))
    return "; ".join(parts)


def suite_equivalence(cases: Iterable[CorpusCase], depth: int = 4) -> SuiteResult:
    result = SuiteResult("equivalence", True)
    for case in cases:
        problem = check_equivalence(case.network, case.state, case.domain, depth)
        result.checked += 1
        if problem is not None:
            result.passed = False
            result.details.append(f"seed {case.seed}: {problem}")
    return result


def check_extendability(
    network: TaskNetwork, state: frozenset, domain: Domain, max_nodes: int = 100_000
) -> Optional[str]:
    """Over every reachable configuration: no executions iff successful/blocked."""
    cfg0 = initial_configuration(network, state, domain)
    ctx = make_context(domain, cfg0)
    seen = {canonical_key(cfg0)}
    stack = [cfg0]
    visited = 0
    while stack:
        cfg = stack.pop()
        visited += 1
        if visited > max_nodes:
            raise SearchBudgetExceeded(f"more than {max_nodes} configurations")
        steps = exec_all(cfg, ctx.for_config(cfg), all_bindings=True)
        terminal = is_successful(cfg) or is_trace_blocked(cfg, ctx)
        if bool(steps) == terminal:
            kind = "terminal" if terminal else "open"
            return f"{kind} configuration with {len(steps)} executions: {cfg.network}"
        for step in steps:
            key = canonical_key(step.config)
            if key not in seen:
                seen.add(key)
                stack.append(step.config)
    return None


def suite_extendability(cases: Iterable[CorpusCase]) -> SuiteResult:
    result = SuiteResult("extendability", True)
    for case in cases:
        problem = check_extendability(case.network, case.state, case.domain)
        result.checked += 1
        if problem is not None:
            result.passed = False
            result.details.append(f"seed {case.seed}: {problem}")
    return result


def check_elimination(trace: Trace) -> Optional[str]:
    """Eliminate complete replacements and re-check the trace's guarantees."""
    before = trace.actions_performed()
    rewritten = eliminate_complete_replacements(trace)
    if not rewritten.complete_replacement_free():
        return "complete replacements remain"
    if rewritten.actions_performed() != before:
        return (
            f"actions changed: {_render_sequence(before)} -> "
            f"{_render_sequence(rewritten.actions_performed())}"
        )
    if len(rewritten) > len(trace):
        return f"trace grew from {len(trace)} to {len(rewritten)}"
    problems = validate_trace(rewritten)
    if problems:
        return "; ".join(problems[:3])
    return None


def traces_with_complete_replacements(
    case: CorpusCase, per_case: int = 3
) -> list[Trace]:
    cfg0 = initial_configuration(case.network, case.state, case.domain)
    ctx = make_context(case.domain, cfg0)
    return sample_traces(
        cfg0,
        ctx,
        per_case,
        require=lambda t: any(
            s.kind == REPLACEMENT and s.complete for s in t.steps
        ),
    )


def suite_elimination(cases: Iterable[CorpusCase], per_case: int = 3) -> SuiteResult:
    result = SuiteResult("complete-replacement-elimination", True)
    for case in cases:
        for trace in traces_with_complete_replacements(case, per_case):
            result.checked += 1
            problem = check_elimination(trace)
            if problem is not None:
                result.passed = False
                result.details.append(f"seed {case.seed}: {problem}")
    if result.checked == 0:
        result.passed = False
        result.details.append("no trace with a complete replacement was found")
    return result


def find_acting_only_witness(
    network: TaskNetwork,
    state: frozenset,
    domain: Domain,
    depth: int = 4,
    max_nodes: int = 200_000,
) -> Optional[Trace]:
    """A successful trace whose performed actions are not a planned solution."""
    planned = solutions_bounded(network, state, domain, depth)
    cfg0 = initial_configuration(network, state, domain)
    ctx = make_context(domain, cfg0)
    for trace in iter_successful_traces(cfg0, ctx, max_nodes=max_nodes):
        if trace.actions_performed() not in planned:
            return trace
    return None


def suite_acting_only(
    network: TaskNetwork, state: frozenset, domain: Domain, depth: int = 4
) -> SuiteResult:
    result = SuiteResult("acting-only", True, checked=1)
    witness = find_acting_only_witness(network, state, domain, depth)
    if witness is None:
        result.passed = False
        result.details.append("every successful trace is a planned solution")
    else:
        labels = " . ".join(witness.action_labels())
        result.details.append(
            f"witness: {labels} = {_render_sequence(witness.actions_performed())}"
        )
    return result


def check_unavoidable_jump(
    network: TaskNetwork,
    state: frozenset,
    domain: Domain,
    target: tuple[Task, ...],
    max_nodes: int = 300_000,
) -> tuple[int, int]:
    """(matching traces, matching traces containing a jump) for the target plan.

    Enumerates every successful complete-replacement-free trace performing
    exactly ``target``.
    """
    cfg0 = initial_configuration(network, state, domain)
    ctx = make_context(domain, cfg0)
    total = jumps = 0
    for trace in iter_successful_traces(
        cfg0,
        ctx,
        allow_complete=False,
        action_target=target,
        max_nodes=max_nodes,
    ):
        total += 1
        if not trace.jump_free():
            jumps += 1
    return total, jumps


def suite_jumps(
    network: TaskNetwork,
    state: frozenset,
    domain: Domain,
    target: tuple[Task, ...],
) -> SuiteResult:
    result = SuiteResult("unavoidable-jumps", True)
    total, jumps = check_unavoidable_jump(network, state, domain, target)
    result.checked = total
    if total == 0:
        result.passed = False
        result.details.append("no complete-replacement-free trace performs the target")
    elif jumps != total:
        result.passed = False
        result.details.append(f"{total - jumps} of {total} matching traces are jump free")
    else:
        result.details.append(f"all {total} matching traces contain a jump")
    return result


def check_dtrace_soundness(
    case: CorpusCase, max_iterations: int = 300, strict: bool = True
) -> Optional[str]:
    """Run the loop on the case's schedule and re-validate the folded trace."""
    events = ScriptedEvents(dict(case.schedule))
    outcome = run_agent(
        case.state,
        case.domain,
        events,
        DefaultStrategy(),
        max_iterations=max_iterations,
        stop_on_success=False,
        strict=strict,
    )
    dtrace = outcome.dtrace
    folded = dtrace_to_trace(dtrace)
    if folded.actions_performed() != dtrace.actions_performed():
        return (
            f"actions differ: {_render_sequence(dtrace.actions_performed())} vs "
            f"{_render_sequence(folded.actions_performed())}"
        )
    if any(s.kind == "observation" for s in folded.steps):
        return "observation steps survived the folding"
    if folded.initial.network.formula:
        return "folded trace does not start from an unconstrained network"
    problems = validate_trace(folded)
    if problems:
        return "; ".join(problems[:3])
    return None


def suite_dtrace_soundness(cases: Iterable[CorpusCase]) -> SuiteResult:
    result = SuiteResult("dtrace-soundness", True)
    for case in cases:
        result.checked += 1
        problem = check_dtrace_soundness(case)
        if problem is not None:
            result.passed = False
            result.details.append(f"seed {case.seed}: {problem}")
    return result
