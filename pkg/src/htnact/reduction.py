"""Method relevance and the reduction rewriting of task networks."""
from __future__ import annotations

from dataclasses import dataclass

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
    rewrite_labels,
)
from .domain import Domain, fresh_rename
from .model import NameGenerator, Task, Variable, match_task, substitute


@dataclass(frozen=True)
class Body:
    """A fresh-renamed relevant method-body, tagged with its source method.

    ``index`` is the declaring method's position in the domain, used as the
    canonical order for alternative bodies.
    """

    method: str
    index: int
    network: TaskNetwork

    def substitute(self, theta) -> "Body":
        return Body(self.method, self.index, self.network.substitute(theta))

    def sort_key(self) -> tuple:
        return (self.index, str(self.network))


def has_relevant_method(task: Task, domain: Domain) -> bool:
    return any(
        match_task(task, m.head) is not None for _, m in domain.methods_for(task.symbol)
    )


def relevant_method_bodies(task: Task, domain: Domain, gen: NameGenerator) -> tuple[Body, ...]:
    """Fresh-renamed instances of every method body relevant for ``task``.

    Declaration order is preserved.  Primitive task symbols are a contract
    violation; an empty result just means no method head matches.
    """
    if domain.is_primitive(task.symbol):
        raise ValueError(f"task {task} is primitive; it has no relevant methods")
    bodies = []
    for index, method in domain.methods_for(task.symbol):
        theta = match_task(task, method.head)
        if theta is None:
            continue
        head_vars = frozenset(
            a for a in method.head.args if isinstance(a, Variable)
        )
        renamed = fresh_rename(method.body, gen, keep=head_vars)
        bodies.append(Body(method.name, index, substitute(renamed, theta)))
    return tuple(bodies)


def reduce_task(d: TaskNetwork, label: str, body: TaskNetwork) -> TaskNetwork:
    """Replace the non-primitive task ``label`` in ``d`` with ``body``.

    The surviving constraints are rewritten in one pass: ordering endpoints
    on ``label`` become first[]/last[] expressions over the body's labels,
    before/after/between constraints are retargeted the same way, and any
    occurrence of ``label`` inside an existing first[]/last[] set is replaced
    by the body's labels.  Negated constraints rewrite identically.
    """
    target = d.task_of(label)
    new_labels = body.labels

    def endpoint_first(ref):
        if isinstance(ref, LabelRef) and ref.label == label:
            return FirstRef(new_labels)
        return ref

    def endpoint_last(ref):
        if isinstance(ref, LabelRef) and ref.label == label:
            return LastRef(new_labels)
        return ref

    rewritten = []
    for c in rewrite_labels(d.formula, label, new_labels):
        b = c.body
        if isinstance(b, Ordering):
            nb = Ordering(endpoint_last(b.before), endpoint_first(b.after))
        elif isinstance(b, Before):
            nb = Before(b.literal, endpoint_first(b.ref))
        elif isinstance(b, Between):
            nb = Between(endpoint_last(b.start), b.literal, endpoint_first(b.end))
        else:
            nb = After(endpoint_last(b.ref), b.literal)
        rewritten.append(Constraint(nb, c.negated) if nb != b else c)

    tasks = (d.tasks - {target}) | body.tasks
    return TaskNetwork(frozenset(tasks), body.formula | frozenset(rewritten))
