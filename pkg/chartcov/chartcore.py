"""Flat state charts composed in parallel over a broadcast event bus.

A :class:`SystemModel` is an ordered set of :class:`StateChart` values. The
:func:`dispatch` function implements run-to-completion semantics: an external
event is offered to every chart, fired transitions may emit internal events,
and those are drained FIFO before the macrostep ends.

Every value here is immutable, so configurations can be shared between
threads and stored in sets.
"""
from __future__ import annotations

import itertools
import logging
import operator
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple, Union

from chartcov import config

logger = logging.getLogger(__name__)

Value = Union[bool, int]

COMPARATORS: Dict[str, Callable[[Value, Value], bool]] = {
    '==': operator.eq,
    '!=': operator.ne,
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}

ENV = 'env'
MAX_SPACE = 2 ** 63 - 1


class ModelError(ValueError):
    """Raised when a model breaks a structural invariant."""


class LivelockError(RuntimeError):
    """Raised when a macrostep processes more internal events than allowed."""

    def __init__(self, event: str, limit: int):
        super().__init__(f"macrostep triggered by {event} exceeded {limit} internal events")
        self.event = event
        self.limit = limit


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Event:
    name: str
    payload: Tuple[Tuple[str, Value], ...] = ()
    origin: str = ENV

    @classmethod
    def of(cls, name: str, origin: str = ENV, **payload: Value) -> 'Event':
        """Build an event from keyword payload fields."""
        return cls(name, tuple(payload.items()), origin)

    @classmethod
    def from_mapping(cls, name: str, payload: Mapping[str, Value], origin: str = ENV) -> 'Event':
        return cls(name, tuple(payload.items()), origin)

    def get(self, name: str, default=None):
        """Payload value of `name`, or `default` when absent."""
        for key, value in self.payload:
            if key == name:
                return value
        return default

    def as_dict(self) -> Dict[str, Value]:
        """Payload as a plain dict."""
        return dict(self.payload)


@dataclass(frozen=True)
class PayloadAtom:
    """`field op literal` against the triggering event's payload."""
    field: str
    op: str
    value: Value
    span: Optional[SourceSpan] = _span()

    def evaluate(self, event: Event, active: Mapping[str, str]) -> bool:
        actual = event.get(self.field)
        if not isinstance(actual, (bool, int)):
            return False
        # true/false never compare with integers
        if isinstance(actual, bool) != isinstance(self.value, bool):
            return False
        return COMPARATORS[self.op](actual, self.value)


@dataclass(frozen=True)
class InStateAtom:
    """`in(Chart.State)`: true while the named chart is in the named state."""
    chart: str
    state: str
    span: Optional[SourceSpan] = _span()

    def evaluate(self, event: Event, active: Mapping[str, str]) -> bool:
        return active.get(self.chart) == self.state


Atom = Union[PayloadAtom, InStateAtom]


@dataclass(frozen=True)
class Guard:
    atoms: Tuple[Atom, ...]

    def evaluate(self, event: Event, active: Mapping[str, str]) -> bool:
        return all(atom.evaluate(event, active) for atom in self.atoms)


@dataclass(frozen=True)
class FieldRef:
    """`$field`: copies a field from the triggering event's payload."""
    field: str


@dataclass(frozen=True)
class EventTemplate:
    name: str
    args: Tuple[Tuple[str, Union[Value, FieldRef]], ...] = ()

    def instantiate(self, trigger: Event, origin: str) -> Event:
        payload = []
        for key, arg in self.args:
            if isinstance(arg, FieldRef):
                value = trigger.get(arg.field)
                if value is None:
                    continue
                payload.append((key, value))
            else:
                payload.append((key, arg))
        return Event(self.name, tuple(payload), origin)


@dataclass(frozen=True)
class Transition:
    source: str
    event: str
    target: str
    guard: Optional[Guard] = None
    emits: Tuple[EventTemplate, ...] = ()
    span: Optional[SourceSpan] = _span()
    target_span: Optional[SourceSpan] = _span()

    def enabled(self, event: Event, active: Mapping[str, str]) -> bool:
        if event.name != self.event:
            return False
        return self.guard is None or self.guard.evaluate(event, active)


@dataclass(frozen=True)
class StateChart:
    name: str
    states: Tuple[str, ...]
    initial: str
    transitions: Tuple[Transition, ...] = ()
    span: Optional[SourceSpan] = _span()
    state_spans: Tuple[SourceSpan, ...] = _span()
    initial_span: Optional[SourceSpan] = _span()

    @cached_property
    def _by_source(self) -> Dict[str, Tuple[Transition, ...]]:
        grouped: Dict[str, List[Transition]] = {}
        for transition in self.transitions:
            grouped.setdefault(transition.source, []).append(transition)
        return {state: tuple(ts) for state, ts in grouped.items()}

    def outgoing(self, state: str) -> Tuple[Transition, ...]:
        """Transitions leaving `state`, in document order."""
        return self._by_source.get(state, ())


@dataclass(frozen=True)
class SystemModel:
    charts: Tuple[StateChart, ...]

    def chart(self, name: str) -> StateChart:
        for chart in self.charts:
            if chart.name == name:
                return chart
        raise KeyError(name)

    @property
    def chart_names(self) -> Tuple[str, ...]:
        return tuple(chart.name for chart in self.charts)


@dataclass(frozen=True)
class Configuration:
    active: Tuple[Tuple[str, str], ...]
    queue: Tuple[Event, ...] = ()

    def state_of(self, chart: str) -> str:
        """Active state of `chart`."""
        for name, state in self.active:
            if name == chart:
                return state
        raise KeyError(chart)

    @property
    def states(self) -> Tuple[str, ...]:
        """Active states in chart order."""
        return tuple(state for _, state in self.active)

    def as_dict(self) -> Dict[str, str]:
        """Mapping of chart name to active state."""
        return dict(self.active)


@dataclass(frozen=True)
class Problem:
    """One invariant violation found by :func:`model_problems`."""
    severity: str
    code: str
    message: str
    span: Optional[SourceSpan] = None


def model_problems(model: SystemModel) -> List[Problem]:
    """Check chart and model invariants; errors first in document order."""
    problems: List[Problem] = []
    states_by_chart: Dict[str, Set[str]] = {}
    for chart in model.charts:
        if chart.name in states_by_chart:
            problems.append(Problem('error', 'duplicate-chart',
                                    f"duplicate chart name '{chart.name}'", chart.span))
            continue
        states_by_chart[chart.name] = set(chart.states)

    for chart in model.charts:
        seen: Set[str] = set()
        spans = chart.state_spans or ()
        for index, state in enumerate(chart.states):
            if state in seen:
                span = spans[index] if index < len(spans) else chart.span
                problems.append(Problem('error', 'duplicate-state',
                                        f"duplicate state '{state}' in chart '{chart.name}'", span))
            seen.add(state)
        if chart.initial not in seen:
            problems.append(Problem('error', 'unknown-initial',
                                    f"initial state '{chart.initial}' not declared in chart '{chart.name}'",
                                    chart.initial_span or chart.span))
        for transition in chart.transitions:
            if transition.source not in seen:
                problems.append(Problem('error', 'unknown-source',
                                        f"unknown source state '{transition.source}'", transition.span))
            if transition.target not in seen:
                problems.append(Problem('error', 'unknown-target',
                                        f"unknown target state '{transition.target}'",
                                        transition.target_span or transition.span))
            atoms = transition.guard.atoms if transition.guard else ()
            for atom in atoms:
                if isinstance(atom, InStateAtom):
                    if atom.chart not in states_by_chart:
                        problems.append(Problem('error', 'unknown-chart',
                                                f"unknown chart '{atom.chart}' in in(...)", atom.span))
                    elif atom.state not in states_by_chart[atom.chart]:
                        problems.append(Problem('error', 'unknown-state-ref',
                                                f"unknown state '{atom.chart}.{atom.state}' in in(...)",
                                                atom.span))
                elif atom.op not in COMPARATORS:
                    problems.append(Problem('error', 'unknown-operator',
                                            f"unknown comparison operator '{atom.op}'", atom.span))
            for template in transition.emits:
                keys = [key for key, _ in template.args]
                for key in sorted({key for key in keys if keys.count(key) > 1}):
                    problems.append(Problem('error', 'duplicate-argument',
                                            f"duplicate argument '{key}' in emit {template.name}",
                                            transition.span))
    return problems


def require_valid(model: SystemModel) -> SystemModel:
    """Return `model` unchanged, or raise ModelError listing every error."""
    errors = [p for p in model_problems(model) if p.severity == 'error']
    if errors:
        raise ModelError('; '.join(p.message for p in errors))
    return model


def alphabet(model: SystemModel) -> Set[str]:
    """Names of all events some transition reacts to."""
    return {t.event for chart in model.charts for t in chart.transitions}


def init(model: SystemModel) -> Configuration:
    """Every chart in its initial state, with an empty queue."""
    return Configuration(tuple((chart.name, chart.initial) for chart in model.charts))


def _microstep(model: SystemModel, active: Dict[str, str], event: Event,
               queue: deque, emitted: List[Event]) -> None:
    snapshot = dict(active)
    for chart in model.charts:
        for transition in chart.outgoing(snapshot[chart.name]):
            if transition.enabled(event, snapshot):
                active[chart.name] = transition.target
                for template in transition.emits:
                    internal = template.instantiate(event, chart.name)
                    queue.append(internal)
                    emitted.append(internal)
                break


def _drain(model: SystemModel, active: Dict[str, str], queue: deque, emitted: List[Event],
           trigger: Event, limit: int, processed: int) -> int:
    while queue:
        processed += 1
        if processed > limit:
            logger.warning("Livelock while processing %s", trigger.name)
            raise LivelockError(trigger.name, limit)
        _microstep(model, active, queue.popleft(), queue, emitted)
    return processed


def dispatch(model: SystemModel, configuration: Configuration, event: Event,
             microstep_limit: int = None) -> Tuple[Configuration, List[Event]]:
    """Process one external event to quiescence.

    Returns the new configuration (with an empty queue) and every event
    emitted during the macrostep, in emission order.
    """
    limit = config.MICROSTEP_LIMIT if microstep_limit is None else microstep_limit
    active = configuration.as_dict()
    queue = deque(configuration.queue)
    emitted: List[Event] = []

    # leftovers from an interrupted macrostep go first
    processed = _drain(model, active, queue, emitted, event, limit, 0)
    _microstep(model, active, event, queue, emitted)
    _drain(model, active, queue, emitted, event, limit, processed)

    result = Configuration(tuple((chart.name, active[chart.name]) for chart in model.charts))
    return result, emitted


def enumerate_space(model: SystemModel) -> Tuple[int, Iterator[Tuple[str, ...]]]:
    """Size and lexicographic iterator of the cross product of chart states."""
    count = 1
    for chart in model.charts:
        count *= len(chart.states)
        if count > MAX_SPACE:
            raise OverflowError(f"state space exceeds {MAX_SPACE} combinations")
    return count, itertools.product(*(chart.states for chart in model.charts))


def reachable(model: SystemModel, events: Iterable[Event], bound: int) -> Set[Configuration]:
    """Breadth-first closure of init(model) under dispatch, cut at `bound` macrosteps."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    events = list(events)
    start = init(model)
    seen = {start}
    frontier = [start]
    for depth in range(bound):
        following = []
        for configuration in frontier:
            for event in events:
                successor, _ = dispatch(model, configuration, event)
                if successor not in seen:
                    seen.add(successor)
                    following.append(successor)
        logger.debug("Depth %d: %d new configurations", depth + 1, len(following))
        if not following:
            break
        frontier = following
    return seen
