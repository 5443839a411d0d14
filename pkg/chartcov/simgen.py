"""Seeded discrete-event scenario generator for the intersection model.

Randomness lives only in the environment: every scenario draws its outcome
from its own numpy stream, derived from ``(seed, index)`` through
``SeedSequence([seed, index])``, and then drives the deterministic charts
with timestamped environment events.

Draw order per scenario (fixed, one draw each, whatever the parameters):

1. light cycle offset, uniform over the cycle's ticks
2. VRU present, Bernoulli(p_vru)
3. jaywalker, Bernoulli(p_jaywalk)
4. detected, Bernoulli(p_detect, times jaywalker_detect_factor for jaywalkers)
5. located, Bernoulli(p_locate)
6. transmission ok, Bernoulli(p_tx)
7. light failure, Bernoulli(p_light_failure)
"""
from __future__ import annotations

import heapq
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Iterable, List, Mapping, Optional, TextIO, Tuple

import numpy as np

from chartcov import config
from chartcov.chartcore import Configuration, Event, SystemModel, alphabet, dispatch, init
from chartcov.refmodels import (
    DETECT,
    FAILURE,
    LIGHT,
    LOCATE,
    PHASE_ELAPSED,
    RESPONSE,
    RSU_COMM,
    RSU_LOC,
    TIMEOUT,
    VEHICLE,
    ZONE_ENTER,
    CombinationCode,
    project_code,
)

logger = logging.getLogger(__name__)

REQUIRED_EVENTS = frozenset({PHASE_ELAPSED, DETECT, LOCATE, ZONE_ENTER, TIMEOUT})
REQUIRED_CHARTS = (LIGHT, RSU_LOC, RSU_COMM, VEHICLE)

# Equal-time events are delivered in this order.
PRIORITY = {FAILURE: 0, PHASE_ELAPSED: 1, DETECT: 2, LOCATE: 3, ZONE_ENTER: 4, TIMEOUT: 5}

# (light state, rising) per phase of the nominal cycle, starting at Red.
CYCLE = (
    ('Red', True),
    ('RedToYellow', True),
    ('Yellow', True),
    ('YellowToGreen', True),
    ('Green', False),
    ('GreenToYellow', False),
    ('Yellow', False),
    ('YellowToRed', False),
)

TRACE_FIELDS = ('id', 'seed_stream', 'jaywalker', 'events', 'states', 'decision_time', 'code', 'terminal')


class IncompatibleModelError(ValueError):
    """Raised when a model lacks the charts or events the generator drives."""


class SchemaError(ValueError):
    """Raised for a malformed line in a line-delimited file."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class SimParams:
    n_scenarios: int = 0
    seed: int = 0
    p_vru: float = config.DEFAULT_P_VRU
    p_detect: float = config.DEFAULT_P_DETECT
    p_locate: float = config.DEFAULT_P_LOCATE
    p_tx: float = config.DEFAULT_P_TX
    p_jaywalk: float = config.DEFAULT_P_JAYWALK
    phase_durations: Mapping[str, float] = field(default_factory=lambda: dict(config.PHASE_DURATIONS))
    # charts answer within the macrostep; only checked against timeout
    response_latency: float = config.DEFAULT_RESPONSE_LATENCY
    timeout: float = config.DEFAULT_TIMEOUT
    tick: float = config.DEFAULT_TICK
    detect_time: float = config.DEFAULT_DETECT_TIME
    locate_time: float = config.DEFAULT_LOCATE_TIME
    approach_time: float = config.DEFAULT_APPROACH_TIME
    p_light_failure: float = 0.0
    jaywalker_detect_factor: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.n_scenarios < 0:
            raise ValueError("n_scenarios must be non-negative")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name in ('p_vru', 'p_detect', 'p_locate', 'p_tx', 'p_jaywalk', 'p_light_failure'):
            _probability(name, getattr(self, name))
        if self.tick <= 0:
            raise ValueError("tick must be positive")
        missing = {state for state, _ in CYCLE} - set(self.phase_durations)
        if missing:
            raise ValueError(f"phase_durations lacks {sorted(missing)}")
        for state, seconds in self.phase_durations.items():
            if seconds <= 0:
                raise ValueError(f"duration of {state} must be positive")
        if self.ticks(self.phase_durations['Yellow']) < 2:
            raise ValueError("Yellow needs at least two ticks, one per visit")
        if any(self.ticks(self.phase_durations[state]) < 1 for state, _ in CYCLE):
            raise ValueError("every phase must last at least one tick")
        if self.response_latency < 0 or self.timeout <= self.response_latency:
            raise ValueError("timeout must exceed response_latency")
        if not 0 <= self.detect_time <= self.locate_time <= self.approach_time:
            raise ValueError("expected detect_time <= locate_time <= approach_time")
        if self.jaywalker_detect_factor < 0:
            raise ValueError("jaywalker_detect_factor must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def ticks(self, seconds: float) -> int:
        return int(round(seconds / self.tick))

    def seconds(self, ticks: int) -> float:
        return round(ticks * self.tick, 3)

    def cycle_ticks(self) -> List[Tuple[str, bool, int]]:
        """(state, rising, ticks) per phase; Yellow's time is split over its two visits."""
        yellow = self.ticks(self.phase_durations['Yellow'])
        visits = iter(((yellow + 1) // 2, yellow // 2))
        phases = []
        for state, rising in CYCLE:
            ticks = next(visits) if state == 'Yellow' else self.ticks(self.phase_durations[state])
            phases.append((state, rising, ticks))
        return phases


@dataclass(frozen=True)
class TraceEvent:
    t: float
    origin: str
    name: str
    payload: Dict[str, object]


@dataclass(frozen=True)
class ScenarioTrace:
    id: int
    seed_stream: int
    jaywalker: bool
    events: Tuple[TraceEvent, ...]
    state_timeline: Dict[str, Tuple[Tuple[float, str], ...]]
    decision_time: float
    code: CombinationCode
    terminal_vehicle_state: str

    def env_events(self) -> List[Event]:
        return [Event.from_mapping(e.name, e.payload) for e in self.events if e.origin == 'env']


def seed_stream(seed: int, index: int) -> int:
    """The documented mixing function from (seed, scenario index) to a 64-bit seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def rng_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_stream(seed, index)))


def check_compatible(model: SystemModel, params: SimParams = None) -> None:
    missing_charts = [name for name in REQUIRED_CHARTS if name not in model.chart_names]
    if missing_charts:
        raise IncompatibleModelError(f"model lacks charts {missing_charts}")
    required = set(REQUIRED_EVENTS)
    if params is not None and params.p_light_failure > 0:
        required.add(FAILURE)
    missing = sorted(required - alphabet(model))
    if missing:
        raise IncompatibleModelError(f"model never consumes {missing}")


class _Recorder:
    """Applies events to a configuration and keeps the event log and state timeline."""

    def __init__(self, model: SystemModel):
        self.model = model
        self.configuration: Configuration = init(model)
        self.events: List[TraceEvent] = []
        self.timeline: Dict[str, List[Tuple[float, str]]] = {
            name: [(0.0, state)] for name, state in self.configuration.active}

    def apply(self, t: float, event: Event) -> List[Event]:
        self.events.append(TraceEvent(t, event.origin, event.name, event.as_dict()))
        self.configuration, emitted = dispatch(self.model, self.configuration, event)
        for internal in emitted:
            self.events.append(TraceEvent(t, internal.origin, internal.name, internal.as_dict()))
        for name, state in self.configuration.active:
            if self.timeline[name][-1][1] != state:
                self.timeline[name].append((t, state))
        return emitted

    def frozen_timeline(self) -> Dict[str, Tuple[Tuple[float, str], ...]]:
        return {name: tuple(entries) for name, entries in self.timeline.items()}


def simulate_one(model: SystemModel, params: SimParams, index: int) -> ScenarioTrace:
    check_compatible(model, params)
    stream = seed_stream(params.seed, index)
    rng = np.random.Generator(np.random.PCG64(stream))
    phases = params.cycle_ticks()
    cycle_length = sum(ticks for _, _, ticks in phases)

    offset = int(rng.integers(cycle_length))
    vru = rng.random() < params.p_vru
    jaywalker = bool(rng.random() < params.p_jaywalk)
    p_detect = params.p_detect * (params.jaywalker_detect_factor if jaywalker else 1.0)
    detected = rng.random() < min(p_detect, 1.0)
    located = rng.random() < params.p_locate
    txok = bool(rng.random() < params.p_tx)
    light_failure = rng.random() < params.p_light_failure

    approach = params.ticks(params.approach_time)
    timeout = params.ticks(params.timeout)
    horizon = approach + timeout

    heap: List[Tuple[int, int, int, Event]] = []
    sequence = itertools.count()

    def schedule(tick: int, event: Event) -> None:
        heapq.heappush(heap, (tick, PRIORITY[event.name], next(sequence), event))

    if light_failure:
        schedule(0, Event.of(FAILURE))
    else:
        # advance the light from Red to the sampled position in its cycle
        phase, elapsed = 0, offset
        while elapsed >= phases[phase][2]:
            elapsed -= phases[phase][2]
            schedule(0, Event.of(PHASE_ELAPSED, rising=phases[phase][1]))
            phase += 1
        tick = phases[phase][2] - elapsed
        while tick <= horizon:
            schedule(tick, Event.of(PHASE_ELAPSED, rising=phases[phase][1]))
            phase = (phase + 1) % len(phases)
            tick += phases[phase][2]

    if vru and detected:
        schedule(params.ticks(params.detect_time), Event.of(DETECT))
        if located:
            schedule(params.ticks(params.locate_time), Event.of(LOCATE))
    schedule(approach, Event.of(ZONE_ENTER, txok=txok))

    recorder = _Recorder(model)
    decision: Optional[int] = None
    while heap and (decision is None or heap[0][0] <= decision):
        tick, _, _, event = heapq.heappop(heap)
        emitted = recorder.apply(params.seconds(tick), event)
        if decision is None and any(e.name == RESPONSE for e in emitted):
            decision = tick
        elif event.name == ZONE_ENTER and decision is None:
            schedule(tick + timeout, Event.of(TIMEOUT))
        elif event.name == TIMEOUT and decision is None:
            decision = tick

    if decision is None:
        decision = horizon
    final = recorder.configuration
    code = project_code(final, final.state_of(LIGHT))
    logger.debug("Scenario %d: code %s, terminal %s", index, code, final.state_of(VEHICLE))
    return ScenarioTrace(
        id=index,
        seed_stream=stream,
        jaywalker=jaywalker,
        events=tuple(recorder.events),
        state_timeline=recorder.frozen_timeline(),
        decision_time=params.seconds(decision),
        code=code,
        terminal_vehicle_state=final.state_of(VEHICLE),
    )


def simulate_batch(model: SystemModel, params: SimParams) -> List[ScenarioTrace]:
    check_compatible(model, params)
    logger.info("Simulating %d scenarios (seed %d, %d worker(s))",
                params.n_scenarios, params.seed, params.workers)
    indices = range(params.n_scenarios)
    if params.workers == 1 or params.n_scenarios < 2:
        traces = [simulate_one(model, params, index) for index in indices]
    else:
        chunksize = max(1, params.n_scenarios // (params.workers * 8))
        with ProcessPoolExecutor(max_workers=params.workers) as pool:
            # map keeps index order whatever the schedule
            traces = list(pool.map(partial(simulate_one, model, params), indices, chunksize=chunksize))
    logger.info("Simulated %d scenarios", len(traces))
    return traces


def replay(model: SystemModel, trace: ScenarioTrace) -> Tuple[Dict[str, Tuple[Tuple[float, str], ...]], str]:
    """Re-dispatch a trace's environment events; returns (state timeline, vehicle state)."""
    recorder = _Recorder(model)
    for event in trace.events:
        if event.origin == 'env':
            recorder.apply(event.t, Event.from_mapping(event.name, event.payload))
    return recorder.frozen_timeline(), recorder.configuration.state_of(VEHICLE)


def _time(t: float) -> str:
    return f"{t:.3f}"


def _dumps(value) -> str:
    return json.dumps(value, separators=(',', ':'), ensure_ascii=False)


def format_trace(trace: ScenarioTrace) -> str:
    events = ','.join(
        f'{{"t":{_time(e.t)},"origin":{_dumps(e.origin)},"name":{_dumps(e.name)},"payload":{_dumps(e.payload)}}}'
        for e in trace.events)
    states = ','.join(
        f'{_dumps(chart)}:[' + ','.join(f'[{_time(t)},{_dumps(s)}]' for t, s in entries) + ']'
        for chart, entries in trace.state_timeline.items())
    return (
        f'{{"id":{trace.id},"seed_stream":{trace.seed_stream},"jaywalker":{_dumps(trace.jaywalker)},'
        f'"events":[{events}],"states":{{{states}}},"decision_time":{_time(trace.decision_time)},'
        f'"code":{_dumps(str(trace.code))},"terminal":{_dumps(trace.terminal_vehicle_state)}}}'
    )


def write_traces(traces: Iterable[ScenarioTrace], sink: TextIO) -> int:
    count = 0
    for trace in traces:
        sink.write(format_trace(trace))
        sink.write('\n')
        count += 1
    return count


def _require(condition: bool, line: int, message: str) -> None:
    if not condition:
        raise SchemaError(line, message)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_payload(value, line: int) -> Dict[str, object]:
    """Payload object whose fields are all booleans or integers, else SchemaError."""
    _require(isinstance(value, dict), line, "payload must be an object")
    for key, item in value.items():
        _require(isinstance(item, (bool, int)), line, f"payload field '{key}' must be boolean or integer")
    return value


def _parse_trace(record, line: int) -> ScenarioTrace:
    _require(isinstance(record, dict), line, "expected a JSON object")
    for name in TRACE_FIELDS:
        _require(name in record, line, f"missing field '{name}'")
    _require(_is_int(record['id']), line, "'id' must be an integer")
    _require(_is_int(record['seed_stream']), line, "'seed_stream' must be an integer")
    _require(isinstance(record['jaywalker'], bool), line, "'jaywalker' must be a boolean")
    _require(isinstance(record['events'], list), line, "'events' must be a list")
    events = []
    for item in record['events']:
        _require(isinstance(item, dict) and {'t', 'origin', 'name', 'payload'} <= set(item),
                 line, "event needs t, origin, name and payload")
        _require(_is_number(item['t']), line, "event time must be a number")
        _require(isinstance(item['origin'], str) and isinstance(item['name'], str),
                 line, "event origin and name must be strings")
        events.append(TraceEvent(float(item['t']), item['origin'], item['name'], check_payload(item['payload'], line)))
    _require(isinstance(record['states'], dict), line, "'states' must be an object")
    timeline = {}
    for chart, entries in record['states'].items():
        _require(isinstance(entries, list), line, f"timeline of '{chart}' must be a list")
        parsed = []
        for entry in entries:
            _require(isinstance(entry, list) and len(entry) == 2 and _is_number(entry[0])
                     and isinstance(entry[1], str), line, f"bad timeline entry in '{chart}'")
            parsed.append((float(entry[0]), entry[1]))
        timeline[chart] = tuple(parsed)
    _require(_is_number(record['decision_time']), line, "'decision_time' must be a number")
    _require(isinstance(record['code'], str), line, "'code' must be a string")
    try:
        code = CombinationCode.parse(record['code'])
    except ValueError as exc:
        raise SchemaError(line, str(exc)) from exc
    _require(isinstance(record['terminal'], str), line, "'terminal' must be a string")
    return ScenarioTrace(
        id=record['id'],
        seed_stream=record['seed_stream'],
        jaywalker=record['jaywalker'],
        events=tuple(events),
        state_timeline=timeline,
        decision_time=float(record['decision_time']),
        code=code,
        terminal_vehicle_state=record['terminal'],
    )


def read_json_lines(source: TextIO) -> Iterable[Tuple[int, object]]:
    """Yield (line number, decoded object) for every non-blank line."""
    for number, text in enumerate(source, 1):
        if not text.strip():
            continue
        try:
            yield number, json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(number, f"invalid JSON: {exc.msg}") from exc


def read_traces(source: TextIO) -> List[ScenarioTrace]:
    return [_parse_trace(record, number) for number, record in read_json_lines(source)]
