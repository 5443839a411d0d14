"""State-chart unit tests and assignment of simulated scenarios to them."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, TextIO, Tuple

from chartcov.chartcore import Event, SystemModel, alphabet, dispatch, init
from chartcov.refmodels import (
    LIGHT,
    LIGHT_STATES,
    PHASE_ELAPSED,
    VEHICLE,
    CombinationCode,
    outcome_events,
)
from chartcov.simgen import SchemaError, ScenarioTrace, check_payload, read_json_lines

logger = logging.getLogger(__name__)

CODE_FIELDS = ('light', 'detected', 'located', 'tx')
FIELD_RANGES = {'light': frozenset(range(len(LIGHT_STATES))),
                'detected': frozenset((0, 1)), 'located': frozenset((0, 1)), 'tx': frozenset((0, 1))}
SPEC_FIELDS = ('name', 'description', 'when', 'expect', 'match')


class UnknownEventError(KeyError):
    """Raised when a test drives an event no transition of the model consumes."""


@dataclass(frozen=True)
class CodeMatch:
    """Per-field constraints on a combination code; None is a wildcard.

    `jaywalker` narrows the match to scenarios with (True) or without
    (False) a jaywalking VRU.
    """
    light: Optional[FrozenSet[int]] = None
    detected: Optional[FrozenSet[int]] = None
    located: Optional[FrozenSet[int]] = None
    tx: Optional[FrozenSet[int]] = None
    jaywalker: Optional[bool] = None

    def __post_init__(self):
        for name in CODE_FIELDS:
            allowed = getattr(self, name)
            if allowed is not None and not allowed <= FIELD_RANGES[name]:
                raise ValueError(f"match on {name} outside its range: {sorted(allowed)}")

    def accepts(self, code: CombinationCode) -> bool:
        for name in CODE_FIELDS:
            allowed = getattr(self, name)
            if allowed is not None and getattr(code, name) not in allowed:
                return False
        return True

    def accepts_trace(self, trace: ScenarioTrace) -> bool:
        if self.jaywalker is not None and trace.jaywalker != self.jaywalker:
            return False
        return self.accepts(trace.code)


def match(light=None, detected=None, located=None, tx=None, jaywalker=None) -> CodeMatch:
    """Build a CodeMatch from ints, iterables or None."""
    def constraint(value):
        if value is None:
            return None
        if isinstance(value, int):
            return frozenset((value,))
        return frozenset(value)
    return CodeMatch(constraint(light), constraint(detected), constraint(located), constraint(tx), jaywalker)


@dataclass(frozen=True)
class TestSpec:
    name: str
    description: str
    when: Tuple[Tuple[str, Dict[str, object]], ...]
    expect: Dict[str, str]
    match: CodeMatch = field(default_factory=CodeMatch)
    refines: Optional[str] = None

    __test__ = False

    def events(self) -> List[Event]:
        return [Event.from_mapping(name, payload) for name, payload in self.when]


@dataclass(frozen=True)
class TestResult:
    name: str
    passed: bool
    expected: Dict[str, str]
    actual: Dict[str, str]
    divergence: Optional[Tuple[Optional[int], str]] = None

    __test__ = False


@dataclass(frozen=True)
class Assignment:
    per_spec: Dict[str, Tuple[int, ...]]
    unassigned: Tuple[int, ...]
    multiple: Tuple[int, ...]


def check_spec(model: SystemModel, spec: TestSpec) -> None:
    known = alphabet(model)
    for name, _ in spec.when:
        if name not in known:
            raise UnknownEventError(f"test {spec.name}: event {name} is not consumed by the model")
    for chart, state in spec.expect.items():
        if chart not in model.chart_names:
            raise ValueError(f"test {spec.name}: unknown chart {chart}")
        if state not in model.chart(chart).states:
            raise ValueError(f"test {spec.name}: unknown state {chart}.{state}")


def run_test(model: SystemModel, spec: TestSpec) -> TestResult:
    check_spec(model, spec)
    configuration = init(model)
    last_change: Dict[str, Optional[int]] = {name: None for name in model.chart_names}
    for index, event in enumerate(spec.events()):
        before = configuration.as_dict()
        configuration, _ = dispatch(model, configuration, event)
        for name, state in configuration.active:
            if before[name] != state:
                last_change[name] = index

    actual = configuration.as_dict()
    mismatched = [chart for chart, state in spec.expect.items() if actual[chart] != state]
    divergence = None
    if mismatched:
        # the chart that went wrong earliest; never-moved charts count as earliest
        chart = min(mismatched, key=lambda c: -1 if last_change[c] is None else last_change[c])
        divergence = (last_change[chart], chart)
        logger.debug("Test %s failed in %s", spec.name, chart)
    return TestResult(spec.name, not mismatched, dict(spec.expect),
                      {chart: actual[chart] for chart in spec.expect}, divergence)


def run_suite(model: SystemModel, specs: Iterable[TestSpec]) -> List[TestResult]:
    results = [run_test(model, spec) for spec in specs]
    logger.info("%d of %d tests passed", sum(r.passed for r in results), len(results))
    return results


def _when(events: Iterable[Event]) -> Tuple[Tuple[str, Dict[str, object]], ...]:
    return tuple((event.name, event.as_dict()) for event in events)


def _light_to(state: str) -> List[Event]:
    """PHASE_ELAPSED events that take the light from Red to `state`."""
    path = ('Red', 'RedToYellow', 'Yellow', 'YellowToGreen', 'Green', 'GreenToYellow')
    steps = path.index(state)
    return [Event.of(PHASE_ELAPSED, rising=i < 4) for i in range(steps)]


def profile1_suite() -> List[TestSpec]:
    """Tests for every cause that leaves the vehicle in PossibleVRUPresent.

    T1 is the successfully transmitted but unlocated case; T2 to T4 are the
    failed transmissions for each localization outcome. T4.1 and T4.2 refine
    T4 by the light's transition window.
    """
    caution = {VEHICLE: 'PossibleVRUPresent'}
    t4_events = outcome_events(detected=True, located=True, txok=False)
    suite = [
        TestSpec('T1', 'VRU detected but not located, transmission ok',
                 _when(outcome_events(True, False, True)), caution,
                 match(detected=1, located=0, tx=1)),
        TestSpec('T2', 'no VRU detected, transmission failed',
                 _when(outcome_events(False, False, False)), caution,
                 match(detected=0, located=0, tx=0)),
        TestSpec('T3', 'VRU detected but not located, transmission failed',
                 _when(outcome_events(True, False, False)), caution,
                 match(detected=1, located=0, tx=0)),
        TestSpec('T4', 'VRU detected and located, transmission failed',
                 _when(t4_events), caution,
                 match(detected=1, located=1, tx=0)),
        TestSpec('T4.1', 'T4 while the light switches from green to red',
                 _when(_light_to('GreenToYellow') + t4_events),
                 {**caution, LIGHT: 'GreenToYellow'},
                 match(light=(LIGHT_STATES.index('GreenToYellow'), LIGHT_STATES.index('YellowToRed')),
                       detected=1, located=1, tx=0),
                 refines='T4'),
        TestSpec('T4.2', 'T4 while the light switches from red to green',
                 _when(_light_to('RedToYellow') + t4_events),
                 {**caution, LIGHT: 'RedToYellow'},
                 match(light=(LIGHT_STATES.index('RedToYellow'), LIGHT_STATES.index('YellowToGreen')),
                       detected=1, located=1, tx=0),
                 refines='T4'),
    ]
    return suite


def assign(traces: Iterable[ScenarioTrace], specs: Sequence[TestSpec]) -> Assignment:
    """Map every scenario to each spec whose match accepts its code and jaywalker flag."""
    per_spec: Dict[str, List[int]] = {spec.name: [] for spec in specs}
    unassigned, multiple = [], []
    for trace in sorted(traces, key=lambda t: t.id):
        matched = [spec for spec in specs if spec.match.accepts_trace(trace)]
        for spec in matched:
            per_spec[spec.name].append(trace.id)
        if not matched:
            unassigned.append(trace.id)
        elif sum(1 for spec in matched if spec.refines is None) > 1:
            multiple.append(trace.id)
    return Assignment({name: tuple(ids) for name, ids in per_spec.items()},
                      tuple(unassigned), tuple(multiple))


def test_coverage(assignment: Assignment, specs: Sequence[TestSpec], k: int) -> List[Tuple[str, int]]:
    """Specs with fewer than k scenarios as (name, count), count ascending."""
    if k < 1:
        raise ValueError("threshold k must be at least 1")
    counts = [(spec.name, len(assignment.per_spec.get(spec.name, ()))) for spec in specs]
    return sorted((item for item in counts if item[1] < k), key=lambda item: item[1])


test_coverage.__test__ = False


def _constraint_json(name: str, allowed: Optional[FrozenSet[int]]):
    if allowed is None:
        return '*'
    values = sorted(allowed)
    if name != 'light' and len(values) == 1:
        return values[0]
    return values


def spec_to_record(spec: TestSpec) -> dict:
    record = {
        'name': spec.name,
        'description': spec.description,
        'when': [{'name': name, 'payload': payload} for name, payload in spec.when],
        'expect': dict(spec.expect),
        'match': {name: _constraint_json(name, getattr(spec.match, name)) for name in CODE_FIELDS},
    }
    if spec.match.jaywalker is not None:
        record['match']['jaywalker'] = spec.match.jaywalker
    if spec.refines is not None:
        record['refines'] = spec.refines
    return record


def write_specs(specs: Iterable[TestSpec], sink: TextIO) -> int:
    count = 0
    for spec in specs:
        sink.write(json.dumps(spec_to_record(spec), separators=(',', ':'), ensure_ascii=False))
        sink.write('\n')
        count += 1
    return count


def _constraint(value, name: str, line: int) -> Optional[FrozenSet[int]]:
    if value == '*':
        return None
    if isinstance(value, int) and not isinstance(value, bool):
        return frozenset((value,))
    if isinstance(value, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        return frozenset(value)
    raise SchemaError(line, f"match field '{name}' must be '*', an integer or a list of integers")


def _parse_spec(record, line: int) -> TestSpec:
    if not isinstance(record, dict):
        raise SchemaError(line, "expected a JSON object")
    for name in SPEC_FIELDS:
        if name not in record:
            raise SchemaError(line, f"missing field '{name}'")
    when = []
    if not isinstance(record['when'], list):
        raise SchemaError(line, "'when' must be a list")
    for item in record['when']:
        if not (isinstance(item, dict) and isinstance(item.get('name'), str)
                and isinstance(item.get('payload', {}), dict)):
            raise SchemaError(line, "every 'when' entry needs a name and a payload object")
        when.append((item['name'], dict(check_payload(item.get('payload', {}), line))))
    expect = record['expect']
    if not (isinstance(expect, dict) and all(isinstance(v, str) for v in expect.values())):
        raise SchemaError(line, "'expect' must map chart names to state names")
    constraints = record['match']
    if not isinstance(constraints, dict):
        raise SchemaError(line, "'match' must be an object")
    try:
        jaywalker = constraints.get('jaywalker')
        if jaywalker is not None and not isinstance(jaywalker, bool):
            raise SchemaError(line, "match field 'jaywalker' must be a boolean")
        code_match = CodeMatch(**{name: _constraint(constraints.get(name, '*'), name, line)
                                  for name in CODE_FIELDS}, jaywalker=jaywalker)
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(line, str(exc)) from exc
    refines = record.get('refines')
    if refines is not None and not isinstance(refines, str):
        raise SchemaError(line, "'refines' must be a string")
    return TestSpec(str(record['name']), str(record['description']), tuple(when), dict(expect),
                    code_match, refines)


def read_specs(source: TextIO) -> List[TestSpec]:
    return [_parse_spec(record, number) for number, record in read_json_lines(source)]