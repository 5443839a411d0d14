"""Built-in intersection model and the combination-code projection.

Four subsystem charts: the traffic light, RSU localization, RSU
communication and the ego vehicle. A scenario's outcome is summarized as a
:class:`CombinationCode` ``light-detected-located-tx``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, List, Tuple

from chartcov.chartcore import (
    Configuration,
    Event,
    EventTemplate,
    FieldRef,
    Guard,
    InStateAtom,
    PayloadAtom,
    StateChart,
    SystemModel,
    Transition,
    dispatch,
    init,
)

LIGHT = 'light'
RSU_LOC = 'rsu_loc'
RSU_COMM = 'rsu_comm'
VEHICLE = 'vehicle'

# Position in this tuple is the light field of a combination code.
LIGHT_STATES = ('Red', 'Yellow', 'Green', 'Off',
                'RedToYellow', 'YellowToGreen', 'GreenToYellow', 'YellowToRed')
NOMINAL_LIGHT_STATES = tuple(s for s in LIGHT_STATES if s != 'Off')
LOC_STATES = ('Undetected', 'Detected', 'Located')
COMM_STATES = ('Idle', 'SentNone_OK', 'SentNone_Fail', 'SentDetected_OK',
               'SentDetected_Fail', 'SentLocated_OK', 'SentLocated_Fail')
VEHICLE_STATES = ('Approaching', 'AwaitingResponse', 'FreeTurn', 'Stop', 'PossibleVRUPresent')
TERMINAL_VEHICLE_STATES = ('FreeTurn', 'Stop', 'PossibleVRUPresent')

PHASE_ELAPSED = 'PHASE_ELAPSED'
FAILURE = 'FAILURE'
RECOVER = 'RECOVER'
DETECT = 'DETECT'
LOCATE = 'LOCATE'
ZONE_ENTER = 'ZONE_ENTER'
TIMEOUT = 'TIMEOUT'
REQUEST = 'REQUEST'
RESPONSE = 'RESPONSE'

ENV_EVENTS = frozenset({PHASE_ELAPSED, FAILURE, RECOVER, DETECT, LOCATE, ZONE_ENTER, TIMEOUT})

REDUCED_SPACE = len(LIGHT_STATES) * 2 * 2 * 2


class NoDecisionError(ValueError):
    """Raised when projecting a configuration in which the RSU never answered."""


@dataclass(frozen=True, order=True)
class CombinationCode:
    light: int
    detected: int
    located: int
    tx: int

    def __post_init__(self):
        if not 0 <= self.light < len(LIGHT_STATES):
            raise ValueError(f"light code out of range: {self.light}")
        for name in ('detected', 'located', 'tx'):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")

    def __str__(self) -> str:
        return f"{self.light}-{self.detected}-{self.located}-{self.tx}"

    @classmethod
    def parse(cls, text: str) -> 'CombinationCode':
        parts = text.split('-')
        if len(parts) != 4 or not all(p.isdigit() for p in parts):
            raise ValueError(f"malformed combination code: {text!r}")
        return cls(*(int(p) for p in parts))

    @property
    def feasible(self) -> bool:
        return self.detected == 1 or self.located == 0

    @property
    def light_state(self) -> str:
        return LIGHT_STATES[self.light]


def _phase(source: str, target: str, guard: Guard = None) -> Transition:
    return Transition(source, PHASE_ELAPSED, target, guard)


def _rising(value: bool) -> Guard:
    return Guard((PayloadAtom('rising', '==', value),))


def light_chart() -> StateChart:
    nominal = {
        'Red': [_phase('Red', 'RedToYellow')],
        'Yellow': [_phase('Yellow', 'YellowToGreen', _rising(True)),
                   _phase('Yellow', 'YellowToRed', _rising(False))],
        'Green': [_phase('Green', 'GreenToYellow')],
        'RedToYellow': [_phase('RedToYellow', 'Yellow')],
        'YellowToGreen': [_phase('YellowToGreen', 'Green')],
        'GreenToYellow': [_phase('GreenToYellow', 'Yellow')],
        'YellowToRed': [_phase('YellowToRed', 'Red')],
    }
    transitions = []
    for state in LIGHT_STATES:
        if state == 'Off':
            transitions.append(Transition('Off', RECOVER, 'Red'))
            continue
        transitions.extend(nominal[state])
        transitions.append(Transition(state, FAILURE, 'Off'))
    return StateChart(LIGHT, LIGHT_STATES, 'Red', tuple(transitions))


def rsu_loc_chart() -> StateChart:
    return StateChart(RSU_LOC, LOC_STATES, 'Undetected', (
        Transition('Undetected', DETECT, 'Detected'),
        Transition('Detected', LOCATE, 'Located'),
    ))


def rsu_comm_chart() -> StateChart:
    transitions = []
    outcomes = (('Undetected', 'None', False, False),
                ('Detected', 'Detected', True, False),
                ('Located', 'Located', True, True))
    for loc_state, label, detected, located in outcomes:
        for txok in (True, False):
            guard = Guard((InStateAtom(RSU_LOC, loc_state), PayloadAtom('txok', '==', txok)))
            emits = ()
            if txok:
                emits = (EventTemplate(RESPONSE, (('detected', detected), ('located', located))),)
            suffix = 'OK' if txok else 'Fail'
            transitions.append(Transition('Idle', REQUEST, f"Sent{label}_{suffix}", guard, emits))
    return StateChart(RSU_COMM, COMM_STATES, 'Idle', tuple(transitions))


def vehicle_chart() -> StateChart:
    request = EventTemplate(REQUEST, (('txok', FieldRef('txok')),))
    return StateChart(VEHICLE, VEHICLE_STATES, 'Approaching', (
        Transition('Approaching', ZONE_ENTER, 'AwaitingResponse', emits=(request,)),
        Transition('AwaitingResponse', RESPONSE, 'FreeTurn',
                   Guard((PayloadAtom('detected', '==', False),))),
        Transition('AwaitingResponse', RESPONSE, 'Stop',
                   Guard((PayloadAtom('located', '==', True),))),
        Transition('AwaitingResponse', RESPONSE, 'PossibleVRUPresent',
                   Guard((PayloadAtom('detected', '==', True), PayloadAtom('located', '==', False)))),
        Transition('AwaitingResponse', TIMEOUT, 'PossibleVRUPresent'),
    ))


def builtin_model() -> SystemModel:
    return SystemModel((light_chart(), rsu_loc_chart(), rsu_comm_chart(), vehicle_chart()))


def env_alphabet() -> List[Event]:
    """One representative of every environment event and payload variant."""
    return [
        Event.of(PHASE_ELAPSED, rising=True),
        Event.of(PHASE_ELAPSED, rising=False),
        Event.of(FAILURE),
        Event.of(RECOVER),
        Event.of(DETECT),
        Event.of(LOCATE),
        Event.of(ZONE_ENTER, txok=True),
        Event.of(ZONE_ENTER, txok=False),
        Event.of(TIMEOUT),
    ]


def outcome_events(detected: bool, located: bool, txok: bool) -> List[Event]:
    """Environment events that lead the RSU and vehicle to one decision outcome."""
    events = []
    if detected:
        events.append(Event.of(DETECT))
        if located:
            events.append(Event.of(LOCATE))
    events.append(Event.of(ZONE_ENTER, txok=txok))
    if not txok:
        events.append(Event.of(TIMEOUT))
    return events


def project_code(configuration: Configuration, light_state: str) -> CombinationCode:
    comm = configuration.state_of(RSU_COMM)
    if comm == 'Idle':
        raise NoDecisionError("rsu_comm is still Idle; no decision has occurred")
    loc = configuration.state_of(RSU_LOC)
    return CombinationCode(
        light=LIGHT_STATES.index(light_state),
        detected=int(loc in ('Detected', 'Located')),
        located=int(loc == 'Located'),
        tx=int(comm.endswith('_OK')),
    )


def all_codes() -> List[CombinationCode]:
    return [CombinationCode(*values) for values in
            itertools.product(range(len(LIGHT_STATES)), (0, 1), (0, 1), (0, 1))]


def reduced_space() -> Tuple[int, FrozenSet[CombinationCode]]:
    codes = all_codes()
    return len(codes), frozenset(code for code in codes if code.feasible)


def terminal_for_code(code: CombinationCode, model: SystemModel = None) -> str:
    """Vehicle state reached by the outcome a feasible code describes."""
    if not code.feasible:
        raise ValueError(f"infeasible code {code}")
    model = model or builtin_model()
    configuration = init(model)
    for event in outcome_events(bool(code.detected), bool(code.located), bool(code.tx)):
        configuration, _ = dispatch(model, configuration, event)
    return configuration.state_of(VEHICLE)
