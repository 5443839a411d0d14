import io

import pytest

from chartcov.chartcore import Event
from chartcov.refmodels import (
    TERMINAL_VEHICLE_STATES,
    VEHICLE,
    CombinationCode,
    outcome_events,
    reduced_space,
    terminal_for_code,
)
from chartcov.simgen import SchemaError, ScenarioTrace
from chartcov.testkit import (
    Assignment,
    TestSpec,
    UnknownEventError,
    assign,
    match,
    profile1_suite,
    read_specs,
    run_suite,
    run_test,
    spec_to_record,
    test_coverage,
    write_specs,
)

BASE = ('T1', 'T2', 'T3', 'T4')


def _spec(events, expect, name='t'):
    return TestSpec(name, '', tuple((e.name, e.as_dict()) for e in events), expect)


def _trace(index: int, code: CombinationCode, terminal: str, jaywalker: bool = False) -> ScenarioTrace:
    return ScenarioTrace(index, 0, jaywalker, (), {}, 5.0, code, terminal)


class TestRunTest:
    def test_detected_not_located(self, model):
        spec = _spec([Event.of('DETECT'), Event.of('ZONE_ENTER', txok=True)], {'vehicle': 'PossibleVRUPresent'})
        assert run_test(model, spec).passed

    def test_no_vru(self, model):
        assert run_test(model, _spec([Event.of('ZONE_ENTER', txok=True)], {'vehicle': 'FreeTurn'})).passed

    def test_failed_transmission_is_not_stop(self, model):
        events = [Event.of('DETECT'), Event.of('LOCATE'), Event.of('ZONE_ENTER', txok=False), Event.of('TIMEOUT')]
        result = run_test(model, _spec(events, {'vehicle': 'Stop'}))
        assert not result.passed
        assert result.actual == {'vehicle': 'PossibleVRUPresent'}
        assert result.divergence == (3, 'vehicle')

    def test_never_moved_chart(self, model):
        result = run_test(model, _spec([Event.of('DETECT')], {'vehicle': 'Stop'}))
        assert result.divergence == (None, 'vehicle')

    def test_unknown_event(self, model):
        with pytest.raises(UnknownEventError):
            run_test(model, _spec([Event.of('TELEPORT')], {'vehicle': 'Stop'}))

    def test_unknown_state(self, model):
        with pytest.raises(ValueError):
            run_test(model, _spec([Event.of('DETECT')], {'vehicle': 'Flying'}))

    def test_profile1_suite_passes(self, model):
        results = run_suite(model, profile1_suite())
        assert [r.name for r in results] == ['T1', 'T2', 'T3', 'T4', 'T4.1', 'T4.2']
        assert all(r.passed for r in results)


class TestProfile1Matches:
    def test_partition_of_feasible_codes(self, model):
        suite = {spec.name: spec for spec in profile1_suite()}
        _, feasible = reduced_space()
        for code in feasible:
            hits = [name for name in BASE if suite[name].match.accepts(code)]
            if terminal_for_code(code, model) == 'PossibleVRUPresent':
                assert len(hits) == 1, code
            else:
                assert hits == [], code

    def test_refinements_are_disjoint_subsets(self):
        suite = {spec.name: spec for spec in profile1_suite()}
        _, feasible = reduced_space()
        t41 = {code for code in feasible if suite['T4.1'].match.accepts(code)}
        t42 = {code for code in feasible if suite['T4.2'].match.accepts(code)}
        t4 = {code for code in feasible if suite['T4'].match.accepts(code)}
        assert t41 and t42
        assert t41 | t42 <= t4
        assert not t41 & t42
        assert {code.light_state for code in t41} == {'GreenToYellow', 'YellowToRed'}
        assert {code.light_state for code in t42} == {'RedToYellow', 'YellowToGreen'}


class TestAssign:
    def test_single_code(self):
        assignment = assign([_trace(0, CombinationCode(0, 1, 0, 1), 'PossibleVRUPresent')], profile1_suite())
        assert {name for name, ids in assignment.per_spec.items() if ids} == {'T1'}

    def test_free_turn_is_unassigned(self):
        assignment = assign([_trace(7, CombinationCode(2, 0, 0, 1), 'FreeTurn')], profile1_suite())
        assert assignment.unassigned == (7,)
        assert assignment.multiple == ()

    def test_empty(self):
        assignment = assign([], profile1_suite())
        assert all(ids == () for ids in assignment.per_spec.values())
        assert assignment.unassigned == () and assignment.multiple == ()

    def test_refinement_is_not_a_multiple(self):
        code = CombinationCode(6, 1, 1, 0)
        assignment = assign([_trace(0, code, 'PossibleVRUPresent')], profile1_suite())
        assert assignment.per_spec['T4'] == (0,)
        assert assignment.per_spec['T4.1'] == (0,)
        assert assignment.multiple == ()

    def test_overlapping_specs_are_multiple(self):
        specs = [TestSpec('a', '', (), {}, match(tx=1)), TestSpec('b', '', (), {}, match(light=0))]
        assignment = assign([_trace(0, CombinationCode(0, 0, 0, 1), 'FreeTurn')], specs)
        assert assignment.multiple == (0,)

    def test_jaywalker_refinement(self):
        code = CombinationCode(0, 1, 1, 0)
        specs = profile1_suite() + [TestSpec('T4.J', 'T4 with a jaywalking VRU', (), {},
                                             match(detected=1, located=1, tx=0, jaywalker=True), refines='T4')]
        traces = [_trace(0, code, 'PossibleVRUPresent'), _trace(1, code, 'PossibleVRUPresent', jaywalker=True)]
        assignment = assign(traces, specs)
        assert assignment.per_spec['T4'] == (0, 1)
        assert assignment.per_spec['T4.J'] == (1,)
        assert assignment.multiple == ()

    def test_assigned_traces_reach_the_expected_state(self, model, default_batch):
        suite = {spec.name: spec for spec in profile1_suite()}
        assignment = assign(default_batch[:500], list(suite.values()))
        by_id = {trace.id: trace for trace in default_batch[:500]}
        for name in ('T1', 'T2', 'T3', 'T4'):
            expected = {VEHICLE: suite[name].expect[VEHICLE]}
            for scenario in assignment.per_spec[name]:
                trace = by_id[scenario]
                code = trace.code
                outcome = outcome_events(bool(code.detected), bool(code.located), bool(code.tx))
                assert run_test(model, _spec(outcome, expected)).passed, (name, scenario)
                recorded = TestSpec(name, '', tuple((e.name, e.as_dict()) for e in trace.env_events()), expected)
                assert run_test(model, recorded).passed, (name, scenario)

    def test_default_batch_partition(self, default_batch):
        suite = profile1_suite()
        assignment = assign(default_batch, suite)
        caution = {t.id for t in default_batch if t.terminal_vehicle_state == 'PossibleVRUPresent'}
        base_ids = [set(assignment.per_spec[name]) for name in BASE]
        assert set().union(*base_ids) == caution
        assert sum(len(ids) for ids in base_ids) == len(caution)
        assert set(assignment.unassigned) == {t.id for t in default_batch} - caution
        assert assignment.multiple == ()
        t41, t42 = set(assignment.per_spec['T4.1']), set(assignment.per_spec['T4.2'])
        assert t41 | t42 <= set(assignment.per_spec['T4'])
        assert not t41 & t42
        assert {t.terminal_vehicle_state for t in default_batch} <= set(TERMINAL_VEHICLE_STATES)


class TestCoverage:
    def test_rarest_first(self, default_batch):
        suite = profile1_suite()
        ranked = test_coverage(assign(default_batch, suite), suite, 10 ** 6)
        names = [name for name, _ in ranked]
        assert set(names[:2]) == {'T4.1', 'T4.2'}
        assert names[2:] == ['T3', 'T4', 'T2', 'T1']
        counts = [count for _, count in ranked]
        assert counts == sorted(counts)

    def test_all_covered(self):
        suite = profile1_suite()
        assignment = Assignment({spec.name: (1, 2) for spec in suite}, (), ())
        assert test_coverage(assignment, suite, 2) == []

    def test_empty_assignment(self):
        suite = profile1_suite()
        ranked = test_coverage(assign([], suite), suite, 1)
        assert sorted(name for name, _ in ranked) == sorted(spec.name for spec in suite)


class TestSpecFiles:
    def test_round_trip(self):
        suite = profile1_suite()
        sink = io.StringIO()
        assert write_specs(suite, sink) == 6
        assert read_specs(io.StringIO(sink.getvalue())) == suite

    def test_record_layout(self):
        record = spec_to_record(profile1_suite()[4])
        assert record['match'] == {'light': [6, 7], 'detected': 1, 'located': 1, 'tx': 0}
        assert record['refines'] == 'T4'
        assert 'refines' not in spec_to_record(profile1_suite()[0])
        assert spec_to_record(profile1_suite()[0])['match']['light'] == '*'

    def test_schema_error(self):
        source = io.StringIO('{"name": "x", "description": "", "when": [], "expect": {}}\n')
        with pytest.raises(SchemaError) as excinfo:
            read_specs(source)
        assert excinfo.value.line == 1

    def test_match_out_of_range(self):
        line = '{"name":"x","description":"","when":[],"expect":{},"match":{"light":[9]}}\n'
        with pytest.raises(SchemaError):
            read_specs(io.StringIO(line))

    def test_payload_must_be_boolean_or_integer(self):
        line = ('{"name":"x","description":"","when":[{"name":"E","payload":{"n":"two"}}],'
                '"expect":{},"match":{}}\n')
        with pytest.raises(SchemaError) as excinfo:
            read_specs(io.StringIO(line))
        assert "payload field 'n'" in str(excinfo.value)

    def test_jaywalker_match_round_trip(self):
        spec = TestSpec('J', 'jaywalkers only', (), {VEHICLE: 'Stop'}, match(tx=1, jaywalker=True))
        record = spec_to_record(spec)
        assert record['match']['jaywalker'] is True
        assert 'jaywalker' not in spec_to_record(profile1_suite()[0])['match']
        sink = io.StringIO()
        write_specs([spec], sink)
        assert read_specs(io.StringIO(sink.getvalue())) == [spec]

    def test_jaywalker_match_must_be_boolean(self):
        line = '{"name":"x","description":"","when":[],"expect":{},"match":{"jaywalker":1}}\n'
        with pytest.raises(SchemaError):
            read_specs(io.StringIO(line))
