import io
import math

import pytest
from lxml import etree

from chartcov.coverage import (
    CoverageError,
    NeverCompletes,
    ccp_from_report,
    ccp_mc,
    completion_draws,
    emit_report,
    histogram,
    report_from_counts,
    uniform_expectation,
    verdict,
    weighted_expectation,
)
from chartcov.refmodels import CombinationCode, reduced_space
from chartcov.render import SVG_NS
from chartcov.simgen import ScenarioTrace


def _trace(index: int, code: str) -> ScenarioTrace:
    return ScenarioTrace(index, 0, False, (), {}, 5.0, CombinationCode.parse(code), 'FreeTurn')


THREE = [_trace(0, '0-1-0-1'), _trace(1, '0-1-0-1'), _trace(2, '2-0-0-1')]


class TestHistogram:
    def test_empty(self):
        report = histogram([])
        assert report.total == 0
        assert len(report.counts) == 64
        assert set(report.counts.values()) == {0}

    def test_counts(self):
        report = histogram(THREE)
        assert report.total == 3
        nonzero = {str(code): n for code, n in report.counts.items() if n}
        assert nonzero == {'0-1-0-1': 2, '2-0-0-1': 1}
        assert report.covered == 2

    def test_infeasible_code_is_rejected(self):
        with pytest.raises(CoverageError):
            histogram([_trace(0, '3-0-1-0')])

    def test_from_counts_matches(self):
        assert report_from_counts({'0-1-0-1': 2, '2-0-0-1': 1}) == histogram(THREE)


class TestVerdict:
    def test_empty_report_lists_every_feasible_code(self):
        _, feasible = reduced_space()
        under = verdict(histogram([]), 1)
        assert set(under) == feasible
        assert under == sorted(under)

    def test_fully_covered(self):
        _, feasible = reduced_space()
        report = histogram(_trace(i, str(code)) for i, code in enumerate(sorted(feasible)))
        assert verdict(report, 1) == []

    def test_rarest_first(self):
        report = histogram(THREE)
        under = verdict(report, 3)
        assert under[-2:] == [CombinationCode(2, 0, 0, 1), CombinationCode(0, 1, 0, 1)]

    def test_default_batch_gaps(self, default_batch):
        report = histogram(default_batch)
        under = verdict(report, 1)
        off = [code for code in under if code.light_state == 'Off']
        assert len(off) == 6
        assert all(code.feasible for code in under)
        assert all(report.counts[code] == 0 for code in report.counts if not code.feasible)

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            verdict(histogram([]), 0)

    def test_yellow_phase_fail_codes(self, default_batch):
        report = histogram(default_batch)
        _, feasible = reduced_space()
        yellow_fail = [code for code in feasible if code.light_state == 'Yellow' and code.tx == 0]
        assert len(yellow_fail) == 3
        unseen = {code for code in yellow_fail if report.counts[code] == 0}
        assert unseen <= set(verdict(report, 1))
        k = max(report.counts[code] for code in yellow_fail) + 1
        under = verdict(report, k)
        assert set(yellow_fail) <= set(under)
        ranks = [under.index(code) for code in sorted(yellow_fail, key=lambda c: (report.counts[c], c))]
        assert ranks == sorted(ranks)
        for code in yellow_fail:
            red = CombinationCode(0, code.detected, code.located, code.tx)
            assert report.counts[code] < report.counts[red]


class TestEmit:
    def test_csv_empty(self):
        sink = io.StringIO()
        emit_report(histogram([]), 'csv', sink)
        lines = sink.getvalue().splitlines()
        assert lines[0] == 'code,light,detected,located,tx,count'
        assert len(lines) == 65
        assert all(line.endswith(',0') for line in lines[1:])

    def test_csv_counts(self):
        sink = io.StringIO()
        emit_report(histogram(THREE), 'csv', sink)
        rows = sink.getvalue().splitlines()
        assert '0-1-0-1,0,1,0,1,2' in rows
        assert '2-0-0-1,2,0,0,1,1' in rows

    def test_svg_well_formed(self):
        sink = io.StringIO()
        emit_report(histogram(THREE), 'svg', sink, width=640, height=320)
        root = etree.fromstring(sink.getvalue().encode())
        assert root.tag == f'{{{SVG_NS}}}svg'
        assert root.get('width') == '640'
        assert len(root.findall(f'{{{SVG_NS}}}rect')) == 2

    def test_svg_empty_report(self):
        sink = io.StringIO()
        emit_report(histogram([]), 'svg', sink)
        root = etree.fromstring(sink.getvalue().encode())
        assert root.findall(f'{{{SVG_NS}}}rect') == []

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit_report(histogram([]), 'pdf', io.StringIO())


class TestCcp:
    def test_uniform_64(self):
        estimate = ccp_mc([1 / 64] * 64, 10_000, seed=1)
        expected = uniform_expectation(64)
        assert expected == pytest.approx(303.6, abs=0.1)
        assert estimate.analytic_mean == pytest.approx(expected)
        assert estimate.mean_draws == pytest.approx(expected, rel=0.02)

    def test_single_type(self):
        estimate = ccp_mc([1.0], 100, seed=2)
        assert estimate.mean_draws == 1
        assert estimate.sd_draws == 0
        assert estimate.completion_prob(1) == 1.0

    def test_two_weighted_types(self):
        estimate = ccp_mc([0.9, 0.1], 10_000, seed=3)
        expected = weighted_expectation([0.9, 0.1])
        assert expected == pytest.approx(1 / 0.9 + 1 / 0.1 - 1.0)
        assert expected == pytest.approx(10.5556, abs=1e-4)
        assert abs(estimate.mean_draws - expected) <= 3 * estimate.sd_draws / math.sqrt(estimate.trials)

    def test_remainder_is_a_blank_draw(self):
        # one type drawn with probability 0.5, otherwise nothing
        estimate = ccp_mc([0.5], 10_000, seed=4)
        assert estimate.analytic_mean == pytest.approx(2.0)
        assert estimate.mean_draws == pytest.approx(2.0, rel=0.05)

    def test_deterministic(self):
        assert ccp_mc([0.2, 0.3, 0.5], 500, seed=5) == ccp_mc([0.2, 0.3, 0.5], 500, seed=5)

    def test_uniform_mean_grows_with_types(self):
        means = []
        for n in range(1, 11):
            estimate = ccp_mc([1 / n] * n, 4000, seed=100 + n)
            tolerance = 4 * estimate.sd_draws / math.sqrt(estimate.trials) + 1e-9
            assert abs(estimate.mean_draws - uniform_expectation(n)) <= tolerance
            means.append(estimate.mean_draws)
        assert means == sorted(means)
        assert means[0] == 1

    def test_curve_is_monotone(self):
        estimate = ccp_mc([1 / 8] * 8, 1000, seed=6)
        probabilities = [p for _, p in estimate.curve]
        assert probabilities == sorted(probabilities)
        assert estimate.curve[0] == (1, 0.0)
        assert probabilities[-1] == 1.0

    def test_zero_weight_never_completes(self):
        with pytest.raises(NeverCompletes):
            ccp_mc([0.5, 0.0], 10, seed=7)

    def test_draw_limit(self):
        with pytest.raises(NeverCompletes):
            ccp_mc([1e-6, 1e-6], 1, seed=8, max_draws=1000)

    @pytest.mark.parametrize('weights', [[0.7, 0.7], [-0.1, 0.5], [], [float('nan')]])
    def test_bad_weights(self, weights):
        with pytest.raises(ValueError):
            ccp_mc(weights, 10, seed=9)

    def test_completion_draws(self):
        estimate = ccp_mc([0.5, 0.5], 1000, seed=10)
        draws = completion_draws(estimate, 0.95)
        assert estimate.completion_prob(draws) >= 0.95
        assert estimate.completion_prob(draws - 1) < 0.95

    def test_from_report_names_unseen_mass(self):
        estimate, caveat = ccp_from_report(histogram(THREE), 2000, seed=11)
        assert estimate.n_types == 2
        assert estimate.weights == pytest.approx((2 / 3, 1 / 3))
        assert '46 feasible codes were never observed' in caveat

    def test_from_empty_report(self):
        with pytest.raises(NeverCompletes):
            ccp_from_report(histogram([]), 10, seed=12)
