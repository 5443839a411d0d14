"""Report layouts: coverage CSV/SVG and the text summaries printed by commands."""
import csv
from typing import Iterable, List, Mapping, TextIO

from lxml import etree

from chartcov.refmodels import LIGHT_STATES, CombinationCode

CSV_HEADER = ['code', 'light', 'detected', 'located', 'tx', 'count']

SVG_NS = 'http://www.w3.org/2000/svg'


def _tag(name: str) -> str:
    return f'{{{SVG_NS}}}{name}'


# Bar fill per light state; transitions are shaded between their end colors.
LIGHT_COLORS = {
    'Red': '#d62728',
    'Yellow': '#f2c500',
    'Green': '#2ca02c',
    'Off': '#7f7f7f',
    'RedToYellow': '#ff7f0e',
    'YellowToGreen': '#9acd32',
    'GreenToYellow': '#bcbd22',
    'YellowToRed': '#e8590c',
}


def write_coverage_csv(counts: Mapping[CombinationCode, int], sink: TextIO) -> None:
    """Header plus one row per code, code-lexicographic."""
    writer = csv.writer(sink, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for code in sorted(counts):
        writer.writerow([str(code), code.light, code.detected, code.located, code.tx, counts[code]])


def coverage_svg(counts: Mapping[CombinationCode, int], width: int, height: int) -> str:
    """Bar chart with one bar per observed code, colored by light state."""
    left, right, top, bottom = 60, 20, 40, 90
    plot_w = max(1, width - left - right)
    plot_h = max(1, height - top - bottom)
    bars = [(code, n) for code, n in sorted(counts.items()) if n > 0]
    peak = max((n for _, n in bars), default=0)

    svg = etree.Element(_tag('svg'), nsmap={None: SVG_NS},
                        width=str(width), height=str(height), viewBox=f"0 0 {width} {height}")
    title = etree.SubElement(svg, _tag('text'), x=str(width // 2), y='24', attrib={'text-anchor': 'middle'})
    title.text = 'Coverage of possible state combinations'
    etree.SubElement(svg, _tag('line'), x1=str(left), y1=str(top + plot_h), x2=str(left + plot_w),
                     y2=str(top + plot_h), stroke='black')
    etree.SubElement(svg, _tag('line'), x1=str(left), y1=str(top), x2=str(left),
                     y2=str(top + plot_h), stroke='black')
    axis = etree.SubElement(svg, _tag('text'), x=str(left - 6), y=str(top + 4), attrib={'text-anchor': 'end'})
    axis.text = str(peak)

    slot = plot_w / max(1, len(bars))
    for index, (code, n) in enumerate(bars):
        bar_h = plot_h * n / peak
        x = left + index * slot + slot * 0.1
        rect = etree.SubElement(svg, _tag('rect'), x=f"{x:.2f}", y=f"{top + plot_h - bar_h:.2f}",
                                width=f"{slot * 0.8:.2f}", height=f"{bar_h:.2f}",
                                fill=LIGHT_COLORS[code.light_state])
        tip = etree.SubElement(rect, _tag('title'))
        tip.text = f"{code} ({code.light_state}): {n}"
        cx = left + index * slot + slot / 2
        cy = top + plot_h + 8
        label = etree.SubElement(svg, _tag('text'), x=f"{cx:.2f}", y=f"{cy:.2f}",
                                 transform=f"rotate(90 {cx:.2f} {cy:.2f})",
                                 attrib={'font-size': '10'})
        label.text = str(code)
    return etree.tostring(svg, pretty_print=True, encoding='unicode')


def coverage_summary(total: int, covered: int, feasible: int, under: Iterable[CombinationCode],
                     counts: Mapping[CombinationCode, int]) -> List[str]:
    lines = [f"total={total}", f"covered={covered}/{feasible}"]
    lines.extend(f"under={code} count={counts.get(code, 0)} light={LIGHT_STATES[code.light]}"
                 for code in under)
    return lines


def ccp_summary(estimate, caveat: str = None) -> List[str]:
    lines = [
        f"types={estimate.n_types}",
        f"trials={estimate.trials}",
        f"mean_draws={estimate.mean_draws:.4f}",
        f"sd_draws={estimate.sd_draws:.4f}",
    ]
    if estimate.analytic_mean is not None:
        lines.append(f"analytic_mean={estimate.analytic_mean:.4f}")
    lines.extend(f"completion_prob[{n}]={p:.4f}" for n, p in estimate.curve)
    if caveat:
        lines.append(f"caveat={caveat}")
    return lines


def result_line(result) -> str:
    if result.passed:
        return f"PASS {result.name}"
    expected = ', '.join(f"{chart} expected {state} got {result.actual.get(chart)}"
                         for chart, state in result.expected.items()
                         if result.actual.get(chart) != state)
    where = ''
    if result.divergence is not None:
        index, chart = result.divergence
        where = f" (diverged in {chart} at event {index})" if index is not None else f" ({chart} never left its initial state)"
    return f"FAIL {result.name}: {expected}{where}"


def assignment_summary(assignment, under: Iterable = ()) -> List[str]:
    lines = [f"{name}={len(ids)}" for name, ids in assignment.per_spec.items()]
    lines.append(f"unassigned={len(assignment.unassigned)}")
    lines.append(f"multiple={len(assignment.multiple)}")
    lines.extend(f"under={name} count={count}" for name, count in under)
    return lines