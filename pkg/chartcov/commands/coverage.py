"""Coverage report command."""
import logging

from chartcov import render
from chartcov.commands import emit, load_traces, output
from chartcov.coverage import emit_report, histogram, verdict
from chartcov.refmodels import reduced_space

logger = logging.getLogger(__name__)


def write_reports(report, args) -> None:
    if args.csv:
        with output(args.csv) as sink:
            emit_report(report, 'csv', sink)
    if getattr(args, 'svg', None):
        with output(args.svg) as sink:
            emit_report(report, 'svg', sink, args.width, args.height)


def report_lines(report, k: int):
    under = verdict(report, k)
    _, feasible = reduced_space()
    return under, render.coverage_summary(report.total, report.covered, len(feasible), under, report.counts)


def coverage_command(args) -> int:
    report = histogram(load_traces(args.traces), args.k)
    write_reports(report, args)
    under, lines = report_lines(report, args.k)
    emit(lines)
    if under and args.fail_on_gap:
        logger.warning("%d feasible codes observed fewer than %d times", len(under), args.k)
        return 1
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('coverage', help='combination-code coverage of a trace file')
    parser.add_argument('traces')
    parser.add_argument('--csv', help='write the histogram as CSV')
    parser.add_argument('--svg', help='write the histogram as SVG')
    parser.add_argument('--k', type=int, default=1, help='minimum observations per code')
    parser.add_argument('--fail-on-gap', action='store_true', help='exit 1 when a feasible code is under k')
    parser.add_argument('--width', type=int)
    parser.add_argument('--height', type=int)
    parser.set_defaults(func=coverage_command)
