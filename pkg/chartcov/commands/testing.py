"""Test commands: run, assign, gen-profile1."""
import logging

from chartcov import render
from chartcov.commands import emit, load_traces, output
from chartcov.scdsl import load_model
from chartcov.testkit import (
    assign,
    check_spec,
    profile1_suite,
    read_specs,
    run_suite,
    test_coverage,
    write_specs,
)

logger = logging.getLogger(__name__)


def _load_specs(path: str):
    with open(path, encoding='utf-8') as source:
        return read_specs(source)


def run_command(args) -> int:
    model = load_model(args.model)
    results = run_suite(model, _load_specs(args.tests))
    emit(render.result_line(result) for result in results)
    return 0 if all(result.passed for result in results) else 1


def assign_command(args) -> int:
    specs = _load_specs(args.tests)
    assignment = assign(load_traces(args.traces), specs)
    under = test_coverage(assignment, specs, args.k)
    emit(render.assignment_summary(assignment, under))
    return 0


def gen_profile1_command(args) -> int:
    model = load_model(args.model)
    suite = profile1_suite()
    for spec in suite:
        check_spec(model, spec)
    with output(args.out) as sink:
        written = write_specs(suite, sink)
    logger.info("Wrote %d tests to %s", written, args.out)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('test', help='state-chart unit tests')
    commands = parser.add_subparsers(dest='test_command', required=True)

    run = commands.add_parser('run', help='run tests against a model')
    run.add_argument('model')
    run.add_argument('tests')
    run.set_defaults(func=run_command)

    assign_parser = commands.add_parser('assign', help='assign traces to tests')
    assign_parser.add_argument('tests')
    assign_parser.add_argument('traces')
    assign_parser.add_argument('--k', type=int, default=1, help='minimum scenarios per test')
    assign_parser.set_defaults(func=assign_command)

    gen = commands.add_parser('gen-profile1', help='tests for every cause of driving profile 1')
    gen.add_argument('model')
    gen.add_argument('--out', required=True)
    gen.set_defaults(func=gen_profile1_command)
