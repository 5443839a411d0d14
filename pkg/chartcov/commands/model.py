"""Model commands: validate and enumerate."""
import logging
import sys
from pathlib import Path

from chartcov.chartcore import enumerate_space
from chartcov.commands import emit
from chartcov.refmodels import reduced_space
from chartcov.scdsl import load_model, parse_model
from chartcov.simgen import check_compatible

logger = logging.getLogger(__name__)


def validate_command(args) -> int:
    """Print diagnostics to stderr; 2 when any of them is an error."""
    path = Path(args.model)
    result = parse_model(path.read_bytes())
    for diagnostic in result.diagnostics:
        print(diagnostic.render(str(path)), file=sys.stderr)
    if not result.ok:
        return 2
    logger.info("%s: %d charts, %d warning(s)", path, len(result.model.charts), len(result.diagnostics))
    return 0


def enumerate_command(args) -> int:
    model = load_model(args.model)
    if args.reduced:
        check_compatible(model)
        total, feasible = reduced_space()
        emit([f"reduced={total} feasible={len(feasible)}"])
        return 0

    total, combinations = enumerate_space(model)
    emit([f"total={total}"])
    emit(f"chart={chart.name} states={len(chart.states)}" for chart in model.charts)
    if args.list:
        emit(','.join(states) for states in combinations)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('validate', help='check a .scd model')
    parser.add_argument('model')
    parser.set_defaults(func=validate_command)

    parser = subparsers.add_parser('enumerate', help='size of the state space')
    parser.add_argument('model')
    parser.add_argument('--reduced', action='store_true',
                        help='combination codes instead of full configurations')
    parser.add_argument('--list', action='store_true', help='also print every configuration')
    parser.set_defaults(func=enumerate_command)
