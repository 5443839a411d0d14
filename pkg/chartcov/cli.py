"""Command-line entry point.

Exit statuses: 0 success, 1 domain failure (failed test, coverage gap with
``--fail-on-gap``, collection that cannot complete), 2 usage or parse error,
3 I/O error.
"""
import argparse
import logging
import sys
from typing import List, Optional

from chartcov import __version__
from chartcov.chartcore import LivelockError
from chartcov.commands import catalog, ccp, coverage, model, simulate, testing
from chartcov.coverage import CoverageError, NeverCompletes
from chartcov.scdsl import ModelSyntaxError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='chartcov',
        description='State-chart models, scenario generation and coverage analysis for V2X intersections.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging on stderr')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for module in (model, simulate, coverage, ccp, testing, catalog):
        module.register(subparsers)
    return parser


def _error(message: str) -> None:
    print(f"chartcov: error: {message}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return args.func(args)
    except ModelSyntaxError as exc:
        for diagnostic in exc.diagnostics:
            print(diagnostic.render(exc.filename), file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        _error(str(exc))
        return EXIT_IO
    except (NeverCompletes, CoverageError, LivelockError) as exc:
        _error(str(exc))
        return EXIT_DOMAIN
    except (ValueError, KeyError) as exc:
        # schema errors, bad parameters, incompatible models, unknown test events
        _error(exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc))
        return EXIT_USAGE
