"""Coupon-collector estimate command."""
import csv
import logging
from typing import List

from chartcov import render
from chartcov.commands import emit, load_traces
from chartcov.coverage import ccp_from_report, ccp_mc, completion_draws, histogram

logger = logging.getLogger(__name__)


def read_weights(path: str) -> List[float]:
    """Rows of `type,weight`; a header row and blank rows are skipped."""
    weights = []
    with open(path, encoding='utf-8', newline='') as source:
        for number, row in enumerate(csv.reader(source), 1):
            if not row or not ''.join(row).strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{number}: expected 'type,weight'")
            try:
                weights.append(float(row[1]))
            except ValueError:
                if number == 1:
                    continue  # header
                raise ValueError(f"{path}:{number}: weight is not a number: {row[1]!r}")
    if not weights:
        raise ValueError(f"{path}: no weights")
    return weights


def ccp_command(args) -> int:
    caveat = None
    if args.types is not None:
        if args.types < 1:
            raise ValueError("--types must be at least 1")
        estimate = ccp_mc([1.0 / args.types] * args.types, args.trials, args.seed)
    elif args.weights is not None:
        estimate = ccp_mc(read_weights(args.weights), args.trials, args.seed)
    else:
        estimate, caveat = ccp_from_report(histogram(load_traces(args.traces)), args.trials, args.seed)

    emit(render.ccp_summary(estimate, caveat))
    emit([f"draws_for[{args.confidence}]={completion_draws(estimate, args.confidence)}"])
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('ccp', help='draws needed until every type is seen')
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--types', type=int, help='N equally likely types')
    source.add_argument('--weights', help='CSV of type,weight rows')
    source.add_argument('--traces', help='weights from the codes observed in a trace file')
    parser.add_argument('--trials', type=int, required=True)
    parser.add_argument('--seed', type=int, required=True)
    parser.add_argument('--confidence', type=float, default=0.95,
                        help='report the draws completing this share of trials')
    parser.set_defaults(func=ccp_command)
