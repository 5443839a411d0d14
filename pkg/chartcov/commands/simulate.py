"""Scenario generation command."""
import logging

from chartcov import config
from chartcov.commands import output
from chartcov.scdsl import load_model
from chartcov.simgen import SimParams, simulate_batch, write_traces

logger = logging.getLogger(__name__)


def simulate_command(args) -> int:
    model = load_model(args.model)
    params = SimParams(
        n_scenarios=args.n,
        seed=args.seed,
        p_vru=args.p_vru,
        p_detect=args.p_detect,
        p_locate=args.p_locate,
        p_tx=args.p_tx,
        p_jaywalk=args.p_jaywalk,
        p_light_failure=args.p_light_failure,
        workers=args.workers,
    )
    traces = simulate_batch(model, params)
    with output(args.out) as sink:
        written = write_traces(traces, sink)
    logger.info("Wrote %d traces to %s", written, args.out or 'stdout')
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('simulate', help='generate seeded scenario traces')
    parser.add_argument('model')
    parser.add_argument('--n', type=int, required=True, help='number of scenarios')
    parser.add_argument('--seed', type=int, required=True)
    parser.add_argument('--p-vru', type=float, default=config.DEFAULT_P_VRU)
    parser.add_argument('--p-detect', type=float, default=config.DEFAULT_P_DETECT)
    parser.add_argument('--p-locate', type=float, default=config.DEFAULT_P_LOCATE)
    parser.add_argument('--p-tx', type=float, default=config.DEFAULT_P_TX)
    parser.add_argument('--p-jaywalk', type=float, default=config.DEFAULT_P_JAYWALK)
    parser.add_argument('--p-light-failure', type=float, default=0.0)
    parser.add_argument('--workers', type=int, default=1)
    parser.add_argument('--out', help='trace file (default: stdout)')
    parser.set_defaults(func=simulate_command)
