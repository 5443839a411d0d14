"""Scenario catalog commands."""
import asyncio
import csv
import json
import logging

from chartcov.commands import emit, load_traces, output
from chartcov.commands.coverage import report_lines, write_reports
from chartcov.coverage import report_from_counts
from chartcov.database import ScenarioStore

logger = logging.getLogger(__name__)


async def ingest(args) -> int:
    traces = load_traces(args.traces)
    store = ScenarioStore(args.db)
    await store.init_db()
    params = json.dumps({'source': args.traces}, separators=(',', ':'))
    campaign_id = await store.add_campaign(args.campaign, args.seed, params)
    if campaign_id is None:
        existing = await store.get_campaign(args.campaign)
        campaign_id = existing['campaign_id']
        logger.info("Campaign %s exists, adding to it", args.campaign)
    inserted = await store.add_traces(campaign_id, traces)
    emit([f"campaign={campaign_id} inserted={inserted} skipped={len(traces) - inserted}"])
    return 0


async def coverage(args) -> int:
    store = ScenarioStore(args.db)
    await store.init_db()
    report = report_from_counts(await store.get_code_counts(args.campaign, args.jaywalker), args.k)
    write_reports(report, args)
    under, lines = report_lines(report, args.k)
    emit(lines)
    return 1 if under and args.fail_on_gap else 0


async def campaigns(args) -> int:
    store = ScenarioStore(args.db)
    await store.init_db()
    for campaign in await store.get_campaigns():
        emit([f"campaign={campaign['campaign_id']} name={campaign['name']} "
              f"seed={campaign['seed']} scenarios={campaign['scenarios']}"])
    return 0


async def codes(args) -> int:
    store = ScenarioStore(args.db)
    await store.init_db()
    rows = await store.get_scenario_codes(args.campaign)
    with output(args.out) as sink:
        writer = csv.writer(sink, lineterminator='\n')
        writer.writerow(['scenario', 'code'])
        writer.writerows(rows)
    return 0


def _run(handler):
    def command(args) -> int:
        return asyncio.run(handler(args))
    return command


def register(subparsers) -> None:
    parser = subparsers.add_parser('catalog', help='scenario catalog across campaigns')
    commands = parser.add_subparsers(dest='catalog_command', required=True)

    ingest_parser = commands.add_parser('ingest', help='store a trace file as a campaign')
    ingest_parser.add_argument('db')
    ingest_parser.add_argument('traces')
    ingest_parser.add_argument('--campaign', required=True, help='campaign name')
    ingest_parser.add_argument('--seed', type=int)
    ingest_parser.set_defaults(func=_run(ingest))

    coverage_parser = commands.add_parser('coverage', help='coverage over stored scenarios')
    coverage_parser.add_argument('db')
    coverage_parser.add_argument('--campaign', type=int, help='campaign id (default: all)')
    coverage_parser.add_argument('--k', type=int, default=1)
    coverage_parser.add_argument('--csv')
    coverage_parser.add_argument('--fail-on-gap', action='store_true')
    jaywalkers = coverage_parser.add_mutually_exclusive_group()
    jaywalkers.add_argument('--jaywalkers', dest='jaywalker', action='store_const', const=True,
                            help='only scenarios with a jaywalking VRU')
    jaywalkers.add_argument('--no-jaywalkers', dest='jaywalker', action='store_const', const=False,
                            help='only scenarios without one')
    coverage_parser.set_defaults(func=_run(coverage))

    list_parser = commands.add_parser('list', help='stored campaigns')
    list_parser.add_argument('db')
    list_parser.set_defaults(func=_run(campaigns))

    codes_parser = commands.add_parser('codes', help='scenario codes of one campaign as CSV')
    codes_parser.add_argument('db')
    codes_parser.add_argument('--campaign', type=int, required=True)
    codes_parser.add_argument('--out')
    codes_parser.set_defaults(func=_run(codes))
