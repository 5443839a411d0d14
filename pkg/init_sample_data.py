"""Script to seed the scenario catalog with sample campaigns."""
import asyncio
import json

from chartcov.config import CATALOG_PATH, REFERENCE_MODEL_PATH
from chartcov.coverage import report_from_counts
from chartcov.database import ScenarioStore
from chartcov.scdsl import load_model
from chartcov.simgen import SimParams, simulate_batch


async def init_sample_campaigns():
    """Simulate two campaigns from the reference model and store them."""
    store = ScenarioStore(CATALOG_PATH)
    await store.init_db()
    model = load_model(REFERENCE_MODEL_PATH)

    # Sample campaigns
    campaigns = [
        {'name': 'defaults', 'params': SimParams(n_scenarios=2000, seed=1)},
        {'name': 'poor-link', 'params': SimParams(n_scenarios=1000, seed=2, p_tx=0.5)},
    ]

    for campaign in campaigns:
        params = campaign['params']
        settings = json.dumps({'n': params.n_scenarios, 'p_vru': params.p_vru, 'p_detect': params.p_detect,
                               'p_locate': params.p_locate, 'p_tx': params.p_tx}, separators=(',', ':'))
        campaign_id = await store.add_campaign(campaign['name'], params.seed, settings)
        if campaign_id is None:
            print(f"Campaign {campaign['name']} already exists, skipped")
            continue
        inserted = await store.add_traces(campaign_id, simulate_batch(model, params))
        print(f"Created campaign: {campaign['name']} (ID: {campaign_id}, scenarios: {inserted})")

    report = report_from_counts(await store.get_code_counts())
    print(f"\nInitialization complete: {report.covered} of 48 feasible codes covered")


if __name__ == '__main__':
    asyncio.run(init_sample_campaigns())
