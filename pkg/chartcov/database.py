"""Scenario catalog: campaigns of simulated or observed scenarios in SQLite."""
import aiosqlite
from typing import Dict, Iterable, List, Optional, Tuple

from chartcov.simgen import ScenarioTrace


class ScenarioStore:
    def __init__(self, db_path: str):
        self.db_path = db_path

    async def init_db(self):
        """Initialize database tables."""
        async with aiosqlite.connect(self.db_path) as db:
            # Campaigns table
            await db.execute("""
                CREATE TABLE IF NOT EXISTS campaigns (
                    campaign_id INTEGER PRIMARY KEY AUTOINCREMENT,
                    name TEXT NOT NULL UNIQUE,
                    seed TEXT,
                    params TEXT,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """)

            # Scenarios table
            await db.execute("""
                CREATE TABLE IF NOT EXISTS scenarios (
                    campaign_id INTEGER,
                    scenario_id INTEGER,
                    code TEXT NOT NULL,
                    light INTEGER,
                    detected INTEGER,
                    located INTEGER,
                    tx INTEGER,
                    terminal TEXT,
                    jaywalker INTEGER,
                    decision_time REAL,
                    FOREIGN KEY (campaign_id) REFERENCES campaigns(campaign_id),
                    UNIQUE(campaign_id, scenario_id)
                )
            """)

            await db.commit()

    # Campaign methods
    async def add_campaign(self, name: str, seed: Optional[int] = None, params: str = "") -> Optional[int]:
        """Add a campaign; None if the name is taken."""
        async with aiosqlite.connect(self.db_path) as db:
            try:
                cursor = await db.execute("""
                    INSERT INTO campaigns (name, seed, params)
                    VALUES (?, ?, ?)
                """, (name, None if seed is None else str(seed), params))
                await db.commit()
                return cursor.lastrowid
            except aiosqlite.IntegrityError:
                return None

    async def get_campaigns(self) -> List[Dict]:
        """Get all campaigns with their scenario counts."""
        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute("""
                SELECT c.*, COUNT(s.scenario_id) AS scenarios
                FROM campaigns c
                LEFT JOIN scenarios s ON s.campaign_id = c.campaign_id
                GROUP BY c.campaign_id
                ORDER BY c.campaign_id
            """) as cursor:
                rows = await cursor.fetchall()
                return [dict(row) for row in rows]

    async def get_campaign(self, name: str) -> Optional[Dict]:
        """Get single campaign by name."""
        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute(
                "SELECT * FROM campaigns WHERE name = ?", (name,)
            ) as cursor:
                row = await cursor.fetchone()
                return dict(row) if row else None

    # Scenario methods
    async def add_traces(self, campaign_id: int, traces: Iterable[ScenarioTrace]) -> int:
        """Insert traces; scenarios already stored for the campaign are skipped."""
        rows = [(campaign_id, t.id, str(t.code), t.code.light, t.code.detected, t.code.located,
                 t.code.tx, t.terminal_vehicle_state, int(t.jaywalker), t.decision_time)
                for t in traces]
        async with aiosqlite.connect(self.db_path) as db:
            before = db.total_changes
            await db.executemany("""
                INSERT OR IGNORE INTO scenarios
                (campaign_id, scenario_id, code, light, detected, located, tx,
                 terminal, jaywalker, decision_time)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """, rows)
            await db.commit()
            return db.total_changes - before

    async def get_code_counts(self, campaign_id: Optional[int] = None,
                              jaywalker: Optional[bool] = None) -> Dict[str, int]:
        """Get scenario counts per combination code (code -> count)."""
        conditions, params = [], []
        if campaign_id is not None:
            conditions.append("campaign_id = ?")
            params.append(campaign_id)
        if jaywalker is not None:
            conditions.append("jaywalker = ?")
            params.append(int(jaywalker))
        query = "SELECT code, COUNT(*) FROM scenarios"
        if conditions:
            query += " WHERE " + " AND ".join(conditions)
        query += " GROUP BY code"
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute(query, params) as cursor:
                rows = await cursor.fetchall()
                return {row[0]: row[1] for row in rows}

    async def get_scenario_codes(self, campaign_id: int) -> List[Tuple[int, str]]:
        """Get (scenario id, code) pairs of one campaign."""
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute("""
                SELECT scenario_id, code FROM scenarios
                WHERE campaign_id = ?
                ORDER BY scenario_id
            """, (campaign_id,)) as cursor:
                rows = await cursor.fetchall()
                return [(row[0], row[1]) for row in rows]
