"""Results archive for simulation runs"""

import json
import zlib
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Dict, Any, Sequence

import aiosqlite

from .config import SessionConfig
from .models import PulseRecord, SweepRow


class ResultsStore:
    """Async SQLite archive of runs, their stats rows and compressed pulse records"""

    def __init__(self, db_path: str = "data/qkd_sim.db"):
        """
        Initialize results store

        Args:
            db_path: Path to SQLite database file
        """
        self.db_path = db_path
        self._ensure_data_dir()

    def _ensure_data_dir(self):
        """Ensure the data directory exists"""
        Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)

    def _compress_records(self, records: Sequence[PulseRecord]) -> bytes:
        """
        Compress pulse records using zlib

        Args:
            records: Per-pulse ledger

        Returns:
            Compressed JSON as bytes
        """
        json_data = json.dumps([r.to_dict() for r in records])
        return zlib.compress(json_data.encode('utf-8'), level=9)

    def _decompress_records(self, compressed_data: bytes) -> List[PulseRecord]:
        """Inverse of _compress_records"""
        json_data = zlib.decompress(compressed_data).decode('utf-8')
        return [PulseRecord.from_dict(item) for item in json.loads(json_data)]

    async def initialize(self):
        """Create database tables if they don't exist"""
        async with aiosqlite.connect(self.db_path) as db:
            await db.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    label TEXT NOT NULL,
                    axis TEXT,
                    config_json TEXT NOT NULL,
                    row_count INTEGER NOT NULL,
                    created_at TEXT NOT NULL
                )
            """)

            await db.execute("""
                CREATE TABLE IF NOT EXISTS run_rows (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id INTEGER NOT NULL,
                    position INTEGER NOT NULL,
                    row_json TEXT NOT NULL,
                    FOREIGN KEY (run_id) REFERENCES runs(id)
                )
            """)

            await db.execute("""
                CREATE TABLE IF NOT EXISTS run_records_archive (
                    run_id INTEGER PRIMARY KEY,
                    record_count INTEGER NOT NULL,
                    compressed_data BLOB NOT NULL,
                    FOREIGN KEY (run_id) REFERENCES runs(id)
                )
            """)

            await db.execute("""
                CREATE INDEX IF NOT EXISTS idx_run_rows
                ON run_rows(run_id, position)
            """)

            await db.commit()

    async def save_run(self, label: str, cfg: SessionConfig, rows: Sequence[SweepRow],
                       records: Optional[Sequence[PulseRecord]] = None,
                       axis: Optional[str] = None) -> int:
        """
        Archive one run (a single session or a whole sweep)

        Args:
            label: Free-form name, e.g. 'run' or 'sweep length_km'
            cfg: Base configuration
            rows: Stats rows in report order
            records: Optional per-pulse ledger (stored compressed)
            axis: Sweep axis, if any

        Returns:
            The new run id
        """
        async with aiosqlite.connect(self.db_path) as db:
            cursor = await db.execute("""
                INSERT INTO runs (label, axis, config_json, row_count, created_at)
                VALUES (?, ?, ?, ?, ?)
            """, (label, axis, json.dumps(cfg.to_dict(), sort_keys=True), len(rows),
                  datetime.utcnow().isoformat()))
            run_id = cursor.lastrowid

            await db.executemany("""
                INSERT INTO run_rows (run_id, position, row_json)
                VALUES (?, ?, ?)
            """, [(run_id, i, json.dumps(row.to_dict(), sort_keys=True)) for i, row in enumerate(rows)])

            if records is not None:
                await db.execute("""
                    INSERT INTO run_records_archive (run_id, record_count, compressed_data)
                    VALUES (?, ?, ?)
                """, (run_id, len(records), self._compress_records(records)))

            await db.commit()
            return run_id

    async def get_runs(self, limit: int = 20) -> List[Dict[str, Any]]:
        """
        Most recent runs first

        Args:
            limit: Maximum number of runs to return

        Returns:
            List of dicts with id, label, axis, row_count, created_at
        """
        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute("""
                SELECT id, label, axis, row_count, created_at
                FROM runs
                ORDER BY id DESC
                LIMIT ?
            """, (limit,)) as cursor:
                return [dict(row) async for row in cursor]

    async def get_run_config(self, run_id: int) -> Optional[SessionConfig]:
        """Configuration a run was started with"""
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute("SELECT config_json FROM runs WHERE id = ?", (run_id,)) as cursor:
                row = await cursor.fetchone()
                if not row:
                    return None
                return SessionConfig.from_dict(json.loads(row[0]))

    async def get_run_rows(self, run_id: int) -> List[SweepRow]:
        """Stats rows of a run, in report order"""
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute("""
                SELECT row_json FROM run_rows
                WHERE run_id = ?
                ORDER BY position ASC
            """, (run_id,)) as cursor:
                return [SweepRow.from_dict(json.loads(row[0])) async for row in cursor]

    async def get_run_records(self, run_id: int) -> Optional[List[PulseRecord]]:
        """Decompressed per-pulse ledger, or None if the run stored none"""
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute("""
                SELECT compressed_data FROM run_records_archive WHERE run_id = ?
            """, (run_id,)) as cursor:
                row = await cursor.fetchone()
                if not row:
                    return None
                return self._decompress_records(row[0])

    async def purge_runs(self, keep: int) -> int:
        """
        Delete all but the newest `keep` runs

        Returns:
            Number of runs deleted
        """
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute("""
                SELECT id FROM runs ORDER BY id DESC LIMIT -1 OFFSET ?
            """, (keep,)) as cursor:
                stale = [row[0] async for row in cursor]

            if stale:
                placeholders = ','.join('?' * len(stale))
                await db.execute(f"DELETE FROM run_rows WHERE run_id IN ({placeholders})", stale)
                await db.execute(f"DELETE FROM run_records_archive WHERE run_id IN ({placeholders})", stale)
                await db.execute(f"DELETE FROM runs WHERE id IN ({placeholders})", stale)
                await db.commit()

            return len(stale)
