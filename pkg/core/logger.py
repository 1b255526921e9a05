"""
tmdyn Run Ledger - structured event log with dual storage (JSONL + SQLite).

Every CLI run appends one entry per event: what was simulated, enumerated,
classified or built, its parameters, its outcome and how long it took.
Console output goes through structlog; the ledger is the durable record.
"""

from __future__ import annotations

import json
import logging
import sqlite3
import sys
import time
from datetime import datetime, timezone
from enum import Enum
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

import structlog


class EventType(str, Enum):
    """Structured event types for the run ledger."""
    SIMULATION = "simulation"
    ENUMERATION = "enumeration"
    CLASSIFY = "classify"
    BUILD = "build"
    EQUIVALENCE = "equivalence"
    WARNING = "warning"
    ERROR = "error"
    SYSTEM = "system"


def setup_logging(level: str = "INFO", json_output: bool = False) -> None:
    """Route stdlib logging and structlog to stderr at the given level."""
    numeric = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    renderer = (
        structlog.processors.JSONRenderer()
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        # resolved per call so a replaced sys.stderr is picked up
        logger_factory=lambda *_: structlog.PrintLogger(sys.stderr),
        cache_logger_on_first_use=False,
    )


_SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    timestamp REAL NOT NULL,
    datetime TEXT NOT NULL,
    event_type TEXT NOT NULL,
    machine TEXT DEFAULT '',
    command TEXT DEFAULT '',
    outcome TEXT DEFAULT '',
    data TEXT,
    elapsed_ms REAL DEFAULT 0.0
);
CREATE INDEX IF NOT EXISTS idx_runs_event_type ON runs(event_type);
CREATE INDEX IF NOT EXISTS idx_runs_timestamp ON runs(timestamp);
"""

_COLUMNS = ("timestamp", "datetime", "event_type", "machine", "command", "outcome", "data", "elapsed_ms")


class Logger:
    """Dual-write run ledger: JSONL files + SQLite database.

    - one JSONL file per UTC day under jsonl_dir
    - a `runs` table in sqlite_path for querying
    - failures to write never abort the run that is being logged
    """

    def __init__(self, config: dict | str):
        if isinstance(config, str):
            config = {
                "jsonl_dir": str(Path(config).parent),
                "sqlite_path": str(Path(config).with_suffix(".db")),
            }
        self.config = config
        self.enabled = config.get("ledger_enabled", True)
        self.jsonl_dir = Path(config.get("jsonl_dir", "data/logs"))
        self.sqlite_path = Path(config.get("sqlite_path", "data/db/runs.db"))
        self._log = structlog.get_logger("tmdyn.ledger")

        if self.enabled:
            self.jsonl_dir.mkdir(parents=True, exist_ok=True)
            self.sqlite_path.parent.mkdir(parents=True, exist_ok=True)
            try:
                with self._connect() as conn:
                    conn.executescript(_SCHEMA)
            except sqlite3.Error as exc:
                self._log.warning("ledger.sqlite_unavailable", error=str(exc))

    @contextmanager
    def _connect(self) -> Iterator[sqlite3.Connection]:
        conn = sqlite3.connect(str(self.sqlite_path))
        conn.row_factory = sqlite3.Row
        try:
            yield conn
            conn.commit()
        finally:
            conn.close()

    def _jsonl_path(self) -> Path:
        return self.jsonl_dir / f"{datetime.now(timezone.utc):%Y-%m-%d}.jsonl"

    def log(
        self,
        event_type: EventType | str,
        data: Any = None,
        machine: str = "",
        command: str = "",
        outcome: str = "",
        elapsed_ms: float = 0.0,
    ) -> Optional[dict]:
        """Write one entry to both stores; returns the entry (None when disabled)."""
        if not self.enabled:
            return None
        if data is None or isinstance(data, str):
            payload = data or ""
        else:
            payload = json.dumps(data, default=str, sort_keys=True)

        stamp = time.time()
        entry = {
            "timestamp": stamp,
            "datetime": datetime.fromtimestamp(stamp, tz=timezone.utc).isoformat(),
            "event_type": event_type.value if isinstance(event_type, EventType) else event_type,
            "machine": machine,
            "command": command,
            "outcome": outcome,
            "data": payload,
            "elapsed_ms": round(elapsed_ms, 3),
        }
        try:
            with self._jsonl_path().open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(entry, default=str) + "\n")
        except OSError as exc:
            self._log.warning("ledger.jsonl_failed", error=str(exc))
        try:
            with self._connect() as conn:
                conn.execute(
                    f"INSERT INTO runs ({', '.join(_COLUMNS)}) VALUES ({', '.join('?' * len(_COLUMNS))})",
                    tuple(entry[c] for c in _COLUMNS),
                )
        except sqlite3.Error as exc:
            self._log.warning("ledger.sqlite_failed", error=str(exc))
        return entry

    def query(
        self,
        event_type: Optional[str] = None,
        machine: Optional[str] = None,
        limit: int = 50,
        search: Optional[str] = None,
    ) -> list[dict]:
        """Most recent entries first, optionally filtered."""
        if not self.enabled:
            return []
        filters = {"event_type = ?": event_type, "machine = ?": machine}
        if search:
            filters["data LIKE ?"] = f"%{search}%"
        active = {clause: value for clause, value in filters.items() if value}
        where = f"WHERE {' AND '.join(active)}" if active else ""
        sql = f"SELECT * FROM runs {where} ORDER BY timestamp DESC, id DESC LIMIT ?"
        try:
            with self._connect() as conn:
                rows = conn.execute(sql, (*active.values(), limit)).fetchall()
        except sqlite3.Error:
            return []
        return [dict(row) for row in rows]

    def get_run_summary(self, days: int = 7) -> dict:
        """Event counts per type and total elapsed time over the last N days."""
        summary = {"total_events": 0, "total_elapsed_ms": 0.0, "by_type": {}, "period_days": days}
        if not self.enabled:
            return summary
        try:
            with self._connect() as conn:
                rows = conn.execute(
                    "SELECT event_type, COUNT(*), SUM(elapsed_ms) FROM runs WHERE timestamp > ? GROUP BY event_type",
                    (time.time() - days * 86400,),
                ).fetchall()
        except sqlite3.Error:
            return summary
        summary["by_type"] = {row[0]: row[1] for row in rows}
        summary["total_events"] = sum(summary["by_type"].values())
        summary["total_elapsed_ms"] = round(sum(row[2] or 0.0 for row in rows), 3)
        return summary
