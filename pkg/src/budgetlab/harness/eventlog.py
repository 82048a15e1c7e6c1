"""Append-only JSON-lines event log.

Three record types share one file: ``cell`` headers, ``call`` records and a
closing ``outcome`` per (cell, repeat, question). A question's calls and its
outcome are written together, so a crash can only leave a torn tail that
``recover`` trims back to the last complete group.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from ..core import CallRecord

SCHEMA_VERSION = 1
# excluded from equality checks between logs
VOLATILE_FIELDS = ("ts", "wall_time_ms")


class LogError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def call_to_record(cell: str, repeat: int, call: CallRecord) -> dict:
    rec = {"schema_version": SCHEMA_VERSION, "type": "call", "cell": cell, "repeat": repeat}
    body = asdict(call)
    body["role"] = call.role.value
    body["request_messages"] = [list(m) for m in call.request_messages]
    rec.update(body)
    rec["ts"] = _now()
    return rec


def record_to_call(rec: dict) -> CallRecord:
    fields = {k: v for k, v in rec.items()
              if k not in ("schema_version", "type", "cell", "repeat", "ts")}
    fields["request_messages"] = tuple(tuple(m) for m in fields["request_messages"])
    return CallRecord(**fields)


def read_log(path: str | Path) -> list[dict]:
    """Parse every line; a malformed line raises ``LogError`` with its number."""
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogError(f"corrupt record ({exc.msg})", lineno) from None
            if not isinstance(rec, dict) or "type" not in rec:
                raise LogError("record lacks a type field", lineno)
            if rec.get("schema_version") != SCHEMA_VERSION:
                raise LogError(f"unsupported schema_version {rec.get('schema_version')!r}", lineno)
            if rec["type"] not in ("cell", "call", "outcome"):
                raise LogError(f"unknown record type {rec['type']!r}", lineno)
            records.append(rec)
    return records


def recover(path: str | Path) -> list[dict]:
    """Trim a torn tail (partial line or calls without their outcome) and return the kept records."""
    path = Path(path)
    if not path.exists():
        return []
    data = path.read_bytes()
    keep_bytes = 0
    kept: list[dict] = []
    pending: list[dict] = []
    offset = 0
    for raw in data.splitlines(keepends=True):
        offset += len(raw)
        if not raw.endswith(b"\n"):
            break
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError:
            break
        if rec.get("type") == "call":
            pending.append(rec)
            continue
        kept.extend(pending)
        pending = []
        kept.append(rec)
        keep_bytes = offset
    if keep_bytes != len(data):
        with path.open("r+b") as fh:
            fh.truncate(keep_bytes)
    return kept


class EventLog:
    """Single writer; groups are appended atomically under a lock and flushed."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("a", encoding="utf-8")
        self._lock = threading.Lock()

    def append(self, records: Iterable[dict]) -> None:
        text = "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)
        with self._lock:
            self._fh.write(text)
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def strip_volatile(records: Iterable[dict]) -> list[dict]:
    return [{k: v for k, v in r.items() if k not in VOLATILE_FIELDS} for r in records]
