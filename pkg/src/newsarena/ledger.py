"""Append-only JSON-lines run ledger."""

from __future__ import annotations

import json
import threading
from collections.abc import Iterator
from pathlib import Path
from typing import Any

from .errors import LedgerCorrupt

SCHEMA_VERSION = 1


def _dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


class RunLedger:
    """Serialised writer of ledger records.

    Every record carries ``seq``, ``type`` and the ``epoch``/``round``/``agent``
    coordinates (``None`` where a coordinate does not apply). Lines are flushed
    as they are written so a crash never loses an acknowledged record.
    """

    def __init__(self, path: str | Path | None = None, mode: str = "w"):
        self.path = Path(path) if path is not None else None
        self.records: list[dict[str, Any]] = []
        self._lock = threading.Lock()
        self._fh = None
        if self.path is not None:
            if mode == "a" and self.path.exists():
                self.records = read_ledger(self.path)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open(mode, encoding="utf-8")

    def append(
        self,
        type_: str,
        epoch: int | None = None,
        round_: int | None = None,
        agent: int | None = None,
        **payload: Any,
    ) -> dict[str, Any]:
        with self._lock:
            record = {
                "v": SCHEMA_VERSION,
                "seq": len(self.records),
                "type": type_,
                "epoch": epoch,
                "round": round_,
                "agent": agent,
                **payload,
            }
            line = _dumps(record)
            self.records.append(json.loads(line))
            if self._fh is not None:
                self._fh.write(line + "\n")
                self._fh.flush()
            return record

    def warn(self, message: str, epoch=None, round_=None, agent=None, **extra: Any) -> None:
        self.append("warning", epoch, round_, agent, message=message, **extra)

    def of_type(self, *types: str) -> Iterator[dict[str, Any]]:
        return (r for r in self.records if r["type"] in types)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_ledger(path: str | Path) -> list[dict[str, Any]]:
    """Parse a ledger file, raising :class:`LedgerCorrupt` with the record index."""
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LedgerCorrupt(index, str(exc)) from None
            if not isinstance(rec, dict) or "type" not in rec or rec.get("seq") != len(records):
                raise LedgerCorrupt(index, "missing type or out-of-sequence record")
            if rec.get("v") != SCHEMA_VERSION:
                raise LedgerCorrupt(index, f"unsupported schema version {rec.get('v')!r}")
            records.append(rec)
    return records
