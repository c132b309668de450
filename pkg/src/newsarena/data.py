"""Series and news loading, sliding windows, and round batching."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from bisect import bisect_left, bisect_right
from collections.abc import Sequence
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Any

import numpy as np

from .errors import (
    MalformedLine,
    MalformedRow,
    NonFiniteValue,
    NonUniformSpacing,
    SeriesTooShort,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeriesSchema:
    """Column layout of a series CSV. ``covariates=None`` means every other column."""

    timestamp: str = "timestamp"
    value: str = "value"
    covariates: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RawSeries:
    name: str
    granularity: timedelta
    timestamps: tuple[datetime, ...]
    values: tuple[float, ...]
    covariates: tuple[dict[str, Any], ...] = ()

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class WindowMeta:
    region: str
    start: datetime
    prediction_date: datetime
    granularity: timedelta
    covariates_start: dict[str, Any] = field(default_factory=dict)
    covariates_prediction: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Window:
    id: int
    offset: int
    history: tuple[float, ...]
    target: tuple[float, ...]
    meta: WindowMeta


@dataclass(frozen=True)
class NewsItem:
    date: date
    region: str
    text: str
    id: str = ""

    def __post_init__(self):
        if not self.id:
            object.__setattr__(self, "id", news_id(self.date, self.region, self.text))


@dataclass(frozen=True)
class RoundBatch:
    round_index: int
    windows: tuple[int, ...]


def news_id(day: date, region: str, text: str) -> str:
    digest = hashlib.sha1(f"{day.isoformat()}|{region}|{text}".encode("utf-8"))
    return digest.hexdigest()[:12]


def _parse_timestamp(raw: str) -> datetime:
    raw = raw.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    return datetime.fromisoformat(raw)


def _parse_cell(raw: str) -> Any:
    try:
        return float(raw)
    except ValueError:
        return raw


def load_series(
    path: str | Path,
    schema: SeriesSchema | None = None,
    name: str | None = None,
    granularity: timedelta | None = None,
) -> RawSeries:
    """Read a ``timestamp,value[,covariate...]`` CSV into a validated series.

    Rows are sorted by timestamp before the spacing check. Errors carry the
    1-based file line of the offending row.
    """
    schema = schema or SeriesSchema()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(1, "empty file") from None
        if schema.timestamp not in header or schema.value not in header:
            raise MalformedRow(1, f"header must contain {schema.timestamp!r} and {schema.value!r}")
        ts_col = header.index(schema.timestamp)
        val_col = header.index(schema.value)
        if schema.covariates is None:
            cov_cols = [i for i in range(len(header)) if i not in (ts_col, val_col)]
        else:
            missing = [c for c in schema.covariates if c not in header]
            if missing:
                raise MalformedRow(1, f"missing covariate columns {missing}")
            cov_cols = [header.index(c) for c in schema.covariates]

        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                ts = _parse_timestamp(row[ts_col])
            except ValueError:
                raise MalformedRow(lineno, f"bad timestamp {row[ts_col]!r}") from None
            try:
                value = float(row[val_col])
            except ValueError:
                raise MalformedRow(lineno, f"bad value {row[val_col]!r}") from None
            if not math.isfinite(value):
                raise NonFiniteValue(f"non-finite value at line {lineno}")
            cov = {header[i]: _parse_cell(row[i]) for i in cov_cols if row[i].strip() != ""}
            rows.append((ts, value, cov))

    if not rows:
        raise MalformedRow(2, "no data rows")
    rows.sort(key=lambda r: r[0])
    stamps = [r[0] for r in rows]
    if granularity is None:
        if len(stamps) < 2:
            raise NonUniformSpacing("cannot infer granularity from a single point")
        granularity = stamps[1] - stamps[0]
    for prev, cur in zip(stamps, stamps[1:]):
        if cur - prev != granularity:
            raise NonUniformSpacing(
                f"gap of {cur - prev} between {prev.isoformat()} and {cur.isoformat()} "
                f"(expected {granularity})"
            )
    return RawSeries(
        name=name or path.stem,
        granularity=granularity,
        timestamps=tuple(stamps),
        values=tuple(r[1] for r in rows),
        covariates=tuple(r[2] for r in rows),
    )


def make_windows(
    series: RawSeries,
    input_length: int,
    prediction_length: int,
    stride: int | None = None,
    region: str | None = None,
) -> list[Window]:
    """Slice ``series`` into history/target windows.

    ``stride`` defaults to ``prediction_length`` so targets never overlap.
    """
    if stride is None:
        stride = prediction_length
    if input_length < 1 or prediction_length < 1 or stride < 1:
        raise ValueError("input_length, prediction_length and stride must be >= 1")
    span = input_length + prediction_length
    n = len(series)
    if span > n:
        raise SeriesTooShort(f"series has {n} points, windows need {span}")
    count = (n - span) // stride + 1
    covs = series.covariates or tuple({} for _ in range(n))
    windows = []
    for k in range(count):
        off = k * stride
        meta = WindowMeta(
            region=region or series.name,
            start=series.timestamps[off],
            prediction_date=series.timestamps[off + input_length],
            granularity=series.granularity,
            covariates_start=dict(covs[off]),
            covariates_prediction=dict(covs[off + input_length]),
        )
        windows.append(
            Window(
                id=k,
                offset=off,
                history=series.values[off : off + input_length],
                target=series.values[off + input_length : off + span],
                meta=meta,
            )
        )
    return windows


def chronological_split(
    windows: Sequence[Window], ratios: tuple[float, float, float] = (8, 1, 1)
) -> tuple[list[Window], list[Window], list[Window]]:
    """Split windows into train/valid/test in time order (no shuffling)."""
    total = float(sum(ratios))
    n = len(windows)
    n_train = int(n * ratios[0] / total)
    n_valid = int(n * ratios[1] / total)
    ordered = sorted(windows, key=lambda w: w.offset)
    return (
        ordered[:n_train],
        ordered[n_train : n_train + n_valid],
        ordered[n_train + n_valid :],
    )


def derive_seed(*parts: int) -> int:
    """Stable 63-bit seed from integer coordinates such as (seed, epoch, round, agent)."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(2, np.uint64)[0] >> np.uint64(1))


def split_rounds(windows: Sequence[Window], E: int, seed: int) -> list[RoundBatch]:
    """Shuffle windows with ``seed`` and deal them into ``E`` near-equal batches."""
    if E < 1:
        raise ValueError("E must be >= 1")
    if not windows:
        raise ValueError("windows must be non-empty")
    if E > len(windows):
        log.warning("split_rounds: %d rounds for %d windows, some batches are empty", E, len(windows))
    ids = np.array([w.id for w in windows])
    perm = np.random.default_rng(seed).permutation(ids)
    return [
        RoundBatch(round_index=e + 1, windows=tuple(int(i) for i in part))
        for e, part in enumerate(np.array_split(perm, E))
    ]


class NewsDB(Sequence):
    """Deduplicated news corpus with date-range lookup."""

    def __init__(self, items: Sequence[NewsItem] = (), duplicates: int = 0):
        seen: dict[str, NewsItem] = {}
        for item in items:
            if item.id in seen:
                duplicates += 1
                continue
            seen[item.id] = item
        self._items = sorted(seen.values(), key=lambda it: (it.date, it.region, it.id))
        self._by_id = seen
        self._dates = [it.date for it in self._items]
        self.duplicates = duplicates

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, index):
        return self._items[index]

    def __contains__(self, news_id: object) -> bool:
        return news_id in self._by_id

    def get(self, news_id: str) -> NewsItem | None:
        return self._by_id.get(news_id)

    def between(self, first: date, last: date) -> list[NewsItem]:
        """Items dated within ``[first, last]`` inclusive, in date order."""
        lo = bisect_left(self._dates, first)
        hi = bisect_right(self._dates, last)
        return self._items[lo:hi]


def _parse_day(raw: Any) -> date:
    if not isinstance(raw, str):
        raise ValueError("date must be a string")
    raw = raw.strip()
    try:
        return date.fromisoformat(raw[:10])
    except ValueError:
        return datetime.fromisoformat(raw).date()


def load_news(path: str | Path) -> NewsDB:
    """Read a JSON-lines news file with ``date``, ``region`` and ``text`` keys."""
    items = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(lineno, str(exc)) from None
            if not isinstance(obj, dict):
                raise MalformedLine(lineno, "expected a JSON object")
            try:
                day = _parse_day(obj["date"])
                region = str(obj.get("region", ""))
                text = obj["text"]
            except (KeyError, ValueError) as exc:
                raise MalformedLine(lineno, f"bad or missing field: {exc}") from None
            if not isinstance(text, str) or not text.strip():
                raise MalformedLine(lineno, "text must be a non-empty string")
            items.append(NewsItem(date=day, region=region, text=text))
    db = NewsDB(items)
    if db.duplicates:
        log.warning("load_news: dropped %d duplicate items from %s", db.duplicates, path)
    return db
