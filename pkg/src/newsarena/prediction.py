"""News selection, forecasting backends and score-weighted aggregation."""

from __future__ import annotations

import csv
import math
import threading
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Any, Protocol

import requests

from .agents import LogicDocument
from .data import NewsDB, NewsItem, Window
from .errors import KeyMismatch, LengthMismatch, PredictorFailure
from .gateway import Gateway
from .metrics import compute_errors

ENSEMBLE = "ensemble"
BUCKETS = ("long_term", "short_term", "real_time")
BUCKET_KEYS = {
    "long_term": "Long-Term Effect on Future Load Consumption",
    "short_term": "Short-Term Effect on Today's Load Consumption",
    "real_time": "Real-Time Direct Effect on Today's Load Consumption",
}


@dataclass(frozen=True)
class SelectedNews:
    window: int
    long_term: tuple[tuple[str, str], ...] = ()
    short_term: tuple[tuple[str, str], ...] = ()
    real_time: tuple[tuple[str, str], ...] = ()
    dropped: int = 0

    def ids(self) -> list[str]:
        """Distinct selected ids in bucket order."""
        seen: dict[str, None] = {}
        for bucket in BUCKETS:
            for nid, _ in getattr(self, bucket):
                seen.setdefault(nid, None)
        return list(seen)

    def items(self) -> Iterable[tuple[str, str, str]]:
        for bucket in BUCKETS:
            for nid, why in getattr(self, bucket):
                yield bucket, nid, why

    def as_dict(self) -> dict[str, Any]:
        return {b: [list(x) for x in getattr(self, b)] for b in BUCKETS}


@dataclass(frozen=True)
class Forecast:
    window: int
    agent: int | str
    values: tuple[float, ...]


def candidate_news(window: Window, news_db: NewsDB, lookback_days: int = 7) -> list[NewsItem]:
    first = (window.meta.start - timedelta(days=lookback_days)).date()
    return news_db.between(first, window.meta.prediction_date.date())


def format_news_lines(items: Sequence[NewsItem]) -> str:
    return "\n".join(f"[{it.id}] {it.date.isoformat()} {it.region}: {it.text}" for it in items)


def _bucket_of(key: str) -> str | None:
    k = key.lower()
    if "long" in k:
        return "long_term"
    if "real" in k:
        return "real_time"
    if "short" in k:
        return "short_term"
    return None


def parse_selection(parsed: Any, window_id: int, news_db: NewsDB, candidates: Sequence[NewsItem] = ()) -> SelectedNews:
    """Turn the three-bucket JSON reply into :class:`SelectedNews`.

    Entries are matched by ``id``, falling back to exact news text among the
    candidates; anything unresolvable is dropped and counted.
    """
    if not isinstance(parsed, dict):
        raise ValueError("selection reply must be a JSON object")
    by_text = {it.text.strip(): it.id for it in candidates}
    buckets: dict[str, list[tuple[str, str]]] = {b: [] for b in BUCKETS}
    dropped = 0
    for key, entries in parsed.items():
        bucket = _bucket_of(str(key))
        if bucket is None or not isinstance(entries, list):
            continue  # "no" or unrelated keys
        for entry in entries:
            if not isinstance(entry, dict):
                dropped += 1
                continue
            nid = str(entry.get("id", "")).strip().strip("[]")
            if nid not in news_db:
                nid = by_text.get(str(entry.get("news", "")).strip(), "")
            if not nid:
                dropped += 1
                continue
            if all(nid != seen for seen, _ in buckets[bucket]):
                buckets[bucket].append((nid, str(entry.get("rationality", ""))))
    return SelectedNews(window_id, *(tuple(buckets[b]) for b in BUCKETS), dropped=dropped)


def select_news(
    logic: LogicDocument,
    window: Window,
    news_db: NewsDB,
    gateway: Gateway,
    lookback_days: int = 7,
    meta: Mapping[str, Any] | None = None,
) -> SelectedNews:
    """Ask the model which candidate news matter for ``window`` under ``logic``."""
    candidates = candidate_news(window, news_db, lookback_days)
    if not candidates:
        return SelectedNews(window.id)
    req = gateway.request(
        "filter_news",
        {"logic": logic.to_text() or "(no logic yet)", "news": format_news_lines(candidates)},
        expected_format="json",
        meta={**(meta or {}), "window": window.id, "candidates": [it.id for it in candidates]},
    )
    reply = gateway.complete(req)
    selected = parse_selection(reply.parsed, window.id, news_db, candidates)
    if selected.dropped and gateway.ledger is not None:
        m = meta or {}
        gateway.ledger.warn(
            f"dropped {selected.dropped} unknown news references",
            m.get("epoch"), m.get("round"), m.get("agent"), window=window.id,
        )
    return selected


class Predictor(Protocol):
    name: str

    def forecast(self, window: Window, selected: SelectedNews, news_db: NewsDB) -> Sequence[float]: ...


class PersistencePredictor:
    """Repeats the last observed value."""

    name = "persistence"

    def forecast(self, window, selected, news_db):
        return [window.history[-1]] * len(window.target)


class ScriptedPredictor:
    """Oracle-overlap model for offline runs.

    Relative error per window is ``max(0, base - gain*hits + penalty*misses)``
    where ``hits``/``misses`` count selected news inside/outside ``relevant``.
    The forecast deviates from the truth by exactly that fraction (alternating
    sign), so the window MAPE equals the error.
    """

    name = "scripted"

    def __init__(self, relevant: Iterable[str], base: float = 0.12, gain: float = 0.01, penalty: float = 0.0):
        self.relevant = frozenset(relevant)
        self.base = base
        self.gain = gain
        self.penalty = penalty

    def error(self, selected_ids: Iterable[str]) -> float:
        ids = set(selected_ids)
        hits = len(ids & self.relevant)
        misses = len(ids - self.relevant)
        return max(0.0, self.base - self.gain * hits + self.penalty * misses)

    def forecast(self, window, selected, news_db):
        err = self.error(selected.ids())
        return [y * (1.0 + err * (1 if t % 2 == 0 else -1)) for t, y in enumerate(window.target)]


class RemotePredictor:
    """POSTs ``{history, meta, news}`` and expects ``{values}`` back."""

    name = "remote"

    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout

    def forecast(self, window, selected, news_db):
        news = []
        for bucket, nid, why in selected.items():
            item = news_db.get(nid)
            news.append({
                "id": nid, "horizon": bucket, "rationality": why,
                "date": item.date.isoformat() if item else None,
                "region": item.region if item else None,
                "text": item.text if item else None,
            })
        payload = {"history": list(window.history), "meta": window_meta_dict(window), "news": news}
        try:
            resp = requests.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            return [float(v) for v in resp.json()["values"]]
        except (requests.RequestException, ValueError, KeyError, TypeError) as exc:
            raise PredictorFailure(f"remote predictor at {self.url} failed: {exc}") from None


def window_meta_dict(window: Window) -> dict[str, Any]:
    m = window.meta
    return {
        "window_id": window.id,
        "region": m.region,
        "start": m.start.isoformat(),
        "prediction_date": m.prediction_date.isoformat(),
        "granularity_minutes": m.granularity.total_seconds() / 60,
        "prediction_length": len(window.target),
        "covariates_start": m.covariates_start,
        "covariates_prediction": m.covariates_prediction,
    }


def predict(predictor: Predictor, window: Window, selected: SelectedNews, news_db: NewsDB, agent: int | str = 0) -> Forecast:
    try:
        values = tuple(float(v) for v in predictor.forecast(window, selected, news_db))
    except PredictorFailure:
        raise
    except Exception as exc:  # third-party predictors may raise anything
        raise PredictorFailure(f"{getattr(predictor, 'name', predictor)}: {exc}") from exc
    if len(values) != len(window.target):
        raise PredictorFailure(f"predictor returned {len(values)} values, expected {len(window.target)}")
    if not all(math.isfinite(v) for v in values):
        raise PredictorFailure("predictor returned non-finite values")
    return Forecast(window.id, agent, values)


def aggregate(forecasts: Mapping[int, Forecast], scores: Mapping[int, float]) -> Forecast:
    """Cumulative-score weighted mean of member forecasts."""
    if set(forecasts) != set(scores):
        raise KeyMismatch(f"forecast agents {sorted(forecasts)} differ from score agents {sorted(scores)}")
    if not forecasts:
        raise ValueError("nothing to aggregate")
    keys = sorted(forecasts)
    windows = {forecasts[k].window for k in keys}
    if len(windows) != 1:
        raise LengthMismatch(f"forecasts cover different windows: {sorted(windows)}")
    lengths = {len(forecasts[k].values) for k in keys}
    if len(lengths) != 1:
        raise LengthMismatch(f"forecast lengths differ: {sorted(lengths)}")
    if any(not scores[k] > 0 for k in keys):
        raise ValueError("aggregation weights must be > 0")
    total = math.fsum(scores[k] for k in keys)
    weights = [scores[k] / total for k in keys]
    n = lengths.pop()
    values = tuple(
        math.fsum(w * forecasts[k].values[t] for w, k in zip(weights, keys)) for t in range(n)
    )
    return Forecast(windows.pop(), ENSEMBLE, values)


def finetune_record(window: Window, selected: SelectedNews, news_db: NewsDB, output: Sequence[float] | None = None) -> dict[str, str]:
    """Serialise a window the way the small forecasting model was trained on.

    Values keep three significant digits to limit tokenisation.
    """
    m = window.meta
    hist = ",".join(f"{v:.3g}" for v in window.history)
    minutes = m.granularity.total_seconds() / 60
    freq = f"{minutes:g} minutes" if minutes < 1440 else f"{minutes / 1440:g} day"
    parts = [
        f"Based on the historical data, please predict the value for the next {len(window.target)} points.",
        f"The region for prediction is {m.region}.",
        f"The start date of historical data was on {m.start.date().isoformat()} that is {m.start.strftime('%A')}.",
        f"The data frequency is {freq} per point.",
        f"The date of prediction is on {m.prediction_date.date().isoformat()} that is {m.prediction_date.strftime('%A')}.",
    ]
    for label, cov in (("start date", m.covariates_start), ("prediction date", m.covariates_prediction)):
        if cov:
            desc = "; ".join(f"the {k} is {v}" for k, v in sorted(cov.items()))
            parts.append(f"Covariates of the {label}: {desc}.")
    for _, nid, why in selected.items():
        item = news_db.get(nid)
        if item is None:
            continue
        parts.append(
            f"On {item.date.isoformat()}, in the state of {item.region}, the news was: '{item.text}'. "
            f"Rationality behind it: {why}"
        )
    record = {"instruction": f"The historical data is: {hist}", "input": " ".join(parts)}
    if output is not None:
        record["output"] = ",".join(f"{v:.3g}" for v in output)
    return record


def write_forecasts_csv(path: str | Path, forecasts: Iterable[Forecast], actuals: Mapping[int, Sequence[float]] | None = None) -> None:
    """Write ``window_id,agent_id,step,value`` rows; actual values use agent id ``actual``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["window_id", "agent_id", "step", "value"])
        for wid, values in sorted((actuals or {}).items()):
            for step, v in enumerate(values):
                w.writerow([wid, "actual", step, repr(float(v))])
        for fc in forecasts:
            for step, v in enumerate(fc.values):
                w.writerow([fc.window, fc.agent, step, repr(v)])


def read_forecasts_csv(path: str | Path) -> tuple[dict[str, dict[int, list[float]]], dict[int, list[float]]]:
    """Inverse of :func:`write_forecasts_csv`: ``(by_agent[agent][window], actuals[window])``."""
    by_agent: dict[str, dict[int, dict[int, float]]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            wid, step = int(row["window_id"]), int(row["step"])
            by_agent.setdefault(row["agent_id"], {}).setdefault(wid, {})[step] = float(row["value"])

    def flat(d):
        return {w: [steps[s] for s in sorted(steps)] for w, steps in d.items()}

    actual = flat(by_agent.pop("actual", {}))
    return {a: flat(d) for a, d in by_agent.items()}, actual


class ForecastPipeline:
    """Logic -> selected news -> forecast -> MAPE, with selections memoised.

    Selections are cached per (clauses, window) so ablations that leave a
    logic unchanged never re-query the model.
    """

    def __init__(self, gateway: Gateway, news_db: NewsDB, predictor: Predictor, lookback_days: int = 7):
        self.gateway = gateway
        self.news_db = news_db
        self.predictor = predictor
        self.lookback_days = lookback_days
        self._cache: dict[tuple, SelectedNews] = {}
        self._lock = threading.Lock()

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()

    def select(self, logic: LogicDocument, window: Window, meta: Mapping[str, Any] | None = None) -> SelectedNews:
        key = (logic.clauses, window.id)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        selected = select_news(logic, window, self.news_db, self.gateway, self.lookback_days, meta)
        with self._lock:
            self._cache.setdefault(key, selected)
        return selected

    def run(self, logic: LogicDocument, window: Window, agent: int | str = 0, meta=None) -> tuple[SelectedNews, Forecast]:
        selected = self.select(logic, window, meta)
        return selected, predict(self.predictor, window, selected, self.news_db, agent)

    def window_mapes(self, logic: LogicDocument, windows: Sequence[Window], meta=None) -> list[float]:
        return [compute_errors(w.target, self.run(logic, w, meta=meta)[1].values).mape for w in windows]

    def ir(self, logic: LogicDocument, windows: Sequence[Window], meta=None) -> float:
        """Mean MAPE of ``logic`` over ``windows``."""
        mapes = self.window_mapes(logic, windows, meta)
        return math.fsum(mapes) / len(mapes)
