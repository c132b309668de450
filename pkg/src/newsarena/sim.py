"""Offline world for end-to-end runs without any remote service.

A fixed set of news topics is split into ones that move the series and ones
that do not. Synthetic news mentions topic keywords, a simulated model follows
the prompt contracts by keyword matching, and the scripted predictor rewards
selecting news from the moving topics.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections.abc import Iterable
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import prompts
from .agents import HIGH, split_clauses
from .data import NewsDB, derive_seed
from .gateway import ChatRequest, ScriptedBackend
from .prediction import BUCKET_KEYS, ScriptedPredictor
from .reflection import EPSILON_KEEP


@dataclass(frozen=True)
class Topic:
    keyword: str
    rationale: str
    horizon: str  # one of prediction.BUCKETS
    headlines: tuple[str, ...]

    @property
    def clause(self) -> str:
        return f"{self.keyword}: {self.rationale}"


RELEVANT = (
    Topic("heatwave", "extreme heat pushes up air-conditioning load.", "short_term",
          ("A heatwave warning is in force across {region}.", "Residents brace as the heatwave lingers in {region}.")),
    Topic("cold snap", "sudden cold raises heating demand.", "short_term",
          ("A cold snap sends overnight temperatures tumbling in {region}.", "Heaters sell out as a cold snap grips {region}.")),
    Topic("storm", "severe weather damages the network and cuts supply.", "real_time",
          ("A storm brings down power lines in {region}.", "Crews restore supply after a storm in {region}.")),
    Topic("factory", "new industrial sites lift baseline consumption.", "long_term",
          ("A new factory opens its doors in {region}.", "Work begins on a large factory outside the {region} capital.")),
    Topic("public holiday", "offices close and the daily load profile flattens.", "short_term",
          ("Shops prepare for the public holiday weekend in {region}.", "Traffic is light on the public holiday in {region}.")),
    Topic("school term", "school calendars shift weekday demand.", "short_term",
          ("The school term starts next week in {region}.", "Families adjust as the school term ends in {region}.")),
    Topic("electric vehicle", "charging adds evening load.", "long_term",
          ("Electric vehicle sales hit a record in {region}.", "A new electric vehicle charging network launches in {region}.")),
    Topic("population growth", "more households mean more demand.", "long_term",
          ("Census figures show strong population growth in {region}.", "Housing approvals surge with population growth in {region}.")),
)

DECOY = (
    Topic("celebrity", "celebrity events change viewing habits and therefore load.", "real_time",
          ("A celebrity wedding draws crowds in {region}.", "A celebrity chef opens a restaurant in {region}.")),
    Topic("football", "big matches shift household consumption.", "real_time",
          ("The football grand final sells out in {region}.", "A football star signs with a {region} club.")),
    Topic("film festival", "cultural events move people between venues.", "short_term",
          ("The film festival opens with a premiere in {region}.", "Critics praise the film festival lineup in {region}.")),
    Topic("fashion", "fashion trends reflect consumer mood.", "long_term",
          ("Fashion week attracts designers to {region}.", "A fashion label moves its headquarters to {region}.")),
    Topic("stock market", "market sentiment predicts activity.", "long_term",
          ("The stock market rallies on bank earnings.", "Stock market jitters weigh on {region} investors.")),
    Topic("royal visit", "official visits alter city traffic.", "real_time",
          ("A royal visit is announced for {region}.", "Crowds gather for the royal visit in {region}.")),
)

TOPICS = {t.keyword: t for t in RELEVANT + DECOY}

_NEWS_LINE = re.compile(r"^\[(\w+)\]\s+(\S+)\s+(\S*):\s*(.*)$")


def clause_keyword(clause: str) -> str:
    return clause.split(":", 1)[0].strip().lower()


def topic_of(text: str) -> Topic | None:
    low = text.lower()
    for t in RELEVANT + DECOY:
        if t.keyword in low:
            return t
    return None


def relevant_ids(news_db: NewsDB) -> set[str]:
    keys = [t.keyword for t in RELEVANT]
    return {it.id for it in news_db if any(k in it.text.lower() for k in keys)}


def generate_series(path: str | Path, days: int = 147, start: date = date(2019, 1, 1), seed: int = 0) -> Path:
    """Daily load with yearly and weekly cycles plus noise; always positive."""
    rng = np.random.default_rng(derive_seed(seed, 1))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value", "temperature"])
        for t in range(days):
            day = start + timedelta(days=t)
            temp = 24 + 6 * math.cos(2 * math.pi * t / 365) + rng.normal(0, 2)
            load = 5000 + 40 * (temp - 20) ** 2 - (300 if day.weekday() >= 5 else 0) + rng.normal(0, 80)
            w.writerow([day.isoformat(), f"{load:.1f}", f"{temp:.1f}"])
    return path


def generate_news(
    path: str | Path,
    first: date,
    last: date,
    regions: Iterable[str] = ("NSW", "VIC", "QLD", "SA"),
    per_day: int = 2,
    seed: int = 0,
) -> Path:
    rng = np.random.default_rng(derive_seed(seed, 2))
    regions = list(regions)
    topics = RELEVANT + DECOY
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        day = first
        while day <= last:
            for _ in range(per_day):
                topic = topics[int(rng.integers(len(topics)))]
                region = regions[int(rng.integers(len(regions)))]
                headline = topic.headlines[int(rng.integers(len(topic.headlines)))].format(region=region)
                text = f"{headline} Reported on {day.strftime('%d %B %Y')}."
                fh.write(json.dumps({"date": day.isoformat(), "region": region, "text": text}) + "\n")
            day += timedelta(days=1)
    return path


def generate_dataset(directory: str | Path, seed: int = 0, days: int = 147, lookback_days: int = 7) -> tuple[Path, Path]:
    directory = Path(directory)
    start = date(2019, 1, 1)
    series = generate_series(directory / "series.csv", days, start, seed)
    news = generate_news(directory / "news.jsonl", start - timedelta(days=lookback_days),
                         start + timedelta(days=days), seed=seed)
    return series, news


def _bullets(clauses: Iterable[str]) -> str:
    return "\n".join(f"- {c}" for c in clauses)


class SimulatedLLM:
    """Answers the catalog prompts the way a cooperative model would.

    Use as the ``responder`` of a :class:`ScriptedBackend`. Choices that need
    randomness draw from ``derive_seed(seed, epoch, round, agent)``, so answers
    do not depend on call order.
    """

    def __init__(self, seed: int = 0, relevant_per_agent: int = 2, decoys_per_agent: int = 1,
                 epsilon_keep: float = EPSILON_KEEP):
        self.seed = seed
        self.relevant_per_agent = relevant_per_agent
        self.decoys_per_agent = decoys_per_agent
        self.epsilon_keep = epsilon_keep

    def _rng(self, request: ChatRequest, salt: int) -> np.random.Generator:
        m = request.meta
        coords = [m.get("epoch") or 0, m.get("round") or 0, m.get("agent") or 0]
        return np.random.default_rng(derive_seed(self.seed, salt, *coords))

    def __call__(self, request: ChatRequest) -> str | None:
        template = (request.template_id or "").removesuffix("_alt")
        handler = getattr(self, f"_{template}", None)
        return None if handler is None else handler(request, request.meta.get("bindings", {}))

    def _initial_logic(self, request, bindings):
        rng = self._rng(request, 10)
        rel = rng.choice(len(RELEVANT), self.relevant_per_agent, replace=False)
        dec = rng.choice(len(DECOY), self.decoys_per_agent, replace=False)
        picked = [RELEVANT[int(i)].clause for i in sorted(rel)] + [DECOY[int(i)].clause for i in sorted(dec)]
        return _bullets(picked)

    def _filter_news(self, request, bindings):
        keys = [clause_keyword(c) for c in split_clauses(bindings["logic"])]
        buckets: dict[str, list] = {k: [] for k in BUCKET_KEYS}
        for line in bindings["news"].splitlines():
            m = _NEWS_LINE.match(line.strip())
            if not m:
                continue
            nid, day, region, text = m.groups()
            low = text.lower()
            hit = next((k for k in keys if k and k in low), None)
            if hit is None:
                continue
            topic = TOPICS.get(hit)
            bucket = topic.horizon if topic else "short_term"
            buckets[bucket].append({"id": nid, "news": text, "region": region, "time": day,
                                    "rationality": topic.rationale if topic else "matches the logic"})
        if not any(buckets.values()):
            return '{"answer": "no"}'
        return json.dumps({BUCKET_KEYS[b]: items for b, items in buckets.items()})

    def _ia_publish(self, request, bindings):
        own = split_clauses(bindings["initial_logic"])
        profile = bindings["competitive_profile"]
        high = profile in (prompts.PROFILE_SENTENCES[v][HIGH] for v in prompts.PROFILE_SENTENCES)
        if not high:
            return (
                "1. Thought Process\n- Decide whether to disclose your logic: true\n"
                "- If you disclose, indicate whether it includes misleading or false insights: false\n"
                "Sharing everything builds trust.\n\n"
                f"2. Disclosed Logic\n- Real Logic:\n{_bullets(own)}\n- False Logic: none\n\n"
                f"3. Final Disclosed Logic\n{_bullets(own)}\nTARGETS: all\n"
            )
        owned = {clause_keyword(c) for c in own}
        real = [c for c in own if clause_keyword(c) not in {t.keyword for t in RELEVANT}]
        unused = [t for t in DECOY if t.keyword not in owned]
        fake = unused[int(self._rng(request, 20).integers(len(unused)))].clause if unused else DECOY[0].clause
        return (
            "1. Thought Process\n- Decide whether to disclose your logic: true\n"
            "- If you disclose, indicate whether it includes misleading or false insights: true\n"
            "Keep the core insight private and point competitors elsewhere.\n\n"
            f"2. Disclosed Logic\n- Real Logic:\n{_bullets(real) or 'none'}\n- False Logic:\n- {fake}\n\n"
            f"3. Final Disclosed Logic\n{_bullets(real + [fake])}\nTARGETS: all\n"
        )

    def _reflection_improve(self, request, bindings):
        clauses = split_clauses(bindings["your_logic"])
        for line in bindings["all_opponent_logic"].splitlines():
            if line.strip().startswith("- "):
                clauses.extend(split_clauses(line))
        merged = list(dict.fromkeys(clauses))
        return (
            "(1) Thought Process:\nCompetitors mention factors I had not considered; I adopt them "
            "and let the evaluation weed out the useless ones.\n\n"
            f"(2) Final Adjusted Logic:\n{_bullets(merged)}\n"
        )

    def _remove_bad_logic(self, request, bindings):
        update = json.loads(bindings["updateContent"])
        gap = float(request.meta.get("gap", 0.0))
        keep = abs(gap) < self.epsilon_keep
        return json.dumps({
            "content": update["content"],
            "conclusion": "yes" if keep else "no",
            "reason": "the effect is negligible" if keep else "removing it improves the forecast",
            "logic": bindings["updatedLogic"],
        })


def simulated_backend(seed: int = 0, epsilon_keep: float = EPSILON_KEEP) -> ScriptedBackend:
    return ScriptedBackend(responder=SimulatedLLM(seed, epsilon_keep=epsilon_keep))


def oracle_predictor(news_db: NewsDB, base: float = 0.12, gain: float = 0.004, penalty: float = 0.003) -> ScriptedPredictor:
    return ScriptedPredictor(relevant_ids(news_db), base=base, gain=gain, penalty=penalty)
