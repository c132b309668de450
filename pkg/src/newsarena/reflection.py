"""Opponent-oriented reflection with ablation-checked logic updates.

Stage 1 asks the model for an improved logic after reading the inbox. Stage 2
diffs the candidate against the previous logic and scores every added clause
by removing it and re-running the prediction pipeline on the same sampled
windows. Stage 3 keeps every good clause and re-judges the bad ones, either
through the model or with a fixed gap threshold.
"""

from __future__ import annotations

import json
import re
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .agents import Agent, LogicDocument, split_clauses
from .communication import DisclosureMessage, format_inbox, standing_bindings, standing_preamble
from .data import Window
from .errors import MalformedJson, MalformedReflection
from .evaluation import EmScore
from .gateway import Gateway, parse_json_reply
from .metrics import format_pct
from .prediction import ForecastPipeline, format_news_lines

PENDING, GOOD, BAD = "pending", "good", "bad"
EPSILON_KEEP = 0.001

REPAIR_REFLECTION = "Your reply must end with a \"Final Adjusted Logic\" section listing the refined logic."

_ADJUSTED = re.compile(r"^[\W\d_]*final\s+adjusted\s+logic\W*?(?::|$)(.*)$", re.I | re.M)


@dataclass(frozen=True)
class Delta:
    clause: str
    classification: str = PENDING
    ir_with: float | None = None
    ir_without: float | None = None
    windows: tuple[int, ...] = ()

    @property
    def gap(self) -> float:
        return self.ir_without - self.ir_with

    def as_dict(self) -> dict[str, Any]:
        return {"clause": self.clause, "classification": self.classification,
                "ir_with": self.ir_with, "ir_without": self.ir_without, "windows": list(self.windows)}


@dataclass(frozen=True)
class ReflectionOutcome:
    candidate: LogicDocument
    deltas: tuple[Delta, ...]
    removed: tuple[Delta, ...]
    final: LogicDocument
    judgements: tuple[dict[str, Any], ...] = ()

    def as_dict(self) -> dict[str, Any]:
        return {
            "candidate": self.candidate.as_dict(),
            "deltas": [d.as_dict() for d in self.deltas],
            "removed": [d.clause for d in self.removed],
            "final": self.final.as_dict(),
            "judgements": list(self.judgements),
        }


@dataclass(frozen=True)
class TrendContext:
    """What the stage-3 judge sees besides the clause itself."""

    background: str
    history: tuple[float, ...]
    actual: tuple[float, ...]
    related_news: dict[str, str] = field(default_factory=dict)


def parse_adjusted_logic(text: str) -> list[str]:
    matches = list(_ADJUSTED.finditer(text))
    if not matches:
        raise MalformedReflection("reply has no 'Final Adjusted Logic' section")
    last = matches[-1]
    clauses = split_clauses(last.group(1) + text[last.end():])
    if not clauses:
        raise MalformedReflection("the 'Final Adjusted Logic' section is empty")
    return clauses


def stage1_update(
    agent: Agent,
    inbox: Sequence[DisclosureMessage],
    scores: Sequence[EmScore],
    gateway: Gateway,
    *,
    epoch: int = 0,
    round_: int = 0,
    mie_mode: str = "rank",
) -> LogicDocument:
    """Ask for a refined logic given the opponents' disclosures."""
    if not agent.alive:
        raise ValueError(f"agent {agent.id} is eliminated and cannot reflect")
    standing = standing_bindings(scores, agent.id)
    request = gateway.request(
        "reflection_improve",
        {
            "total": standing["total"],
            "rank": standing["rank"],
            "your_logic": agent.logic.to_text(),
            "all_opponent_logic": format_inbox(inbox),
        },
        preamble=standing_preamble(scores, agent.id, mie_mode),
        meta={"epoch": epoch, "round": round_, "agent": agent.id},
    )
    clauses = gateway.complete_parsed(request, parse_adjusted_logic, REPAIR_REFLECTION, MalformedReflection).parsed
    return LogicDocument(tuple(clauses), agent.logic.version + 1, "reflected")


def diff_logic(candidate: LogicDocument, previous: LogicDocument) -> list[Delta]:
    """Clauses added by ``candidate``, in candidate order."""
    before = set(previous.clauses)
    return [Delta(c) for c in candidate.clauses if c not in before]


def sample_windows(windows: Sequence[Window], k: int, seed: int) -> list[Window]:
    """Pick ``min(k, len(windows))`` windows without replacement, returned in id order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not windows:
        raise ValueError("no windows to sample from")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(windows), size=min(k, len(windows)), replace=False)
    return sorted((windows[int(i)] for i in idx), key=lambda w: w.id)


def classify_delta(
    delta: Delta,
    candidate: LogicDocument,
    eval_windows: Sequence[Window],
    pipeline: ForecastPipeline,
    ir_with: float | None = None,
    meta: dict[str, Any] | None = None,
) -> Delta:
    """Score ``delta`` by ablation: good iff removing it makes MAPE strictly worse."""
    if not eval_windows:
        raise ValueError("classification needs at least one window")
    if ir_with is None:
        ir_with = pipeline.ir(candidate, eval_windows, meta)
    ir_without = pipeline.ir(candidate.without([delta.clause]), eval_windows, meta)
    label = GOOD if ir_without > ir_with else BAD
    return replace(delta, classification=label, ir_with=ir_with, ir_without=ir_without,
                   windows=tuple(w.id for w in eval_windows))


def classify_deltas(
    deltas: Sequence[Delta],
    candidate: LogicDocument,
    eval_windows: Sequence[Window],
    pipeline: ForecastPipeline,
    meta: dict[str, Any] | None = None,
) -> list[Delta]:
    if not deltas:
        return []
    ir_with = pipeline.ir(candidate, eval_windows, meta)
    return [classify_delta(d, candidate, eval_windows, pipeline, ir_with, meta) for d in deltas]


def related_news(clause: str, candidate: LogicDocument, windows: Sequence[Window], pipeline: ForecastPipeline, meta=None) -> str:
    """News picked under ``candidate`` but not once ``clause`` is removed."""
    ablated = candidate.without([clause])
    ids: dict[str, None] = {}
    for w in windows:
        without = set(pipeline.select(ablated, w, meta).ids())
        for nid in pipeline.select(candidate, w, meta).ids():
            if nid not in without:
                ids.setdefault(nid, None)
    items = [pipeline.news_db.get(i) for i in ids]
    return format_news_lines([it for it in items if it is not None]) or "(none)"


def _parse_conclusion(text: str) -> bool:
    """True when the judge keeps the clause."""
    parsed = parse_json_reply(text)
    if not isinstance(parsed, dict) or "conclusion" not in parsed:
        raise MalformedJson("judgement lacks a 'conclusion' field", text)
    value = str(parsed["conclusion"]).strip().lower()
    if value not in ("yes", "no", "true", "false"):
        raise MalformedJson(f"conclusion must be yes or no, got {value!r}", text)
    return value in ("yes", "true")


def stage3_finalize(
    candidate: LogicDocument,
    deltas: Sequence[Delta],
    context: TrendContext | None = None,
    gateway: Gateway | None = None,
    *,
    epsilon_keep: float = EPSILON_KEEP,
    meta: dict[str, Any] | None = None,
) -> ReflectionOutcome:
    """Keep good clauses and re-judge bad ones.

    With a gateway every bad clause goes to the judge prompt; without one a
    bad clause survives only when ``|ir_without - ir_with| < epsilon_keep``.
    """
    if any(d.classification == PENDING for d in deltas):
        raise ValueError("all deltas must be classified before stage 3")
    removed: list[Delta] = []
    judgements: list[dict[str, Any]] = []
    for d in deltas:
        if d.classification == GOOD:
            continue
        if gateway is None:
            keep = abs(d.gap) < epsilon_keep
            judgements.append({"clause": d.clause, "judge": "threshold", "keep": keep})
        else:
            if context is None:
                raise ValueError("the model judge needs a trend context")
            update = {
                "content": d.clause,
                "eval": d.classification,
                "evalContent": f"removing this update changes MAPE by {format_pct(-d.gap)} "
                               f"({format_pct(d.ir_with)} -> {format_pct(d.ir_without)})",
            }
            request = gateway.request(
                "remove_bad_logic",
                {
                    "updateContent": json.dumps(update, ensure_ascii=False),
                    "background": context.background,
                    "relatedNews": context.related_news.get(d.clause, "(none)"),
                    "historyTimeSeries": ", ".join(f"{v:g}" for v in context.history),
                    "actualValue": ", ".join(f"{v:g}" for v in context.actual),
                    "updatedLogic": candidate.to_text(),
                },
                expected_format="json",
                meta={**(meta or {}), "clause": d.clause, "gap": d.gap},
            )
            keep = gateway.complete_parsed(request, _parse_conclusion, "Return valid JSON only", MalformedJson).parsed
            judgements.append({"clause": d.clause, "judge": "model", "keep": keep})
        if not keep:
            removed.append(d)
    final = candidate.without(d.clause for d in removed)
    return ReflectionOutcome(candidate, tuple(deltas), tuple(removed), final, tuple(judgements))


def reflect(
    agent: Agent,
    inbox: Sequence[DisclosureMessage],
    scores: Sequence[EmScore],
    gateway: Gateway,
    pipeline: ForecastPipeline,
    eval_windows: Sequence[Window],
    *,
    judge: str = "model",
    epsilon_keep: float = EPSILON_KEEP,
    epoch: int = 0,
    round_: int = 0,
    mie_mode: str = "rank",
) -> ReflectionOutcome:
    """All three stages for one agent. ``judge`` is ``"model"`` or ``"threshold"``."""
    if judge not in ("model", "threshold"):
        raise ValueError(f"unknown judge {judge!r}")
    meta = {"epoch": epoch, "round": round_, "agent": agent.id}
    candidate = stage1_update(agent, inbox, scores, gateway, epoch=epoch, round_=round_, mie_mode=mie_mode)
    deltas = classify_deltas(diff_logic(candidate, agent.logic), candidate, eval_windows, pipeline, meta)
    context = None
    if judge == "model" and any(d.classification == BAD for d in deltas):
        standing = standing_bindings(scores, agent.id)
        first = eval_windows[0]
        context = TrendContext(
            background=(
                f"Epoch {epoch}, round {round_}: you ranked {standing['rank']} of {standing['total']}; "
                f"the best opponent scored {standing['top_value']}."
            ),
            history=first.history,
            actual=first.target,
            related_news={
                d.clause: related_news(d.clause, candidate, eval_windows, pipeline, meta)
                for d in deltas if d.classification == BAD
            },
        )
    outcome = stage3_finalize(
        candidate, deltas, context, gateway if judge == "model" else None,
        epsilon_keep=epsilon_keep, meta=meta,
    )
    return outcome
