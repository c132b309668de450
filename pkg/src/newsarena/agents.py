"""Agent state, logic documents and collaboration accounting."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any

import numpy as np

from .errors import NoPublications

HIGH = "high_competitive"
LOW = "low_competitive"
BROADCAST = "all"

_MARKER = re.compile(r"^\s*(?:[-*•+]|\(?\d{1,3}[.)]|\(?[a-z][.)]|#{1,6})\s+")
_SENTENCE = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9\"'(])")
_SPACE = re.compile(r"\s+")


def normalize_clause(text: str) -> str:
    return _SPACE.sub(" ", text.replace("**", "")).strip()


def split_clauses(text: str) -> list[str]:
    """Split free text into unique clauses.

    Lines are stripped of leading list markers, then split at sentence
    boundaries; whitespace is collapsed and case preserved. The first
    occurrence of a repeated clause wins.
    """
    seen: dict[str, None] = {}
    for line in text.splitlines():
        line = normalize_clause(line)
        while True:
            stripped = _MARKER.sub("", line, count=1)
            if stripped == line:
                break
            line = stripped
        for sentence in _SENTENCE.split(line):
            clause = normalize_clause(sentence)
            if clause and clause not in seen:
                seen[clause] = None
    return list(seen)


@dataclass(frozen=True)
class LogicDocument:
    clauses: tuple[str, ...] = ()
    version: int = 0
    provenance: str = "initial"  # "initial" | "reflected"

    def __post_init__(self):
        if len(set(self.clauses)) != len(self.clauses):
            raise ValueError("logic clauses must be unique")

    @classmethod
    def from_text(cls, text: str, version: int = 0, provenance: str = "initial") -> "LogicDocument":
        return cls(tuple(split_clauses(text)), version, provenance)

    def to_text(self) -> str:
        return "\n".join(f"- {c}" for c in self.clauses)

    def without(self, removed) -> "LogicDocument":
        drop = set(removed)
        return LogicDocument(tuple(c for c in self.clauses if c not in drop), self.version, self.provenance)

    def __contains__(self, clause: object) -> bool:
        return clause in self.clauses

    def __len__(self) -> int:
        return len(self.clauses)

    def as_dict(self) -> dict[str, Any]:
        return {"clauses": list(self.clauses), "version": self.version, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "LogicDocument":
        return cls(tuple(d["clauses"]), int(d["version"]), d["provenance"])


@dataclass(frozen=True)
class PublicationRecord:
    epoch: int
    round: int
    targets: tuple[int, ...] | str
    authentic: bool
    published_text: str

    def __post_init__(self):
        if self.targets != BROADCAST and not self.targets:
            raise ValueError("a publication needs at least one target")

    def as_dict(self) -> dict[str, Any]:
        targets = self.targets if self.targets == BROADCAST else list(self.targets)
        return {"epoch": self.epoch, "round": self.round, "targets": targets,
                "authentic": self.authentic, "published_text": self.published_text}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PublicationRecord":
        targets = d["targets"] if d["targets"] == BROADCAST else tuple(d["targets"])
        return cls(d["epoch"], d["round"], targets, bool(d["authentic"]), d["published_text"])


@dataclass
class Agent:
    id: int
    profile: str
    logic: LogicDocument = field(default_factory=LogicDocument)
    cumulative_score: float = 1.0
    alive: bool = True
    publication_log: list[PublicationRecord] = field(default_factory=list)
    last_mape: float | None = None

    def set_logic(self, logic: LogicDocument) -> None:
        if logic.version <= self.logic.version and self.logic.clauses:
            raise ValueError(f"agent {self.id}: logic version must increase ({self.logic.version} -> {logic.version})")
        self.logic = logic

    def as_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "profile": self.profile,
            "logic": self.logic.as_dict(),
            "cumulative_score": self.cumulative_score,
            "alive": self.alive,
            "publication_log": [p.as_dict() for p in self.publication_log],
            "last_mape": self.last_mape,
        }


def round_half_up(x: float) -> int:
    return int(Decimal(str(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def init_agents(count: int, ci: float, seed: int) -> list[Agent]:
    """Create ``count`` agents (ids from 1); ``round(ci * count)`` of them are highly competitive."""
    if count < 2:
        raise ValueError("need at least two agents")
    if not 0.0 <= ci <= 1.0:
        raise ValueError("ci must lie in [0, 1]")
    n_high = round_half_up(Decimal(str(ci)) * count)
    high = set(np.random.default_rng(seed).permutation(count)[:n_high].tolist())
    return [Agent(id=i + 1, profile=HIGH if i in high else LOW) for i in range(count)]


def cld(agent: Agent) -> float:
    """Collaborative degree: share of the agent's publications that were authentic."""
    n_all = len(agent.publication_log)
    if n_all == 0:
        raise NoPublications(f"agent {agent.id} has not published anything")
    n_c = sum(1 for p in agent.publication_log if p.authentic)
    return n_c / n_all


def cpd(agent: Agent) -> float:
    return 1.0 - cld(agent)

