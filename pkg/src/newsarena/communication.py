"""Logic disclosure between agents and message routing."""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from . import prompts
from .agents import BROADCAST, Agent
from .errors import DeadTarget, MalformedDisclosure
from .evaluation import EmScore
from .gateway import Gateway
from .ledger import RunLedger
from .metrics import format_pct

REPAIR_DISCLOSURE = (
    "Your reply must contain the three sections \"Thought Process\", \"Disclosed Logic\" and "
    "\"Final Disclosed Logic\", followed by the TARGETS line."
)

_FINAL = re.compile(r"^[\W\d_]*final\s+disclosed\s+logic\W*?(?::|$)(.*)$", re.I | re.M)
_REAL = re.compile(r"real\s+logic\s*\**\s*:", re.I)
_FALSE = re.compile(r"false\s+logic\s*\**\s*:", re.I)
_TARGETS = re.compile(r"^\W*targets\s*:\s*(.*)$", re.I | re.M)
_EMPTY_SECTION = {"", "none", "n/a", "na", "no", "nothing", "-", "null", "not applicable"}


@dataclass(frozen=True)
class DisclosureMessage:
    sender: int
    round: int
    targets: tuple[int, ...] | str
    body: str
    declared_real: str = ""
    declared_false: str = ""
    epoch: int = 0

    def __post_init__(self):
        if not self.body.strip():
            raise MalformedDisclosure("disclosure body is empty")
        if self.targets != BROADCAST:
            if not self.targets:
                raise ValueError("targets must be non-empty or broadcast")
            if self.sender in self.targets:
                raise ValueError("a sender cannot target itself")

    @property
    def authentic(self) -> bool:
        return not self.declared_false

    def as_dict(self) -> dict[str, Any]:
        return {
            "sender": self.sender,
            "targets": self.targets if self.targets == BROADCAST else list(self.targets),
            "body": self.body,
            "declared_real": self.declared_real,
            "declared_false": self.declared_false,
            "authentic": self.authentic,
        }


@dataclass(frozen=True)
class ParsedDisclosure:
    body: str
    declared_real: str
    declared_false: str
    targets: tuple[int, ...] | str


def _section_text(text: str) -> str:
    lines = [ln.strip().strip("*").strip() for ln in text.strip().splitlines()]
    cleaned = "\n".join(ln for ln in lines if ln.strip("-•+ "))
    if cleaned.strip(" .").lower() in _EMPTY_SECTION:
        return ""
    return cleaned


def parse_targets(raw: str) -> tuple[int, ...] | str:
    raw = raw.strip().strip("`*").strip()
    if raw.lower() in ("all", "everyone", "broadcast", ""):
        return BROADCAST
    ids = [int(x) for x in re.findall(r"\d+", raw)]
    if not ids:
        raise MalformedDisclosure(f"unreadable TARGETS line: {raw!r}")
    return tuple(dict.fromkeys(ids))


def parse_disclosure(text: str) -> ParsedDisclosure:
    """Split a disclosure reply into its public body and private declarations."""
    finals = list(_FINAL.finditer(text))
    if not finals:
        raise MalformedDisclosure("reply has no 'Final Disclosed Logic' section")
    final = finals[-1]
    head, tail = text[: final.start()], final.group(1) + text[final.end():]

    targets: tuple[int, ...] | str = BROADCAST
    tmatch = list(_TARGETS.finditer(tail))
    if tmatch:
        targets = parse_targets(tmatch[-1].group(1))
        tail = tail[: tmatch[-1].start()] + tail[tmatch[-1].end():]
    body = _section_text(tail)
    if not body:
        raise MalformedDisclosure("the 'Final Disclosed Logic' section is empty")

    real = false = ""
    fm = _FALSE.search(head)
    rm = _REAL.search(head)
    if rm:
        end = fm.start() if fm and fm.start() > rm.end() else len(head)
        real = _section_text(head[rm.end():end])
    if fm:
        false = _section_text(head[fm.end():])
    return ParsedDisclosure(body, real, false, targets)


def standing_bindings(scores: Sequence[EmScore], agent: int) -> dict[str, Any]:
    """Rank, total and the opponents' best and mean MAPE as prompt text."""
    own = next(s for s in scores if s.agent == agent)
    others = [s for s in scores if s.agent != agent]
    best = min(others, key=lambda s: (s.mape, s.agent))
    mean = math.fsum(s.mape for s in others) / len(others)

    def gap(ref: float) -> str:
        if ref == 0:
            return ""
        return f" (your MAPE differs from it by {(own.mape - ref) / ref:+.1%})"

    return {
        "rank": own.rank,
        "total": len(scores),
        "top_value": f"MAPE {format_pct(best.mape)}{gap(best.mape)}",
        "ave_value": f"MAPE {format_pct(mean)}{gap(mean)}",
        "average_value": f"MAPE {format_pct(mean)}{gap(mean)}",
    }


def standing_preamble(scores: Sequence[EmScore], agent: int, mie_mode: str) -> str:
    if mie_mode not in prompts.MIE_TEMPLATES:
        raise ValueError(f"unknown mie_mode {mie_mode!r}")
    template = prompts.MIE_TEMPLATES[mie_mode]
    if template is None:
        return ""
    return prompts.render(template, standing_bindings(scores, agent))


def targets_contract(living: Iterable[int], sender: int) -> str:
    others = ", ".join(str(i) for i in sorted(living) if i != sender)
    return (
        "After the final disclosed logic, end your reply with one line `TARGETS: all` to post it "
        "to every participant, or `TARGETS: <comma-separated participant ids>` to send it only to "
        f"selected participants. The other participants are: {others}."
    )


def publish(
    agent: Agent,
    scores: Sequence[EmScore],
    living: Sequence[int],
    gateway: Gateway,
    *,
    epoch: int = 0,
    round_: int = 0,
    mie_mode: str = "rank",
) -> DisclosureMessage:
    """Have ``agent`` compose its disclosure for this round."""
    if not agent.alive:
        raise ValueError(f"agent {agent.id} is eliminated and cannot publish")
    standing = standing_bindings(scores, agent.id)
    variant = gateway.prompt_variant
    bindings = {
        "total": standing["total"],
        "rank": standing["rank"],
        "competitive_profile": prompts.PROFILE_SENTENCES[variant][agent.profile],
        "initial_logic": agent.logic.to_text(),
        "name": f"Participant {agent.id}",  # only the paraphrased template uses it
    }
    request = gateway.request(
        "ia_publish",
        bindings,
        preamble=standing_preamble(scores, agent.id, mie_mode),
        suffix=targets_contract(living, agent.id),
        meta={"epoch": epoch, "round": round_, "agent": agent.id, "profile": agent.profile},
    )
    parsed: ParsedDisclosure = gateway.complete_parsed(
        request, parse_disclosure, REPAIR_DISCLOSURE, MalformedDisclosure
    ).parsed

    targets = parsed.targets
    if targets != BROADCAST:
        alive = set(living)
        kept = tuple(t for t in targets if t in alive and t != agent.id)
        dropped = [t for t in targets if t not in kept]
        if dropped and gateway.ledger is not None:
            gateway.ledger.warn(f"ignoring invalid targets {dropped}", epoch, round_, agent.id)
        targets = kept or BROADCAST
    return DisclosureMessage(
        sender=agent.id,
        round=round_,
        targets=targets,
        body=parsed.body,
        declared_real=parsed.declared_real,
        declared_false=parsed.declared_false,
        epoch=epoch,
    )


def expand_targets(message: DisclosureMessage, living: Iterable[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(delivered, dead)`` recipient ids for ``message`` among ``living``."""
    alive = sorted(set(living))
    if message.targets == BROADCAST:
        return tuple(i for i in alive if i != message.sender), ()
    delivered = tuple(t for t in message.targets if t in alive and t != message.sender)
    dead = tuple(t for t in message.targets if t not in alive)
    return delivered, dead


def route(
    messages: Sequence[DisclosureMessage],
    living: Sequence[int],
    ledger: RunLedger | None = None,
) -> dict[int, list[DisclosureMessage]]:
    """Deliver messages; inboxes list messages by ascending sender id.

    Targets that are no longer alive are dropped with a ledger warning.
    """
    alive = set(living)
    inboxes: dict[int, list[DisclosureMessage]] = {i: [] for i in sorted(alive)}
    for msg in sorted(messages, key=lambda m: m.sender):
        if msg.sender not in alive:
            raise DeadTarget(f"sender {msg.sender} is not alive")
        delivered, dead = expand_targets(msg, alive)
        if dead and ledger is not None:
            ledger.warn(f"message from {msg.sender} names eliminated targets {list(dead)}",
                        msg.epoch, msg.round, msg.sender)
        for t in delivered:
            inboxes[t].append(msg)
    return inboxes


def format_inbox(inbox: Sequence[DisclosureMessage]) -> str:
    if not inbox:
        return "(no competitor disclosed any logic to you this round)"
    return "\n\n".join(f"Participant {m.sender}:\n{m.body}" for m in inbox)


def inbox_sizes(inboxes: Mapping[int, Sequence[DisclosureMessage]]) -> int:
    return sum(len(v) for v in inboxes.values())
