"""Round scoring, cumulative-score update and elimination."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass
from decimal import Decimal

from .agents import Agent
from .errors import AllWouldBeEliminated, KeyMismatch, TooFewAgents
from .metrics import mmn


@dataclass(frozen=True)
class EmScore:
    agent: int
    rank: int
    top: float
    ave: float
    mape: float
    top_undefined: bool = False  # best MAPE was 0, ``top`` holds the raw MAPE

    def as_dict(self):
        return asdict(self)


def compute_em(mapes: Mapping[int, float]) -> list[EmScore]:
    """Rank agents by MAPE and measure relative gaps to the best and the mean.

    ``top = (m - best) / best`` and ``ave = (m - mean) / mean``; a negative
    ``ave`` means better than average. Ties rank by ascending agent id.
    Returned in rank order.
    """
    if len(mapes) < 2:
        raise TooFewAgents(f"scoring needs at least two agents, got {len(mapes)}")
    for k, v in mapes.items():
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"agent {k}: MAPE must be finite and >= 0, got {v}")
    order = sorted(mapes, key=lambda k: (mapes[k], k))
    best = mapes[order[0]]
    # an all-equal round must give ave == 0 exactly, which fsum/n does not guarantee
    mean = best if best == max(mapes.values()) else math.fsum(mapes.values()) / len(mapes)
    scores = []
    for rank, k in enumerate(order, start=1):
        m = mapes[k]
        if best > 0:
            top, undefined = (m - best) / best, False
        else:
            top, undefined = m, True
        ave = (m - mean) / mean if mean > 0 else 0.0
        scores.append(EmScore(agent=k, rank=rank, top=top, ave=ave, mape=m, top_undefined=undefined))
    return scores


def update_cs(m_prev: Mapping[int, float], mapes: Mapping[int, float]) -> dict[int, float]:
    """``M' = M + M * (1 - MMN(mape))`` with MMN taken over this round's agents."""
    if set(m_prev) != set(mapes):
        raise KeyMismatch(f"score keys {sorted(m_prev)} differ from MAPE keys {sorted(mapes)}")
    keys = sorted(mapes)
    for k in keys:
        if not m_prev[k] > 0:
            raise ValueError(f"agent {k}: cumulative score must be > 0")
    norm = dict(zip(keys, mmn([mapes[k] for k in keys])))
    return {k: m_prev[k] + m_prev[k] * (1.0 - norm[k]) for k in keys}


def elimination_count(n: int, alpha: float) -> int:
    """``floor((1 - alpha) * n)`` evaluated on the decimal value of ``alpha``.

    Binary floats would give floor((1 - 0.9) * 10) == 0.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return math.floor((1 - Decimal(repr(float(alpha)))) * n)


def apply_sf(
    agents: Sequence[Agent], alpha: float, count: int | None = None
) -> tuple[list[Agent], list[Agent]]:
    """Split living agents into (survivors, eliminated) by cumulative score.

    The lowest-score agents go first; among equal scores the one with the
    higher last-round MAPE, then the higher id, is eliminated first. ``count``
    overrides the number eliminated. Input objects are not modified.
    """
    living = [a for a in agents if a.alive]
    if len(living) < 2:
        raise TooFewAgents("elimination needs at least two living agents")
    k = elimination_count(len(living), alpha) if count is None else count
    if k >= len(living):
        raise AllWouldBeEliminated(f"eliminating {k} of {len(living)} agents leaves nobody")

    def worst_first(a: Agent):
        last = a.last_mape if a.last_mape is not None else 0.0
        return (a.cumulative_score, -last, -a.id)

    ranked = sorted(living, key=worst_first)
    out = {a.id for a in ranked[:k]}
    survivors = [a for a in living if a.id not in out]
    eliminated = [a for a in ranked[:k]]
    return survivors, eliminated
