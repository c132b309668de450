"""Forecast error metrics, min-max normalisation and the HHI concentration index."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np

from .errors import LengthMismatch, NonPositiveScore, ZeroActualForMape


@dataclass(frozen=True)
class ForecastErrors:
    mae: float
    mse: float
    rmse: float
    mape: float  # fraction, not percent

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def compute_errors(actual: Sequence[float], predicted: Sequence[float]) -> ForecastErrors:
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise LengthMismatch(f"actual has shape {a.shape}, predicted {p.shape}")
    if a.size == 0:
        raise LengthMismatch("cannot score empty sequences")
    if np.any(a == 0):
        raise ZeroActualForMape("MAPE undefined when an actual value is 0")
    err = a - p
    mse = float(np.mean(err**2))
    return ForecastErrors(
        mae=float(np.mean(np.abs(err))),
        mse=mse,
        rmse=math.sqrt(mse),
        mape=float(np.mean(np.abs(err) / np.abs(a))),
    )


def mape(actual: Sequence[float], predicted: Sequence[float]) -> float:
    return compute_errors(actual, predicted).mape


def mmn(values: Sequence[float]) -> list[float]:
    """Min-max normalise to [0, 1]; a constant input maps to 0.5 everywhere."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("mmn needs at least one value")
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        return [0.5] * int(v.size)
    return ((v - lo) / (hi - lo)).tolist()


def hhi(cumulative_scores: Sequence[float]) -> float:
    """Herfindahl-Hirschman index of score shares, in ``(0, 1]``."""
    m = np.asarray(cumulative_scores, dtype=float)
    if m.size == 0:
        raise ValueError("hhi needs at least one score")
    if np.any(m <= 0):
        raise NonPositiveScore("cumulative scores must be > 0")
    shares = m / m.sum()
    return float(np.sum(shares**2))


def format_pct(fraction: float, digits: int = 2) -> str:
    """Render a fractional error as a percent string for prompts and reports."""
    return f"{fraction * 100:.{digits}f}%"
