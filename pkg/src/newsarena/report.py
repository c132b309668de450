"""CSV analytics derived from a run ledger alone."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from .ledger import read_ledger
from .metrics import compute_errors, hhi

HEADERS = {
    "scores.csv": ["epoch", "round", "agent", "rank", "top", "ave", "mape", "m_prev", "m"],
    "hhi.csv": ["epoch", "round", "agents", "hhi"],
    "lud.csv": ["epoch", "agent", "lud"],
    "similarity.csv": ["epoch", "similarity"],
    "cpd_mape.csv": ["agent", "profile", "n_all", "n_c", "cld", "cpd", "mean_mape"],
    "metrics.csv": ["epoch", "split", "member", "mae", "mse", "rmse", "mape"],
    "population.csv": ["epoch", "population", "eliminated", "validation_mape"],
}


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build_report(records: Sequence[Mapping[str, Any]]) -> dict[str, list[list[Any]]]:
    """Rows for every report table, keyed by file name."""
    tables: dict[str, list[list[Any]]] = {name: [] for name in HEADERS}
    profiles: dict[int, str] = {}
    mapes: dict[int, list[float]] = defaultdict(list)
    round_scores: dict[tuple, list[float]] = defaultdict(list)
    pubs: dict[int, list[bool]] = defaultdict(list)
    forecasts: dict[tuple, tuple[list[float], list[float]]] = {}
    eliminated: dict[int, list[int]] = {}

    for r in records:
        kind = r["type"]
        if kind == "agent_init":
            profiles[r["agent"]] = r["profile"]
        elif kind == "em":
            tables["scores.csv"].append([r["epoch"], r["round"], r["agent"], r["rank"], r["top"],
                                         r["ave"], r["mape"], r["m_prev"], r["m"]])
            mapes[r["agent"]].append(r["mape"])
            round_scores[(r["epoch"], r["round"])].append(r["m"])
        elif kind == "message":
            if r["delivered"]:
                pubs[r["agent"]].append(bool(r["authentic"]))
        elif kind == "forecast":
            epoch = "final" if r["epoch"] is None else r["epoch"]
            key = (epoch, r["split"], str(r["member"]))
            actual, pred = forecasts.setdefault(key, ([], []))
            actual.extend(r["actual"])
            pred.extend(r["values"])
        elif kind == "elimination":
            eliminated[r["epoch"]] = r["eliminated"]
        elif kind == "epoch_end":
            for agent, value in sorted(r["lud"].items(), key=lambda kv: int(kv[0])):
                tables["lud.csv"].append([r["epoch"], int(agent), value])
            tables["similarity.csv"].append([r["epoch"], r["similarity"]])
            tables["population.csv"].append([
                r["epoch"], r["population"],
                " ".join(str(i) for i in eliminated.get(r["epoch"], [])), r["validation_mape"],
            ])

    for (epoch, round_), scores in sorted(round_scores.items()):
        tables["hhi.csv"].append([epoch, round_, len(scores), hhi(scores)])

    for agent in sorted(set(profiles) | set(pubs)):
        flags = pubs.get(agent, [])
        n_all, n_c = len(flags), sum(flags)
        cld = n_c / n_all if n_all else None
        cpd = 1.0 - cld if cld is not None else None
        mean = math.fsum(mapes[agent]) / len(mapes[agent]) if mapes.get(agent) else None
        tables["cpd_mape.csv"].append([agent, profiles.get(agent, ""), n_all, n_c, cld, cpd, mean])

    def order(key):
        epoch, split, member = key
        return (epoch == "final", epoch if epoch != "final" else 0, split, member != "ensemble",
                int(member) if member.isdigit() else 0)

    for key in sorted(forecasts, key=order):
        actual, pred = forecasts[key]
        e = compute_errors(actual, pred)
        tables["metrics.csv"].append([*key, e.mae, e.mse, e.rmse, e.mape])
    return tables


def render_csv(name: str, rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADERS[name])
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_report(source: str | Path | Sequence[Mapping[str, Any]], out_dir: str | Path) -> dict[str, Path]:
    """Write every table as CSV under ``out_dir``; ``source`` is a ledger path or its records."""
    records = read_ledger(source) if isinstance(source, (str, Path)) else source
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, rows in build_report(records).items():
        path = out / name
        path.write_text(render_csv(name, rows), encoding="utf-8")
        written[name] = path
    return written

