"""Round and epoch state machine, run configuration, replay and resume."""

from __future__ import annotations

import dataclasses
import json
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import sim
from .agents import BROADCAST, Agent, LogicDocument, PublicationRecord, init_agents
from .communication import expand_targets, publish, route
from .data import (
    NewsDB,
    SeriesSchema,
    Window,
    chronological_split,
    derive_seed,
    load_news,
    load_series,
    make_windows,
    split_rounds,
)
from .errors import ArenaError, ConfigInvalid, DataUnloadable, LedgerCorrupt, TooFewAgents
from .evaluation import apply_sf, compute_em, update_cs
from .gateway import Gateway, HttpBackend, ScriptedBackend
from .ledger import RunLedger, read_ledger
from .logic_metrics import HttpEmbedder, ScriptedEmbedder, lud, mean_pairwise_similarity
from .metrics import compute_errors, hhi
from .prediction import (
    ENSEMBLE,
    Forecast,
    ForecastPipeline,
    PersistencePredictor,
    RemotePredictor,
    ScriptedPredictor,
    aggregate,
)
from .reflection import reflect, sample_windows

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

LLM_BACKENDS = ("simulated", "scripted", "http")
EMBED_BACKENDS = ("scripted", "http")
PREDICTORS = ("scripted", "persistence", "remote")
MIE_MODES = ("rank", "rank_top", "rank_ave", "rank_top_ave")
_PATH_FIELDS = ("series_path", "news_path", "scripted_table", "relevant_news")


@dataclass
class RunConfig:
    agents: int = 10
    rounds: int = 5
    epochs: int = 3
    alpha: float = 0.7
    ci: float = 0.5
    k_eval: int = 8
    seed: int = 0
    prompt_variant: str = "original"
    mie_mode: str = "rank_top_ave"
    llm_backend: str = "simulated"
    scripted_table: str | None = None
    embed_backend: str = "scripted"
    predictor: str = "scripted"
    predictor_url: str | None = None
    relevant_news: str | None = None
    predictor_base: float = 0.12
    predictor_gain: float = 0.004
    predictor_penalty: float = 0.003
    series_path: str | None = None
    news_path: str | None = None
    timestamp_column: str = "timestamp"
    value_column: str = "value"
    region: str | None = None
    input_length: int = 7
    prediction_length: int = 7
    stride: int | None = None
    split: tuple[float, float, float] = (8, 1, 1)
    lookback_days: int = 7
    epsilon_term: float = 0.001
    epsilon_keep: float = 0.001
    judge: str = "model"
    elimination_count_override: tuple[int | None, ...] | None = None
    workers: int = 1
    max_retries: int = 3
    temperature: float = 0.5
    top_k: int = 20
    top_p: float = 0.8
    out: str = "runs/latest"

    def validate(self, require_paths: bool = True) -> "RunConfig":
        problems = []
        if self.agents < 2:
            problems.append("agents must be >= 2")
        if self.rounds < 1:
            problems.append("rounds must be >= 1")
        if self.epochs < 1:
            problems.append("epochs must be >= 1")
        if not 0 < self.alpha <= 1:
            problems.append("alpha must lie in (0, 1]")
        if not 0 <= self.ci <= 1:
            problems.append("ci must lie in [0, 1]")
        if self.k_eval < 1:
            problems.append("k_eval must be >= 1")
        if self.workers < 1:
            problems.append("workers must be >= 1")
        for name, value, allowed in (
            ("prompt_variant", self.prompt_variant, ("original", "paraphrased")),
            ("mie_mode", self.mie_mode, MIE_MODES),
            ("llm_backend", self.llm_backend, LLM_BACKENDS),
            ("embed_backend", self.embed_backend, EMBED_BACKENDS),
            ("predictor", self.predictor, PREDICTORS),
            ("judge", self.judge, ("model", "threshold")),
        ):
            if value not in allowed:
                problems.append(f"{name} must be one of {list(allowed)}, got {value!r}")
        if self.llm_backend == "scripted" and not self.scripted_table:
            problems.append("llm_backend 'scripted' needs scripted_table")
        if self.predictor == "remote" and not self.predictor_url:
            problems.append("predictor 'remote' needs predictor_url")
        if require_paths and (not self.series_path or not self.news_path):
            problems.append("series_path and news_path are required")
        if len(self.split) != 3 or any(r < 0 for r in self.split) or sum(self.split) <= 0:
            problems.append("split must be three non-negative ratios")
        if self.epsilon_term < 0 or self.epsilon_keep < 0:
            problems.append("tolerances must be >= 0")
        if problems:
            raise ConfigInvalid("; ".join(problems))
        return self

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base_dir: str | Path | None = None) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {unknown}")
        values = dict(data)
        if "split" in values:
            values["split"] = tuple(values["split"])
        if values.get("elimination_count_override") is not None:
            values["elimination_count_override"] = tuple(values["elimination_count_override"])
        if base_dir is not None:
            for key in _PATH_FIELDS:
                if values.get(key):
                    p = Path(values[key])
                    values[key] = str(p if p.is_absolute() else Path(base_dir) / p)
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Load a TOML or JSON config; relative data paths resolve against its folder."""
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
        try:
            if path.suffix.lower() == ".json":
                data = json.loads(raw)
            else:
                data = tomllib.loads(raw.decode("utf-8"))
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigInvalid(f"cannot parse {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a table of settings")
        return cls.from_mapping(data, base_dir=path.parent)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_record(self) -> dict[str, Any]:
        """Settings that shape results; the output folder is left out."""
        record = dataclasses.asdict(self)
        record.pop("out")
        record["split"] = list(self.split)
        if self.elimination_count_override is not None:
            record["elimination_count_override"] = list(self.elimination_count_override)
        return record


def check_termination(history: Sequence[float], epsilon: float, max_epochs: int | None = None) -> bool:
    """Stop once the latest validation MAPE improved by less than ``epsilon``."""
    if not history:
        raise ValueError("termination check needs at least one epoch")
    if max_epochs is not None and len(history) >= max_epochs:
        return True
    if len(history) < 2:
        return False
    return history[-2] - history[-1] < epsilon


def load_data(config: RunConfig) -> tuple[list[Window], NewsDB]:
    try:
        series = load_series(
            config.series_path,
            SeriesSchema(config.timestamp_column, config.value_column),
        )
        windows = make_windows(series, config.input_length, config.prediction_length,
                               config.stride, config.region)
        news = load_news(config.news_path)
    except (OSError, ValueError, TypeError) as exc:
        raise DataUnloadable(f"{type(exc).__name__}: {exc}") from None
    return windows, news


def build_gateway(config: RunConfig, ledger: RunLedger | None) -> Gateway:
    if config.llm_backend == "simulated":
        backend = sim.simulated_backend(config.seed, config.epsilon_keep)
    elif config.llm_backend == "scripted":
        try:
            backend = ScriptedBackend.from_file(config.scripted_table)
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"cannot load scripted table: {exc}") from None
    else:
        backend = HttpBackend.from_env()
    return Gateway(
        backend, ledger, config.prompt_variant, max_retries=config.max_retries,
        decoding={"temperature": config.temperature, "top_k": config.top_k, "top_p": config.top_p},
    )


def build_embedder(config: RunConfig):
    return ScriptedEmbedder() if config.embed_backend == "scripted" else HttpEmbedder.from_env()


def build_predictor(config: RunConfig, news_db: NewsDB):
    if config.predictor == "persistence":
        return PersistencePredictor()
    if config.predictor == "remote":
        return RemotePredictor(config.predictor_url)
    if config.relevant_news:
        try:
            text = Path(config.relevant_news).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataUnloadable(f"cannot read relevant news ids: {exc}") from None
        relevant = {ln.strip() for ln in text.splitlines() if ln.strip()}
    else:
        relevant = sim.relevant_ids(news_db)
    return ScriptedPredictor(relevant, config.predictor_base, config.predictor_gain, config.predictor_penalty)


@dataclass
class RunResult:
    config: RunConfig
    agents: dict[int, Agent]
    ledger: RunLedger
    test_forecasts: list[Forecast] = field(default_factory=list)
    actuals: dict[int, tuple[float, ...]] = field(default_factory=dict)
    validation_history: list[float | None] = field(default_factory=list)

    @property
    def survivors(self) -> list[Agent]:
        return [a for a in self.agents.values() if a.alive]


class Arena:
    """Owns the run state; per-agent work fans out to a worker pool and joins at each stage."""

    def __init__(
        self,
        config: RunConfig,
        ledger: RunLedger,
        *,
        gateway: Gateway | None = None,
        embedder=None,
        predictor=None,
        data: tuple[Sequence[Window], NewsDB] | None = None,
    ):
        self.config = config.validate(require_paths=data is None)
        self.ledger = ledger
        windows, self.news_db = data if data is not None else load_data(config)
        self.windows = {w.id: w for w in windows}
        self.train, self.valid, self.test = chronological_split(windows, config.split)
        if not self.train:
            raise DataUnloadable("no training windows after the split")
        self.gateway = gateway or build_gateway(config, ledger)
        self.embedder = embedder or build_embedder(config)
        self.predictor = predictor or build_predictor(config, self.news_db)
        self.pipeline = ForecastPipeline(self.gateway, self.news_db, self.predictor, config.lookback_days)
        self.agents: dict[int, Agent] = {}
        self.validation_history: list[float | None] = []
        self.epoch_logic: dict[int, str] = {}

    # helpers

    def living(self) -> list[Agent]:
        return [self.agents[i] for i in sorted(self.agents) if self.agents[i].alive]

    def _map(self, fn: Callable, items: Iterable) -> list:
        items = list(items)
        if self.config.workers == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(fn, items))

    def _forecast_record(self, split: str, epoch, round_, fc: Forecast, window: Window) -> None:
        agent = fc.agent if fc.agent != ENSEMBLE else None
        self.ledger.append("forecast", epoch, round_, agent, split=split, window=fc.window,
                           member=fc.agent, values=list(fc.values), actual=list(window.target))

    # lifecycle

    def start(self) -> None:
        c = self.config
        self.ledger.append(
            "run_start", config=c.to_record(),
            windows={"train": [w.id for w in self.train], "valid": [w.id for w in self.valid],
                     "test": [w.id for w in self.test]},
            news=len(self.news_db), duplicate_news=self.news_db.duplicates,
        )
        for agent in init_agents(c.agents, c.ci, c.seed):
            self.agents[agent.id] = agent

        def initial(agent: Agent) -> LogicDocument:
            reply = self.gateway.ask("initial_logic", {}, meta={"epoch": 0, "round": 0, "agent": agent.id})
            logic = LogicDocument.from_text(reply.text, version=1, provenance="initial")
            if not logic.clauses:
                raise ArenaError(f"agent {agent.id}: empty initial logic")
            return logic

        for agent, logic in zip(self.living(), self._map(initial, self.living())):
            agent.set_logic(logic)
            self.ledger.append("agent_init", 0, 0, agent.id, profile=agent.profile,
                               cumulative_score=agent.cumulative_score)
            self.ledger.append("logic", 0, 0, agent.id, logic=logic.as_dict())
        self.epoch_logic = {a.id: a.logic.to_text() for a in self.living()}
        self.ledger.append("init_done", 0, 0)

    def run_round(self, epoch: int, round_: int, window_ids: Sequence[int]) -> None:
        """Filter, forecast, evaluate, publish and reflect for one batch."""
        c = self.config
        living = self.living()
        if len(living) < 2:
            raise TooFewAgents(f"round needs two living agents, have {len(living)}")
        ids = [a.id for a in living]
        windows = [self.windows[i] for i in window_ids]
        # selections never outlive a stage, so a resumed run issues the same calls
        self.pipeline.clear_cache()
        self.ledger.append("round_start", epoch, round_, windows=list(window_ids), agents=ids)

        def meta(agent: Agent) -> dict:
            return {"epoch": epoch, "round": round_, "agent": agent.id}

        # filter
        selections = self._map(lambda a: [self.pipeline.select(a.logic, w, meta(a)) for w in windows], living)
        for agent, sels in zip(living, selections):
            for sel in sels:
                self.ledger.append("selection", epoch, round_, agent.id, window=sel.window,
                                   news=sel.as_dict(), dropped=sel.dropped)

        # forecast
        forecasts = self._map(lambda a: [self.pipeline.run(a.logic, w, a.id, meta(a))[1] for w in windows], living)
        mapes: dict[int, float] = {}
        for agent, fcs in zip(living, forecasts):
            per_window = []
            for fc, w in zip(fcs, windows):
                self._forecast_record("train", epoch, round_, fc, w)
                per_window.append(compute_errors(w.target, fc.values).mape)
            mapes[agent.id] = math.fsum(per_window) / len(per_window)

        # evaluate
        scores = compute_em(mapes)
        updated = update_cs({a.id: a.cumulative_score for a in living}, mapes)
        by_agent = {s.agent: s for s in scores}
        for agent in living:
            s = by_agent[agent.id]
            self.ledger.append("em", epoch, round_, agent.id, rank=s.rank, top=s.top, ave=s.ave,
                               mape=s.mape, top_undefined=s.top_undefined,
                               m_prev=agent.cumulative_score, m=updated[agent.id])
            agent.cumulative_score = updated[agent.id]
            agent.last_mape = s.mape

        # publish and route
        messages = self._map(
            lambda a: publish(a, scores, ids, self.gateway, epoch=epoch, round_=round_, mie_mode=c.mie_mode),
            living,
        )
        inboxes = route(messages, ids, self.ledger)
        for msg in messages:
            delivered, _ = expand_targets(msg, ids)
            if delivered:
                targets = BROADCAST if msg.targets == BROADCAST else delivered
                self.agents[msg.sender].publication_log.append(
                    PublicationRecord(epoch, round_, targets, msg.authentic, msg.body)
                )
            self.ledger.append("message", epoch, round_, msg.sender, **msg.as_dict(), delivered=list(delivered))

        # reflect
        def reflect_one(agent: Agent):
            sample = sample_windows(windows, c.k_eval, derive_seed(c.seed, epoch, round_, agent.id, 7))
            return reflect(agent, inboxes[agent.id], scores, self.gateway, self.pipeline, sample,
                           judge=c.judge, epsilon_keep=c.epsilon_keep, epoch=epoch, round_=round_,
                           mie_mode=c.mie_mode)

        outcomes = self._map(reflect_one, living)
        for agent, outcome in zip(living, outcomes):
            self.ledger.append("reflection", epoch, round_, agent.id, **outcome.as_dict())
            agent.set_logic(outcome.final)
            self.ledger.append("logic", epoch, round_, agent.id, logic=outcome.final.as_dict())
        self.ledger.append("round_end", epoch, round_,
                           scores={str(a.id): a.cumulative_score for a in living})

    def ensemble(self, windows: Sequence[Window], split: str, epoch, members: Sequence[Agent]) -> tuple[list[Forecast], list[float]]:
        """Member and ensemble forecasts on ``windows``; returns ensembles and their MAPEs."""
        ensembles, mapes = [], []
        weights = {a.id: a.cumulative_score for a in members}
        self.pipeline.clear_cache()

        def forecast_all(agent: Agent):
            m = {"epoch": epoch, "round": None, "agent": agent.id, "split": split}
            return [self.pipeline.run(agent.logic, w, agent.id, m)[1] for w in windows]

        per_agent = self._map(forecast_all, members)
        for j, w in enumerate(windows):
            member_fcs = {a.id: per_agent[i][j] for i, a in enumerate(members)}
            for fc in member_fcs.values():
                self._forecast_record(split, epoch, None, fc, w)
            ens = aggregate(member_fcs, weights)
            self._forecast_record(split, epoch, None, ens, w)
            ensembles.append(ens)
            mapes.append(compute_errors(w.target, ens.values).mape)
        return ensembles, mapes

    def end_epoch(self, epoch: int) -> bool:
        """Eliminate, validate and record analytics; returns True when the run should stop."""
        c = self.config
        living = self.living()
        eliminated: list[Agent] = []
        if len(living) >= 2:
            override = None
            if c.elimination_count_override and epoch <= len(c.elimination_count_override):
                override = c.elimination_count_override[epoch - 1]
            survivors, eliminated = apply_sf(living, c.alpha, override)
            for a in eliminated:
                self.agents[a.id].alive = False
            self.ledger.append(
                "elimination", epoch, None, eliminated=[a.id for a in eliminated],
                survivors=[a.id for a in survivors],
                scores={str(a.id): a.cumulative_score for a in living},
            )
        living = self.living()

        val_mape = None
        if self.valid and len(living) >= 1:
            _, mapes = self.ensemble(self.valid, "valid", epoch, living)
            val_mape = math.fsum(mapes) / len(mapes)
        self.validation_history.append(val_mape)
        known = [v for v in self.validation_history if v is not None]
        stop = epoch >= c.epochs or len(living) < 2
        if val_mape is not None and check_termination(known, c.epsilon_term):
            stop = True

        logics = {a.id: a.logic.to_text() for a in living}
        lud_values = {}
        if epoch > 1:
            for a in living:
                lud_values[str(a.id)] = lud(self.epoch_logic[a.id], logics[a.id], self.embedder, self.ledger)
        similarity = mean_pairwise_similarity([logics[i] for i in sorted(logics)], self.embedder, self.ledger)
        cld = {}
        for a in self.agents.values():
            if a.publication_log:
                n_c = sum(1 for p in a.publication_log if p.authentic)
                cld[str(a.id)] = {"n_all": len(a.publication_log), "n_c": n_c}
        self.ledger.append(
            "epoch_end", epoch, None,
            population=len(living),
            validation_mape=val_mape,
            hhi=hhi([a.cumulative_score for a in living]),
            similarity=similarity,
            lud=lud_values,
            publications=cld,
            logics={str(k): v for k, v in logics.items()},
            stop=stop,
        )
        self.epoch_logic = logics
        return stop

    def finish(self) -> tuple[list[Forecast], dict[int, tuple[float, ...]]]:
        living = self.living()
        windows = self.test or self.valid
        if not windows:
            self.ledger.warn("no test or validation windows, skipping final forecasts")
            self.ledger.append("run_end", survivors=[a.id for a in living])
            return [], {}
        split = "test" if self.test else "valid"
        ensembles, mapes = self.ensemble(windows, split, None, living)
        errors = {}
        for a in living:
            actual, pred = [], []
            for r in self.ledger.of_type("forecast"):
                if r["split"] == split and r["epoch"] is None and r["member"] == a.id:
                    actual += r["actual"]
                    pred += r["values"]
            errors[str(a.id)] = compute_errors(actual, pred).as_dict()
        actual_all = [v for w in windows for v in w.target]
        pred_all = [v for e in ensembles for v in e.values]
        errors[ENSEMBLE] = compute_errors(actual_all, pred_all).as_dict()
        self.ledger.append("run_end", split=split, survivors=[a.id for a in living], errors=errors)
        return ensembles, {w.id: w.target for w in windows}

    def execute(self, completed_rounds: set[tuple[int, int]] = frozenset(), completed_epochs: int = 0) -> RunResult:
        c = self.config
        stop = False
        for epoch in range(completed_epochs + 1, c.epochs + 1):
            batches = split_rounds(self.train, c.rounds, derive_seed(c.seed, epoch))
            for batch in batches:
                if (epoch, batch.round_index) in completed_rounds:
                    continue
                if len(self.living()) < 2:
                    break
                if not batch.windows:
                    self.ledger.warn("empty round batch skipped", epoch, batch.round_index)
                    continue
                self.run_round(epoch, batch.round_index, batch.windows)
            stop = self.end_epoch(epoch)
            if stop:
                break
        ensembles, actuals = self.finish()
        members = [
            Forecast(r["window"], r["member"], tuple(r["values"]))
            for r in self.ledger.of_type("forecast")
            if r["epoch"] is None and r["member"] != ENSEMBLE
        ]
        return RunResult(c, self.agents, self.ledger, members + ensembles, actuals, self.validation_history)


def run(config: RunConfig, ledger_path: str | Path | None = None, **components) -> RunResult:
    """Execute a full run; with ``ledger_path`` the ledger is also written to disk."""
    data = components.pop("data", None)
    config.validate(require_paths=data is None)
    data = data or load_data(config)
    ledger = RunLedger(ledger_path)
    try:
        arena = Arena(config, ledger, data=data, **components)
        arena.start()
        return arena.execute()
    finally:
        ledger.close()


def replay(source: str | Path | Sequence[Mapping[str, Any]], verify: bool = True) -> dict[int, Agent]:
    """Rebuild agent states from ledger records.

    With ``verify`` every round's score update is recomputed from the recorded
    MAPEs and must match the recorded values exactly.
    """
    records = read_ledger(source) if isinstance(source, (str, Path)) else list(source)
    agents: dict[int, Agent] = {}
    pending: dict[tuple, list[Mapping]] = {}

    def check_round(key):
        rows = pending.pop(key, [])
        if not verify or not rows:
            return
        expect = update_cs({r["agent"]: r["m_prev"] for r in rows}, {r["agent"]: r["mape"] for r in rows})
        for r in rows:
            if expect[r["agent"]] != r["m"]:
                raise LedgerCorrupt(r["seq"], f"score update for agent {r['agent']} does not recompute")

    for rec in records:
        kind = rec["type"]
        try:
            if kind == "agent_init":
                agents[rec["agent"]] = Agent(rec["agent"], rec["profile"], cumulative_score=rec["cumulative_score"])
            elif kind == "logic":
                agents[rec["agent"]].logic = LogicDocument.from_dict(rec["logic"])
            elif kind == "em":
                agent = agents[rec["agent"]]
                if verify and agent.cumulative_score != rec["m_prev"]:
                    raise LedgerCorrupt(rec["seq"], f"agent {rec['agent']} score does not continue")
                agent.cumulative_score = rec["m"]
                agent.last_mape = rec["mape"]
                pending.setdefault((rec["epoch"], rec["round"]), []).append(rec)
            elif kind == "message":
                if rec["delivered"]:
                    targets = BROADCAST if rec["targets"] == BROADCAST else tuple(rec["delivered"])
                    agents[rec["agent"]].publication_log.append(
                        PublicationRecord(rec["epoch"], rec["round"], targets, rec["authentic"], rec["body"])
                    )
            elif kind == "round_end":
                check_round((rec["epoch"], rec["round"]))
            elif kind == "elimination":
                for i in rec["eliminated"]:
                    agents[i].alive = False
        except KeyError as exc:
            raise LedgerCorrupt(rec.get("seq", -1), f"record refers to unknown field or agent {exc}") from None
    for key in list(pending):
        check_round(key)
    return agents


def _resume_point(records: Sequence[Mapping[str, Any]]) -> int:
    """Index of the last record after which the state is consistent, or -1."""
    for i in range(len(records) - 1, -1, -1):
        if records[i]["type"] in ("init_done", "round_end", "epoch_end", "run_end"):
            return i
    return -1


def resume(config: RunConfig, ledger_path: str | Path, **components) -> RunResult:
    """Continue a crashed run from its last completed round.

    Records after the last consistent point are discarded; the rest is
    replayed to rebuild agent state.
    """
    config.validate(require_paths="data" not in components)
    path = Path(ledger_path)
    records = read_ledger(path) if path.exists() else []
    cut = _resume_point(records)
    if cut < 0:
        return run(config, path, **components)
    start = records[0]
    if start["type"] != "run_start" or start["config"] != json.loads(json.dumps(config.to_record())):
        raise ConfigInvalid("ledger was written with a different configuration")
    if any(r["type"] == "run_end" for r in records[: cut + 1]):
        raise ConfigInvalid("run already finished; nothing to resume")
    kept = records[: cut + 1]
    with path.open("w", encoding="utf-8") as fh:
        for r in kept:
            fh.write(json.dumps(r, ensure_ascii=False, allow_nan=False, separators=(",", ":")) + "\n")

    data = components.pop("data", None) or load_data(config)
    ledger = RunLedger(path, mode="a")
    try:
        arena = Arena(config, ledger, data=data, **components)
        arena.agents = replay(kept)
        ledger.append("resume", after_seq=cut)
        completed_rounds = {(r["epoch"], r["round"]) for r in kept if r["type"] == "round_end"}
        epoch_ends = [r for r in kept if r["type"] == "epoch_end"]
        arena.validation_history = [r["validation_mape"] for r in epoch_ends]
        if epoch_ends:
            arena.epoch_logic = {int(k): v for k, v in epoch_ends[-1]["logics"].items()}
            if epoch_ends[-1]["stop"]:
                ensembles, actuals = arena.finish()
                return RunResult(config, arena.agents, ledger, ensembles, actuals, arena.validation_history)
        else:
            initial = {r["agent"]: LogicDocument.from_dict(r["logic"]) for r in kept
                       if r["type"] == "logic" and r["epoch"] == 0}
            arena.epoch_logic = {i: logic.to_text() for i, logic in initial.items()}
        # an epoch whose rounds all finished but whose end was not recorded is redone from its end
        return arena.execute(completed_rounds, completed_epochs=len(epoch_ends))
    finally:
        ledger.close()
