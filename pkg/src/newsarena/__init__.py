"""Competitive multi-agent news selection for time-series forecasting."""

from .agents import Agent, LogicDocument, PublicationRecord, cld, cpd, init_agents
from .communication import DisclosureMessage, publish, route
from .data import NewsDB, NewsItem, Window, load_news, load_series, make_windows
from .evaluation import EmScore, apply_sf, compute_em, elimination_count, update_cs
from .gateway import ChatRequest, ChatResponse, Gateway, HttpBackend, ScriptedBackend
from .ledger import RunLedger, read_ledger
from .logic_metrics import ScriptedEmbedder, cosine_sim, embed, lud
from .metrics import ForecastErrors, compute_errors, hhi, mape, mmn
from .orchestrator import RunConfig, check_termination, replay, resume, run
from .prediction import Forecast, ForecastPipeline, SelectedNews, aggregate, predict, select_news
from .prompts import render
from .reflection import Delta, ReflectionOutcome, classify_delta, diff_logic, stage1_update, stage3_finalize

__version__ = "0.1.0"

__all__ = [
    "Agent", "ChatRequest", "ChatResponse", "Delta", "DisclosureMessage", "EmScore", "Forecast",
    "ForecastErrors", "ForecastPipeline", "Gateway", "HttpBackend", "LogicDocument", "NewsDB",
    "NewsItem", "PublicationRecord", "ReflectionOutcome", "RunConfig", "RunLedger", "ScriptedBackend",
    "ScriptedEmbedder", "SelectedNews", "Window", "aggregate", "apply_sf", "check_termination",
    "classify_delta", "cld", "compute_em", "compute_errors", "cosine_sim", "cpd", "diff_logic",
    "elimination_count", "embed", "hhi", "init_agents", "load_news", "load_series", "lud",
    "make_windows", "mape", "mmn", "predict", "publish", "read_ledger", "render", "replay",
    "resume", "route", "run", "select_news", "stage1_update", "stage3_finalize", "update_cs",
]
