import json
from datetime import date

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from newsarena.agents import HIGH, LOW, Agent, LogicDocument
from newsarena.communication import DisclosureMessage
from newsarena.errors import MalformedJson, MalformedReflection
from newsarena.evaluation import compute_em
from newsarena.gateway import Gateway, ScriptedBackend
from newsarena.ledger import RunLedger
from newsarena.prediction import ForecastPipeline, ScriptedPredictor
from newsarena.reflection import (
    BAD,
    GOOD,
    PENDING,
    Delta,
    TrendContext,
    classify_deltas,
    diff_logic,
    parse_adjusted_logic,
    reflect,
    sample_windows,
    stage1_update,
    stage3_finalize,
)
from newsarena.sim import SimulatedLLM, clause_keyword

from conftest import make_window

HEAT = "heatwave: extreme heat pushes up air-conditioning load."
BALL = "football: big matches shift household consumption."
STORM = "storm: severe weather damages the network and cuts supply."
FACTORY = "factory: new industrial sites lift baseline consumption."


@pytest.fixture
def world(tiny_news):
    relevant = {tiny_news[0].id, tiny_news[2].id}  # heatwave, storm

    def build(penalty=0.005):
        gw = Gateway(ScriptedBackend(responder=SimulatedLLM()), RunLedger())
        predictor = ScriptedPredictor(relevant, base=0.12, gain=0.01, penalty=penalty)
        return ForecastPipeline(gw, tiny_news, predictor), gw

    return build


WINDOWS = [make_window(0, [100.0] * 7, [100.0, 110.0], start=date(2019, 1, 8))]


def test_diff_keeps_added_clauses_in_candidate_order():
    prev = LogicDocument((HEAT, BALL), 1)
    cand = LogicDocument((STORM, BALL, FACTORY), 2)
    assert [d.clause for d in diff_logic(cand, prev)] == [STORM, FACTORY]
    assert diff_logic(LogicDocument((BALL, HEAT), 2), prev) == []
    assert all(d.classification == PENDING for d in diff_logic(cand, prev))


def test_classification_by_ablation(world):
    pipe, _ = world()
    cand = LogicDocument((HEAT, BALL, STORM), 2)
    ball, storm = classify_deltas(diff_logic(cand, LogicDocument((HEAT,), 1)), cand, WINDOWS, pipe)
    # with all three: 0.12 - 2*0.01 + 0.005 = 0.105
    assert ball.ir_with == pytest.approx(0.105) and storm.ir_with == pytest.approx(0.105)
    assert (ball.classification, ball.ir_without) == (BAD, pytest.approx(0.100))
    assert (storm.classification, storm.ir_without) == (GOOD, pytest.approx(0.115))
    assert ball.windows == (0,)


def test_equal_ir_is_bad(world):
    pipe, _ = world()
    cand = LogicDocument((HEAT, FACTORY), 2)  # the factory item is outside the lookback
    (d,) = classify_deltas(diff_logic(cand, LogicDocument((HEAT,), 1)), cand, WINDOWS, pipe)
    assert d.gap == 0.0 and d.classification == BAD


@pytest.mark.parametrize("penalty,kept", [(0.005, False), (0.0005, True)])
def test_threshold_judge(world, penalty, kept):
    pipe, _ = world(penalty)
    cand = LogicDocument((HEAT, BALL), 2)
    deltas = classify_deltas(diff_logic(cand, LogicDocument((HEAT,), 1)), cand, WINDOWS, pipe)
    assert abs(deltas[0].gap) == pytest.approx(penalty)
    out = stage3_finalize(cand, deltas)
    assert (BALL in out.final) is kept
    assert out.judgements[0]["judge"] == "threshold"


CTX = TrendContext("bg", (1.0, 2.0), (3.0,))


def _bad(clause=BALL):
    return Delta(clause, BAD, 0.10, 0.09)


@pytest.mark.parametrize("conclusion,kept", [("no", False), ("yes", True)])
def test_model_judge(conclusion, kept):
    reply = json.dumps({"content": BALL, "conclusion": conclusion, "reason": "r", "logic": "l"})
    gw = Gateway(ScriptedBackend({"remove_bad_logic": reply}))
    cand = LogicDocument((HEAT, BALL), 2)
    out = stage3_finalize(cand, [_bad(), Delta(HEAT, GOOD, 0.1, 0.2)], CTX, gw)
    assert out.final.clauses == ((HEAT, BALL) if kept else (HEAT,))
    assert [j["clause"] for j in out.judgements] == [BALL]


def test_model_judge_malformed_twice():
    gw = Gateway(ScriptedBackend({"remove_bad_logic": "not json"}))
    with pytest.raises(MalformedJson):
        stage3_finalize(LogicDocument((BALL,), 2), [_bad()], CTX, gw)


def test_stage3_requires_classified():
    with pytest.raises(ValueError):
        stage3_finalize(LogicDocument((BALL,), 2), [Delta(BALL)])


def test_parse_adjusted_logic():
    text = "(1) Thought Process:\nthinking\n\n(2) Final Adjusted Logic:\n- a.\n- b."
    assert parse_adjusted_logic(text) == ["a.", "b."]
    assert parse_adjusted_logic("**Final Adjusted Logic**: only one.") == ["only one."]
    for bad in ("no section", "Final Adjusted Logic:\n"):
        with pytest.raises(MalformedReflection):
            parse_adjusted_logic(bad)


def test_stage1_bumps_version():
    agent = Agent(1, LOW, LogicDocument((HEAT,), 3))
    gw = Gateway(ScriptedBackend({"reflection_improve": "(2) Final Adjusted Logic:\n- x.\n- y."}))
    doc = stage1_update(agent, [], compute_em({1: 0.1, 2: 0.2}), gw)
    assert (doc.clauses, doc.version, doc.provenance) == (("x.", "y."), 4, "reflected")


def test_sample_windows():
    ws = [make_window(i, [1.0], [1.0]) for i in range(10)]
    a = sample_windows(ws, 4, seed=3)
    assert a == sample_windows(ws, 4, seed=3)
    assert [w.id for w in a] == sorted(w.id for w in a) and len(set(w.id for w in a)) == 4
    assert len(sample_windows(ws, 50, seed=0)) == 10
    with pytest.raises(ValueError):
        sample_windows(ws, 0, seed=0)


def test_reflect_end_to_end(world):
    pipe, gw = world()
    agent = Agent(1, HIGH, LogicDocument((HEAT,), 1))
    inbox = [DisclosureMessage(2, 0, "all", f"- {BALL}\n- {STORM}")]
    out = reflect(agent, inbox, compute_em({1: 0.1, 2: 0.08}), gw, pipe, WINDOWS, judge="model")
    assert out.candidate.clauses == (HEAT, BALL, STORM)
    assert out.final.clauses == (HEAT, STORM)
    assert [d.clause for d in out.removed] == [BALL]
    prompts = [r["prompt"] for r in gw.ledger.of_type("llm_request") if r["template"] == "remove_bad_logic"]
    assert len(prompts) == 1 and "football grand final" in prompts[0]


CLAUSES = [HEAT, BALL, STORM, FACTORY]


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.sampled_from(CLAUSES), unique=True, min_size=1),
       st.lists(st.sampled_from(CLAUSES), unique=True, max_size=2))
def test_classification_matches_brute_force(tiny_news, world, candidate, previous):
    pipe, _ = world()
    relevant = {tiny_news[0].id, tiny_news[2].id}
    window_news = [it for it in tiny_news if it.date <= date(2019, 1, 15)]

    def error(clauses):
        keys = [clause_keyword(c) for c in clauses]
        picked = {it.id for it in window_news if any(k in it.text.lower() for k in keys)}
        hits = len(picked & relevant)
        return max(0.0, 0.12 - 0.01 * hits + 0.005 * (len(picked) - hits))

    cand = LogicDocument(tuple(candidate), 2)
    deltas = classify_deltas(diff_logic(cand, LogicDocument(tuple(previous), 1)), cand, WINDOWS, pipe)
    assert [d.clause for d in deltas] == [c for c in candidate if c not in previous]
    for d in deltas:
        without = [c for c in candidate if c != d.clause]
        expected = GOOD if error(without) > error(candidate) else BAD
        assert d.classification == expected
