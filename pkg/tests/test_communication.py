import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsarena.agents import BROADCAST, HIGH, LOW, Agent, LogicDocument
from newsarena.communication import (
    DisclosureMessage,
    expand_targets,
    format_inbox,
    inbox_sizes,
    parse_disclosure,
    parse_targets,
    publish,
    route,
    standing_bindings,
    standing_preamble,
)
from newsarena.errors import DeadTarget, MalformedDisclosure
from newsarena.evaluation import compute_em
from newsarena.gateway import Gateway, ScriptedBackend
from newsarena.ledger import RunLedger

AUTHENTIC = """1. Thought Process
- Decide whether to disclose your logic: true
- If you disclose, indicate whether it includes misleading or false insights: false

2. Disclosed Logic
- Real Logic:
- heat raises load.
- False Logic: none

3. Final Disclosed Logic
- heat raises load.
TARGETS: all
"""

DECEPTIVE = """1. Thought Process
Hide the real driver.

2. Disclosed Logic
- Real Logic: none
- False Logic:
- football finals lift demand.

3. **Final Disclosed Logic**:
- football finals lift demand.
TARGETS: 2, 5
"""


def test_authentic_reply():
    p = parse_disclosure(AUTHENTIC)
    assert p.body == "- heat raises load."
    assert p.declared_real == "- heat raises load."
    assert p.declared_false == ""
    assert p.targets == BROADCAST


def test_deceptive_reply():
    p = parse_disclosure(DECEPTIVE)
    assert p.body == "- football finals lift demand."
    assert p.declared_real == ""
    assert p.declared_false == "- football finals lift demand."
    assert p.targets == (2, 5)


@pytest.mark.parametrize("text", ["no sections at all", "3. Final Disclosed Logic\nTARGETS: all\n"])
def test_malformed_replies(text):
    with pytest.raises(MalformedDisclosure):
        parse_disclosure(text)


@pytest.mark.parametrize("raw,expected", [("all", BROADCAST), ("", BROADCAST), ("3, 1, 3", (3, 1)), ("[4]", (4,))])
def test_parse_targets(raw, expected):
    assert parse_targets(raw) == expected


def test_message_invariants():
    assert DisclosureMessage(1, 0, BROADCAST, "x").authentic
    assert not DisclosureMessage(1, 0, (2,), "x", declared_false="y").authentic
    with pytest.raises(ValueError):
        DisclosureMessage(1, 0, (1, 2), "x")
    with pytest.raises(ValueError):
        DisclosureMessage(1, 0, (), "x")
    with pytest.raises(MalformedDisclosure):
        DisclosureMessage(1, 0, BROADCAST, "  ")


def test_standing_bindings_text():
    scores = compute_em({1: 0.10, 2: 0.05, 3: 0.15})
    b = standing_bindings(scores, 1)
    assert (b["rank"], b["total"]) == (2, 3)
    assert b["top_value"] == "MAPE 5.00% (your MAPE differs from it by +100.0%)"
    assert b["ave_value"] == "MAPE 10.00% (your MAPE differs from it by +0.0%)"
    assert standing_preamble(scores, 1, "rank") == ""
    assert "5.00%" in standing_preamble(scores, 1, "rank_top")
    with pytest.raises(ValueError):
        standing_preamble(scores, 1, "bogus")


def _agents():
    return [Agent(i, LOW if i % 2 else HIGH, LogicDocument(("heat raises load.",), 1)) for i in (1, 2, 3, 5)]


def test_publish_drops_invalid_targets():
    agents = _agents()
    scores = compute_em({a.id: 0.1 * a.id for a in agents})
    ledger = RunLedger()
    gw = Gateway(ScriptedBackend({"ia_publish": DECEPTIVE.replace("TARGETS: 2, 5", "TARGETS: 2, 4, 1")}), ledger)
    msg = publish(agents[0], scores, [1, 2, 3, 5], gw, epoch=1, round_=2)
    assert msg.targets == (2,)
    assert not msg.authentic and msg.epoch == 1 and msg.round == 2
    assert len(list(ledger.of_type("warning"))) == 1
    request = next(ledger.of_type("llm_request"))["prompt"]
    assert "The other participants are: 2, 3, 5." in request


def test_publish_uses_paraphrased_profile():
    agents = _agents()
    scores = compute_em({a.id: 0.1 * a.id for a in agents})
    seen = {}

    def responder(req):
        seen.update(req.meta)
        return AUTHENTIC

    gw = Gateway(ScriptedBackend(responder=responder), prompt_variant="paraphrased")
    publish(agents[1], scores, [1, 2, 3, 5], gw)
    assert seen["template"] == "ia_publish_alt"
    assert "hide your true strategy" in seen["bindings"]["competitive_profile"]


def test_route_warns_on_dead_target():
    ledger = RunLedger()
    msgs = [DisclosureMessage(3, 0, (1, 4), "c"), DisclosureMessage(1, 0, BROADCAST, "a")]
    inboxes = route(msgs, [1, 2, 3], ledger)
    assert [m.sender for m in inboxes[1]] == [3]
    assert [m.sender for m in inboxes[2]] == [1]
    assert [m.sender for m in inboxes[3]] == [1]
    assert len(list(ledger.of_type("warning"))) == 1
    with pytest.raises(DeadTarget):
        route([DisclosureMessage(9, 0, BROADCAST, "x")], [1, 2])


@st.composite
def traffic(draw):
    living = sorted(draw(st.sets(st.integers(1, 12), min_size=2, max_size=8)))
    msgs = []
    for sender in living:
        if draw(st.booleans()):
            targets = BROADCAST
        else:
            targets = tuple(draw(st.sets(st.integers(1, 14).filter(lambda t: t != sender), min_size=1, max_size=4)))
        msgs.append(DisclosureMessage(sender, 0, targets, f"logic of {sender}"))
    return living, msgs


@settings(max_examples=300, deadline=None)
@given(traffic())
def test_route_invariants(case):
    living, msgs = case
    inboxes = route(msgs, living)
    assert set(inboxes) == set(living)
    for recipient, inbox in inboxes.items():
        senders = [m.sender for m in inbox]
        assert senders == sorted(senders)
        assert recipient not in senders
        assert len(set(senders)) == len(senders)
    expected = sum(len(expand_targets(m, living)[0]) for m in msgs)
    assert inbox_sizes(inboxes) == expected
    for m in msgs:
        if m.targets == BROADCAST:
            assert all(m in inboxes[r] for r in living if r != m.sender)


def test_format_inbox():
    assert "no competitor" in format_inbox([])
    text = format_inbox([DisclosureMessage(2, 0, BROADCAST, "- a"), DisclosureMessage(4, 0, (1,), "- b")])
    assert text == "Participant 2:\n- a\n\nParticipant 4:\n- b"
