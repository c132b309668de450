import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsarena.errors import DimensionMismatch, ZeroNorm
from newsarena.ledger import RunLedger
from newsarena.logic_metrics import (
    EmbeddingVector,
    HttpEmbedder,
    ScriptedEmbedder,
    cosine_sim,
    embed,
    lud,
    mean_pairwise_similarity,
)

from test_gateway import _Handler, server  # noqa: F401  (fixture reuse)


def vec(*values, model="m"):
    return EmbeddingVector(tuple(float(v) for v in values), model)


def test_cosine_fixtures():
    assert cosine_sim(vec(1, 2, 3), vec(1, 2, 3)) == pytest.approx(1.0, abs=1e-12)
    assert cosine_sim(vec(1, 0), vec(0, 1)) == 0.0
    assert cosine_sim(vec(1, 0), vec(1, 1)) == pytest.approx(1 / math.sqrt(2), abs=1e-4)


def test_cosine_rejects_mismatch_and_zero():
    with pytest.raises(DimensionMismatch):
        cosine_sim(vec(1, 0), vec(1, 0, 0))
    with pytest.raises(DimensionMismatch):
        cosine_sim(vec(1, 0), vec(1, 0, model="other"))
    with pytest.raises(ZeroNorm):
        cosine_sim(vec(0, 0), vec(1, 0))


def test_non_finite_embedding_rejected():
    with pytest.raises(ValueError):
        vec(1, float("inf"))


def test_scripted_embedder_is_deterministic():
    a, b = ScriptedEmbedder(dim=32), ScriptedEmbedder(dim=32)
    assert a.encode("heatwave load") == b.encode("heatwave load")
    assert a.encode("heatwave load") != a.encode("football")


def test_lud_fixtures():
    emb = ScriptedEmbedder(dim=2, fixed={"prev": (1, 0), "next": (0, 1), "flip": (-1, 0)})
    assert lud("same text", "same text", emb) == 0.0
    assert lud("prev", "next", emb) == pytest.approx(1.0, abs=1e-12)
    assert lud("prev", "flip", emb) == pytest.approx(2.0, abs=1e-12)


words = st.lists(st.sampled_from(["heat", "storm", "load", "holiday", "price", "wind"]), min_size=1, max_size=12)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_lud_identity_and_symmetry(a, b):
    emb = ScriptedEmbedder(dim=64)
    x, y = " ".join(a), " ".join(b)
    assert abs(lud(x, x, emb)) <= 1e-6
    assert 0 - 1e-9 <= lud(x, y, emb) <= 2 + 1e-9
    assert lud(x, y, emb) == pytest.approx(lud(y, x, emb), abs=1e-12)


def test_truncation_warning():
    emb = ScriptedEmbedder(dim=8, max_tokens=8192)
    ledger = RunLedger()
    v = embed(emb, "tok " * 9000, ledger)
    assert v.dim == 8
    (warning,) = ledger.of_type("warning")
    assert "9000" in warning["message"]


def test_embed_rejects_empty():
    with pytest.raises(ValueError):
        embed(ScriptedEmbedder(), "   ")


def test_mean_pairwise_similarity():
    emb = ScriptedEmbedder(dim=2, fixed={"a": (1, 0), "b": (0, 1), "c": (1, 1)})
    # pairs: (a,b)=0, (a,c)=(b,c)=1/sqrt(2)
    assert mean_pairwise_similarity(["a", "b", "c"], emb) == pytest.approx(2 / math.sqrt(2) / 3, abs=1e-12)
    assert mean_pairwise_similarity(["a"], emb) is None


def test_http_embedder(server):  # noqa: F811
    e = HttpEmbedder(server, model="bge-m3")
    assert e.encode("x") == (1.0, 0.0)
    path, body, _ = _Handler.bodies[-1]
    assert path == "/v1/embeddings" and body == {"model": "bge-m3", "input": "x"}
