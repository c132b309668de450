"""Embedding backends, cosine similarity and Logic Update Degree."""

from __future__ import annotations

import hashlib
import itertools
import os
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import requests

from .errors import BackendUnavailable, DimensionMismatch, ZeroNorm
from .ledger import RunLedger

_TOKEN = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model: str

    def __post_init__(self):
        if not all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)


class ScriptedEmbedder:
    """Offline embedder: a sum of hash-seeded token vectors.

    Deterministic per text; texts sharing vocabulary land close together, so
    similarity analytics stay meaningful without a model. ``fixed`` pins exact
    vectors for chosen texts (useful to construct orthogonal fixtures).
    """

    def __init__(self, dim: int = 256, max_tokens: int = 8192, fixed: Mapping[str, Sequence[float]] | None = None):
        self.dim = dim
        self.max_tokens = max_tokens
        self.model = f"scripted-hash-{dim}"
        self.fixed = {k: tuple(float(x) for x in v) for k, v in (fixed or {}).items()}
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "little")
            vec = np.random.default_rng(seed).standard_normal(self.dim)
            self._cache[token] = vec
        return vec

    def encode(self, text: str) -> tuple[float, ...]:
        if text in self.fixed:
            return self.fixed[text]
        tokens = _TOKEN.findall(text.lower())
        if not tokens:
            # punctuation-only text still gets a stable vector
            tokens = [text]
        total = np.zeros(self.dim)
        for tok in tokens:
            total += self._token_vector(tok)
        return tuple(total.tolist())


class HttpEmbedder:
    """Client for an OpenAI-style ``/embeddings`` endpoint."""

    def __init__(self, base_url: str, model: str = "bge-m3", api_key: str = "", max_tokens: int = 8192, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.max_tokens = max_tokens
        self.timeout = timeout

    @classmethod
    def from_env(cls, **kwargs) -> "HttpEmbedder":
        base = os.environ.get("ARENA_EMBED_BASE_URL")
        if not base:
            raise BackendUnavailable("ARENA_EMBED_BASE_URL is not set")
        return cls(base, api_key=os.environ.get("ARENA_LLM_API_KEY", ""), **kwargs)

    def encode(self, text: str) -> tuple[float, ...]:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = requests.post(
                f"{self.base_url}/embeddings",
                json={"model": self.model, "input": text},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return tuple(float(x) for x in resp.json()["data"][0]["embedding"])
        except (requests.RequestException, ValueError, KeyError, IndexError) as exc:
            raise BackendUnavailable(f"embedding request failed: {exc}") from None


def embed(backend, text: str, ledger: RunLedger | None = None) -> EmbeddingVector:
    """Embed ``text``, truncating to the backend's token limit (recorded as a warning)."""
    if not text or not text.strip():
        raise ValueError("cannot embed empty text")
    tokens = text.split()
    if len(tokens) > backend.max_tokens:
        if ledger is not None:
            ledger.warn(f"embedding input truncated from {len(tokens)} to {backend.max_tokens} tokens")
        text = " ".join(tokens[: backend.max_tokens])
    return EmbeddingVector(backend.encode(text), backend.model)


def cosine_sim(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.model != b.model or a.dim != b.dim:
        raise DimensionMismatch(f"cannot compare {a.model}/{a.dim} with {b.model}/{b.dim}")
    va, vb = np.asarray(a.values), np.asarray(b.values)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise ZeroNorm("cosine similarity of a zero vector")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def lud(prev_logic: str, next_logic: str, backend, ledger: RunLedger | None = None) -> float:
    """Logic Update Degree: one minus the cosine similarity of the two logics."""
    if prev_logic == next_logic:
        return 0.0
    return 1.0 - cosine_sim(embed(backend, prev_logic, ledger), embed(backend, next_logic, ledger))


def mean_pairwise_similarity(logics: Sequence[str], backend, ledger: RunLedger | None = None) -> float | None:
    """Average cosine similarity over all unordered pairs; ``None`` for fewer than two."""
    if len(logics) < 2:
        return None
    vecs = [embed(backend, text, ledger) for text in logics]
    sims = [cosine_sim(a, b) for a, b in itertools.combinations(vecs, 2)]
    return float(np.mean(sims))
