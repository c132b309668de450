"""Text-model gateway: prompt rendering, backends, retries and ledger capture."""

from __future__ import annotations

import json
import os
import re
import threading
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from string import Template
from typing import Any

import requests

from . import prompts
from .errors import (
    BackendUnavailable,
    GatewayError,
    MalformedJson,
    RateLimited,
    Timeout,
)
from .ledger import RunLedger

REPAIR_JSON = "Return valid JSON only"

TRANSIENT = (Timeout, RateLimited, BackendUnavailable)


@dataclass(frozen=True)
class ChatRequest:
    user: str
    system: str = ""
    temperature: float = 0.5
    top_k: int = 20
    top_p: float = 0.8
    expected_format: str = "free"  # "free" | "json"
    template_id: str | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)


@dataclass
class ChatResponse:
    text: str
    backend: str
    latency: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    parsed: Any = None


def parse_json_reply(text: str) -> Any:
    """Parse a model's JSON reply, tolerating code fences and bare yes/no values."""
    body = text.strip()
    fence = re.search(r"```(?:json)?\s*(.*?)```", body, re.S)
    if fence:
        body = fence.group(1).strip()
    try:
        return json.loads(body)
    except json.JSONDecodeError:
        pass
    start, end = body.find("{"), body.rfind("}")
    if start == -1 or end <= start:
        raise MalformedJson("no JSON object in reply", text)
    body = body[start : end + 1]
    body = re.sub(r'(:\s*)(yes|no)(\s*[,}\n])', r'\1"\2"\3', body, flags=re.I)
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"reply is not valid JSON: {exc}", text) from None


def _approx_tokens(text: str) -> int:
    return len(text.split())


class ScriptedBackend:
    """Deterministic canned replies.

    ``table`` maps a template id to a reply string, a list of replies served in
    turn, or a dict keyed by selector. Selectors are tried most specific first:
    ``agent=A|round=R``, ``agent=A``, ``round=R``, then ``default``. Replies may
    use ``$agent``, ``$round`` and ``$epoch``. A ``responder`` callable, when
    given, is asked first and may return ``None`` to fall through to the table.
    """

    name = "scripted"

    def __init__(
        self,
        table: Mapping[str, Any] | None = None,
        responder: Callable[[ChatRequest], str | None] | None = None,
    ):
        self.table = dict(table or {})
        self.responder = responder
        self._served: dict[tuple, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        with Path(path).open(encoding="utf-8") as fh:
            table = json.load(fh)
        if not isinstance(table, dict):
            raise ValueError("scripted table must be a JSON object keyed by template id")
        return cls(table)

    def _lookup(self, request: ChatRequest) -> str:
        entry = self.table.get(request.template_id or "")
        if entry is None:
            entry = self.table.get("*")
        if entry is None:
            raise GatewayError(f"no scripted reply for template {request.template_id!r}")
        key: tuple = (request.template_id,)
        if isinstance(entry, dict):
            meta = request.meta
            agent, rnd = meta.get("agent"), meta.get("round")
            for sel in (f"agent={agent}|round={rnd}", f"agent={agent}", f"round={rnd}", "default"):
                if sel in entry:
                    entry, key = entry[sel], key + (sel,)
                    break
            else:
                raise GatewayError(f"no scripted selector matches for {request.template_id!r}")
        if isinstance(entry, list):
            with self._lock:
                n = self._served.get(key, 0)
                self._served[key] = n + 1
            entry = entry[min(n, len(entry) - 1)]
        subs = {k: "" if v is None else str(v) for k, v in request.meta.items() if k in ("agent", "round", "epoch")}
        return Template(str(entry)).safe_substitute(subs)

    def send(self, request: ChatRequest) -> ChatResponse:
        text = self.responder(request) if self.responder is not None else None
        if text is None:
            text = self._lookup(request)
        return ChatResponse(
            text=text,
            backend=self.name,
            prompt_tokens=_approx_tokens(request.system + request.user),
            completion_tokens=_approx_tokens(text),
        )


class HttpBackend:
    """OpenAI-style ``/chat/completions`` client."""

    name = "http"

    def __init__(self, base_url: str, api_key: str = "", model: str = "gpt-4o", timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.timeout = timeout
        self.session = requests.Session()

    @classmethod
    def from_env(cls, **kwargs) -> "HttpBackend":
        base = os.environ.get("ARENA_LLM_BASE_URL")
        if not base:
            raise BackendUnavailable("ARENA_LLM_BASE_URL is not set")
        return cls(
            base,
            api_key=os.environ.get("ARENA_LLM_API_KEY", ""),
            model=os.environ.get("ARENA_LLM_MODEL", kwargs.pop("model", "gpt-4o")),
            **kwargs,
        )

    def send(self, request: ChatRequest) -> ChatResponse:
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": request.user})
        payload = {
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "top_k": request.top_k,
        }
        if request.expected_format == "json":
            payload["response_format"] = {"type": "json_object"}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        started = time.perf_counter()
        try:
            resp = self.session.post(
                f"{self.base_url}/chat/completions", json=payload, headers=headers, timeout=self.timeout
            )
        except requests.Timeout as exc:
            raise Timeout(str(exc)) from None
        except requests.RequestException as exc:
            raise BackendUnavailable(str(exc)) from None
        latency = time.perf_counter() - started
        if resp.status_code == 429:
            raise RateLimited(f"HTTP 429 from {self.base_url}")
        if resp.status_code >= 500:
            raise BackendUnavailable(f"HTTP {resp.status_code} from {self.base_url}")
        if resp.status_code >= 400:
            raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"unexpected chat-completions payload: {exc}") from None
        usage = body.get("usage") or {}
        return ChatResponse(
            text=text or "",
            backend=self.name,
            latency=latency,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
        )


class Gateway:
    """Single entry point for every large-model call.

    Thread-safe: backends are stateless apart from the scripted reply counters,
    and the ledger serialises its own writes.
    """

    def __init__(
        self,
        backend,
        ledger: RunLedger | None = None,
        prompt_variant: str = "original",
        max_retries: int = 3,
        backoff: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
        decoding: Mapping[str, float] | None = None,
    ):
        if prompt_variant not in ("original", "paraphrased"):
            raise ValueError(f"unknown prompt variant {prompt_variant!r}")
        self.backend = backend
        self.ledger = ledger
        self.prompt_variant = prompt_variant
        self.max_retries = max_retries
        self.backoff = backoff
        self.sleep = sleep
        self.decoding = dict(decoding or {})

    def _coords(self, request: ChatRequest):
        m = request.meta
        return m.get("epoch"), m.get("round"), m.get("agent")

    def _send_with_retry(self, request: ChatRequest) -> ChatResponse:
        attempt = 0
        while True:
            try:
                return self.backend.send(request)
            except TRANSIENT as exc:
                if attempt >= self.max_retries:
                    raise
                if self.ledger is not None:
                    self.ledger.warn(
                        f"retrying after {type(exc).__name__}: {exc}",
                        *self._coords(request),
                        template=request.template_id,
                    )
                self.sleep(self.backoff * (2**attempt))
                attempt += 1

    def complete(self, request: ChatRequest) -> ChatResponse:
        """Send ``request``; for ``expected_format="json"`` the reply is parsed into ``parsed``."""
        if request.expected_format == "json":
            return self.complete_parsed(request, parse_json_reply, REPAIR_JSON, MalformedJson)
        return self._complete_once(request)

    def _complete_once(self, request: ChatRequest) -> ChatResponse:
        coords = self._coords(request)
        if self.ledger is not None:
            self.ledger.append(
                "llm_request", *coords,
                template=request.template_id,
                format=request.expected_format,
                prompt=request.user,
            )
        response = self._send_with_retry(request)
        if self.ledger is not None:
            self.ledger.append(
                "llm_response", *coords,
                template=request.template_id,
                backend=response.backend,
                latency=round(response.latency, 6),
                tokens=[response.prompt_tokens, response.completion_tokens],
                text=response.text,
            )
        return response

    def complete_parsed(
        self,
        request: ChatRequest,
        parse: Callable[[str], Any],
        repair_note: str,
        error: type[Exception],
    ) -> ChatResponse:
        """Complete and parse; on a parse failure re-prompt once with ``repair_note`` appended."""
        response = self._complete_once(request)
        try:
            response.parsed = parse(response.text)
            return response
        except (ValueError, KeyError) as first:
            if self.ledger is not None:
                self.ledger.warn(f"unparseable reply, re-prompting: {first}", *self._coords(request),
                                 template=request.template_id)
        repair = replace(request, user=f"{request.user}\n\n{repair_note}", meta={**request.meta, "repair": True})
        response = self._complete_once(repair)
        try:
            response.parsed = parse(response.text)
        except (ValueError, KeyError) as exc:
            if isinstance(exc, error):
                raise
            raise error(f"reply still malformed after repair: {exc}") from None
        return response

    def request(
        self,
        template_id: str,
        bindings: Mapping[str, Any],
        *,
        expected_format: str = "free",
        preamble: str = "",
        suffix: str = "",
        meta: Mapping[str, Any] | None = None,
    ) -> ChatRequest:
        """Build a request for ``template_id`` (swapped for its paraphrase when configured)."""
        resolved = prompts.resolve(template_id, self.prompt_variant)
        body = prompts.render(resolved, dict(bindings))
        text = "\n\n".join(part for part in (preamble.strip("\n"), body.rstrip("\n"), suffix.strip("\n")) if part)
        decoding = {k: self.decoding[k] for k in ("temperature", "top_k", "top_p") if k in self.decoding}
        return ChatRequest(
            user=text,
            expected_format=expected_format,
            template_id=resolved,
            meta={**(meta or {}), "template": resolved, "bindings": dict(bindings)},
            **decoding,
        )

    def ask(self, template_id: str, bindings: Mapping[str, Any], **kwargs) -> ChatResponse:
        return self.complete(self.request(template_id, bindings, **kwargs))
