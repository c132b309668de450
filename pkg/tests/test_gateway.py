import json
import socket
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from newsarena.errors import BackendUnavailable, GatewayError, MalformedJson, RateLimited, Timeout
from newsarena.gateway import REPAIR_JSON, ChatRequest, Gateway, HttpBackend, ScriptedBackend, parse_json_reply
from newsarena.ledger import RunLedger


def req(template="t", **meta):
    return ChatRequest(user="hi", template_id=template, meta=meta)


def test_scripted_selectors_most_specific_first():
    backend = ScriptedBackend({"t": {"agent=1|round=2": "both", "agent=1": "agent", "round=2": "round", "default": "any"}})
    assert backend.send(req(agent=1, round=2)).text == "both"
    assert backend.send(req(agent=1, round=3)).text == "agent"
    assert backend.send(req(agent=2, round=2)).text == "round"
    assert backend.send(req(agent=2, round=3)).text == "any"


def test_scripted_sequences_and_substitution():
    backend = ScriptedBackend({"t": ["first $agent", "then r$round"]})
    assert [backend.send(req(agent=4, round=1)).text for _ in range(3)] == ["first 4", "then r1", "then r1"]


def test_scripted_is_deterministic_across_instances():
    table = {"t": {"round=1": "a", "default": "b"}}
    texts = [[ScriptedBackend(table).send(req(round=r)).text for r in (1, 2)] for _ in range(2)]
    assert texts[0] == texts[1] == ["a", "b"]


def test_scripted_missing_entry():
    with pytest.raises(GatewayError):
        ScriptedBackend({}).send(req())


def test_scripted_from_file(tmp_path):
    p = tmp_path / "table.json"
    p.write_text(json.dumps({"t": "hello"}))
    assert ScriptedBackend.from_file(p).send(req()).text == "hello"


def test_responder_falls_through_to_table():
    backend = ScriptedBackend({"t": "table"}, responder=lambda r: "live" if r.meta.get("agent") == 1 else None)
    assert backend.send(req(agent=1)).text == "live"
    assert backend.send(req(agent=2)).text == "table"


@pytest.mark.parametrize("text,expected", [
    ('{"like": true}', {"like": True}),
    ('```json\n{"a": 1}\n```', {"a": 1}),
    ('Sure! {"conclusion": no, "reason": "x"} done', {"conclusion": "no", "reason": "x"}),
])
def test_parse_json_reply(text, expected):
    assert parse_json_reply(text) == expected


def test_parse_json_reply_rejects_prose():
    with pytest.raises(MalformedJson):
        parse_json_reply("no json here")


def test_json_request_is_parsed_and_logged():
    ledger = RunLedger()
    gw = Gateway(ScriptedBackend({"t": '{"like": true}'}), ledger)
    resp = gw.complete(ChatRequest(user="u", expected_format="json", template_id="t", meta={"agent": 2}))
    assert resp.parsed == {"like": True}
    assert [r["type"] for r in ledger.records] == ["llm_request", "llm_response"]
    assert ledger.records[0]["agent"] == 2 and ledger.records[0]["prompt"] == "u"


def test_json_repair_reprompts_once():
    seen = []

    def responder(r):
        seen.append(r.user)
        return "garbage" if len(seen) == 1 else '{"ok": 1}'

    gw = Gateway(ScriptedBackend(responder=responder), RunLedger())
    resp = gw.complete(ChatRequest(user="u", expected_format="json", template_id="t"))
    assert resp.parsed == {"ok": 1}
    assert seen[1].endswith(REPAIR_JSON)


def test_json_repair_gives_up():
    gw = Gateway(ScriptedBackend({"t": "garbage"}))
    with pytest.raises(MalformedJson):
        gw.complete(ChatRequest(user="u", expected_format="json", template_id="t"))


class Flaky:
    name = "flaky"

    def __init__(self, failures, exc=RateLimited):
        self.failures = failures
        self.exc = exc
        self.calls = 0

    def send(self, request):
        self.calls += 1
        if self.calls <= self.failures:
            raise self.exc("busy")
        return ScriptedBackend({"*": "ok"}).send(request)


def test_retry_with_exponential_backoff():
    sleeps = []
    backend = Flaky(2)
    gw = Gateway(backend, RunLedger(), max_retries=3, backoff=0.5, sleep=sleeps.append)
    assert gw.complete(req()).text == "ok"
    assert sleeps == [0.5, 1.0]
    assert sum(r["type"] == "warning" for r in gw.ledger.records) == 2


def test_retries_exhausted():
    gw = Gateway(Flaky(10, Timeout), max_retries=2, sleep=lambda s: None)
    with pytest.raises(Timeout):
        gw.complete(req())
    assert gw.backend.calls == 3


def test_request_renders_variant_and_records_bindings():
    gw = Gateway(ScriptedBackend({}), prompt_variant="paraphrased", decoding={"temperature": 0.1})
    r = gw.request("self_reflection", {"logic": "L"}, preamble="P", suffix="S", meta={"agent": 1})
    assert r.template_id == "self_reflection_alt"
    assert r.user.startswith("P\n\n") and r.user.endswith("\n\nS")
    assert r.meta["bindings"] == {"logic": "L"} and r.meta["agent"] == 1
    assert (r.temperature, r.top_k, r.top_p) == (0.1, 20, 0.8)


class _Handler(BaseHTTPRequestHandler):
    status = 200
    bodies = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        type(self).bodies.append((self.path, json.loads(self.rfile.read(length)), self.headers.get("Authorization")))
        if self.path.endswith("/embeddings"):
            payload = {"data": [{"embedding": [1.0, 0.0]}]}
        else:
            payload = {"choices": [{"message": {"content": "pong"}}], "usage": {"prompt_tokens": 3, "completion_tokens": 1}}
        data = json.dumps(payload).encode()
        self.send_response(type(self).status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    _Handler.status = 200
    _Handler.bodies = []
    httpd = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}/v1"
    httpd.shutdown()


def test_http_backend_round_trip(server):
    backend = HttpBackend(server, api_key="k", model="m")
    resp = backend.send(ChatRequest(user="ping", system="sys", expected_format="json"))
    assert resp.text == "pong" and (resp.prompt_tokens, resp.completion_tokens) == (3, 1)
    path, body, auth = _Handler.bodies[0]
    assert path == "/v1/chat/completions" and auth == "Bearer k"
    assert body["messages"] == [{"role": "system", "content": "sys"}, {"role": "user", "content": "ping"}]
    assert (body["temperature"], body["top_k"], body["top_p"]) == (0.5, 20, 0.8)
    assert body["response_format"] == {"type": "json_object"}


@pytest.mark.parametrize("status,exc", [(429, RateLimited), (503, BackendUnavailable), (400, GatewayError)])
def test_http_status_mapping(server, status, exc):
    _Handler.status = status
    with pytest.raises(exc):
        HttpBackend(server).send(ChatRequest(user="x"))


def _closed_port():
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


def test_unreachable_host_after_retries():
    backend = HttpBackend(f"http://127.0.0.1:{_closed_port()}", timeout=2)
    sleeps = []
    gw = Gateway(backend, max_retries=2, sleep=sleeps.append)
    with pytest.raises(BackendUnavailable):
        gw.complete(ChatRequest(user="x"))
    assert len(sleeps) == 2


def test_http_from_env(monkeypatch):
    monkeypatch.delenv("ARENA_LLM_BASE_URL", raising=False)
    with pytest.raises(BackendUnavailable):
        HttpBackend.from_env()
    monkeypatch.setenv("ARENA_LLM_BASE_URL", "http://x/v1/")
    monkeypatch.setenv("ARENA_LLM_API_KEY", "secret")
    b = HttpBackend.from_env()
    assert (b.base_url, b.api_key) == ("http://x/v1", "secret")
