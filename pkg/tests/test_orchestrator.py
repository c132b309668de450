import json
from collections import Counter

import pytest

from newsarena.errors import ConfigInvalid, DataUnloadable, LedgerCorrupt, TooFewAgents
from newsarena.ledger import RunLedger, read_ledger
from newsarena.orchestrator import Arena, RunConfig, check_termination, replay, resume, run


@pytest.mark.parametrize("history,stop", [([0.10, 0.08], False), ([0.08, 0.0799], True), ([0.1], False),
                                          ([0.08, 0.09], True)])
def test_check_termination(history, stop):
    assert check_termination(history, 0.001) is stop


def test_check_termination_limits():
    assert check_termination([0.2, 0.1], 0.001, max_epochs=2)
    with pytest.raises(ValueError):
        check_termination([], 0.001)


def test_config_from_toml_resolves_relative_paths(tmp_path):
    (tmp_path / "cfg").mkdir()
    path = tmp_path / "cfg" / "run.toml"
    path.write_text('agents = 6\nsplit = [7, 2, 1]\nseries_path = "data/s.csv"\nnews_path = "/abs/n.jsonl"\n')
    c = RunConfig.from_file(path)
    assert c.agents == 6 and c.split == (7, 2, 1)
    assert c.series_path == str(tmp_path / "cfg" / "data" / "s.csv")
    assert c.news_path == "/abs/n.jsonl"


def test_config_from_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"alpha": 0.5, "elimination_count_override": [1, None]}))
    c = RunConfig.from_file(path)
    assert c.alpha == 0.5 and c.elimination_count_override == (1, None)
    assert "out" not in c.to_record()


@pytest.mark.parametrize("changes", [
    {"agents": 1}, {"alpha": 0.0}, {"alpha": 1.5}, {"ci": 2.0}, {"mie_mode": "x"},
    {"llm_backend": "scripted"}, {"predictor": "remote"}, {"split": (1, 1)}, {"k_eval": 0},
])
def test_invalid_configs(sim_config, changes):
    with pytest.raises(ConfigInvalid):
        sim_config.replace(**changes).validate()


def test_config_rejects_unknown_keys_and_bad_files(tmp_path):
    with pytest.raises(ConfigInvalid):
        RunConfig.from_mapping({"agnets": 3})
    bad = tmp_path / "bad.toml"
    bad.write_text("agents = = 3")
    with pytest.raises(ConfigInvalid):
        RunConfig.from_file(bad)
    with pytest.raises(ConfigInvalid):
        RunConfig.from_file(tmp_path / "missing.toml")
    with pytest.raises(ConfigInvalid):
        RunConfig().validate()


def test_missing_data_is_unloadable(sim_config, tmp_path):
    with pytest.raises(DataUnloadable):
        run(sim_config.replace(series_path=str(tmp_path / "nope.csv")))


def _arena(config, ledger=None):
    arena = Arena(config, ledger or RunLedger())
    arena.start()
    return arena


def test_round_record_counts(sim_config):
    arena = _arena(sim_config.replace(agents=3))
    arena.run_round(1, 1, [w.id for w in arena.train[:2]])
    counts = Counter(r["type"] for r in arena.ledger.records if r["epoch"] == 1)
    assert counts["selection"] == 6 and counts["forecast"] == 6
    for kind in ("em", "message", "reflection", "logic"):
        assert counts[kind] == 3
    assert counts["round_start"] == counts["round_end"] == 1
    order = [r["type"] for r in arena.ledger.records if r["epoch"] == 1 and r["type"] not in
             ("llm_request", "llm_response", "warning")]
    firsts = [order.index(k) for k in ("round_start", "selection", "forecast", "em", "message", "reflection",
                                        "round_end")]
    assert firsts == sorted(firsts)


def test_best_agent_doubles_and_worst_unchanged(sim_config):
    arena = _arena(sim_config)
    arena.run_round(1, 1, [w.id for w in arena.train[:4]])
    em = [r for r in arena.ledger.of_type("em")]
    best = min(em, key=lambda r: r["mape"])
    worst = max(em, key=lambda r: r["mape"])
    if best["mape"] != worst["mape"]:
        assert best["m"] == 2 * best["m_prev"]
        assert worst["m"] == worst["m_prev"]


def test_round_needs_two_agents(sim_config):
    arena = _arena(sim_config.replace(agents=2))
    arena.agents[1].alive = False
    with pytest.raises(TooFewAgents):
        arena.run_round(1, 1, [arena.train[0].id])


def test_alpha_one_never_eliminates(sim_config):
    result = run(sim_config.replace(epochs=1, alpha=1.0))
    assert len(result.survivors) == 4
    (elim,) = result.ledger.of_type("elimination")
    assert elim["eliminated"] == []
    assert len(list(result.ledger.of_type("round_end"))) == sim_config.rounds


def test_elimination_trajectory_and_override(sim_config):
    result = run(sim_config.replace(agents=6, epochs=2, alpha=0.7))
    assert [r["population"] for r in result.ledger.of_type("epoch_end")] == [5, 4]
    result = run(sim_config.replace(agents=6, epochs=2, elimination_count_override=(2, 0)))
    assert [r["population"] for r in result.ledger.of_type("epoch_end")] == [4, 4]


def test_same_seed_same_ledger(sim_config, tmp_path):
    run(sim_config, tmp_path / "a.jsonl")
    run(sim_config.replace(out="elsewhere"), tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    run(sim_config.replace(seed=1), tmp_path / "c.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() != (tmp_path / "c.jsonl").read_bytes()


def test_replay_rebuilds_agents(sim_config, tmp_path):
    path = tmp_path / "l.jsonl"
    result = run(sim_config, path)
    rebuilt = replay(path)
    assert {i: a.as_dict() for i, a in rebuilt.items()} == {i: a.as_dict() for i, a in result.agents.items()}


def test_replay_detects_tampering(sim_config, tmp_path):
    path = tmp_path / "l.jsonl"
    run(sim_config, path)
    records = read_ledger(path)
    em = next(r for r in records if r["type"] == "em")
    em["m"] += 1.0
    with pytest.raises(LedgerCorrupt):
        replay(records)


def _strip(records):
    return [{k: v for k, v in r.items() if k != "seq"} for r in records if r["type"] != "resume"]


@pytest.mark.parametrize("cut_type,nth", [("round_end", 0), ("round_end", 2), ("epoch_end", 0), ("em", 3)])
def test_resume_matches_uninterrupted(sim_config, tmp_path, cut_type, nth):
    full = tmp_path / "full.jsonl"
    expected = run(sim_config, full)
    records = read_ledger(full)
    idx = [i for i, r in enumerate(records) if r["type"] == cut_type][nth]
    crashed = tmp_path / "crashed.jsonl"
    crashed.write_text("".join(line for line in full.read_text().splitlines(keepends=True)[: idx + 1]))
    result = resume(sim_config, crashed)
    assert {i: a.as_dict() for i, a in result.agents.items()} == \
        {i: a.as_dict() for i, a in expected.agents.items()}
    assert _strip(read_ledger(crashed)) == _strip(records)


def test_resume_refuses_other_config_or_finished_run(sim_config, tmp_path):
    path = tmp_path / "l.jsonl"
    run(sim_config, path)
    with pytest.raises(ConfigInvalid):
        resume(sim_config, path)
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:40]))
    with pytest.raises(ConfigInvalid):
        resume(sim_config.replace(seed=9), path)


def test_paraphrased_variant_recorded(sim_config):
    result = run(sim_config.replace(prompt_variant="paraphrased", epochs=1))
    start = next(result.ledger.of_type("run_start"))
    assert start["config"]["prompt_variant"] == "paraphrased"
    templates = {r["template"] for r in result.ledger.of_type("llm_request")}
    assert "ia_publish_alt" in templates and "ia_publish" not in templates


def test_workers_do_not_change_results(sim_config):
    serial = run(sim_config)
    threaded = run(sim_config.replace(workers=4))
    assert {i: a.as_dict() for i, a in serial.agents.items()} == {i: a.as_dict() for i, a in threaded.agents.items()}
    def keep(rs):
        return [{k: v for k, v in r.items() if k != "seq"} for r in rs
                if r["type"] not in ("run_start", "llm_request", "llm_response", "warning")]
    assert keep(serial.ledger.records) == keep(threaded.ledger.records)
