"""
A full tournament on synthetic data
===================================

Six agents compete for two epochs of three rounds. Everything runs offline:
the simulated model answers every prompt and the scripted predictor rewards
picking news from the topics that actually move the series.
"""

import tempfile
from pathlib import Path

from newsarena import RunConfig, run
from newsarena.report import write_report
from newsarena.sim import generate_dataset

work = Path(tempfile.mkdtemp(prefix="arena-demo-"))
series, news = generate_dataset(work / "data", seed=0)

config = RunConfig(agents=6, ci=0.5, epochs=2, rounds=3, seed=0,
                   series_path=str(series), news_path=str(news))
result = run(config, work / "ledger.jsonl")

# population after each epoch end and the validation ensemble error
for rec in result.ledger.of_type("epoch_end"):
    print(f"epoch {rec['epoch']}: {rec['population']} agents, "
          f"validation MAPE {rec['validation_mape']:.4f}, HHI {rec['hhi']:.3f}")

for agent in sorted(result.agents.values(), key=lambda a: -a.cumulative_score):
    state = "alive" if agent.alive else "out"
    print(f"agent {agent.id} ({agent.profile}, {state}): CS {agent.cumulative_score:.2f}")
    for clause in agent.logic.clauses:
        print(f"    {clause}")

tables = write_report(work / "ledger.jsonl", work / "report")
print("report tables:", ", ".join(sorted(tables)))
print("everything is under", work)
