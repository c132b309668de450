"""
Round scores, compounding and elimination
=========================================

The score arithmetic on its own, without any model calls.
"""

import numpy as np

from newsarena.agents import LOW, Agent
from newsarena.evaluation import apply_sf, compute_em, elimination_count, update_cs
from newsarena.metrics import hhi
from newsarena.prediction import Forecast, aggregate

rng = np.random.default_rng(7)
agents = [Agent(i, LOW) for i in range(1, 11)]
skill = {a.id: rng.uniform(0.04, 0.12) for a in agents}

# five rounds: each agent's round MAPE is its skill plus noise
for _ in range(5):
    living = [a for a in agents if a.alive]
    mapes = {a.id: max(0.005, skill[a.id] + rng.normal(0, 0.01)) for a in living}
    new = update_cs({a.id: a.cumulative_score for a in living}, mapes)
    for a in living:
        a.cumulative_score, a.last_mape = new[a.id], mapes[a.id]

ranked = sorted(compute_em(mapes), key=lambda s: s.rank)
print("last round:", [(s.agent, round(s.mape, 4), round(s.top, 2)) for s in ranked[:3]], "...")
print("HHI of cumulative scores:", round(hhi([a.cumulative_score for a in agents]), 4))

print("agents to drop at alpha 0.7:", elimination_count(10, 0.7))
survivors, eliminated = apply_sf(agents, 0.7)
print("eliminated:", sorted(a.id for a in eliminated))

# the survivors' forecasts are blended with weights proportional to their scores
forecasts = {a.id: Forecast(0, a.id, (100 * (1 + skill[a.id]),)) for a in survivors}
ensemble = aggregate(forecasts, {a.id: a.cumulative_score for a in survivors})
print("weighted ensemble:", round(ensemble.values[0], 3))
