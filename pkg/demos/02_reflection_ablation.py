"""
Checking adopted clauses by ablation
====================================

An agent reads a competitor's disclosure and adopts all of it. Every new
clause is then removed in turn: if the forecast gets worse without it the
clause stays, otherwise a judge decides whether to drop it.
"""

from datetime import date, datetime, timedelta

from newsarena.agents import HIGH, Agent, LogicDocument
from newsarena.communication import DisclosureMessage
from newsarena.data import NewsDB, NewsItem, Window, WindowMeta
from newsarena.evaluation import compute_em
from newsarena.gateway import Gateway, ScriptedBackend
from newsarena.prediction import ForecastPipeline, ScriptedPredictor
from newsarena.reflection import reflect
from newsarena.sim import DECOY, RELEVANT, SimulatedLLM

heat, storm = RELEVANT[0], RELEVANT[2]
football = DECOY[1]

news = NewsDB([
    NewsItem(date(2019, 1, 5), "NSW", heat.headlines[0].format(region="NSW")),
    NewsItem(date(2019, 1, 8), "NSW", football.headlines[0].format(region="NSW")),
    NewsItem(date(2019, 1, 12), "NSW", storm.headlines[0].format(region="NSW")),
])
# only the heatwave and storm items carry signal for the predictor
relevant = {it.id for it in news if "football" not in it.text}

start = datetime(2019, 1, 8)
window = Window(0, 0, (100.0,) * 7, (100.0, 104.0),
                WindowMeta("NSW", start, start + timedelta(days=7), timedelta(days=1)))

gateway = Gateway(ScriptedBackend(responder=SimulatedLLM()))
pipeline = ForecastPipeline(gateway, news, ScriptedPredictor(relevant, base=0.12, gain=0.01, penalty=0.005))

agent = Agent(1, HIGH, LogicDocument((heat.clause,), 1))
inbox = [DisclosureMessage(2, 1, "all", f"- {football.clause}\n- {storm.clause}")]
scores = compute_em({1: 0.10, 2: 0.08})

outcome = reflect(agent, inbox, scores, gateway, pipeline, [window], judge="model")

for d in outcome.deltas:
    print(f"{d.classification:>4}  with {d.ir_with:.3f}  without {d.ir_without:.3f}  {d.clause}")
print("removed:", [d.clause for d in outcome.removed])
print("final logic:")
print(outcome.final.to_text())
