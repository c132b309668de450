import json
from datetime import date, datetime, timedelta

import pytest

from newsarena.data import NewsDB, NewsItem, Window, WindowMeta


def write_series(path, values, start=datetime(2019, 1, 1), step=timedelta(days=1), extra=None):
    lines = ["timestamp,value" + ("," + ",".join(extra) if extra else "")]
    for i, v in enumerate(values):
        row = f"{(start + i * step).isoformat()},{v}"
        if extra:
            row += "," + ",".join(str(extra[k][i]) for k in extra)
        lines.append(row)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_news(path, items):
    path.write_text("".join(json.dumps(it) + "\n" for it in items))
    return path


def make_window(wid, history, target, start=date(2019, 1, 10), region="NSW"):
    start_dt = datetime.combine(start, datetime.min.time())
    meta = WindowMeta(region, start_dt, start_dt + timedelta(days=len(history)), timedelta(days=1))
    return Window(wid, wid * len(target), tuple(history), tuple(target), meta)


@pytest.fixture
def tiny_news():
    items = [
        NewsItem(date(2019, 1, 5), "NSW", "A heatwave warning is in force across NSW."),
        NewsItem(date(2019, 1, 8), "VIC", "The football grand final sells out in VIC."),
        NewsItem(date(2019, 1, 12), "NSW", "A storm brings down power lines in NSW."),
        NewsItem(date(2019, 2, 20), "SA", "A new factory opens its doors in SA."),
    ]
    return NewsDB(items)


@pytest.fixture(scope="session")
def sim_data(tmp_path_factory):
    from newsarena.sim import generate_dataset

    return generate_dataset(tmp_path_factory.mktemp("sim"), seed=0)


@pytest.fixture
def sim_config(sim_data):
    from newsarena.orchestrator import RunConfig

    series, news = sim_data
    return RunConfig(agents=4, rounds=2, epochs=2, alpha=0.7, series_path=str(series), news_path=str(news))
