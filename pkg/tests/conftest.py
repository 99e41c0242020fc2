import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # shared oracle helpers

from ostbcsim import experiments


class ResultsCache:
    """Session-wide cache so the acceptance suite and the experiment tests
    run each heavy figure configuration at most once."""

    def __init__(self):
        self._store = {}

    def figure(self, figure, **overrides):
        key = (figure, tuple(sorted(overrides.items())))
        if key not in self._store:
            cfg = experiments.default_config(figure, **overrides)
            cfg.validate()
            workers = experiments._worker_count(cfg)
            for cid in cfg.codes:
                experiments.get_evaluator(experiments.CodeId(cid))
            out = experiments.FIGURES[figure].runner(cfg, None, workers)
            self._store[key] = {
                name: [dict(zip(header, row)) for row in rows]
                for name, (header, rows) in out.items()
            }
        return self._store[key]


@pytest.fixture(scope="session")
def sim_cache():
    return ResultsCache()


@pytest.fixture(scope="session")
def rates_by(sim_cache):
    """Helper: {(key columns) -> row dict} lookup for a figure's CSV."""

    def lookup(figure, csv_name, keys, **overrides):
        rows = sim_cache.figure(figure, **overrides)[csv_name]
        return {tuple(r[k] for k in keys): r for r in rows}

    return lookup
