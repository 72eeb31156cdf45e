import time

import pytest

from anytail import CONSTANT_ROSTER, PROPORTIONAL_ROSTER, ExperimentConfig, default_problem, run_experiment


@pytest.fixture(scope="session")
def benchmark():
    """Full-scale benchmark runs (100 runs x 1000 steps), computed once.

    Returns a getter: benchmark("k", 100) or benchmark("c", 0.25) ->
    (ExperimentResult, elapsed_seconds).
    """
    cache = {}

    def get(kind, value):
        key = (kind, value)
        if key not in cache:
            config = ExperimentConfig(
                problem=default_problem(),
                horizon=1000,
                num_runs=100,
                averagers=CONSTANT_ROSTER if kind == "k" else PROPORTIONAL_ROSTER,
                k=value if kind == "k" else None,
                c=value if kind == "c" else None,
                base_seed=0,
            )
            start = time.perf_counter()
            result = run_experiment(config)
            cache[key] = (result, time.perf_counter() - start)
        return cache[key]

    return get
