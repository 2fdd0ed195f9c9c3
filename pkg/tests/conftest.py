"""Shared fixtures and hypothesis profile."""
import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "fast",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session")
def data1():
    from gridfence.synth import preset

    return preset("data1")


@pytest.fixture(scope="session")
def data2():
    from gridfence.synth import preset

    return preset("data2")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # first anneal call triggers numba compilation (disk-cached afterwards);
    # do it once here so timing-sensitive tests measure the solver, not the JIT
    import numpy as np

    from gridfence.model import AreaWindow, Weights, build_model
    from gridfence.ingest import PoiCell
    from gridfence.solvers import AnnealSchedule, solve_anneal

    v = np.array([[1.0, 0.5], [0.25, 0.0]])
    m = build_model(v, PoiCell(0, 0), Weights(), AreaWindow(1, 2))
    solve_anneal(m, AnnealSchedule(sweeps=64, restarts=1, seed=0))
