import functools

import numpy as np
import pytest

from iadp.scenarios import run_scenario
from iadp.sim import SimConfig


@functools.lru_cache(maxsize=None)
def cached_run(scenario="s1", controller="iadp", dt=1e-3, t_end=80.0, seed=0,
               xdot_source="backward_difference"):
    """Full scenario episodes are expensive; share them across tests."""
    cfg = SimConfig(scenario=scenario, controller=controller, dt=dt,
                    t_end=t_end, seed=seed, xdot_source=xdot_source)
    return run_scenario(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
