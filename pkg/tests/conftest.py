import numpy as np
import pytest

from emproj.calibrate import ChainConfig, run_mh
from emproj.io import ingest_observations
from emproj.paramspace import join_params
from emproj.scenarios import load_scenario
from emproj.synthetic import TRUE_MODEL, TRUE_STAT

FIXTURE_CSV = "src/emproj/data/synthetic_observations.csv"


@pytest.fixture(scope="session")
def fixture_obs():
    from importlib import resources
    ref = resources.files("emproj.data").joinpath("synthetic_observations.csv")
    with resources.as_file(ref) as path:
        return ingest_observations(path)


@pytest.fixture(scope="session")
def standard_scenario():
    return load_scenario("standard")


@pytest.fixture(scope="session")
def truth_vector():
    return join_params(TRUE_MODEL, TRUE_STAT)


@pytest.fixture(scope="session")
def small_ensemble(standard_scenario, fixture_obs, truth_vector):
    """A short but usable ensemble for projection-level tests."""
    config = ChainConfig(n_chains=2, n_iterations=8000, burn_in=3000,
                         thin=10, seed=42)
    return run_mh(standard_scenario, fixture_obs, config,
                  start=np.asarray(truth_vector))
