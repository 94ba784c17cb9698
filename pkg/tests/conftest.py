import numpy as np
import pytest

from cvstab import EstimatorConfig, ModelSpec, PenaltyRule
from cvstab.harness import BETA_NONSPARSE, BETA_SPARSE


@pytest.fixture(scope="session")
def paper_spec():
    return ModelSpec(np.array(BETA_SPARSE), 10.0)


@pytest.fixture(scope="session")
def nonsparse_spec():
    return ModelSpec(np.array(BETA_NONSPARSE), 10.0)


@pytest.fixture(scope="session")
def st_sqrt_n():
    return EstimatorConfig("st", PenaltyRule("power-law", c=1.0, a=0.5))


@pytest.fixture(scope="session")
def st_sqrt_n_offset():
    return EstimatorConfig("st", PenaltyRule("power-law", c=1.0, a=0.5), delta=1.0)


@pytest.fixture(scope="session")
def acceptance_cache(tmp_path_factory):
    # repo-local cache so repeated acceptance runs skip the heavy Monte Carlo
    import pathlib

    d = pathlib.Path(__file__).resolve().parent.parent / ".cache" / "acceptance"
    d.mkdir(parents=True, exist_ok=True)
    return str(d)
