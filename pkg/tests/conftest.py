import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def hopf():
    from gcverify.examples import hopf_fixture

    return hopf_fixture()


@pytest.fixture(scope="session")
def phi22():
    from gcverify.examples import phi22_fixture

    return phi22_fixture()


@pytest.fixture(scope="session")
def pair4():
    from gcverify.examples import pair_groupoid_fixture

    return pair_groupoid_fixture()
