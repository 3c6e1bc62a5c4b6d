import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from msls.gfield import field_for_q

settings.register_profile(
    "msls",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("msls")

SLOW = os.environ.get("MSLS_SLOW") == "1"


def pytest_collection_modifyitems(config, items):
    if SLOW:
        return
    skip = pytest.mark.skip(reason="set MSLS_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def fields():
    return {q: field_for_q(q) for q in (2, 3, 4, 5, 7, 8, 9)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
