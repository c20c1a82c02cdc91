import random

import pytest

from flowmesh.runtime import RuntimeConfig


@pytest.fixture
def rng():
    return random.Random(0xF10)


@pytest.fixture
def fast_config():
    """Runtime tuned for tests: tight source loop, short drains and backoffs."""
    return RuntimeConfig(
        source_interval=0.0,
        backoff_initial=0.05,
        drain_timeout=2.0,
        unary_deadline=10.0,
    )
