import numpy as np
import pytest

from cartanlab.models import make_model

CORE_MODELS = ["pair-R2", "translation-R2", "se2-action", "so3-sphere",
               "gauge-se2-so2", "isojet-sphere"]

FLAT_MODELS = ["pair-R2", "translation-R2", "se2-action", "so3-sphere",
               "gauge-se2-so2", "isojet-plane", "isojet-sphere",
               "isojet-hyperbolic"]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def zoo():
    """Session-shared instances of every registered model with its connection."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = make_model(name)
        return cache[name]

    return get
