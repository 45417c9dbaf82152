import pytest

from recloop.catalog import synthetic_corpus
from recloop.sim import build_latent


@pytest.fixture(scope="session")
def corpus():
    return synthetic_corpus()


@pytest.fixture(scope="session")
def latent(corpus):
    return build_latent(corpus, epochs=300, seed=0)
