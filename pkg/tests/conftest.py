import pytest
from hypothesis import settings

from ontocheck.loading import bundled_workspace, corpus_dir, load_instance_model

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def corpus():
    return corpus_dir()


@pytest.fixture(scope="session")
def ws():
    return bundled_workspace()


@pytest.fixture(scope="session")
def sco(ws):
    return ws["SituationCO"]


@pytest.fixture(scope="session")
def thingfo(ws):
    return ws["ThingFO"]


@pytest.fixture
def fixture_model(corpus):
    def load(name):
        return load_instance_model(corpus / "fixtures" / f"{name}.inst")
    return load
