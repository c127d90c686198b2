import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

import fmdeploy
from fmdeploy.deploy import NodeDescriptor
from fmdeploy.dsl import parse_deployment_spec, parse_model

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(fmdeploy.__file__).parent / "fixtures"
APP_FM = FIXTURES / "control-admittance.fm"
HAB_FM = FIXTURES / "hab.fm"
CLOUD_FM = FIXTURES / "cloudvm.fm"
SPEC_DEP = FIXTURES / "control-admittance.dep"


def node(text: str) -> NodeDescriptor:
    return NodeDescriptor.from_model(parse_model(text))


@pytest.fixture(scope="session")
def app():
    return parse_model(APP_FM.read_text(), filename=str(APP_FM))


@pytest.fixture(scope="session")
def nodes():
    return [node(HAB_FM.read_text()), node(CLOUD_FM.read_text())]


@pytest.fixture(scope="session")
def spec(app, nodes):
    return parse_deployment_spec(SPEC_DEP.read_text(), app, nodes, filename=str(SPEC_DEP))
