import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from credfield.agent import AgentProfile, InProcessTransport, enrol_flow
from credfield.core import canonical_origin
from credfield.errors import HarnessMisconfigured
from credfield.server import AuthServer, PolicyMode, ServerConfig

VECTORS_PATH = os.path.join(os.path.dirname(__file__), "data", "derive_vectors.json")

START_TIME = 1_700_000_000
ORIGIN_URL = "https://bank.example"


@pytest.fixture(scope="session")
def vectors():
    with open(VECTORS_PATH, "r", encoding="utf-8") as handle:
        return json.load(handle)


class Env:
    """One server plus a shared fake clock and a victim-less transport."""

    def __init__(self, policy=None, **config_overrides):
        self.origin = canonical_origin(ORIGIN_URL)
        self.clock = [float(START_TIME)]
        self.config = ServerConfig(
            origin=self.origin,
            policy=policy or PolicyMode.high_security(),
            **config_overrides,
        )
        self.server = AuthServer(self.config)
        self.transport = InProcessTransport(self.server, clock=lambda: self.clock[0])

    def now(self) -> int:
        return int(self.clock[0])

    def advance(self, seconds: int) -> None:
        self.clock[0] += seconds

    def new_profile(self, **kwargs) -> AgentProfile:
        return AgentProfile.ephemeral(clock=lambda: self.clock[0], **kwargs)

    def enrolled_profile(self, user_id: str, password: str) -> AgentProfile:
        profile = self.new_profile()
        decision = enrol_flow(
            profile, self.transport, self.origin, user_id, password, password
        )
        if not decision.accepted:
            raise HarnessMisconfigured(f"enrolment failed: {decision.code()}")
        return profile


@pytest.fixture
def env():
    return Env()
