import json

import pytest
from fastapi.testclient import TestClient

from conftest import Env, START_TIME
from credfield import wire
from credfield.agent import AgentProfile, decision_from_response
from credfield.core import canonical_origin, derive
from credfield.server import AuthServer, PolicyMode, ServerConfig
from credfield.service import create_app

ORIGIN_URL = "https://bank.example"


@pytest.fixture
def env():
    return Env()


@pytest.fixture
def client(env, tmp_path):
    app = create_app(
        env.server,
        store_path=str(tmp_path / "store.txt"),
        clock=lambda: env.clock[0],
    )
    with TestClient(app, raise_server_exceptions=False) as test_client:
        yield test_client


def fetch_challenge(client, origin=ORIGIN_URL):
    response = client.get("/challenge", params={"origin": origin})
    assert response.status_code == 200
    return wire.challenge_grant_from_json(response.json())


def make_message(env, grant, msg_type, user_id, password, profile, cred_new_password=None):
    cred = derive(
        user_id, grant.challenge, password, env.origin, env.now(), profile.browser_key
    )
    cred_new = None
    if cred_new_password is not None:
        cred_new = derive(
            user_id, grant.challenge, cred_new_password, env.origin, env.now(),
            profile.browser_key,
        )
    msg = wire.AuthMessage(msg_type, user_id, grant.challenge, cred, cred_new)
    return wire.auth_message_to_json(msg)


class TestEndpoints:
    def test_challenge(self, client):
        response = client.get("/challenge", params={"origin": ORIGIN_URL})
        assert response.status_code == 200
        body = response.json()
        assert len(wire.b64u_decode(body["challenge"])) == 32
        assert int(body["expires_at"]) == START_TIME + 300

    def test_challenge_bad_origin(self, client):
        assert client.get("/challenge", params={"origin": "ftp://x"}).status_code == 400
        assert client.get("/challenge").status_code == 400

    def test_enrol_login_change_cycle(self, env, client):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        response = client.post(
            "/enrol", json=make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile)
        )
        assert response.status_code == 200
        assert response.json() == {"decision": "Accept", "browser_known": True}

        grant = fetch_challenge(client)
        response = client.post(
            "/login", json=make_message(env, grant, wire.MSG_VERIFY, "alice", "pw", profile)
        )
        assert response.status_code == 200

        grant = fetch_challenge(client)
        response = client.post(
            "/change",
            json=make_message(env, grant, wire.MSG_CHANGE, "alice", "pw", profile, "pw2"),
        )
        assert response.status_code == 200

        grant = fetch_challenge(client)
        response = client.post(
            "/login", json=make_message(env, grant, wire.MSG_VERIFY, "alice", "pw", profile)
        )
        assert response.status_code == 401
        assert response.json()["code"] == "UnknownPassword"

    def test_consumed_challenge_code(self, env, client):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        body = make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile)
        assert client.post("/enrol", json=body).status_code == 200
        login_body = make_message(env, grant, wire.MSG_VERIFY, "alice", "pw", profile)
        response = client.post("/login", json=login_body)
        assert response.status_code == 401
        assert response.json()["code"] == "AlreadyConsumed"

    def test_user_exists_409(self, env, client):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        assert client.post(
            "/enrol", json=make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile)
        ).status_code == 200
        grant = fetch_challenge(client)
        response = client.post(
            "/enrol", json=make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile)
        )
        assert response.status_code == 409
        assert response.json()["code"] == "UserExists"

    def test_step_up_428(self, env, client):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        assert client.post(
            "/enrol", json=make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile)
        ).status_code == 200
        stranger = env.new_profile()
        grant = fetch_challenge(client)
        response = client.post(
            "/login", json=make_message(env, grant, wire.MSG_VERIFY, "alice", "pw", stranger)
        )
        assert response.status_code == 428
        assert response.json()["code"] == "StepUpRequired"

    def test_malformed_bodies_400(self, client):
        assert client.post("/login", content=b"not json").status_code == 400
        assert client.post("/login", json={"version": 1}).status_code == 400
        assert client.post("/login", json={"version": 9, "type": 2}).status_code == 400

    def test_type_endpoint_mismatch_400(self, env, client):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        body = make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile)
        assert client.post("/login", json=body).status_code == 400

    def test_events_endpoint(self, env, client):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        client.post("/enrol", json=make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile))
        stranger = env.new_profile()
        grant = fetch_challenge(client)
        client.post("/login", json=make_message(env, grant, wire.MSG_VERIFY, "alice", "pw", stranger))
        events = client.get("/events").json()
        assert events and events[-1]["kind"] == "StepUpRequired"
        assert events[-1]["user_id"] == "alice"

    def test_store_persisted_on_mutation(self, env, client, tmp_path):
        profile = env.new_profile()
        grant = fetch_challenge(client)
        client.post("/enrol", json=make_message(env, grant, wire.MSG_ENROL, "alice", "pw", profile))
        from credfield.server import CredentialStore

        loaded = CredentialStore.load(str(tmp_path / "store.txt"))
        assert "alice" in loaded.users

    def test_static_assets_served(self, env, tmp_path):
        assets = tmp_path / "assets"
        assets.mkdir()
        (assets / "index.html").write_text("<html><body>demo</body></html>")
        app = create_app(env.server, assets_dir=str(assets), clock=lambda: env.clock[0])
        with TestClient(app) as client:
            response = client.get("/")
            assert response.status_code == 200
            assert "demo" in response.text
            # API routes still win over the static mount
            assert client.get("/challenge", params={"origin": ORIGIN_URL}).status_code == 200


class TestDifferential:
    def test_service_matches_in_process_decisions(self, tmp_path):
        """The HTTP facade and direct server calls agree on identical inputs."""
        origin = canonical_origin(ORIGIN_URL)
        clock = [float(START_TIME)]

        config_a = ServerConfig(origin=origin, policy=PolicyMode.high_security())
        config_b = ServerConfig(origin=origin, policy=PolicyMode.high_security())
        direct = AuthServer(config_a)
        backed = AuthServer(config_b)
        app = create_app(backed, clock=lambda: clock[0])

        profile = AgentProfile.ephemeral(clock=lambda: clock[0])
        stranger = AgentProfile.ephemeral(clock=lambda: clock[0])

        with TestClient(app, raise_server_exceptions=False) as client:
            def both(msg_builder):
                """Build one message against synchronized challenges and
                submit to both stacks."""
                grant_direct = direct.issue_challenge(origin, int(clock[0]))
                grant_http = fetch_challenge(client)
                msg_d = msg_builder(grant_direct)
                msg_h = msg_builder(grant_http)
                handler = {
                    wire.MSG_ENROL: direct.enrol,
                    wire.MSG_VERIFY: direct.verify,
                    wire.MSG_CHANGE: direct.change_password,
                }[msg_d.msg_type]
                decision_direct = handler(msg_d, int(clock[0]))
                path = {1: "/enrol", 2: "/login", 3: "/change"}[msg_h.msg_type]
                response = client.post(path, json=wire.auth_message_to_json(msg_h))
                decision_http = decision_from_response(response.status_code, response.json())
                assert decision_http.kind == decision_direct.kind
                assert decision_http.reason == decision_direct.reason
                return decision_direct

            def enrol_builder(grant):
                cred = derive("u", grant.challenge, "pw", origin, int(clock[0]),
                              profile.browser_key)
                return wire.AuthMessage(wire.MSG_ENROL, "u", grant.challenge, cred)

            def login_builder(password, agent_profile, browser_time=None):
                def build(grant):
                    cred = derive(
                        "u", grant.challenge, password, origin,
                        browser_time if browser_time is not None else int(clock[0]),
                        agent_profile.browser_key,
                    )
                    return wire.AuthMessage(wire.MSG_VERIFY, "u", grant.challenge, cred)
                return build

            both(enrol_builder)                                  # Accept
            both(enrol_builder)                                  # UserExists
            both(login_builder("pw", profile))                   # Accept
            both(login_builder("bad", profile))                  # UnknownPassword
            both(login_builder("pw", stranger))                  # StepUpRequired
            both(login_builder("pw", profile, browser_time=int(clock[0]) - 500))  # Expired
