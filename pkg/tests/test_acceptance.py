"""Acceptance suite: one test per exit criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines
as they complete. Every tolerance is pinned here; nothing is calibrated
at run time.
"""

import base64
import json
import logging
import secrets
import statistics
import subprocess
import sys
import time

import pytest

from conftest import Env, START_TIME
from credfield import wire
from credfield.agent import AgentProfile, change_flow, enrol_flow, login
from credfield.attacks import ScenarioId, expected_blocked, run_all
from credfield.bench import run_comparison
from credfield.core import (
    ChallengeBytes,
    PublicKey,
    SecretScalar,
    canonical_origin,
    derive,
    derive_password_scalar,
    sign_deterministic,
    store_identifier,
)
from credfield.errors import RejectReason
from credfield.server import ChallengeRecord, PolicyMode
from credfield.service import create_app


def verdict(number: int, text: str) -> None:
    print(f"\nACCEPTANCE {number}: PASS — {text}")


def random_user() -> str:
    return "user-" + secrets.token_hex(6)


def random_password() -> str:
    return secrets.token_urlsafe(12)


def test_criterion_1_protocol_round_trip():
    """100 random (user, password) pairs: enrol, login, change, re-login."""
    env = Env()
    started = time.monotonic()
    for _ in range(100):
        user = random_user()
        password = random_password()
        new_password = random_password()
        profile = env.new_profile()

        assert enrol_flow(profile, env.transport, env.origin, user, password, password).accepted
        assert login(profile, env.transport, env.origin, user, password).accepted
        assert change_flow(profile, env.transport, env.origin, user, password, new_password).accepted
        old = login(profile, env.transport, env.origin, user, password)
        assert old.reason is RejectReason.UNKNOWN_PASSWORD
        assert login(profile, env.transport, env.origin, user, new_password).accepted
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"round-trips took {elapsed:.1f}s"
    verdict(1, f"100/100 enrol-login-change round trips in {elapsed:.1f}s (< 60s)")


def test_criterion_2_abuse_suite():
    """Every in-scope abuse scenario ends the way the abuse table says."""
    reports = run_all()
    failures = []
    for report in reports:
        if report.blocked != expected_blocked(report):
            failures.append(report.to_json())
    assert not failures, failures
    blocked = [r for r in reports if r.id is not ScenarioId.ENROLMENT_SUBSTITUTION]
    assert all(r.blocked for r in blocked)
    substitution = [r for r in reports if r.id is ScenarioId.ENROLMENT_SUBSTITUTION]
    assert [r.blocked for r in substitution] == [False, True]
    verdict(2, f"{len(blocked)} scenarios blocked; enrolment substitution succeeds "
               "only with transport integrity off")


def test_criterion_3_replay():
    """1000 byte-exact resubmissions of an accepted message: 0 accepts."""
    env = Env()
    profile = env.enrolled_profile("alice", "pw")
    assert login(profile, env.transport, env.origin, "alice", "pw").accepted
    accepted_bytes = env.transport.transcript[-1]
    msg = wire.decode_auth_message(accepted_bytes)
    assert wire.encode_auth_message(msg) == accepted_bytes

    accepts = 0
    for _ in range(1000):
        if env.transport.submit(msg).accepted:
            accepts += 1
    assert accepts == 0
    verdict(3, "1000 byte-exact replays, 0 accepted")


def test_criterion_4_origin_binding():
    """Credentials derived under spoofed origins always fail at the true origin."""
    env = Env()
    profile = env.enrolled_profile("alice", "pw")
    failures = 0
    for trial in range(1000):
        spoof = canonical_origin(f"https://phish-{trial}-{secrets.token_hex(3)}.example")
        profile.perceived_origin_override = spoof
        decision = login(profile, env.transport, env.origin, "alice", "pw")
        if decision.accepted:
            failures += 1
    assert failures == 0
    verdict(4, "1000/1000 spoofed-origin credentials rejected at the true origin")


def test_criterion_5_oracle_equivalence(vectors):
    """KDF and signature outputs match the independent oracles bit-exactly."""
    assert vectors["kdf"]["iterations"] == 1000

    scalar_cases = vectors["scalar_cases"]
    assert len(scalar_cases) >= 10
    for case in scalar_cases:
        scalar = derive_password_scalar(
            case["password"], canonical_origin(case["origin"]), case["user_id"]
        )
        assert format(scalar.value, "064x") == case["scalar_hex"]

    store_cases = vectors["store_cases"]
    assert len(store_cases) >= 10
    for case in store_cases:
        identifier = store_identifier(
            case["salt_utf8"].encode("utf-8"), PublicKey(bytes.fromhex(case["v_hex"]))
        )
        assert identifier.hex() == case["identifier_hex"]

    sign_cases = vectors["sign_cases"]
    assert len(sign_cases) >= 10
    for case in sign_cases:
        sig = sign_deterministic(
            SecretScalar(int(case["key_hex"], 16)), bytes.fromhex(case["digest_hex"])
        )
        assert sig.to_bytes().hex() == case["signature_hex"]

    verdict(5, f"{len(scalar_cases)} scalar, {len(store_cases)} store and "
               f"{len(sign_cases)} signature vectors match the independent oracles")


def test_criterion_6_determinism(vectors):
    """The fixed derive vector reproduces byte-identically everywhere."""
    case = vectors["derive_cases"][0]
    expected = case["expected"]["credential_hex"]

    def run_derive() -> str:
        cred = derive(
            case["user_id"],
            ChallengeBytes(bytes.fromhex(case["challenge_hex"])),
            case["password"],
            canonical_origin(case["origin"]),
            case["browser_time"],
            SecretScalar(int(case["browser_key_hex"], 16)),
        )
        return wire.encode_credential(cred).hex()

    in_process = {run_derive() for _ in range(3)}
    assert in_process == {expected}

    # a fresh interpreter reproduces the same bytes
    script = (
        "import json,sys\n"
        "from credfield.core import *\n"
        "from credfield.wire import encode_credential\n"
        "case = json.loads(sys.argv[1])\n"
        "cred = derive(case['user_id'], ChallengeBytes(bytes.fromhex(case['challenge_hex'])),"
        " case['password'], canonical_origin(case['origin']), case['browser_time'],"
        " SecretScalar(int(case['browser_key_hex'], 16)))\n"
        "print(encode_credential(cred).hex())\n"
    )
    result = subprocess.run(
        [sys.executable, "-c", script, json.dumps(case)],
        capture_output=True, text=True, timeout=120,
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == expected

    # the agent transcript carries the same bytes when the server hands
    # out the vector's challenge
    env = Env()
    nonce = bytes.fromhex(case["challenge_hex"])
    env.server.challenges[nonce] = ChallengeRecord(
        nonce, env.origin, START_TIME, env.config.challenge_ttl
    )
    profile = AgentProfile.ephemeral(clock=lambda: float(case["browser_time"]))
    profile.browser_key = SecretScalar(int(case["browser_key_hex"], 16))
    grant = wire.ChallengeGrant(ChallengeBytes(nonce), START_TIME + 300)

    class FixedChallengeTransport:
        def __init__(self, inner):
            self.inner = inner
            self.transcript = inner.transcript

        def fetch_challenge(self, origin):
            return grant

        def submit(self, msg):
            return self.inner.submit(msg)

    login(profile, FixedChallengeTransport(env.transport), env.origin,
          case["user_id"], case["password"])
    assert bytes.fromhex(expected) in env.transport.transcript[-1]

    verdict(6, "fixed derive vector byte-identical across 3 in-process runs, "
               "a fresh interpreter, and the agent transcript")


def test_criterion_7_benchmark_shape():
    """1000 sequential authentications; ratio and sizes inside the bands."""
    comparisons = [run_comparison(n=1000) for _ in range(3)]
    ratios = sorted(c["time_ratio"] for c in comparisons)
    median_ratio = statistics.median(ratios)
    proposed = comparisons[1]["proposed"]

    per_auth = min(c["proposed"]["per_auth_ms"] for c in comparisons)
    assert per_auth < 100.0, f"per-auth {per_auth:.2f} ms"
    assert 1.5 <= median_ratio <= 5.0, f"ratio {median_ratio:.2f} outside [1.5, 5.0]"
    assert proposed["transmission_bytes"] <= 512
    assert proposed["storage_bytes"] <= 2048
    verdict(7, f"per-auth {per_auth:.2f} ms (< 100 ms), Proposed/Hashed ratio "
               f"{median_ratio:.2f} in [1.5, 5.0] (paper 2.61), transmission "
               f"{proposed['transmission_bytes']} B <= 512, storage "
               f"{proposed['storage_bytes']} B <= 2048")


def test_criterion_8_policy_engine():
    """Unknown-browser actions, blacklist, history caps, shared exclusion."""
    # HighSecurity: unknown browser steps up and is not registered
    env = Env(policy=PolicyMode.high_security())
    env.enrolled_profile("alice", "pw")
    decision = login(env.new_profile(), env.transport, env.origin, "alice", "pw")
    assert decision.kind.value == "StepUpRequired"
    assert env.server.store.events[-1].kind.value == "StepUpRequired"
    assert len(env.server.store.users["alice"].browsers) == 1

    # Enterprise: accept plus alert event
    env = Env(policy=PolicyMode.enterprise())
    env.enrolled_profile("alice", "pw")
    decision = login(env.new_profile(), env.transport, env.origin, "alice", "pw")
    assert decision.accepted and decision.browser_known is False
    assert env.server.store.events[-1].kind.value == "UnknownBrowserAlert"

    # Personal: blacklisted browser denied
    env = Env(policy=PolicyMode.personal())
    profile = env.enrolled_profile("alice", "pw")
    env.server.blacklist_browser(env.server.store.users["alice"].browsers[0].p_b)
    decision = login(profile, env.transport, env.origin, "alice", "pw")
    assert decision.reason is RejectReason.BLACKLIST_DENIED

    # history caps 5/5/10 never exceeded
    for policy, cap in ((PolicyMode.enterprise(), 5), (PolicyMode.personal(), 10)):
        env = Env(policy=policy)
        env.enrolled_profile("alice", "pw")
        for _ in range(cap + 4):
            env.advance(10)
            result = login(env.new_profile(), env.transport, env.origin, "alice", "pw")
            assert result.accepted
            assert len(env.server.store.users["alice"].browsers) <= cap
        assert len(env.server.store.users["alice"].browsers) == cap
    # HighSecurity registers nothing beyond enrolment, cap 5 trivially holds
    env = Env(policy=PolicyMode.high_security())
    env.enrolled_profile("alice", "pw")
    for _ in range(7):
        login(env.new_profile(), env.transport, env.origin, "alice", "pw")
    assert len(env.server.store.users["alice"].browsers) == 1 <= 5

    # shared-browser exclusion: 12 users on one profile cross the threshold
    env = Env(policy=PolicyMode.enterprise(shared_browser_user_threshold=10))
    shared = env.new_profile()
    for index in range(12):
        assert enrol_flow(shared, env.transport, env.origin, f"user-{index}", "pw", "pw").accepted
    decision = login(shared, env.transport, env.origin, "user-0", "pw")
    assert decision.accepted and decision.browser_known is False
    assert env.server.store.events[-1].kind.value == "UnknownBrowserAlert"

    verdict(8, "step-up, alert, blacklist denial, history caps (5/5/10) and "
               "shared-browser exclusion (12 users) all enforced")


def test_criterion_9_no_secret_egress():
    """No password or secret scalar bytes on any observable surface."""
    passwords = [f"secret-passphrase-{i}-{secrets.token_hex(4)}" for i in range(3)]
    surfaces: list[bytes] = []

    log_records: list[str] = []

    class Capture(logging.Handler):
        def emit(self, record):
            log_records.append(self.format(record))

    capture = Capture(level=logging.DEBUG)
    root = logging.getLogger()
    previous_level = root.level
    root.addHandler(capture)
    root.setLevel(logging.DEBUG)
    try:
        env = Env(policy=PolicyMode.enterprise())
        profiles = [env.enrolled_profile(f"user{i}", passwords[i]) for i in range(3)]
        login(profiles[0], env.transport, env.origin, "user0", passwords[0])
        login(profiles[0], env.transport, env.origin, "user0", "wrong-password")
        login(env.new_profile(), env.transport, env.origin, "user1", passwords[1])
        change_flow(profiles[2], env.transport, env.origin, "user2", passwords[2],
                    passwords[0])
        surfaces.extend(env.transport.transcript)

        # HTTP surface: raw response bodies plus decoded challenge grants
        from fastapi.testclient import TestClient

        app = create_app(env.server, clock=lambda: env.clock[0])
        with TestClient(app, raise_server_exceptions=False) as client:
            response = client.get("/challenge", params={"origin": str(env.origin)})
            surfaces.append(response.content)
            grant = wire.challenge_grant_from_json(response.json())
            cred = derive("user0", grant.challenge, passwords[0], env.origin,
                          env.now(), profiles[0].browser_key)
            body = json.dumps(wire.auth_message_to_json(
                wire.AuthMessage(wire.MSG_VERIFY, "user0", grant.challenge, cred)
            )).encode()
            surfaces.append(body)
            response = client.post("/login", content=body,
                                   headers={"content-type": "application/json"})
            surfaces.append(response.content)
            surfaces.append(client.get("/events").content)

        # error strings from representative failure paths
        error_strings = []
        try:
            enrol_flow(profiles[0], env.transport, env.origin, "userX",
                       passwords[0], passwords[1])
        except Exception as exc:
            error_strings.append(str(exc))
        try:
            derive_password_scalar("", env.origin, "user0")
        except Exception as exc:
            error_strings.append(str(exc))
        surfaces.extend(s.encode() for s in error_strings)

        # store file contents
        import tempfile, os

        with tempfile.TemporaryDirectory() as tmp:
            store_path = os.path.join(tmp, "store.txt")
            env.server.persist(store_path)
            with open(store_path, "rb") as handle:
                surfaces.append(handle.read())

        # debug representations
        scalars = [derive_password_scalar(p, env.origin, f"user{i}")
                   for i, p in enumerate(passwords)]
        for obj in (*profiles, *(p.browser_key for p in profiles), *scalars):
            surfaces.append(repr(obj).encode())
    finally:
        root.removeHandler(capture)
        root.setLevel(previous_level)

    surfaces.extend(record.encode() for record in log_records)
    # base64url-decoded views of every wire field also count as surfaces
    decoded: list[bytes] = []
    for blob in list(surfaces):
        try:
            obj = json.loads(blob)
        except Exception:
            continue
        for value in _iter_strings(obj):
            try:
                pad = -len(value) % 4
                decoded.append(base64.urlsafe_b64decode(value + "=" * pad))
            except Exception:
                pass
    surfaces.extend(decoded)

    forbidden: list[bytes] = []
    for i, password in enumerate(passwords):
        forbidden.append(password.encode())
        scalar = derive_password_scalar(password, env.origin, f"user{i}")
        forbidden.append(scalar.value.to_bytes(32, "big"))
        forbidden.append(format(scalar.value, "064x").encode())
    for profile in profiles:
        forbidden.append(profile.browser_key.value.to_bytes(32, "big"))
        forbidden.append(format(profile.browser_key.value, "064x").encode())

    occurrences = 0
    for surface in surfaces:
        for blob in forbidden:
            if blob in surface:
                occurrences += 1
    assert occurrences == 0
    verdict(9, f"scanned {len(surfaces)} surfaces (wire bytes, decoded fields, "
               "logs, errors, store file, reprs): zero secret occurrences")


def _iter_strings(obj):
    if isinstance(obj, str):
        yield obj
    elif isinstance(obj, dict):
        for value in obj.values():
            yield from _iter_strings(value)
    elif isinstance(obj, list):
        for value in obj:
            yield from _iter_strings(value)
