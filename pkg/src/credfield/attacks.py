"""Abuse-case harness: run the real client/server stack under an adversary.

Each scenario stands up a fresh server, enrols a victim, then lets an
adversary with precisely scoped powers (spoofed page origin, harvested
transcripts, keylogged password, stolen server store, in-transit message
replacement) try to authenticate. A scenario is *blocked* when the
adversary never reaches an Accept.

EnrolmentSubstitution is the deliberate exception: with transport
integrity off the attack is supposed to succeed, documenting that
enrolment integrity rests on the transport layer (TLS in a real
deployment), not on the credential scheme itself.
"""

from __future__ import annotations

import enum
import secrets
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, List, Optional

from . import wire
from .agent import AgentProfile, InProcessTransport, enrol_flow, login
from .core import (
    CanonicalOrigin,
    Credential,
    SecretScalar,
    Signature,
    canonical_origin,
    derive,
    derive_password_scalar,
)
from .errors import HarnessMisconfigured, InvalidSignatureRange, WireError
from .secp256k1 import N
from .server import AuthServer, PolicyMode, ServerConfig
from .wire import MSG_ENROL, MSG_VERIFY, AuthMessage

REAL_URL = "https://bank.example"
PHISH_URL = "https://bank-example.login-secure.example"

VICTIM_USER = "alice"
VICTIM_PASSWORD = "correct horse battery staple"
ADVERSARY_PASSWORD = "hunter2"

DEFAULT_DICTIONARY_DECOYS = 63


class ScenarioId(enum.Enum):
    SPOOFED_URL_MITM = "SpoofedUrlMitm"
    OFFLINE_BRUTE_FORCE = "OfflineBruteForce"
    FUTURE_CLOCK = "FutureClock"
    KEYLOGGER_OTHER_DEVICE = "KeyloggerOtherDevice"
    HARVEST_AND_FORGE = "HarvestAndForge"
    STOLEN_SERVER_STORE = "StolenServerStore"
    REPLAY_CREDENTIALS = "ReplayCredentials"
    ENROLMENT_SUBSTITUTION = "EnrolmentSubstitution"


@dataclass(frozen=True)
class Scenario:
    id: ScenarioId
    params: Dict = dc_field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioReport:
    id: ScenarioId
    attempts: int
    successes_by_adversary: int
    blocked: bool
    notes: str

    def __post_init__(self):
        if self.blocked != (self.successes_by_adversary == 0):
            raise HarnessMisconfigured("blocked flag inconsistent with success count")

    def to_json(self) -> dict:
        return {
            "scenario": self.id.value,
            "attempts": self.attempts,
            "successes_by_adversary": self.successes_by_adversary,
            "blocked": self.blocked,
            "notes": self.notes,
        }


@dataclass
class ScenarioEnv:
    """Fresh stack per run: one server, one enrolled victim."""

    server: AuthServer
    transport: InProcessTransport
    victim: AgentProfile
    origin: CanonicalOrigin
    clock: List[float]  # single-cell mutable clock

    def advance(self, seconds: int) -> None:
        self.clock[0] += seconds


def _make_env(policy: Optional[PolicyMode] = None) -> ScenarioEnv:
    origin = canonical_origin(REAL_URL)
    config = ServerConfig(origin=origin, policy=policy or PolicyMode.high_security())
    server = AuthServer(config)
    clock = [1_700_000_000.0]
    transport = InProcessTransport(server, clock=lambda: clock[0])
    victim = AgentProfile.ephemeral(clock=lambda: clock[0])
    env = ScenarioEnv(server, transport, victim, origin, clock)
    decision = enrol_flow(
        victim, transport, origin, VICTIM_USER, VICTIM_PASSWORD, VICTIM_PASSWORD
    )
    if not decision.accepted:
        raise HarnessMisconfigured(f"victim enrolment failed: {decision.code()}")
    return env


def run_scenario(scenario: Scenario) -> ScenarioReport:
    runner = _RUNNERS[scenario.id]
    return runner(scenario.params)


def run_all(params_by_id: Optional[Dict[ScenarioId, Dict]] = None) -> List[ScenarioReport]:
    """All scenarios; substitution runs in both channel modes."""
    params_by_id = params_by_id or {}
    reports = []
    for sid in ScenarioId:
        if sid is ScenarioId.ENROLMENT_SUBSTITUTION:
            for integrity in (False, True):
                params = dict(params_by_id.get(sid, {}))
                params["transport_integrity"] = integrity
                reports.append(run_scenario(Scenario(sid, params)))
        else:
            reports.append(run_scenario(Scenario(sid, params_by_id.get(sid, {}))))
    return reports


def expected_blocked(report: ScenarioReport) -> bool:
    """What the abuse table predicts for this report."""
    if report.id is ScenarioId.ENROLMENT_SUBSTITUTION:
        return "integrity on" in report.notes
    return True


# -- individual scenarios -------------------------------------------------------


def _spoofed_url_mitm(params: Dict) -> ScenarioReport:
    attempts = int(params.get("attempts", 20))
    env = _make_env()
    env.victim.perceived_origin_override = canonical_origin(PHISH_URL)
    successes = 0
    reasons = set()
    for _ in range(attempts):
        decision = login(env.victim, env.transport, env.origin, VICTIM_USER, VICTIM_PASSWORD)
        if decision.accepted:
            successes += 1
        else:
            reasons.add(decision.code())
    return ScenarioReport(
        ScenarioId.SPOOFED_URL_MITM,
        attempts,
        successes,
        successes == 0,
        f"credentials derived under the spoofed origin; server said {sorted(reasons)}",
    )


def _offline_brute_force(params: Dict) -> ScenarioReport:
    decoys = int(params.get("dictionary_decoys", DEFAULT_DICTIONARY_DECOYS))
    env = _make_env()
    # harvest one legitimate transcript (mitm read access)
    decision = login(env.victim, env.transport, env.origin, VICTIM_USER, VICTIM_PASSWORD)
    if not decision.accepted:
        raise HarnessMisconfigured("victim login failed during harvest")
    harvested = wire.decode_auth_message(env.transport.transcript[-1])

    # offline phase: dictionary containing the true password
    dictionary = [f"decoy-password-{i}" for i in range(decoys)]
    dictionary.insert(decoys // 2, VICTIM_PASSWORD)
    identified = None
    for guess in dictionary:
        scalar = derive_password_scalar(guess, env.origin, VICTIM_USER)
        if scalar.public_key() == harvested.cred.v_p:
            identified = guess
        scalar.destroy()

    # online phase: even a correct guess lacks the victim's browser key
    attempts = 0
    successes = 0
    outcomes = set()
    adversary = AgentProfile.ephemeral(clock=lambda: env.clock[0])
    if identified is not None:
        for _ in range(5):
            attempts += 1
            decision = login(adversary, env.transport, env.origin, VICTIM_USER, identified)
            outcomes.add(decision.code())
            if decision.accepted:
                successes += 1
    # direct forgery of the browser signature: splice the harvested
    # credential onto a fresh challenge
    grant = env.server.issue_challenge(env.origin, int(env.clock[0]))
    attempts += 1
    spliced = AuthMessage(MSG_VERIFY, VICTIM_USER, grant.challenge, harvested.cred)
    decision = env.transport.submit(spliced)
    outcomes.add(decision.code())
    if decision.accepted:
        successes += 1
    note = (
        f"dictionary identified the password (public key match) but "
        f"authentication outcomes were only {sorted(outcomes)}"
        if identified
        else "dictionary failed to identify the password"
    )
    return ScenarioReport(
        ScenarioId.OFFLINE_BRUTE_FORCE, attempts, successes, successes == 0, note
    )


def _future_clock(params: Dict) -> ScenarioReport:
    skew = int(params.get("clock_skew", 3600))
    env = _make_env()
    env.victim.clock_skew = skew
    outcomes = set()
    successes = 0
    attempts = 0

    # future-dated login attempt is rejected outright
    attempts += 1
    decision = login(env.victim, env.transport, env.origin, VICTIM_USER, VICTIM_PASSWORD)
    outcomes.add(decision.code())
    if decision.accepted:
        successes += 1
    captured = wire.decode_auth_message(env.transport.transcript[-1])

    # adversary replays the capture once the timestamp looks current
    env.advance(skew)
    attempts += 1
    decision = env.transport.submit(captured)
    outcomes.add(decision.code())
    if decision.accepted:
        successes += 1

    # and tries the stolen credential against a fresh challenge
    grant = env.server.issue_challenge(env.origin, int(env.clock[0]))
    attempts += 1
    decision = env.transport.submit(
        AuthMessage(MSG_VERIFY, VICTIM_USER, grant.challenge, captured.cred)
    )
    outcomes.add(decision.code())
    if decision.accepted:
        successes += 1
    return ScenarioReport(
        ScenarioId.FUTURE_CLOCK,
        attempts,
        successes,
        successes == 0,
        f"future-dated credential and later replays all failed: {sorted(outcomes)}",
    )


def _keylogger_other_device(params: Dict) -> ScenarioReport:
    attempts = int(params.get("attempts", 10))
    env = _make_env(PolicyMode.high_security())
    adversary = AgentProfile.ephemeral(clock=lambda: env.clock[0])
    successes = 0
    outcomes = set()
    for _ in range(attempts):
        decision = login(adversary, env.transport, env.origin, VICTIM_USER, VICTIM_PASSWORD)
        outcomes.add(decision.code())
        if decision.accepted:
            successes += 1
    return ScenarioReport(
        ScenarioId.KEYLOGGER_OTHER_DEVICE,
        attempts,
        successes,
        successes == 0,
        f"correct password from an unrecognized browser yielded {sorted(outcomes)}, "
        "never a silent accept",
    )


def _mauled_credentials(cred: Credential) -> List[Credential]:
    """Generic malleability attempts over one harvested credential."""
    mauled = []

    def flip_sig(sig: Signature, bit: int) -> Optional[Signature]:
        raw = bytearray(sig.to_bytes())
        raw[bit // 8] ^= 1 << (bit % 8)
        try:
            return Signature.from_bytes(bytes(raw))
        except InvalidSignatureRange:
            return None

    for bit in (0, 77, 300, 511):
        sig = flip_sig(cred.sigma_p, bit)
        if sig is not None:
            mauled.append(Credential(sig, cred.sigma_b, cred.v_p, cred.v_b, cred.browser_time))
        sig = flip_sig(cred.sigma_b, bit)
        if sig is not None:
            mauled.append(Credential(cred.sigma_p, sig, cred.v_p, cred.v_b, cred.browser_time))
    # signature malleation s -> n - s (high-s twin)
    for attr in ("sigma_p", "sigma_b"):
        sig: Signature = getattr(cred, attr)
        try:
            twin = Signature(sig.r, N - sig.s)
        except InvalidSignatureRange:
            twin = None
        if twin is not None:
            mauled.append(
                Credential(
                    twin if attr == "sigma_p" else cred.sigma_p,
                    twin if attr == "sigma_b" else cred.sigma_b,
                    cred.v_p,
                    cred.v_b,
                    cred.browser_time,
                )
            )
    # swapped fields
    mauled.append(Credential(cred.sigma_b, cred.sigma_p, cred.v_p, cred.v_b, cred.browser_time))
    mauled.append(Credential(cred.sigma_p, cred.sigma_b, cred.v_b, cred.v_p, cred.browser_time))
    # timestamp shifted under an unchanged browser signature
    mauled.append(
        Credential(cred.sigma_p, cred.sigma_b, cred.v_p, cred.v_b, cred.browser_time + 1)
    )
    return mauled


def _harvest_and_forge(params: Dict) -> ScenarioReport:
    harvest_count = int(params.get("harvest_count", 10))
    env = _make_env()
    harvested: List[AuthMessage] = []
    for _ in range(harvest_count):
        decision = login(env.victim, env.transport, env.origin, VICTIM_USER, VICTIM_PASSWORD)
        if not decision.accepted:
            raise HarnessMisconfigured("victim login failed during harvest")
        harvested.append(wire.decode_auth_message(env.transport.transcript[-1]))

    attempts = 0
    successes = 0
    outcomes = set()

    def attempt(msg: AuthMessage):
        nonlocal attempts, successes
        attempts += 1
        decision = env.transport.submit(msg)
        outcomes.add(decision.code())
        if decision.accepted:
            successes += 1

    # byte-exact replays
    for msg in harvested:
        attempt(msg)
    # harvested credentials spliced onto fresh challenges, plus maulings
    for msg in harvested[:3]:
        grant = env.server.issue_challenge(env.origin, int(env.clock[0]))
        attempt(AuthMessage(MSG_VERIFY, VICTIM_USER, grant.challenge, msg.cred))
        for cred in _mauled_credentials(msg.cred):
            grant = env.server.issue_challenge(env.origin, int(env.clock[0]))
            attempt(AuthMessage(MSG_VERIFY, VICTIM_USER, grant.challenge, cred))
    # high-s twins never even reach the server: the codec refuses them
    high_s_rejected_by_codec = 0
    sample = harvested[0].cred
    raw = bytearray(wire.encode_credential(sample))
    s_twin = (N - sample.sigma_p.s).to_bytes(32, "big")
    raw[41:73] = s_twin  # sigma_p's s limb
    try:
        wire.decode_credential(bytes(raw))
    except (WireError, InvalidSignatureRange):
        high_s_rejected_by_codec = 1
    notes = (
        f"{len(harvested)} transcripts harvested; replays and maulings yielded "
        f"{sorted(outcomes)}; high-s twin rejected at the codec: "
        f"{bool(high_s_rejected_by_codec)}"
    )
    return ScenarioReport(
        ScenarioId.HARVEST_AND_FORGE, attempts, successes, successes == 0, notes
    )


def _stolen_server_store(params: Dict) -> ScenarioReport:
    attempts_per_kind = int(params.get("attempts", 5))
    env = _make_env()
    victim_record = env.server.store.users[VICTIM_USER]
    stolen_p_p = victim_record.p_p.data
    stolen_p_b = victim_record.browsers[0].p_b.data

    attempts = 0
    successes = 0
    outcomes = set()

    def try_login(password_scalar: SecretScalar):
        nonlocal attempts, successes
        attempts += 1
        now = int(env.clock[0])
        grant = env.server.issue_challenge(env.origin, now)
        browser_key = SecretScalar(1 + secrets.randbelow(N - 1))
        cred = _derive_from_scalar(password_scalar, grant.challenge, browser_key, now)
        decision = env.transport.submit(
            AuthMessage(MSG_VERIFY, VICTIM_USER, grant.challenge, cred)
        )
        outcomes.add(decision.code())
        if decision.accepted:
            successes += 1

    # stored identifiers reinterpreted as signing keys
    for chunk in (stolen_p_p[:32], stolen_p_p[32:], stolen_p_b[:32], stolen_p_b[32:]):
        value = int.from_bytes(chunk, "big") % (N - 1) + 1
        try_login(SecretScalar(value))
    # random keys (the identifiers gave the adversary nothing invertible)
    for _ in range(attempts_per_kind):
        try_login(SecretScalar(1 + secrets.randbelow(N - 1)))
    return ScenarioReport(
        ScenarioId.STOLEN_SERVER_STORE,
        attempts,
        successes,
        successes == 0,
        f"stored identifiers are one-way; all constructions failed: {sorted(outcomes)}",
    )


def _derive_from_scalar(
    scalar: SecretScalar, challenge, browser_key: SecretScalar, browser_time: int
) -> Credential:
    """Adversary-side credential assembly from a raw scalar guess."""
    from .core import browser_digest, password_digest, sign_deterministic

    sigma_p = sign_deterministic(scalar, password_digest(challenge))
    v_p = scalar.public_key()
    sigma_b = sign_deterministic(browser_key, browser_digest(sigma_p, browser_time))
    return Credential(sigma_p, sigma_b, v_p, browser_key.public_key(), browser_time)


def _replay_credentials(params: Dict) -> ScenarioReport:
    replays = int(params.get("replays", 1000))
    env = _make_env()
    decision = login(env.victim, env.transport, env.origin, VICTIM_USER, VICTIM_PASSWORD)
    if not decision.accepted:
        raise HarnessMisconfigured("victim login failed before replay")
    captured_bytes = env.transport.transcript[-1]
    msg = wire.decode_auth_message(captured_bytes)
    successes = 0
    outcomes = set()
    for _ in range(replays):
        decision = env.transport.submit(msg)
        outcomes.add(decision.code())
        if decision.accepted:
            successes += 1
    return ScenarioReport(
        ScenarioId.REPLAY_CREDENTIALS,
        replays,
        successes,
        successes == 0,
        f"byte-exact resubmission of an accepted message: {sorted(outcomes)}",
    )


def _enrolment_substitution(params: Dict) -> ScenarioReport:
    integrity = bool(params.get("transport_integrity", False))
    env = _make_env()  # victim "alice" exists; attack targets a second user
    user = "bob"
    password = "bob-password-1"
    adversary = AgentProfile.ephemeral(clock=lambda: env.clock[0])

    now = int(env.clock[0])
    grant = env.server.issue_challenge(env.origin, now)
    victim = AgentProfile.ephemeral(clock=lambda: env.clock[0])
    genuine = derive(
        user, grant.challenge, password, env.origin, victim.browser_time(),
        victim.browser_key,
    )
    message = AuthMessage(MSG_ENROL, user, grant.challenge, genuine)

    # the wire: with integrity off the adversary rewrites the enrolment
    # body; with integrity on the channel delivers what was sent
    if not integrity:
        forged = derive(
            user, grant.challenge, ADVERSARY_PASSWORD, env.origin,
            adversary.browser_time(), adversary.browser_key,
        )
        message = AuthMessage(MSG_ENROL, user, grant.challenge, forged)
    decision = env.transport.submit(message)
    if not decision.accepted:
        raise HarnessMisconfigured(f"enrolment did not complete: {decision.code()}")

    # does the adversary now own the account?
    attempts = 1
    decision = login(adversary, env.transport, env.origin, user, ADVERSARY_PASSWORD)
    successes = 1 if decision.accepted else 0
    mode = "integrity on" if integrity else "integrity off"
    notes = (
        f"{mode}: adversary login after substituted enrolment "
        f"{'succeeded (transport integrity is load-bearing)' if successes else 'failed'}"
    )
    return ScenarioReport(
        ScenarioId.ENROLMENT_SUBSTITUTION, attempts, successes, successes == 0, notes
    )


_RUNNERS: Dict[ScenarioId, Callable[[Dict], ScenarioReport]] = {
    ScenarioId.SPOOFED_URL_MITM: _spoofed_url_mitm,
    ScenarioId.OFFLINE_BRUTE_FORCE: _offline_brute_force,
    ScenarioId.FUTURE_CLOCK: _future_clock,
    ScenarioId.KEYLOGGER_OTHER_DEVICE: _keylogger_other_device,
    ScenarioId.HARVEST_AND_FORGE: _harvest_and_forge,
    ScenarioId.STOLEN_SERVER_STORE: _stolen_server_store,
    ScenarioId.REPLAY_CREDENTIALS: _replay_credentials,
    ScenarioId.ENROLMENT_SUBSTITUTION: _enrolment_substitution,
}
