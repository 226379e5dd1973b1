"""Reference browser-side agent.

Stands in for the proposed credential input field: it owns the
trust-on-first-use browser key, runs the derivation, and ships only
derived credentials over the wire. Raw passwords never leave this module;
they exist as function arguments and die with the call frame.

The two knobs (``clock_skew``, ``perceived_origin_override``) exist for
attack simulation: they model a lied-to clock and a page loaded from a
spoofed URL. They affect what the agent signs, never what the server does.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol

from . import wire
from .core import (
    CanonicalOrigin,
    ChallengeBytes,
    KdfParams,
    SecretScalar,
    derive,
    generate_browser_key,
)
from .errors import (
    CorruptProfile,
    PasswordMismatch,
    RejectReason,
    TransportError,
)
from .server import AuthDecision, AuthServer
from .wire import MSG_CHANGE, MSG_ENROL, MSG_VERIFY, AuthMessage, ChallengeGrant

PROFILE_VERSION = 1

# local placeholder challenge for the offline double-entry comparison;
# never sent anywhere
_LOCAL_CHECK_CHALLENGE = ChallengeBytes(b"\x00" * 32)


@dataclass
class AgentProfile:
    """One browser installation: its key, its clock, its view of the URL."""

    browser_key: SecretScalar
    path: Optional[str] = None
    clock_skew: int = 0
    perceived_origin_override: Optional[CanonicalOrigin] = None
    clock: Callable[[], float] = time.time

    def browser_time(self) -> int:
        return int(self.clock()) + self.clock_skew

    @classmethod
    def ephemeral(cls, **kwargs) -> "AgentProfile":
        """In-memory profile (harness use); nothing touches disk."""
        return cls(browser_key=generate_browser_key(), **kwargs)


def open_profile(path: str) -> AgentProfile:
    """Load the browser key at ``path``, creating it on first use."""
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as handle:
                obj = json.load(handle)
            if obj.get("version") != PROFILE_VERSION:
                raise CorruptProfile(f"unsupported profile version {obj.get('version')!r}")
            key = SecretScalar(int(obj["browser_key"], 16))
        except CorruptProfile:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptProfile(f"unreadable profile {path}: {exc}") from exc
        return AgentProfile(browser_key=key, path=path)

    key = generate_browser_key()
    payload = json.dumps(
        {
            "version": PROFILE_VERSION,
            "browser_key": format(key.value, "064x"),
            "created_at": int(time.time()),
        }
    )
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
    try:
        os.write(fd, payload.encode("utf-8"))
    finally:
        os.close(fd)
    return AgentProfile(browser_key=key, path=path)


class Transport(Protocol):
    def fetch_challenge(self, origin: CanonicalOrigin) -> ChallengeGrant: ...

    def submit(self, msg: AuthMessage) -> AuthDecision: ...


class InProcessTransport:
    """Binary wire protocol against an in-process server.

    Messages are round-tripped through the canonical byte encoding so that
    in-process traffic exercises exactly the bytes a network peer would
    see; ``transcript`` keeps them for egress inspection.
    """

    def __init__(self, server: AuthServer, clock: Callable[[], float] = time.time):
        self.server = server
        self.clock = clock
        self.transcript: List[bytes] = []

    def _now(self) -> int:
        return int(self.clock())

    def fetch_challenge(self, origin: CanonicalOrigin) -> ChallengeGrant:
        return self.server.issue_challenge(origin, self._now())

    def submit(self, msg: AuthMessage) -> AuthDecision:
        data = wire.encode_auth_message(msg)
        self.transcript.append(data)
        decoded = wire.decode_auth_message(data)
        now = self._now()
        if decoded.msg_type == MSG_ENROL:
            return self.server.enrol(decoded, now)
        if decoded.msg_type == MSG_VERIFY:
            return self.server.verify(decoded, now)
        return self.server.change_password(decoded, now)


class HttpTransport:
    """JSON wire mapping against a remote service."""

    _PATHS = {MSG_ENROL: "/enrol", MSG_VERIFY: "/login", MSG_CHANGE: "/change"}

    def __init__(self, base_url: str, timeout: float = 10.0):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.client = httpx.Client(timeout=timeout)
        self.transcript: List[bytes] = []

    def close(self) -> None:
        self.client.close()

    def fetch_challenge(self, origin: CanonicalOrigin) -> ChallengeGrant:
        try:
            response = self.client.get(
                f"{self.base_url}/challenge", params={"origin": str(origin)}
            )
        except Exception as exc:
            raise TransportError(f"challenge fetch failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"challenge endpoint returned {response.status_code}")
        return wire.challenge_grant_from_json(response.json())

    def submit(self, msg: AuthMessage) -> AuthDecision:
        body = json.dumps(wire.auth_message_to_json(msg)).encode("utf-8")
        self.transcript.append(body)
        try:
            response = self.client.post(
                self.base_url + self._PATHS[msg.msg_type],
                content=body,
                headers={"content-type": "application/json"},
            )
        except Exception as exc:
            raise TransportError(f"submit failed: {exc}") from exc
        return decision_from_response(response.status_code, response.json())


def decision_from_response(status: int, obj: dict) -> AuthDecision:
    """Map a service response back onto a decision value."""
    if status == 200 and obj.get("decision") == "Accept":
        return AuthDecision.accept(browser_known=bool(obj.get("browser_known")))
    if status == 428:
        return AuthDecision.step_up()
    code = obj.get("code")
    try:
        return AuthDecision.reject(RejectReason(code))
    except ValueError:
        raise TransportError(f"unintelligible server response {status}: {obj!r}")


def _derive_for(
    profile: AgentProfile,
    true_origin: CanonicalOrigin,
    user_id: str,
    password: str,
    challenge: ChallengeBytes,
    params: KdfParams,
):
    origin = profile.perceived_origin_override or true_origin
    return derive(
        user_id,
        challenge,
        password,
        origin,
        profile.browser_time(),
        profile.browser_key,
        params,
    )


def login(
    profile: AgentProfile,
    transport: Transport,
    true_origin: CanonicalOrigin,
    user_id: str,
    password: str,
    params: KdfParams = KdfParams(),
) -> AuthDecision:
    grant = transport.fetch_challenge(true_origin)
    cred = _derive_for(profile, true_origin, user_id, password, grant.challenge, params)
    return transport.submit(AuthMessage(MSG_VERIFY, user_id, grant.challenge, cred))


def enrol_flow(
    profile: AgentProfile,
    transport: Transport,
    origin: CanonicalOrigin,
    user_id: str,
    password: str,
    password_repeat: str,
    params: KdfParams = KdfParams(),
) -> AuthDecision:
    """Double-entry enrolment.

    Both entries are derived against the same local inputs and compared by
    their password public keys before anything is sent; a typo never
    reaches the network.
    """
    first = _derive_for(profile, origin, user_id, password, _LOCAL_CHECK_CHALLENGE, params)
    second = _derive_for(
        profile, origin, user_id, password_repeat, _LOCAL_CHECK_CHALLENGE, params
    )
    if first.v_p != second.v_p:
        raise PasswordMismatch("password entries do not match")
    grant = transport.fetch_challenge(origin)
    cred = _derive_for(profile, origin, user_id, password, grant.challenge, params)
    return transport.submit(AuthMessage(MSG_ENROL, user_id, grant.challenge, cred))


def change_flow(
    profile: AgentProfile,
    transport: Transport,
    origin: CanonicalOrigin,
    user_id: str,
    old_password: str,
    new_password: str,
    params: KdfParams = KdfParams(),
) -> AuthDecision:
    grant = transport.fetch_challenge(origin)
    old_cred = _derive_for(profile, origin, user_id, old_password, grant.challenge, params)
    new_cred = _derive_for(profile, origin, user_id, new_password, grant.challenge, params)
    return transport.submit(
        AuthMessage(MSG_CHANGE, user_id, grant.challenge, old_cred, new_cred)
    )
