"""Stateful authentication server: challenges, credential store, policy.

The server holds no password material. Per user it keeps the one-way
password identifier plus a bounded history of one-way browser identifiers,
and a global blacklist and event log. Challenges are single-use, origin
bound, and consumed exactly once regardless of what happens afterwards:
a challenge that survived redemption is burned even if the credential it
carried turns out to be garbage, so an online attacker never gets a second
try against the same nonce.

All mutating operations are serialized behind one lock; nothing is written
to the store on a failed operation (consumed challenges are in-memory only
and are deliberately not persisted).
"""

from __future__ import annotations

import base64
import enum
import logging
import os
import secrets
import tempfile
import threading
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Set

from .core import (
    PRODUCTION_MIN_ITERATIONS,
    CanonicalOrigin,
    ChallengeBytes,
    Credential,
    KdfParams,
    StoredIdentifier,
    TimeWindow,
    browser_digest,
    canonical_origin,
    password_digest,
    store_identifier,
    verify_credential_stateless,
    verify_signature,
)
from .errors import CorruptStore, RejectReason, UnknownType
from .wire import (
    MSG_CHANGE,
    MSG_ENROL,
    MSG_VERIFY,
    AuthMessage,
    ChallengeGrant,
)

logger = logging.getLogger(__name__)

STORE_MAGIC = "credfield-store"
STORE_VERSION = "v1"


class UnknownBrowserAction(enum.Enum):
    STEP_UP = "StepUp"
    ALLOW_AND_ALERT = "AllowAndAlert"
    ALLOW_AND_NOTIFY = "AllowAndNotify"


class PolicyEventKind(enum.Enum):
    STEP_UP_REQUIRED = "StepUpRequired"
    UNKNOWN_BROWSER_ALERT = "UnknownBrowserAlert"
    NEW_BROWSER_NOTIFICATION = "NewBrowserNotification"
    BLACKLIST_DENIED = "BlacklistDenied"


@dataclass(frozen=True)
class PolicyMode:
    """Unknown-browser handling profile.

    ``high_security`` steps up, ``enterprise`` allows but alerts,
    ``personal`` allows with a notification, keeps a longer history and
    enforces the blacklist by default. Browsers shared by at least
    ``shared_browser_user_threshold`` distinct users are never counted as
    known.
    """

    name: str
    history_cap: int
    unknown_browser_action: UnknownBrowserAction
    shared_browser_user_threshold: int = 10
    blacklist_enforced: bool = False

    @classmethod
    def high_security(cls, **overrides) -> "PolicyMode":
        return replace(
            cls("HighSecurity", 5, UnknownBrowserAction.STEP_UP), **overrides
        )

    @classmethod
    def enterprise(cls, **overrides) -> "PolicyMode":
        return replace(
            cls("Enterprise", 5, UnknownBrowserAction.ALLOW_AND_ALERT), **overrides
        )

    @classmethod
    def personal(cls, **overrides) -> "PolicyMode":
        return replace(
            cls("Personal", 10, UnknownBrowserAction.ALLOW_AND_NOTIFY,
                blacklist_enforced=True),
            **overrides,
        )

    @classmethod
    def by_name(cls, name: str, **overrides) -> "PolicyMode":
        factories = {
            "HighSecurity": cls.high_security,
            "Enterprise": cls.enterprise,
            "Personal": cls.personal,
        }
        if name not in factories:
            raise ValueError(f"unknown policy mode {name!r}")
        return factories[name](**overrides)

    def to_json(self) -> dict:
        return {
            "mode": self.name,
            "history_cap": self.history_cap,
            "unknown_browser_action": self.unknown_browser_action.value,
            "shared_browser_user_threshold": self.shared_browser_user_threshold,
            "blacklist_enforced": self.blacklist_enforced,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolicyMode":
        mode = cls.by_name(obj["mode"])
        return replace(
            mode,
            history_cap=int(obj.get("history_cap", mode.history_cap)),
            unknown_browser_action=UnknownBrowserAction(
                obj.get("unknown_browser_action", mode.unknown_browser_action.value)
            ),
            shared_browser_user_threshold=int(
                obj.get("shared_browser_user_threshold", mode.shared_browser_user_threshold)
            ),
            blacklist_enforced=bool(obj.get("blacklist_enforced", mode.blacklist_enforced)),
        )


@dataclass
class ServerConfig:
    origin: CanonicalOrigin
    delta: int = 120
    skew: int = 30
    challenge_ttl: int = 300
    kdf: KdfParams = field(default_factory=KdfParams)
    policy: PolicyMode = field(default_factory=PolicyMode.high_security)

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.challenge_ttl < self.delta:
            raise ValueError("challenge_ttl must be at least delta")
        if self.kdf.iterations < PRODUCTION_MIN_ITERATIONS:
            raise ValueError(
                f"server profiles require >= {PRODUCTION_MIN_ITERATIONS} KDF iterations"
            )

    @property
    def window(self) -> TimeWindow:
        return TimeWindow(self.delta, self.skew)

    def to_json(self) -> dict:
        return {
            "origin": str(self.origin),
            "delta": self.delta,
            "skew": self.skew,
            "challenge_ttl": self.challenge_ttl,
            "iterations": self.kdf.iterations,
            "policy": self.policy.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ServerConfig":
        return cls(
            origin=canonical_origin(obj["origin"]),
            delta=int(obj.get("delta", 120)),
            skew=int(obj.get("skew", 30)),
            challenge_ttl=int(obj.get("challenge_ttl", 300)),
            kdf=KdfParams(iterations=int(obj.get("iterations", 1000))),
            policy=PolicyMode.from_json(obj["policy"]) if "policy" in obj
            else PolicyMode.high_security(),
        )


@dataclass
class ChallengeRecord:
    nonce: bytes
    origin: CanonicalOrigin
    issued_at: int
    ttl: int
    consumed: bool = False

    def expired(self, now: int) -> bool:
        return now > self.issued_at + self.ttl


@dataclass
class BrowserEntry:
    p_b: StoredIdentifier
    first_seen: int
    last_seen: int
    login_count: int = 0

    def to_line(self, user_id: str) -> str:
        return (
            f"browser {_b64(user_id)} {self.p_b.hex()} "
            f"{self.first_seen} {self.last_seen} {self.login_count}"
        )


@dataclass
class UserRecord:
    user_id: str
    p_p: StoredIdentifier
    browsers: List[BrowserEntry] = field(default_factory=list)
    created_at: int = 0
    updated_at: int = 0

    def to_lines(self) -> List[str]:
        lines = [
            f"user {_b64(self.user_id)} {self.p_p.hex()} {self.created_at} {self.updated_at}"
        ]
        lines.extend(e.to_line(self.user_id) for e in self.browsers)
        return lines


@dataclass(frozen=True)
class PolicyEvent:
    kind: PolicyEventKind
    user_id: str
    p_b: StoredIdentifier
    at: int

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "user_id": self.user_id,
            "p_b": self.p_b.hex(),
            "at": self.at,
        }


class DecisionKind(enum.Enum):
    ACCEPT = "Accept"
    STEP_UP_REQUIRED = "StepUpRequired"
    REJECT = "Reject"


@dataclass(frozen=True)
class AuthDecision:
    kind: DecisionKind
    reason: Optional[RejectReason] = None
    browser_known: Optional[bool] = None

    @classmethod
    def accept(cls, browser_known: bool) -> "AuthDecision":
        return cls(DecisionKind.ACCEPT, None, browser_known)

    @classmethod
    def step_up(cls) -> "AuthDecision":
        return cls(DecisionKind.STEP_UP_REQUIRED)

    @classmethod
    def reject(cls, reason: RejectReason) -> "AuthDecision":
        return cls(DecisionKind.REJECT, reason)

    @property
    def accepted(self) -> bool:
        return self.kind is DecisionKind.ACCEPT

    def code(self) -> str:
        if self.kind is DecisionKind.REJECT:
            return self.reason.value
        return self.kind.value


def _b64(text: str) -> str:
    return base64.urlsafe_b64encode(text.encode("utf-8")).decode("ascii").rstrip("=")


def _unb64(token: str) -> str:
    pad = -len(token) % 4
    try:
        return base64.urlsafe_b64decode(token + "=" * pad).decode("utf-8")
    except (ValueError, UnicodeDecodeError) as exc:
        raise CorruptStore(f"bad encoded field: {exc}") from exc


class CredentialStore:
    """Users, browser registry, blacklist and event log.

    Persists as a line-oriented text file (see docs/store-format.md);
    writes are temp-file-plus-rename so a crash never leaves a torn store.
    """

    def __init__(self):
        self.users: Dict[str, UserRecord] = {}
        self.blacklist: Set[bytes] = set()
        self.events: List[PolicyEvent] = []
        # reverse index: browser identifier -> user ids currently holding it
        self.browser_users: Dict[bytes, Set[str]] = {}

    def index_browser(self, p_b: StoredIdentifier, user_id: str) -> None:
        self.browser_users.setdefault(p_b.data, set()).add(user_id)

    def unindex_browser(self, p_b: StoredIdentifier, user_id: str) -> None:
        holders = self.browser_users.get(p_b.data)
        if holders is not None:
            holders.discard(user_id)
            if not holders:
                del self.browser_users[p_b.data]

    def shared_user_count(self, p_b: StoredIdentifier) -> int:
        return len(self.browser_users.get(p_b.data, ()))

    def save(self, path: str) -> None:
        lines = [f"{STORE_MAGIC} {STORE_VERSION}"]
        for user in self.users.values():
            lines.extend(user.to_lines())
        for entry in sorted(self.blacklist):
            lines.append(f"blacklist {entry.hex()}")
        for event in self.events:
            lines.append(
                f"event {event.kind.value} {_b64(event.user_id)} {event.p_b.hex()} {event.at}"
            )
        # footer with the record count makes truncation detectable
        lines.append(f"end {len(lines) - 1}")
        payload = "\n".join(lines) + "\n"
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".credstore-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str) -> "CredentialStore":
        store = cls()
        if not os.path.exists(path):
            return store
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
        lines = text.splitlines()
        if not lines or lines[0].split() != [STORE_MAGIC, STORE_VERSION]:
            raise CorruptStore("missing or unsupported store header")
        records = 0
        ended = False
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            if ended:
                raise CorruptStore(f"line {lineno}: content after footer")
            fields = line.split()
            if fields[0] == "end":
                if len(fields) != 2 or fields[1] != str(records):
                    raise CorruptStore(f"line {lineno}: footer count mismatch")
                ended = True
                continue
            try:
                store._load_line(fields)
            except (CorruptStore, ValueError, KeyError, IndexError) as exc:
                raise CorruptStore(f"line {lineno}: {exc}") from exc
            records += 1
        if not ended:
            raise CorruptStore("store file is truncated (missing footer)")
        return store

    def _load_line(self, fields: List[str]) -> None:
        kind = fields[0]
        if kind == "user":
            _, user_token, p_p_hex, created, updated = fields
            user_id = _unb64(user_token)
            if user_id in self.users:
                raise CorruptStore(f"duplicate user record")
            self.users[user_id] = UserRecord(
                user_id=user_id,
                p_p=StoredIdentifier.from_hex(p_p_hex),
                created_at=int(created),
                updated_at=int(updated),
            )
        elif kind == "browser":
            _, user_token, p_b_hex, first, last, count = fields
            user_id = _unb64(user_token)
            if user_id not in self.users:
                raise CorruptStore("browser record before its user record")
            entry = BrowserEntry(
                StoredIdentifier.from_hex(p_b_hex), int(first), int(last), int(count)
            )
            if entry.last_seen < entry.first_seen:
                raise CorruptStore("browser last_seen precedes first_seen")
            self.users[user_id].browsers.append(entry)
            self.index_browser(entry.p_b, user_id)
        elif kind == "blacklist":
            _, p_b_hex = fields
            if len(p_b_hex) != 128:
                raise CorruptStore("blacklist entry must be 64 bytes of hex")
            self.blacklist.add(bytes.fromhex(p_b_hex))
        elif kind == "event":
            _, event_kind, user_token, p_b_hex, at = fields
            self.events.append(
                PolicyEvent(
                    PolicyEventKind(event_kind),
                    _unb64(user_token),
                    StoredIdentifier.from_hex(p_b_hex),
                    int(at),
                )
            )
        else:
            raise CorruptStore(f"unknown record kind {kind!r}")


class AuthServer:
    """Protocol endpoint state machine; all operations take explicit time."""

    def __init__(self, config: ServerConfig, store: Optional[CredentialStore] = None):
        self.config = config
        self.store = store or CredentialStore()
        self.challenges: Dict[bytes, ChallengeRecord] = {}
        self._lock = threading.RLock()

    # -- challenges ---------------------------------------------------------

    def issue_challenge(self, origin: CanonicalOrigin, now: int) -> ChallengeGrant:
        nonce = secrets.token_bytes(32)
        record = ChallengeRecord(nonce, origin, now, self.config.challenge_ttl)
        with self._lock:
            self._prune_challenges(now)
            self.challenges[nonce] = record
        return ChallengeGrant(ChallengeBytes(nonce), now + self.config.challenge_ttl)

    def _prune_challenges(self, now: int) -> None:
        if len(self.challenges) < 4096:
            return
        dead = [n for n, rec in self.challenges.items() if rec.expired(now)]
        for nonce in dead:
            del self.challenges[nonce]

    def redeem_challenge(
        self, nonce: bytes, origin: CanonicalOrigin, now: int
    ) -> Optional[RejectReason]:
        """Consume a challenge; returns None on success, a reason otherwise."""
        with self._lock:
            record = self.challenges.get(nonce)
            if record is None:
                return RejectReason.UNKNOWN_CHALLENGE
            if record.consumed:
                return RejectReason.ALREADY_CONSUMED
            if record.expired(now):
                return RejectReason.CHALLENGE_EXPIRED
            if record.origin != origin:
                return RejectReason.ORIGIN_MISMATCH
            record.consumed = True
            return None

    # -- flows ---------------------------------------------------------------

    def enrol(self, msg: AuthMessage, now: int) -> AuthDecision:
        if msg.msg_type != MSG_ENROL:
            raise UnknownType("expected an enrol message")
        with self._lock:
            failure = self.redeem_challenge(msg.challenge.nonce, self.config.origin, now)
            if failure is not None:
                return AuthDecision.reject(failure)
            if msg.user_id in self.store.users:
                return AuthDecision.reject(RejectReason.USER_EXISTS)
            failure = self._check_possession(msg.user_id, msg.challenge, now, msg.cred)
            if failure is not None:
                return AuthDecision.reject(failure)
            p_p = store_identifier(msg.user_id.encode("utf-8"), msg.cred.v_p, self.config.kdf)
            p_b = store_identifier(b"", msg.cred.v_b, self.config.kdf)
            record = UserRecord(
                user_id=msg.user_id,
                p_p=p_p,
                browsers=[BrowserEntry(p_b, now, now, 1)],
                created_at=now,
                updated_at=now,
            )
            self.store.users[msg.user_id] = record
            self.store.index_browser(p_b, msg.user_id)
            logger.info("enrolled user %s", msg.user_id)
            return AuthDecision.accept(browser_known=True)

    def verify(self, msg: AuthMessage, now: int) -> AuthDecision:
        if msg.msg_type != MSG_VERIFY:
            raise UnknownType("expected a verify message")
        with self._lock:
            failure = self.redeem_challenge(msg.challenge.nonce, self.config.origin, now)
            if failure is not None:
                return AuthDecision.reject(failure)
            user = self.store.users.get(msg.user_id)
            if user is None:
                return AuthDecision.reject(RejectReason.UNKNOWN_USER)
            outcome = verify_credential_stateless(
                msg.user_id,
                msg.challenge,
                now,
                msg.cred,
                user.p_p,
                self._known_browser_set(user),
                self.config.window,
                self.config.kdf,
            )
            if not outcome.accepted:
                return AuthDecision.reject(outcome.reason)
            decision, apply_effects = self._policy_decide(user, outcome, now)
            apply_effects()
            return decision

    def change_password(self, msg: AuthMessage, now: int) -> AuthDecision:
        if msg.msg_type != MSG_CHANGE or msg.cred_new is None:
            raise UnknownType("expected a change message with two credentials")
        with self._lock:
            # one challenge covers both credentials
            failure = self.redeem_challenge(msg.challenge.nonce, self.config.origin, now)
            if failure is not None:
                return AuthDecision.reject(failure)
            user = self.store.users.get(msg.user_id)
            if user is None:
                return AuthDecision.reject(RejectReason.UNKNOWN_USER)
            outcome = verify_credential_stateless(
                msg.user_id,
                msg.challenge,
                now,
                msg.cred,
                user.p_p,
                self._known_browser_set(user),
                self.config.window,
                self.config.kdf,
            )
            if not outcome.accepted:
                return AuthDecision.reject(outcome.reason)
            decision, apply_effects = self._policy_decide(user, outcome, now)
            if not decision.accepted:
                apply_effects()  # step-up / blacklist events still fire
                return decision
            # the replacement credential must come from the same browser
            if msg.cred_new.v_b != msg.cred.v_b:
                return AuthDecision.reject(RejectReason.BROWSER_MISMATCH)
            failure = self._check_possession(msg.user_id, msg.challenge, now, msg.cred_new)
            if failure is not None:
                return AuthDecision.reject(failure)
            # all checks passed: apply policy bookkeeping and swap the
            # password identifier in one step
            apply_effects()
            user.p_p = store_identifier(
                msg.user_id.encode("utf-8"), msg.cred_new.v_p, self.config.kdf
            )
            user.updated_at = now
            logger.info("password changed for user %s", msg.user_id)
            return decision

    # -- policy --------------------------------------------------------------

    def _known_browser_set(self, user: UserRecord) -> Set[StoredIdentifier]:
        """Registered browsers minus the widely shared ones."""
        threshold = self.config.policy.shared_browser_user_threshold
        return {
            e.p_b
            for e in user.browsers
            if self.store.shared_user_count(e.p_b) < threshold
        }

    def _policy_decide(self, user: UserRecord, outcome, now: int):
        """Map a cryptographically valid login onto a policy decision.

        Returns (decision, apply_effects); effects are deferred so
        multi-step flows can abort without mutating the store.
        """
        policy = self.config.policy
        p_b = outcome.browser_identifier
        if policy.blacklist_enforced and (
            p_b.data in self.store.blacklist
            or self.store.shared_user_count(p_b) >= policy.shared_browser_user_threshold
        ):
            def deny_effects():
                # denial is itself an auditable event
                self._emit(PolicyEventKind.BLACKLIST_DENIED, user.user_id, p_b, now)

            return AuthDecision.reject(RejectReason.BLACKLIST_DENIED), deny_effects

        if outcome.browser_known:
            def known_effects():
                for entry in user.browsers:
                    if entry.p_b == p_b:
                        entry.last_seen = now
                        entry.login_count += 1
                        break
                user.updated_at = now

            return AuthDecision.accept(browser_known=True), known_effects

        action = policy.unknown_browser_action
        if action is UnknownBrowserAction.STEP_UP:
            def step_up_effects():
                self._emit(PolicyEventKind.STEP_UP_REQUIRED, user.user_id, p_b, now)

            return AuthDecision.step_up(), step_up_effects

        event_kind = (
            PolicyEventKind.UNKNOWN_BROWSER_ALERT
            if action is UnknownBrowserAction.ALLOW_AND_ALERT
            else PolicyEventKind.NEW_BROWSER_NOTIFICATION
        )

        def allow_effects():
            self._emit(event_kind, user.user_id, p_b, now)
            self._register_browser(user, p_b, now)
            user.updated_at = now

        return AuthDecision.accept(browser_known=False), allow_effects

    def _register_browser(self, user: UserRecord, p_b: StoredIdentifier, now: int) -> None:
        user.browsers.append(BrowserEntry(p_b, now, now, 1))
        self.store.index_browser(p_b, user.user_id)
        cap = self.config.policy.history_cap
        while len(user.browsers) > cap:
            oldest = min(user.browsers, key=lambda e: e.last_seen)
            user.browsers.remove(oldest)
            self.store.unindex_browser(oldest.p_b, user.user_id)
            logger.debug("evicted browser for user %s", user.user_id)

    def _emit(self, kind: PolicyEventKind, user_id: str, p_b: StoredIdentifier, now: int):
        self.store.events.append(PolicyEvent(kind, user_id, p_b, now))

    def _check_possession(
        self, user_id: str, challenge: ChallengeBytes, now: int, cred: Credential
    ) -> Optional[RejectReason]:
        """Time-window and signature checks without the identifier lookups.

        Used where the presented keys themselves are about to be stored
        (enrolment, the new credential of a change), so identifier equality
        would be vacuous.
        """
        window = self.config.window
        if now - cred.browser_time > window.delta:
            return RejectReason.EXPIRED
        if cred.browser_time - now > window.skew:
            return RejectReason.FUTURE_TIMESTAMP
        if not verify_signature(password_digest(challenge), cred.sigma_p, cred.v_p):
            return RejectReason.BAD_PASSWORD_SIGNATURE
        if not verify_signature(
            browser_digest(cred.sigma_p, cred.browser_time), cred.sigma_b, cred.v_b
        ):
            return RejectReason.BAD_BROWSER_SIGNATURE
        return None

    # -- blacklist -------------------------------------------------------------

    def blacklist_browser(self, p_b: StoredIdentifier) -> None:
        with self._lock:
            self.store.blacklist.add(p_b.data)

    def is_blacklisted(self, p_b: StoredIdentifier) -> bool:
        with self._lock:
            return p_b.data in self.store.blacklist

    # -- persistence ------------------------------------------------------------

    def persist(self, path: str) -> None:
        with self._lock:
            self.store.save(path)

    @classmethod
    def load(cls, config: ServerConfig, path: str) -> "AuthServer":
        return cls(config, CredentialStore.load(path))
