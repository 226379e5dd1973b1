"""Stateless credential derivation, storage transform, and verification.

These are the three functions of the protocol:

* ``derive`` runs browser-side and turns (user id, password, page origin,
  server challenge, clock, browser key) into a five-field credential that
  can be sent instead of the password.
* ``store_identifier`` runs server-side and turns a public key into the
  64-byte one-way identifier that is all the server ever stores.
* ``verify_credential_stateless`` checks one credential against stored
  identifiers and a time window, with a fixed evaluation order so reject
  codes are deterministic.

Everything here is pure: no I/O, no clocks, no global state. Challenge
bookkeeping (single use, expiry, origin binding) lives in the server
module.

Byte-level conventions (normative, shared with other implementations):

* salt = u16-BE(len(origin)) || origin || u16-BE(len(user_id)) || user_id
* password scalar = 1 + (BE-int(PBKDF2-HMAC-SHA512(password, salt, iters,
  48)) mod (n-1))
* password-signature digest = SHA-256(0x01 || challenge)
* browser-signature digest  = SHA-256(0x02 || sigma_p || u64-BE(time))
* stored identifier = PBKDF2-HMAC-SHA512(compressed pubkey, salt, iters, 64)
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Optional
from urllib.parse import urlsplit

from . import secp256k1
from .errors import (
    EmptyPassword,
    EmptyUserId,
    FieldTooLong,
    InvalidScalar,
    InvalidSignatureRange,
    MalformedUrl,
    RejectReason,
    UnsupportedScheme,
)

PRODUCTION_MIN_ITERATIONS = 1000

_DEFAULT_PORTS = {"http": 80, "https": 443}

# domain-separation prefixes for the two signing digests
_DIGEST_TAG_PASSWORD = b"\x01"
_DIGEST_TAG_BROWSER = b"\x02"


@dataclass(frozen=True)
class KdfParams:
    """PBKDF2 parameters; the PRF is fixed to HMAC-SHA-512."""

    iterations: int = 1000
    dk_len_scalar: int = 48
    dk_len_store: int = 64
    prf: str = "hmac-sha512"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.prf != "hmac-sha512":
            raise ValueError("only hmac-sha512 is supported")


class SecretScalar:
    """A secp256k1 secret in [1, n-1].

    Never appears in reprs, logs, or serialized output. ``destroy()``
    drops the value in place; a destroyed scalar refuses further use.
    Python cannot guarantee the original integer is wiped from memory,
    but no code path retains another reference.
    """

    __slots__ = ("_value", "_pub")

    def __init__(self, value: int):
        if not 1 <= value < secp256k1.N:
            raise InvalidScalar("scalar out of [1, n-1]")
        self._value = value
        self._pub: Optional["PublicKey"] = None

    @property
    def value(self) -> int:
        if self._value is None:
            raise InvalidScalar("scalar has been destroyed")
        return self._value

    def public_key(self) -> "PublicKey":
        # cached: a key handle knows its own public half
        if self._pub is None:
            self._pub = PublicKey.trusted(secp256k1.public_point_bytes(self.value))
        return self._pub

    def destroy(self) -> None:
        self._value = None
        self._pub = None

    @property
    def destroyed(self) -> bool:
        return self._value is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, SecretScalar):
            return NotImplemented
        return self._value == other._value

    def __hash__(self):
        raise TypeError("SecretScalar is not hashable")

    def __repr__(self) -> str:
        return "SecretScalar(<redacted>)"

    __str__ = __repr__


@dataclass(frozen=True)
class PublicKey:
    """33-byte compressed SEC1 point, validated on-curve at construction."""

    data: bytes

    def __post_init__(self):
        secp256k1.load_public_key(self.data)

    @classmethod
    def trusted(cls, data: bytes) -> "PublicKey":
        """Skip on-curve validation for bytes this library just computed."""
        key = object.__new__(cls)
        object.__setattr__(key, "data", data)
        return key

    @property
    def bytes(self) -> bytes:
        return self.data

    def __repr__(self) -> str:
        return f"PublicKey({self.data.hex()})"


@dataclass(frozen=True)
class Signature:
    """ECDSA signature as scalars; compact form is r||s, 64 bytes, low-s."""

    r: int
    s: int

    def __post_init__(self):
        if not (1 <= self.r < secp256k1.N and 1 <= self.s < secp256k1.N):
            raise InvalidSignatureRange("r and s must be in [1, n-1]")
        if self.s > secp256k1.HALF_N:
            raise InvalidSignatureRange("s must be low (s <= n/2)")

    def to_bytes(self) -> bytes:
        return self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        if len(data) != 64:
            raise InvalidSignatureRange("compact signature must be 64 bytes")
        return cls(int.from_bytes(data[:32], "big"), int.from_bytes(data[32:], "big"))


@dataclass(frozen=True)
class ChallengeBytes:
    """Server-issued 32-byte nonce."""

    nonce: bytes

    def __post_init__(self):
        if len(self.nonce) != 32:
            raise ValueError("challenge must be exactly 32 bytes")

    @classmethod
    def random(cls) -> "ChallengeBytes":
        return cls(secrets.token_bytes(32))


@dataclass(frozen=True)
class CanonicalOrigin:
    """scheme://host[:port] with lowercase tokens and default ports elided."""

    scheme: str
    host: str
    port: Optional[int] = None

    def __str__(self) -> str:
        if self.port is None:
            return f"{self.scheme}://{self.host}"
        return f"{self.scheme}://{self.host}:{self.port}"

    def encode(self) -> bytes:
        return str(self).encode("utf-8")


@dataclass(frozen=True)
class Credential:
    """Output of ``derive``: two signatures, two public keys, a timestamp."""

    sigma_p: Signature
    sigma_b: Signature
    v_p: PublicKey
    v_b: PublicKey
    browser_time: int

    def __post_init__(self):
        if not 0 <= self.browser_time < 2**64:
            raise ValueError("browser_time must fit in u64")


@dataclass(frozen=True)
class StoredIdentifier:
    """64-byte one-way transform of a public key; equality is byte equality."""

    data: bytes

    def __post_init__(self):
        if len(self.data) != 64:
            raise ValueError("stored identifier must be 64 bytes")

    def hex(self) -> str:
        return self.data.hex()

    @classmethod
    def from_hex(cls, text: str) -> "StoredIdentifier":
        return cls(bytes.fromhex(text))


@dataclass(frozen=True)
class TimeWindow:
    """Acceptance window: max credential age and max forward clock skew."""

    delta: int = 120
    skew: int = 30

    def __post_init__(self):
        if self.delta <= 0 or self.skew < 0:
            raise ValueError("delta must be positive and skew non-negative")


@dataclass(frozen=True)
class VerifyOutcome:
    accepted: bool
    reason: Optional[RejectReason] = None
    browser_known: bool = False
    # recomputed browser identifier, exposed so callers do not pay for a
    # second PBKDF2 when they need it for policy decisions
    browser_identifier: Optional[StoredIdentifier] = None

    @classmethod
    def reject(cls, reason: RejectReason, browser_known: bool = False,
               browser_identifier: Optional[StoredIdentifier] = None) -> "VerifyOutcome":
        return cls(False, reason, browser_known, browser_identifier)


def canonical_origin(raw_url: str) -> CanonicalOrigin:
    """Reduce an absolute http(s) URL to its canonical origin.

    Path, query, fragment and userinfo are discarded; a page's origin is
    what binds credentials, not the page itself.
    """
    try:
        parts = urlsplit(raw_url)
    except ValueError as exc:
        raise MalformedUrl(f"unparseable URL: {exc}") from exc
    if not parts.scheme:
        raise MalformedUrl("URL must be absolute (missing scheme)")
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        raise UnsupportedScheme(f"scheme {scheme!r} is not http or https")
    try:
        host = parts.hostname
        port = parts.port
    except ValueError as exc:
        raise MalformedUrl(f"bad authority: {exc}") from exc
    if not host:
        raise MalformedUrl("URL has no host")
    if port == _DEFAULT_PORTS[scheme]:
        port = None
    return CanonicalOrigin(scheme, host, port)


def build_salt(origin: CanonicalOrigin, user_id: str) -> bytes:
    """Length-prefixed origin||user_id; injective over (origin, user_id)."""
    if not user_id:
        raise EmptyUserId("user id must be non-empty")
    origin_bytes = origin.encode()
    user_bytes = user_id.encode("utf-8")
    if len(origin_bytes) > 0xFFFF or len(user_bytes) > 0xFFFF:
        raise FieldTooLong("salt fields are limited to 65535 bytes")
    return (
        len(origin_bytes).to_bytes(2, "big")
        + origin_bytes
        + len(user_bytes).to_bytes(2, "big")
        + user_bytes
    )


def derive_password_scalar(
    password: str,
    origin: CanonicalOrigin,
    user_id: str,
    params: KdfParams = KdfParams(),
) -> SecretScalar:
    """Password -> secret scalar, bound to origin and user id via the salt."""
    if not password:
        raise EmptyPassword("password must be non-empty")
    salt = build_salt(origin, user_id)
    dk = hashlib.pbkdf2_hmac(
        "sha512", password.encode("utf-8"), salt, params.iterations, params.dk_len_scalar
    )
    # 48-byte output makes the mod-(n-1) bias < 2^-128; +1 excludes zero
    value = 1 + int.from_bytes(dk, "big") % (secp256k1.N - 1)
    return SecretScalar(value)


def generate_browser_key(
    entropy: Callable[[int], bytes] = secrets.token_bytes,
) -> SecretScalar:
    """Fresh uniformly random browser key (rejection-sampled)."""
    return SecretScalar(secp256k1.random_scalar(entropy))


def sign_deterministic(key: SecretScalar, digest: bytes) -> Signature:
    """Deterministic ECDSA over a 32-byte digest; same inputs, same bytes."""
    r, s = secp256k1.sign_digest(key.value, digest)
    return Signature(r, s)


def verify_signature(digest: bytes, sig: Signature, pub: PublicKey) -> bool:
    return secp256k1.verify_digest(digest, sig.r, sig.s, pub.bytes)


def password_digest(challenge: ChallengeBytes) -> bytes:
    return hashlib.sha256(_DIGEST_TAG_PASSWORD + challenge.nonce).digest()


def browser_digest(sigma_p: Signature, browser_time: int) -> bytes:
    return hashlib.sha256(
        _DIGEST_TAG_BROWSER + sigma_p.to_bytes() + browser_time.to_bytes(8, "big")
    ).digest()


def derive(
    user_id: str,
    challenge: ChallengeBytes,
    password: str,
    origin: CanonicalOrigin,
    browser_time: int,
    browser_key: SecretScalar,
    params: KdfParams = KdfParams(),
) -> Credential:
    """Browser-side credential derivation.

    The password scalar lives only inside this call: it signs the
    challenge, yields its public key, and is destroyed before the browser
    key is touched. The return value carries no secret material.
    """
    s_p = derive_password_scalar(password, origin, user_id, params)
    sigma_p = sign_deterministic(s_p, password_digest(challenge))
    v_p = s_p.public_key()
    s_p.destroy()
    sigma_b = sign_deterministic(browser_key, browser_digest(sigma_p, browser_time))
    v_b = browser_key.public_key()
    return Credential(sigma_p, sigma_b, v_p, v_b, browser_time)


def store_identifier(
    salt: bytes,
    v: PublicKey,
    params: KdfParams = KdfParams(),
) -> StoredIdentifier:
    """One-way storage transform of a public key.

    The password identifier uses the user id bytes as salt; the browser
    identifier uses the empty salt, so identical browsers map to identical
    identifiers across users (enabling shared-browser detection and
    blacklists).
    """
    dk = hashlib.pbkdf2_hmac("sha512", v.bytes, salt, params.iterations, params.dk_len_store)
    return StoredIdentifier(dk)


def verify_credential_stateless(
    user_id: str,
    challenge: ChallengeBytes,
    server_time: int,
    cred: Credential,
    stored_p: StoredIdentifier,
    stored_b_set: FrozenSet[StoredIdentifier] | set,
    cfg: TimeWindow = TimeWindow(),
    params: KdfParams = KdfParams(),
) -> VerifyOutcome:
    """Check one credential; evaluation order is time, identifier, signatures.

    The browser identifier is always recomputed and reported via
    ``browser_known`` / ``browser_identifier``; whether an unknown browser
    is fatal is a policy question for the caller.
    """
    if server_time - cred.browser_time > cfg.delta:
        return VerifyOutcome.reject(RejectReason.EXPIRED)
    if cred.browser_time - server_time > cfg.skew:
        return VerifyOutcome.reject(RejectReason.FUTURE_TIMESTAMP)

    if store_identifier(user_id.encode("utf-8"), cred.v_p, params) != stored_p:
        return VerifyOutcome.reject(RejectReason.UNKNOWN_PASSWORD)
    browser_id = store_identifier(b"", cred.v_b, params)
    browser_known = browser_id in stored_b_set

    if not verify_signature(password_digest(challenge), cred.sigma_p, cred.v_p):
        return VerifyOutcome.reject(
            RejectReason.BAD_PASSWORD_SIGNATURE, browser_known, browser_id
        )
    if not verify_signature(
        browser_digest(cred.sigma_p, cred.browser_time), cred.sigma_b, cred.v_b
    ):
        return VerifyOutcome.reject(
            RejectReason.BAD_BROWSER_SIGNATURE, browser_known, browser_id
        )
    return VerifyOutcome(True, None, browser_known, browser_id)
