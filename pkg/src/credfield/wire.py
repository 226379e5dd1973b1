"""Canonical byte encodings and the JSON mapping used over HTTP.

Binary layout is fixed-width and versioned:

credential blob (203 bytes)
    version(1)=0x01 | browser_time u64-BE(8) | sigma_p(64) | sigma_b(64)
    | v_p(33) | v_b(33)

auth message (36 + len(user_id) + 203 [+203 for change])
    version(1)=0x01 | msg_type(1) | user_id_len u16-BE(2) | user_id
    | challenge(32) | cred(203) [| cred_new(203)]

challenge grant (40 bytes)
    challenge(32) | expires_at u64-BE(8)

JSON mapping: byte fields are unpadded base64url, u64 fields are decimal
strings, everything else native JSON.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from typing import Optional

from .core import ChallengeBytes, Credential, PublicKey, Signature
from .errors import BadLength, BadVersion, TruncatedChange, UnknownType, WireError

WIRE_VERSION = 0x01

MSG_ENROL = 1
MSG_VERIFY = 2
MSG_CHANGE = 3

CREDENTIAL_BLOB_LEN = 203
_AUTH_FIXED_OVERHEAD = 36  # version + type + u16 length + 32-byte challenge


@dataclass(frozen=True)
class AuthMessage:
    msg_type: int
    user_id: str
    challenge: ChallengeBytes
    cred: Credential
    cred_new: Optional[Credential] = None

    def __post_init__(self):
        if self.msg_type not in (MSG_ENROL, MSG_VERIFY, MSG_CHANGE):
            raise UnknownType(f"unknown message type {self.msg_type}")
        if (self.msg_type == MSG_CHANGE) != (self.cred_new is not None):
            raise WireError("cred_new is present iff msg_type is change")


@dataclass(frozen=True)
class ChallengeGrant:
    challenge: ChallengeBytes
    expires_at: int


def encode_credential(cred: Credential) -> bytes:
    out = (
        bytes([WIRE_VERSION])
        + cred.browser_time.to_bytes(8, "big")
        + cred.sigma_p.to_bytes()
        + cred.sigma_b.to_bytes()
        + cred.v_p.bytes
        + cred.v_b.bytes
    )
    assert len(out) == CREDENTIAL_BLOB_LEN
    return out


def decode_credential(data: bytes) -> Credential:
    if len(data) != CREDENTIAL_BLOB_LEN:
        raise BadLength(f"credential blob must be {CREDENTIAL_BLOB_LEN} bytes, got {len(data)}")
    if data[0] != WIRE_VERSION:
        raise BadVersion(f"unknown credential version 0x{data[0]:02x}")
    browser_time = int.from_bytes(data[1:9], "big")
    sigma_p = Signature.from_bytes(data[9:73])
    sigma_b = Signature.from_bytes(data[73:137])
    v_p = PublicKey(data[137:170])
    v_b = PublicKey(data[170:203])
    return Credential(sigma_p, sigma_b, v_p, v_b, browser_time)


def encode_auth_message(msg: AuthMessage) -> bytes:
    user_bytes = msg.user_id.encode("utf-8")
    if len(user_bytes) > 0xFFFF:
        raise BadLength("user id exceeds 65535 bytes")
    out = (
        bytes([WIRE_VERSION, msg.msg_type])
        + len(user_bytes).to_bytes(2, "big")
        + user_bytes
        + msg.challenge.nonce
        + encode_credential(msg.cred)
    )
    if msg.msg_type == MSG_CHANGE:
        out += encode_credential(msg.cred_new)
    return out


def decode_auth_message(data: bytes) -> AuthMessage:
    if len(data) < _AUTH_FIXED_OVERHEAD + 1 + CREDENTIAL_BLOB_LEN:
        raise BadLength("auth message too short")
    if data[0] != WIRE_VERSION:
        raise BadVersion(f"unknown message version 0x{data[0]:02x}")
    msg_type = data[1]
    if msg_type not in (MSG_ENROL, MSG_VERIFY, MSG_CHANGE):
        raise UnknownType(f"unknown message type {msg_type}")
    user_len = int.from_bytes(data[2:4], "big")
    if user_len == 0:
        raise BadLength("empty user id")
    offset = 4 + user_len
    try:
        user_id = data[4:offset].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise WireError(f"user id is not valid UTF-8: {exc}") from exc
    expected = _AUTH_FIXED_OVERHEAD + user_len + CREDENTIAL_BLOB_LEN
    if msg_type == MSG_CHANGE:
        if len(data) != expected + CREDENTIAL_BLOB_LEN:
            raise TruncatedChange(
                f"change message must be {expected + CREDENTIAL_BLOB_LEN} bytes, got {len(data)}"
            )
    elif len(data) != expected:
        raise BadLength(f"message must be {expected} bytes, got {len(data)}")
    challenge = ChallengeBytes(data[offset : offset + 32])
    offset += 32
    cred = decode_credential(data[offset : offset + CREDENTIAL_BLOB_LEN])
    offset += CREDENTIAL_BLOB_LEN
    cred_new = None
    if msg_type == MSG_CHANGE:
        cred_new = decode_credential(data[offset : offset + CREDENTIAL_BLOB_LEN])
    return AuthMessage(msg_type, user_id, challenge, cred, cred_new)


def auth_message_size(user_id: str, change: bool = False) -> int:
    """Closed-form encoded size for a given user id."""
    n = _AUTH_FIXED_OVERHEAD + len(user_id.encode("utf-8")) + CREDENTIAL_BLOB_LEN
    return n + CREDENTIAL_BLOB_LEN if change else n


# -- JSON mapping -------------------------------------------------------------

def b64u_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def b64u_decode(text: str) -> bytes:
    if not isinstance(text, str):
        raise WireError("expected a base64url string")
    pad = -len(text) % 4
    try:
        return base64.urlsafe_b64decode(text + "=" * pad)
    except (ValueError, TypeError) as exc:
        raise WireError(f"invalid base64url: {exc}") from exc


def credential_to_json(cred: Credential) -> dict:
    return {
        "version": WIRE_VERSION,
        "browser_time": str(cred.browser_time),
        "sigma_p": b64u_encode(cred.sigma_p.to_bytes()),
        "sigma_b": b64u_encode(cred.sigma_b.to_bytes()),
        "v_p": b64u_encode(cred.v_p.bytes),
        "v_b": b64u_encode(cred.v_b.bytes),
    }


def credential_from_json(obj: dict) -> Credential:
    if not isinstance(obj, dict):
        raise WireError("credential must be a JSON object")
    if obj.get("version") != WIRE_VERSION:
        raise BadVersion(f"unknown credential version {obj.get('version')!r}")
    try:
        browser_time = int(obj["browser_time"])
        sigma_p = Signature.from_bytes(b64u_decode(obj["sigma_p"]))
        sigma_b = Signature.from_bytes(b64u_decode(obj["sigma_b"]))
        v_p = PublicKey(b64u_decode(obj["v_p"]))
        v_b = PublicKey(b64u_decode(obj["v_b"]))
    except KeyError as exc:
        raise WireError(f"credential missing field {exc}") from exc
    except ValueError as exc:
        raise WireError(f"bad credential field: {exc}") from exc
    if not 0 <= browser_time < 2**64:
        raise WireError("browser_time out of u64 range")
    return Credential(sigma_p, sigma_b, v_p, v_b, browser_time)


def auth_message_to_json(msg: AuthMessage) -> dict:
    obj = {
        "version": WIRE_VERSION,
        "type": msg.msg_type,
        "user_id": msg.user_id,
        "challenge": b64u_encode(msg.challenge.nonce),
        "cred": credential_to_json(msg.cred),
    }
    if msg.cred_new is not None:
        obj["cred_new"] = credential_to_json(msg.cred_new)
    return obj


def auth_message_from_json(obj: dict) -> AuthMessage:
    if not isinstance(obj, dict):
        raise WireError("auth message must be a JSON object")
    if obj.get("version") != WIRE_VERSION:
        raise BadVersion(f"unknown message version {obj.get('version')!r}")
    msg_type = obj.get("type")
    if msg_type not in (MSG_ENROL, MSG_VERIFY, MSG_CHANGE):
        raise UnknownType(f"unknown message type {msg_type!r}")
    user_id = obj.get("user_id")
    if not isinstance(user_id, str) or not user_id:
        raise WireError("user_id must be a non-empty string")
    try:
        challenge = ChallengeBytes(b64u_decode(obj["challenge"]))
        cred = credential_from_json(obj["cred"])
    except KeyError as exc:
        raise WireError(f"auth message missing field {exc}") from exc
    except ValueError as exc:
        raise WireError(f"bad auth message field: {exc}") from exc
    cred_new = None
    if msg_type == MSG_CHANGE:
        if "cred_new" not in obj:
            raise TruncatedChange("change message is missing cred_new")
        cred_new = credential_from_json(obj["cred_new"])
    return AuthMessage(msg_type, user_id, challenge, cred, cred_new)


def challenge_grant_to_json(grant: ChallengeGrant) -> dict:
    return {
        "challenge": b64u_encode(grant.challenge.nonce),
        "expires_at": str(grant.expires_at),
    }


def challenge_grant_from_json(obj: dict) -> ChallengeGrant:
    try:
        return ChallengeGrant(
            ChallengeBytes(b64u_decode(obj["challenge"])), int(obj["expires_at"])
        )
    except (KeyError, ValueError) as exc:
        raise WireError(f"bad challenge grant: {exc}") from exc


def encode_challenge_grant(grant: ChallengeGrant) -> bytes:
    return grant.challenge.nonce + grant.expires_at.to_bytes(8, "big")


def decode_challenge_grant(data: bytes) -> ChallengeGrant:
    if len(data) != 40:
        raise BadLength(f"challenge grant must be 40 bytes, got {len(data)}")
    return ChallengeGrant(ChallengeBytes(data[:32]), int.from_bytes(data[32:], "big"))


# -- size accounting -----------------------------------------------------------

# Table 5 of the source evaluation reports 401 transmission bytes and 2048
# storage bytes per user for its (unspecified) encoding; ours is smaller
# because the layout above is fixed-width with compressed points.
PAPER_TRANSMISSION_BYTES = 401
PAPER_STORAGE_BYTES = 2048

REFERENCE_USER_ID = "alice"


@dataclass(frozen=True)
class SizeReport:
    transmission_bytes: int
    storage_bytes_per_user: int
    reference_transmission_bytes: int = PAPER_TRANSMISSION_BYTES
    reference_storage_bytes: int = PAPER_STORAGE_BYTES


def measure_sizes() -> SizeReport:
    """Verify-message size for a 5-char user id and per-user storage size."""
    from .server import UserRecord, BrowserEntry  # cycle-free at call time

    transmission = auth_message_size(REFERENCE_USER_ID)
    record = UserRecord(
        user_id=REFERENCE_USER_ID,
        p_p=_dummy_identifier(0xAA),
        browsers=[BrowserEntry(_dummy_identifier(0xBB), 0, 0, 1)],
        created_at=0,
        updated_at=0,
    )
    storage = sum(len(line.encode("utf-8")) + 1 for line in record.to_lines())
    return SizeReport(transmission_bytes=transmission, storage_bytes_per_user=storage)


def _dummy_identifier(fill: int):
    from .core import StoredIdentifier

    return StoredIdentifier(bytes([fill]) * 64)
