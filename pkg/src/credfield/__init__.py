"""Phishing-resistant replacement for cleartext password authentication.

A password never leaves the browser agent: it is transformed into a
single-use, origin-bound, browser-bound credential (two deterministic
ECDSA signatures over a server challenge plus the matching public keys
and a timestamp). The server stores only one-way identifiers of those
public keys and verifies fresh credentials against them.
"""

from .core import (
    CanonicalOrigin,
    ChallengeBytes,
    Credential,
    KdfParams,
    PublicKey,
    SecretScalar,
    Signature,
    StoredIdentifier,
    TimeWindow,
    VerifyOutcome,
    build_salt,
    canonical_origin,
    derive,
    derive_password_scalar,
    generate_browser_key,
    sign_deterministic,
    store_identifier,
    verify_credential_stateless,
    verify_signature,
)
from .errors import CredFieldError, RejectReason
from .server import (
    AuthDecision,
    AuthServer,
    CredentialStore,
    DecisionKind,
    PolicyMode,
    ServerConfig,
)

__version__ = "0.1.0"

__all__ = [
    "AuthDecision",
    "AuthServer",
    "CanonicalOrigin",
    "ChallengeBytes",
    "CredFieldError",
    "Credential",
    "CredentialStore",
    "DecisionKind",
    "KdfParams",
    "PolicyMode",
    "PublicKey",
    "RejectReason",
    "SecretScalar",
    "ServerConfig",
    "Signature",
    "StoredIdentifier",
    "TimeWindow",
    "VerifyOutcome",
    "build_salt",
    "canonical_origin",
    "derive",
    "derive_password_scalar",
    "generate_browser_key",
    "sign_deterministic",
    "store_identifier",
    "verify_credential_stateless",
    "verify_signature",
]
