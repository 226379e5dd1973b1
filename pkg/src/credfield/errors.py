"""Exception taxonomy and machine-readable decision codes.

Protocol *decisions* (accept / step-up / reject-with-reason) are values, not
exceptions: they travel over the wire and map onto HTTP status codes.
Exceptions are reserved for malformed inputs and broken environments.
"""

from __future__ import annotations

import enum


class CredFieldError(Exception):
    """Base class for all errors raised by this package."""


# -- URL / salt construction ----------------------------------------------

class MalformedUrl(CredFieldError):
    pass


class UnsupportedScheme(CredFieldError):
    pass


class EmptyUserId(CredFieldError):
    pass


class EmptyPassword(CredFieldError):
    pass


class FieldTooLong(CredFieldError):
    pass


# -- crypto ----------------------------------------------------------------

class EntropyFailure(CredFieldError):
    pass


class InvalidPoint(CredFieldError):
    pass


class InvalidSignatureRange(CredFieldError):
    pass


class InvalidScalar(CredFieldError):
    pass


# -- wire codec -------------------------------------------------------------

class WireError(CredFieldError):
    pass


class BadLength(WireError):
    pass


class BadVersion(WireError):
    pass


class UnknownType(WireError):
    pass


class TruncatedChange(WireError):
    pass


# -- storage / profiles ------------------------------------------------------

class CorruptStore(CredFieldError):
    pass


class CorruptProfile(CredFieldError):
    pass


# -- client-side flows --------------------------------------------------------

class PasswordMismatch(CredFieldError):
    """Double-entry consistency check failed before any network traffic."""


class TransportError(CredFieldError):
    pass


# -- harness -----------------------------------------------------------------

class HarnessMisconfigured(CredFieldError):
    pass


class RejectReason(enum.Enum):
    """Reason codes carried by reject decisions.

    The string values are the stable wire-level codes; they appear verbatim
    in HTTP responses and CLI output.
    """

    EXPIRED = "Expired"
    FUTURE_TIMESTAMP = "FutureTimestamp"
    UNKNOWN_PASSWORD = "UnknownPassword"
    BAD_PASSWORD_SIGNATURE = "BadPasswordSignature"
    BAD_BROWSER_SIGNATURE = "BadBrowserSignature"
    UNKNOWN_CHALLENGE = "UnknownChallenge"
    ALREADY_CONSUMED = "AlreadyConsumed"
    CHALLENGE_EXPIRED = "ChallengeExpired"
    ORIGIN_MISMATCH = "OriginMismatch"
    USER_EXISTS = "UserExists"
    UNKNOWN_USER = "UnknownUser"
    BROWSER_MISMATCH = "BrowserMismatch"
    BLACKLIST_DENIED = "BlacklistDenied"

    def __str__(self) -> str:
        return self.value
