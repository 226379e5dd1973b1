"""secp256k1 group math and deterministic ECDSA.

Signing and public-key derivation only ever multiply the fixed base point,
so they run over a precomputed 8-bit comb table (Jacobian coordinates,
gmpy2 integers). Verification needs an arbitrary-point multiplication and
is delegated to OpenSSL through ``cryptography``.

Nonces follow the HMAC-SHA-256 derandomization construction, so a
(key, digest) pair always produces the same signature. All signatures are
emitted and accepted in 64-byte compact form with a low-s requirement:
given (r, s) and (r, n - s) both verify mathematically, only s <= n/2 is
considered well-formed here.
"""

from __future__ import annotations

import functools
import hashlib
import hmac
import secrets
import threading
from typing import Callable, Tuple

import gmpy2
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import (
    Prehashed,
    encode_dss_signature,
)

from .errors import EntropyFailure, InvalidPoint, InvalidScalar

# Curve: y^2 = x^3 + 7 over F_P, base point G of prime order N.
P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8
HALF_N = N >> 1

_P = gmpy2.mpz(P)
_SQRT_EXP = gmpy2.mpz((P + 1) // 4)

_CURVE = ec.SECP256K1()
_PREHASHED_SHA256 = ec.ECDSA(Prehashed(hashes.SHA256()))

AffinePoint = Tuple[int, int]


def _jac_double(x1, y1, z1):
    # dbl-2009-l (a = 0)
    a = x1 * x1 % _P
    b = y1 * y1 % _P
    c = b * b % _P
    t = (x1 + b)
    d = 2 * (t * t - a - c) % _P
    e = 3 * a % _P
    f = e * e % _P
    x3 = (f - 2 * d) % _P
    y3 = (e * (d - x3) - 8 * c) % _P
    z3 = 2 * y1 * z1 % _P
    return x3, y3, z3


def _jac_add_mixed(x1, y1, z1, x2, y2):
    # madd-2007-bl with the second operand affine (z2 = 1)
    if z1 == 0:
        return x2, y2, gmpy2.mpz(1)
    z1z1 = z1 * z1 % _P
    u2 = x2 * z1z1 % _P
    s2 = y2 * z1 * z1z1 % _P
    h = (u2 - x1) % _P
    if h == 0:
        if (s2 - y1) % _P == 0:
            return _jac_double(x1, y1, z1)
        return gmpy2.mpz(0), gmpy2.mpz(1), gmpy2.mpz(0)
    hh = h * h % _P
    i = 4 * hh % _P
    j = h * i % _P
    r = 2 * (s2 - y1) % _P
    v = x1 * i % _P
    x3 = (r * r - j - 2 * v) % _P
    y3 = (r * (v - x3) - 2 * y1 * j) % _P
    zh = z1 + h
    z3 = (zh * zh - z1z1 - hh) % _P
    return x3, y3, z3


def _jac_to_affine(x, y, z):
    if z == 0:
        raise InvalidPoint("point at infinity has no affine form")
    zi = gmpy2.invert(z, _P)
    zi2 = zi * zi % _P
    return int(x * zi2 % _P), int(y * zi2 * zi % _P)


def _batch_to_affine(points):
    """Normalize many Jacobian points with one field inversion."""
    acc = gmpy2.mpz(1)
    prefix = []
    for _, _, z in points:
        prefix.append(acc)
        acc = acc * z % _P
    inv = gmpy2.invert(acc, _P)
    out = [None] * len(points)
    for i in range(len(points) - 1, -1, -1):
        x, y, z = points[i]
        zi = inv * prefix[i] % _P
        inv = inv * z % _P
        zi2 = zi * zi % _P
        out[i] = (x * zi2 % _P, y * zi2 * zi % _P)
    return out


_COMB_WBITS = 8
_COMB_WINDOWS = 256 // _COMB_WBITS
_COMB_MASK = (1 << _COMB_WBITS) - 1

_comb_table = None
_comb_lock = threading.Lock()


def _build_comb_table():
    """table[w][k-1] = k * 2^(8w) * G in affine coordinates, k in 1..255."""
    table = []
    bx, by = gmpy2.mpz(GX), gmpy2.mpz(GY)
    for _ in range(_COMB_WINDOWS):
        row = [(bx, by, gmpy2.mpz(1))]
        acc = row[0]
        for _ in range(2, _COMB_MASK + 2):
            acc = _jac_add_mixed(acc[0], acc[1], acc[2], bx, by)
            row.append(acc)
        # row holds 1..255 times the window base plus one extra for the
        # next window base (256x = 2^8 x), normalized in one batch.
        affine = _batch_to_affine(row)
        table.append(affine[: _COMB_MASK])
        bx, by = affine[_COMB_MASK]
    return table


def _table():
    global _comb_table
    if _comb_table is None:
        with _comb_lock:
            if _comb_table is None:
                _comb_table = _build_comb_table()
    return _comb_table


def mult_base(k: int) -> AffinePoint:
    """k * G for 1 <= k < N."""
    if not 1 <= k < N:
        raise InvalidScalar("scalar out of range")
    table = _table()
    x, y, z = gmpy2.mpz(0), gmpy2.mpz(1), gmpy2.mpz(0)
    for w in range(_COMB_WINDOWS):
        idx = (k >> (_COMB_WBITS * w)) & _COMB_MASK
        if idx:
            px, py = table[w][idx - 1]
            x, y, z = _jac_add_mixed(x, y, z, px, py)
    return _jac_to_affine(x, y, z)


def compress_point(point: AffinePoint) -> bytes:
    x, y = point
    return bytes([0x02 | (y & 1)]) + x.to_bytes(32, "big")


def decompress_point(data: bytes) -> AffinePoint:
    """Parse 33-byte SEC1 compressed form; rejects off-curve encodings."""
    if len(data) != 33 or data[0] not in (0x02, 0x03):
        raise InvalidPoint("not a 33-byte compressed point")
    x = int.from_bytes(data[1:], "big")
    if x >= P:
        raise InvalidPoint("x coordinate out of field range")
    y_sq = (gmpy2.mpz(x) ** 3 + 7) % _P
    y = gmpy2.powmod(y_sq, _SQRT_EXP, _P)
    if y * y % _P != y_sq:
        raise InvalidPoint("x coordinate not on curve")
    y = int(y)
    if (y & 1) != (data[0] & 1):
        y = P - y
    return x, y


def public_point_bytes(secret: int) -> bytes:
    """Compressed public key for a secret scalar."""
    return compress_point(mult_base(secret))


def rfc6979_nonce(secret: int, digest: bytes, retry: int = 0) -> int:
    """Deterministic nonce from (secret, 32-byte digest) via HMAC-SHA-256.

    ``retry`` > 0 continues the generator past the first candidate; used
    when a candidate nonce produced a degenerate signature.
    """
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    x = secret.to_bytes(32, "big")
    h1 = int.from_bytes(digest, "big")
    msg = (h1 % N).to_bytes(32, "big") if h1 >= N else digest
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + msg, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + msg, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    skipped = 0
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 1 <= candidate < N:
            if skipped == retry:
                return candidate
            skipped += 1
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign_digest(secret: int, digest: bytes) -> Tuple[int, int]:
    """Deterministic ECDSA over a prehashed 32-byte digest, low-s normalized."""
    if not 1 <= secret < N:
        raise InvalidScalar("signing key out of range")
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    z = int.from_bytes(digest, "big")
    retry = 0
    while True:
        k = rfc6979_nonce(secret, digest, retry)
        rx, _ = mult_base(k)
        r = rx % N
        if r == 0:
            retry += 1
            continue
        s = int(gmpy2.invert(k, N) * (z + r * secret) % N)
        if s == 0:
            retry += 1
            continue
        if s > HALF_N:
            s = N - s
        return r, s


def verify_digest(digest: bytes, r: int, s: int, compressed_pub: bytes) -> bool:
    """Standard ECDSA verification; high-s and malformed inputs verify false."""
    if len(digest) != 32:
        return False
    if not (1 <= r < N and 1 <= s <= HALF_N):
        return False
    try:
        pub = load_public_key(compressed_pub)
    except InvalidPoint:
        return False
    try:
        pub.verify(encode_dss_signature(r, s), digest, _PREHASHED_SHA256)
        return True
    except InvalidSignature:
        return False


@functools.lru_cache(maxsize=4096)
def _parse_public_key(compressed: bytes) -> ec.EllipticCurvePublicKey:
    # parsing is pure, so repeat keys (every login by the same user) skip
    # the OpenSSL point decode
    return ec.EllipticCurvePublicKey.from_encoded_point(_CURVE, compressed)


def load_public_key(compressed: bytes) -> ec.EllipticCurvePublicKey:
    """Parse and validate a 33-byte compressed point via OpenSSL."""
    if len(compressed) != 33 or compressed[0] not in (0x02, 0x03):
        raise InvalidPoint("not a 33-byte compressed point")
    try:
        return _parse_public_key(bytes(compressed))
    except ValueError as exc:
        raise InvalidPoint(str(exc)) from exc


def random_scalar(entropy: Callable[[int], bytes] = secrets.token_bytes) -> int:
    """Uniform scalar in [1, N-1] by rejection sampling 32-byte draws."""
    for _ in range(256):
        try:
            draw = entropy(32)
        except Exception as exc:
            raise EntropyFailure(f"entropy source failed: {exc}") from exc
        if not isinstance(draw, (bytes, bytearray)) or len(draw) != 32:
            raise EntropyFailure("entropy source returned malformed bytes")
        value = int.from_bytes(draw, "big")
        if 1 <= value < N:
            return value
    raise EntropyFailure("rejection sampling failed to terminate")
