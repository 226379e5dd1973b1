#!/usr/bin/env python3
"""Regenerate tests/data/derive_vectors.json from the independent oracles.

The vector file is the shared ground truth for both the Python library and
the browser polyfill: every value in it is computed by the reference
implementations in tests/oracles.py (hand-written PBKDF2 plus OpenSSL
deterministic ECDSA), never by the library under test.
"""

import hashlib
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

import oracles  # noqa: E402

OUT_PATH = os.path.join(os.path.dirname(__file__), "..", "tests", "data", "derive_vectors.json")

ITERATIONS = 1000


def _challenge(seed: int) -> bytes:
    if seed == 0:
        return b"\x00" * 32
    return hashlib.sha256(f"challenge-{seed}".encode()).digest()


def _browser_key(seed: int) -> int:
    if seed == 0:
        return 1
    return 1 + int.from_bytes(hashlib.sha256(f"browser-{seed}".encode()).digest(), "big") % (
        oracles.SECP256K1_N - 1
    )


DERIVE_CASES = [
    # the canonical fixed vector: all-zero challenge, browser key 1
    dict(name="fixed", user_id="alice", password="correct horse",
         origin="https://bank.example", challenge=_challenge(0),
         browser_time=1_700_000_000, browser_key=_browser_key(0)),
    dict(name="other-origin", user_id="alice", password="correct horse",
         origin="https://evil.example", challenge=_challenge(0),
         browser_time=1_700_000_000, browser_key=_browser_key(0)),
    dict(name="port-origin", user_id="bob", password="hunter2",
         origin="http://intra.corp:8080", challenge=_challenge(1),
         browser_time=1_700_000_001, browser_key=_browser_key(1)),
    dict(name="unicode-password", user_id="carol", password="päßwörd™",
         origin="https://bank.example", challenge=_challenge(2),
         browser_time=1_700_100_000, browser_key=_browser_key(2)),
    dict(name="unicode-user", user_id="ユーザー", password="correct horse",
         origin="https://bank.example", challenge=_challenge(3),
         browser_time=1_700_200_000, browser_key=_browser_key(3)),
    dict(name="long-password", user_id="dave", password="x" * 200,
         origin="https://bank.example", challenge=_challenge(4),
         browser_time=1_700_300_000, browser_key=_browser_key(4)),
    dict(name="short-password", user_id="erin", password="1",
         origin="https://bank.example", challenge=_challenge(5),
         browser_time=1_700_400_000, browser_key=_browser_key(5)),
    dict(name="digits-pin", user_id="frank", password="123456",
         origin="https://pay.example", challenge=_challenge(6),
         browser_time=1_700_500_000, browser_key=_browser_key(6)),
    dict(name="spaces", user_id="grace iv", password="a b c d",
         origin="https://bank.example", challenge=_challenge(7),
         browser_time=1_700_600_000, browser_key=_browser_key(7)),
    dict(name="time-zero", user_id="heidi", password="tick",
         origin="https://bank.example", challenge=_challenge(8),
         browser_time=0, browser_key=_browser_key(8)),
    dict(name="time-large", user_id="ivan", password="tock",
         origin="https://bank.example", challenge=_challenge(9),
         browser_time=2**40, browser_key=_browser_key(9)),
    dict(name="ampersand-user", user_id="a&b=c", password="p&q=r",
         origin="https://bank.example:8443", challenge=_challenge(10),
         browser_time=1_700_700_000, browser_key=_browser_key(10)),
]

SCALAR_CASES = [
    ("correct horse", "https://bank.example", "alice"),
    ("correct horse", "https://evil.example", "alice"),
    ("correct horse", "https://bank.example", "bob"),
    ("hunter2", "http://intra.corp:8080", "bob"),
    ("päßwörd™", "https://bank.example", "carol"),
    ("1", "https://bank.example", "erin"),
    ("x" * 200, "https://bank.example", "dave"),
    ("123456", "https://pay.example", "frank"),
    ("a b c d", "https://bank.example", "grace iv"),
    ("p@ss!", "https://bank.example", "ユーザー"),
    ("trailing space ", "https://bank.example", "judy"),
]

SIGN_CASES = [
    (1, hashlib.sha256(b"Satoshi Nakamoto").digest()),
    (1, hashlib.sha256(b"All those moments will be lost in time, like tears in rain. Time to die...").digest()),
    (oracles.SECP256K1_N - 1, hashlib.sha256(b"Satoshi Nakamoto").digest()),
    (0xF8B8AF8CE3C7CCA5E300D33939540C10D45CE001B8F252BFBC57BA0342904181,
     hashlib.sha256(b"Alan Turing").digest()),
    (2, b"\x00" * 32),
    (2, b"\xff" * 32),
    (3, hashlib.sha256(b"a").digest()),
    (0xDEADBEEF, hashlib.sha256(b"b").digest()),
    (2**128, hashlib.sha256(b"c").digest()),
    (0x4C0883A69102937D6231471B5DBB6204FE51296170827936EA5CCE4B76994B0F,
     hashlib.sha256(b"d").digest()),
    (12345678901234567890, hashlib.sha256(b"e").digest()),
]


def main() -> None:
    doc = {
        "description": "shared cross-implementation vectors; regenerate with tools/gen_vectors.py",
        "kdf": {"prf": "hmac-sha512", "iterations": ITERATIONS,
                "dk_len_scalar": 48, "dk_len_store": 64},
        "derive_cases": [],
        "scalar_cases": [],
        "store_cases": [],
        "sign_cases": [],
    }

    for case in DERIVE_CASES:
        result = oracles.derive_oracle(
            case["user_id"], case["challenge"], case["password"], case["origin"],
            case["browser_time"], case["browser_key"], ITERATIONS,
        )
        doc["derive_cases"].append(
            {
                "name": case["name"],
                "user_id": case["user_id"],
                "password": case["password"],
                "origin": case["origin"],
                "challenge_hex": case["challenge"].hex(),
                "browser_time": case["browser_time"],
                "browser_key_hex": format(case["browser_key"], "064x"),
                "expected": {
                    "password_scalar_hex": format(result["password_scalar"], "064x"),
                    "sigma_p_hex": result["sigma_p"].hex(),
                    "sigma_b_hex": result["sigma_b"].hex(),
                    "v_p_hex": result["v_p"].hex(),
                    "v_b_hex": result["v_b"].hex(),
                    "credential_hex": result["credential"].hex(),
                },
            }
        )

    for password, origin, user_id in SCALAR_CASES:
        doc["scalar_cases"].append(
            {
                "password": password,
                "origin": origin,
                "user_id": user_id,
                "salt_hex": oracles.salt_oracle(origin, user_id).hex(),
                "scalar_hex": format(
                    oracles.password_scalar_oracle(password, origin, user_id, ITERATIONS),
                    "064x",
                ),
            }
        )

    # store cases: identifiers for a spread of keys under user-id and empty salts
    for index, (secret, _) in enumerate(SIGN_CASES):
        v = oracles.public_key_oracle(secret)
        salt = b"" if index % 2 == 0 else f"user-{index}".encode()
        doc["store_cases"].append(
            {
                "v_hex": v.hex(),
                "salt_utf8": salt.decode("utf-8"),
                "identifier_hex": oracles.store_identifier_oracle(salt, v, ITERATIONS).hex(),
            }
        )

    for secret, digest in SIGN_CASES:
        doc["sign_cases"].append(
            {
                "key_hex": format(secret, "064x"),
                "digest_hex": digest.hex(),
                "signature_hex": oracles.sign_oracle(secret, digest).hex(),
                "public_key_hex": oracles.public_key_oracle(secret).hex(),
            }
        )

    os.makedirs(os.path.dirname(OUT_PATH), exist_ok=True)
    with open(OUT_PATH, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1, ensure_ascii=False)
        handle.write("\n")
    print(f"wrote {OUT_PATH}: {len(doc['derive_cases'])} derive, "
          f"{len(doc['scalar_cases'])} scalar, {len(doc['store_cases'])} store, "
          f"{len(doc['sign_cases'])} sign cases")


if __name__ == "__main__":
    main()
