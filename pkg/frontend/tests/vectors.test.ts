// Cross-implementation check: this implementation must reproduce the
// shared vector file (generated by the independent reference oracles)
// byte for byte.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  b64uDecode,
  b64uEncode,
  buildSalt,
  deriveCredential,
  derivePasswordScalar,
  hexDecode,
  hexEncode,
} from "../src/derive.js";
import { publicKeyBytes, signDigest, bigIntTo32 } from "../src/secp256k1.js";

const vectorsUrl = new URL("../../tests/data/derive_vectors.json", import.meta.url);
const vectors = JSON.parse(readFileSync(vectorsUrl, "utf-8"));

describe("shared derive vectors", () => {
  it("has enough cases", () => {
    expect(vectors.derive_cases.length).toBeGreaterThanOrEqual(10);
    expect(vectors.kdf.iterations).toBe(1000);
  });

  for (const testCase of vectors.derive_cases) {
    it(`reproduces ${testCase.name} byte-identically`, async () => {
      const result = await deriveCredential({
        userId: testCase.user_id,
        challenge: hexDecode(testCase.challenge_hex),
        password: testCase.password,
        origin: testCase.origin,
        browserTime: testCase.browser_time,
        browserKey: BigInt("0x" + testCase.browser_key_hex),
        iterations: vectors.kdf.iterations,
      });
      expect(hexEncode(result.bytes)).toBe(testCase.expected.credential_hex);
      expect(result.json.sigma_p).toBe(b64uEncode(hexDecode(testCase.expected.sigma_p_hex)));
      expect(result.json.sigma_b).toBe(b64uEncode(hexDecode(testCase.expected.sigma_b_hex)));
      expect(result.json.v_p).toBe(b64uEncode(hexDecode(testCase.expected.v_p_hex)));
      expect(result.json.v_b).toBe(b64uEncode(hexDecode(testCase.expected.v_b_hex)));
      expect(result.json.browser_time).toBe(String(testCase.browser_time));
    });
  }
});

describe("password scalar vectors", () => {
  for (const testCase of vectors.scalar_cases) {
    it(`matches scalar for ${testCase.user_id}@${testCase.origin}`, async () => {
      const salt = buildSalt(testCase.origin, testCase.user_id);
      expect(hexEncode(salt)).toBe(testCase.salt_hex);
      const scalar = await derivePasswordScalar(
        testCase.password,
        testCase.origin,
        testCase.user_id,
        vectors.kdf.iterations,
      );
      expect(hexEncode(bigIntTo32(scalar))).toBe(testCase.scalar_hex);
    });
  }
});

describe("deterministic signature vectors", () => {
  for (const [index, testCase] of vectors.sign_cases.entries()) {
    it(`matches signature case ${index}`, async () => {
      const key = BigInt("0x" + testCase.key_hex);
      const signature = await signDigest(key, hexDecode(testCase.digest_hex));
      expect(hexEncode(signature)).toBe(testCase.signature_hex);
      expect(hexEncode(publicKeyBytes(key))).toBe(testCase.public_key_hex);
    });
  }
});

describe("codec helpers", () => {
  it("base64url round-trips without padding", () => {
    const data = new Uint8Array([0, 1, 2, 0xfb, 0xff]);
    const encoded = b64uEncode(data);
    expect(encoded).not.toContain("=");
    expect(Array.from(b64uDecode(encoded))).toEqual(Array.from(data));
  });

  it("determinism: same inputs, same bytes", async () => {
    const testCase = vectors.derive_cases[0];
    const run = () =>
      deriveCredential({
        userId: testCase.user_id,
        challenge: hexDecode(testCase.challenge_hex),
        password: testCase.password,
        origin: testCase.origin,
        browserTime: testCase.browser_time,
        browserKey: BigInt("0x" + testCase.browser_key_hex),
      });
    const [a, b] = await Promise.all([run(), run()]);
    expect(hexEncode(a.bytes)).toBe(hexEncode(b.bytes));
  });
});
