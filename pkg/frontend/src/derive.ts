// Browser-side credential derivation, byte-compatible with the server's
// reference implementation. The wire shape is the JSON mapping: unpadded
// base64url byte fields, decimal-string u64.

import {
  N,
  bigIntTo32,
  bytesToBigInt,
  mod,
  publicKeyBytes,
  signDigest,
} from "./secp256k1.js";

const subtle = globalThis.crypto.subtle;
const encoder = new TextEncoder();

export const DEFAULT_ITERATIONS = 1000;

export interface WireCredential {
  version: number;
  browser_time: string;
  sigma_p: string;
  sigma_b: string;
  v_p: string;
  v_b: string;
}

export interface DerivedCredential {
  json: WireCredential;
  bytes: Uint8Array; // canonical 203-byte binary form
  v_p: Uint8Array;
}

export function b64uEncode(data: Uint8Array): string {
  let binary = "";
  for (const byte of data) binary += String.fromCharCode(byte);
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

export function b64uDecode(text: string): Uint8Array {
  const padded = text.replace(/-/g, "+").replace(/_/g, "/");
  const binary = atob(padded + "=".repeat((4 - (padded.length % 4)) % 4));
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}

export function hexEncode(data: Uint8Array): string {
  return Array.from(data, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function hexDecode(text: string): Uint8Array {
  const out = new Uint8Array(text.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(text.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

// scheme://host[:port] with default ports elided; matches URL.origin
export function canonicalOrigin(url: string): string {
  const parsed = new URL(url);
  if (parsed.protocol !== "http:" && parsed.protocol !== "https:") {
    throw new Error(`unsupported scheme: ${parsed.protocol}`);
  }
  return parsed.origin;
}

export function buildSalt(origin: string, userId: string): Uint8Array {
  if (!userId) throw new Error("user id must be non-empty");
  const originBytes = encoder.encode(origin);
  const userBytes = encoder.encode(userId);
  if (originBytes.length > 0xffff || userBytes.length > 0xffff) {
    throw new Error("salt field too long");
  }
  const out = new Uint8Array(4 + originBytes.length + userBytes.length);
  out[0] = originBytes.length >> 8;
  out[1] = originBytes.length & 0xff;
  out.set(originBytes, 2);
  const at = 2 + originBytes.length;
  out[at] = userBytes.length >> 8;
  out[at + 1] = userBytes.length & 0xff;
  out.set(userBytes, at + 2);
  return out;
}

async function pbkdf2Sha512(
  secret: Uint8Array,
  salt: Uint8Array,
  iterations: number,
  dkLen: number,
): Promise<Uint8Array> {
  const key = await subtle.importKey("raw", secret as BufferSource, "PBKDF2", false, [
    "deriveBits",
  ]);
  const bits = await subtle.deriveBits(
    { name: "PBKDF2", hash: "SHA-512", salt: salt as BufferSource, iterations },
    key,
    dkLen * 8,
  );
  return new Uint8Array(bits);
}

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await subtle.digest("SHA-256", data as BufferSource));
}

export async function derivePasswordScalar(
  password: string,
  origin: string,
  userId: string,
  iterations = DEFAULT_ITERATIONS,
): Promise<bigint> {
  if (!password) throw new Error("password must be non-empty");
  const dk = await pbkdf2Sha512(
    encoder.encode(password),
    buildSalt(origin, userId),
    iterations,
    48,
  );
  return 1n + mod(bytesToBigInt(dk), N - 1n);
}

function u64be(value: number | bigint): Uint8Array {
  let v = BigInt(value);
  const out = new Uint8Array(8);
  for (let i = 7; i >= 0; i--) {
    out[i] = Number(v & 0xffn);
    v >>= 8n;
  }
  return out;
}

function concat(...parts: Uint8Array[]): Uint8Array {
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

export interface DeriveInput {
  userId: string;
  challenge: Uint8Array;
  password: string;
  origin: string;
  browserTime: number;
  browserKey: bigint;
  iterations?: number;
}

export async function deriveCredential(input: DeriveInput): Promise<DerivedCredential> {
  if (input.challenge.length !== 32) throw new Error("challenge must be 32 bytes");
  const scalar = await derivePasswordScalar(
    input.password,
    input.origin,
    input.userId,
    input.iterations ?? DEFAULT_ITERATIONS,
  );
  const digestP = await sha256(concat(Uint8Array.of(0x01), input.challenge));
  const sigmaP = await signDigest(scalar, digestP);
  const vP = publicKeyBytes(scalar);
  // no further use of the password scalar beyond this point
  const digestB = await sha256(
    concat(Uint8Array.of(0x02), sigmaP, u64be(input.browserTime)),
  );
  const sigmaB = await signDigest(input.browserKey, digestB);
  const vB = publicKeyBytes(input.browserKey);

  const bytes = concat(Uint8Array.of(0x01), u64be(input.browserTime), sigmaP, sigmaB, vP, vB);
  const json: WireCredential = {
    version: 1,
    browser_time: String(input.browserTime),
    sigma_p: b64uEncode(sigmaP),
    sigma_b: b64uEncode(sigmaB),
    v_p: b64uEncode(vP),
    v_b: b64uEncode(vB),
  };
  return { json, bytes, v_p: vP };
}

// enrolment double entry: compare the password public keys of both entries
// locally, before anything is sent anywhere
export async function entriesMatch(
  first: string,
  second: string,
  origin: string,
  userId: string,
  iterations = DEFAULT_ITERATIONS,
): Promise<boolean> {
  if (first === second) return true;
  const [a, b] = await Promise.all([
    derivePasswordScalar(first, origin, userId, iterations),
    derivePasswordScalar(second, origin, userId, iterations),
  ]);
  const vA = publicKeyBytes(a);
  const vB = publicKeyBytes(b);
  return hexEncode(vA) === hexEncode(vB);
}

export { bigIntTo32, bytesToBigInt };
