// secp256k1 group math and deterministic ECDSA on native bigint.
// WebCrypto has no secp256k1, so the curve lives here; hashing and HMAC
// go through crypto.subtle (available in browsers and node >= 16).

export const P = 0xfffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2fn;
export const N = 0xfffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141n;
export const GX = 0x79be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798n;
export const GY = 0x483ada7726a3c4655da4fbfc0e1108a8fd17b448a68554199c47d08ffb10d4b8n;
export const HALF_N = N >> 1n;

const subtle = globalThis.crypto.subtle;

export function mod(a: bigint, m: bigint): bigint {
  const r = a % m;
  return r >= 0n ? r : r + m;
}

export function powmod(base: bigint, exp: bigint, m: bigint): bigint {
  let result = 1n;
  let b = mod(base, m);
  let e = exp;
  while (e > 0n) {
    if (e & 1n) result = (result * b) % m;
    b = (b * b) % m;
    e >>= 1n;
  }
  return result;
}

// p and n are prime, so Fermat inversion is fine
export const invmod = (a: bigint, m: bigint): bigint => powmod(a, m - 2n, m);

type Jac = { x: bigint; y: bigint; z: bigint };
const INFINITY: Jac = { x: 0n, y: 1n, z: 0n };

function jacDouble(pt: Jac): Jac {
  if (pt.z === 0n) return pt;
  const a = (pt.x * pt.x) % P;
  const b = (pt.y * pt.y) % P;
  const c = (b * b) % P;
  const t = pt.x + b;
  const d = mod(2n * (t * t - a - c), P);
  const e = (3n * a) % P;
  const f = (e * e) % P;
  const x3 = mod(f - 2n * d, P);
  const y3 = mod(e * (d - x3) - 8n * c, P);
  const z3 = (2n * pt.y * pt.z) % P;
  return { x: x3, y: y3, z: z3 };
}

function jacAddMixed(pt: Jac, qx: bigint, qy: bigint): Jac {
  if (pt.z === 0n) return { x: qx, y: qy, z: 1n };
  const z1z1 = (pt.z * pt.z) % P;
  const u2 = (qx * z1z1) % P;
  const s2 = (qy * pt.z * z1z1) % P;
  const h = mod(u2 - pt.x, P);
  if (h === 0n) {
    if (mod(s2 - pt.y, P) === 0n) return jacDouble(pt);
    return INFINITY;
  }
  const hh = (h * h) % P;
  const i = (4n * hh) % P;
  const j = (h * i) % P;
  const r = mod(2n * (s2 - pt.y), P);
  const v = (pt.x * i) % P;
  const x3 = mod(r * r - j - 2n * v, P);
  const y3 = mod(r * (v - x3) - 2n * pt.y * j, P);
  const zh = pt.z + h;
  const z3 = mod(zh * zh - z1z1 - hh, P);
  return { x: x3, y: y3, z: z3 };
}

function toAffine(pt: Jac): [bigint, bigint] {
  if (pt.z === 0n) throw new Error("point at infinity");
  const zi = invmod(pt.z, P);
  const zi2 = (zi * zi) % P;
  return [(pt.x * zi2) % P, (pt.y * zi2 * zi) % P];
}

// 4-bit window table over G, built on first use: table[w][k-1] = k * 16^w * G
let windowTable: [bigint, bigint][][] | null = null;

function buildTable(): [bigint, bigint][][] {
  const table: [bigint, bigint][][] = [];
  let base: [bigint, bigint] = [GX, GY];
  for (let w = 0; w < 64; w++) {
    const row: [bigint, bigint][] = [];
    let acc: Jac = { x: base[0], y: base[1], z: 1n };
    row.push(base);
    for (let k = 2; k <= 16; k++) {
      acc = jacAddMixed(acc, base[0], base[1]);
      row.push(toAffine(acc));
    }
    base = row[15]; // 16 * (previous window base)
    table.push(row.slice(0, 15));
  }
  return table;
}

export function multBase(k: bigint): [bigint, bigint] {
  if (k <= 0n || k >= N) throw new Error("scalar out of range");
  if (windowTable === null) windowTable = buildTable();
  let acc = INFINITY;
  for (let w = 0; w < 64; w++) {
    const nibble = Number((k >> BigInt(4 * w)) & 0xfn);
    if (nibble !== 0) {
      const [px, py] = windowTable[w][nibble - 1];
      acc = jacAddMixed(acc, px, py);
    }
  }
  return toAffine(acc);
}

export function bigIntTo32(value: bigint): Uint8Array {
  const out = new Uint8Array(32);
  let v = value;
  for (let i = 31; i >= 0; i--) {
    out[i] = Number(v & 0xffn);
    v >>= 8n;
  }
  return out;
}

export function bytesToBigInt(data: Uint8Array): bigint {
  let v = 0n;
  for (const byte of data) v = (v << 8n) | BigInt(byte);
  return v;
}

export function compressPoint([x, y]: [bigint, bigint]): Uint8Array {
  const out = new Uint8Array(33);
  out[0] = (y & 1n) === 1n ? 0x03 : 0x02;
  out.set(bigIntTo32(x), 1);
  return out;
}

export function publicKeyBytes(secret: bigint): Uint8Array {
  return compressPoint(multBase(secret));
}

export function randomScalar(): bigint {
  for (;;) {
    const draw = new Uint8Array(32);
    globalThis.crypto.getRandomValues(draw);
    const value = bytesToBigInt(draw);
    if (value >= 1n && value < N) return value;
  }
}

function concatBytes(...parts: Uint8Array[]): Uint8Array {
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

async function hmacSha256(key: Uint8Array, data: Uint8Array): Promise<Uint8Array> {
  const cryptoKey = await subtle.importKey(
    "raw", key as BufferSource, { name: "HMAC", hash: "SHA-256" }, false, ["sign"],
  );
  return new Uint8Array(await subtle.sign("HMAC", cryptoKey, data as BufferSource));
}

// HMAC-SHA-256 derandomized nonce (same construction as the server side)
export async function rfc6979Nonce(secret: bigint, digest: Uint8Array): Promise<bigint> {
  if (digest.length !== 32) throw new Error("digest must be 32 bytes");
  const x = bigIntTo32(secret);
  const h1 = bytesToBigInt(digest);
  const msg = h1 >= N ? bigIntTo32(mod(h1, N)) : digest;
  let v: Uint8Array = new Uint8Array(32).fill(0x01);
  let k: Uint8Array = new Uint8Array(32).fill(0x00);
  k = await hmacSha256(k, concatBytes(v, Uint8Array.of(0x00), x, msg));
  v = await hmacSha256(k, v);
  k = await hmacSha256(k, concatBytes(v, Uint8Array.of(0x01), x, msg));
  v = await hmacSha256(k, v);
  for (;;) {
    v = await hmacSha256(k, v);
    const candidate = bytesToBigInt(v);
    if (candidate >= 1n && candidate < N) return candidate;
    k = await hmacSha256(k, concatBytes(v, Uint8Array.of(0x00)));
    v = await hmacSha256(k, v);
  }
}

export async function signDigest(secret: bigint, digest: Uint8Array): Promise<Uint8Array> {
  if (secret <= 0n || secret >= N) throw new Error("signing key out of range");
  const z = bytesToBigInt(digest);
  const k = await rfc6979Nonce(secret, digest);
  const [rx] = multBase(k);
  const r = mod(rx, N);
  if (r === 0n) throw new Error("degenerate nonce"); // probability ~2^-256
  let s = mod(invmod(k, N) * (z + r * secret), N);
  if (s === 0n) throw new Error("degenerate signature");
  if (s > HALF_N) s = N - s;
  return concatBytes(bigIntTo32(r), bigIntTo32(s));
}
