export {
  deriveCredential,
  derivePasswordScalar,
  entriesMatch,
  buildSalt,
  canonicalOrigin,
  sha256,
  b64uEncode,
  b64uDecode,
  hexEncode,
  hexDecode,
  DEFAULT_ITERATIONS,
} from "./derive.js";
export type { DeriveInput, DerivedCredential, WireCredential } from "./derive.js";
export { BrowserKeyStore, MemoryStore } from "./keystore.js";
export type { KeyValueStore } from "./keystore.js";
export { CredentialField } from "./field.js";
export type { FieldOptions, PasswordSourceLike } from "./field.js";
export {
  ProtocolClient,
  PasswordMismatchError,
} from "./client.js";
export type { Challenge, ClientOptions, Decision } from "./client.js";
export { multBase, publicKeyBytes, signDigest, randomScalar, N, P } from "./secp256k1.js";
