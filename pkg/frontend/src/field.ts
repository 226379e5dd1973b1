// The credential field: wraps a masked input and guarantees that its own
// API never returns the raw password. What it yields is the derived
// credential; the "value" of the field *is* the credential.
//
// A page-level component cannot stop the page from reading the underlying
// <input> it created itself, nor can it make its chrome un-spoofable;
// both need engine support. The contract enforced here is that this
// component's surface exposes no accessor for the raw text and retains
// the entry only inside a private field for the duration of use.

import { deriveCredential, WireCredential } from "./derive.js";
import { BrowserKeyStore } from "./keystore.js";

export interface PasswordSourceLike {
  value: string;
}

export interface FieldOptions {
  origin: string;
  keyStore: BrowserKeyStore;
  iterations?: number;
  now?: () => number;
}

export class CredentialField {
  #source: PasswordSourceLike;
  #options: FieldOptions;
  #lastCredential: WireCredential | null = null;

  constructor(source: PasswordSourceLike, options: FieldOptions) {
    this.#source = source;
    this.#options = options;
  }

  /** Serialized credential from the last derivation; never the raw text. */
  get value(): WireCredential | null {
    return this.#lastCredential;
  }

  get isEmpty(): boolean {
    return this.#source.value.length === 0;
  }

  async produce(userId: string, challenge: Uint8Array): Promise<WireCredential> {
    const now = this.#options.now ?? (() => Math.floor(Date.now() / 1000));
    const entry = this.#source.value;
    const { json } = await deriveCredential({
      userId,
      challenge,
      password: entry,
      origin: this.#options.origin,
      browserTime: now(),
      browserKey: this.#options.keyStore.key(),
      iterations: this.#options.iterations,
    });
    this.#lastCredential = json;
    return json;
  }

  /** Wipe the underlying entry (after submit). */
  clear(): void {
    this.#source.value = "";
    this.#lastCredential = null;
  }
}
