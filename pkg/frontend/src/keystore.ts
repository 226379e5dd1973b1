// Trust-on-first-use browser key, persisted in origin-scoped storage.
//
// A page-level polyfill cannot make the key truly un-exportable (that
// needs engine support); what it can promise is that the key is created
// once, reused across page loads, and never leaves this module's API.
// Injection of a known key exists for cross-implementation tests only
// and must be enabled explicitly.

import { bigIntTo32, hexEncode, hexDecode } from "./derive.js";
import { bytesToBigInt, N, randomScalar } from "./secp256k1.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStore implements KeyValueStore {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

const STORAGE_KEY = "credfield.browser_key.v1";

export class BrowserKeyStore {
  private cached: bigint | null = null;

  constructor(
    private backend: KeyValueStore,
    private testMode = false,
  ) {}

  static fromLocalStorage(testMode = false): BrowserKeyStore {
    return new BrowserKeyStore(globalThis.localStorage, testMode);
  }

  key(): bigint {
    if (this.cached !== null) return this.cached;
    const stored = this.backend.getItem(STORAGE_KEY);
    if (stored !== null) {
      const value = bytesToBigInt(hexDecode(stored));
      if (value >= 1n && value < N) {
        this.cached = value;
        return value;
      }
      this.backend.removeItem(STORAGE_KEY); // corrupt entry: start over
    }
    const fresh = randomScalar();
    this.backend.setItem(STORAGE_KEY, hexEncode(bigIntTo32(fresh)));
    this.cached = fresh;
    return fresh;
  }

  /** Test-mode only: pin a known key so vectors are reproducible. */
  inject(hexKey: string): void {
    if (!this.testMode) {
      throw new Error("key injection is only available in test mode");
    }
    const value = bytesToBigInt(hexDecode(hexKey));
    if (value < 1n || value >= N) throw new Error("injected key out of range");
    this.backend.setItem(STORAGE_KEY, hexKey);
    this.cached = value;
  }

  /** Forget this browser: the next login looks like a new device. */
  reset(): void {
    this.backend.removeItem(STORAGE_KEY);
    this.cached = null;
  }
}
