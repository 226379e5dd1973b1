// Protocol client: challenge fetch plus the three authentication flows,
// speaking the JSON wire mapping against the HTTP service.

import {
  b64uDecode,
  deriveCredential,
  entriesMatch,
  DEFAULT_ITERATIONS,
  WireCredential,
} from "./derive.js";
import { BrowserKeyStore } from "./keystore.js";

export interface Challenge {
  nonce: Uint8Array;
  expiresAt: number;
}

export interface Decision {
  decision: "Accept" | "StepUpRequired" | "Reject";
  code?: string;
  browser_known?: boolean;
  status: number;
}

export class PasswordMismatchError extends Error {
  constructor() {
    super("password entries do not match");
    this.name = "PasswordMismatchError";
  }
}

export interface ClientOptions {
  baseUrl?: string; // default: same origin
  origin?: string; // derivation origin; default: page origin
  keyStore: BrowserKeyStore;
  iterations?: number;
  now?: () => number;
}

export class ProtocolClient {
  private baseUrl: string;
  private origin: string;
  private keyStore: BrowserKeyStore;
  private iterations: number;
  private now: () => number;

  constructor(options: ClientOptions) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.origin = options.origin ?? globalThis.location.origin;
    this.keyStore = options.keyStore;
    this.iterations = options.iterations ?? DEFAULT_ITERATIONS;
    this.now = options.now ?? (() => Math.floor(Date.now() / 1000));
  }

  async fetchChallenge(): Promise<Challenge> {
    const response = await fetch(
      `${this.baseUrl}/challenge?origin=${encodeURIComponent(this.origin)}`,
    );
    if (!response.ok) throw new Error(`challenge fetch failed: ${response.status}`);
    const body = await response.json();
    return { nonce: b64uDecode(body.challenge), expiresAt: Number(body.expires_at) };
  }

  private async deriveFor(userId: string, password: string, challenge: Challenge) {
    return deriveCredential({
      userId,
      challenge: challenge.nonce,
      password,
      origin: this.origin,
      browserTime: this.now(),
      browserKey: this.keyStore.key(),
      iterations: this.iterations,
    });
  }

  private async post(
    path: string,
    type: number,
    userId: string,
    challenge: Challenge,
    cred: WireCredential,
    credNew?: WireCredential,
  ): Promise<Decision> {
    const body: Record<string, unknown> = {
      version: 1,
      type,
      user_id: userId,
      challenge: b64uEncodeNonce(challenge.nonce),
      cred,
    };
    if (credNew) body.cred_new = credNew;
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await response.json();
    return { ...payload, status: response.status };
  }

  async enrol(userId: string, password: string, passwordRepeat: string): Promise<Decision> {
    const same = await entriesMatch(
      password, passwordRepeat, this.origin, userId, this.iterations,
    );
    if (!same) throw new PasswordMismatchError();
    const challenge = await this.fetchChallenge();
    const { json } = await this.deriveFor(userId, password, challenge);
    return this.post("/enrol", 1, userId, challenge, json);
  }

  async login(userId: string, password: string): Promise<Decision> {
    const challenge = await this.fetchChallenge();
    const { json } = await this.deriveFor(userId, password, challenge);
    return this.post("/login", 2, userId, challenge, json);
  }

  async changePassword(
    userId: string,
    oldPassword: string,
    newPassword: string,
  ): Promise<Decision> {
    const challenge = await this.fetchChallenge();
    const oldCred = await this.deriveFor(userId, oldPassword, challenge);
    const newCred = await this.deriveFor(userId, newPassword, challenge);
    return this.post("/change", 3, userId, challenge, oldCred.json, newCred.json);
  }
}

function b64uEncodeNonce(nonce: Uint8Array): string {
  let binary = "";
  for (const byte of nonce) binary += String.fromCharCode(byte);
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}
