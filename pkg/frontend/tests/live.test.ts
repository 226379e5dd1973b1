// Live end-to-end: spawn the Python HTTP service and run the full
// enrol -> login -> change -> step-up cycle over real HTTP.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ProtocolClient } from "../src/client.js";
import { BrowserKeyStore, MemoryStore } from "../src/keystore.js";

const PORT = 18400 + Math.floor(Math.random() * 2000);
const BASE = `http://127.0.0.1:${PORT}`;
const USER = "live-user";
const PASSWORD = "live test password";
const NEW_PASSWORD = "rotated password 9";

let service: ChildProcess;
let storeDir: string;

async function waitForService(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/challenge?origin=${encodeURIComponent(BASE)}`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
}

beforeAll(async () => {
  storeDir = mkdtempSync(join(tmpdir(), "credfield-live-"));
  service = spawn(
    "python3",
    [
      "-m", "credfield.cli", "serve",
      "--port", String(PORT),
      "--host", "127.0.0.1",
      "--origin", BASE,
      "--policy", "HighSecurity",
      "--store", join(storeDir, "store.txt"),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  service.stderr?.on("data", (chunk) => {
    process.stderr.write(`[service] ${chunk}`);
  });
  await waitForService();
}, 40000);

afterAll(() => {
  service?.kill("SIGTERM");
  rmSync(storeDir, { recursive: true, force: true });
});

describe("live cycle against the HTTP service", () => {
  const keyBackend = new MemoryStore();
  const keyStore = new BrowserKeyStore(keyBackend);
  const client = new ProtocolClient({ baseUrl: BASE, origin: BASE, keyStore });

  it("enrols", async () => {
    const decision = await client.enrol(USER, PASSWORD, PASSWORD);
    expect(decision.status).toBe(200);
    expect(decision.decision).toBe("Accept");
  }, 20000);

  it("logs in from the enrolled browser", async () => {
    const decision = await client.login(USER, PASSWORD);
    expect(decision.status).toBe(200);
    expect(decision.browser_known).toBe(true);
  }, 20000);

  it("rejects a wrong password with a machine-readable code", async () => {
    const decision = await client.login(USER, "not the password");
    expect(decision.status).toBe(401);
    expect(decision.code).toBe("UnknownPassword");
  }, 20000);

  it("changes the password; old fails, new succeeds", async () => {
    const change = await client.changePassword(USER, PASSWORD, NEW_PASSWORD);
    expect(change.status).toBe(200);

    const oldLogin = await client.login(USER, PASSWORD);
    expect(oldLogin.status).toBe(401);
    expect(oldLogin.code).toBe("UnknownPassword");

    const newLogin = await client.login(USER, NEW_PASSWORD);
    expect(newLogin.status).toBe(200);
  }, 20000);

  it("steps up after the browser key is reset", async () => {
    keyStore.reset();
    const decision = await client.login(USER, NEW_PASSWORD);
    expect(decision.status).toBe(428);
    expect(decision.code).toBe("StepUpRequired");

    const events = await (await fetch(`${BASE}/events`)).json();
    const kinds = events.map((event: { kind: string }) => event.kind);
    expect(kinds).toContain("StepUpRequired");
  }, 20000);

  it("rejects a replayed message byte-for-byte", async () => {
    // craft one message manually so it can be resubmitted verbatim
    const challenge = await client.fetchChallenge();
    const { deriveCredential } = await import("../src/derive.js");
    const { json } = await deriveCredential({
      userId: USER,
      challenge: challenge.nonce,
      password: NEW_PASSWORD,
      origin: BASE,
      browserTime: Math.floor(Date.now() / 1000),
      browserKey: keyStore.key(),
    });
    const body = JSON.stringify({
      version: 1,
      type: 2,
      user_id: USER,
      challenge: (await import("../src/derive.js")).b64uEncode(challenge.nonce),
      cred: json,
    });
    const submit = () =>
      fetch(`${BASE}/login`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
      });
    const first = await submit();
    expect([200, 428]).toContain(first.status); // unknown browser after reset
    const replay = await submit();
    expect(replay.status).toBe(401);
    expect((await replay.json()).code).toBe("AlreadyConsumed");
  }, 20000);
});
