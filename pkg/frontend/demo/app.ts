// Demo wiring: three forms, one protocol client, decisions rendered as-is.

import { CredentialField } from "../src/field.js";
import { BrowserKeyStore } from "../src/keystore.js";
import { PasswordMismatchError, ProtocolClient, Decision } from "../src/client.js";

const keyStore = BrowserKeyStore.fromLocalStorage();
const client = new ProtocolClient({ keyStore });

const status = document.getElementById("status") as HTMLDivElement;

function render(decision: Decision) {
  const label =
    decision.decision === "Accept"
      ? `Accept (browser_known=${decision.browser_known})`
      : `${decision.decision}${decision.code ? `: ${decision.code}` : ""}`;
  status.textContent = `${decision.status} ${label}`;
  status.className =
    decision.decision === "Accept"
      ? "accept"
      : decision.decision === "StepUpRequired"
        ? "stepup"
        : "reject";
}

function renderError(error: unknown) {
  status.textContent = error instanceof Error ? error.message : String(error);
  status.className = "reject";
}

function input(id: string): HTMLInputElement {
  return document.getElementById(id) as HTMLInputElement;
}

// wrap the password entries so only credentials leave them
const enrolField = new CredentialField(input("enrol-password"), {
  origin: location.origin,
  keyStore,
});
void enrolField; // field API demonstrated; flows below go through the client

document.getElementById("enrol-submit")!.addEventListener("click", async () => {
  try {
    status.textContent = "deriving…";
    const decision = await client.enrol(
      input("enrol-user").value,
      input("enrol-password").value,
      input("enrol-repeat").value,
    );
    render(decision);
    input("enrol-password").value = "";
    input("enrol-repeat").value = "";
  } catch (error) {
    if (error instanceof PasswordMismatchError) {
      status.textContent = "PasswordMismatch (nothing was sent)";
      status.className = "reject";
      return;
    }
    renderError(error);
  }
});

document.getElementById("login-submit")!.addEventListener("click", async () => {
  try {
    status.textContent = "deriving…";
    const decision = await client.login(
      input("login-user").value,
      input("login-password").value,
    );
    render(decision);
    input("login-password").value = "";
  } catch (error) {
    renderError(error);
  }
});

document.getElementById("change-submit")!.addEventListener("click", async () => {
  try {
    status.textContent = "deriving…";
    const decision = await client.changePassword(
      input("change-user").value,
      input("change-old").value,
      input("change-new").value,
    );
    render(decision);
    input("change-old").value = "";
    input("change-new").value = "";
  } catch (error) {
    renderError(error);
  }
});

document.getElementById("forget-browser")!.addEventListener("click", () => {
  keyStore.reset();
  status.textContent = "browser key forgotten; next login is an unknown browser";
  status.className = "stepup";
});
