/** DOM layer: renders WalletState and forwards events to the controller.
 *
 * Checkbox selections live in `disclosureState` keyed by pending-entry
 * id, so the 2-second poll re-render never clobbers a half-made choice.
 */

import { AgentApi } from "./api.js";
import {
  buildDisclosureRows,
  disclosedNames,
  POLL_INTERVAL_MS,
  selectCredentialFor,
  summarizePending,
  toggleRow,
  WalletController,
  type DisclosureRow,
  type WalletState,
} from "./model.js";
import type { PendingEntry, PendingProofRequest } from "./types.js";

const agentBase =
  new URLSearchParams(window.location.search).get("agent") ?? "";
const api = new AgentApi(agentBase);
const controller = new WalletController(api, render);

const disclosureState = new Map<string, DisclosureRow[]>();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function rowsFor(entry: PendingProofRequest, state: WalletState): DisclosureRow[] {
  let rows = disclosureState.get(entry.id);
  if (!rows) {
    const credential = selectCredentialFor(entry, state.credentials);
    rows = buildDisclosureRows(
      entry,
      credential ? Object.keys(credential.attributes) : [],
    );
    disclosureState.set(entry.id, rows);
  }
  return rows;
}

function renderBanner(state: WalletState): void {
  const banner = byId<HTMLDivElement>("banner");
  if (state.banner) {
    banner.textContent = state.banner;
    banner.hidden = false;
  } else {
    banner.hidden = true;
  }
  const status = byId<HTMLSpanElement>("agent-status");
  status.textContent = state.connected
    ? `connected: ${state.agentLabel}`
    : "disconnected";
  status.className = state.connected ? "status ok" : "status down";
}

function renderPendingCard(entry: PendingEntry, state: WalletState): HTMLElement {
  const summary = summarizePending(entry);
  const card = el("article", "card");
  card.append(el("h3", undefined, summary.title));
  card.append(el("p", "from", `from ${summary.from}`));
  for (const line of summary.lines) {
    card.append(el("p", "detail", line));
  }

  const busy = controller.isBusy(entry.id);
  let disclosed: (() => string[] | undefined) = () => undefined;

  if (entry.kind === "proof_request") {
    const rows = rowsFor(entry, state);
    const list = el("div", "disclosure");
    for (const row of rows) {
      const label = el("label", row.required ? "locked" : undefined);
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = row.checked;
      box.disabled = row.required || busy;
      box.addEventListener("change", () => {
        disclosureState.set(entry.id, toggleRow(rowsFor(entry, state), row.name));
        render(controller.state);
      });
      label.append(box, ` ${row.name}${row.required ? " (required)" : ""}`);
      list.append(label);
    }
    card.append(list);
    disclosed = () => disclosedNames(rowsFor(entry, state));
  }

  const actions = el("div", "actions");
  const approve = el("button", "approve", busy ? "working…" : "Approve");
  approve.disabled = busy;
  approve.addEventListener("click", () => {
    void controller.approve(entry.id, disclosed());
  });
  const deny = el("button", "deny", "Deny");
  deny.disabled = busy;
  deny.addEventListener("click", () => {
    void controller.deny(entry.id);
  });
  actions.append(approve, deny);
  card.append(actions);
  return card;
}

function renderPending(state: WalletState): void {
  for (const id of [...disclosureState.keys()]) {
    if (!state.pending.some((entry) => entry.id === id)) {
      disclosureState.delete(id);
    }
  }
  const host = byId<HTMLDivElement>("pending");
  host.replaceChildren();
  if (!state.pending.length) {
    host.append(el("p", "empty", "Nothing waiting for approval."));
    return;
  }
  for (const entry of state.pending) {
    host.append(renderPendingCard(entry, state));
  }
}

function renderCredentials(state: WalletState): void {
  const host = byId<HTMLDivElement>("credentials");
  host.replaceChildren();
  if (!state.credentials.length) {
    host.append(el("p", "empty", "No credentials stored yet."));
    return;
  }
  for (const credential of state.credentials) {
    const card = el("article", "card slim");
    const names = Object.keys(credential.attributes);
    card.append(el("h3", undefined, `Credential ${credential.id.slice(0, 8)}`));
    card.append(el("p", "detail", `issuer ${credential.issuer_did}`));
    card.append(el("p", "detail", `${names.length} attributes`));
    host.append(card);
  }
}

function render(state: WalletState): void {
  renderBanner(state);
  renderPending(state);
  renderCredentials(state);
}

function wireOfferForm(): void {
  const form = byId<HTMLFormElement>("offer-form");
  const input = byId<HTMLTextAreaElement>("offer-input");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void controller.acceptPastedOffer(input.value).then((accepted) => {
      if (accepted) input.value = "";
    });
  });
}

wireOfferForm();
void controller.refresh();
window.setInterval(() => void controller.refresh(), POLL_INTERVAL_MS);
