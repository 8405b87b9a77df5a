/** View-model layer: all wallet UI logic that does not touch the DOM.
 *
 * The DOM layer (app.ts) only renders the state these helpers produce
 * and forwards events back into them, so everything decision-shaped is
 * unit-testable under plain node.
 */

import { AgentApiError } from "./api.js";
import type {
  ApproveResponse,
  Connection,
  ConnectionOfferPayload,
  DenyResponse,
  HealthResponse,
  PendingCredentialOffer,
  PendingEntry,
  PendingProofRequest,
  StoredCredential,
} from "./types.js";

/** What the controller needs from the agent client (AgentApi satisfies
 * this; tests may substitute a stub). */
export interface WalletApi {
  health(): Promise<HealthResponse>;
  pending(): Promise<PendingEntry[]>;
  credentials(): Promise<StoredCredential[]>;
  approve(
    pendingId: string,
    options?: { disclosed?: string[]; credentialId?: string },
  ): Promise<ApproveResponse>;
  deny(pendingId: string, reason?: string): Promise<DenyResponse>;
  acceptOffer(offer: ConnectionOfferPayload): Promise<Connection>;
}

/** The UI must notice new pending items within two seconds. */
export const POLL_INTERVAL_MS = 2000;

// ----------------------------------------------------------------------
// disclosure checkboxes

export interface DisclosureRow {
  name: string;
  /** Requested by the verifier: shown checked and locked. */
  required: boolean;
  checked: boolean;
  origin: "attribute" | "predicate" | "extra";
}

/** Checkbox rows for a proof request: requested names locked on, the
 * credential's remaining attributes offered as opt-in extras. */
export function buildDisclosureRows(
  entry: PendingProofRequest,
  credentialAttributeNames: string[],
): DisclosureRow[] {
  const rows: DisclosureRow[] = [];
  const seen = new Set<string>();
  for (const name of entry.requested_attributes) {
    if (seen.has(name)) continue;
    rows.push({ name, required: true, checked: true, origin: "attribute" });
    seen.add(name);
  }
  for (const name of entry.requested_predicates) {
    if (seen.has(name)) continue;
    rows.push({ name, required: true, checked: true, origin: "predicate" });
    seen.add(name);
  }
  for (const name of [...credentialAttributeNames].sort()) {
    if (seen.has(name)) continue;
    rows.push({ name, required: false, checked: false, origin: "extra" });
    seen.add(name);
  }
  return rows;
}

/** Toggle an optional row; required rows never change. */
export function toggleRow(
  rows: DisclosureRow[],
  name: string,
): DisclosureRow[] {
  return rows.map((row) =>
    row.name === name && !row.required
      ? { ...row, checked: !row.checked }
      : row,
  );
}

export function disclosedNames(rows: DisclosureRow[]): string[] {
  return rows.filter((row) => row.checked).map((row) => row.name);
}

/** First stored credential able to satisfy every requested name. */
export function selectCredentialFor(
  entry: PendingProofRequest,
  credentials: StoredCredential[],
): StoredCredential | null {
  const wanted = [...entry.requested_attributes, ...entry.requested_predicates];
  for (const credential of credentials) {
    if (wanted.every((name) => name in credential.attributes)) {
      return credential;
    }
  }
  return null;
}

// ----------------------------------------------------------------------
// pasted connection offers

export class OfferParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "OfferParseError";
  }
}

const OFFER_FIELDS = [
  "offer_id",
  "endpoint",
  "sender_did",
  "sender_verkey",
  "label",
] as const;

/** Accepts the offer JSON as shown by issuers and login pages — raw,
 * wrapped in {"offer": ...}, or base64url-encoded. */
export function parseOfferInput(text: string): ConnectionOfferPayload {
  const trimmed = text.trim();
  if (!trimmed) {
    throw new OfferParseError("paste a connection offer first");
  }
  let candidate = trimmed;
  if (!trimmed.startsWith("{")) {
    try {
      candidate = base64UrlDecode(trimmed);
    } catch {
      throw new OfferParseError(
        "that does not look like an offer (neither JSON nor base64)",
      );
    }
  }
  let data: unknown;
  try {
    data = JSON.parse(candidate);
  } catch {
    throw new OfferParseError("the pasted offer is not valid JSON");
  }
  if (typeof data === "object" && data !== null && "offer" in data) {
    data = (data as { offer: unknown }).offer;
  }
  if (typeof data !== "object" || data === null) {
    throw new OfferParseError("the pasted offer is not a JSON object");
  }
  const record = data as Record<string, unknown>;
  for (const field of OFFER_FIELDS) {
    if (typeof record[field] !== "string" || record[field] === "") {
      throw new OfferParseError(`the offer is missing "${field}"`);
    }
  }
  return {
    offer_id: record.offer_id as string,
    endpoint: record.endpoint as string,
    sender_did: record.sender_did as string,
    sender_verkey: record.sender_verkey as string,
    label: record.label as string,
  };
}

function base64UrlDecode(text: string): string {
  const normalized = text.replace(/-/g, "+").replace(/_/g, "/");
  const padded =
    normalized + "=".repeat((4 - (normalized.length % 4)) % 4);
  const binary = atob(padded);
  const bytes = Uint8Array.from(binary, (char) => char.charCodeAt(0));
  return new TextDecoder("utf-8", { fatal: true }).decode(bytes);
}

// ----------------------------------------------------------------------
// pending-entry summaries for rendering

export interface PendingSummary {
  id: string;
  kind: PendingEntry["kind"];
  title: string;
  from: string;
  lines: string[];
}

export function summarizePending(entry: PendingEntry): PendingSummary {
  if (entry.kind === "credential_offer") {
    return summarizeOffer(entry);
  }
  return summarizeProofRequest(entry);
}

function displayValue(value: unknown): string {
  if (typeof value === "string") return value;
  if (typeof value === "boolean") return value ? "yes" : "no";
  return JSON.stringify(value);
}

function summarizeOffer(entry: PendingCredentialOffer): PendingSummary {
  const preview = entry.body.preview ?? {};
  return {
    id: entry.id,
    kind: entry.kind,
    title: "Credential offer",
    from: entry.connection_label || entry.body.issuer_did,
    lines: Object.entries(preview).map(
      ([name, value]) => `${name}: ${displayValue(value)}`,
    ),
  };
}

function summarizeProofRequest(entry: PendingProofRequest): PendingSummary {
  const lines: string[] = [];
  if (entry.requested_attributes.length) {
    lines.push(`reveal: ${entry.requested_attributes.join(", ")}`);
  }
  if (entry.requested_predicates.length) {
    lines.push(`prove: ${entry.requested_predicates.join(", ")}`);
  }
  return {
    id: entry.id,
    kind: entry.kind,
    title: `Proof request: ${entry.body.name}`,
    from: entry.connection_label || entry.connection_id,
    lines,
  };
}

// ----------------------------------------------------------------------
// errors to banner text

export function describeError(error: unknown): string {
  if (error instanceof AgentApiError) {
    if (error.unreachable) {
      return "Wallet agent is unreachable — is it still running?";
    }
    return error.message;
  }
  if (error instanceof OfferParseError) {
    return error.message;
  }
  return String(error);
}

// ----------------------------------------------------------------------
// controller: polling state + double-submit protection

export interface WalletState {
  connected: boolean;
  agentLabel: string;
  banner: string | null;
  pending: PendingEntry[];
  credentials: StoredCredential[];
  busyIds: string[];
}

const ACCEPT_OFFER_KEY = "accept-offer";

export class WalletController {
  state: WalletState = {
    connected: false,
    agentLabel: "",
    banner: null,
    pending: [],
    credentials: [],
    busyIds: [],
  };

  private readonly inFlight = new Set<string>();
  /** A failed action's explanation; outlives poll refreshes until the
   * next action starts or succeeds. */
  private actionBanner: string | null = null;

  constructor(
    private readonly api: WalletApi,
    private readonly onChange: (state: WalletState) => void = () => {},
  ) {}

  private update(patch: Partial<WalletState>): void {
    this.state = { ...this.state, ...patch, busyIds: [...this.inFlight] };
    this.onChange(this.state);
  }

  isBusy(id: string): boolean {
    return this.inFlight.has(id);
  }

  /** One poll tick: pull pending items and credentials. */
  async refresh(): Promise<void> {
    try {
      const [health, pending, credentials] = await Promise.all([
        this.api.health(),
        this.api.pending(),
        this.api.credentials(),
      ]);
      this.update({
        connected: true,
        agentLabel: health.label,
        banner: this.actionBanner,
        pending,
        credentials,
      });
    } catch (error) {
      this.update({
        connected: false,
        banner: this.actionBanner ?? describeError(error),
      });
    }
  }

  private async performAction(
    key: string,
    action: () => Promise<void>,
  ): Promise<boolean> {
    if (this.inFlight.has(key)) return false;
    this.inFlight.add(key);
    this.actionBanner = null;
    this.update({});
    try {
      await action();
      return true;
    } catch (error) {
      this.actionBanner = describeError(error);
      this.update({ banner: this.actionBanner });
      return false;
    } finally {
      this.inFlight.delete(key);
      await this.refresh();
    }
  }

  /** Returns false when the submit was blocked (already in flight). */
  approve(id: string, disclosed?: string[]): Promise<boolean> {
    return this.performAction(id, async () => {
      await this.api.approve(id, { disclosed });
    });
  }

  deny(id: string, reason?: string): Promise<boolean> {
    return this.performAction(id, async () => {
      await this.api.deny(id, reason);
    });
  }

  /** Accept a pasted offer; parse errors land in the banner. */
  acceptPastedOffer(text: string): Promise<boolean> {
    return this.performAction(ACCEPT_OFFER_KEY, async () => {
      await this.api.acceptOffer(parseOfferInput(text));
    });
  }
}
