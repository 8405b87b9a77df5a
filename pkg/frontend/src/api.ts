/** Typed client for the wallet agent's HTTP API.
 *
 * Every call either resolves with the parsed JSON body or rejects with
 * an AgentApiError. A null status means the agent could not be reached
 * at all (connection refused, DNS, timeout); that is the signal the UI
 * turns into its "agent down" banner.
 */

import type {
  ApproveResponse,
  Connection,
  ConnectionOfferPayload,
  DenyResponse,
  HealthResponse,
  PendingEntry,
  StoredCredential,
} from "./types.js";

export class AgentApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
    readonly detail: string | null = null,
  ) {
    super(message);
    this.name = "AgentApiError";
  }

  /** True when the agent never answered (as opposed to answering 4xx/5xx). */
  get unreachable(): boolean {
    return this.status === null;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AgentApi {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (error) {
      throw new AgentApiError(
        `wallet agent unreachable at ${this.baseUrl || "this origin"}`,
        null,
        String(error),
      );
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : null;
      throw new AgentApiError(
        detail ?? `agent returned HTTP ${response.status}`,
        response.status,
        detail,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("/healthz");
  }

  async pending(): Promise<PendingEntry[]> {
    const data = await this.request<{ pending: PendingEntry[] }>("/pending");
    return data.pending;
  }

  async credentials(): Promise<StoredCredential[]> {
    const data = await this.request<{ credentials: StoredCredential[] }>(
      "/credentials",
    );
    return data.credentials;
  }

  async connections(): Promise<Connection[]> {
    const data = await this.request<{ connections: Connection[] }>(
      "/connections",
    );
    return data.connections;
  }

  approve(
    pendingId: string,
    options: { disclosed?: string[]; credentialId?: string } = {},
  ): Promise<ApproveResponse> {
    const payload: Record<string, unknown> = {};
    if (options.disclosed !== undefined) payload.disclosed = options.disclosed;
    if (options.credentialId !== undefined) {
      payload.credential_id = options.credentialId;
    }
    return this.post<ApproveResponse>(
      `/pending/${encodeURIComponent(pendingId)}/approve`,
      payload,
    );
  }

  deny(pendingId: string, reason?: string): Promise<DenyResponse> {
    return this.post<DenyResponse>(
      `/pending/${encodeURIComponent(pendingId)}/deny`,
      reason === undefined ? {} : { reason },
    );
  }

  acceptOffer(offer: ConnectionOfferPayload): Promise<Connection> {
    return this.post<Connection>("/connections/accept", { offer });
  }
}
