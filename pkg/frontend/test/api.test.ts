import { describe, expect, it } from "vitest";

import { AgentApi, AgentApiError, type FetchLike } from "../src/api.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function scriptedFetch(
  responder: (url: string) => { status: number; body: unknown },
): { fetchFn: FetchLike; requests: Recorded[] } {
  const requests: Recorded[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    requests.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    const { status, body } = responder(url);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { fetchFn, requests };
}

describe("AgentApi", () => {
  it("normalizes a trailing slash in the base URL", async () => {
    const { fetchFn, requests } = scriptedFetch(() => ({
      status: 200,
      body: { ok: true, label: "jane" },
    }));
    const api = new AgentApi("http://localhost:8101/", fetchFn);
    await api.health();
    expect(requests[0]?.url).toBe("http://localhost:8101/healthz");
  });

  it("unwraps the pending list", async () => {
    const { fetchFn } = scriptedFetch(() => ({
      status: 200,
      body: { pending: [{ id: "p1" }] },
    }));
    const api = new AgentApi("", fetchFn);
    const pending = await api.pending();
    expect(pending).toEqual([{ id: "p1" }]);
  });

  it("posts approve bodies with snake_case fields", async () => {
    const { fetchFn, requests } = scriptedFetch(() => ({
      status: 200,
      body: { status: "presented" },
    }));
    const api = new AgentApi("http://a", fetchFn);
    await api.approve("p 1", {
      disclosed: ["email"],
      credentialId: "cred-9",
    });
    expect(requests[0]?.url).toBe("http://a/pending/p%201/approve");
    expect(requests[0]?.method).toBe("POST");
    expect(requests[0]?.body).toEqual({
      disclosed: ["email"],
      credential_id: "cred-9",
    });
  });

  it("omits unset approve options entirely", async () => {
    const { fetchFn, requests } = scriptedFetch(() => ({
      status: 200,
      body: { status: "credential_stored" },
    }));
    await new AgentApi("http://a", fetchFn).approve("c1");
    expect(requests[0]?.body).toEqual({});
  });

  it("sends deny reasons when given", async () => {
    const { fetchFn, requests } = scriptedFetch(() => ({
      status: 200,
      body: { status: "denied" },
    }));
    await new AgentApi("http://a", fetchFn).deny("p1", "not today");
    expect(requests[0]?.body).toEqual({ reason: "not today" });
  });

  it("wraps offers for the accept endpoint", async () => {
    const { fetchFn, requests } = scriptedFetch(() => ({
      status: 200,
      body: { state: "ESTABLISHED" },
    }));
    const offer = {
      offer_id: "o1",
      endpoint: "http://issuer",
      sender_did: "did:desk:s",
      sender_verkey: "k",
      label: "issuer",
    };
    await new AgentApi("http://a", fetchFn).acceptOffer(offer);
    expect(requests[0]?.url).toBe("http://a/connections/accept");
    expect(requests[0]?.body).toEqual({ offer });
  });

  it("surfaces the agent's error detail on non-2xx", async () => {
    const { fetchFn } = scriptedFetch(() => ({
      status: 422,
      body: { detail: "no matching credential" },
    }));
    const api = new AgentApi("http://a", fetchFn);
    const error = await api.approve("p1").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(AgentApiError);
    const apiError = error as AgentApiError;
    expect(apiError.status).toBe(422);
    expect(apiError.message).toBe("no matching credential");
    expect(apiError.unreachable).toBe(false);
  });

  it("flags network failures as unreachable", async () => {
    const fetchFn: FetchLike = async () => {
      throw new TypeError("fetch failed");
    };
    const api = new AgentApi("http://a", fetchFn);
    const error = await api.pending().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(AgentApiError);
    expect((error as AgentApiError).unreachable).toBe(true);
    expect((error as AgentApiError).status).toBe(null);
  });
});
