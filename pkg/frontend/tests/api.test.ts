import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, NetworkError, withRetry } from "../src/api.js";
import type { TreeNode } from "../src/types.js";
import { assembledBits, serialize, startWizard } from "../src/wizard.js";
import fixtureTree from "./fixtures/taxonomy.json";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("posts annotations and returns the stored entry", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("/api/annotations");
      expect(init?.method).toBe("POST");
      const sent = JSON.parse(String(init?.body));
      return jsonResponse(201, sent);
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const entry = await client.postAnnotation({
      clip_id: "c1",
      code: "111-0-01-00-1",
      annotator: "alice",
    });
    expect(entry.code).toBe("111-0-01-00-1");
  });

  it("passes the overwrite flag through as a query parameter", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toContain("overwrite=true");
      return jsonResponse(201, {});
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await client.postAnnotation({ clip_id: "c", code: "111001001", annotator: "a" }, true);
    expect(fetchMock).toHaveBeenCalledOnce();
  });

  it("surfaces server rejections as ApiError with the server detail", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse(409, { error: "DuplicateAnnotation", detail: "clip already annotated" }),
    );
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const err = await client
      .postAnnotation({ clip_id: "c", code: "111001001", annotator: "a" })
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).code).toBe("DuplicateAnnotation");
    expect((err as ApiError).message).toContain("already annotated");
  });

  it("a rejected submission leaves the wizard state untouched", async () => {
    const tree = fixtureTree as TreeNode;
    const state = startWizard(tree, "clip-1");
    const snapshot = JSON.stringify(serialize(state));
    const fetchMock = vi.fn(async () =>
      jsonResponse(400, { error: "InvalidCode", detail: "bad group" }),
    );
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await expect(
      client.postAnnotation({ clip_id: "clip-1", code: "111-0-10-00-1", annotator: "a" }),
    ).rejects.toBeInstanceOf(ApiError);
    expect(JSON.stringify(serialize(state))).toBe(snapshot);
    expect(assembledBits(state)).toBe("");
  });

  it("wraps transport failures in NetworkError", async () => {
    const fetchMock = vi.fn(async () => {
      throw new TypeError("connection refused");
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await expect(client.getManifest()).rejects.toBeInstanceOf(NetworkError);
  });

  it("fetches taxonomy and verbs", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL) => {
      const path = String(url);
      if (path === "/api/taxonomy") return jsonResponse(200, fixtureTree);
      if (path.startsWith("/api/verbs?code="))
        return jsonResponse(200, { verbs: ["chop", "cut"] });
      throw new Error(`unexpected ${path}`);
    });
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    const tree = await client.getTaxonomy();
    expect(tree.options.length).toBeGreaterThan(0);
    const verbs = await client.getVerbs("111-0-01-00-1");
    expect(verbs).toContain("chop");
  });
});

describe("withRetry", () => {
  it("retries network failures and then succeeds", async () => {
    let calls = 0;
    const result = await withRetry(
      async () => {
        calls += 1;
        if (calls < 3) throw new NetworkError("down");
        return "ok";
      },
      2,
      1,
    );
    expect(result).toBe("ok");
    expect(calls).toBe(3);
  });

  it("does not retry server-side rejections", async () => {
    let calls = 0;
    await expect(
      withRetry(
        async () => {
          calls += 1;
          throw new ApiError(400, "InvalidCode", "bad");
        },
        3,
        1,
      ),
    ).rejects.toBeInstanceOf(ApiError);
    expect(calls).toBe(1);
  });
});
