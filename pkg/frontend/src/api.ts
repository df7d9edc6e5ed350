/**
 * REST client for the annotation service. Server rejections become typed
 * ApiError values carrying the server's message; transport failures become
 * NetworkError so the UI can offer a retry without losing any state.
 */

import type { AnnotationBody, ManifestClip, TreeNode } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`request failed: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

async function errorFrom(res: Response): Promise<ApiError> {
  let code = "ServerError";
  let detail = `${res.status} ${res.statusText}`;
  try {
    const body = (await res.json()) as { error?: string; detail?: string };
    if (body.error) code = body.error;
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(res.status, code, detail);
}

/** Retry an idempotent request a few times with linear backoff. */
export async function withRetry<T>(
  fn: () => Promise<T>,
  retries = 2,
  delayMs = 250,
): Promise<T> {
  let lastError: unknown;
  for (let attempt = 0; attempt <= retries; attempt++) {
    try {
      return await fn();
    } catch (err) {
      if (!(err instanceof NetworkError)) throw err;
      lastError = err;
      if (attempt < retries) {
        await new Promise((resolve) => setTimeout(resolve, delayMs * (attempt + 1)));
      }
    }
  }
  throw lastError;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: typeof fetch;

  constructor(baseUrl = "", fetchImpl: typeof fetch = fetch) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.base}${path}`, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!res.ok) {
      throw await errorFrom(res);
    }
    return res;
  }

  async getTaxonomy(): Promise<TreeNode> {
    const res = await this.request("/api/taxonomy");
    return (await res.json()) as TreeNode;
  }

  async getManifest(): Promise<ManifestClip[]> {
    const res = await this.request("/api/manifest");
    const body = (await res.json()) as { clips: ManifestClip[] };
    return body.clips;
  }

  async getVerbs(code: string): Promise<string[]> {
    const res = await this.request(`/api/verbs?code=${encodeURIComponent(code)}`);
    const body = (await res.json()) as { verbs: string[] };
    return body.verbs;
  }

  async postAnnotation(body: AnnotationBody, overwrite = false): Promise<AnnotationBody> {
    const query = overwrite ? "?overwrite=true" : "";
    const res = await this.request(`/api/annotations${query}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await res.json()) as AnnotationBody;
  }

  exportUrl(): string {
    return `${this.base}/api/annotations?format=jsonl`;
  }
}
