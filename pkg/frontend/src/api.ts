/** Typed client for the review-session HTTP API. */

import type { ApiErrorBody, NodeJson, SessionView } from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: unknown = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceError(0, "Unreachable", `service unreachable: ${String(err)}`);
    }
    const text = await resp.text();
    let payload: unknown = null;
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = null;
      }
    }
    if (!resp.ok) {
      const err = (payload ?? {}) as Partial<ApiErrorBody>;
      throw new ServiceError(
        resp.status,
        err.code ?? `HTTP${resp.status}`,
        err.message ?? `request failed with HTTP ${resp.status}`,
        err.details ?? null,
      );
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  createSession(nl: string): Promise<SessionView> {
    return this.request("POST", "/sessions", { nl });
  }

  getSession(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  /** Same-kind operator replacement at a tree path. */
  editOperator(id: string, path: string[], op: string): Promise<SessionView> {
    return this.request("PATCH", `/sessions/${id}/tree`, { path, op });
  }

  replaceSubtree(id: string, path: string[], subtree: NodeJson): Promise<SessionView> {
    return this.request("PATCH", `/sessions/${id}/tree`, { path, subtree });
  }

  regenerate(id: string, feedback: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${id}/regenerate`, { feedback });
  }

  approve(id: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${id}/approve`);
  }
}
