/** Fetch-compatible fake of the review service, faithful to its wire
 * semantics; snapshots are frozen captures from the real backend. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";
import type { SessionView } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function loadFixture(name: string): SessionView {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf8")) as SessionView;
}

const SCOPE_OPS = new Set(["Globally", "Eventually", "Next", "Not"]);

function response(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** Stateful fake: one session following the created -> patched -> approved
 * fixtures, with the service's 404/409/422 behaviour. */
export function fakeService(): { fetch: FetchLike; state: () => SessionView | null } {
  const created = loadFixture("req04_created");
  const patched = loadFixture("req04_patched");
  const approved = loadFixture("req04_approved");
  let current: SessionView | null = null;

  const fetchFn: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://fake");
    const body = init?.body ? JSON.parse(String(init.body)) : null;

    if (url.pathname === "/healthz") return response(200, { status: "ok" });

    if (url.pathname === "/sessions" && method === "POST") {
      if (!body?.nl?.trim()) {
        return response(422, { code: "EmptyRequirement", message: "nl must be non-empty", details: null });
      }
      current = created;
      return response(201, current);
    }

    const match = url.pathname.match(/^\/sessions\/([^/]+)(\/(tree|regenerate|approve))?$/);
    if (!match) return response(404, { code: "NotFound", message: "no route", details: null });
    const [, id, , action] = match;
    if (!current || id !== current.id) {
      return response(404, { code: "UnknownSession", message: `no session '${id}'`, details: null });
    }

    if (!action && method === "GET") return response(200, current);

    if (current.status === "Approved") {
      return response(409, { code: "SessionApproved", message: "approved sessions are immutable", details: null });
    }

    if (action === "tree" && method === "PATCH") {
      if (body.op && !SCOPE_OPS.has(body.op)) {
        return response(422, {
          code: "KindMismatch",
          message: "a relation operator can only replace a relation node's operator",
          details: { path: body.path },
        });
      }
      if (JSON.stringify(body.path) !== JSON.stringify(["child", "consequent", "left"])) {
        return response(422, { code: "PathError", message: "step does not resolve", details: { path: body.path } });
      }
      current = patched;
      return response(200, current);
    }
    if (action === "regenerate" && method === "POST") {
      current = { ...created, history: [...created.history, { action: "Regenerated", timestamp: "t" }] };
      return response(200, current);
    }
    if (action === "approve" && method === "POST") {
      current = approved;
      return response(200, current);
    }
    return response(404, { code: "NotFound", message: "no route", details: null });
  };

  return { fetch: fetchFn, state: () => current };
}

export const REQ04 =
  "The control system should as soon as possible initiate the heading adjustment " +
  "function upon receiving a verified ARINC 429 waypoint command, ultimately " +
  "reducing the deviation angle to less than 2 degrees.";

export const LTL04_INITIAL =
  "G (WaypointCmd = True -> (F HeadingFun = True & F DevAngleLow < 2))";
export const LTL04_CORRECTED =
  "G (WaypointCmd = True -> (X HeadingFun = True & F DevAngleLow < 2))";
export const FIRST_CONJUNCT_SCOPE = ["child", "consequent", "left"];
