/** The repair walkthrough: load the stubbed waypoint-command session,
 * replace the first conjunct's Eventually with Next, watch the displayed
 * formula flip to the corrected one, approve, and verify the freeze. */

import { describe, expect, it } from "vitest";

import { ReviewApi, ServiceError } from "../src/api.js";
import { SessionStore } from "../src/state.js";
import {
  FIRST_CONJUNCT_SCOPE,
  LTL04_CORRECTED,
  LTL04_INITIAL,
  REQ04,
  fakeService,
} from "./fakeServer.js";

function harness() {
  const { fetch } = fakeService();
  const api = new ReviewApi("", fetch);
  const store = new SessionStore();
  return { api, store };
}

describe("waypoint-command repair walkthrough", () => {
  it("flips F to X, shows the corrected formula, and freezes on approval", async () => {
    const { api, store } = harness();

    store.applySnapshot(await api.createSession(REQ04));
    expect(store.current.view?.ltl).toBe(LTL04_INITIAL);
    expect(store.current.view?.diagnostics).toEqual([]);

    store.select(FIRST_CONJUNCT_SCOPE);
    store.applySnapshot(
      await api.editOperator(store.current.view!.id, FIRST_CONJUNCT_SCOPE, "Next"),
    );
    expect(store.current.view?.ltl).toBe(LTL04_CORRECTED);
    expect(store.current.view?.history.map((h) => h.action)).toEqual([
      "Generated",
      "Edited",
    ]);

    store.applySnapshot(await api.approve(store.current.view!.id));
    expect(store.current.view?.status).toBe("Approved");
    expect(store.current.view?.ltl).toBe(LTL04_CORRECTED);
    expect(store.current.view?.history.at(-1)?.action).toBe("Approved");
  });

  it("rejects edits after approval and keeps the snapshot intact", async () => {
    const { api, store } = harness();
    store.applySnapshot(await api.createSession(REQ04));
    const id = store.current.view!.id;
    store.applySnapshot(await api.editOperator(id, FIRST_CONJUNCT_SCOPE, "Next"));
    store.applySnapshot(await api.approve(id));

    try {
      store.applySnapshot(await api.editOperator(id, FIRST_CONJUNCT_SCOPE, "Eventually"));
      expect.unreachable("expected a 409");
    } catch (err) {
      store.fail(err, FIRST_CONJUNCT_SCOPE);
    }
    expect(store.current.error?.code).toBe("SessionApproved");
    expect(store.current.view?.status).toBe("Approved");
    expect(store.current.view?.ltl).toBe(LTL04_CORRECTED);
  });

  it("never shows a formula the server did not send", async () => {
    const { api, store } = harness();
    const snapshots = [
      await api.createSession(REQ04),
    ];
    store.applySnapshot(snapshots[0]!);
    snapshots.push(await api.editOperator(snapshots[0]!.id, FIRST_CONJUNCT_SCOPE, "Next"));
    store.applySnapshot(snapshots[1]!);
    // displayed ltl is by construction the last snapshot's field
    expect(store.current.view?.ltl).toBe(snapshots.at(-1)!.ltl);
  });

  it("surfaces kind mismatches inline at the edited node", async () => {
    const { api, store } = harness();
    store.applySnapshot(await api.createSession(REQ04));
    store.select(FIRST_CONJUNCT_SCOPE);
    try {
      await api.editOperator(store.current.view!.id, FIRST_CONJUNCT_SCOPE, "And");
      expect.unreachable("expected a 422");
    } catch (err) {
      expect(err).toBeInstanceOf(ServiceError);
      store.fail(err, FIRST_CONJUNCT_SCOPE);
    }
    expect(store.current.error).toMatchObject({
      code: "KindMismatch",
      path: FIRST_CONJUNCT_SCOPE,
    });
    expect(store.current.view?.ltl).toBe(LTL04_INITIAL);
  });
});
