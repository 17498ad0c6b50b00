import { describe, expect, it } from "vitest";

import { ServiceError } from "../src/api.js";
import { SessionStore } from "../src/state.js";
import { loadFixture } from "./fakeServer.js";

const created = loadFixture("req04_created");
const patched = loadFixture("req04_patched");

describe("SessionStore", () => {
  it("derives everything from the applied snapshot", () => {
    const store = new SessionStore();
    store.applySnapshot(created);
    expect(store.current.view).toEqual(created);
    expect(store.current.pending).toBe(false);
    expect(store.current.error).toBeNull();
  });

  it("keeps the previous formula for diffing", () => {
    const store = new SessionStore();
    store.applySnapshot(created);
    store.applySnapshot(patched);
    expect(store.current.previousLtl).toBe(created.ltl);
    expect(store.current.view?.ltl).toBe(patched.ltl);
  });

  it("selection survives same-session snapshots and resets across sessions", () => {
    const store = new SessionStore();
    store.applySnapshot(created);
    store.select(["child"]);
    store.applySnapshot(patched); // same session id
    expect(store.current.selection).toEqual(["child"]);
    store.applySnapshot({ ...created, id: "other" });
    expect(store.current.selection).toBeNull();
  });

  it("failures surface inline with the affected path", () => {
    const store = new SessionStore();
    store.applySnapshot(created);
    store.beginAction();
    expect(store.current.pending).toBe(true);
    store.fail(new ServiceError(422, "KindMismatch", "wrong kind"), ["child"]);
    expect(store.current.pending).toBe(false);
    expect(store.current.error).toEqual({
      path: ["child"],
      code: "KindMismatch",
      message: "wrong kind",
    });
    // the snapshot itself is untouched
    expect(store.current.view).toEqual(created);
  });

  it("notifies subscribers on every update", () => {
    const store = new SessionStore();
    let calls = 0;
    const unsubscribe = store.subscribe(() => calls++);
    store.applySnapshot(created);
    store.select([]);
    unsubscribe();
    store.select(null);
    expect(calls).toBe(2);
  });
});
