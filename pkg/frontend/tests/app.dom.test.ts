// @vitest-environment happy-dom
/** DOM-level walkthrough: the rendered page itself shows the corrected
 * formula after the operator edit, and approval disables the controls. */

import { beforeEach, describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { App } from "../src/app.js";
import { SessionStore } from "../src/state.js";
import {
  FIRST_CONJUNCT_SCOPE,
  LTL04_CORRECTED,
  LTL04_INITIAL,
  REQ04,
  fakeService,
} from "./fakeServer.js";

function displayedTokens(root: HTMLElement): string[] {
  const node = root.querySelector<HTMLElement>('[data-testid="ltl"]');
  if (!node) return [];
  return Array.from(node.querySelectorAll(".tok")).map((t) => t.textContent ?? "");
}

function tokensOf(formula: string): string[] {
  return formula.match(/\(|\)|[^\s()]+/g) ?? [];
}

async function waitFor(check: () => boolean, timeoutMs = 2000): Promise<void> {
  const start = Date.now();
  while (!check()) {
    if (Date.now() - start > timeoutMs) throw new Error("condition never became true");
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

describe("App (DOM)", () => {
  let root: HTMLElement;
  let app: App;
  let store: SessionStore;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
    store = new SessionStore();
    app = new App(root, new ReviewApi("", fakeService().fetch), store);
    app.mount();
  });

  it("walks the repair end to end on the rendered page", async () => {
    await app.createSession(REQ04);
    expect(displayedTokens(root)).toEqual(tokensOf(LTL04_INITIAL));
    expect(root.querySelector('[data-testid="status-badge"]')?.textContent).toBe("Draft");

    // select the first conjunct's scope in the outline and flip it to Next
    const row = Array.from(root.querySelectorAll<HTMLElement>(".node-row")).find(
      (r) => r.dataset.path === FIRST_CONJUNCT_SCOPE.join("/"),
    );
    expect(row?.textContent).toBe("Eventually");
    row!.click();
    await app.applyOperator("Next");

    expect(displayedTokens(root)).toEqual(tokensOf(LTL04_CORRECTED));
    const changed = Array.from(root.querySelectorAll(".tok.changed")).map(
      (t) => t.textContent,
    );
    expect(changed).toEqual(["X"]);

    await app.approve();
    expect(root.querySelector('[data-testid="status-badge"]')?.textContent).toBe("Approved");
    const approveButton = root.querySelector<HTMLButtonElement>('[data-testid="approve"]');
    expect(approveButton?.disabled).toBe(true);
    // history shows every action taken
    const history = Array.from(root.querySelectorAll(".history li")).map(
      (li) => li.textContent?.split(" at ")[0],
    );
    expect(history).toEqual(["Generated", "Edited", "Approved"]);
  });

  it("renders the raw-mermaid fallback when the diagram library is absent", async () => {
    await app.createSession(REQ04);
    await waitFor(() => root.querySelector(".diagram .banner") !== null);
    expect(root.querySelector(".diagram .banner")?.textContent).toContain(
      "showing raw Mermaid",
    );
    expect(root.querySelector(".mermaid-raw")?.textContent).toContain("graph TD");
  });

  it("shows kind-mismatch errors inline at the selected node", async () => {
    await app.createSession(REQ04);
    store.select(FIRST_CONJUNCT_SCOPE);
    await app.applyOperator("And" as never);
    const inline = root.querySelector(".node-row.selected .inline-error");
    expect(inline?.textContent).toContain("KindMismatch");
    expect(displayedTokens(root)).toEqual(tokensOf(LTL04_INITIAL));
  });
});
