/** DOM wiring: renders everything from the store and routes every action
 * through the HTTP API.  The client never computes a formula itself. */

import { ReviewApi } from "./api.js";
import { diffFormula } from "./diff.js";
import { renderDiagram } from "./mermaid.js";
import { SessionStore, UiState } from "./state.js";
import { diagramId, nodeAt, sameKindOptions, treeRows } from "./tree.js";

export class App {
  private diagramToken = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApi,
    private readonly store: SessionStore,
  ) {}

  mount(): void {
    this.store.subscribe((state) => this.render(state));
    this.render(this.store.current);
  }

  // --- actions --------------------------------------------------------------

  async createSession(nl: string): Promise<void> {
    if (!nl.trim()) return;
    this.store.beginAction();
    try {
      this.store.applySnapshot(await this.api.createSession(nl));
    } catch (err) {
      this.store.fail(err);
    }
  }

  async refresh(): Promise<void> {
    const view = this.store.current.view;
    if (!view) return;
    try {
      this.store.applySnapshot(await this.api.getSession(view.id));
    } catch (err) {
      this.store.fail(err);
    }
  }

  async applyOperator(op: string): Promise<void> {
    const { view, selection } = this.store.current;
    if (!view || !selection) return;
    this.store.beginAction();
    try {
      const snap = await this.api.editOperator(view.id, selection, op);
      this.store.applySnapshot(snap);
      this.store.select(selection);
    } catch (err) {
      this.store.fail(err, selection);
    }
  }

  async submitFeedback(text: string): Promise<void> {
    const view = this.store.current.view;
    if (!view || !text.trim()) return;
    this.store.beginAction();
    try {
      this.store.applySnapshot(await this.api.regenerate(view.id, text));
    } catch (err) {
      this.store.fail(err);
    }
  }

  async approve(): Promise<void> {
    const view = this.store.current.view;
    if (!view) return;
    this.store.beginAction();
    try {
      this.store.applySnapshot(await this.api.approve(view.id));
    } catch (err) {
      this.store.fail(err);
    }
  }

  // --- rendering --------------------------------------------------------------

  private render(state: UiState): void {
    this.root.replaceChildren();
    this.root.appendChild(this.header(state));
    if (!state.view) {
      this.root.appendChild(this.createForm(state));
      if (state.error) this.root.appendChild(this.banner(state.error.message));
      return;
    }
    const grid = el("div", "grid");
    grid.appendChild(this.treePanel(state));
    grid.appendChild(this.reviewPanel(state));
    this.root.appendChild(grid);
  }

  private header(state: UiState): HTMLElement {
    const header = el("header");
    header.appendChild(el("h1", "", "requirement review"));
    if (state.view) {
      const badge = el("span", `badge ${state.view.status.toLowerCase()}`, state.view.status);
      badge.dataset.testid = "status-badge";
      header.appendChild(badge);
      header.appendChild(el("p", "requirement", state.view.requirement));
    }
    return header;
  }

  private createForm(state: UiState): HTMLElement {
    const form = el("div", "create");
    const input = el("textarea") as HTMLTextAreaElement;
    input.placeholder = "Paste a requirement sentence...";
    const button = el("button", "", "Decompose") as HTMLButtonElement;
    button.disabled = state.pending;
    button.onclick = () => void this.createSession(input.value);
    form.append(input, button);
    return form;
  }

  private treePanel(state: UiState): HTMLElement {
    const view = state.view!;
    const panel = el("section", "panel");
    panel.appendChild(el("h2", "", "structure"));

    const diagram = el("div", "diagram");
    diagram.id = "diagram";
    panel.appendChild(diagram);
    this.paintDiagram(diagram, view.mermaid);

    const outline = el("ul", "outline");
    for (const row of treeRows(view.tree)) {
      const item = el("li", "node-row", row.label) as HTMLLIElement;
      item.style.paddingLeft = `${row.depth * 14 + 6}px`;
      item.dataset.path = row.path.join("/");
      if (state.selection && row.path.join("/") === state.selection.join("/")) {
        item.classList.add("selected");
        const err = state.error;
        if (err && err.path && err.path.join("/") === row.path.join("/")) {
          item.appendChild(el("span", "inline-error", ` ${err.code}: ${err.message}`));
        }
      }
      item.onclick = () => this.store.select(row.path);
      outline.appendChild(item);
    }
    panel.appendChild(outline);
    return panel;
  }

  private paintDiagram(container: HTMLElement, code: string): void {
    const token = ++this.diagramToken;
    container.textContent = "rendering diagram...";
    void renderDiagram(code).then(({ svg, fallback }) => {
      if (token !== this.diagramToken) return; // a newer snapshot took over
      container.replaceChildren();
      if (fallback || !svg) {
        container.appendChild(
          el("div", "banner", "diagram renderer unavailable; showing raw Mermaid"),
        );
        const pre = el("pre", "mermaid-raw");
        pre.textContent = code;
        container.appendChild(pre);
        return;
      }
      container.innerHTML = svg;
      this.wireDiagramClicks(container);
    });
  }

  /** Diagram nodes carry path-derived ids; clicks select the matching path. */
  private wireDiagramClicks(container: HTMLElement): void {
    const view = this.store.current.view;
    if (!view) return;
    for (const row of treeRows(view.tree)) {
      const id = diagramId(row.path);
      for (const element of container.querySelectorAll<SVGElement>(`[id*="${id}"]`)) {
        element.style.cursor = "pointer";
        element.addEventListener("click", () => this.store.select(row.path));
      }
    }
  }

  private reviewPanel(state: UiState): HTMLElement {
    const view = state.view!;
    const frozen = view.status === "Approved";
    const panel = el("section", "panel");

    panel.appendChild(el("h2", "", "formula"));
    const formula = el("div", "formula");
    formula.dataset.testid = "ltl";
    if (view.ltl === null) {
      formula.appendChild(el("em", "", "blocked by validation errors"));
    } else {
      for (const seg of diffFormula(state.previousLtl, view.ltl)) {
        formula.appendChild(el("span", seg.changed ? "tok changed" : "tok", seg.text));
      }
    }
    panel.appendChild(formula);

    if (view.diagnostics.length > 0) {
      panel.appendChild(el("h2", "", "diagnostics"));
      const list = el("ul", "diagnostics");
      for (const d of view.diagnostics) {
        const item = el("li", d.severity, `[${d.kind}] ${d.message}`);
        if (d.suggestedFix) item.appendChild(el("div", "fix", `fix: ${d.suggestedFix}`));
        list.appendChild(item);
      }
      panel.appendChild(list);
    }

    panel.appendChild(this.editor(state, frozen));

    panel.appendChild(el("h2", "", "feedback"));
    const feedback = el("textarea") as HTMLTextAreaElement;
    feedback.placeholder = "Describe what the structure got wrong...";
    feedback.disabled = frozen || state.pending;
    const regen = el("button", "", "Regenerate") as HTMLButtonElement;
    regen.disabled = frozen || state.pending;
    regen.onclick = () => void this.submitFeedback(feedback.value);
    panel.append(feedback, regen);

    const approve = el("button", "approve", "Approve") as HTMLButtonElement;
    approve.dataset.testid = "approve";
    approve.disabled = frozen || state.pending || view.ltl === null;
    approve.onclick = () => void this.approve();
    panel.appendChild(approve);

    if (state.error && !state.error.path) {
      panel.appendChild(this.banner(`${state.error.code}: ${state.error.message}`));
    }

    panel.appendChild(el("h2", "", "history"));
    const history = el("ol", "history");
    for (const entry of view.history) {
      history.appendChild(el("li", "", `${entry.action} at ${entry.timestamp}`));
    }
    panel.appendChild(history);
    return panel;
  }

  private editor(state: UiState, frozen: boolean): HTMLElement {
    const wrap = el("div", "editor");
    wrap.appendChild(el("h2", "", "operator"));
    const view = state.view!;
    const node = state.selection ? nodeAt(view.tree, state.selection) : null;
    if (!node) {
      wrap.appendChild(el("p", "hint", "select a node to edit its operator"));
      return wrap;
    }
    const options = sameKindOptions(node);
    if (options.length === 0) {
      wrap.appendChild(el("p", "hint", "leaves and mode conditions are edited via feedback"));
      return wrap;
    }
    const select = el("select") as HTMLSelectElement;
    for (const op of options) {
      const opt = el("option", "", op) as HTMLOptionElement;
      opt.value = op;
      opt.selected = "op" in node && node.op === op;
      select.appendChild(opt);
    }
    select.disabled = frozen || state.pending;
    const apply = el("button", "", "Apply") as HTMLButtonElement;
    apply.dataset.testid = "apply-op";
    apply.disabled = frozen || state.pending;
    apply.onclick = () => void this.applyOperator(select.value);
    wrap.append(select, apply);
    return wrap;
  }

  private banner(message: string): HTMLElement {
    return el("div", "banner error", message);
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
