/** Session store: the single source of truth for rendering.
 *
 * State is always the last server snapshot plus purely local UI bits
 * (selection, pending flag, error banners); no tree mutation ever happens
 * client-side.
 */

import { ServiceError } from "./api.js";
import type { SessionView } from "./types.js";

export interface InlineError {
  path: string[] | null;
  code: string;
  message: string;
}

export interface UiState {
  view: SessionView | null;
  previousLtl: string | null;
  selection: string[] | null;
  pending: boolean;
  error: InlineError | null;
}

type Listener = (state: UiState) => void;

export class SessionStore {
  private state: UiState = {
    view: null,
    previousLtl: null,
    selection: null,
    pending: false,
    error: null,
  };
  private listeners: Listener[] = [];

  get current(): UiState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(partial: Partial<UiState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Replace the whole view with a fresh server snapshot. */
  applySnapshot(view: SessionView): void {
    const previousLtl = this.state.view?.ltl ?? null;
    const selection =
      this.state.view?.id === view.id ? this.state.selection : null;
    this.update({ view, previousLtl, selection, pending: false, error: null });
  }

  select(path: string[] | null): void {
    this.update({ selection: path, error: null });
  }

  beginAction(): void {
    this.update({ pending: true, error: null });
  }

  fail(err: unknown, path: string[] | null = null): void {
    const inline: InlineError =
      err instanceof ServiceError
        ? { path, code: err.code, message: err.message }
        : { path, code: "Unexpected", message: String(err) };
    this.update({ pending: false, error: inline });
  }
}
