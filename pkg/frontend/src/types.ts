/** Wire types mirroring the review-service snapshots. */

export interface AtomicJson {
  type: "atomic";
  var: string;
  rel?: string;
  formula?: string;
  com?: string;
  text?: string;
}

export interface ScopeJson {
  type: "scope";
  op: string;
  child: NodeJson | null;
}

export interface ModeJson {
  type: "mode";
  condition: AtomicJson | null;
  consequent: NodeJson | null;
}

export interface RelationJson {
  type: "relation";
  op: string;
  left: NodeJson | null;
  right: NodeJson | null;
}

export type NodeJson = AtomicJson | ScopeJson | ModeJson | RelationJson;

export interface Diagnostic {
  severity: "error" | "warning";
  kind: string;
  path: string[];
  message: string;
  suggestedFix: string | null;
}

export interface HistoryEntry {
  action: "Generated" | "Edited" | "Regenerated" | "Approved";
  timestamp: string;
}

/** One server snapshot; the client never derives view state from anywhere else. */
export interface SessionView {
  id: string;
  requirement: string;
  tree: NodeJson | null;
  diagnostics: Diagnostic[];
  mermaid: string;
  ltl: string | null;
  status: "Draft" | "Approved";
  history: HistoryEntry[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: unknown;
}
