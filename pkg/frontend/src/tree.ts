/** Tree walking: outline rows, node labels, path-derived diagram ids, and
 * the same-kind operator sets used by the editor. */

import type { AtomicJson, NodeJson } from "./types.js";

export const SCOPE_OPS = ["Globally", "Eventually", "Next", "Not"] as const;
export const RELATION_OPS = [
  "And",
  "Or",
  "Implies",
  "SustainedUntil",
  "BasicPrecedence",
] as const;

export interface TreeRow {
  path: string[];
  kind: NodeJson["type"];
  label: string;
  op: string | null;
  depth: number;
}

export function renderAtomic(ap: AtomicJson | null): string {
  if (!ap) return "?";
  const base = ap.com ? `${ap.com}.${ap.var}` : ap.var;
  return ap.rel ? `${base} ${ap.rel} ${ap.formula ?? "?"}` : base;
}

export function nodeLabel(node: NodeJson): string {
  switch (node.type) {
    case "scope":
      return node.op;
    case "relation":
      return node.op;
    case "mode":
      return `Mode: ${renderAtomic(node.condition)}`;
    case "atomic":
      return renderAtomic(node);
  }
}

/** Pre-order walk matching the service's path steps. */
export function treeRows(root: NodeJson | null): TreeRow[] {
  const rows: TreeRow[] = [];
  const visit = (node: NodeJson | null, path: string[]) => {
    if (!node) return;
    rows.push({
      path,
      kind: node.type,
      label: nodeLabel(node),
      op: node.type === "scope" || node.type === "relation" ? node.op : null,
      depth: path.length,
    });
    if (node.type === "scope") visit(node.child, [...path, "child"]);
    else if (node.type === "mode") visit(node.consequent, [...path, "consequent"]);
    else if (node.type === "relation") {
      visit(node.left, [...path, "left"]);
      visit(node.right, [...path, "right"]);
    }
  };
  visit(root, []);
  return rows;
}

export function nodeAt(root: NodeJson | null, path: string[]): NodeJson | null {
  let current: NodeJson | null = root;
  for (const step of path) {
    if (!current) return null;
    if (current.type === "scope" && step === "child") current = current.child;
    else if (current.type === "mode" && step === "consequent") current = current.consequent;
    else if (current.type === "relation" && step === "left") current = current.left;
    else if (current.type === "relation" && step === "right") current = current.right;
    else return null;
  }
  return current;
}

/** Operators that may replace the node's own without changing its kind. */
export function sameKindOptions(node: NodeJson): readonly string[] {
  if (node.type === "scope") return SCOPE_OPS;
  if (node.type === "relation") return RELATION_OPS;
  return [];
}

// --- diagram ids -----------------------------------------------------------
// The service derives Mermaid node ids as "n" + sha1(path string)[:8]; the
// client recomputes them to map diagram clicks back to tree paths.

export function diagramId(path: string[]): string {
  return "n" + sha1Hex(path.join("/")).slice(0, 8);
}

function sha1Hex(message: string): string {
  const bytes: number[] = [];
  for (const ch of message) {
    const code = ch.codePointAt(0)!;
    if (code < 0x80) bytes.push(code);
    else if (code < 0x800) {
      bytes.push(0xc0 | (code >> 6), 0x80 | (code & 0x3f));
    } else if (code < 0x10000) {
      bytes.push(0xe0 | (code >> 12), 0x80 | ((code >> 6) & 0x3f), 0x80 | (code & 0x3f));
    } else {
      bytes.push(
        0xf0 | (code >> 18),
        0x80 | ((code >> 12) & 0x3f),
        0x80 | ((code >> 6) & 0x3f),
        0x80 | (code & 0x3f),
      );
    }
  }
  const ml = bytes.length * 8;
  bytes.push(0x80);
  while (bytes.length % 64 !== 56) bytes.push(0);
  for (let shift = 56; shift >= 0; shift -= 8) bytes.push((ml / 2 ** shift) & 0xff);

  let h0 = 0x67452301, h1 = 0xefcdab89, h2 = 0x98badcfe, h3 = 0x10325476, h4 = 0xc3d2e1f0;
  const w = new Array<number>(80);
  const rol = (x: number, n: number) => ((x << n) | (x >>> (32 - n))) >>> 0;

  for (let block = 0; block < bytes.length; block += 64) {
    for (let i = 0; i < 16; i++) {
      w[i] =
        ((bytes[block + 4 * i]! << 24) |
          (bytes[block + 4 * i + 1]! << 16) |
          (bytes[block + 4 * i + 2]! << 8) |
          bytes[block + 4 * i + 3]!) >>>
        0;
    }
    for (let i = 16; i < 80; i++) {
      w[i] = rol(w[i - 3]! ^ w[i - 8]! ^ w[i - 14]! ^ w[i - 16]!, 1);
    }
    let [a, b, c, d, e] = [h0, h1, h2, h3, h4];
    for (let i = 0; i < 80; i++) {
      let f: number, k: number;
      if (i < 20) [f, k] = [(b & c) | (~b & d), 0x5a827999];
      else if (i < 40) [f, k] = [b ^ c ^ d, 0x6ed9eba1];
      else if (i < 60) [f, k] = [(b & c) | (b & d) | (c & d), 0x8f1bbcdc];
      else [f, k] = [b ^ c ^ d, 0xca62c1d6];
      const temp = (rol(a, 5) + f + e + k + w[i]!) >>> 0;
      [e, d, c, b, a] = [d, c, rol(b, 30), a, temp];
    }
    h0 = (h0 + a) >>> 0;
    h1 = (h1 + b) >>> 0;
    h2 = (h2 + c) >>> 0;
    h3 = (h3 + d) >>> 0;
    h4 = (h4 + e) >>> 0;
  }
  return [h0, h1, h2, h3, h4].map((x) => x.toString(16).padStart(8, "0")).join("");
}
