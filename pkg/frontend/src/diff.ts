/** Token-level diff of two formula strings, for highlighting what an edit
 * changed (e.g. the F -> X flip). */

export interface DiffSegment {
  text: string;
  changed: boolean;
}

function tokenize(formula: string): string[] {
  return formula.match(/\(|\)|[^\s()]+/g) ?? [];
}

/** Segments of ``next`` with tokens absent from the LCS against ``prev``
 * marked as changed. */
export function diffFormula(prev: string | null, next: string): DiffSegment[] {
  const a = tokenize(prev ?? "");
  const b = tokenize(next);
  const lcs: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i]![j] =
        a[i] === b[j]
          ? lcs[i + 1]![j + 1]! + 1
          : Math.max(lcs[i + 1]![j]!, lcs[i]![j + 1]!);
    }
  }
  const kept = new Set<number>();
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      kept.add(j);
      i++;
      j++;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) i++;
    else j++;
  }
  return b.map((text, index) => ({ text, changed: !kept.has(index) }));
}
