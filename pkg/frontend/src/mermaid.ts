/** Mermaid rendering with a raw-text fallback.
 *
 * The library is loaded lazily from the CDN; when it cannot load or the
 * document fails to render, callers fall back to showing the Mermaid text
 * itself behind a banner.
 */

type MermaidModule = {
  initialize(config: object): void;
  render(id: string, code: string): Promise<{ svg: string }>;
};

const MERMAID_CDN = "https://cdn.jsdelivr.net/npm/mermaid@10/dist/mermaid.esm.min.mjs";

let cached: MermaidModule | null | undefined;

async function loadMermaid(): Promise<MermaidModule | null> {
  if (cached !== undefined) return cached;
  try {
    const mod = await import(/* @vite-ignore */ MERMAID_CDN);
    cached = (mod as { default: MermaidModule }).default;
    cached.initialize({ startOnLoad: false, securityLevel: "loose", theme: "neutral" });
  } catch {
    cached = null;
  }
  return cached;
}

export interface RenderResult {
  svg: string | null;
  fallback: boolean;
}

let renderCounter = 0;

export async function renderDiagram(code: string): Promise<RenderResult> {
  const mermaid = await loadMermaid();
  if (!mermaid) return { svg: null, fallback: true };
  try {
    const { svg } = await mermaid.render(`review-diagram-${renderCounter++}`, code);
    return { svg, fallback: false };
  } catch {
    return { svg: null, fallback: true };
  }
}
