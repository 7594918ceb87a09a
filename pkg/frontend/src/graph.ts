/** Dependency graph rendering: layered layout and SVG markup. */

import { NodeView, chainEdgeKeys, nodeViews, SessionState } from "./state.js";
import { GraphEdge } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

const COLUMN_WIDTH = 190;
const ROW_HEIGHT = 74;
const MARGIN = 40;
const NODE_WIDTH = 150;
const NODE_HEIGHT = 40;

/** Providers sit in column 0; a dependent is one column right of its deepest provider. */
export function layout(nodes: { id: string }[], edges: GraphEdge[]): Map<string, Point> {
  const providers = new Map<string, string[]>();
  for (const n of nodes) {
    providers.set(n.id, []);
  }
  for (const e of edges) {
    if (e.kind !== "redundancy" && providers.has(e.source)) {
      providers.get(e.source)!.push(e.target);
    }
  }
  const rank = new Map<string, number>();
  const visiting = new Set<string>();
  const rankOf = (id: string): number => {
    const known = rank.get(id);
    if (known !== undefined) {
      return known;
    }
    if (visiting.has(id)) {
      return 0; // cycles are rejected server-side; stay safe anyway
    }
    visiting.add(id);
    const deps = providers.get(id) ?? [];
    const r = deps.length ? Math.max(...deps.map(rankOf)) + 1 : 0;
    visiting.delete(id);
    rank.set(id, r);
    return r;
  };
  const columns = new Map<number, string[]>();
  for (const n of nodes) {
    const r = rankOf(n.id);
    const column = columns.get(r) ?? [];
    column.push(n.id);
    columns.set(r, column);
  }
  const points = new Map<string, Point>();
  for (const [r, ids] of columns) {
    ids.forEach((id, i) => {
      points.set(id, {
        x: MARGIN + r * COLUMN_WIDTH,
        y: MARGIN + i * ROW_HEIGHT,
      });
    });
  }
  return points;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function center(p: Point): Point {
  return { x: p.x + NODE_WIDTH / 2, y: p.y + NODE_HEIGHT / 2 };
}

/** Full SVG for the current session state. */
export function renderGraphSvg(state: SessionState): string {
  if (!state.graph) {
    return '<svg class="graph" data-empty="true"></svg>';
  }
  const views = nodeViews(state);
  const points = layout(state.graph.nodes, state.graph.edges);
  const chains = chainEdgeKeys(state);

  const maxX = Math.max(...[...points.values()].map((p) => p.x), 0) + NODE_WIDTH + MARGIN;
  const maxY = Math.max(...[...points.values()].map((p) => p.y), 0) + NODE_HEIGHT + MARGIN;

  const parts: string[] = [];
  parts.push(`<svg class="graph" viewBox="0 0 ${maxX} ${maxY}" xmlns="http://www.w3.org/2000/svg">`);

  for (const edge of state.graph.edges) {
    const a = points.get(edge.source);
    const b = points.get(edge.target);
    if (!a || !b) {
      continue;
    }
    const ca = center(a);
    const cb = center(b);
    // dependency arrows point from the provider to the dependent it affects
    const onChain = chains.has(`${edge.target}->${edge.source}`) || chains.has(`${edge.source}->${edge.target}`);
    const classes = `edge edge-${edge.kind}${onChain ? " chain" : ""}`;
    parts.push(
      `<line class="${classes}" x1="${cb.x}" y1="${cb.y}" x2="${ca.x}" y2="${ca.y}" ` +
        `data-source="${escapeXml(edge.source)}" data-target="${escapeXml(edge.target)}" data-kind="${edge.kind}"/>`,
    );
  }

  for (const view of views) {
    const p = points.get(view.id);
    if (!p) {
      continue;
    }
    parts.push(renderNode(view, p));
  }
  parts.push("</svg>");
  return parts.join("\n");
}

function renderNode(view: NodeView, p: Point): string {
  const badge = view.causeRisks.length
    ? `<text class="cause-badge" x="${p.x + NODE_WIDTH / 2}" y="${p.y - 6}">&#9888; ${escapeXml(view.causeRisks.join(", "))}</text>`
    : "";
  const causeClass = view.causeRisks.length ? " cause" : "";
  return (
    `<g class="node ${view.status}${causeClass}" data-id="${escapeXml(view.id)}" data-status="${view.status}">` +
    `<rect x="${p.x}" y="${p.y}" width="${NODE_WIDTH}" height="${NODE_HEIGHT}" rx="8"/>` +
    `<text class="label" x="${p.x + NODE_WIDTH / 2}" y="${p.y + NODE_HEIGHT / 2 + 4}">${escapeXml(view.id)}</text>` +
    badge +
    "</g>"
  );
}
