// Pure view code: wire tree to HTML, wire tree back to the s-expression
// text (for display and for checking against the batch CLI), palette
// buttons with sort-legal entries enabled.

import type { OperatorInfo, PaletteEntry, TreeNode } from "./types.js";

const escapeHtml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

/** Render a wire tree; the unique cursor node gets the .cursor wrapper. */
export function renderTree(node: TreeNode): string {
  const inner = renderNode(node);
  return `<div class="tree">${inner}</div>`;
}

function renderNode(node: TreeNode): string {
  const body = renderBody(node);
  const binders =
    node.binders && node.binders.length
      ? `<span class="binder">${escapeHtml(node.binders.join(" "))}.</span>`
      : "";
  const cursor = node.cursor ? ' data-cursor="true"' : "";
  const cls = node.cursor ? "node cursor" : "node";
  return `${binders}<span class="${cls}"${cursor}>${body}</span>`;
}

function renderBody(node: TreeNode): string {
  if (node.node === "hole") {
    return `<span class="hole">⟨⟩<sub>${escapeHtml(node.sort)}</sub></span>`;
  }
  if (node.node === "var") {
    return `<span class="var">${escapeHtml(String(node.literal))}</span>`;
  }
  const label =
    node.literal === null
      ? escapeHtml(node.node)
      : `${escapeHtml(node.node)}[${escapeHtml(String(node.literal))}]`;
  if (!node.children.length) {
    return `<span class="op">${label}</span>`;
  }
  const children = node.children
    .map((child) => `<span class="arg">${renderNode(child)}</span>`)
    .join("");
  return `<span class="op">${label}</span>(${children})`;
}

export function cursorCount(node: TreeNode): number {
  let n = node.cursor ? 1 : 0;
  for (const child of node.children) n += cursorCount(child);
  return n;
}

/** Reconstruct the s-expression text, one-to-one with the wire form. */
export function wireToSexpr(node: TreeNode): string {
  const bare = (n: TreeNode): string => {
    let body: string;
    if (n.node === "hole") {
      body = `(hole ${n.sort})`;
    } else if (n.node === "var") {
      body = `(var ${n.literal})`;
    } else {
      const parts = ["op", n.node];
      if (n.literal !== null) parts.push(String(n.literal));
      for (const child of n.children) {
        const sub = bare(child);
        parts.push(
          child.binders && child.binders.length
            ? `(bind (${child.binders.join(" ")}) ${sub})`
            : sub,
        );
      }
      body = `(${parts.join(" ")})`;
    }
    return n.cursor ? `(cursor ${body})` : body;
  };
  return bare(node);
}

export interface PaletteButton {
  op: string;
  paramKind: "none" | "int" | "name";
  enabled: boolean;
  inScope?: string[];
}

/**
 * One button per operator of the language; enabled exactly when the
 * service lists it as insertable at the cursor.
 */
export function paletteButtons(
  operators: OperatorInfo[],
  palette: PaletteEntry[],
): PaletteButton[] {
  const enabled = new Map(palette.map((e) => [e.op, e]));
  return operators.map((info) => ({
    op: info.op,
    paramKind: info.paramKind,
    enabled: enabled.has(info.op),
    inScope: enabled.get(info.op)?.inScope,
  }));
}

export function renderPalette(buttons: PaletteButton[]): string {
  return buttons
    .map((b) => {
      const disabled = b.enabled ? "" : " disabled";
      const title = b.enabled ? "" : ' title="sort-mismatch here"';
      return `<button class="palette-btn" data-op="${escapeHtml(b.op)}" data-param="${b.paramKind}"${disabled}${title}>${escapeHtml(b.op)}</button>`;
    })
    .join("");
}

export function renderTrace(entries: { label: string; sexpr: string }[]): string {
  if (!entries.length) return '<div class="trace-empty">no steps yet</div>';
  return entries
    .map(
      (e) =>
        `<div class="trace-entry"><code class="label">${escapeHtml(e.label)}</code> <code>${escapeHtml(e.sexpr)}</code></div>`,
    )
    .join("");
}

export function renderStuckToast(reason: string): string {
  return `<div class="toast" role="status">stuck: ${escapeHtml(reason)}</div>`;
}
