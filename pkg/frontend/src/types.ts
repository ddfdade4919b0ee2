// Wire types of the session service, consumed verbatim.

export interface TreeNode {
  node: string; // operator name, or "hole" / "var"
  sort: string;
  cursor: boolean;
  literal: number | string | null;
  binders: string[] | null;
  children: TreeNode[];
}

export interface PaletteEntry {
  op: string;
  paramKind: "none" | "int" | "name";
  inScope?: string[];
}

export interface OperatorInfo {
  op: string;
  paramKind: "none" | "int" | "name";
  resultSort: string;
}

export interface View {
  id: string;
  rootSort: string;
  tree: TreeNode;
  sexpr: string;
  cursorPath: number[];
  enclosedSort: string;
  palette: PaletteEntry[];
  operators: OperatorInfo[];
  stuck: string | null;
}

export interface TraceEntry {
  label: string;
  sexpr: string;
}

export interface ScriptResult {
  status: "terminal" | "stuck" | "fuel-exhausted";
  stuckReason: string | null;
  steps: number;
  committed: boolean;
  trace: TraceEntry[];
  view: View;
}

export interface SessionTrace {
  initial: string;
  entries: TraceEntry[];
  current: string;
}

export type Command =
  | { kind: "child"; arg: number }
  | { kind: "parent" }
  | { kind: "insert"; arg: string };
