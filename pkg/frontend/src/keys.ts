// Keyboard layer: arrows move the cursor, a typed digit prefixes the
// next ArrowDown with a child index.

import type { Command } from "./types.js";

export interface KeyState {
  digits: string;
}

export type KeyAction =
  | { type: "command"; command: Command; state: KeyState }
  | { type: "buffer"; state: KeyState }
  | { type: "ignore"; state: KeyState };

export function handleKey(key: string, state: KeyState): KeyAction {
  if (key >= "0" && key <= "9") {
    return { type: "buffer", state: { digits: state.digits + key } };
  }
  if (key === "Escape") {
    return { type: "ignore", state: { digits: "" } };
  }
  if (key === "ArrowDown") {
    const n = state.digits ? Math.max(1, parseInt(state.digits, 10)) : 1;
    return {
      type: "command",
      command: { kind: "child", arg: n },
      state: { digits: "" },
    };
  }
  if (key === "ArrowUp") {
    return {
      type: "command",
      command: { kind: "parent" },
      state: { digits: "" },
    };
  }
  return { type: "ignore", state };
}
