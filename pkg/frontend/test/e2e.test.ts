// End-to-end: the UI layer against a live service process.  Verifies the
// palette-coherence invariant (enabled exactly when the insert succeeds,
// disabled exactly when the service reports sort-mismatch) and that the
// rendered tree after each command equals the batch CLI's result for the
// same command sequence.

import { ChildProcess, execFile, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { ApiError, Client } from "../src/api.js";
import { cursorCount, paletteButtons, wireToSexpr } from "../src/render.js";
import type { Command, View } from "../src/types.js";

const REPO_ROOT = new URL("../..", import.meta.url).pathname;
const PORT = 8900 + (process.pid % 80);
const BASE = `http://127.0.0.1:${PORT}`;

const SPEC = `sort s
sort e
op let : (e, e.s) s
op exp : (e) s
op plus : (e, e) e
litop num : int e
litop var : name e
`;

let server: ChildProcess;
const client = new Client(BASE);

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "uvicorn", "abtedit.service:app", "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  for (let i = 0; i < 100; i++) {
    try {
      const r = await fetch(`${BASE}/sessions/probe`);
      if (r.status === 404) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("service did not start");
}, 20_000);

afterAll(() => {
  server?.kill();
});

async function newSession(rootSort: string): Promise<View> {
  return client.createSession(SPEC, rootSort);
}

async function replay(rootSort: string, commands: Command[]): Promise<View> {
  let view = await newSession(rootSort);
  for (const cmd of commands) {
    view = await client.command(view.id, cmd);
    expect(view.stuck).toBeNull();
  }
  return view;
}

function cliRun(script: string, rootSort: string): Promise<string> {
  return new Promise((resolve, reject) => {
    execFile(
      "python3",
      [
        "-m", "abtedit.cli", "run",
        "--spec", "data/letlang.edspec",
        "--init-sort", rootSort,
        "-e", script,
      ],
      { cwd: REPO_ROOT },
      (error, stdout) => (error ? reject(error) : resolve(stdout.trim())),
    );
  });
}

function asScript(commands: Command[]): string {
  const parts = commands.map((cmd) => {
    if (cmd.kind === "child") return `child ${cmd.arg}`;
    if (cmd.kind === "parent") return "parent";
    return `{${cmd.arg}}`;
  });
  return [...parts, "nil"].join(". ");
}

describe("session lifecycle", () => {
  test("initial tree is a cursor over a hole of the root sort", async () => {
    const view = await newSession("e");
    expect(view.sexpr).toBe("(cursor (hole e))");
    expect(view.tree.cursor).toBe(true);
    expect(cursorCount(view.tree)).toBe(1);
    expect(wireToSexpr(view.tree)).toBe(view.sexpr);
  });

  test("stuck renders as data and leaves the view unchanged", async () => {
    const view = await newSession("e");
    const after = await client.command(view.id, { kind: "parent" });
    expect(after.stuck).toBe("at-root");
    expect(after.sexpr).toBe(view.sexpr);
  });
});

describe("UI/service coherence", () => {
  const WALK: Command[] = [
    { kind: "insert", arg: "let" },
    { kind: "child", arg: 2 },
    { kind: "insert", arg: "exp" },
    { kind: "child", arg: 1 },
    { kind: "insert", arg: "plus" },
    { kind: "child", arg: 1 },
    { kind: "insert", arg: "var:x1" },
    { kind: "parent" },
  ];

  test(
    "every enabled palette insert succeeds; every disabled one is sort-mismatch",
    async () => {
      for (let depth = 0; depth <= WALK.length; depth++) {
        const prefix = WALK.slice(0, depth);
        const view = await replay("s", prefix);
        const buttons = paletteButtons(view.operators, view.palette);
        expect(cursorCount(view.tree)).toBe(1);

        for (const button of buttons) {
          let arg = button.op;
          if (button.paramKind === "int") arg = `${button.op}:1`;
          if (button.paramKind === "name") {
            arg = `${button.op}:${button.inScope?.[0] ?? "zz"}`;
          }
          const probe = await replay("s", prefix);
          const result = await client.command(probe.id, {
            kind: "insert",
            arg,
          });
          if (button.enabled) {
            expect(result.stuck, `${arg} at depth ${depth}`).toBeNull();
          } else {
            expect(result.stuck, `${arg} at depth ${depth}`).toBe(
              "sort-mismatch",
            );
            expect(result.sexpr).toBe(view.sexpr); // unchanged
          }
        }
      }
    },
    60_000,
  );

  test(
    "rendered tree after each command equals the CLI result for the same sequence",
    async () => {
      let view = await newSession("s");
      for (let depth = 1; depth <= WALK.length; depth++) {
        view = await client.command(view.id, WALK[depth - 1]!);
        expect(view.stuck).toBeNull();
        const fromCli = await cliRun(asScript(WALK.slice(0, depth)), "s");
        expect(wireToSexpr(view.tree)).toBe(fromCli);
        expect(view.sexpr).toBe(fromCli);
      }
    },
    60_000,
  );
});

describe("condition inspector", () => {
  test("badges track the tree live", async () => {
    const view = await newSession("e");
    expect((await client.query(view.id, "@hole_e")).result).toBe(true);
    expect((await client.query(view.id, "!@hole_e")).result).toBe(false);
    expect((await client.query(view.id, "<>plus")).result).toBe(false);
    await client.command(view.id, { kind: "insert", arg: "plus" });
    expect((await client.query(view.id, "<>plus")).result).toBe(true);
  });

  test("parse errors surface inline as ApiError", async () => {
    const view = await newSession("e");
    await expect(client.query(view.id, "@@")).rejects.toBeInstanceOf(ApiError);
  });
});

describe("scripts through the client", () => {
  test("terminal scripts commit; stuck scripts do not", async () => {
    const view = await newSession("e");
    const ok = await client.runScript(view.id, "@hole_e => {plus}.nil | nil");
    expect(ok.status).toBe("terminal");
    expect(ok.committed).toBe(true);
    expect(ok.view.sexpr).toBe("(cursor (op plus (hole e) (hole e)))");

    const stuck = await client.runScript(view.id, "child 1. {let}.nil");
    expect(stuck.status).toBe("stuck");
    expect(stuck.committed).toBe(false);
    expect(stuck.view.sexpr).toBe(ok.view.sexpr);
    expect(stuck.trace.length).toBe(1);
  });

  test("trace endpoint replays the session history", async () => {
    const view = await newSession("e");
    await client.command(view.id, { kind: "insert", arg: "num:5" });
    const trace = await client.trace(view.id);
    expect(trace.initial).toBe("(cursor (hole e))");
    expect(trace.entries.at(-1)?.sexpr).toBe("(cursor (op num 5))");
    expect(trace.current).toBe("(cursor (op num 5))");
  });
});
