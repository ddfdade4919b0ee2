import { expect, test } from "vitest";

import { handleKey } from "../src/keys.js";

test("arrow down is child 1", () => {
  const action = handleKey("ArrowDown", { digits: "" });
  expect(action).toMatchObject({
    type: "command",
    command: { kind: "child", arg: 1 },
  });
});

test("digit-modified arrow down picks the child index", () => {
  const buffered = handleKey("2", { digits: "" });
  expect(buffered.type).toBe("buffer");
  const action = handleKey("ArrowDown", buffered.state);
  expect(action).toMatchObject({ command: { kind: "child", arg: 2 } });
  expect(action.state.digits).toBe("");

  const twelve = handleKey("2", handleKey("1", { digits: "" }).state);
  expect(handleKey("ArrowDown", twelve.state)).toMatchObject({
    command: { kind: "child", arg: 12 },
  });
});

test("arrow up is parent", () => {
  expect(handleKey("ArrowUp", { digits: "7" })).toMatchObject({
    command: { kind: "parent" },
  });
});

test("escape clears the buffer, other keys ignored", () => {
  expect(handleKey("Escape", { digits: "42" }).state.digits).toBe("");
  expect(handleKey("x", { digits: "4" })).toMatchObject({
    type: "ignore",
    state: { digits: "4" },
  });
});
