/**
 * Three manual Applies must retrace the server's /v1/refine trajectory
 * exactly: the fixture holds an actual server-side refine run.
 */

import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { applySuggestion, type Suggestion, type ViewBox } from "../src/geometry.js";
import { replay, ViewportState } from "../src/history.js";

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "fixtures");
const fixture = JSON.parse(readFileSync(join(fixturesDir, "refine_trajectory.json"), "utf-8")) as {
  max_steps: number;
  trajectory: Array<{ viewport: ViewBox; suggestion: Suggestion }>;
};

const FIELDS: Array<keyof ViewBox> = ["cx", "cy", "w", "h", "alpha"];

test("client-side Applies land on the server trajectory viewports", () => {
  const { trajectory } = fixture;
  assert.ok(trajectory.length >= 2 && trajectory.length <= fixture.max_steps + 1);
  for (let i = 0; i + 1 < trajectory.length; i++) {
    const applied = applySuggestion(trajectory[i].viewport, trajectory[i].suggestion);
    for (const field of FIELDS) {
      assert.equal(
        applied[field],
        trajectory[i + 1].viewport[field],
        `step ${i} field ${field}`,
      );
    }
  }
});

test("a session applying each suggestion reproduces the final viewport", () => {
  const { trajectory } = fixture;
  const state = new ViewportState("src", trajectory[0].viewport);
  for (let i = 0; i + 1 < trajectory.length; i++) {
    state.apply(trajectory[i].suggestion);
  }
  const last = trajectory[trajectory.length - 1].viewport;
  assert.deepEqual(state.viewport, last);
  assert.equal(state.history.length, trajectory.length - 1);
  assert.deepEqual(replay(state.history), last);
});
