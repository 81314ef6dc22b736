/**
 * Client geometry must agree with the server implementation on the shared
 * vector fixture to 1e-9 per field.
 */

import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import {
  applyPerturbation,
  applySuggestion,
  boxCorners,
  boxWithinImage,
  invertSingleAxis,
  type Perturbation,
  type Suggestion,
  type ViewBox,
} from "../src/geometry.js";

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "fixtures");
const vectors = JSON.parse(readFileSync(join(fixturesDir, "geometry_vectors.json"), "utf-8")) as {
  apply: Array<{ box: ViewBox; perturbation: Perturbation; applied: ViewBox }>;
  invert: Array<{ perturbation: Perturbation; inverse: Perturbation }>;
  suggestions: Array<{ box: ViewBox; suggestion: Suggestion; applied: ViewBox }>;
};

const FIELDS: Array<keyof ViewBox> = ["cx", "cy", "w", "h", "alpha"];
const TOL = 1e-9;

test("applyPerturbation matches the server on every fixture vector", () => {
  assert.ok(vectors.apply.length >= 100);
  for (const { box, perturbation, applied } of vectors.apply) {
    const got = applyPerturbation(box, perturbation);
    for (const field of FIELDS) {
      assert.ok(
        Math.abs(got[field] - applied[field]) <= TOL,
        `${field}: ${got[field]} vs ${applied[field]}`,
      );
    }
  }
});

test("invertSingleAxis matches the server inverses", () => {
  for (const { perturbation, inverse } of vectors.invert) {
    const got = invertSingleAxis(perturbation);
    for (const field of ["ox", "oy", "oz", "oalpha"] as const) {
      assert.ok(Math.abs(got[field] - inverse[field]) <= TOL);
    }
  }
});

test("suggestion application matches the server", () => {
  for (const { box, suggestion, applied } of vectors.suggestions) {
    const got = applySuggestion(box, suggestion);
    for (const field of FIELDS) {
      assert.ok(Math.abs(got[field] - applied[field]) <= TOL);
    }
  }
});

test("no-adjustment suggestion is the identity", () => {
  const box: ViewBox = { cx: 0.4, cy: 0.6, w: 0.3, h: 0.25, alpha: 0.12 };
  assert.deepEqual(applySuggestion(box, { adjust: false }), box);
});

test("corner math and containment behave at the boundaries", () => {
  const full: ViewBox = { cx: 0.5, cy: 0.5, w: 1, h: 1, alpha: 0 };
  assert.ok(boxWithinImage(full));
  const corners = boxCorners(full);
  assert.deepEqual(corners[0], [0, 0]);
  assert.deepEqual(corners[2], [1, 1]);
  assert.ok(!boxWithinImage({ cx: 0.5, cy: 0.5, w: 0.8, h: 0.8, alpha: Math.PI / 4 }));
});

test("composite perturbations are rejected by the inverter", () => {
  assert.throws(() => invertSingleAxis({ ox: 0.1, oy: 0.1, oz: 0, oalpha: 0 }));
});
