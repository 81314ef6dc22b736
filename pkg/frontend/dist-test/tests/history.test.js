import assert from "node:assert/strict";
import { test } from "node:test";
import { applySuggestion } from "../src/geometry.js";
import { replay, replayEntry, ViewportState } from "../src/history.js";
const START = { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5, alpha: 0 };
const RIGHT = { adjust: true, kind: "right", magnitude: 20 };
const ZOOM = { adjust: true, kind: "zoom_in", magnitude: 10 };
const TILT = { adjust: true, kind: "clockwise", magnitude: Math.PI / 12 };
test("apply records an accepted entry and moves the viewport exactly", () => {
    const state = new ViewportState("s", START);
    const moved = state.apply(RIGHT);
    assert.deepEqual(moved, applySuggestion(START, RIGHT));
    assert.equal(state.history.length, 1);
    assert.equal(state.history[0].accepted, true);
    assert.deepEqual(state.history[0].viewport, START);
});
test("dismiss records an override without moving", () => {
    const state = new ViewportState("s", START);
    state.dismiss(RIGHT);
    assert.deepEqual(state.viewport, START);
    assert.equal(state.history[0].accepted, false);
});
test("history is append-only across a session", () => {
    const state = new ViewportState("s", START);
    state.apply(RIGHT);
    state.dismiss(ZOOM);
    state.apply(TILT);
    assert.equal(state.history.length, 3);
    assert.deepEqual(state.history.map((e) => e.accepted), [true, false, true]);
});
test("replay reconstructs the final viewport exactly, manual moves included", () => {
    const state = new ViewportState("s", START);
    state.apply(RIGHT);
    // user pans by hand between suggestions
    state.moveTo({ ...state.viewport, cx: state.viewport.cx + 0.07, alpha: 0.3 });
    state.dismiss(ZOOM);
    state.moveTo({ ...state.viewport, w: state.viewport.w * 1.21, h: state.viewport.h * 1.21 });
    state.apply(TILT);
    assert.deepEqual(replay(state.history), state.viewport);
    for (let i = 0; i + 1 < state.history.length; i++) {
        // every intermediate entry replays to a well-formed viewport
        const v = replayEntry(state.history[i]);
        assert.ok(v.w > 0 && v.h > 0);
    }
    assert.equal(replay([]), null);
});
