import { describe, expect, it } from "vitest";

import { ViewState } from "../src/state.js";
import type { FingerprintPayload } from "../src/types.js";

function fp(cells: number[][]): FingerprintPayload {
  return { width: cells[0].length, height: cells.length, subject: "s", cells };
}

describe("pending edit cycling", () => {
  it("cycles 0 -> 1 -> 2 -> 0", () => {
    const state = new ViewState("http://test");
    state.setFingerprint(fp([[0]]));
    state.cycleCell(0, 0);
    expect(state.effectiveBand(0, 0)).toBe(1);
    state.cycleCell(0, 0);
    expect(state.effectiveBand(0, 0)).toBe(2);
    state.cycleCell(0, 0);
    expect(state.effectiveBand(0, 0)).toBe(0);
  });

  it("three clicks restore the original fingerprint exactly", () => {
    const state = new ViewState("http://test");
    const original = [
      [2, 1],
      [0, 1],
    ];
    state.setFingerprint(fp(original.map((row) => [...row])));
    for (const [row, col] of [
      [0, 0],
      [1, 1],
    ] as const) {
      state.cycleCell(row, col);
      state.cycleCell(row, col);
      state.cycleCell(row, col);
    }
    expect(state.effectiveCells()).toEqual(original);
    expect(state.pendingEdits.size).toBe(0); // no stray pending markers
  });

  it("starts the cycle from the server band, not from zero", () => {
    const state = new ViewState("http://test");
    state.setFingerprint(fp([[2]]));
    state.cycleCell(0, 0);
    expect(state.effectiveBand(0, 0)).toBe(0);
    expect(state.edits()).toEqual([{ row: 0, col: 0, band: 0 }]);
  });

  it("rejects out-of-range edits", () => {
    const state = new ViewState("http://test");
    state.setFingerprint(fp([[0]]));
    expect(() => state.cycleCell(0, 5)).toThrow(/outside/);
    expect(() => state.cycleCell(-1, 0)).toThrow(/outside/);
  });

  it("effectiveCells applies edits without touching server data", () => {
    const state = new ViewState("http://test");
    state.setFingerprint(fp([[0, 0]]));
    state.cycleCell(0, 1);
    expect(state.effectiveCells()).toEqual([[0, 1]]);
    expect(state.fingerprint!.cells).toEqual([[0, 0]]);
  });

  it("a new server fingerprint clears pending edits", () => {
    const state = new ViewState("http://test");
    state.setFingerprint(fp([[0]]));
    state.cycleCell(0, 0);
    expect(state.pendingEdits.size).toBe(1);
    state.setFingerprint(fp([[1]]));
    expect(state.pendingEdits.size).toBe(0);
  });

  it("errors leave results and fingerprint untouched", () => {
    const state = new ViewState("http://test");
    state.setFingerprint(fp([[1]]));
    state.setResults({ kind: "path", rows: [{ entity: "a", score: -1 }] });
    state.setError("boom");
    expect(state.error).toBe("boom");
    expect(state.lastResults).toEqual({
      kind: "path",
      rows: [{ entity: "a", score: -1 }],
    });
    expect(state.fingerprint!.cells).toEqual([[1]]);
  });
});
