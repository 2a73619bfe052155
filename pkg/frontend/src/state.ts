// View state: the server-confirmed fingerprint plus clearly separated pending
// edits. Pending edits are keyed per cell; cycling a cell back to its
// server-confirmed band removes its pending edit entirely, so three clicks
// always restore the original fingerprint exactly.

import type { Edit, FingerprintPayload } from "./types.js";

export type PanelResults =
  | { kind: "path"; rows: { entity: string; score: number }[] }
  | { kind: "analogy"; rows: { entity: string; distance: number }[] }
  | { kind: "whatif"; rows: { entity: string; similarity: number }[] }
  | { kind: "predict"; probabilities: number[]; compound: string; gene: string };

export class ViewState {
  fingerprint: FingerprintPayload | null = null;
  pendingEdits = new Map<string, Edit>();
  lastResults: PanelResults | null = null;
  error: string | null = null;

  constructor(public readonly apiBase: string) {}

  setFingerprint(fp: FingerprintPayload): void {
    this.fingerprint = fp;
    this.pendingEdits.clear();
    this.error = null;
  }

  setResults(results: PanelResults): void {
    this.lastResults = results;
    this.error = null;
  }

  setError(message: string): void {
    // form state and previous results stay untouched
    this.error = message;
  }

  private key(row: number, col: number): string {
    return `${row},${col}`;
  }

  serverBand(row: number, col: number): number {
    if (!this.fingerprint) throw new Error("no fingerprint loaded");
    return this.fingerprint.cells[row][col];
  }

  effectiveBand(row: number, col: number): number {
    const edit = this.pendingEdits.get(this.key(row, col));
    return edit ? edit.band : this.serverBand(row, col);
  }

  /** Click handler: cycle the cell's band 0 -> 1 -> 2 -> 0 as a pending edit. */
  cycleCell(row: number, col: number): void {
    if (!this.fingerprint) throw new Error("no fingerprint loaded");
    if (row < 0 || row >= this.fingerprint.height || col < 0 || col >= this.fingerprint.width) {
      throw new Error(`cell (${row}, ${col}) outside fingerprint`);
    }
    const next = (this.effectiveBand(row, col) + 1) % 3;
    const key = this.key(row, col);
    if (next === this.serverBand(row, col)) {
      this.pendingEdits.delete(key);
    } else {
      this.pendingEdits.set(key, { row, col, band: next });
    }
  }

  clearEdits(): void {
    this.pendingEdits.clear();
  }

  edits(): Edit[] {
    return [...this.pendingEdits.values()];
  }

  /** Server cells with pending edits applied: what a what-if submits. */
  effectiveCells(): number[][] {
    if (!this.fingerprint) throw new Error("no fingerprint loaded");
    const cells = this.fingerprint.cells.map((row) => [...row]);
    for (const edit of this.pendingEdits.values()) {
      cells[edit.row][edit.col] = edit.band;
    }
    return cells;
  }
}
