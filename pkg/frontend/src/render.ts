// Pure render model: everything the canvas paints is computed here so the
// visual contract is testable without a browser. The only client-side
// numerics are this band-to-color mapping.

import type { FingerprintPayload, SomMeta } from "./types.js";
import type { ViewState } from "./state.js";

export const BAND_COLORS: Record<number, string> = {
  0: "#ffffff", // neutral
  1: "#00c800", // green
  2: "#dc0000", // red
};

export const PENDING_OUTLINE = "#1f6feb";

export interface CellView {
  row: number;
  col: number;
  band: number;
  color: string;
  pending: boolean;
}

export interface RenderModel {
  width: number;
  height: number;
  cells: CellView[];
}

export function renderModel(state: ViewState): RenderModel {
  const fp = state.fingerprint;
  if (!fp) return { width: 0, height: 0, cells: [] };
  const cells: CellView[] = [];
  for (let row = 0; row < fp.height; row++) {
    for (let col = 0; col < fp.width; col++) {
      const band = state.effectiveBand(row, col);
      cells.push({
        row,
        col,
        band,
        color: BAND_COLORS[band],
        pending: state.pendingEdits.has(`${row},${col}`),
      });
    }
  }
  return { width: fp.width, height: fp.height, cells };
}

/** Raises when a fingerprint does not match the session grid; the caller
 * surfaces the message as an error banner instead of painting. */
export function checkDimensions(fp: FingerprintPayload, meta: SomMeta): void {
  if (fp.width !== meta.width || fp.height !== meta.height) {
    throw new Error(
      `fingerprint is ${fp.height}x${fp.width} but the session grid is ` +
        `${meta.height}x${meta.width}`,
    );
  }
}

export interface HoverInfo {
  row: number;
  col: number;
  band: number;
  cluster: number | null;
  quality: number | null;
}

export function hoverInfo(
  state: ViewState,
  meta: SomMeta | null,
  row: number,
  col: number,
): HoverInfo | null {
  const fp = state.fingerprint;
  if (!fp || row < 0 || row >= fp.height || col < 0 || col >= fp.width) return null;
  return {
    row,
    col,
    band: state.effectiveBand(row, col),
    cluster: meta ? meta.clusters[row][col] : null,
    quality: meta ? meta.node_quality[row][col] : null,
  };
}

export function formatHover(info: HoverInfo): string {
  const parts = [`cell (${info.row}, ${info.col})`, `band ${info.band}`];
  if (info.cluster !== null) parts.push(`cluster ${info.cluster}`);
  parts.push(
    info.quality === null ? "quality: empty" : `quality ${info.quality.toFixed(4)}`,
  );
  return parts.join(" | ");
}
