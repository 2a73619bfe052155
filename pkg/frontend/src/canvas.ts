// Canvas adapter: paints the render model and translates pointer events into
// cell coordinates. One canvas covers the whole grid (50x50 by default), which
// stays responsive where one element per cell would not.

import { PENDING_OUTLINE, RenderModel } from "./render.js";

export class FingerprintCanvas {
  private cellSize = 12;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onCellClick: (row: number, col: number) => void,
    private readonly onCellHover: (row: number, col: number) => void,
  ) {
    canvas.addEventListener("click", (event) => {
      const cell = this.cellAt(event);
      if (cell) this.onCellClick(cell.row, cell.col);
    });
    canvas.addEventListener("mousemove", (event) => {
      const cell = this.cellAt(event);
      if (cell) this.onCellHover(cell.row, cell.col);
    });
  }

  private cellAt(event: MouseEvent): { row: number; col: number } | null {
    const rect = this.canvas.getBoundingClientRect();
    const col = Math.floor((event.clientX - rect.left) / this.cellSize);
    const row = Math.floor((event.clientY - rect.top) / this.cellSize);
    if (row < 0 || col < 0) return null;
    return { row, col };
  }

  paint(model: RenderModel): void {
    if (model.width === 0) return;
    this.cellSize = Math.max(4, Math.floor(600 / Math.max(model.width, model.height)));
    this.canvas.width = model.width * this.cellSize;
    this.canvas.height = model.height * this.cellSize;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const s = this.cellSize;
    for (const cell of model.cells) {
      ctx.fillStyle = cell.color;
      ctx.fillRect(cell.col * s, cell.row * s, s, s);
      ctx.strokeStyle = "#e0e0e0";
      ctx.strokeRect(cell.col * s + 0.5, cell.row * s + 0.5, s - 1, s - 1);
      if (cell.pending) {
        ctx.strokeStyle = PENDING_OUTLINE;
        ctx.lineWidth = 2;
        ctx.strokeRect(cell.col * s + 1.5, cell.row * s + 1.5, s - 3, s - 3);
        ctx.lineWidth = 1;
      }
    }
  }
}
