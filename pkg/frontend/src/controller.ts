// Orchestrates panels against the API. Each panel keeps at most one request
// in flight: a newer submission aborts the older one, and stale responses are
// discarded by sequence number. Results are stored exactly as the server
// ordered them.

import { Api, ApiError } from "./api.js";
import type { ViewState } from "./state.js";
import type { SomMeta } from "./types.js";
import { checkDimensions } from "./render.js";

type Panel = "fingerprint" | "path" | "analogy" | "whatif" | "predict";

export class ExplorerController {
  meta: SomMeta | null = null;
  private inflight = new Map<Panel, AbortController>();
  private sequence = new Map<Panel, number>();
  onChange: () => void = () => {};

  constructor(
    readonly api: Api,
    readonly state: ViewState,
  ) {}

  private begin(panel: Panel): { signal: AbortSignal; seq: number } {
    this.inflight.get(panel)?.abort();
    const controller = new AbortController();
    this.inflight.set(panel, controller);
    const seq = (this.sequence.get(panel) ?? 0) + 1;
    this.sequence.set(panel, seq);
    return { signal: controller.signal, seq };
  }

  private fresh(panel: Panel, seq: number): boolean {
    return this.sequence.get(panel) === seq;
  }

  private fail(panel: Panel, seq: number, error: unknown): void {
    if (!this.fresh(panel, seq)) return;
    if (error instanceof DOMException && error.name === "AbortError") return;
    const message =
      error instanceof ApiError
        ? `${error.status}: ${error.message}`
        : error instanceof Error
          ? error.message
          : String(error);
    this.state.setError(message);
    this.onChange();
  }

  async loadMeta(): Promise<void> {
    this.meta = await this.api.somMeta();
    this.onChange();
  }

  async loadFingerprint(entity: string): Promise<void> {
    const { signal, seq } = this.begin("fingerprint");
    try {
      const body = await this.api.fingerprintOf(entity, signal);
      if (!this.fresh("fingerprint", seq)) return;
      if (this.meta) checkDimensions(body.fingerprint, this.meta);
      this.state.setFingerprint(body.fingerprint);
      this.onChange();
    } catch (error) {
      this.fail("fingerprint", seq, error);
    }
  }

  async loadSetFingerprint(entities: string[]): Promise<void> {
    const { signal, seq } = this.begin("fingerprint");
    try {
      const body = await this.api.fingerprintSet(entities, signal);
      if (!this.fresh("fingerprint", seq)) return;
      if (this.meta) checkDimensions(body.fingerprint, this.meta);
      this.state.setFingerprint(body.fingerprint);
      this.onChange();
    } catch (error) {
      this.fail("fingerprint", seq, error);
    }
  }

  async submitPath(source: string, relations: string[], k: number): Promise<void> {
    const { signal, seq } = this.begin("path");
    try {
      const body = await this.api.queryPath(source, relations, k, signal);
      if (!this.fresh("path", seq)) return;
      this.state.setResults({ kind: "path", rows: body.results });
      this.onChange();
    } catch (error) {
      this.fail("path", seq, error);
    }
  }

  async submitAnalogy(plus: string[], minus: string[], k: number): Promise<void> {
    const { signal, seq } = this.begin("analogy");
    try {
      const body = await this.api.queryAnalogy(plus, minus, k, signal);
      if (!this.fresh("analogy", seq)) return;
      this.state.setResults({ kind: "analogy", rows: body.results });
      this.onChange();
    } catch (error) {
      this.fail("analogy", seq, error);
    }
  }

  /** Submit the server-confirmed fingerprint plus pending edits. The edited
   * fingerprint the server echoes back becomes the new confirmed view. */
  async submitWhatIf(k: number): Promise<void> {
    if (!this.state.fingerprint) {
      this.state.setError("load a fingerprint before running a what-if");
      this.onChange();
      return;
    }
    const { signal, seq } = this.begin("whatif");
    try {
      const body = await this.api.whatIf(
        this.state.fingerprint.cells,
        this.state.edits(),
        k,
        signal,
      );
      if (!this.fresh("whatif", seq)) return;
      this.state.setFingerprint(body.fingerprint);
      this.state.setResults({ kind: "whatif", rows: body.results });
      this.onChange();
    } catch (error) {
      this.fail("whatif", seq, error);
    }
  }

  async submitPredict(compound: string, gene: string): Promise<void> {
    const { signal, seq } = this.begin("predict");
    try {
      const body = await this.api.predict(compound, gene, signal);
      if (!this.fresh("predict", seq)) return;
      this.state.setResults({
        kind: "predict",
        probabilities: body.probabilities,
        compound: body.compound,
        gene: body.gene,
      });
      this.onChange();
    } catch (error) {
      this.fail("predict", seq, error);
    }
  }
}
