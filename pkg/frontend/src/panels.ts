// Query panel forms; results render in the server's order, and clicking a
// result row loads that entity's fingerprint (the exploration feedback loop).

import { ExplorerController } from "./controller.js";
import type { PanelResults } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function parseList(value: string): string[] {
  return value
    .split(",")
    .map((item) => item.trim())
    .filter((item) => item.length > 0);
}

export function buildPanels(root: HTMLElement, controller: ExplorerController): void {
  root.appendChild(
    panel("Load fingerprint", [field("entity", "chem0_0")], (values) => {
      if (values.entity.includes(",")) {
        void controller.loadSetFingerprint(parseList(values.entity));
      } else {
        void controller.loadFingerprint(values.entity);
      }
    }),
  );
  root.appendChild(
    panel(
      "Path query",
      [field("source", ""), field("relations", "r0,r1"), field("k", "10")],
      (values) =>
        void controller.submitPath(
          values.source,
          parseList(values.relations),
          Number(values.k) || 10,
        ),
    ),
  );
  root.appendChild(
    panel(
      "Analogy",
      [field("plus", ""), field("minus", ""), field("k", "10")],
      (values) =>
        void controller.submitAnalogy(
          parseList(values.plus),
          parseList(values.minus),
          Number(values.k) || 10,
        ),
    ),
  );
  root.appendChild(
    panel("What-if (pending edits)", [field("k", "10")], (values) => {
      void controller.submitWhatIf(Number(values.k) || 10);
    }),
  );
  root.appendChild(
    panel(
      "Predict interaction",
      [field("compound", ""), field("gene", "")],
      (values) => void controller.submitPredict(values.compound, values.gene),
    ),
  );
}

interface Field {
  name: string;
  initial: string;
}

function field(name: string, initial: string): Field {
  return { name, initial };
}

function panel(
  title: string,
  fields: Field[],
  submit: (values: Record<string, string>) => void,
): HTMLElement {
  const section = el("section", { class: "panel" });
  section.appendChild(el("h3", {}, title));
  const form = el("form");
  const inputs = new Map<string, HTMLInputElement>();
  for (const item of fields) {
    const label = el("label", {}, `${item.name} `);
    const input = el("input", { name: item.name, value: item.initial });
    inputs.set(item.name, input);
    label.appendChild(input);
    form.appendChild(label);
  }
  const button = el("button", { type: "submit" }, "run");
  form.appendChild(button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const values: Record<string, string> = {};
    for (const [name, input] of inputs) values[name] = input.value;
    submit(values);
  });
  section.appendChild(form);
  return section;
}

export function renderResults(
  container: HTMLElement,
  results: PanelResults | null,
  onPick: (entity: string) => void,
): void {
  container.replaceChildren();
  if (!results) return;
  if (results.kind === "predict") {
    const probs = results.probabilities.map((p) => p.toFixed(4)).join(", ");
    container.appendChild(
      el("div", { class: "predict" },
        `${results.compound} x ${results.gene}: class probabilities [${probs}]`),
    );
    return;
  }
  const list = el("ol", { class: "results" });
  for (const row of results.rows) {
    const value =
      "score" in row ? row.score : "distance" in row ? row.distance : row.similarity;
    const item = el("li", {}, `${row.entity} (${value.toFixed(6)})`);
    item.addEventListener("click", () => onPick(row.entity));
    list.appendChild(item);
  }
  container.appendChild(list);
}
