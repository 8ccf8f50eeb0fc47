/**
 * DOM wiring for the frontier explorer. All selection logic lives in
 * selection.ts and all render decisions in view.ts; this file only moves
 * values between controls, session state, and the page.
 */

import { SchemaError, initialState, objectivesFor, validateDocument } from "./selection.js";
import { renderScatter } from "./scatter.js";
import { buildView, type AxisPrefs, type ViewModel } from "./view.js";
import type { FrontierDocument, GapMetric, SessionState } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

let doc: FrontierDocument | null = null;
let state: SessionState | null = null;
let axes: AxisPrefs = { x: "sparsity", y: "unfairness" };

const fileInput = $<HTMLInputElement>("file");
const sampleBtn = $<HTMLButtonElement>("sample");
const wSparsity = $<HTMLInputElement>("w-sparsity");
const wUnfairness = $<HTMLInputElement>("w-unfairness");
const accOn = $<HTMLInputElement>("acc-on");
const wAccuracy = $<HTMLInputElement>("w-accuracy");
const minAcc = $<HTMLInputElement>("min-acc");
const metricSel = $<HTMLSelectElement>("metric");
const axisX = $<HTMLSelectElement>("axis-x");
const axisY = $<HTMLSelectElement>("axis-y");
const banner = $<HTMLDivElement>("banner");
const summary = $<HTMLDivElement>("summary");
const scatter = $<HTMLDivElement>("scatter");
const breakdown = $<HTMLDivElement>("breakdown");

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function showBanner(kind: "error" | "warn" | null, message = ""): void {
  if (!kind) {
    banner.style.display = "none";
    return;
  }
  banner.style.display = "block";
  banner.className = `banner ${kind}`;
  banner.textContent = message;
}

function weightsFromControls(): Record<string, number> {
  const weights: Record<string, number> = {
    sparsity: parseFloat(wSparsity.value),
    unfairness: parseFloat(wUnfairness.value),
  };
  if (accOn.checked) weights.accuracy = parseFloat(wAccuracy.value);
  return weights;
}

function syncControls(): void {
  if (!state) return;
  const slider = (el: HTMLInputElement, v: number) => {
    if (v > parseFloat(el.max)) el.max = String(Math.ceil(v));
    el.value = String(v);
  };
  slider(wSparsity, state.weights.sparsity ?? 1);
  slider(wUnfairness, state.weights.unfairness ?? 1);
  accOn.checked = "accuracy" in state.weights;
  wAccuracy.disabled = !accOn.checked;
  if (accOn.checked) slider(wAccuracy, state.weights.accuracy ?? 1);
  minAcc.value = String(state.minAccuracy);
  metricSel.value = state.metric;
  syncAxisOptions();
}

function syncAxisOptions(): void {
  if (!state) return;
  const names = objectivesFor(state.weights).map((o) => o.name);
  for (const sel of [axisX, axisY]) {
    const current = sel.value;
    sel.innerHTML = names.map((n) => `<option value="${n}">${n}</option>`).join("");
    sel.value = names.includes(current) ? current : sel === axisX ? "sparsity" : "unfairness";
  }
  if (!names.includes(axes.x)) axes = { ...axes, x: "sparsity" };
  if (!names.includes(axes.y)) axes = { ...axes, y: "unfairness" };
  axisX.value = axes.x;
  axisY.value = axes.y;
}

function labelWeights(): void {
  $<HTMLSpanElement>("w-sparsity-val").textContent = wSparsity.value;
  $<HTMLSpanElement>("w-unfairness-val").textContent = wUnfairness.value;
  $<HTMLSpanElement>("w-accuracy-val").textContent = accOn.checked ? wAccuracy.value : "off";
}

function renderBreakdown(vm: ViewModel): void {
  if (vm.kind !== "plot") {
    breakdown.innerHTML = "";
    return;
  }
  const rows = vm.breakdown
    .map((b) => {
      if (b.accuracy === null) {
        return `<div class="bar-row"><span class="bar-label">class ${b.cls}</span>
          <span class="bar-na">n/a</span></div>`;
      }
      const pct = Math.max(0, Math.min(1, b.accuracy)) * 100;
      return `<div class="bar-row"><span class="bar-label">class ${b.cls}</span>
        <span class="bar-track"><span class="bar-fill" style="width:${pct.toFixed(1)}%"></span></span>
        <span class="bar-value">${b.accuracy.toFixed(3)}</span></div>`;
    })
    .join("");
  breakdown.innerHTML = `<h3>Per-class accuracy of the selected point</h3>${rows}`;
}

function render(): void {
  labelWeights();
  const vm = buildView(doc, state, axes);
  switch (vm.kind) {
    case "empty":
      showBanner(null);
      summary.textContent = "Load a frontier JSON exported by the selection report.";
      scatter.innerHTML = "";
      breakdown.innerHTML = "";
      break;
    case "error":
      // no partial render on a broken document or selection
      showBanner("error", vm.message);
      summary.textContent = "";
      scatter.innerHTML = "";
      breakdown.innerHTML = "";
      break;
    case "infeasible":
      showBanner("warn", vm.message);
      summary.textContent = "";
      scatter.innerHTML = renderScatter(vm.points, vm.axes.x, vm.axes.y, null);
      breakdown.innerHTML = "";
      if (state) state.chosen = null;
      break;
    case "plot":
      showBanner(null);
      summary.textContent = vm.summary;
      scatter.innerHTML = renderScatter(vm.points, vm.axes.x, vm.axes.y, vm.colorObjective);
      renderBreakdown(vm);
      if (state) state.chosen = vm.chosen;
      break;
  }
}

function loadDocument(text: string, sourceName: string): void {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    doc = null;
    state = null;
    showBanner("error", `${sourceName} is not JSON: ${(err as Error).message}`);
    summary.textContent = "";
    scatter.innerHTML = "";
    breakdown.innerHTML = "";
    return;
  }
  try {
    doc = validateDocument(raw);
  } catch (err) {
    if (!(err instanceof SchemaError)) throw err;
    doc = null;
    state = null;
    showBanner("error", `${sourceName} failed schema validation at ${err.message}`);
    summary.textContent = "";
    scatter.innerHTML = "";
    breakdown.innerHTML = "";
    return;
  }
  state = initialState(doc);
  axes = { x: "sparsity", y: "unfairness" };
  syncControls();
  render();
}

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const reader = new FileReader();
  reader.onload = () => loadDocument(String(reader.result), file.name);
  reader.readAsText(file);
});

for (const el of [wSparsity, wUnfairness, wAccuracy]) {
  el.addEventListener("input", () => {
    if (!state) return;
    state.weights = weightsFromControls();
    syncAxisOptions();
    render();
  });
}

accOn.addEventListener("change", () => {
  if (!state) return;
  wAccuracy.disabled = !accOn.checked;
  state.weights = weightsFromControls();
  syncAxisOptions();
  render();
});

minAcc.addEventListener("input", () => {
  if (!state) return;
  const v = parseFloat(minAcc.value);
  if (!Number.isFinite(v)) return;
  state.minAccuracy = v;
  render();
});

metricSel.addEventListener("change", () => {
  if (!state) return;
  state.metric = metricSel.value as GapMetric;
  render();
});

axisX.addEventListener("change", () => {
  if (axisX.value === axes.y) {
    // keep the two axes distinct by swapping
    axes = { x: axisX.value, y: axes.x };
  } else {
    axes = { ...axes, x: axisX.value };
  }
  axisX.value = axes.x;
  axisY.value = axes.y;
  render();
});

axisY.addEventListener("change", () => {
  if (axisY.value === axes.x) {
    axes = { x: axes.y, y: axisY.value };
  } else {
    axes = { ...axes, y: axisY.value };
  }
  axisX.value = axes.x;
  axisY.value = axes.y;
  render();
});

// small built-in demo so the page does something before a real export exists
const SAMPLE = {
  objectives: [
    { name: "sparsity", direction: "maximize" },
    { name: "unfairness", direction: "minimize" },
  ],
  constraint: { min_accuracy: 0.9 },
  metric: "max_min",
  candidates: [0, 1, 2, 3, 4, 5, 6, 7].map((i) => {
    const sparsity = 1 - Math.pow(0.8, i * 2);
    const acc = 0.97 - 0.012 * i * i * 0.35;
    const gap = 0.02 + 0.011 * i * i * 0.5;
    return {
      technique: i % 2 ? "l1_unstructured" : "global_unstructured",
      treatment: "rewind",
      iteration: i * 2,
      sparsity: Number(sparsity.toFixed(6)),
      total_accuracy: Number(acc.toFixed(6)),
      per_class_accuracy: [0, 1, 2, 3].map((c) =>
        Number(Math.max(0, Math.min(1, acc + (c - 1.5) * gap * 0.4)).toFixed(6)),
      ),
      unfairness: {
        max_min: Number(gap.toFixed(6)),
        mean_min: Number((gap * 0.55).toFixed(6)),
      },
      on_frontier: true,
    };
  }),
  selection: { weights: { sparsity: 1, unfairness: 1 }, chosen_index: 0, tied_indices: [0] },
};

sampleBtn.addEventListener("click", () => {
  loadDocument(JSON.stringify(SAMPLE), "sample");
});

render();
