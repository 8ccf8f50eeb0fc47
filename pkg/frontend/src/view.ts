/**
 * Pure view-model construction: (document, session state, axis prefs) in,
 * plain renderable data out. No DOM access here, so the same state always
 * yields the same render and tests can cover every UI state headlessly.
 */

import {
  EmptyFeasibleError,
  SelectionError,
  objectivesFor,
  recompute,
} from "./selection.js";
import type { Candidate, FrontierDocument, GapMetric, SessionState } from "./types.js";

export interface AxisPrefs {
  x: string;
  y: string;
}

export interface PlotPoint {
  index: number;
  x: number;
  y: number;
  /** value of the off-axis objective on 3-objective documents */
  color: number | null;
  label: string;
  feasible: boolean;
  onFrontier: boolean;
  chosen: boolean;
  tied: boolean;
}

export interface ClassBar {
  cls: number;
  accuracy: number | null;
}

export type ViewModel =
  | { kind: "empty" }
  | { kind: "error"; message: string }
  | { kind: "infeasible"; message: string; points: PlotPoint[]; axes: AxisPrefs }
  | {
      kind: "plot";
      points: PlotPoint[];
      axes: AxisPrefs;
      colorObjective: string | null;
      chosen: number;
      tied: number[];
      frontierSize: number;
      feasibleSize: number;
      summary: string;
      breakdown: ClassBar[];
    };

function plotValue(c: Candidate, name: string, metric: GapMetric): number | null {
  const v =
    name === "sparsity" ? c.sparsity
    : name === "unfairness" ? c.unfairness[metric] ?? null
    : name === "accuracy" ? c.total_accuracy
    : null;
  return v !== null && Number.isFinite(v) ? v : null;
}

function pointLabel(c: Candidate): string {
  return `${c.technique}/${c.treatment} it ${c.iteration}`;
}

function basePoints(
  candidates: Candidate[],
  state: SessionState,
  axes: AxisPrefs,
  colorObjective: string | null,
): PlotPoint[] {
  const points: PlotPoint[] = [];
  for (let i = 0; i < candidates.length; i++) {
    const c = candidates[i]!;
    const x = plotValue(c, axes.x, state.metric);
    const y = plotValue(c, axes.y, state.metric);
    if (x === null || y === null) continue; // unplottable, not an error
    points.push({
      index: i,
      x,
      y,
      color: colorObjective ? plotValue(c, colorObjective, state.metric) : null,
      label: pointLabel(c),
      feasible: c.total_accuracy >= state.minAccuracy,
      onFrontier: false,
      chosen: false,
      tied: false,
    });
  }
  return points;
}

export function buildView(
  doc: FrontierDocument | null,
  state: SessionState | null,
  axes: AxisPrefs,
): ViewModel {
  if (!doc || !state) return { kind: "empty" };

  const objectives = objectivesFor(state.weights);
  const names = objectives.map((o) => o.name);
  const colorObjective = names.find((n) => n !== axes.x && n !== axes.y) ?? null;

  let result;
  try {
    result = recompute(doc.candidates, state);
  } catch (err) {
    if (err instanceof EmptyFeasibleError) {
      // every point renders dimmed; nothing is marked or highlighted
      return {
        kind: "infeasible",
        message: `No feasible point: ${err.message}`,
        points: basePoints(doc.candidates, state, axes, colorObjective),
        axes,
      };
    }
    if (err instanceof SelectionError) {
      return { kind: "error", message: err.message };
    }
    throw err;
  }

  const frontier = new Set(result.frontier);
  const tiedSet = new Set(result.tied);
  const points = basePoints(doc.candidates, state, axes, colorObjective);
  for (const p of points) {
    p.onFrontier = frontier.has(p.index);
    p.tied = tiedSet.has(p.index);
    p.chosen = p.index === result.chosen;
  }

  const c = doc.candidates[result.chosen]!;
  const gap = c.unfairness[state.metric];
  return {
    kind: "plot",
    points,
    axes,
    colorObjective,
    chosen: result.chosen,
    tied: result.tied,
    frontierSize: result.frontier.length,
    feasibleSize: result.feasible.length,
    summary:
      `${doc.candidates.length} candidates, ${result.feasible.length} feasible, ` +
      `${result.frontier.length} on the frontier. Selected ${pointLabel(c)}: ` +
      `sparsity ${c.sparsity.toFixed(4)}, accuracy ${c.total_accuracy.toFixed(4)}, ` +
      `${state.metric} gap ${gap === null || gap === undefined ? "n/a" : gap.toFixed(4)}` +
      (result.tied.length > 1 ? ` (${result.tied.length} tied)` : ""),
    breakdown: c.per_class_accuracy.map((a, cls) => ({ cls, accuracy: a })),
  };
}
