/**
 * Client-side re-selection over a frontier document.
 *
 * This must agree with the producer bit for bit: constraint filter on total
 * accuracy (order preserved), weak-dominance frontier (duplicates survive),
 * then a weighted sum of direction-normalized raw values with ties resolved
 * to the earliest index within 1e-12 of the maximum.
 */

import type {
  Candidate,
  Direction,
  FrontierDocument,
  GapMetric,
  Objective,
  SelectionResult,
  SessionState,
} from "./types.js";

export const TIE_EPS = 1e-12;

export class SchemaError extends Error {}

export class SelectionError extends Error {}

export class EmptyFeasibleError extends SelectionError {
  constructor(
    readonly minAccuracy: number,
    readonly candidates: number,
  ) {
    super(`no candidate of ${candidates} meets total_accuracy >= ${minAccuracy}`);
  }
}

/** The accuracy objective exists exactly when the weights mention it. */
export function objectivesFor(weights: Record<string, number>): Objective[] {
  const objectives: Objective[] = [
    { name: "sparsity", direction: "maximize" },
    { name: "unfairness", direction: "minimize" },
  ];
  if ("accuracy" in weights) {
    objectives.push({ name: "accuracy", direction: "maximize" });
  }
  return objectives;
}

function objectiveValue(c: Candidate, name: string, metric: GapMetric): number {
  let v: number | null;
  if (name === "sparsity") {
    v = c.sparsity;
  } else if (name === "unfairness") {
    v = c.unfairness[metric] ?? null;
  } else if (name === "accuracy") {
    v = c.total_accuracy;
  } else {
    throw new SelectionError(`unknown objective ${name}`);
  }
  if (v === null || !Number.isFinite(v)) {
    throw new SelectionError(
      `objective ${name} is undefined on ${c.technique}/${c.treatment} iteration ${c.iteration}`,
    );
  }
  return v;
}

/** Rows of direction-normalized objective values, higher is better. */
function signedRows(
  candidates: Candidate[],
  objectives: Objective[],
  metric: GapMetric,
): number[][] {
  return candidates.map((c) =>
    objectives.map((o) => {
      const sign = o.direction === "maximize" ? 1 : -1;
      return sign * objectiveValue(c, o.name, metric);
    }),
  );
}

export function frontierMask(rows: number[][]): boolean[] {
  const n = rows.length;
  const keep = new Array<boolean>(n).fill(true);
  for (let i = 0; i < n; i++) {
    const a = rows[i]!;
    for (let j = 0; j < n; j++) {
      if (j === i) continue;
      const b = rows[j]!;
      let ge = true;
      let gt = false;
      for (let k = 0; k < a.length; k++) {
        if (b[k]! < a[k]!) {
          ge = false;
          break;
        }
        if (b[k]! > a[k]!) gt = true;
      }
      if (ge && gt) {
        keep[i] = false;
        break;
      }
    }
  }
  return keep;
}

/**
 * Filter, frontier, scalarize. All returned indices refer to `candidates`.
 * Throws EmptyFeasibleError when nothing passes the accuracy floor.
 */
export function recompute(
  candidates: Candidate[],
  state: SessionState,
): SelectionResult {
  const objectives = objectivesFor(state.weights);
  if (!Object.values(state.weights).some((w) => w !== 0)) {
    throw new SelectionError("at least one weight must be nonzero");
  }

  const feasible: number[] = [];
  for (let i = 0; i < candidates.length; i++) {
    if (candidates[i]!.total_accuracy >= state.minAccuracy) feasible.push(i);
  }
  if (!feasible.length) {
    throw new EmptyFeasibleError(state.minAccuracy, candidates.length);
  }

  const rows = signedRows(feasible.map((i) => candidates[i]!), objectives, state.metric);
  const mask = frontierMask(rows);
  // the producer validates weight names only at scalarization time
  const known = new Set(objectives.map((o) => o.name));
  const unknown = Object.keys(state.weights).filter((k) => !known.has(k));
  if (unknown.length) {
    throw new SelectionError(`weights name unknown objectives: ${unknown.sort()}`);
  }
  const frontier: number[] = [];
  const utilities: number[] = [];
  for (let i = 0; i < feasible.length; i++) {
    if (!mask[i]) continue;
    frontier.push(feasible[i]!);
    let u = 0;
    for (let k = 0; k < objectives.length; k++) {
      u += rows[i]![k]! * (state.weights[objectives[k]!.name] ?? 0);
    }
    utilities.push(u);
  }
  const best = Math.max(...utilities);
  const tied: number[] = [];
  for (let i = 0; i < utilities.length; i++) {
    if (best - utilities[i]! <= TIE_EPS) tied.push(frontier[i]!);
  }
  return { feasible, frontier, chosen: tied[0]!, tied };
}

// ---------------------------------------------------------------------------
// document validation

const GAP_METRICS: GapMetric[] = ["max_min", "mean_min"];
const DIRECTIONS: Direction[] = ["minimize", "maximize"];

function fail(path: string, want: string): never {
  throw new SchemaError(`${path}: expected ${want}`);
}

function asRecord(v: unknown, path: string): Record<string, unknown> {
  if (typeof v !== "object" || v === null || Array.isArray(v)) fail(path, "an object");
  return v as Record<string, unknown>;
}

function asArray(v: unknown, path: string): unknown[] {
  if (!Array.isArray(v)) fail(path, "an array");
  return v;
}

function asFinite(v: unknown, path: string): number {
  if (typeof v !== "number" || !Number.isFinite(v)) fail(path, "a finite number");
  return v;
}

function asString(v: unknown, path: string): string {
  if (typeof v !== "string") fail(path, "a string");
  return v;
}

function asNullableNumber(v: unknown, path: string): number | null {
  if (v === null) return null;
  if (typeof v !== "number" || !Number.isFinite(v)) fail(path, "a finite number or null");
  return v;
}

function validateCandidate(raw: unknown, path: string): Candidate {
  const r = asRecord(raw, path);
  const iteration = asFinite(r.iteration, `${path}.iteration`);
  if (!Number.isInteger(iteration)) fail(`${path}.iteration`, "an integer");
  const per = asArray(r.per_class_accuracy, `${path}.per_class_accuracy`).map(
    (v, i) => asNullableNumber(v, `${path}.per_class_accuracy[${i}]`),
  );
  const gaps = asRecord(r.unfairness, `${path}.unfairness`);
  const unfairness: Record<string, number | null> = {};
  for (const [k, v] of Object.entries(gaps)) {
    unfairness[k] = asNullableNumber(v, `${path}.unfairness.${k}`);
  }
  if (typeof r.on_frontier !== "boolean") fail(`${path}.on_frontier`, "a boolean");
  return {
    technique: asString(r.technique, `${path}.technique`),
    treatment: asString(r.treatment, `${path}.treatment`),
    iteration,
    sparsity: asFinite(r.sparsity, `${path}.sparsity`),
    total_accuracy: asFinite(r.total_accuracy, `${path}.total_accuracy`),
    per_class_accuracy: per,
    unfairness,
    on_frontier: r.on_frontier,
  };
}

/** Parse-and-check a frontier export. Throws SchemaError naming the bad path. */
export function validateDocument(raw: unknown): FrontierDocument {
  const doc = asRecord(raw, "document");

  const objectives = asArray(doc.objectives, "objectives").map((o, i) => {
    const r = asRecord(o, `objectives[${i}]`);
    const direction = asString(r.direction, `objectives[${i}].direction`);
    if (!DIRECTIONS.includes(direction as Direction)) {
      fail(`objectives[${i}].direction`, "minimize or maximize");
    }
    return { name: asString(r.name, `objectives[${i}].name`), direction: direction as Direction };
  });
  if (objectives.length < 2) fail("objectives", "at least two objectives");
  const names = objectives.map((o) => o.name);
  if (new Set(names).size !== names.length) fail("objectives", "unique names");

  const constraint = asRecord(doc.constraint, "constraint");
  const minAccuracy = asFinite(constraint.min_accuracy, "constraint.min_accuracy");

  let metric: GapMetric = "max_min";
  if (doc.metric !== undefined) {
    const m = asString(doc.metric, "metric");
    if (!GAP_METRICS.includes(m as GapMetric)) fail("metric", "max_min or mean_min");
    metric = m as GapMetric;
  }

  const candidates = asArray(doc.candidates, "candidates").map((c, i) =>
    validateCandidate(c, `candidates[${i}]`),
  );

  const selection = asRecord(doc.selection, "selection");
  const weights: Record<string, number> = {};
  for (const [k, v] of Object.entries(asRecord(selection.weights, "selection.weights"))) {
    weights[k] = asFinite(v, `selection.weights.${k}`);
  }
  const chosen = asFinite(selection.chosen_index, "selection.chosen_index");
  if (!Number.isInteger(chosen) || chosen < 0 || chosen >= candidates.length) {
    fail("selection.chosen_index", "a candidate index");
  }
  const tied = asArray(selection.tied_indices ?? [], "selection.tied_indices").map((v, i) => {
    const t = asFinite(v, `selection.tied_indices[${i}]`);
    if (!Number.isInteger(t) || t < 0 || t >= candidates.length) {
      fail(`selection.tied_indices[${i}]`, "a candidate index");
    }
    return t;
  });

  return {
    objectives,
    constraint: { min_accuracy: minAccuracy },
    metric,
    candidates,
    selection: { weights, chosen_index: chosen, tied_indices: tied },
  };
}

/** Session state seeded from a freshly loaded document. */
export function initialState(doc: FrontierDocument): SessionState {
  return {
    weights: { ...doc.selection.weights },
    minAccuracy: doc.constraint.min_accuracy,
    metric: doc.metric,
    chosen: doc.selection.chosen_index,
  };
}
