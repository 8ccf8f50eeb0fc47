/** Shapes of the frontier JSON export and of the explorer's session state. */

export type Direction = "minimize" | "maximize";
export type GapMetric = "max_min" | "mean_min";

export interface Objective {
  name: string;
  direction: Direction;
}

export interface Candidate {
  technique: string;
  treatment: string;
  iteration: number;
  sparsity: number;
  total_accuracy: number;
  /** null where a class had no evaluation examples */
  per_class_accuracy: (number | null)[];
  unfairness: Record<string, number | null>;
  on_frontier: boolean;
}

export interface FrontierDocument {
  objectives: Objective[];
  constraint: { min_accuracy: number };
  metric: GapMetric;
  candidates: Candidate[];
  selection: {
    weights: Record<string, number>;
    chosen_index: number;
    tied_indices: number[];
  };
}

/**
 * Everything the UI derives its render from. Recomputed wholesale on each
 * interaction; `chosen` is null only in the empty-feasible state.
 */
export interface SessionState {
  weights: Record<string, number>;
  minAccuracy: number;
  metric: GapMetric;
  chosen: number | null;
}

export interface SelectionResult {
  feasible: number[];
  frontier: number[];
  chosen: number;
  tied: number[];
}
