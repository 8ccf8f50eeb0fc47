import { describe, expect, it } from "vitest";
import {
  EmptyFeasibleError,
  SchemaError,
  SelectionError,
  initialState,
  objectivesFor,
  recompute,
  validateDocument,
} from "../src/selection";
import type { Candidate, SessionState } from "../src/types";

function candidate(
  sparsity: number,
  gap: number,
  accuracy = 0.95,
  extra: Partial<Candidate> = {},
): Candidate {
  return {
    technique: "l1_unstructured",
    treatment: "rewind",
    iteration: 0,
    sparsity,
    total_accuracy: accuracy,
    per_class_accuracy: [accuracy, accuracy],
    unfairness: { max_min: gap, mean_min: gap / 2 },
    on_frontier: false,
    ...extra,
  };
}

function state(overrides: Partial<SessionState> = {}): SessionState {
  return {
    weights: { sparsity: 1, unfairness: 1 },
    minAccuracy: 0,
    metric: "max_min",
    chosen: null,
    ...overrides,
  };
}

// deterministic PRNG for the sweep test
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("recompute", () => {
  it("prefers the fairer point when unfairness carries the weight", () => {
    const pts = [candidate(0.68, 0.001), candidate(0.9, 0.01)];
    const result = recompute(pts, state({ weights: { sparsity: 1, unfairness: 100 } }));
    expect(result.chosen).toBe(0);
    expect(result.frontier).toEqual([0, 1]);
  });

  it("raises the empty-feasible error above every candidate", () => {
    const pts = [candidate(0.5, 0.1, 0.9), candidate(0.6, 0.2, 0.95)];
    expect(() => recompute(pts, state({ minAccuracy: 1.01 }))).toThrow(EmptyFeasibleError);
    try {
      recompute(pts, state({ minAccuracy: 1.01 }));
    } catch (err) {
      expect((err as EmptyFeasibleError).candidates).toBe(2);
      expect((err as EmptyFeasibleError).minAccuracy).toBe(1.01);
    }
  });

  it("keeps the accuracy floor inclusive", () => {
    const pts = [candidate(0.5, 0.1, 0.9)];
    expect(recompute(pts, state({ minAccuracy: 0.9 })).feasible).toEqual([0]);
  });

  it("keeps duplicates together on the frontier", () => {
    const pts = [candidate(0.5, 0.1), candidate(0.5, 0.1), candidate(0.4, 0.2)];
    expect(recompute(pts, state()).frontier).toEqual([0, 1]);
  });

  it("drops dominated candidates", () => {
    // B dominates both others: more sparse and fairer
    const pts = [candidate(0.5, 0.1), candidate(0.6, 0.05), candidate(0.4, 0.2)];
    const result = recompute(pts, state());
    expect(result.frontier).toEqual([1]);
    expect(result.chosen).toBe(1);
  });

  it("reports every index within the tie tolerance, earliest first", () => {
    const pts = [
      candidate(0.5, 0.1),
      candidate(0.6, 0.3),
      candidate(0.5 + 1e-13, 0.1 + 1e-13),
    ];
    const result = recompute(pts, state());
    expect(result.chosen).toBe(0);
    expect(result.tied).toEqual([0, 2]);
  });

  it("maps indices back through the constraint filter", () => {
    const pts = [
      candidate(0.9, 0.01, 0.5), // dominant but infeasible
      candidate(0.5, 0.1, 0.95),
      candidate(0.6, 0.05, 0.95),
    ];
    const result = recompute(pts, state({ minAccuracy: 0.9 }));
    expect(result.feasible).toEqual([1, 2]);
    expect(result.frontier).toEqual([2]);
    expect(result.chosen).toBe(2);
  });

  it("rejects all-zero weights", () => {
    expect(() =>
      recompute([candidate(0.5, 0.1)], state({ weights: { sparsity: 0, unfairness: 0 } })),
    ).toThrow(/nonzero/);
  });

  it("rejects weights naming unknown objectives", () => {
    expect(() =>
      recompute([candidate(0.5, 0.1)], state({ weights: { sparsity: 1, latency: 2 } })),
    ).toThrow(SelectionError);
  });

  it("switches the unfairness objective with the metric", () => {
    // under max_min, a is fairer; under mean_min, b is (gaps chosen by hand)
    const a = candidate(0.5, 0, 0.95, { unfairness: { max_min: 0.1, mean_min: 0.09 } });
    const b = candidate(0.5, 0, 0.95, { unfairness: { max_min: 0.2, mean_min: 0.01 } });
    const w = { weights: { sparsity: 0, unfairness: 1 } };
    expect(recompute([a, b], state({ ...w, metric: "max_min" })).chosen).toBe(0);
    expect(recompute([a, b], state({ ...w, metric: "mean_min" })).chosen).toBe(1);
  });

  it("fails loudly when a feasible candidate lacks the gap value", () => {
    const broken = candidate(0.5, 0.1, 0.95, { unfairness: { mean_min: 0.05 } });
    expect(() => recompute([broken], state())).toThrow(/undefined/);
  });

  it("ignores missing gaps on infeasible candidates", () => {
    const broken = candidate(0.9, 0, 0.5, { unfairness: {} });
    const fine = candidate(0.5, 0.1, 0.95);
    expect(recompute([broken, fine], state({ minAccuracy: 0.9 })).chosen).toBe(1);
  });

  it("includes accuracy as an objective exactly when weighted", () => {
    expect(objectivesFor({ sparsity: 1, unfairness: 1 }).map((o) => o.name)).toEqual([
      "sparsity",
      "unfairness",
    ]);
    expect(objectivesFor({ sparsity: 1, unfairness: 1, accuracy: 0 }).map((o) => o.name)).toEqual(
      ["sparsity", "unfairness", "accuracy"],
    );
    // a zero accuracy weight still widens dominance: b no longer dominates a
    const a = candidate(0.5, 0.1, 0.99);
    const b = candidate(0.6, 0.05, 0.9);
    expect(recompute([a, b], state()).frontier).toEqual([1]);
    expect(
      recompute([a, b], state({ weights: { sparsity: 1, unfairness: 1, accuracy: 0 } })).frontier,
    ).toEqual([0, 1]);
  });

  it("always chooses a frontier member across 100 random weight settings", () => {
    const rnd = mulberry32(20);
    const pts = Array.from({ length: 40 }, () =>
      candidate(rnd(), rnd() * 0.5, 0.8 + rnd() * 0.2),
    );
    for (let trial = 0; trial < 100; trial++) {
      const weights: Record<string, number> = {
        sparsity: rnd() * 10,
        unfairness: rnd() * 10,
      };
      if (trial % 3 === 0) weights.accuracy = rnd() * 10;
      if (!Object.values(weights).some((w) => w !== 0)) weights.sparsity = 1;
      const result = recompute(pts, state({ weights, minAccuracy: 0.85 }));
      expect(result.frontier).toContain(result.chosen);
      expect(result.tied[0]).toBe(result.chosen);
      for (const t of result.tied) expect(result.frontier).toContain(t);
    }
  });
});

describe("validateDocument", () => {
  const good = {
    objectives: [
      { name: "sparsity", direction: "maximize" },
      { name: "unfairness", direction: "minimize" },
    ],
    constraint: { min_accuracy: 0.9 },
    metric: "max_min",
    candidates: [{ ...candidate(0.5, 0.1), on_frontier: true }],
    selection: { weights: { sparsity: 1, unfairness: 1 }, chosen_index: 0, tied_indices: [0] },
  };

  it("accepts a well-formed document", () => {
    const doc = validateDocument(good);
    expect(doc.candidates.length).toBe(1);
    expect(doc.metric).toBe("max_min");
  });

  it("rejects a missing candidates key", () => {
    const { candidates: _, ...bad } = good;
    expect(() => validateDocument(bad)).toThrow(SchemaError);
    expect(() => validateDocument(bad)).toThrow(/candidates/);
  });

  it("names the offending path", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.candidates[0].sparsity = "very";
    expect(() => validateDocument(bad)).toThrow(/candidates\[0\].sparsity/);
  });

  it("rejects non-finite numbers", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.constraint.min_accuracy = null;
    expect(() => validateDocument(bad)).toThrow(/constraint.min_accuracy/);
  });

  it("rejects unknown objective directions", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.objectives[0].direction = "upward";
    expect(() => validateDocument(bad)).toThrow(/direction/);
  });

  it("rejects fewer than two objectives", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.objectives = [bad.objectives[0]];
    expect(() => validateDocument(bad)).toThrow(/two objectives/);
  });

  it("rejects an out-of-range chosen index", () => {
    const bad = JSON.parse(JSON.stringify(good));
    bad.selection.chosen_index = 5;
    expect(() => validateDocument(bad)).toThrow(/chosen_index/);
  });

  it("allows null per-class accuracies and gaps", () => {
    const ok = JSON.parse(JSON.stringify(good));
    ok.candidates[0].per_class_accuracy = [0.9, null];
    ok.candidates[0].unfairness = { max_min: null, mean_min: null };
    expect(validateDocument(ok).candidates[0]!.per_class_accuracy[1]).toBeNull();
  });

  it("rejects a non-array document", () => {
    expect(() => validateDocument([1, 2])).toThrow(SchemaError);
    expect(() => validateDocument("frontier")).toThrow(SchemaError);
    expect(() => validateDocument(null)).toThrow(SchemaError);
  });

  it("defaults the metric when absent", () => {
    const { metric: _, ...rest } = good;
    expect(validateDocument(rest).metric).toBe("max_min");
  });
});

describe("initialState", () => {
  it("copies the document weights rather than aliasing them", () => {
    const doc = validateDocument({
      objectives: [
        { name: "sparsity", direction: "maximize" },
        { name: "unfairness", direction: "minimize" },
      ],
      constraint: { min_accuracy: 0.9 },
      candidates: [{ ...candidate(0.5, 0.1), on_frontier: true }],
      selection: { weights: { sparsity: 2, unfairness: 3 }, chosen_index: 0, tied_indices: [0] },
    });
    const s = initialState(doc);
    s.weights.sparsity = 99;
    expect(doc.selection.weights.sparsity).toBe(2);
    expect(s.minAccuracy).toBe(0.9);
    expect(s.chosen).toBe(0);
  });
});
