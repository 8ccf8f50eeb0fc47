// Cross-component consistency: replaying each fixture's recorded weights and
// constraint client-side must land on exactly the selection the producer CLI
// wrote into the document. Fixtures are regenerated by scripts/make_fixtures.py.

import { describe, expect, it } from "vitest";
import { initialState, objectivesFor, recompute, validateDocument } from "../src/selection";

const modules = import.meta.glob("./fixtures/*.json", { eager: true }) as Record<
  string,
  { default: unknown }
>;
const fixtures = Object.entries(modules)
  .map(([path, mod]) => ({ name: path.split("/").pop()!, raw: mod.default }))
  .sort((a, b) => a.name.localeCompare(b.name));

describe("producer parity over the fixture corpus", () => {
  it("has the full corpus", () => {
    expect(fixtures.length).toBe(50);
  });

  it.each(fixtures)("matches the CLI selection on $name", ({ raw }) => {
    const doc = validateDocument(raw);
    const state = initialState(doc);
    const result = recompute(doc.candidates, state);

    expect(result.chosen).toBe(doc.selection.chosen_index);
    expect(result.tied).toEqual(doc.selection.tied_indices);

    const recorded = doc.candidates
      .map((c, i) => (c.on_frontier ? i : -1))
      .filter((i) => i >= 0);
    expect(result.frontier).toEqual(recorded);

    expect(objectivesFor(state.weights)).toEqual(doc.objectives);
  });

  it("covers both gap metrics and both objective counts", () => {
    const docs = fixtures.map((f) => validateDocument(f.raw));
    const metrics = new Set(docs.map((d) => d.metric));
    const objCounts = new Set(docs.map((d) => d.objectives.length));
    expect(metrics).toEqual(new Set(["max_min", "mean_min"]));
    expect(objCounts).toEqual(new Set([2, 3]));
  });
});
