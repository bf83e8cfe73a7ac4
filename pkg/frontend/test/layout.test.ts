import { describe, expect, it } from "vitest";

import { layeredLayout } from "../src/layout.js";
import { buildNetView } from "../src/view.js";
import { BASE, NET } from "./fixtures.js";

describe("layeredLayout", () => {
  const layout = layeredLayout(buildNetView(NET, BASE));

  it("places every node once", () => {
    expect(layout.placed).toHaveLength(20);
    expect(layout.byId.size).toBe(20);
  });

  it("stacks layers metric, activities, factors, measures top-down", () => {
    const yOf = (kind: string) =>
      new Set(layout.placed.filter((p) => p.node.kind === kind)
                           .map((p) => p.y));
    for (const kind of ["metric", "activity", "factor", "measure"]) {
      expect(yOf(kind).size).toBe(1);  // one fixed row per kind
    }
    const [metricY] = yOf("metric");
    const [activityY] = yOf("activity");
    const [factorY] = yOf("factor");
    const [measureY] = yOf("measure");
    expect(metricY!).toBeLessThan(activityY!);
    expect(activityY!).toBeLessThan(factorY!);
    expect(factorY!).toBeLessThan(measureY!);
  });

  it("keeps nodes inside the canvas", () => {
    for (const placed of layout.placed) {
      expect(placed.x).toBeGreaterThanOrEqual(0);
      expect(placed.x + layout.boxWidth).toBeLessThanOrEqual(layout.width);
      expect(placed.y + layout.boxHeight).toBeLessThanOrEqual(layout.height);
    }
  });
});
