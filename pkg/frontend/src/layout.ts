/**
 * Fixed layered layout mirroring the quality-model strata: metric at the
 * apex, activities below it, factors next, measures at the bottom.
 */

import type { NodeKind } from "./api.js";
import type { NetView, ViewNode } from "./view.js";

export const LAYER_OF: Record<NodeKind, number> = {
  metric: 0,
  activity: 1,
  factor: 2,
  measure: 3,
};

export interface PlacedNode {
  node: ViewNode;
  x: number;
  y: number;
}

export interface NetLayout {
  width: number;
  height: number;
  boxWidth: number;
  boxHeight: number;
  placed: PlacedNode[];
  byId: Map<string, PlacedNode>;
}

const BOX_WIDTH = 168;
const BOX_HEIGHT = 96;
const H_GAP = 18;
const V_GAP = 72;
const MARGIN = 24;

export function layeredLayout(view: NetView): NetLayout {
  const layers: ViewNode[][] = [[], [], [], []];
  for (const node of view.nodes) {
    const row = layers[LAYER_OF[node.kind]];
    if (row) row.push(node);
  }
  const widest = Math.max(1, ...layers.map((row) => row.length));
  const width = widest * (BOX_WIDTH + H_GAP) - H_GAP + 2 * MARGIN;
  const height = layers.length * (BOX_HEIGHT + V_GAP) - V_GAP + 2 * MARGIN;

  const placed: PlacedNode[] = [];
  const byId = new Map<string, PlacedNode>();
  layers.forEach((row, layerIndex) => {
    const rowWidth = row.length * (BOX_WIDTH + H_GAP) - H_GAP;
    const left = (width - rowWidth) / 2;
    row.forEach((node, column) => {
      const entry: PlacedNode = {
        node,
        x: left + column * (BOX_WIDTH + H_GAP),
        y: MARGIN + layerIndex * (BOX_HEIGHT + V_GAP),
      };
      placed.push(entry);
      byId.set(node.id, entry);
    });
  });
  return {
    width,
    height,
    boxWidth: BOX_WIDTH,
    boxHeight: BOX_HEIGHT,
    placed,
    byId,
  };
}
