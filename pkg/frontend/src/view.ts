/**
 * View model: the net topology merged with the latest posterior payload.
 *
 * Assembly is pure data plumbing; probability vectors are carried through
 * untouched so the display always mirrors the service response exactly.
 */

import type { NetNode, NetResponse, PosteriorsResponse } from "./api.js";

export interface ViewNode extends NetNode {
  probabilities: number[];
  mean: number | null;
  sd: number | null;
  evidence: string | null;
  /** true when a what-if override (including a mask) is active here */
  overridden: boolean;
}

export interface NetView {
  system: string;
  nodes: ViewNode[];
  /** directed edges, parent id -> child id */
  edges: Array<[string, string]>;
  densityMean: number;
  densitySd: number;
  overrideCount: number;
}

export function buildNetView(net: NetResponse,
                             posteriors: PosteriorsResponse): NetView {
  const nodes: ViewNode[] = net.nodes.map((node) => {
    const posterior = posteriors.posteriors[node.id];
    if (!posterior) {
      throw new Error(`service posteriors are missing node ${node.id}`);
    }
    return {
      ...node,
      probabilities: posterior.probabilities,
      mean: posterior.mean,
      sd: posterior.sd,
      evidence: posterior.evidence,
      overridden: node.id in posteriors.overrides,
    };
  });
  const edges: Array<[string, string]> = [];
  for (const node of net.nodes) {
    for (const parent of node.parents) {
      edges.push([parent, node.id]);
    }
  }
  return {
    system: net.system,
    nodes,
    edges,
    densityMean: posteriors.densityMean,
    densitySd: posteriors.densitySd,
    overrideCount: Object.keys(posteriors.overrides).length,
  };
}
