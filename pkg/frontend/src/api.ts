/**
 * Typed client for the what-if service JSON API.
 *
 * The UI never derives probabilities itself: every number displayed
 * anywhere comes verbatim from one of these response payloads.
 */

export type NodeKind = "activity" | "factor" | "measure" | "metric";

export interface NetNode {
  id: string;
  kind: NodeKind;
  name: string;
  states: string[];
  parents: string[];
}

export interface NetResponse {
  nodes: NetNode[];
  system: string;
}

export interface NodePosterior {
  states: string[];
  probabilities: number[];
  mean: number | null;
  sd: number | null;
  /** state label this node is observed in, or null when unobserved */
  evidence: string | null;
}

export interface PosteriorsResponse {
  posteriors: Record<string, NodePosterior>;
  densityMean: number;
  densitySd: number;
  /** active what-if overrides: state label, or null for a masked base observation */
  overrides: Record<string, string | null>;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  fetchNet(): Promise<NetResponse> {
    return this.request("/api/net");
  }

  fetchPosteriors(): Promise<PosteriorsResponse> {
    return this.request("/api/posteriors");
  }

  /** Override a node's evidence; a null state masks its base observation. */
  setObservation(node: string, state: string | null): Promise<PosteriorsResponse> {
    return this.request("/api/observations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ node, state }),
    });
  }

  /** Drop one node's override, falling back to the base observation. */
  clearObservation(node: string): Promise<PosteriorsResponse> {
    return this.request(
      `/api/observations?node=${encodeURIComponent(node)}`,
      { method: "DELETE" },
    );
  }

  /** Drop every override, restoring the base assessment. */
  clearAll(): Promise<PosteriorsResponse> {
    return this.request("/api/observations", { method: "DELETE" });
  }
}
