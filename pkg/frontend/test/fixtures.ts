/** Recorded service responses (PHP Shop bundle) + a fetch stub. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { NetResponse, PosteriorsResponse } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

function recorded<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

export const NET = recorded<NetResponse>("net.json");
export const BASE = recorded<PosteriorsResponse>("posteriors.base.json");
export const SQLI_YES = recorded<PosteriorsResponse>("posteriors.sqli-yes.json");
export const CLEARED = recorded<PosteriorsResponse>("posteriors.cleared.json");
export const CONFLICT = recorded<{ detail: string }>("error.conflict.json");

type Route = (init?: RequestInit) => Response | Promise<Response>;

export function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/**
 * fetch stub driven by recorded payloads; tracks calls so tests can
 * assert the number of round-trips a UI action needs.
 */
export class RecordedService {
  calls: Array<{ method: string; url: string; body: unknown }> = [];
  private routes = new Map<string, Route>();

  on(method: string, url: string, route: Route): this {
    this.routes.set(`${method} ${url}`, route);
    return this;
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    this.calls.push({
      method,
      url,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    const route = this.routes.get(`${method} ${url}`);
    if (!route) {
      throw new Error(`no recorded response for ${method} ${url}`);
    }
    return route(init);
  };
}

/** Stub covering the happy-path what-if session on the PHP Shop bundle. */
export function phpShopService(): RecordedService {
  return new RecordedService()
    .on("GET", "/api/net", () => json(NET))
    .on("GET", "/api/posteriors", () => json(BASE))
    .on("POST", "/api/observations", (init) => {
      const body = JSON.parse(String(init?.body)) as {
        node: string;
        state: string | null;
      };
      if (body.node === "m.sql-injection" && body.state === "yes") {
        return json(SQLI_YES);
      }
      throw new Error(`no recording for override ${JSON.stringify(body)}`);
    })
    .on("DELETE", "/api/observations", () => json(CLEARED));
}
