/**
 * Application state machine, DOM-free so it can be tested against
 * recorded API fixtures. Optimistic updates are deliberately absent:
 * every change waits for the service response before the view moves.
 */

import { ApiClient, ApiError } from "./api.js";
import type { NetResponse } from "./api.js";
import { buildNetView } from "./view.js";
import type { NetView } from "./view.js";

export class WhatIfApp {
  view: NetView | null = null;
  /** fatal fetch problem; the stale view stays on screen next to it */
  errorBanner: string | null = null;
  /** transient rejection (e.g. inconsistent evidence); view unchanged */
  toast: string | null = null;

  private net: NetResponse | null = null;

  constructor(private readonly client: ApiClient) {}

  async load(): Promise<void> {
    try {
      const net = await this.client.fetchNet();
      const posteriors = await this.client.fetchPosteriors();
      this.net = net;
      this.view = buildNetView(net, posteriors);
      this.errorBanner = null;
    } catch (err) {
      this.errorBanner = describeError(err);
    }
  }

  async setObservation(node: string, state: string | null): Promise<void> {
    await this.apply(() => this.client.setObservation(node, state));
  }

  async clearObservation(node: string): Promise<void> {
    await this.apply(() => this.client.clearObservation(node));
  }

  async clearAll(): Promise<void> {
    await this.apply(() => this.client.clearAll());
  }

  private async apply(
    change: () => Promise<Parameters<typeof buildNetView>[1]>,
  ): Promise<void> {
    if (!this.net) return;
    this.toast = null;
    try {
      const posteriors = await change();
      this.view = buildNetView(this.net, posteriors);
      this.errorBanner = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.toast = err.message;
      } else {
        this.errorBanner = describeError(err);
      }
    }
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return `service unreachable: ${err.message}`;
  return String(err);
}
