/** Browser bootstrap: wires the app state to the DOM renderer. */

import { ApiClient } from "./api.js";
import { WhatIfApp } from "./app.js";
import { renderApp } from "./render.js";
import type { Handlers } from "./render.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}

const app = new WhatIfApp(new ApiClient());

function repaint(): void {
  renderApp(root as HTMLElement, app.view, app.errorBanner, app.toast,
            handlers);
}

const handlers: Handlers = {
  onSetState: (node, state) =>
    void app.setObservation(node, state).then(repaint),
  onMask: (node) => void app.setObservation(node, null).then(repaint),
  onClearNode: (node) => void app.clearObservation(node).then(repaint),
  onClearAll: () => void app.clearAll().then(repaint),
};

void app.load().then(repaint);
