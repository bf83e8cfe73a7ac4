/**
 * SVG/DOM rendering of the layered net plus the density panel.
 *
 * Bars scale probabilities straight from the view model; evidence nodes
 * get a state badge, overridden nodes additionally a clear button.
 */

import { layeredLayout } from "./layout.js";
import type { NetLayout, PlacedNode } from "./layout.js";
import type { NetView, ViewNode } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Handlers {
  onSetState(node: string, state: string): void;
  onMask(node: string): void;
  onClearNode(node: string): void;
  onClearAll(): void;
}

export function renderApp(root: HTMLElement, view: NetView | null,
                          errorBanner: string | null, toast: string | null,
                          handlers: Handlers): void {
  root.replaceChildren();

  const header = el("header", "header");
  const title = el("div", "title");
  title.textContent = view
    ? `What-if explorer: ${view.system}`
    : "What-if explorer";
  header.appendChild(title);

  const density = el("div", "density-panel");
  density.id = "density-panel";
  if (view) {
    density.innerHTML =
      `<span class="label">vulnerability density</span>` +
      `<span class="value" id="density-mean">${formatDensity(view.densityMean)}</span>` +
      `<span class="sd" id="density-sd">&plusmn; ${formatDensity(view.densitySd)}</span>`;
  }
  header.appendChild(density);

  const reset = el("button", "reset") as HTMLButtonElement;
  reset.id = "clear-all";
  reset.textContent = view && view.overrideCount > 0
    ? `clear ${view.overrideCount} override(s)`
    : "no overrides";
  reset.disabled = !view || view.overrideCount === 0;
  reset.addEventListener("click", () => handlers.onClearAll());
  header.appendChild(reset);
  root.appendChild(header);

  if (errorBanner) {
    const banner = el("div", "banner");
    banner.id = "error-banner";
    banner.textContent = errorBanner;
    root.appendChild(banner);
  }
  if (toast) {
    const note = el("div", "toast");
    note.id = "toast";
    note.textContent = toast;
    root.appendChild(note);
  }

  if (!view) return;
  const layout = layeredLayout(view);
  root.appendChild(renderSvg(view, layout, handlers));
}

function renderSvg(view: NetView, layout: NetLayout,
                   handlers: Handlers): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.setAttribute("width", String(layout.width));
  svg.id = "net";

  for (const [parent, child] of view.edges) {
    const from = layout.byId.get(parent);
    const to = layout.byId.get(child);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x + layout.boxWidth / 2));
    line.setAttribute("y1", String(from.y + layout.boxHeight));
    line.setAttribute("x2", String(to.x + layout.boxWidth / 2));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", "edge");
    svg.appendChild(line);
  }
  for (const placed of layout.placed) {
    svg.appendChild(renderNode(placed, layout, handlers));
  }
  return svg;
}

function renderNode(placed: PlacedNode, layout: NetLayout,
                    handlers: Handlers): SVGGElement {
  const { node, x, y } = placed;
  const group = document.createElementNS(SVG_NS, "g");
  group.setAttribute("transform", `translate(${x}, ${y})`);
  group.setAttribute("class",
    `node kind-${node.kind}` +
    (node.evidence !== null ? " observed" : "") +
    (node.overridden ? " overridden" : ""));
  group.dataset.nodeId = node.id;

  const box = document.createElementNS(SVG_NS, "rect");
  box.setAttribute("width", String(layout.boxWidth));
  box.setAttribute("height", String(layout.boxHeight));
  box.setAttribute("rx", "6");
  box.setAttribute("class", "box");
  group.appendChild(box);

  const name = document.createElementNS(SVG_NS, "text");
  name.setAttribute("x", "8");
  name.setAttribute("y", "16");
  name.setAttribute("class", "name");
  name.textContent = truncate(node.name, 24);
  const hint = document.createElementNS(SVG_NS, "title");
  hint.textContent = `${node.name} (${node.kind})`;
  name.appendChild(hint);
  group.appendChild(name);

  if (node.kind === "metric") {
    const stats = document.createElementNS(SVG_NS, "text");
    stats.setAttribute("x", "8");
    stats.setAttribute("y", "42");
    stats.setAttribute("class", "stats");
    stats.textContent =
      `${formatDensity(node.mean)} ± ${formatDensity(node.sd)}`;
    group.appendChild(stats);
    group.appendChild(renderSparkline(node, layout));
  } else {
    group.appendChild(renderBars(node, layout, handlers));
  }

  if (node.evidence !== null) {
    const badge = document.createElementNS(SVG_NS, "text");
    badge.setAttribute("x", String(layout.boxWidth - 8));
    badge.setAttribute("y", "16");
    badge.setAttribute("text-anchor", "end");
    badge.setAttribute("class", "evidence-badge");
    badge.textContent = `= ${node.evidence}`;
    group.appendChild(badge);
  }
  if (node.overridden) {
    const clear = document.createElementNS(SVG_NS, "text");
    clear.setAttribute("x", String(layout.boxWidth - 8));
    clear.setAttribute("y", String(layout.boxHeight - 8));
    clear.setAttribute("text-anchor", "end");
    clear.setAttribute("class", "clear-node");
    clear.textContent = "↺ base";
    clear.addEventListener("click", (event) => {
      event.stopPropagation();
      handlers.onClearNode(node.id);
    });
    group.appendChild(clear);
  } else if (node.evidence !== null) {
    const mask = document.createElementNS(SVG_NS, "text");
    mask.setAttribute("x", String(layout.boxWidth - 8));
    mask.setAttribute("y", String(layout.boxHeight - 8));
    mask.setAttribute("text-anchor", "end");
    mask.setAttribute("class", "clear-node");
    mask.textContent = "× hide";
    mask.addEventListener("click", (event) => {
      event.stopPropagation();
      handlers.onMask(node.id);
    });
    group.appendChild(mask);
  }
  return group;
}

function renderBars(node: ViewNode, layout: NetLayout,
                    handlers: Handlers): SVGGElement {
  const bars = document.createElementNS(SVG_NS, "g");
  const top = 26;
  const rowHeight = (layout.boxHeight - top - 8) / node.states.length;
  const barLeft = 52;
  const barSpan = layout.boxWidth - barLeft - 36;
  node.states.forEach((state, index) => {
    const probability = node.probabilities[index] ?? 0;
    const yMid = top + index * rowHeight + rowHeight / 2;

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", "8");
    label.setAttribute("y", String(yMid + 3));
    label.setAttribute("class", "state-label");
    label.textContent = state;
    bars.appendChild(label);

    const track = document.createElementNS(SVG_NS, "rect");
    track.setAttribute("x", String(barLeft));
    track.setAttribute("y", String(yMid - 5));
    track.setAttribute("width", String(barSpan));
    track.setAttribute("height", "10");
    track.setAttribute("class", "bar-track");
    bars.appendChild(track);

    const fill = document.createElementNS(SVG_NS, "rect");
    fill.setAttribute("x", String(barLeft));
    fill.setAttribute("y", String(yMid - 5));
    fill.setAttribute("width", String(barSpan * probability));
    fill.setAttribute("height", "10");
    fill.setAttribute("class", "bar-fill");
    bars.appendChild(fill);

    const value = document.createElementNS(SVG_NS, "text");
    value.setAttribute("x", String(layout.boxWidth - 8));
    value.setAttribute("y", String(yMid + 3));
    value.setAttribute("text-anchor", "end");
    value.setAttribute("class", "bar-value");
    value.textContent = probability.toFixed(2);
    bars.appendChild(value);

    for (const target of [track, fill, label]) {
      target.addEventListener("click", () =>
        handlers.onSetState(node.id, state));
    }
  });
  return bars;
}

function renderSparkline(node: ViewNode, layout: NetLayout): SVGGElement {
  const spark = document.createElementNS(SVG_NS, "g");
  const top = 52;
  const heightSpan = layout.boxHeight - top - 8;
  const widthSpan = layout.boxWidth - 16;
  const peak = Math.max(...node.probabilities, 1e-12);
  const step = widthSpan / node.probabilities.length;
  node.probabilities.forEach((probability, index) => {
    const bar = document.createElementNS(SVG_NS, "rect");
    const height = (probability / peak) * heightSpan;
    bar.setAttribute("x", String(8 + index * step));
    bar.setAttribute("y", String(top + heightSpan - height));
    bar.setAttribute("width", String(Math.max(step - 1, 1)));
    bar.setAttribute("height", String(height));
    bar.setAttribute("class", "spark");
    spark.appendChild(bar);
  });
  return spark;
}

function formatDensity(value: number | null): string {
  return value === null ? "n/a" : value.toFixed(4);
}

function truncate(text: string, max: number): string {
  return text.length <= max ? text : text.slice(0, max - 1) + "…";
}

function el(tag: string, className: string): HTMLElement {
  const element = document.createElement(tag);
  element.className = className;
  return element;
}
