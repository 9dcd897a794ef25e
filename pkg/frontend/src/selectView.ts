/**
 * Select view: per-dimension value lines over a window of fixed-width
 * token boxes, phrase and context selection, threshold control.
 *
 * The view model is pure: it lays out exactly the vectors the API
 * returned.  Dimension lines are decimated for display when there are
 * more than MAX_LINES of them; query math always stays server-side.
 */

import type { SelectResponse, TokenRecord } from "./api.js";
import type { ViewState } from "./state.js";
import { canNavigate, contextSpan } from "./state.js";

export const BOX_WIDTH = 72;
export const PLOT_HEIGHT = 180;
export const MAX_LINES = 64;
const LABEL_CHARS = 11;

export interface TokenBox {
  position: number;
  label: string;
  squeezed: boolean;
  isVague: boolean;
  isEos: boolean;
  inPhrase: boolean;
  inContext: boolean;
  x: number;
}

export interface DimensionLine {
  dim: number;
  inQuery: boolean;
  points: { x: number; y: number }[];
}

export interface SelectViewModel {
  boxes: TokenBox[];
  lines: DimensionLine[];
  totalDims: number;
  shownDims: number;
  thresholdY: number;
  tau: number;
  queryDims: number[];
  canBack: boolean;
  canForward: boolean;
  error: string | null;
}

export function squeezeLabel(surface: string, maxChars = LABEL_CHARS): string {
  if (surface.length <= maxChars) return surface;
  return surface.slice(0, maxChars - 1) + "…";
}

export function valueToY(value: number): number {
  // value in (-1, 1) maps linearly onto the plot, +1 at the top
  return (PLOT_HEIGHT / 2) * (1 - value);
}

/** Display dimensions: decimated by stride, but query dims always shown. */
export function visibleDims(totalDims: number, queryDims: number[], maxLines = MAX_LINES): number[] {
  if (totalDims <= maxLines) {
    return Array.from({ length: totalDims }, (_, j) => j);
  }
  const stride = Math.ceil(totalDims / maxLines);
  const shown = new Set<number>();
  for (let j = 0; j < totalDims; j += stride) shown.add(j);
  for (const j of queryDims) if (j >= 0 && j < totalDims) shown.add(j);
  return [...shown].sort((a, b) => a - b);
}

export function buildSelectModel(
  state: ViewState,
  tokens: TokenRecord[],
  selection: SelectResponse | null,
): SelectViewModel {
  const phrase = state.phrase;
  const context = contextSpan(state);
  const queryDims = selection ? selection.query_dims : [];
  const boxes: TokenBox[] = tokens.map((token, i) => ({
    position: token.position,
    label: squeezeLabel(token.surface),
    squeezed: token.surface.length > LABEL_CHARS,
    isVague: token.is_vague,
    isEos: token.is_eos,
    inPhrase: phrase !== null && token.position >= phrase[0] && token.position <= phrase[1],
    inContext: context !== null && token.position >= context[0] && token.position <= context[1],
    x: i * BOX_WIDTH,
  }));
  const totalDims = tokens.length > 0 ? tokens[0].vector.length : state.nDims;
  const queryDimSet = new Set(queryDims);
  const lines: DimensionLine[] = visibleDims(totalDims, queryDims).map((dim) => ({
    dim,
    inQuery: queryDimSet.has(dim),
    points: tokens.map((token, i) => ({
      x: i * BOX_WIDTH + BOX_WIDTH / 2,
      y: valueToY(token.vector[dim]),
    })),
  }));
  return {
    boxes,
    lines,
    totalDims,
    shownDims: lines.length,
    thresholdY: valueToY(state.tau),
    tau: state.tau,
    queryDims,
    canBack: canNavigate(state, -1),
    canForward: canNavigate(state, 1),
    error: state.error,
  };
}

export interface SelectViewHandlers {
  onTokenClick: (position: number, extend: boolean) => void;
  onNavigate: (delta: number) => void;
  onTauChange: (tau: number) => void;
  onContextChange: (left: number, right: number) => void;
  onModeChange: (mode: "intersection" | "phrase_only") => void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export function renderSelectView(
  root: HTMLElement,
  model: SelectViewModel,
  state: ViewState,
  handlers: SelectViewHandlers,
): void {
  root.textContent = "";
  root.classList.add("select-view");

  if (model.error !== null) {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = model.error;
    root.appendChild(banner);
  }

  const controls = document.createElement("div");
  controls.className = "controls";

  const back = document.createElement("button");
  back.className = "nav-back";
  back.textContent = "◀ back";
  back.disabled = !model.canBack;
  back.addEventListener("click", () => handlers.onNavigate(-state.windowSize));
  controls.appendChild(back);

  const forward = document.createElement("button");
  forward.className = "nav-forward";
  forward.textContent = "forward ▶";
  forward.disabled = !model.canForward;
  forward.addEventListener("click", () => handlers.onNavigate(state.windowSize));
  controls.appendChild(forward);

  const tauLabel = document.createElement("label");
  tauLabel.textContent = "threshold ";
  const tauInput = document.createElement("input");
  tauInput.className = "tau-input";
  tauInput.type = "number";
  tauInput.min = "0.01";
  tauInput.max = "0.99";
  tauInput.step = "0.05";
  tauInput.value = String(model.tau);
  tauInput.addEventListener("change", () => handlers.onTauChange(Number(tauInput.value)));
  tauLabel.appendChild(tauInput);
  controls.appendChild(tauLabel);

  const contextLabel = document.createElement("label");
  contextLabel.textContent = "context ±";
  const leftInput = document.createElement("input");
  leftInput.className = "context-left";
  leftInput.type = "range";
  leftInput.min = "0";
  leftInput.max = "8";
  leftInput.value = String(state.contextLeft);
  const rightInput = document.createElement("input");
  rightInput.className = "context-right";
  rightInput.type = "range";
  rightInput.min = "0";
  rightInput.max = "8";
  rightInput.value = String(state.contextRight);
  const onContext = () =>
    handlers.onContextChange(Number(leftInput.value), Number(rightInput.value));
  leftInput.addEventListener("change", onContext);
  rightInput.addEventListener("change", onContext);
  contextLabel.appendChild(leftInput);
  contextLabel.appendChild(rightInput);
  controls.appendChild(contextLabel);

  const modeSelect = document.createElement("select");
  modeSelect.className = "mode-select";
  for (const mode of ["intersection", "phrase_only"]) {
    const option = document.createElement("option");
    option.value = mode;
    option.textContent = mode;
    option.selected = state.mode === mode;
    modeSelect.appendChild(option);
  }
  modeSelect.addEventListener("change", () =>
    handlers.onModeChange(modeSelect.value as "intersection" | "phrase_only"),
  );
  controls.appendChild(modeSelect);

  root.appendChild(controls);

  const width = Math.max(model.boxes.length * BOX_WIDTH, BOX_WIDTH);
  const svg = svgElement("svg", {
    class: "dimension-plot",
    width: String(width),
    height: String(PLOT_HEIGHT),
    viewBox: `0 0 ${width} ${PLOT_HEIGHT}`,
  });

  for (const box of model.boxes) {
    if (!box.inContext || box.inPhrase) continue;
    svg.appendChild(
      svgElement("rect", {
        class: "context-band",
        x: String(box.x),
        y: "0",
        width: String(BOX_WIDTH),
        height: String(PLOT_HEIGHT),
        fill: "#d8d8d8",
      }),
    );
  }
  for (const box of model.boxes) {
    if (!box.inPhrase) continue;
    svg.appendChild(
      svgElement("rect", {
        class: "phrase-band",
        x: String(box.x),
        y: "0",
        width: String(BOX_WIDTH),
        height: String(PLOT_HEIGHT),
        fill: "#ffe9a8",
      }),
    );
  }

  svg.appendChild(
    svgElement("line", {
      class: "threshold-line",
      x1: "0",
      y1: String(model.thresholdY),
      x2: String(width),
      y2: String(model.thresholdY),
      stroke: "#c03030",
      "stroke-dasharray": "6 3",
    }),
  );

  for (const line of model.lines) {
    svg.appendChild(
      svgElement("polyline", {
        class: line.inQuery ? "dimension-line query-dim" : "dimension-line",
        "data-dim": String(line.dim),
        points: line.points.map((p) => `${p.x},${p.y}`).join(" "),
        fill: "none",
        stroke: line.inQuery ? "#d07017" : "#5080c0",
        "stroke-opacity": line.inQuery ? "0.95" : "0.35",
      }),
    );
  }
  root.appendChild(svg);

  const strip = document.createElement("div");
  strip.className = "token-strip";
  for (const box of model.boxes) {
    const cell = document.createElement("button");
    cell.className = "token-box";
    cell.style.width = `${BOX_WIDTH}px`;
    if (box.inPhrase) cell.classList.add("in-phrase");
    if (box.inContext) cell.classList.add("in-context");
    if (box.isEos) cell.classList.add("eos-token");
    cell.dataset.position = String(box.position);
    cell.title = box.squeezed ? `token ${box.position}` : String(box.position);
    const label = document.createElement("span");
    label.className = "token-label";
    label.textContent = box.label;
    cell.appendChild(label);
    if (box.isVague) {
      const marker = document.createElement("span");
      marker.className = "vague-marker";
      marker.textContent = "V";
      cell.appendChild(marker);
    }
    cell.addEventListener("click", (event) =>
      handlers.onTokenClick(box.position, event.shiftKey),
    );
    strip.appendChild(cell);
  }
  root.appendChild(strip);

  const dims = document.createElement("div");
  dims.className = "query-dims";
  dims.textContent = model.queryDims.length
    ? `query dimensions: ${model.queryDims.join(", ")}`
    : "query dimensions: (none)";
  root.appendChild(dims);
}
