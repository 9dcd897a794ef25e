/**
 * Match view: the ranked region list and the length-distribution chart.
 *
 * Rows and histogram render the /api/match response verbatim; the only
 * client-side arithmetic is mapping extra_on_count to a color intensity.
 */

import type { MatchRecord, MatchResponse } from "./api.js";

export interface MatchRow {
  rank: number;
  start: number;
  end: number;
  text: string;
  vague: boolean[];
  surfaces: string[];
  extraOnCount: number;
  truncated: boolean;
  /** 1 for the tightest match (no extra dims on), decaying toward 0. */
  intensity: number;
}

export interface HistogramBar {
  length: number;
  count: number;
  height: number;
}

export interface MatchViewModel {
  rows: MatchRow[];
  histogram: HistogramBar[];
  queryDims: number[];
  empty: boolean;
}

export function intensityFor(extraOnCount: number): number {
  return 1 / (1 + extraOnCount);
}

export function buildMatchModel(response: MatchResponse | null): MatchViewModel {
  if (response === null) {
    return { rows: [], histogram: [], queryDims: [], empty: true };
  }
  const rows = response.matches.map((m: MatchRecord) => ({
    rank: m.rank,
    start: m.start,
    end: m.end,
    text: m.surfaces.join(" "),
    vague: m.vague,
    surfaces: m.surfaces,
    extraOnCount: m.extra_on_count,
    truncated: m.truncated,
    intensity: intensityFor(m.extra_on_count),
  }));
  const maxCount = Math.max(1, ...response.length_histogram.map(([, count]) => count));
  const histogram = response.length_histogram.map(([length, count]) => ({
    length,
    count,
    height: count / maxCount,
  }));
  return {
    rows,
    histogram,
    queryDims: response.query_dims,
    empty: rows.length === 0,
  };
}

export interface MatchViewHandlers {
  onMatchClick: (start: number) => void;
}

export function renderMatchView(
  root: HTMLElement,
  model: MatchViewModel,
  handlers: MatchViewHandlers,
): void {
  root.textContent = "";
  root.classList.add("match-view");

  if (model.empty) {
    const empty = document.createElement("div");
    empty.className = "no-matches";
    empty.textContent = "no matches";
    root.appendChild(empty);
    return;
  }

  const list = document.createElement("ol");
  list.className = "match-list";
  for (const row of model.rows) {
    const item = document.createElement("li");
    item.className = "match-row";
    item.dataset.rank = String(row.rank);
    item.dataset.start = String(row.start);
    item.style.backgroundColor = `rgba(80, 140, 220, ${(0.15 + 0.85 * row.intensity).toFixed(3)})`;
    const text = document.createElement("span");
    text.className = "match-text";
    for (let i = 0; i < row.surfaces.length; i++) {
      const piece = document.createElement("span");
      piece.className = row.vague[i] ? "match-token vague-token" : "match-token";
      piece.textContent = row.surfaces[i];
      text.appendChild(piece);
      if (row.vague[i]) {
        const marker = document.createElement("sup");
        marker.className = "vague-marker";
        marker.textContent = "V";
        text.appendChild(marker);
      }
      if (i + 1 < row.surfaces.length) text.appendChild(document.createTextNode(" "));
    }
    item.appendChild(text);
    const detail = document.createElement("span");
    detail.className = "match-detail";
    detail.textContent =
      ` [${row.start}..${row.end}] +${row.extraOnCount} extra` +
      (row.truncated ? " (truncated)" : "");
    item.appendChild(detail);
    item.addEventListener("click", () => handlers.onMatchClick(row.start));
    list.appendChild(item);
  }
  root.appendChild(list);

  const chart = document.createElement("div");
  chart.className = "length-histogram";
  const chartTitle = document.createElement("div");
  chartTitle.className = "chart-title";
  chartTitle.textContent = "length distribution";
  chart.appendChild(chartTitle);
  const bars = document.createElement("div");
  bars.className = "bars";
  for (const bar of model.histogram) {
    const column = document.createElement("div");
    column.className = "bar-column";
    const fill = document.createElement("div");
    fill.className = "bar";
    fill.style.height = `${Math.round(bar.height * 100)}%`;
    fill.dataset.length = String(bar.length);
    fill.dataset.count = String(bar.count);
    fill.title = `length ${bar.length}: ${bar.count}`;
    column.appendChild(fill);
    const label = document.createElement("div");
    label.className = "bar-label";
    label.textContent = String(bar.length);
    column.appendChild(label);
    bars.appendChild(column);
  }
  chart.appendChild(bars);
  root.appendChild(chart);
}
