/**
 * View state and its pure transitions.
 *
 * Every server response is stored verbatim, tagged with the request
 * generation that produced it.  Changing the selection, the threshold,
 * or the mode bumps the generation; responses from older generations
 * are dropped, so the displayed dimension sets and matches always
 * correspond to the current query parameters.
 */

import type { MatchResponse, QueryMode, SelectResponse, Span } from "./api.js";

export const DEFAULT_TAU = 0.3;
export const DEFAULT_WINDOW = 40;

export interface ViewState {
  tokenCount: number;
  nDims: number;
  offset: number;
  windowSize: number;
  phrase: Span | null;
  contextLeft: number;
  contextRight: number;
  tau: number;
  mode: QueryMode;
  generation: number;
  selection: SelectResponse | null;
  matches: MatchResponse | null;
  error: string | null;
}

export function initialState(tokenCount = 0, nDims = 0): ViewState {
  return {
    tokenCount,
    nDims,
    offset: 0,
    windowSize: DEFAULT_WINDOW,
    phrase: null,
    contextLeft: 0,
    contextRight: 0,
    tau: DEFAULT_TAU,
    mode: "intersection",
    generation: 0,
    selection: null,
    matches: null,
    error: null,
  };
}

export function clampOffset(state: ViewState, offset: number): number {
  const maxOffset = Math.max(0, state.tokenCount - state.windowSize);
  return Math.min(Math.max(0, offset), maxOffset);
}

export function navigate(state: ViewState, delta: number): ViewState {
  return { ...state, offset: clampOffset(state, state.offset + delta) };
}

export function jumpTo(state: ViewState, position: number): ViewState {
  return { ...state, offset: clampOffset(state, position - Math.floor(state.windowSize / 4)) };
}

export function canNavigate(state: ViewState, delta: number): boolean {
  return clampOffset(state, state.offset + delta) !== state.offset;
}

/** Context span derived from the phrase and slider extents, clamped to bounds. */
export function contextSpan(state: ViewState): Span | null {
  if (!state.phrase) return null;
  const [a, b] = state.phrase;
  return [
    Math.max(0, a - state.contextLeft),
    Math.min(state.tokenCount - 1, b + state.contextRight),
  ];
}

function invalidate(state: ViewState): ViewState {
  return {
    ...state,
    generation: state.generation + 1,
    selection: null,
    matches: null,
    error: null,
  };
}

export function selectPhrase(state: ViewState, a: number, b: number): ViewState {
  const lo = Math.max(0, Math.min(a, b));
  const hi = Math.min(state.tokenCount - 1, Math.max(a, b));
  return { ...invalidate(state), phrase: [lo, hi] };
}

export function clearPhrase(state: ViewState): ViewState {
  return { ...invalidate(state), phrase: null };
}

export function setTau(state: ViewState, tau: number): ViewState {
  if (!(tau > 0 && tau < 1)) return state;
  return { ...invalidate(state), tau };
}

export function setMode(state: ViewState, mode: QueryMode): ViewState {
  return { ...invalidate(state), mode };
}

export function setContext(state: ViewState, left: number, right: number): ViewState {
  return {
    ...invalidate(state),
    contextLeft: Math.max(0, left),
    contextRight: Math.max(0, right),
  };
}

/** Store a select response unless a newer query has been issued since. */
export function applySelect(
  state: ViewState,
  generation: number,
  response: SelectResponse,
): ViewState {
  if (generation !== state.generation) return state;
  return { ...state, selection: response, error: null };
}

/** Store a match response unless a newer query has been issued since. */
export function applyMatch(
  state: ViewState,
  generation: number,
  response: MatchResponse,
): ViewState {
  if (generation !== state.generation) return state;
  return { ...state, matches: response, error: null };
}

export function applyError(state: ViewState, generation: number, message: string): ViewState {
  if (generation !== state.generation) return state;
  return { ...state, error: message };
}
