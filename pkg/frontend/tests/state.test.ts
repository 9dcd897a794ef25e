import { describe, expect, it } from "vitest";

import type { MatchResponse, SelectResponse } from "../src/api.js";
import {
  applyError,
  applyMatch,
  applySelect,
  canNavigate,
  clampOffset,
  contextSpan,
  initialState,
  jumpTo,
  navigate,
  selectPhrase,
  setContext,
  setMode,
  setTau,
} from "../src/state.js";

function selectResponse(dims: number[], tau = 0.3): SelectResponse {
  return {
    phrase: [2, 3],
    context: [2, 3],
    tau,
    mode: "intersection",
    s1: dims,
    s2: dims,
    query_dims: dims,
  };
}

function matchResponse(tau = 0.3): MatchResponse {
  return { query_dims: [1], tau, matches: [], length_histogram: [] };
}

describe("navigation", () => {
  it("clamps at both ends", () => {
    const state = { ...initialState(100, 8), windowSize: 40 };
    expect(clampOffset(state, -5)).toBe(0);
    expect(clampOffset(state, 1000)).toBe(60);
    expect(navigate(state, -10).offset).toBe(0);
    expect(navigate({ ...state, offset: 55 }, 40).offset).toBe(60);
  });

  it("disables navigation past the trace end", () => {
    const state = { ...initialState(100, 8), windowSize: 40, offset: 60 };
    expect(canNavigate(state, 1)).toBe(false);
    expect(canNavigate(state, -1)).toBe(true);
  });

  it("jumpTo centers the target near the window start", () => {
    const state = { ...initialState(500, 8), windowSize: 40 };
    const jumped = jumpTo(state, 200);
    expect(jumped.offset).toBe(190);
    expect(jumpTo(state, 2).offset).toBe(0);
  });
});

describe("selection and context", () => {
  it("orders and clamps the phrase span", () => {
    const state = initialState(50, 8);
    expect(selectPhrase(state, 7, 4).phrase).toEqual([4, 7]);
    expect(selectPhrase(state, 48, 60).phrase).toEqual([48, 49]);
  });

  it("context span contains the phrase and respects bounds", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    state = setContext(state, 3, 4);
    expect(state.phrase).toEqual([1, 2]);
    expect(contextSpan(state)).toEqual([0, 6]);
  });

  it("no context span without a phrase", () => {
    expect(contextSpan(initialState(50, 8))).toBeNull();
  });
});

describe("invalidation on parameter changes", () => {
  it("selecting a phrase clears previous results and bumps the generation", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    const g = state.generation;
    state = applySelect(state, g, selectResponse([1, 2]));
    state = applyMatch(state, g, matchResponse());
    expect(state.selection).not.toBeNull();
    expect(state.matches).not.toBeNull();
    const reselected = selectPhrase(state, 5, 6);
    expect(reselected.generation).toBe(g + 1);
    expect(reselected.selection).toBeNull();
    expect(reselected.matches).toBeNull();
  });

  it("tau change invalidates displayed results", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    state = applySelect(state, state.generation, selectResponse([3]));
    const changed = setTau(state, 0.5);
    expect(changed.tau).toBe(0.5);
    expect(changed.selection).toBeNull();
    expect(changed.matches).toBeNull();
  });

  it("rejects out-of-range tau", () => {
    const state = initialState(50, 8);
    expect(setTau(state, 0)).toBe(state);
    expect(setTau(state, 1)).toBe(state);
  });

  it("mode change invalidates results", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    state = applySelect(state, state.generation, selectResponse([3]));
    expect(setMode(state, "phrase_only").selection).toBeNull();
  });
});

describe("stale responses are dropped", () => {
  it("ignores select responses from an older generation", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    const oldGeneration = state.generation;
    state = setTau(state, 0.5); // supersedes the in-flight request
    const afterStale = applySelect(state, oldGeneration, selectResponse([9], 0.3));
    expect(afterStale.selection).toBeNull();
    const fresh = applySelect(afterStale, state.generation, selectResponse([4], 0.5));
    expect(fresh.selection?.query_dims).toEqual([4]);
    expect(fresh.selection?.tau).toBe(0.5);
  });

  it("ignores match responses from an older generation", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    const oldGeneration = state.generation;
    state = setTau(state, 0.4);
    expect(applyMatch(state, oldGeneration, matchResponse(0.3)).matches).toBeNull();
    expect(applyMatch(state, state.generation, matchResponse(0.4)).matches).not.toBeNull();
  });

  it("ignores errors from an older generation", () => {
    let state = selectPhrase(initialState(50, 8), 1, 2);
    const oldGeneration = state.generation;
    state = setTau(state, 0.4);
    expect(applyError(state, oldGeneration, "boom").error).toBeNull();
    expect(applyError(state, state.generation, "boom").error).toBe("boom");
  });
});
