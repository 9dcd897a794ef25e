"""Threshold-activated dimension sets and pattern search over a trace.

Selecting a span "turns on" the dimensions whose value exceeds the
threshold at every position of the span.  A query (derived from a phrase
and its context) is then matched against the whole meta sequence: the
candidate regions are maximal contiguous runs where every query
dimension stays above the threshold, ranked by how few additional
dimensions are on over the region.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .trace import HiddenTrace

DEFAULT_TAU = 0.3
DEFAULT_MAX_LEN = 10
DEFAULT_TOP_K = 50

QUERY_MODES = ("intersection", "phrase_only")


class ExplorerError(ValueError):
    """Invalid selection, span, or query."""


@dataclass(frozen=True)
class Selection:
    """A phrase span, its enclosing context span, and the threshold."""

    phrase: tuple[int, int]  # inclusive token indices
    context: tuple[int, int]  # inclusive, must contain the phrase span
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        pa, pb = self.phrase
        ca, cb = self.context
        if pa > pb:
            raise ExplorerError(f"phrase span [{pa}, {pb}] is empty")
        if ca > pa or cb < pb:
            raise ExplorerError(
                f"context span [{ca}, {cb}] does not contain phrase span [{pa}, {pb}]"
            )
        if not 0.0 < self.tau < 1.0:
            raise ExplorerError(f"threshold {self.tau} outside (0, 1)")


@dataclass(frozen=True)
class MatchResult:
    """One matched region of the meta sequence."""

    start: int
    end: int  # inclusive
    extra_on_count: int
    truncated: bool = False
    rank: int = 0

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def _check_span(trace: HiddenTrace, span: tuple[int, int]) -> None:
    a, b = span
    if a > b:
        raise ExplorerError(f"span [{a}, {b}] is empty")
    if a < 0 or b >= len(trace):
        raise ExplorerError(f"span [{a}, {b}] out of bounds for trace of {len(trace)} tokens")


def on_dimensions(trace: HiddenTrace, span: tuple[int, int], tau: float = DEFAULT_TAU) -> tuple[int, ...]:
    """Dimensions whose value is strictly above ``tau`` at every span position."""
    _check_span(trace, span)
    a, b = span
    on = (trace.vectors[a : b + 1] > tau).all(axis=0)
    return tuple(int(j) for j in np.nonzero(on)[0])


def combine_dimension_sets(
    s1: tuple[int, ...], s2: tuple[int, ...], mode: str = "intersection"
) -> tuple[int, ...]:
    """Set combination used by queries: intersection or phrase-only (s1 - s2)."""
    if mode not in QUERY_MODES:
        raise ExplorerError(f"unknown query mode {mode!r}, expected one of {QUERY_MODES}")
    if mode == "intersection":
        combined = set(s1) & set(s2)
    else:
        combined = set(s1) - set(s2)
    return tuple(sorted(combined))


def query_dimensions(
    trace: HiddenTrace, selection: Selection, mode: str = "intersection"
) -> tuple[int, ...]:
    """Derive the query dimension set from a phrase/context selection."""
    s1 = on_dimensions(trace, selection.phrase, selection.tau)
    s2 = on_dimensions(trace, selection.context, selection.tau)
    return combine_dimension_sets(s1, s2, mode)


def find_matches(
    trace: HiddenTrace,
    query: tuple[int, ...],
    tau: float = DEFAULT_TAU,
    max_len: int = DEFAULT_MAX_LEN,
    top_k: int = DEFAULT_TOP_K,
    within_sentence: bool = False,
) -> list[MatchResult]:
    """Ranked regions where every query dimension is on at every position.

    Candidates are maximal contiguous runs of positions where all query
    dimensions exceed ``tau``; runs longer than ``max_len`` are reported
    truncated to their first ``max_len`` tokens and flagged.  Regions are
    ranked by ascending extra_on_count (dimensions outside the query that
    are also on over the whole region), then ascending length, then
    position.  With ``within_sentence``, end-of-sentence marks break runs
    so regions never cross sentence boundaries.
    """
    if not query:
        raise ExplorerError("query dimension set is empty")
    if max_len < 1:
        raise ExplorerError(f"max_len must be >= 1, got {max_len}")
    if top_k < 1:
        raise ExplorerError(f"top_k must be >= 1, got {top_k}")
    qdims = np.array(sorted(set(query)), dtype=int)
    if qdims[0] < 0 or qdims[-1] >= trace.n_dims:
        raise ExplorerError(
            f"query dimension out of range [0, {trace.n_dims}) in {tuple(query)}"
        )
    if len(trace) == 0:
        return []

    active = (trace.vectors[:, qdims] > tau).all(axis=1)
    if within_sentence:
        active &= ~trace.eos_mask
    other = np.setdiff1d(np.arange(trace.n_dims), qdims)

    results: list[MatchResult] = []
    t = 0
    total = len(trace)
    while t < total:
        if not active[t]:
            t += 1
            continue
        run_start = t
        while t < total and active[t]:
            t += 1
        run_end = t - 1
        truncated = (run_end - run_start + 1) > max_len
        end = run_start + max_len - 1 if truncated else run_end
        extra = (
            int((trace.vectors[run_start : end + 1][:, other] > tau).all(axis=0).sum())
            if other.size
            else 0
        )
        results.append(
            MatchResult(start=run_start, end=end, extra_on_count=extra, truncated=truncated)
        )
    results.sort(key=lambda r: (r.extra_on_count, r.length, r.start))
    ranked = [
        MatchResult(
            start=r.start,
            end=r.end,
            extra_on_count=r.extra_on_count,
            truncated=r.truncated,
            rank=i + 1,
        )
        for i, r in enumerate(results[:top_k])
    ]
    return ranked


def length_histogram(results: list[MatchResult]) -> dict[int, int]:
    """Region-length counts over a result list."""
    return dict(sorted(Counter(r.length for r in results).items()))


def match_surfaces(trace: HiddenTrace, result: MatchResult) -> list[str]:
    """Token surfaces covered by a match, for rendering."""
    return [trace.tokens[t].surface for t in range(result.start, result.end + 1)]
