"""Local HTTP API over a loaded trace, plus the shared JSON payload layer.

Payload builders are pure functions over the immutable trace; the HTTP
endpoints and the headless CLI both call them, so their outputs agree by
construction.  Responses are serialized through ``canonical_json`` with
fixed key order and no whitespace, making every response byte-identical
across calls for a fixed trace and request.
"""

from __future__ import annotations

import json
import socket
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from .explorer import (
    DEFAULT_MAX_LEN,
    DEFAULT_TAU,
    DEFAULT_TOP_K,
    ExplorerError,
    Selection,
    find_matches,
    length_histogram,
    match_surfaces,
    on_dimensions,
    combine_dimension_sets,
)
from .trace import TRACE_MAGIC, HiddenTrace


class ServerError(RuntimeError):
    """Server startup failure (e.g. the port is already taken)."""


def canonical_json(payload) -> bytes:
    """Compact UTF-8 JSON with insertion key order; floats via repr."""
    return json.dumps(
        payload, ensure_ascii=False, allow_nan=False, separators=(",", ":")
    ).encode("utf-8")


def meta_payload(trace: HiddenTrace) -> dict:
    return {
        "token_count": len(trace),
        "l": trace.n_dims,
        "vague_token_count": trace.vague_count,
        "format_version": TRACE_MAGIC.decode("ascii"),
    }


def tokens_payload(trace: HiddenTrace, offset: int, count: int) -> dict:
    """A window of token records with their vectors; count is clamped."""
    if not 0 <= offset < len(trace):
        raise ExplorerError(f"offset {offset} out of range [0, {len(trace)})")
    if count < 1:
        raise ExplorerError(f"count must be >= 1, got {count}")
    end = min(offset + count, len(trace))
    records = []
    for pos in range(offset, end):
        token = trace.tokens[pos]
        records.append(
            {
                "position": pos,
                "surface": token.surface,
                "is_vague": token.is_vague,
                "is_eos": token.is_eos,
                "vector": [float(v) for v in trace.vectors[pos]],
            }
        )
    return {"offset": offset, "token_count": len(trace), "tokens": records}


def select_payload(
    trace: HiddenTrace,
    phrase: tuple[int, int],
    context: tuple[int, int] | None = None,
    tau: float = DEFAULT_TAU,
    mode: str = "intersection",
) -> dict:
    """Dimension sets for a phrase/context selection (context defaults to phrase)."""
    selection = Selection(
        phrase=phrase, context=context if context is not None else phrase, tau=tau
    )
    s1 = on_dimensions(trace, selection.phrase, selection.tau)
    s2 = on_dimensions(trace, selection.context, selection.tau)
    query = combine_dimension_sets(s1, s2, mode)
    return {
        "phrase": list(selection.phrase),
        "context": list(selection.context),
        "tau": selection.tau,
        "mode": mode,
        "s1": list(s1),
        "s2": list(s2),
        "query_dims": list(query),
    }


def match_payload(
    trace: HiddenTrace,
    query_dims: tuple[int, ...],
    tau: float = DEFAULT_TAU,
    max_len: int = DEFAULT_MAX_LEN,
    top_k: int = DEFAULT_TOP_K,
    within_sentence: bool = False,
) -> dict:
    """Ranked matches plus the length distribution for a dimension query."""
    results = find_matches(
        trace,
        tuple(query_dims),
        tau=tau,
        max_len=max_len,
        top_k=top_k,
        within_sentence=within_sentence,
    )
    hist = length_histogram(results)
    return {
        "query_dims": sorted(int(d) for d in query_dims),
        "tau": tau,
        "matches": [
            {
                "rank": r.rank,
                "start": r.start,
                "end": r.end,
                "length": r.length,
                "extra_on_count": r.extra_on_count,
                "truncated": r.truncated,
                "surfaces": match_surfaces(trace, r),
                "vague": [trace.tokens[t].is_vague for t in range(r.start, r.end + 1)],
            }
            for r in results
        ],
        "length_histogram": [[length, hist[length]] for length in sorted(hist)],
    }


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _error(message: str, status_code: int = 400) -> Response:
    return _json_response({"error": message}, status_code=status_code)


def create_app(
    trace: HiddenTrace,
    default_tau: float = DEFAULT_TAU,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Read-only API over one immutable trace."""
    app = FastAPI(title="vaguelens trace explorer", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.get("/api/meta")
    def api_meta() -> Response:
        return _json_response(meta_payload(trace))

    @app.get("/api/tokens")
    def api_tokens(offset: int = 0, count: int = 50) -> Response:
        try:
            return _json_response(tokens_payload(trace, offset, count))
        except ExplorerError as exc:
            return _error(str(exc))

    @app.post("/api/select")
    async def api_select(request: Request) -> Response:
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error("request body is not valid JSON")
        try:
            phrase = _span(body, "phrase", required=True)
            context = _span(body, "context", required=False)
            tau = float(body.get("tau", default_tau))
            mode = str(body.get("mode", "intersection"))
            return _json_response(select_payload(trace, phrase, context, tau, mode))
        except ExplorerError as exc:
            return _error(str(exc))
        except (TypeError, ValueError) as exc:
            return _error(f"bad request: {exc}")

    @app.post("/api/match")
    async def api_match(request: Request) -> Response:
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error("request body is not valid JSON")
        try:
            raw_dims = body.get("query_dims")
            if not isinstance(raw_dims, list):
                return _error("query_dims must be a list of dimension indices")
            query = tuple(int(d) for d in raw_dims)
            tau = float(body.get("tau", default_tau))
            max_len = int(body.get("max_len", DEFAULT_MAX_LEN))
            top_k = int(body.get("top_k", DEFAULT_TOP_K))
            within = bool(body.get("within_sentence", False))
            return _json_response(
                match_payload(trace, query, tau, max_len, top_k, within)
            )
        except ExplorerError as exc:
            return _error(str(exc))
        except (TypeError, ValueError) as exc:
            return _error(f"bad request: {exc}")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _span(body: dict, key: str, required: bool) -> tuple[int, int] | None:
    value = body.get(key)
    if value is None:
        if required:
            raise ExplorerError(f"missing required field {key!r}")
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ExplorerError(f"{key} must be a [start, end] pair")
    return int(value[0]), int(value[1])


def run_server(
    trace: HiddenTrace,
    port: int,
    host: str = "127.0.0.1",
    default_tau: float = DEFAULT_TAU,
    ui_dir: str | Path | None = None,
) -> None:
    """Serve the API (and optional static UI), blocking until interrupted."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise ServerError(f"cannot bind {host}:{port}: {exc}") from exc
    finally:
        probe.close()
    app = create_app(trace, default_tau=default_tau, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
