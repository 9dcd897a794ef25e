import numpy as np
import pytest
from fastapi.testclient import TestClient

from vaguelens.explorer import find_matches, length_histogram, on_dimensions
from vaguelens.server import (
    canonical_json,
    create_app,
    match_payload,
    meta_payload,
    select_payload,
    tokens_payload,
)

from helpers import random_trace, trace_from_matrix


@pytest.fixture(scope="module")
def trace():
    return random_trace(seed=77, n_tokens=60, n_dims=5)


@pytest.fixture(scope="module")
def client(trace):
    return TestClient(create_app(trace))


class TestMeta:
    def test_fields(self, client, trace):
        body = client.get("/api/meta").json()
        assert body == {
            "token_count": 60,
            "l": 5,
            "vague_token_count": trace.vague_count,
            "format_version": "VLTRACE1",
        }

    def test_stable_across_calls(self, client):
        r1 = client.get("/api/meta")
        r2 = client.get("/api/meta")
        assert r1.content == r2.content


class TestTokens:
    def test_first_window(self, client, trace):
        body = client.get("/api/tokens", params={"offset": 0, "count": 5}).json()
        assert body["offset"] == 0
        assert len(body["tokens"]) == 5
        assert body["tokens"][0]["surface"] == trace.tokens[0].surface
        np.testing.assert_allclose(
            body["tokens"][0]["vector"], trace.vectors[0], atol=0
        )

    def test_clamped_at_end(self, client, trace):
        body = client.get(
            "/api/tokens", params={"offset": len(trace) - 1, "count": 10}
        ).json()
        assert len(body["tokens"]) == 1

    def test_offset_out_of_range(self, client, trace):
        response = client.get("/api/tokens", params={"offset": len(trace), "count": 1})
        assert response.status_code == 400
        assert "out of range" in response.json()["error"]

    def test_vectors_round_trip_exactly(self, client, trace):
        body = client.get("/api/tokens", params={"offset": 3, "count": 1}).json()
        sent = np.array(body["tokens"][0]["vector"], dtype=np.float32)
        assert np.array_equal(sent, trace.vectors[3])


class TestSelect:
    def test_context_defaults_to_phrase(self, client, trace):
        body = client.post("/api/select", json={"phrase": [4, 5]}).json()
        assert body["context"] == [4, 5]
        assert body["query_dims"] == body["s1"]
        assert body["s1"] == list(on_dimensions(trace, (4, 5), 0.3))

    def test_default_tau_applied(self, client):
        body = client.post("/api/select", json={"phrase": [4, 5]}).json()
        assert body["tau"] == 0.3

    def test_session_default_tau_honored(self, trace):
        app = create_app(trace, default_tau=0.5)
        with TestClient(app) as session_client:
            body = session_client.post("/api/select", json={"phrase": [4, 5]}).json()
        assert body["tau"] == 0.5
        assert body["s1"] == list(on_dimensions(trace, (4, 5), 0.5))

    def test_empty_s2_gives_empty_intersection(self):
        values = np.full((6, 3), -0.5, dtype=np.float32)
        values[2:4, :] = 0.9  # phrase dims all on; context kills them
        t = trace_from_matrix(values)
        with TestClient(create_app(t)) as c:
            body = c.post(
                "/api/select", json={"phrase": [2, 3], "context": [0, 5]}
            ).json()
        assert body["s1"] == [0, 1, 2]
        assert body["s2"] == []
        assert body["query_dims"] == []

    def test_phrase_only_mode(self, client, trace):
        body = client.post(
            "/api/select",
            json={"phrase": [4, 5], "context": [2, 7], "mode": "phrase_only"},
        ).json()
        s1 = set(on_dimensions(trace, (4, 5), 0.3))
        s2 = set(on_dimensions(trace, (2, 7), 0.3))
        assert body["query_dims"] == sorted(s1 - s2)

    def test_invalid_span_is_error_payload(self, client):
        response = client.post("/api/select", json={"phrase": [5, 2]})
        assert response.status_code == 400
        assert "error" in response.json()

    def test_missing_phrase(self, client):
        response = client.post("/api/select", json={})
        assert response.status_code == 400

    def test_malformed_body(self, client):
        response = client.post(
            "/api/select", content=b"not json", headers={"content-type": "application/json"}
        )
        assert response.status_code == 400


class TestMatch:
    def test_identical_requests_identical_bodies(self, client):
        req = {"query_dims": [0, 2], "tau": 0.2}
        r1 = client.post("/api/match", json=req)
        r2 = client.post("/api/match", json=req)
        assert r1.content == r2.content

    def test_results_match_engine(self, client, trace):
        body = client.post("/api/match", json={"query_dims": [1], "tau": 0.25}).json()
        engine = find_matches(trace, (1,), tau=0.25)
        assert [(m["start"], m["end"], m["extra_on_count"]) for m in body["matches"]] == [
            (r.start, r.end, r.extra_on_count) for r in engine
        ]
        hist = length_histogram(engine)
        assert body["length_histogram"] == [[k, v] for k, v in sorted(hist.items())]

    def test_empty_query_is_error_payload(self, client):
        response = client.post("/api/match", json={"query_dims": []})
        assert response.status_code == 400
        assert "error" in response.json()

    def test_top_k_one(self, client, trace):
        body = client.post(
            "/api/match", json={"query_dims": [1], "tau": 0.25, "top_k": 1}
        ).json()
        engine = find_matches(trace, (1,), tau=0.25, top_k=1)
        assert len(body["matches"]) == len(engine) <= 1

    def test_surfaces_and_vague_flags_included(self, client, trace):
        body = client.post("/api/match", json={"query_dims": [1], "tau": 0.25}).json()
        for match in body["matches"]:
            span = range(match["start"], match["end"] + 1)
            assert match["surfaces"] == [trace.tokens[t].surface for t in span]
            assert match["vague"] == [trace.tokens[t].is_vague for t in span]

    def test_missing_query_dims(self, client):
        response = client.post("/api/match", json={"tau": 0.3})
        assert response.status_code == 400


class TestCors:
    def test_cross_origin_allowed(self, client):
        response = client.get("/api/meta", headers={"Origin": "http://localhost:5173"})
        assert response.headers.get("access-control-allow-origin") == "*"


class TestCanonicalJson:
    def test_compact_and_ordered(self):
        assert canonical_json({"b": 1, "a": [1.5, 2]}) == b'{"b":1,"a":[1.5,2]}'

    def test_response_bytes_equal_payload_serialization(self, client, trace):
        response = client.get("/api/meta")
        assert response.content == canonical_json(meta_payload(trace))

    def test_select_bytes(self, client, trace):
        response = client.post("/api/select", json={"phrase": [4, 5], "tau": 0.25})
        assert response.content == canonical_json(
            select_payload(trace, (4, 5), None, 0.25, "intersection")
        )

    def test_match_bytes(self, client, trace):
        response = client.post("/api/match", json={"query_dims": [1], "tau": 0.25})
        assert response.content == canonical_json(match_payload(trace, (1,), tau=0.25))

    def test_tokens_bytes(self, client, trace):
        response = client.get("/api/tokens", params={"offset": 0, "count": 3})
        assert response.content == canonical_json(tokens_payload(trace, 0, 3))


class TestStaticUi:
    def test_ui_mounted_when_directory_given(self, trace, tmp_path):
        (tmp_path / "index.html").write_text("<html><body>ui</body></html>")
        app = create_app(trace, ui_dir=tmp_path)
        with TestClient(app) as c:
            response = c.get("/")
            assert response.status_code == 200
            assert "ui" in response.text
            # API still reachable under the mount
            assert c.get("/api/meta").status_code == 200
