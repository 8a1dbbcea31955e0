import base64
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from evoart.backend import (
    BackendError,
    ImageStore,
    ProceduralBackend,
    RemoteBackend,
    build_request,
    generate_with_fallback,
    make_render_callback,
)
from evoart.chromosome import random_chromosome
from evoart.guideline import default_schema
from evoart.render import render_png

import random

SCHEMA = default_schema()


@pytest.fixture
def store(tmp_path):
    return ImageStore(tmp_path / "images")


@pytest.fixture
def chromo():
    return random_chromosome(SCHEMA, random.Random(21))


# A recorded response: a real procedural render frozen as the stub's fixture.
FIXTURE_BYTES = render_png(random_chromosome(SCHEMA, random.Random(99)), 64, 64)


class _StubHandler(BaseHTTPRequestHandler):
    fail_times = 0
    requests_seen = []

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/sdapi/v1/sd-models":
            body = json.dumps([{"title": "stub-model"}]).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(body)
        else:
            self.send_response(404)
            self.end_headers()

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        type(self).requests_seen.append(payload)
        if type(self).fail_times > 0:
            type(self).fail_times -= 1
            self.send_response(500)
            self.end_headers()
            return
        body = json.dumps({"images": [base64.b64encode(FIXTURE_BYTES).decode()]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def stub_server():
    _StubHandler.fail_times = 0
    _StubHandler.requests_seen = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    thread.join(timeout=5)


class TestImageStore:
    def test_put_get_round_trip(self, store):
        ref = store.put(b"some image bytes")
        assert store.get(ref.id) == b"some image bytes"
        assert ref.length == 16

    def test_id_recomputable_from_bytes(self, store):
        import hashlib

        data = b"xyz"
        assert store.put(data).id == hashlib.sha256(data).hexdigest()

    def test_missing_ref_raises(self, store):
        with pytest.raises(KeyError):
            store.get("0" * 64)

    def test_media_type_sniffing(self):
        assert ImageStore.media_type_of(FIXTURE_BYTES) == "image/png"
        assert ImageStore.media_type_of(b"\xff\xd8\xff\xe0rest") == "image/jpeg"
        assert ImageStore.media_type_of(b"???") == "application/octet-stream"


class TestProceduralBackend:
    def test_same_request_same_ref(self, store, chromo):
        backend = ProceduralBackend(store)
        req = build_request(chromo, SCHEMA, width=64, height=64)
        assert backend.generate(req) == backend.generate(req)

    def test_request_seed_overrides_chromosome(self, store, chromo):
        backend = ProceduralBackend(store)
        req = build_request(chromo, SCHEMA, width=64, height=64)
        moved = build_request(chromo, SCHEMA, width=64, height=64)
        moved = type(req)(
            prompt=moved.prompt,
            seed=(chromo.seed + 1) % 2_147_483_647,
            width=64,
            height=64,
            backend_params=moved.backend_params,
        )
        assert backend.generate(req).id != backend.generate(moved).id

    def test_negative_seed_precondition(self, store, chromo):
        backend = ProceduralBackend(store)
        req = build_request(chromo, SCHEMA, width=64, height=64)
        bad = type(req)(req.prompt, -1, 64, 64, req.backend_params)
        with pytest.raises(ValueError, match="seed out of range"):
            backend.generate(bad)

    def test_health_always_ok(self, store):
        assert ProceduralBackend(store).health().healthy

    def test_missing_chromosome_param(self, store, chromo):
        backend = ProceduralBackend(store)
        req = build_request(chromo, SCHEMA, width=64, height=64)
        stripped = type(req)(req.prompt, req.seed, 64, 64, {})
        with pytest.raises(BackendError, match="chromosome"):
            backend.generate(stripped)


class TestRemoteBackend:
    def test_stub_replay_bytes_equal_fixture(self, store, chromo, stub_server):
        backend = RemoteBackend(stub_server, store, timeout=10)
        ref = backend.generate(build_request(chromo, SCHEMA, width=64, height=64))
        assert store.get(ref.id) == FIXTURE_BYTES

    def test_payload_carries_prompt_and_seed(self, store, chromo, stub_server):
        backend = RemoteBackend(stub_server, store, steps=30, cfg_scale=9.5, timeout=10)
        backend.generate(build_request(chromo, SCHEMA, width=128, height=64))
        sent = _StubHandler.requests_seen[-1]
        assert sent["seed"] == chromo.seed
        assert sent["width"] == 128 and sent["height"] == 64
        assert sent["steps"] == 30 and sent["cfg_scale"] == 9.5
        assert sent["prompt"].startswith("Kandinsky, ")
        assert "chromosome" not in sent

    def test_unreachable_remote_raises(self, store, chromo):
        backend = RemoteBackend("http://127.0.0.1:1", store, timeout=0.5)
        with pytest.raises(BackendError, match="remote request failed"):
            backend.generate(build_request(chromo, SCHEMA, width=64, height=64))

    def test_error_status_raises(self, store, chromo, stub_server):
        _StubHandler.fail_times = 99
        backend = RemoteBackend(stub_server, store, timeout=10)
        with pytest.raises(BackendError, match="status 500"):
            backend.generate(build_request(chromo, SCHEMA, width=64, height=64))

    def test_health_against_stub(self, store, stub_server):
        assert RemoteBackend(stub_server, store).health().healthy

    def test_health_bad_url_unhealthy_with_reason(self, store):
        health = RemoteBackend("http://127.0.0.1:1", store, timeout=0.5).health()
        assert not health.healthy
        assert health.reason


class TestFallback:
    def test_retries_then_succeeds(self, store, chromo, stub_server):
        _StubHandler.fail_times = 2
        backend = RemoteBackend(stub_server, store, timeout=10)
        fallback = ProceduralBackend(store)
        ref, degraded = generate_with_fallback(
            backend, fallback, build_request(chromo, SCHEMA, width=64, height=64)
        )
        assert not degraded
        assert store.get(ref.id) == FIXTURE_BYTES

    def test_exhausted_retries_substitute_procedural(self, store, chromo, stub_server):
        _StubHandler.fail_times = 99
        backend = RemoteBackend(stub_server, store, timeout=10)
        fallback = ProceduralBackend(store)
        req = build_request(chromo, SCHEMA, width=64, height=64)
        ref, degraded = generate_with_fallback(backend, fallback, req)
        assert degraded
        assert store.get(ref.id) == render_png(chromo, 64, 64)
        assert len(_StubHandler.requests_seen) == 3  # retried twice after the first failure

    def test_procedural_without_fallback_propagates(self, store, chromo):
        backend = RemoteBackend("http://127.0.0.1:1", store, timeout=0.3)
        req = build_request(chromo, SCHEMA, width=64, height=64)
        with pytest.raises(BackendError):
            generate_with_fallback(backend, backend, req)

    def test_callback_surfaces_individual_id(self, store, chromo):
        backend = RemoteBackend("http://127.0.0.1:1", store, timeout=0.3)
        cb = make_render_callback(backend, None, SCHEMA, width=64, height=64)
        with pytest.raises(BackendError, match="individual 'g0-07'"):
            cb("g0-07", chromo)

    def test_callback_returns_ref_id(self, store, chromo):
        backend = ProceduralBackend(store)
        cb = make_render_callback(backend, backend, SCHEMA, width=64, height=64)
        ref_id, degraded = cb("g0-00", chromo)
        assert not degraded
        assert store.exists(ref_id)
