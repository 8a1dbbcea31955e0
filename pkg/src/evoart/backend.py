"""Image generation backends behind one `generate(request) -> ImageRef` surface.

The procedural backend renders in-process and is fully deterministic;
the remote backend posts to a Stable-Diffusion-compatible txt2img HTTP
endpoint and stores whatever bytes come back. The engine only ever sees
content-addressed ImageRefs, so swapping backends cannot change GA
behavior.
"""

from __future__ import annotations

import base64
import hashlib
import os
import threading
from dataclasses import dataclass, replace
from pathlib import Path

import requests

from .chromosome import SEED_BOUND, Chromosome, PromptText, chromosome_from_doc, chromosome_to_doc, to_prompt
from .guideline import AttributeSchema
from .render import MIN_CANVAS, render_png


class BackendError(RuntimeError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class ImageRef:
    """Content-addressed image handle; the id is the sha256 of the bytes."""

    id: str
    media_type: str
    length: int


@dataclass(frozen=True)
class RenderRequest:
    prompt: PromptText
    seed: int
    width: int
    height: int
    backend_params: dict


@dataclass(frozen=True)
class Health:
    healthy: bool
    backend: str
    reason: str = ""


def _validate_request(req: RenderRequest) -> None:
    if not (0 <= req.seed < SEED_BOUND):
        raise ValueError(f"seed out of range [0, {SEED_BOUND}): {req.seed}")
    if req.width < MIN_CANVAS or req.height < MIN_CANVAS:
        raise ValueError(f"canvas must be at least {MIN_CANVAS}x{MIN_CANVAS}")


def build_request(
    c: Chromosome,
    schema: AttributeSchema,
    *,
    width: int = 512,
    height: int = 512,
    params: dict | None = None,
) -> RenderRequest:
    """Request for one chromosome. The chromosome itself rides along in
    backend_params so the procedural backend can rebuild the geometry;
    remote backends only read the prompt text and seed."""
    merged = dict(params or {})
    merged["chromosome"] = chromosome_to_doc(c)
    return RenderRequest(
        prompt=to_prompt(c, schema),
        seed=c.seed,
        width=width,
        height=height,
        backend_params=merged,
    )


class ImageStore:
    """Content-addressed bytes on disk; writes are atomic (temp + rename)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes, media_type: str = "image/png") -> ImageRef:
        digest = hashlib.sha256(data).hexdigest()
        path = self.root / digest
        if not path.exists():
            tmp = self.root / f".{digest}.tmp"
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return ImageRef(digest, media_type, len(data))

    def get(self, ref_id: str) -> bytes:
        path = self.root / ref_id
        if not path.is_file() or "/" in ref_id or ref_id.startswith("."):
            raise KeyError(ref_id)
        return path.read_bytes()

    def exists(self, ref_id: str) -> bool:
        return (self.root / ref_id).is_file()

    @staticmethod
    def media_type_of(data: bytes) -> str:
        if data[:8] == b"\x89PNG\r\n\x1a\n":
            return "image/png"
        if data[:3] == b"\xff\xd8\xff":
            return "image/jpeg"
        return "application/octet-stream"


class ProceduralBackend:
    """In-process deterministic renderer."""

    name = "procedural"
    deterministic = True

    def __init__(self, store: ImageStore):
        self.store = store

    def generate(self, req: RenderRequest) -> ImageRef:
        _validate_request(req)
        doc = req.backend_params.get("chromosome")
        if doc is None:
            raise BackendError("procedural backend needs a chromosome in backend_params")
        c = replace(chromosome_from_doc(doc), seed=req.seed)
        return self.store.put(render_png(c, req.width, req.height))

    def health(self) -> Health:
        return Health(True, self.name)


class RemoteBackend:
    """Client for an A1111-style txt2img HTTP service.

    POSTs {prompt, seed, width, height, steps, cfg_scale} as JSON and
    expects a base64 image list in the response; path and extra fields
    are configurable. At most `max_in_flight` requests run concurrently.
    """

    name = "remote"
    deterministic = False

    def __init__(
        self,
        base_url: str,
        store: ImageStore,
        *,
        txt2img_path: str = "/sdapi/v1/txt2img",
        health_path: str = "/sdapi/v1/sd-models",
        steps: int = 20,
        cfg_scale: float = 7.0,
        timeout: float = 120.0,
        max_in_flight: int = 4,
    ):
        self.base_url = base_url.rstrip("/")
        self.store = store
        self.txt2img_path = txt2img_path
        self.health_path = health_path
        self.steps = steps
        self.cfg_scale = cfg_scale
        self.timeout = timeout
        self._gate = threading.BoundedSemaphore(max_in_flight)

    def generate(self, req: RenderRequest) -> ImageRef:
        _validate_request(req)
        payload = {
            "prompt": req.prompt.text,
            "seed": req.seed,
            "width": req.width,
            "height": req.height,
            "steps": self.steps,
            "cfg_scale": self.cfg_scale,
        }
        payload.update(
            {k: v for k, v in req.backend_params.items() if k not in ("chromosome",)}
        )
        with self._gate:
            try:
                resp = requests.post(
                    self.base_url + self.txt2img_path, json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                raise BackendError(f"remote request failed: {exc}") from exc
        if resp.status_code != 200:
            raise BackendError(f"remote returned status {resp.status_code}")
        try:
            b64 = resp.json()["images"][0]
        except (ValueError, KeyError, IndexError) as exc:
            raise BackendError("remote response carries no images") from exc
        if b64.startswith("data:"):
            b64 = b64.split(",", 1)[1]
        try:
            data = base64.b64decode(b64, validate=True)
        except (ValueError, TypeError) as exc:
            raise BackendError("remote image is not valid base64") from exc
        return self.store.put(data, ImageStore.media_type_of(data))

    def health(self) -> Health:
        try:
            resp = requests.get(self.base_url + self.health_path, timeout=5)
        except requests.RequestException as exc:
            return Health(False, self.name, str(exc))
        if resp.status_code != 200:
            return Health(False, self.name, f"status {resp.status_code}")
        return Health(True, self.name)


def generate_with_fallback(backend, fallback, req: RenderRequest, attempts: int = 3):
    """Try the configured backend `attempts` times, then substitute the
    fallback and mark the result degraded. Returns (ImageRef, degraded)."""
    last: BackendError | None = None
    for _ in range(attempts):
        try:
            return backend.generate(req), False
        except BackendError as exc:
            last = exc
    if fallback is None or fallback is backend:
        raise last
    return fallback.generate(req), True


def make_render_callback(
    backend,
    fallback,
    schema: AttributeSchema,
    *,
    width: int = 512,
    height: int = 512,
    params: dict | None = None,
):
    """Adapter with the engine's render signature: (id, chromosome) ->
    (ref id, degraded). Failures carry the individual's id."""

    def _render(individual_id: str, chromosome: Chromosome):
        req = build_request(chromosome, schema, width=width, height=height, params=params)
        try:
            ref, degraded = generate_with_fallback(backend, fallback, req)
        except BackendError as exc:
            raise BackendError(f"individual '{individual_id}': {exc.reason}") from exc
        return ref.id, degraded

    return _render
