"""Clients for the four external model services.

One gateway fronts a pluggable backend that provides chat-vision completion,
text/image embedding, region captioning, and visual grounding. Two backends
ship here: an HTTP backend speaking chat-completions / embeddings REST shapes
(plus minimal /ground and /caption endpoints), and a scripted backend that
replays canned responses from a JSON table for deterministic, GPU-free runs.

The gateway enforces response contracts before returning: embeddings are
unit-normalized and dimension-checked, grounding boxes must be valid, and
caption crops must meet the minimum size.
"""

from __future__ import annotations

import base64
import hashlib
import json
import mimetypes
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from mmee.boxes import BoundingBox

MIN_CROP_SIZE = 16  # pixels per side; smaller crops caption meaninglessly
DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 256
DEFAULT_TIMEOUT = 60.0
DEFAULT_RETRIES = 3


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    """Network/HTTP failure that persisted through retries."""


class MalformedReplyError(GatewayError):
    """Endpoint replied but not in the expected shape."""


class ScriptMissError(GatewayError):
    """Scripted backend has no entry for the request key."""


class NoRegionFoundError(GatewayError):
    """Grounding service found no region for the description."""


class DegenerateCropError(GatewayError):
    """Caption crop below the minimum usable size."""


@dataclass(frozen=True)
class ChatVisionRequest:
    prompt: str
    image: str = ""  # path, URL, or opaque id
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    key: str | None = None  # explicit scripted-backend key; digest of prompt otherwise

    def script_key(self) -> str:
        if self.key is not None:
            return f"chat|{self.key}"
        digest = hashlib.sha256(self.prompt.encode("utf-8")).hexdigest()[:16]
        return f"chat|sha256:{digest}"


class ScriptedBackend:
    """Replays canned responses from a JSON map of "<service>|<key>" -> value.

    Key construction per service:
      chat    "chat|<explicit key>"  or  "chat|sha256:<16-hex prompt digest>"
      embed   "embed|text|<payload>"  /  "embed|image|<image handle>"
      caption "caption|<image>|<x1>,<y1>,<x2>,<y2>"
      ground  "ground|<image>|<description>"

    Lookups are exact; a missing key raises ScriptMissError. A ground entry of
    null encodes "no region found".
    """

    name = "scripted"

    def __init__(self, table: dict):
        self.table = dict(table)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def _lookup(self, key: str):
        if key not in self.table:
            raise ScriptMissError(f"no scripted response for key {key!r}")
        return self.table[key]

    def chat(self, request: ChatVisionRequest) -> str:
        return str(self._lookup(request.script_key()))

    def embed(self, kind: str, payload: str) -> list[float]:
        vec = self._lookup(f"embed|{kind}|{payload}")
        return [float(v) for v in vec]

    def caption(self, image: str, box: BoundingBox) -> str:
        key = f"caption|{image}|{box.x1:g},{box.y1:g},{box.x2:g},{box.y2:g}"
        return str(self._lookup(key))

    def ground(self, image: str, description: str):
        value = self._lookup(f"ground|{image}|{description}")
        return value  # list of 4 coords, or None for no-region


def _image_payload(image: str) -> str:
    """Turn an image handle into a data URI (or pass HTTP URLs through)."""
    if image.startswith(("http://", "https://", "data:")):
        return image
    path = Path(image)
    mime = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
    data = base64.b64encode(path.read_bytes()).decode("ascii")
    return f"data:{mime};base64,{data}"


class HttpBackend:
    """REST backend: chat-completions + embeddings shapes, /ground, /caption."""

    name = "http"

    def __init__(
        self,
        base_url: str,
        model: str = "default",
        token: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.token = token
        self.timeout = timeout
        self.retries = retries

    def _post(self, path: str, payload: dict) -> requests.Response:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last_err: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = requests.post(
                    f"{self.base_url}{path}", json=payload, headers=headers, timeout=self.timeout
                )
                if resp.status_code == 404:
                    return resp  # meaningful for /ground
                if resp.status_code >= 400:
                    raise TransportError(f"{path} returned {resp.status_code}: {resp.text[:200]}")
                return resp
            except (requests.RequestException, TransportError) as exc:
                last_err = exc
                if attempt + 1 < self.retries:
                    time.sleep(0.2 * 2**attempt)
        raise TransportError(f"request to {path} failed after {self.retries} attempts: {last_err}")

    def chat(self, request: ChatVisionRequest) -> str:
        content: list[dict] = [{"type": "text", "text": request.prompt}]
        if request.image:
            content.append({"type": "image_url", "image_url": {"url": _image_payload(request.image)}})
        payload = {
            "model": self.model,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [{"role": "user", "content": content}],
        }
        resp = self._post("/v1/chat/completions", payload)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedReplyError(f"bad chat completion reply: {exc}") from exc

    def embed(self, kind: str, payload: str) -> list[float]:
        body = {"model": self.model, "input": _image_payload(payload) if kind == "image" else payload}
        resp = self._post("/v1/embeddings", body)
        try:
            return [float(v) for v in resp.json()["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedReplyError(f"bad embeddings reply: {exc}") from exc

    def caption(self, image: str, box: BoundingBox) -> str:
        # The endpoint takes a pre-cropped image; cropping happens client-side.
        cropped = _crop_to_data_uri(image, box)
        resp = self._post("/caption", {"image": cropped})
        try:
            return str(resp.json()["caption"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedReplyError(f"bad caption reply: {exc}") from exc

    def ground(self, image: str, description: str):
        resp = self._post("/ground", {"image": _image_payload(image), "query": description})
        if resp.status_code == 404:
            return None
        try:
            return resp.json()["box"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedReplyError(f"bad grounding reply: {exc}") from exc


def _crop_to_data_uri(image: str, box: BoundingBox) -> str:
    import io

    from PIL import Image  # local import; PIL only needed for live captioning

    with Image.open(image) as img:
        crop = img.crop((int(box.x1), int(box.y1), int(box.x2), int(box.y2)))
        buf = io.BytesIO()
        crop.save(buf, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


@dataclass
class CallCounter:
    """Thread-safe per-service call counts, kept for run manifests."""

    counts: dict[str, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bump(self, service: str) -> None:
        with self._lock:
            self.counts[service] = self.counts.get(service, 0) + 1

    def get(self, service: str) -> int:
        with self._lock:
            return self.counts.get(service, 0)

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self.counts)


class ModelGateway:
    """Contract-enforcing front for a chat/embed/caption/ground backend."""

    def __init__(self, backend, embed_dim: int | None = None, max_parallel: int = 4):
        self.backend = backend
        self.embed_dim = embed_dim
        self.counter = CallCounter()
        self._slots = threading.Semaphore(max_parallel)

    def chat_vision(self, request: ChatVisionRequest) -> str:
        if not request.prompt:
            raise ValueError("empty prompt")
        with self._slots:
            self.counter.bump("chat")
            return self.backend.chat(request)

    def embed(self, kind: str, payload: str) -> np.ndarray:
        if kind not in ("text", "image"):
            raise ValueError(f"embed kind must be text or image, got {kind!r}")
        if not payload:
            raise ValueError("empty embed payload")
        with self._slots:
            self.counter.bump("embed")
            raw = self.backend.embed(kind, payload)
        vec = np.asarray(raw, dtype=np.float64)
        if not np.all(np.isfinite(vec)):
            raise MalformedReplyError("embedding contains non-finite values")
        if self.embed_dim is not None and vec.shape != (self.embed_dim,):
            raise MalformedReplyError(
                f"embedding dimension {vec.shape} != configured ({self.embed_dim},)"
            )
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise MalformedReplyError("zero embedding vector")
        return vec / norm

    def caption_region(self, image: str, box: BoundingBox) -> str:
        if box.width < MIN_CROP_SIZE or box.height < MIN_CROP_SIZE:
            raise DegenerateCropError(
                f"crop {box.width:g}x{box.height:g} below minimum {MIN_CROP_SIZE}px"
            )
        with self._slots:
            self.counter.bump("caption")
            caption = self.backend.caption(image, box)
        if not caption.strip():
            raise MalformedReplyError("empty caption")
        return caption

    def ground(self, image: str, description: str) -> BoundingBox:
        description = description.strip()
        if not description or description.lower() == "none":
            raise ValueError("grounding needs a non-empty description")
        with self._slots:
            self.counter.bump("ground")
            coords = self.backend.ground(image, description)
        if coords is None:
            raise NoRegionFoundError(f"no region found for {description!r} in {image}")
        return BoundingBox.from_list(coords)
