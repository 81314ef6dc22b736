"""HTTP suggestion service over loaded checkpoints.

Versioned JSON endpoints under /v1:

- ``GET  /v1/health``                  -> {"status": "ok"}
- ``POST /v1/sources``                 -> {"source_id"} (upload a wide source
  image as raw PNG/JPEG bytes, multipart/form-data, or {"image": <base64>})
- ``POST /v1/score``    {"image"}      -> {"score"} (needs a scorer checkpoint)
- ``POST /v1/suggest``  {"image"} or {"source_id", "viewport"}
                                        -> {"suggestion", "suggestion_probability",
                                            "adjustment_distribution"}
- ``POST /v1/refine``   {"source_id", "viewport", "max_steps"?, "threshold"?}
                                        -> {"trajectory": [{"viewport", "suggestion"}]}

Responses are pure functions of (checkpoints, request body); uploaded sources
are cached in memory under their content hash. Errors: 400 malformed payload,
404 unknown source or route, 413 oversized body.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import logging
import threading
from collections import OrderedDict
from email.parser import BytesParser
from email.policy import default as email_policy
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .adjuster import AdjusterModel, infer_suggestion, predict, refine_iteratively
from .config import ServiceConfig
from .geometry import ViewBox
from .imaging import decode_image_bytes, extract_view, resize
from .scorer import ScorerModel, score

logger = logging.getLogger(__name__)


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class SourceCache:
    """Bounded LRU of uploaded source images keyed by content hash."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: OrderedDict[str, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()

    def put(self, data: bytes) -> str:
        source_id = hashlib.sha256(data).hexdigest()
        image = decode_image_bytes(data)
        with self._lock:
            self._items[source_id] = image
            self._items.move_to_end(source_id)
            while len(self._items) > self.capacity:
                self._items.popitem(last=False)
        return source_id

    def get(self, source_id: str) -> np.ndarray:
        with self._lock:
            if source_id not in self._items:
                raise ServiceError(404, f"unknown source_id: {source_id}")
            self._items.move_to_end(source_id)
            return self._items[source_id]


class SuggestionService:
    """Request handlers, independent of the HTTP plumbing."""

    def __init__(
        self,
        adjuster: AdjusterModel,
        scorer: ScorerModel | None = None,
        config: ServiceConfig = ServiceConfig(),
        threshold: float = 0.5,
        frontend_dir=None,
    ):
        self.adjuster = adjuster
        self.scorer = scorer
        self.config = config
        self.threshold = threshold
        self.frontend_dir = frontend_dir
        self.sources = SourceCache(config.source_cache_size)

    # request decoding -----------------------------------------------------

    def _decode_upload(self, body: bytes, content_type: str) -> bytes:
        if content_type.startswith("application/json"):
            obj = _parse_json(body)
            return _decode_base64_field(obj)
        if content_type.startswith("multipart/"):
            header = f"Content-Type: {content_type}\r\n\r\n".encode()
            msg = BytesParser(policy=email_policy).parsebytes(header + body)
            if not msg.is_multipart():
                raise ServiceError(400, "malformed multipart body")
            for part in msg.iter_parts():
                payload = part.get_payload(decode=True)
                if payload:
                    return payload
            raise ServiceError(400, "multipart body has no file part")
        if content_type.startswith("image/") or content_type == "application/octet-stream":
            return body
        raise ServiceError(400, f"unsupported content type: {content_type}")

    def _image_from_request(self, obj: dict) -> np.ndarray:
        if "image" in obj:
            data = _decode_base64_field(obj)
            return _decode_image(data)
        if "source_id" in obj:
            source = self.sources.get(str(obj["source_id"]))
            viewport = _parse_viewport(obj)
            size = self.adjuster.trunk.input_size
            return extract_view(source, viewport, size, size)
        raise ServiceError(400, "request needs either 'image' or 'source_id' + 'viewport'")

    # endpoints ------------------------------------------------------------

    def handle_sources(self, body: bytes, content_type: str) -> dict:
        data = self._decode_upload(body, content_type)
        try:
            source_id = self.sources.put(data)
        except Exception as exc:
            raise ServiceError(400, f"cannot decode image: {exc}") from exc
        return {"source_id": source_id}

    def handle_score(self, obj: dict) -> dict:
        if self.scorer is None:
            raise ServiceError(400, "no scorer checkpoint loaded")
        if "image" not in obj:
            raise ServiceError(400, "request needs 'image'")
        image = _decode_image(_decode_base64_field(obj))
        size = self.scorer.trunk.input_size
        return {"score": score(self.scorer, resize(image, size, size))}

    def handle_suggest(self, obj: dict) -> dict:
        image = self._image_from_request(obj)
        size = self.adjuster.trunk.input_size
        if image.shape[:2] != (size, size):
            image = resize(image, size, size)
        threshold = _parse_threshold(obj, self.threshold)
        prob, dist, _ = predict(self.adjuster, image)
        suggestion = infer_suggestion(self.adjuster, image, threshold)
        return {
            "suggestion": suggestion.to_json(),
            "suggestion_probability": prob,
            "adjustment_distribution": dist.tolist(),
        }

    def handle_refine(self, obj: dict) -> dict:
        if "source_id" not in obj:
            raise ServiceError(400, "refine needs 'source_id' and 'viewport'")
        source = self.sources.get(str(obj["source_id"]))
        viewport = _parse_viewport(obj)
        max_steps = int(obj.get("max_steps", 3))
        if not 0 <= max_steps <= 16:
            raise ServiceError(400, f"max_steps out of range: {max_steps}")
        threshold = _parse_threshold(obj, self.threshold)
        trajectory = refine_iteratively(self.adjuster, source, viewport, max_steps, threshold)
        return {
            "trajectory": [
                {"viewport": box.to_json(), "suggestion": sugg.to_json()}
                for box, sugg in trajectory
            ]
        }


def _parse_json(body: bytes) -> dict:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ServiceError(400, f"malformed JSON body: {exc}") from exc
    if not isinstance(obj, dict):
        raise ServiceError(400, "JSON body must be an object")
    return obj


def _decode_base64_field(obj: dict) -> bytes:
    if "image" not in obj or not isinstance(obj["image"], str):
        raise ServiceError(400, "missing base64 'image' field")
    try:
        return base64.b64decode(obj["image"], validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ServiceError(400, f"bad base64 image: {exc}") from exc


def _decode_image(data: bytes) -> np.ndarray:
    try:
        return decode_image_bytes(data)
    except Exception as exc:
        raise ServiceError(400, f"cannot decode image: {exc}") from exc


def _parse_viewport(obj: dict) -> ViewBox:
    if "viewport" not in obj:
        raise ServiceError(400, "missing 'viewport'")
    try:
        return ViewBox.from_json(obj["viewport"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ServiceError(400, f"bad viewport: {exc}") from exc


def _parse_threshold(obj: dict, default: float) -> float:
    try:
        threshold = float(obj.get("threshold", default))
    except (TypeError, ValueError) as exc:
        raise ServiceError(400, f"bad threshold: {exc}") from exc
    if not 0.0 < threshold <= 1.0:
        raise ServiceError(400, f"threshold out of range: {threshold}")
    return threshold


class _Handler(BaseHTTPRequestHandler):
    service: SuggestionService  # set by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        logger.debug("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, obj: dict) -> None:
        payload = json.dumps(obj).encode()
        if status >= 400:
            # the request body may be partially unread (e.g. 413)
            self.close_connection = True
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        if length > self.service.config.max_image_bytes:
            raise ServiceError(413, "request body too large")
        return self.rfile.read(length)

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, {"status": "ok"})
        elif self.service.frontend_dir is not None and not self.path.startswith("/v1/"):
            self._send_static(self.path)
        else:
            self._send(404, {"error": f"unknown route: {self.path}"})

    _MIME = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
             ".map": "application/json", ".json": "application/json"}

    def _send_static(self, path: str) -> None:
        from pathlib import Path

        root = Path(self.service.frontend_dir).resolve()
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            self._send(404, {"error": f"unknown route: {path}"})
            return
        payload = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", self._MIME.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_POST(self):
        try:
            body = self._read_body()
            content_type = self.headers.get("Content-Type", "application/json")
            if self.path == "/v1/sources":
                self._send(200, self.service.handle_sources(body, content_type))
            elif self.path == "/v1/score":
                self._send(200, self.service.handle_score(_parse_json(body)))
            elif self.path == "/v1/suggest":
                self._send(200, self.service.handle_suggest(_parse_json(body)))
            elif self.path == "/v1/refine":
                self._send(200, self.service.handle_refine(_parse_json(body)))
            else:
                self._send(404, {"error": f"unknown route: {self.path}"})
        except ServiceError as exc:
            self._send(exc.status, {"error": str(exc)})
        except Exception as exc:  # internal error: surface without traceback leak
            logger.exception("internal error handling %s", self.path)
            self._send(500, {"error": f"internal error: {type(exc).__name__}"})


def make_server(service: SuggestionService, host: str | None = None, port: int | None = None):
    """Build (not start) a threading HTTP server bound to host:port."""
    handler = type("BoundHandler", (_Handler,), {"service": service})
    host = host if host is not None else service.config.host
    port = port if port is not None else service.config.port
    return ThreadingHTTPServer((host, port), handler)


def serve(service: SuggestionService, host: str | None = None, port: int | None = None) -> None:
    """Run the service until interrupted."""
    server = make_server(service, host, port)
    logger.info("serving on http://%s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()
