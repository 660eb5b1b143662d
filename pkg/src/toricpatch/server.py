"""Stateless HTTP API under /v1, backing the interactive editor.

Plain-threaded stdlib server: every handler is a pure function of the request
body, so identical bodies produce identical responses.  Structural body
problems map to 400, value-domain problems to 422, both with a machine
readable ``error`` object.
"""
from __future__ import annotations

import json
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import __version__
from .compatibility import check_compatible
from .errors import (CertificateDisagreement, PatchFileError, ToricError)
from .oracle import stress_certificate
from .patch import eval_patch_many
from .patchfile import make_tensor, make_triangle, parse_patchfile, serialize_patchfile
from .render import render_svg


class _BadRequest(Exception):
    pass


def _require(obj, key, kind, where="body"):
    if not isinstance(obj, dict) or key not in obj:
        raise _BadRequest(f"{where} must carry '{key}'")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise _BadRequest(f"'{key}' has the wrong type")
    return v


def handle_check(body, query) -> dict:
    pf = parse_patchfile(body)
    exact = pf.exact or query.get("exact", ["0"])[0] in ("1", "true")
    control = pf.control
    if exact and not pf.exact:
        control = tuple(tuple(Fraction(c) for c in row) for row in control)
    return check_compatible(pf.lattice, control, exact=exact).to_dict()


def handle_eval(body, query) -> dict:
    pf = parse_patchfile(_require(body, "patch", dict))
    points = _require(body, "points", list)
    spec = pf.to_spec()
    images = []
    outside = 0
    for p in points:
        if not isinstance(p, list) or len(p) != 2:
            raise _BadRequest("points must be [x, y] pairs")
        try:
            images.append([float(v) for v in eval_patch_many(spec, [tuple(p)])[0]])
        except ToricError:
            images.append(None)
            outside += 1
    return {"images": images, "outside": outside}


def handle_render(body, query) -> str:
    pf = parse_patchfile(body)
    grid = int(query.get("grid", ["12"])[0])
    return render_svg(pf, grid=grid)


def handle_stress(body, query) -> dict:
    pf = parse_patchfile(_require(body, "patch", dict))
    try:
        summary = stress_certificate(
            pf.lattice, pf.control_floats,
            trials=int(body.get("trials", 20)),
            n=int(body.get("grid", 64)),
            spread=float(body.get("spread", 100.0)),
            seed=int(body.get("seed", 0)))
    except CertificateDisagreement as exc:
        return exc.summary.to_dict()
    return summary.to_dict()


def handle_make(body, query) -> dict:
    kind = _require(body, "kind", str)
    m = int(_require(body, "m", int))
    if kind == "tensor":
        pf = make_tensor(m, int(body.get("n", m)))
    elif kind == "triangle":
        pf = make_triangle(m)
    else:
        raise _BadRequest("kind must be 'tensor' or 'triangle'")
    return serialize_patchfile(pf)


_POST_ROUTES = {
    "/v1/check": handle_check,
    "/v1/eval": handle_eval,
    "/v1/render": handle_render,
    "/v1/stress": handle_stress,
    "/v1/make": handle_make,
}


class ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    quiet = True

    def log_message(self, fmt, *args):
        if not self.quiet:
            super().log_message(fmt, *args)

    def _reply(self, status: int, payload, content_type="application/json"):
        data = payload.encode() if isinstance(payload, str) else \
            json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, code: str, message: str):
        self._reply(status, {"error": {"code": code, "message": message}})

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/v1/health":
            self._reply(200, {"status": "ok", "version": __version__})
        else:
            self._error(404, "not_found", f"no route {url.path}")

    def do_POST(self):
        url = urlparse(self.path)
        handler = _POST_ROUTES.get(url.path)
        if handler is None:
            self._error(404, "not_found", f"no route {url.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"null")
        except (ValueError, json.JSONDecodeError):
            self._error(400, "invalid_json", "request body is not valid JSON")
            return
        try:
            result = handler(body, parse_qs(url.query))
        except (_BadRequest, PatchFileError) as exc:
            self._error(400, "invalid_body", str(exc))
            return
        except (ToricError, ValueError) as exc:
            self._error(422, type(exc).__name__, str(exc))
            return
        if isinstance(result, str):
            self._reply(200, result, content_type="image/svg+xml")
        else:
            self._reply(200, result)


def make_server(bind: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((bind, port), ApiHandler)
    server.daemon_threads = True
    return server


def serve(bind: str = "127.0.0.1", port: int = 8765) -> None:
    server = make_server(bind, port)
    host, actual = server.server_address[:2]
    print(f"serving /v1 API on http://{host}:{actual}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
