"""HTTP/JSON facade over the catalog, instantiation, tailoring,
validation, repository and interchange operations.

Request handling is concurrent; the core values are immutable and store
writes go through the repository's single-writer lock. Edits to one
method are additionally serialized per method id so that read-modify-
write action application cannot interleave. Error bodies always carry
``{code, message, subjects}``.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from mlsac.catalog import builtin_catalog
from mlsac.engine import instantiate
from mlsac.errors import (
    EmptySelection,
    IntegrityError,
    MlsacError,
    NotFound,
    ParseError,
    TailoringError,
    UnknownPhase,
    VersionMismatch,
)
from mlsac.model import (
    FragmentKind,
    MethodInstance,
    MigrationType,
    RelationshipType,
    Severity,
    TechniqueBinding,
    check_conformance,
    relationship_set,
)
from mlsac.serialize import (
    action_from_json,
    applicability_to_json,
    fragment_to_json,
    instance_to_json,
    issue_to_json,
    method_to_json,
    relationship_to_json,
    rule_to_json,
)
from mlsac.store import RepositoryStore
from mlsac.tailoring import apply_action
from mlsac.xmlio import export_xml, import_xml

_MAX_BODY = 8 * 1024 * 1024

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".map": "application/json; charset=utf-8",
    ".ico": "image/x-icon",
}


class _HttpFailure(Exception):
    def __init__(self, status: int, code: str, message: str, subjects: list[str] | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.subjects = subjects or []
        super().__init__(message)


def _failure_from(exc: MlsacError) -> _HttpFailure:
    if isinstance(exc, NotFound):
        return _HttpFailure(404, exc.code, str(exc))
    if isinstance(exc, TailoringError):
        return _HttpFailure(422, exc.code, str(exc))
    if isinstance(exc, IntegrityError):
        return _HttpFailure(409, exc.code, str(exc))
    if isinstance(exc, (ParseError, VersionMismatch, EmptySelection, UnknownPhase)):
        return _HttpFailure(400, exc.code, str(exc))
    return _HttpFailure(400, exc.code, str(exc))


class WorkbenchService:
    """Shared state behind the request handler."""

    def __init__(self, store: RepositoryStore, ui_dir: str | Path | None = None):
        self.store = store
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._method_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def method_lock(self, method_id: str) -> threading.Lock:
        with self._locks_guard:
            if method_id not in self._method_locks:
                self._method_locks[method_id] = threading.Lock()
            return self._method_locks[method_id]


class WorkbenchHandler(BaseHTTPRequestHandler):
    service: WorkbenchService  # assigned by make_server
    protocol_version = "HTTP/1.1"

    # --- plumbing ---------------------------------------------------------

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc) -> None:
        body = json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")
        self._send(status, body, "application/json; charset=utf-8")

    def _send_error_body(self, failure: _HttpFailure) -> None:
        self._send_json(
            failure.status,
            {"code": failure.code, "message": failure.message, "subjects": failure.subjects},
        )

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", "0") or "0")
        if length > _MAX_BODY:
            raise _HttpFailure(400, "BODY_TOO_LARGE", f"request body exceeds {_MAX_BODY} bytes")
        return self.rfile.read(length)

    def _read_json(self) -> dict:
        raw = self._read_body()
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _HttpFailure(400, "PARSE_ERROR", f"request body is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise _HttpFailure(400, "PARSE_ERROR", "request body must be a JSON object")
        return doc

    # --- dispatch -----------------------------------------------------------

    def do_GET(self):  # noqa: N802 - stdlib naming
        self._dispatch("GET")

    def do_POST(self):  # noqa: N802
        self._dispatch("POST")

    def _dispatch(self, verb: str) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        try:
            handled = self._route(verb, parts, query)
            if not handled:
                raise _HttpFailure(404, "NOT_FOUND", f"no route for {verb} {url.path}")
        except _HttpFailure as failure:
            self._send_error_body(failure)
        except MlsacError as exc:
            self._send_error_body(_failure_from(exc))

    def _route(self, verb: str, parts: list[str], query: dict[str, str]) -> bool:
        if parts and parts[0] == "app":
            if verb != "GET":
                return False
            self._serve_static(parts[1:])
            return True

        if parts[:1] == ["catalog"] and verb == "GET":
            return self._route_catalog(parts[1:], query)

        if parts[:1] == ["methods"]:
            return self._route_methods(verb, parts[1:], query)

        return False

    # --- catalog views --------------------------------------------------------

    def _catalog(self):
        return self.service.store.metamodel()

    def _route_catalog(self, parts: list[str], query: dict[str, str]) -> bool:
        metamodel = self._catalog()
        if parts == ["fragments"]:
            kind = query.get("kind")
            phase = query.get("phase")
            if kind is not None and kind not in {k.value for k in FragmentKind}:
                raise _HttpFailure(400, "PARSE_ERROR", f"unknown kind '{kind}'")
            # Catalog order (phases in lifecycle order) so clients can use
            # the listing order for display directly.
            fragments = [
                f
                for f in metamodel.fragments
                if (kind is None or f.kind.value == kind)
                and (phase is None or f.phase == phase)
            ]
            self._send_json(
                200,
                {
                    "fragments": [
                        fragment_to_json(f) | {"applicability": applicability_to_json(metamodel, f.id)}
                        for f in fragments
                    ]
                },
            )
            return True
        if len(parts) == 2 and parts[0] == "fragments":
            fragment = metamodel.fragment(parts[1])
            if fragment is None:
                raise _HttpFailure(404, "NOT_FOUND", f"no fragment '{parts[1]}' in the catalog")
            related = [
                relationship_to_json(r)
                for r in metamodel.relationships
                if parts[1] in (r.source, r.target)
            ]
            techniques = sorted(
                t.technique for t in metamodel.techniques if t.task == parts[1]
            )
            self._send_json(
                200,
                {
                    "fragment": fragment_to_json(fragment),
                    "applicability": applicability_to_json(metamodel, parts[1]),
                    "relationships": related,
                    "techniques": techniques,
                },
            )
            return True
        if parts == ["relationships"]:
            rel_filter = None
            if "type" in query:
                try:
                    rel_filter = RelationshipType(query["type"])
                except ValueError:
                    raise _HttpFailure(400, "PARSE_ERROR", f"unknown relationship type '{query['type']}'")
            self._send_json(
                200,
                {"relationships": [relationship_to_json(r) for r in relationship_set(metamodel, rel_filter)]},
            )
            return True
        if parts == ["rules"]:
            self._send_json(200, {"rules": [rule_to_json(r) for r in metamodel.rules]})
            return True
        return False

    # --- method lifecycle -------------------------------------------------------

    def _route_methods(self, verb: str, parts: list[str], query: dict[str, str]) -> bool:
        service = self.service
        store = service.store

        if not parts:
            if verb == "GET":
                entries = store.list_methods()
                self._send_json(
                    200,
                    {
                        "methods": [
                            {
                                "id": e.id,
                                "name": e.name,
                                "migration_types": [t.value for t in e.migration_types],
                                "fragment_count": e.fragment_count,
                            }
                            for e in entries
                        ]
                    },
                )
                return True
            if verb == "POST":
                self._create_method()
                return True
            return False

        if parts == ["import"] and verb == "POST":
            self._import_method(force=query.get("force") in ("1", "true"))
            return True

        method_id = parts[0]
        rest = parts[1:]

        if not rest:
            if verb != "GET":
                return False
            method = store.load_method(method_id)
            metamodel = store.metamodel(method.metamodel_version)
            self._send_json(
                200,
                {
                    "method": method_to_json(method),
                    "issues": [issue_to_json(i) for i in check_conformance(method, metamodel)],
                },
            )
            return True

        if rest == ["actions"] and verb == "POST":
            doc = self._read_json()
            action = action_from_json(doc)
            with service.method_lock(method_id):
                method = store.load_method(method_id)
                metamodel = store.metamodel(method.metamodel_version)
                result = apply_action(method, metamodel, action)
                errors = [i for i in result.issues if i.severity is Severity.ERROR]
                if errors:
                    raise _HttpFailure(
                        409,
                        "INTEGRITY_ERROR",
                        "the edit leaves the method non-conformant; it was not saved",
                        sorted({s for i in errors for s in i.subjects}),
                    )
                store.save_method(result.method)
            self._send_json(
                200,
                {
                    "method": method_to_json(result.method),
                    "issues": [issue_to_json(i) for i in result.issues],
                },
            )
            return True

        if rest == ["validate"] and verb == "POST":
            method = store.load_method(method_id)
            metamodel = store.metamodel(method.metamodel_version)
            issues = check_conformance(method, metamodel)
            self._send_json(200, {"issues": [issue_to_json(i) for i in issues]})
            return True

        if rest == ["export.xml"] and verb == "GET":
            method = store.load_method(method_id)
            metamodel = store.metamodel(method.metamodel_version)
            body = export_xml(method, metamodel)
            self._send(200, body, "application/xml; charset=utf-8")
            return True

        if rest == ["instances"] and verb == "POST":
            self._create_instance(method_id)
            return True

        return False

    def _create_method(self) -> None:
        doc = self._read_json()
        store = self.service.store
        metamodel = store.metamodel()
        try:
            mts = {MigrationType(t) for t in doc.get("migration_types", [])}
        except ValueError as exc:
            raise _HttpFailure(400, "PARSE_ERROR", f"bad migration type: {exc}")
        phases = set(doc.get("phases", []))
        name = doc.get("name") or "Untitled method"
        method = instantiate(
            metamodel,
            name,
            mts,
            phases,
            description=doc.get("description", ""),
            method_id=doc.get("id"),
        )
        with self.service.method_lock(method.id):
            store.save_method(method)
        issues = check_conformance(method, metamodel)
        self._send_json(
            201,
            {"method": method_to_json(method), "issues": [issue_to_json(i) for i in issues]},
        )

    def _import_method(self, force: bool) -> None:
        body = self._read_body()
        store = self.service.store
        metamodel = store.metamodel()
        method = import_xml(body, metamodel, force=force)
        with self.service.method_lock(method.id):
            store.save_method(method)
        issues = check_conformance(method, metamodel)
        self._send_json(
            201,
            {"method": method_to_json(method), "issues": [issue_to_json(i) for i in issues]},
        )

    def _create_instance(self, method_id: str) -> None:
        doc = self._read_json()
        store = self.service.store
        method = store.load_method(method_id)  # 404 before validation
        chosen = []
        for item in doc.get("chosen_techniques", []):
            if not isinstance(item, dict) or "task" not in item or "technique" not in item:
                raise _HttpFailure(400, "PARSE_ERROR", "chosen_techniques must be {task, technique} objects")
            chosen.append(TechniqueBinding(item["task"], item["technique"]))
        instance_id = doc.get("id") or f"{method_id}-instance-{len([i for i in store.list_instances() if i.method == method_id]) + 1}"
        instance = MethodInstance(
            id=instance_id,
            method=method.id,
            chosen_techniques=tuple(chosen),
            enactment_notes=doc.get("enactment_notes", ""),
        )
        store.save_instance(instance)
        self._send_json(201, {"instance": instance_to_json(instance)})

    # --- static UI --------------------------------------------------------------

    def _serve_static(self, parts: list[str]) -> None:
        ui_dir = self.service.ui_dir
        if ui_dir is None or not ui_dir.is_dir():
            raise _HttpFailure(404, "NOT_FOUND", "no UI bundle is configured (serve with --ui DIR)")
        relative = "/".join(parts) or "index.html"
        target = (ui_dir / relative).resolve()
        if not str(target).startswith(str(ui_dir.resolve())):
            raise _HttpFailure(404, "NOT_FOUND", "path escapes the UI bundle")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise _HttpFailure(404, "NOT_FOUND", f"no such UI file '{relative}'")
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), content_type)


def make_server(
    store: RepositoryStore, host: str = "127.0.0.1", port: int = 0, ui_dir: str | Path | None = None
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = WorkbenchService(store, ui_dir=ui_dir)
    handler = type("BoundHandler", (WorkbenchHandler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


def serve(
    store_dir: str | Path, host: str = "127.0.0.1", port: int = 8451, ui_dir: str | Path | None = None
) -> None:
    """Open (or initialize) the store and serve until interrupted."""
    store = RepositoryStore.open_or_initialize(store_dir, builtin_catalog())
    server = make_server(store, host=host, port=port, ui_dir=ui_dir)
    host_shown, port_shown = server.server_address[:2]
    print(f"serving on http://{host_shown}:{port_shown}/ (store: {store_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
