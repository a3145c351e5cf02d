"""Embedded file-backed repository with four tables: Metamodel, Method,
MethodInstance and SupportiveTechniques.

Layout: one record file per table plus a manifest carrying the store
format version and the current metamodel version. Rows embed the
canonical record-grammar documents, so store files are byte-deterministic
for identical operation histories. Each write goes through a temp file
and an atomic rename while holding an exclusive store lock; readers see
only committed states and need no lock.
"""

from __future__ import annotations

import os
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from mlsac import records
from mlsac.catalog import export_catalog, load_catalog
from mlsac.errors import IntegrityError, NotFound, StorageError
from mlsac.model import (
    Metamodel,
    MethodInstance,
    MethodModel,
    MigrationType,
    Severity,
    TechniqueBinding,
    check_conformance,
)
from mlsac.serialize import method_from_text, method_to_text

STORE_FORMAT_VERSION = "1"

_MANIFEST = "manifest.records"
_TABLES = {
    "metamodel": "metamodel.records",
    "method": "method.records",
    "methodinstance": "methodinstance.records",
    "supportivetechniques": "supportivetechniques.records",
}

_STORE_SCHEMAS = records.schema_map(
    records.BlockSchema(
        "manifest",
        keys=("store-format-version", "current-metamodel"),
        required=("store-format-version", "current-metamodel"),
    ),
    records.BlockSchema("metamodel", keys=("version", "document"), required=("version", "document")),
    records.BlockSchema("method", keys=("id", "document"), required=("id", "document")),
    records.BlockSchema(
        "instance",
        keys=("id", "method", "notes"),
        required=("id", "method"),
    ),
    records.BlockSchema(
        "supportive-technique",
        keys=("instance", "task", "technique"),
        required=("instance", "task", "technique"),
    ),
)


@dataclass(frozen=True)
class MethodIndexEntry:
    id: str
    name: str
    migration_types: tuple[MigrationType, ...]
    fragment_count: int


class RepositoryStore:
    """Single-writer, multi-reader store rooted at a directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._write_lock = threading.RLock()
        manifest = self._read_table(_MANIFEST)
        if not manifest or manifest[0].kind != "manifest":
            raise StorageError(f"'{self.directory}' is not a repository store")
        if manifest[0].require("store-format-version") != STORE_FORMAT_VERSION:
            raise StorageError(
                f"unsupported store format version '{manifest[0].get('store-format-version')}'"
            )
        self._current_metamodel = manifest[0].require("current-metamodel")

    # --- setup -------------------------------------------------------------

    @classmethod
    def initialize(cls, directory: str | Path, metamodel: Metamodel) -> "RepositoryStore":
        """Create a fresh store seeded with ``metamodel`` as the current
        version. Fails if the directory already holds a store."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        if (directory / _MANIFEST).exists():
            raise StorageError(f"'{directory}' already contains a repository store")
        manifest = records.Record("manifest")
        manifest.fields = [
            ("store-format-version", STORE_FORMAT_VERSION),
            ("current-metamodel", metamodel.version),
        ]
        row = records.Record("metamodel")
        row.fields = [
            ("version", metamodel.version),
            ("document", export_catalog(metamodel).decode("utf-8")),
        ]
        _atomic_write(directory / _TABLES["metamodel"], records.emit([row], _STORE_SCHEMAS))
        for table in ("method", "methodinstance", "supportivetechniques"):
            _atomic_write(directory / _TABLES[table], "")
        _atomic_write(directory / _MANIFEST, records.emit([manifest], _STORE_SCHEMAS))
        return cls(directory)

    @classmethod
    def open_or_initialize(cls, directory: str | Path, metamodel: Metamodel) -> "RepositoryStore":
        directory = Path(directory)
        if (directory / _MANIFEST).exists():
            return cls(directory)
        return cls.initialize(directory, metamodel)

    # --- low-level I/O -------------------------------------------------------

    def _read_table(self, filename: str) -> list[records.Record]:
        path = self.directory / filename
        try:
            text = path.read_text("utf-8")
        except FileNotFoundError:
            raise StorageError(f"missing store file '{path}'") from None
        except OSError as exc:
            raise StorageError(f"cannot read '{path}': {exc}") from exc
        return records.parse(text, _STORE_SCHEMAS)

    def _write_table(self, filename: str, rows: list[records.Record]) -> None:
        _atomic_write(self.directory / filename, records.emit(rows, _STORE_SCHEMAS))

    @contextmanager
    def _exclusive(self):
        """Process-local plus OS-level exclusive lock for one write."""
        with self._write_lock:
            lock_path = self.directory / ".lock"
            fd = os.open(lock_path, os.O_CREAT | os.O_RDWR)
            try:
                try:
                    import fcntl

                    fcntl.flock(fd, fcntl.LOCK_EX)
                except ImportError:  # non-POSIX: in-process lock only
                    pass
                yield
            finally:
                os.close(fd)

    # --- metamodel table -----------------------------------------------------

    @property
    def current_metamodel_version(self) -> str:
        return self._current_metamodel

    def metamodel(self, version: str | None = None) -> Metamodel:
        wanted = version or self._current_metamodel
        for row in self._read_table(_TABLES["metamodel"]):
            if row.require("version") == wanted:
                return load_catalog(row.require("document"))
        raise NotFound(f"no metamodel version '{wanted}' in the store")

    def save_metamodel(self, metamodel: Metamodel, make_current: bool = True) -> str:
        with self._exclusive():
            rows = [r for r in self._read_table(_TABLES["metamodel"]) if r.require("version") != metamodel.version]
            row = records.Record("metamodel")
            row.fields = [
                ("version", metamodel.version),
                ("document", export_catalog(metamodel).decode("utf-8")),
            ]
            rows.append(row)
            rows.sort(key=lambda r: r.require("version"))
            self._write_table(_TABLES["metamodel"], rows)
            if make_current:
                manifest = records.Record("manifest")
                manifest.fields = [
                    ("store-format-version", STORE_FORMAT_VERSION),
                    ("current-metamodel", metamodel.version),
                ]
                _atomic_write(self.directory / _MANIFEST, records.emit([manifest], _STORE_SCHEMAS))
                self._current_metamodel = metamodel.version
        return metamodel.version

    # --- method table ---------------------------------------------------------

    def save_method(self, method: MethodModel) -> str:
        """Persist a method (overwriting by id). Rejects methods whose
        conformance check yields error-severity issues; warnings are
        allowed and persisted as-is."""
        try:
            metamodel = self.metamodel(method.metamodel_version)
        except NotFound:
            raise IntegrityError(
                f"method references unknown metamodel version '{method.metamodel_version}'"
            ) from None
        errors = [i for i in check_conformance(method, metamodel) if i.severity is Severity.ERROR]
        if errors:
            listing = "; ".join(f"{i.code}: {i.message}" for i in errors)
            raise IntegrityError(f"method cannot be saved: {listing}")

        with self._exclusive():
            # Overwriting must not orphan technique choices of instances.
            bindings = set(method.technique_bindings)
            for instance in self._instances():
                if instance.method != method.id:
                    continue
                stale = [b for b in instance.chosen_techniques if b not in bindings]
                if stale:
                    pairs = ", ".join(f"({b.task}, {b.technique})" for b in stale)
                    raise IntegrityError(
                        f"instance '{instance.id}' holds technique choices the new revision drops: {pairs}"
                    )
            rows = [r for r in self._read_table(_TABLES["method"]) if r.require("id") != method.id]
            row = records.Record("method")
            row.fields = [("id", method.id), ("document", method_to_text(method))]
            rows.append(row)
            rows.sort(key=lambda r: r.require("id"))
            self._write_table(_TABLES["method"], rows)
        return method.id

    def load_method(self, method_id: str) -> MethodModel:
        for row in self._read_table(_TABLES["method"]):
            if row.require("id") == method_id:
                return method_from_text(row.require("document"))
        raise NotFound(f"no method '{method_id}' in the store")

    def list_methods(self) -> list[MethodIndexEntry]:
        entries = []
        for row in self._read_table(_TABLES["method"]):
            method = method_from_text(row.require("document"))
            entries.append(
                MethodIndexEntry(
                    id=method.id,
                    name=method.name,
                    migration_types=method.migration_types,
                    fragment_count=len(method.members),
                )
            )
        entries.sort(key=lambda e: e.id)
        return entries

    # --- instance tables --------------------------------------------------------

    def _instances(self) -> list[MethodInstance]:
        chosen: dict[str, list[TechniqueBinding]] = {}
        for row in self._read_table(_TABLES["supportivetechniques"]):
            chosen.setdefault(row.require("instance"), []).append(
                TechniqueBinding(row.require("task"), row.require("technique"))
            )
        instances = []
        for row in self._read_table(_TABLES["methodinstance"]):
            instance_id = row.require("id")
            instances.append(
                MethodInstance(
                    id=instance_id,
                    method=row.require("method"),
                    chosen_techniques=tuple(chosen.get(instance_id, ())),
                    enactment_notes=row.get("notes", "") or "",
                )
            )
        return instances

    def save_instance(self, instance: MethodInstance) -> str:
        """Persist an enactment record. Every chosen technique must be
        among the referenced method's bindings."""
        try:
            method = self.load_method(instance.method)
        except NotFound:
            raise IntegrityError(f"instance references unknown method '{instance.method}'") from None
        bindings = set(method.technique_bindings)
        bad = [b for b in instance.chosen_techniques if b not in bindings]
        if bad:
            pairs = ", ".join(f"({b.task}, {b.technique})" for b in bad)
            raise IntegrityError(f"chosen techniques are not bound on the method: {pairs}")

        with self._exclusive():
            tech_rows = [
                r
                for r in self._read_table(_TABLES["supportivetechniques"])
                if r.require("instance") != instance.id
            ]
            for binding in instance.chosen_techniques:
                row = records.Record("supportive-technique")
                row.fields = [
                    ("instance", instance.id),
                    ("task", binding.task),
                    ("technique", binding.technique),
                ]
                tech_rows.append(row)
            tech_rows.sort(
                key=lambda r: (r.require("instance"), r.require("task"), r.require("technique"))
            )
            inst_rows = [
                r for r in self._read_table(_TABLES["methodinstance"]) if r.require("id") != instance.id
            ]
            row = records.Record("instance")
            row.fields = [("id", instance.id), ("method", instance.method)]
            if instance.enactment_notes:
                row.fields.append(("notes", instance.enactment_notes))
            inst_rows.append(row)
            inst_rows.sort(key=lambda r: r.require("id"))
            # Technique rows first: an orphan choice row is invisible to
            # reads until the instance row lands.
            self._write_table(_TABLES["supportivetechniques"], tech_rows)
            self._write_table(_TABLES["methodinstance"], inst_rows)
        return instance.id

    def load_instance(self, instance_id: str) -> MethodInstance:
        for instance in self._instances():
            if instance.id == instance_id:
                return instance
        raise NotFound(f"no method instance '{instance_id}' in the store")

    def list_instances(self) -> list[MethodInstance]:
        return sorted(self._instances(), key=lambda i: i.id)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f"cannot write '{path}': {exc}") from exc
