"""Command-line interface covering the full workflow headlessly:
catalog inspection, method instantiation, scripted tailoring,
validation, persistence, XML interchange and the HTTP service.

Exit codes: 0 on success (including warning-only validation), 2 when
validation finds errors, 1 for any other failure. Failures print one
machine-parseable ``CODE: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from mlsac import records
from mlsac.catalog import applicability_of, builtin_catalog
from mlsac.engine import explain_inclusion, instantiate, list_rules
from mlsac.errors import MlsacError, ParseError
from mlsac.model import (
    FragmentKind,
    Metamodel,
    MethodModel,
    MigrationType,
    Severity,
    check_conformance,
)
from mlsac.serialize import method_from_text, method_to_text
from mlsac.store import RepositoryStore
from mlsac.tailoring import parse_script, replay
from mlsac.xmlio import export_xml, import_xml

STORE_ENV = "MLSAC_STORE"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 1
    try:
        return args.handler(args)
    except MlsacError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IO_ERROR: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlsac", description="method-engineering workbench for cloud migration"
    )
    sub = parser.add_subparsers()

    catalog = sub.add_parser("catalog", help="inspect the fragment catalog").add_subparsers()
    cat_list = catalog.add_parser("list", help="list fragments")
    cat_list.add_argument("--kind", choices=[k.value for k in FragmentKind])
    cat_list.add_argument("--phase")
    cat_list.add_argument("--format", choices=["table", "records"], default="table")
    cat_list.set_defaults(handler=_cmd_catalog_list)
    cat_show = catalog.add_parser("show", help="show one fragment in full")
    cat_show.add_argument("fragment")
    cat_show.set_defaults(handler=_cmd_catalog_show)

    method = sub.add_parser("method", help="create, tailor, validate and share methods").add_subparsers()
    m_create = method.add_parser("create", help="instantiate a new method from the catalog")
    m_create.add_argument("--name", default="Untitled method")
    m_create.add_argument("--description", default="")
    m_create.add_argument("--types", required=True, help="comma-separated migration types, e.g. II,V")
    m_create.add_argument("--phases", required=True, help="comma-separated phase ids, e.g. plan,design")
    m_create.add_argument("--id", dest="method_id")
    m_create.add_argument("--store", default=None)
    m_create.add_argument("--out", default=None, help="also write the method file here")
    m_create.set_defaults(handler=_cmd_method_create)

    m_tailor = method.add_parser("tailor", help="apply an action script to a method")
    m_tailor.add_argument("target", help="method id in the store, or a method file")
    m_tailor.add_argument("--script", required=True)
    m_tailor.add_argument("--store", default=None)
    m_tailor.add_argument("--out", default=None)
    m_tailor.set_defaults(handler=_cmd_method_tailor)

    m_validate = method.add_parser("validate", help="check a method against the metamodel")
    m_validate.add_argument("target")
    m_validate.add_argument("--store", default=None)
    m_validate.set_defaults(handler=_cmd_method_validate)

    m_export = method.add_parser("export", help="export a method as an XML document")
    m_export.add_argument("target")
    m_export.add_argument("--xml", required=True)
    m_export.add_argument("--store", default=None)
    m_export.set_defaults(handler=_cmd_method_export)

    m_import = method.add_parser("import", help="import an XML method document")
    m_import.add_argument("file")
    m_import.add_argument("--store", default=None)
    m_import.add_argument("--force", action="store_true", help="bind despite a metamodel version mismatch")
    m_import.set_defaults(handler=_cmd_method_import)

    m_list = method.add_parser("list", help="list stored methods")
    m_list.add_argument("--store", default=None)
    m_list.set_defaults(handler=_cmd_method_list)

    rules = sub.add_parser("rules", help="transformation rule views").add_subparsers()
    r_list = rules.add_parser("list", help="list the transformation rules")
    r_list.set_defaults(handler=_cmd_rules_list)
    r_explain = rules.add_parser("explain", help="explain a fragment's inclusion per migration type")
    r_explain.add_argument("fragment")
    r_explain.add_argument("--types", required=True)
    r_explain.set_defaults(handler=_cmd_rules_explain)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--addr", default="127.0.0.1:8451", help="HOST:PORT to bind")
    srv.add_argument("--store", default=None)
    srv.add_argument("--ui", default=None, help="directory with the built UI bundle")
    srv.set_defaults(handler=_cmd_serve)

    return parser


# --- helpers -------------------------------------------------------------


def _store_dir(args) -> str | None:
    return args.store or os.environ.get(STORE_ENV)


def _open_store(args, required: bool = True) -> RepositoryStore | None:
    directory = _store_dir(args)
    if directory is None:
        if required:
            raise MlsacError(f"no store configured; pass --store or set {STORE_ENV}")
        return None
    return RepositoryStore.open_or_initialize(directory, builtin_catalog())


def _parse_types(raw: str) -> set[MigrationType]:
    try:
        return {MigrationType(part.strip()) for part in raw.split(",") if part.strip()}
    except ValueError:
        raise ParseError(f"bad migration types '{raw}' (expected I..V, comma-separated)") from None


def _load_target(args) -> tuple[MethodModel, Metamodel, RepositoryStore | None]:
    """A method target is a file path if one exists, a store id otherwise."""
    target = args.target
    if Path(target).is_file():
        method = method_from_text(Path(target).read_text("utf-8"))
        store = _open_store(args, required=False)
        if store is not None:
            try:
                return method, store.metamodel(method.metamodel_version), store
            except MlsacError:
                pass
        return method, builtin_catalog(), store
    store = _open_store(args)
    method = store.load_method(target)
    return method, store.metamodel(method.metamodel_version), store


def _print_issues(issues) -> None:
    for issue in issues:
        subjects = f" [{', '.join(issue.subjects)}]" if issue.subjects else ""
        print(f"{issue.severity.value}: {issue.code}: {issue.message}{subjects}")
    errors = sum(1 for i in issues if i.severity is Severity.ERROR)
    warnings = len(issues) - errors
    print(f"{errors} errors, {warnings} warnings")


def _print_method(method: MethodModel, metamodel: Metamodel) -> None:
    print(f"method: {method.id}")
    print(f"name: {method.name}")
    print(f"types: {','.join(t.value for t in method.migration_types)}")
    phase_rank = metamodel.phase_order()
    ordered = sorted(method.phases, key=lambda p: (phase_rank.get(p, len(phase_rank)), p))
    print(f"phases: {','.join(ordered)}")
    print(f"members ({len(method.members)}):")
    overrides = {m.fragment: m.definition_override for m in method.members}
    for phase_id in ordered:
        print(f"  {phase_id}:")
        in_phase = []
        for m in method.members:
            fragment = method.resolve(metamodel, m.fragment)
            if fragment is not None and fragment.phase == phase_id:
                in_phase.append(fragment)
        for fragment in sorted(in_phase, key=lambda f: f.id):
            marker = "*" if fragment.provenance.value == "user-defined" else " "
            override = " (definition overridden)" if overrides.get(fragment.id) else ""
            print(f"   {marker}{fragment.id}  {fragment.name} [{fragment.kind.value}]{override}")
    if method.technique_bindings:
        print("techniques:")
        for b in method.technique_bindings:
            print(f"  {b.task} <- {b.technique}")
    if method.sequences:
        print("sequences:")
        for edge in method.sequences:
            print(f"  {edge.source} -> {edge.target}")
    if method.waivers:
        print("waivers:")
        for w in method.waivers:
            print(f"  {w.fragment}: {w.justification}")


# --- catalog commands -------------------------------------------------------


def _cmd_catalog_list(args) -> int:
    metamodel = builtin_catalog()
    fragments = [
        f
        for f in sorted(metamodel.fragments, key=lambda f: f.id)
        if (args.kind is None or f.kind.value == args.kind)
        and (args.phase is None or f.phase == args.phase)
    ]
    if args.format == "records":
        out: list[records.Record] = []
        for f in fragments:
            rec = records.Record("fragment")
            rec.fields.append(("id", f.id))
            rec.fields.append(("name", f.name))
            rec.fields.append(("kind", f.kind.value))
            if f.phase is not None:
                rec.fields.append(("phase", f.phase))
            rec.fields.append(("provenance", f.provenance.value))
            rec.fields.append(("definition", f.definition))
            out.append(rec)
        schema = records.schema_map(
            records.BlockSchema(
                "fragment", keys=("id", "name", "kind", "phase", "provenance", "definition")
            )
        )
        sys.stdout.write(records.emit(out, schema))
        return 0
    rows = [(f.id, f.name, f.kind.value, f.phase or "-") for f in fragments]
    _print_table(("ID", "NAME", "KIND", "PHASE"), rows)
    return 0


def _print_table(header: tuple[str, ...], rows: list[tuple[str, ...]]) -> None:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    def fmt(row):
        return "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
    print(fmt(header))
    for row in rows:
        print(fmt(row))


def _cmd_catalog_show(args) -> int:
    metamodel = builtin_catalog()
    fragment = metamodel.fragment(args.fragment)
    if fragment is None:
        raise MlsacError(f"no fragment '{args.fragment}' in the catalog")
    print(f"id: {fragment.id}")
    print(f"name: {fragment.name}")
    print(f"kind: {fragment.kind.value}")
    if fragment.phase:
        print(f"phase: {fragment.phase}")
    if fragment.parent:
        print(f"parent: {fragment.parent}")
    print(f"provenance: {fragment.provenance.value}")
    print("definition:")
    for line in fragment.definition.splitlines() or [""]:
        print(f"  {line}")
    if fragment.definition_note:
        print(f"definition-note: {fragment.definition_note}")
    if fragment.kind is not FragmentKind.PHASE:
        print("applicability:")
        for mt in MigrationType:
            level, note = applicability_of(metamodel, fragment.id, mt)
            suffix = f" - {note}" if note else ""
            print(f"  {mt.value}: {level.value}{suffix}")
    related = [r for r in metamodel.relationships if fragment.id in (r.source, r.target)]
    if related:
        print("relationships:")
        for r in related:
            print(f"  {r.rel_type.value}: {r.source} -> {r.target} [{r.knowledge_source.value}]")
    techniques = sorted(t.technique for t in metamodel.techniques if t.task == fragment.id)
    if techniques:
        print("techniques:")
        for t in techniques:
            print(f"  {t}")
    return 0


# --- method commands -----------------------------------------------------------


def _cmd_method_create(args) -> int:
    metamodel = builtin_catalog()
    method = instantiate(
        metamodel,
        args.name,
        _parse_types(args.types),
        {p.strip() for p in args.phases.split(",") if p.strip()},
        description=args.description,
        method_id=args.method_id,
    )
    store = _open_store(args, required=False)
    if store is not None:
        store.save_method(method)
    if args.out:
        Path(args.out).write_text(method_to_text(method), "utf-8")
    _print_method(method, metamodel)
    _print_issues(check_conformance(method, metamodel))
    return 0


def _cmd_method_tailor(args) -> int:
    method, metamodel, store = _load_target(args)
    script = parse_script(Path(args.script).read_text("utf-8"))
    result = replay(method, metamodel, script)
    target_is_file = Path(args.target).is_file()
    if store is not None and not target_is_file:
        store.save_method(result.method)
    out = args.out or (args.target if target_is_file else None)
    if out:
        Path(out).write_text(method_to_text(result.method), "utf-8")
    _print_method(result.method, metamodel)
    _print_issues(result.issues)
    return 0


def _cmd_method_validate(args) -> int:
    method, metamodel, _ = _load_target(args)
    issues = check_conformance(method, metamodel)
    _print_issues(issues)
    if any(i.severity is Severity.ERROR for i in issues):
        return 2
    return 0


def _cmd_method_export(args) -> int:
    method, metamodel, _ = _load_target(args)
    Path(args.xml).write_bytes(export_xml(method, metamodel))
    print(f"exported {method.id} to {args.xml}")
    return 0


def _cmd_method_import(args) -> int:
    store = _open_store(args)
    metamodel = store.metamodel()
    method = import_xml(Path(args.file).read_bytes(), metamodel, force=args.force)
    store.save_method(method)
    _print_method(method, metamodel)
    _print_issues(check_conformance(method, metamodel))
    return 0


def _cmd_method_list(args) -> int:
    store = _open_store(args)
    rows = [
        (e.id, e.name, ",".join(t.value for t in e.migration_types), str(e.fragment_count))
        for e in store.list_methods()
    ]
    _print_table(("ID", "NAME", "TYPES", "FRAGMENTS"), rows)
    return 0


# --- rules commands ---------------------------------------------------------------


def _cmd_rules_list(args) -> int:
    for rule in list_rules(builtin_catalog()):
        print(f"{rule.rule_id}: {rule.name}")
        print(f"  {rule.meaning}")
    return 0


def _cmd_rules_explain(args) -> int:
    metamodel = builtin_catalog()
    explanation = explain_inclusion(metamodel, _parse_types(args.types), args.fragment)
    print(f"fragment: {explanation.fragment}")
    for entry in explanation.entries:
        rule = f" via {entry.rule_id}" if entry.rule_id else ""
        note = f" - {entry.situation_note}" if entry.situation_note else ""
        print(f"  {entry.migration_type.value}: {entry.level.value}{rule}{note}")
    return 0


# --- serve --------------------------------------------------------------------------


def _cmd_serve(args) -> int:
    from mlsac.service import serve

    host, _, port_raw = args.addr.partition(":")
    try:
        port = int(port_raw) if port_raw else 8451
    except ValueError:
        raise MlsacError(f"bad --addr '{args.addr}' (expected HOST:PORT)") from None
    directory = _store_dir(args)
    if directory is None:
        raise MlsacError(f"no store configured; pass --store or set {STORE_ENV}")
    serve(directory, host=host or "127.0.0.1", port=port, ui_dir=args.ui)
    return 0


if __name__ == "__main__":
    sys.exit(main())
