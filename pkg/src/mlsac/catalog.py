"""Catalog files: the versioned on-disk form of a metamodel.

The shipped seed catalog lives in ``data/catalog.records``. Loading
enforces every structural invariant (unique ids, resolvable references,
kind constraints); export is canonical and byte-deterministic, so
``load(export(m))`` is structurally equal to ``m`` and equal metamodels
always serialize to identical bytes.
"""

from __future__ import annotations

import functools
from importlib import resources

from mlsac import records
from mlsac.errors import IntegrityError, ParseError, UnknownFragment
from mlsac.model import (
    ApplicabilityEntry,
    ApplicabilityLevel,
    FragmentKind,
    FragmentRelationship,
    KnowledgeSource,
    Metamodel,
    MethodFragment,
    MigrationType,
    Provenance,
    RelationshipType,
    TechniqueAssignment,
    TransformationRule,
)

FORMAT_VERSION = "1"

CATALOG_SCHEMAS = records.schema_map(
    records.BlockSchema(
        "catalog",
        keys=("format-version", "version"),
        required=("format-version", "version"),
    ),
    records.BlockSchema(
        "fragment",
        keys=("id", "name", "kind", "phase", "parent", "provenance", "definition", "definition-note"),
        required=("id", "name", "kind", "provenance", "definition"),
    ),
    records.BlockSchema(
        "relationship",
        keys=("type", "source", "target", "knowledge-source"),
        required=("type", "source", "target", "knowledge-source"),
    ),
    records.BlockSchema(
        "applicability",
        keys=("fragment", "migration-type", "level", "note"),
        required=("fragment", "migration-type", "level"),
    ),
    records.BlockSchema(
        "technique",
        keys=("task", "technique"),
        required=("task", "technique"),
    ),
    records.BlockSchema(
        "rule",
        keys=("id", "name", "meaning", "action", "phases", "kinds", "levels", "syntax-note"),
        required=("id", "name", "meaning"),
    ),
)


def _enum(cls, raw: str, what: str, line: int):
    try:
        return cls(raw)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ParseError(f"bad {what} '{raw}' (expected one of: {choices})", line=line) from None


def load_catalog(source: bytes | str) -> Metamodel:
    """Parse and validate a catalog document.

    Raises ParseError for malformed documents and IntegrityError (naming
    the offending ids) for structurally broken ones.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    parsed = records.parse(text, CATALOG_SCHEMAS)
    if not parsed or parsed[0].kind != "catalog":
        raise ParseError("document must start with a [catalog] block")
    header = parsed[0]
    if header.require("format-version") != FORMAT_VERSION:
        raise ParseError(
            f"unsupported format-version '{header.get('format-version')}'", line=header.line
        )
    version = header.require("version")

    fragments: list[MethodFragment] = []
    relationships: list[FragmentRelationship] = []
    applicability: list[ApplicabilityEntry] = []
    techniques: list[TechniqueAssignment] = []
    rules: list[TransformationRule] = []

    for rec in parsed[1:]:
        if rec.kind == "catalog":
            raise ParseError("duplicate [catalog] block", line=rec.line)
        if rec.kind == "fragment":
            fragments.append(
                MethodFragment(
                    id=rec.require("id"),
                    name=rec.require("name"),
                    kind=_enum(FragmentKind, rec.require("kind"), "kind", rec.line),
                    definition=rec.require("definition"),
                    phase=rec.get("phase"),
                    provenance=_enum(Provenance, rec.require("provenance"), "provenance", rec.line),
                    parent=rec.get("parent"),
                    definition_note=rec.get("definition-note"),
                )
            )
        elif rec.kind == "relationship":
            relationships.append(
                FragmentRelationship(
                    rel_type=_enum(RelationshipType, rec.require("type"), "relationship type", rec.line),
                    source=rec.require("source"),
                    target=rec.require("target"),
                    knowledge_source=_enum(KnowledgeSource, rec.require("knowledge-source"), "knowledge source", rec.line),
                )
            )
        elif rec.kind == "applicability":
            applicability.append(
                ApplicabilityEntry(
                    fragment=rec.require("fragment"),
                    migration_type=_enum(MigrationType, rec.require("migration-type"), "migration type", rec.line),
                    level=_enum(ApplicabilityLevel, rec.require("level"), "applicability level", rec.line),
                    situation_note=rec.get("note"),
                )
            )
        elif rec.kind == "technique":
            techniques.append(
                TechniqueAssignment(task=rec.require("task"), technique=rec.require("technique"))
            )
        elif rec.kind == "rule":
            kinds = tuple(
                _enum(FragmentKind, k, "kind", rec.line)
                for k in _split_list(rec.get("kinds"))
            )
            levels = tuple(
                _enum(ApplicabilityLevel, l, "applicability level", rec.line)
                for l in _split_list(rec.get("levels"))
            )
            rules.append(
                TransformationRule(
                    rule_id=rec.require("id"),
                    name=rec.require("name"),
                    meaning=rec.require("meaning"),
                    action=rec.get("action"),
                    phase_filter=rec.get("phases", "selected") or "selected",
                    kind_filter=kinds,
                    level_filter=levels,
                    syntax_note=rec.get("syntax-note", "") or "",
                )
            )

    metamodel = Metamodel(
        version=version,
        fragments=tuple(fragments),
        relationships=tuple(relationships),
        applicability=tuple(applicability),
        techniques=tuple(techniques),
        rules=tuple(rules),
    )
    problems = integrity_problems(metamodel)
    if problems:
        raise IntegrityError("; ".join(problems))
    return metamodel


def _split_list(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [part.strip() for part in raw.split(",") if part.strip()]


def integrity_problems(metamodel: Metamodel) -> list[str]:
    """All referential-integrity and kind-constraint violations, each
    naming the ids involved. Empty list means the metamodel is sound."""
    problems: list[str] = []
    by_id: dict[str, MethodFragment] = {}
    for f in metamodel.fragments:
        if f.id in by_id:
            problems.append(f"duplicate fragment id '{f.id}'")
        by_id[f.id] = f

    needs_phase = (FragmentKind.TASK, FragmentKind.WORK_PRODUCT, FragmentKind.PRINCIPLE)
    for f in metamodel.fragments:
        if f.kind in needs_phase:
            if f.phase is None:
                problems.append(f"{f.kind.value} '{f.id}' has no phase")
            elif f.phase not in by_id:
                problems.append(f"'{f.id}' references missing phase '{f.phase}'")
            elif by_id[f.phase].kind is not FragmentKind.PHASE:
                problems.append(f"'{f.id}' phase '{f.phase}' is a {by_id[f.phase].kind.value}")
        elif f.phase is not None:
            problems.append(f"{f.kind.value} '{f.id}' must not carry a phase")
        if f.parent is not None:
            parent = by_id.get(f.parent)
            if parent is None:
                problems.append(f"'{f.id}' references missing parent '{f.parent}'")
            elif parent.kind is not f.kind:
                problems.append(f"'{f.id}' ({f.kind.value}) extends '{f.parent}' ({parent.kind.value})")

    for r in metamodel.relationships:
        label = f"{r.rel_type.value} {r.source} -> {r.target}"
        if r.source == r.target:
            problems.append(f"self-relationship: {label}")
        missing = [x for x in (r.source, r.target) if x not in by_id]
        if missing:
            problems.append(f"relationship {label} references missing fragment(s) {', '.join(repr(m) for m in missing)}")
            continue
        if r.rel_type is RelationshipType.IS_A_GROUP_OF and by_id[r.target].kind is not FragmentKind.PHASE:
            problems.append(f"{label}: target must be a phase")
        if r.rel_type is RelationshipType.PRODUCES and by_id[r.target].kind is not FragmentKind.WORK_PRODUCT:
            problems.append(f"{label}: target must be a work-product")

    seen_cells: set[tuple[str, MigrationType]] = set()
    for e in metamodel.applicability:
        cell = (e.fragment, e.migration_type)
        if cell in seen_cells:
            problems.append(f"duplicate applicability cell ({e.fragment}, {e.migration_type.value})")
        seen_cells.add(cell)
        if e.fragment not in by_id:
            problems.append(f"applicability entry for missing fragment '{e.fragment}'")
        if e.level is ApplicabilityLevel.SITUATIONAL and not e.situation_note:
            problems.append(f"situational cell ({e.fragment}, {e.migration_type.value}) lacks a note")

    for t in metamodel.techniques:
        task = by_id.get(t.task)
        technique = by_id.get(t.technique)
        if task is None:
            problems.append(f"technique assignment references missing task '{t.task}'")
        elif task.kind is not FragmentKind.TASK:
            problems.append(f"technique assigned to '{t.task}' which is a {task.kind.value}")
        if technique is None:
            problems.append(f"technique assignment references missing technique '{t.technique}'")
        elif technique.kind is not FragmentKind.TECHNIQUE:
            problems.append(f"'{t.technique}' in technique assignment is a {technique.kind.value}")

    seen_rules: set[str] = set()
    for rule in metamodel.rules:
        if rule.rule_id in seen_rules:
            problems.append(f"duplicate rule id '{rule.rule_id}'")
        seen_rules.add(rule.rule_id)
        if rule.action not in (None, "include-fragments", "include-relationships"):
            problems.append(f"rule '{rule.rule_id}' has unknown action '{rule.action}'")
        if rule.phase_filter != "selected":
            for phase_id in _split_list(rule.phase_filter):
                if phase_id not in by_id:
                    problems.append(f"rule '{rule.rule_id}' references missing phase '{phase_id}'")

    return problems


def export_catalog(metamodel: Metamodel) -> bytes:
    """Serialize a metamodel canonically. Comments are not part of the
    model, so exporting never emits any; two structurally equal
    metamodels produce identical bytes."""
    out: list[records.Record] = []
    header = records.Record("catalog")
    header.fields = [("format-version", FORMAT_VERSION), ("version", metamodel.version)]
    out.append(header)

    for f in metamodel.fragments:
        rec = records.Record("fragment")
        rec.fields.append(("id", f.id))
        rec.fields.append(("name", f.name))
        rec.fields.append(("kind", f.kind.value))
        if f.phase is not None:
            rec.fields.append(("phase", f.phase))
        if f.parent is not None:
            rec.fields.append(("parent", f.parent))
        rec.fields.append(("provenance", f.provenance.value))
        rec.fields.append(("definition", f.definition))
        if f.definition_note is not None:
            rec.fields.append(("definition-note", f.definition_note))
        out.append(rec)

    for r in metamodel.relationships:
        rec = records.Record("relationship")
        rec.fields = [
            ("type", r.rel_type.value),
            ("source", r.source),
            ("target", r.target),
            ("knowledge-source", r.knowledge_source.value),
        ]
        out.append(rec)

    for e in metamodel.applicability:
        rec = records.Record("applicability")
        rec.fields = [
            ("fragment", e.fragment),
            ("migration-type", e.migration_type.value),
            ("level", e.level.value),
        ]
        if e.situation_note is not None:
            rec.fields.append(("note", e.situation_note))
        out.append(rec)

    for t in metamodel.techniques:
        rec = records.Record("technique")
        rec.fields = [("task", t.task), ("technique", t.technique)]
        out.append(rec)

    for rule in metamodel.rules:
        rec = records.Record("rule")
        rec.fields = [("id", rule.rule_id), ("name", rule.name), ("meaning", rule.meaning)]
        if rule.action is not None:
            rec.fields.append(("action", rule.action))
            rec.fields.append(("phases", rule.phase_filter))
            if rule.kind_filter:
                rec.fields.append(("kinds", ",".join(k.value for k in rule.kind_filter)))
            if rule.level_filter:
                rec.fields.append(("levels", ",".join(l.value for l in rule.level_filter)))
        if rule.syntax_note:
            rec.fields.append(("syntax-note", rule.syntax_note))
        out.append(rec)

    return records.emit(out, CATALOG_SCHEMAS).encode("utf-8")


def applicability_of(
    metamodel: Metamodel, fragment_id: str, mt: MigrationType
) -> tuple[ApplicabilityLevel, str | None]:
    """Matrix lookup for one (fragment, migration type) cell."""
    if metamodel.fragment(fragment_id) is None:
        raise UnknownFragment(f"no fragment '{fragment_id}' in the metamodel")
    return metamodel.level_of(fragment_id, mt)


@functools.lru_cache(maxsize=1)
def builtin_catalog() -> Metamodel:
    """The shipped seed metamodel (cached; values are immutable)."""
    data = resources.files("mlsac.data").joinpath("catalog.records").read_text("utf-8")
    return load_catalog(data)
