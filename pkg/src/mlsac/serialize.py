"""Method documents and wire forms.

Two serializations of a method model live here: the record-grammar form
(used by the repository tables, method files on disk and the CLI's
``--format records`` mode) and the JSON form spoken by the HTTP service.
Both are canonical: equal values produce identical output.
"""

from __future__ import annotations

from typing import Any

from mlsac import records
from mlsac.errors import ParseError
from mlsac.model import (
    ApplicabilityLevel,
    FragmentInclusion,
    FragmentKind,
    FragmentRelationship,
    Metamodel,
    MethodFragment,
    MethodInstance,
    MethodModel,
    MigrationType,
    Provenance,
    SequenceEdge,
    TechniqueBinding,
    TransformationRule,
    ValidationIssue,
    Waiver,
)
from mlsac.tailoring import (
    AddFragment,
    BindTechnique,
    EditDefinition,
    ExtendFragment,
    RemoveFragment,
    SetSequence,
    TailoringAction,
    UnbindTechnique,
)

METHOD_SCHEMAS = records.schema_map(
    records.BlockSchema(
        "method",
        keys=("id", "name", "description", "metamodel-version", "migration-types", "phases"),
        required=("id", "name", "metamodel-version", "migration-types", "phases"),
    ),
    records.BlockSchema("member", keys=("fragment", "override"), required=("fragment",)),
    records.BlockSchema(
        "user-fragment",
        keys=("id", "name", "kind", "phase", "parent", "definition"),
        required=("id", "name", "kind", "definition"),
    ),
    records.BlockSchema("sequence", keys=("from", "to"), required=("from", "to")),
    records.BlockSchema("binding", keys=("task", "technique"), required=("task", "technique")),
    records.BlockSchema("waiver", keys=("fragment", "justification"), required=("fragment", "justification")),
)


def method_to_records(method: MethodModel) -> list[records.Record]:
    out: list[records.Record] = []
    head = records.Record("method")
    head.fields = [
        ("id", method.id),
        ("name", method.name),
        ("description", method.description),
        ("metamodel-version", method.metamodel_version),
        ("migration-types", ",".join(t.value for t in method.migration_types)),
        ("phases", ",".join(method.phases)),
    ]
    out.append(head)
    for m in method.members:
        rec = records.Record("member")
        rec.fields.append(("fragment", m.fragment))
        if m.definition_override is not None:
            rec.fields.append(("override", m.definition_override))
        out.append(rec)
    for f in method.user_fragments:
        rec = records.Record("user-fragment")
        rec.fields.append(("id", f.id))
        rec.fields.append(("name", f.name))
        rec.fields.append(("kind", f.kind.value))
        if f.phase is not None:
            rec.fields.append(("phase", f.phase))
        if f.parent is not None:
            rec.fields.append(("parent", f.parent))
        rec.fields.append(("definition", f.definition))
        out.append(rec)
    for edge in method.sequences:
        rec = records.Record("sequence")
        rec.fields = [("from", edge.source), ("to", edge.target)]
        out.append(rec)
    for b in method.technique_bindings:
        rec = records.Record("binding")
        rec.fields = [("task", b.task), ("technique", b.technique)]
        out.append(rec)
    for w in method.waivers:
        rec = records.Record("waiver")
        rec.fields = [("fragment", w.fragment), ("justification", w.justification)]
        out.append(rec)
    return out


def method_to_text(method: MethodModel) -> str:
    return records.emit(method_to_records(method), METHOD_SCHEMAS)


def method_from_records(parsed: list[records.Record]) -> MethodModel:
    if not parsed or parsed[0].kind != "method":
        raise ParseError("method document must start with a [method] block")
    head = parsed[0]
    try:
        migration_types = tuple(
            MigrationType(part)
            for part in head.require("migration-types").split(",")
            if part
        )
    except ValueError as exc:
        raise ParseError(f"bad migration-types: {exc}", line=head.line) from None

    members: list[FragmentInclusion] = []
    user_fragments: list[MethodFragment] = []
    sequences: list[SequenceEdge] = []
    bindings: list[TechniqueBinding] = []
    waivers: list[Waiver] = []
    for rec in parsed[1:]:
        if rec.kind == "member":
            members.append(
                FragmentInclusion(rec.require("fragment"), definition_override=rec.get("override"))
            )
        elif rec.kind == "user-fragment":
            try:
                kind = FragmentKind(rec.require("kind"))
            except ValueError:
                raise ParseError(f"bad kind '{rec.get('kind')}'", line=rec.line) from None
            user_fragments.append(
                MethodFragment(
                    id=rec.require("id"),
                    name=rec.require("name"),
                    kind=kind,
                    definition=rec.require("definition"),
                    phase=rec.get("phase"),
                    provenance=Provenance.USER_DEFINED,
                    parent=rec.get("parent"),
                )
            )
        elif rec.kind == "sequence":
            sequences.append(SequenceEdge(rec.require("from"), rec.require("to")))
        elif rec.kind == "binding":
            bindings.append(TechniqueBinding(rec.require("task"), rec.require("technique")))
        elif rec.kind == "waiver":
            waivers.append(Waiver(rec.require("fragment"), rec.require("justification")))
        elif rec.kind == "method":
            raise ParseError("duplicate [method] block", line=rec.line)
    return MethodModel(
        id=head.require("id"),
        name=head.require("name"),
        description=head.get("description", "") or "",
        metamodel_version=head.require("metamodel-version"),
        migration_types=migration_types,
        phases=tuple(p for p in head.require("phases").split(",") if p),
        members=tuple(members),
        user_fragments=tuple(user_fragments),
        sequences=tuple(sequences),
        technique_bindings=tuple(bindings),
        waivers=tuple(waivers),
    )


def method_from_text(text: str) -> MethodModel:
    return method_from_records(records.parse(text, METHOD_SCHEMAS))


# --- JSON wire forms -------------------------------------------------------


def fragment_to_json(fragment: MethodFragment) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": fragment.id,
        "name": fragment.name,
        "kind": fragment.kind.value,
        "definition": fragment.definition,
        "provenance": fragment.provenance.value,
    }
    if fragment.phase is not None:
        doc["phase"] = fragment.phase
    if fragment.parent is not None:
        doc["parent"] = fragment.parent
    if fragment.definition_note is not None:
        doc["definition_note"] = fragment.definition_note
    return doc


def relationship_to_json(rel: FragmentRelationship) -> dict[str, Any]:
    return {
        "type": rel.rel_type.value,
        "category": rel.rel_type.category,
        "source": rel.source,
        "target": rel.target,
        "knowledge_source": rel.knowledge_source.value,
    }


def rule_to_json(rule: TransformationRule) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "id": rule.rule_id,
        "name": rule.name,
        "meaning": rule.meaning,
    }
    if rule.action is not None:
        doc["action"] = rule.action
    if rule.syntax_note:
        doc["syntax_note"] = rule.syntax_note
    return doc


def issue_to_json(issue: ValidationIssue) -> dict[str, Any]:
    return {
        "severity": issue.severity.value,
        "code": issue.code,
        "message": issue.message,
        "subjects": list(issue.subjects),
    }


def method_to_json(method: MethodModel) -> dict[str, Any]:
    return {
        "id": method.id,
        "name": method.name,
        "description": method.description,
        "metamodel_version": method.metamodel_version,
        "migration_types": [t.value for t in method.migration_types],
        "phases": list(method.phases),
        "members": [
            {"fragment": m.fragment}
            | ({"definition_override": m.definition_override} if m.definition_override is not None else {})
            for m in method.members
        ],
        "user_fragments": [fragment_to_json(f) for f in method.user_fragments],
        "sequences": [{"from": e.source, "to": e.target} for e in method.sequences],
        "technique_bindings": [
            {"task": b.task, "technique": b.technique} for b in method.technique_bindings
        ],
        "waivers": [
            {"fragment": w.fragment, "justification": w.justification} for w in method.waivers
        ],
    }


def instance_to_json(instance: MethodInstance) -> dict[str, Any]:
    return {
        "id": instance.id,
        "method": instance.method,
        "chosen_techniques": [
            {"task": b.task, "technique": b.technique} for b in instance.chosen_techniques
        ],
        "enactment_notes": instance.enactment_notes,
    }


def applicability_to_json(
    metamodel: Metamodel, fragment_id: str
) -> list[dict[str, Any]]:
    entries = []
    for mt in MigrationType:
        level, note = metamodel.level_of(fragment_id, mt)
        entry: dict[str, Any] = {"migration_type": mt.value, "level": level.value}
        if note is not None:
            entry["situation_note"] = note
        entries.append(entry)
    return entries


_ACTION_KIND_ERR = "action document must carry an 'op' field"


def action_from_json(doc: dict[str, Any]) -> TailoringAction:
    """Decode one tailoring action from its JSON form (the shape POSTed
    to the service)."""
    if not isinstance(doc, dict) or "op" not in doc:
        raise ParseError(_ACTION_KIND_ERR)
    op = doc["op"]

    def need(key: str) -> Any:
        if key not in doc:
            raise ParseError(f"action '{op}' is missing field '{key}'")
        return doc[key]

    if op == "add-fragment":
        try:
            kind = FragmentKind(need("kind"))
        except ValueError:
            raise ParseError(f"bad kind '{doc.get('kind')}'") from None
        return AddFragment(
            name=need("name"),
            kind=kind,
            phase=need("phase"),
            definition=doc.get("definition", ""),
            fragment_id=doc.get("id"),
        )
    if op == "extend-fragment":
        return ExtendFragment(
            parent=need("parent"),
            name=need("name"),
            definition=doc.get("definition", ""),
            fragment_id=doc.get("id"),
        )
    if op == "remove-fragment":
        return RemoveFragment(fragment=need("fragment"), waiver=doc.get("waiver"))
    if op == "set-sequence":
        edges = []
        for item in need("edges"):
            if not isinstance(item, dict) or "from" not in item or "to" not in item:
                raise ParseError("set-sequence edges must be {from, to} objects")
            edges.append((item["from"], item["to"]))
        return SetSequence(edges=tuple(edges))
    if op == "bind-technique":
        return BindTechnique(task=need("task"), technique=need("technique"))
    if op == "unbind-technique":
        return UnbindTechnique(task=need("task"), technique=need("technique"))
    if op == "edit-definition":
        return EditDefinition(fragment=need("fragment"), definition=need("definition"))
    raise ParseError(f"unknown action op '{op}'")


def action_to_json(action: TailoringAction) -> dict[str, Any]:
    if isinstance(action, AddFragment):
        doc: dict[str, Any] = {
            "op": action.op,
            "name": action.name,
            "kind": action.kind.value,
            "phase": action.phase,
            "definition": action.definition,
        }
        if action.fragment_id:
            doc["id"] = action.fragment_id
        return doc
    if isinstance(action, ExtendFragment):
        doc = {
            "op": action.op,
            "parent": action.parent,
            "name": action.name,
            "definition": action.definition,
        }
        if action.fragment_id:
            doc["id"] = action.fragment_id
        return doc
    if isinstance(action, RemoveFragment):
        doc = {"op": action.op, "fragment": action.fragment}
        if action.waiver is not None:
            doc["waiver"] = action.waiver
        return doc
    if isinstance(action, SetSequence):
        return {"op": action.op, "edges": [{"from": s, "to": t} for s, t in action.edges]}
    if isinstance(action, (BindTechnique, UnbindTechnique)):
        return {"op": action.op, "task": action.task, "technique": action.technique}
    if isinstance(action, EditDefinition):
        return {"op": action.op, "fragment": action.fragment, "definition": action.definition}
    raise TypeError(f"unsupported action {action!r}")
