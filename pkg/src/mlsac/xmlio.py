"""XML interchange for method models.

The document shape (see ``docs/xml-format.md``):

    <method id name metamodel-version migration-types>
      <description>...</description>
      <phase id name>
        <fragment id name kind provenance [parent]>
          <definition>...</definition>
          <technique id name/>*
          <waiver>...</waiver>?
        </fragment>*
      </phase>*
      <sequences>
        <edge from to/>*
      </sequences>
    </method>

Export is a pure function of (method, metamodel) and byte-deterministic:
fixed attribute and child order, two-space indentation, UTF-8, text
preserved verbatim. Import is strict (unknown elements and attributes
are rejected) and inverts export structurally: catalog ids bind to
catalog definitions unless the document carries an override, unmatched
ids become user-defined members.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from mlsac.errors import IntegrityError, ParseError, VersionMismatch
from mlsac.model import (
    FragmentInclusion,
    FragmentKind,
    Metamodel,
    MethodFragment,
    MethodModel,
    MigrationType,
    Provenance,
    SequenceEdge,
    Severity,
    TechniqueBinding,
    Waiver,
    check_conformance,
)


def _escape_text(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace("\r", "&#13;")
    )


def _escape_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("\t", "&#9;")
        .replace("\n", "&#10;")
        .replace("\r", "&#13;")
    )


def _attrs(pairs: list[tuple[str, str]]) -> str:
    return "".join(f' {key}="{_escape_attr(value)}"' for key, value in pairs)


def export_xml(method: MethodModel, metamodel: Metamodel) -> bytes:
    """Serialize a method for sharing. Requires the method to be free of
    error-severity conformance issues."""
    errors = [i for i in check_conformance(method, metamodel) if i.severity is Severity.ERROR]
    if errors:
        listing = "; ".join(f"{i.code}: {i.message}" for i in errors)
        raise IntegrityError(f"method does not conform to the metamodel: {listing}")

    phase_rank = metamodel.phase_order()
    ordered_phases = sorted(method.phases, key=lambda p: (phase_rank.get(p, len(phase_rank)), p))

    def resolve(fragment_id: str) -> MethodFragment:
        found = method.resolve(metamodel, fragment_id)
        assert found is not None  # conformance guarantees resolution
        return found

    overrides = {m.fragment: m.definition_override for m in method.members}
    bindings_by_task: dict[str, list[str]] = {}
    for b in method.technique_bindings:
        bindings_by_task.setdefault(b.task, []).append(b.technique)

    by_phase: dict[str, list[tuple[MethodFragment, str | None]]] = {p: [] for p in ordered_phases}
    for m in sorted(method.members, key=lambda m: m.fragment):
        fragment = resolve(m.fragment)
        by_phase[fragment.phase].append((fragment, None))
    for w in method.waivers:
        fragment = method.resolve(metamodel, w.fragment)
        if fragment is None or fragment.phase not in by_phase:
            raise IntegrityError(f"waiver for '{w.fragment}' has no phase element to live in")
        by_phase[fragment.phase].append((fragment, w.justification))
    for entries in by_phase.values():
        entries.sort(key=lambda pair: pair[0].id)

    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(
        "<method"
        + _attrs(
            [
                ("id", method.id),
                ("name", method.name),
                ("metamodel-version", method.metamodel_version),
                ("migration-types", ",".join(t.value for t in method.migration_types)),
            ]
        )
        + ">"
    )
    lines.append(f"  <description>{_escape_text(method.description)}</description>")

    for phase_id in ordered_phases:
        phase = resolve(phase_id)
        lines.append("  <phase" + _attrs([("id", phase.id), ("name", phase.name)]) + ">")
        for fragment, waiver in by_phase[phase_id]:
            attr_pairs = [
                ("id", fragment.id),
                ("name", fragment.name),
                ("kind", fragment.kind.value),
                ("provenance", fragment.provenance.value),
            ]
            if fragment.parent is not None:
                attr_pairs.append(("parent", fragment.parent))
            lines.append("    <fragment" + _attrs(attr_pairs) + ">")
            override = overrides.get(fragment.id)
            definition = override if override is not None else fragment.definition
            lines.append(f"      <definition>{_escape_text(definition)}</definition>")
            for technique_id in sorted(bindings_by_task.get(fragment.id, ())):
                technique = resolve(technique_id)
                lines.append(
                    "      <technique"
                    + _attrs([("id", technique.id), ("name", technique.name)])
                    + "/>"
                )
            if waiver is not None:
                lines.append(f"      <waiver>{_escape_text(waiver)}</waiver>")
            lines.append("    </fragment>")
        lines.append("  </phase>")

    lines.append("  <sequences>")
    for edge in method.sequences:
        lines.append("    <edge" + _attrs([("from", edge.source), ("to", edge.target)]) + "/>")
    lines.append("  </sequences>")
    lines.append("</method>")
    return ("\n".join(lines) + "\n").encode("utf-8")


_ALLOWED = {
    "method": {"attrs": {"id", "name", "metamodel-version", "migration-types"}, "children": {"description", "phase", "sequences"}},
    "description": {"attrs": set(), "children": set()},
    "phase": {"attrs": {"id", "name"}, "children": {"fragment"}},
    "fragment": {"attrs": {"id", "name", "kind", "provenance", "parent"}, "children": {"definition", "technique", "waiver"}},
    "definition": {"attrs": set(), "children": set()},
    "technique": {"attrs": {"id", "name"}, "children": set()},
    "waiver": {"attrs": set(), "children": set()},
    "sequences": {"attrs": set(), "children": {"edge"}},
    "edge": {"attrs": {"from", "to"}, "children": set()},
}


def _check_element(elem: ET.Element) -> None:
    spec = _ALLOWED.get(elem.tag)
    if spec is None:
        raise ParseError(f"unknown element <{elem.tag}>")
    unknown_attrs = set(elem.attrib) - spec["attrs"]
    if unknown_attrs:
        raise ParseError(f"<{elem.tag}> carries unknown attribute(s): {', '.join(sorted(unknown_attrs))}")
    for child in elem:
        if child.tag not in spec["children"]:
            raise ParseError(f"<{elem.tag}> must not contain <{child.tag}>")
        _check_element(child)


def _require_attr(elem: ET.Element, name: str) -> str:
    value = elem.get(name)
    if value is None:
        raise ParseError(f"<{elem.tag}> is missing attribute '{name}'")
    return value


def import_xml(doc: bytes | str, metamodel: Metamodel, force: bool = False) -> MethodModel:
    """Parse a method document back into a MethodModel.

    ``force`` binds a document against the given metamodel even when the
    metamodel-version attribute does not match.
    """
    raw = doc.decode("utf-8") if isinstance(doc, bytes) else doc
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"column {column}: {exc.msg.split(':')[0]}", line=line) from exc
    if root.tag != "method":
        raise ParseError(f"expected <method> root, found <{root.tag}>")
    _check_element(root)

    version = _require_attr(root, "metamodel-version")
    if version != metamodel.version and not force:
        raise VersionMismatch(
            f"document targets metamodel version '{version}', catalog is '{metamodel.version}'"
        )

    try:
        migration_types = tuple(
            MigrationType(part)
            for part in _require_attr(root, "migration-types").split(",")
            if part
        )
    except ValueError as exc:
        raise ParseError(f"bad migration-types attribute: {exc}") from None

    description = ""
    phases: list[str] = []
    members: list[FragmentInclusion] = []
    user_fragments: list[MethodFragment] = []
    bindings: list[TechniqueBinding] = []
    waivers: list[Waiver] = []
    sequences: list[SequenceEdge] = []

    for child in root:
        if child.tag == "description":
            description = child.text or ""
        elif child.tag == "phase":
            phase_id = _require_attr(child, "id")
            phases.append(phase_id)
            for fragment_elem in child:
                _import_fragment(
                    fragment_elem, phase_id, metamodel,
                    members, user_fragments, bindings, waivers,
                )
        elif child.tag == "sequences":
            for edge in child:
                sequences.append(
                    SequenceEdge(_require_attr(edge, "from"), _require_attr(edge, "to"))
                )

    return MethodModel(
        id=_require_attr(root, "id"),
        name=_require_attr(root, "name"),
        description=description,
        metamodel_version=metamodel.version if force else version,
        migration_types=migration_types,
        phases=tuple(phases),
        members=tuple(members),
        user_fragments=tuple(user_fragments),
        sequences=tuple(sequences),
        technique_bindings=tuple(bindings),
        waivers=tuple(waivers),
    )


def _import_fragment(
    elem: ET.Element,
    phase_id: str,
    metamodel: Metamodel,
    members: list[FragmentInclusion],
    user_fragments: list[MethodFragment],
    bindings: list[TechniqueBinding],
    waivers: list[Waiver],
) -> None:
    fragment_id = _require_attr(elem, "id")
    definition = ""
    waiver_text: str | None = None
    for child in elem:
        if child.tag == "definition":
            definition = child.text or ""
        elif child.tag == "technique":
            bindings.append(TechniqueBinding(task=fragment_id, technique=_require_attr(child, "id")))
        elif child.tag == "waiver":
            waiver_text = child.text or ""

    catalog_fragment = metamodel.fragment(fragment_id)
    if catalog_fragment is None:
        try:
            kind = FragmentKind(_require_attr(elem, "kind"))
        except ValueError:
            raise ParseError(f"fragment '{fragment_id}' has unknown kind '{elem.get('kind')}'") from None
        user_fragments.append(
            MethodFragment(
                id=fragment_id,
                name=_require_attr(elem, "name"),
                kind=kind,
                definition=definition,
                phase=phase_id,
                provenance=Provenance.USER_DEFINED,
                parent=elem.get("parent"),
            )
        )
        if waiver_text is None:
            members.append(FragmentInclusion(fragment_id))
    else:
        if waiver_text is None:
            override = definition if definition != catalog_fragment.definition else None
            members.append(FragmentInclusion(fragment_id, definition_override=override))
    if waiver_text is not None:
        waivers.append(Waiver(fragment=fragment_id, justification=waiver_text))
