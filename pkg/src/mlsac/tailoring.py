"""Horizontal tailoring of a method model: add, extend and remove
fragments, sequence them, bind techniques, override definitions.

Every edit is value-in/value-out: the input method is never mutated and
each result carries freshly recomputed validation issues. Scripts of
actions use the same record grammar as the catalog, so scenario replays
can live in fixture files.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from mlsac import records
from mlsac.errors import DuplicateId, KindMismatch, ParseError, ReplayError, TailoringError, UnknownTarget
from mlsac.model import (
    FragmentInclusion,
    FragmentKind,
    MEMBER_KINDS,
    Metamodel,
    MethodFragment,
    MethodModel,
    Provenance,
    SequenceEdge,
    TechniqueBinding,
    ValidationIssue,
    Waiver,
    check_conformance,
    slugify,
)


@dataclass(frozen=True)
class AddFragment:
    """Add a brand-new user-defined fragment and include it."""

    name: str
    kind: FragmentKind
    phase: str
    definition: str = ""
    fragment_id: str | None = None

    op = "add-fragment"


@dataclass(frozen=True)
class ExtendFragment:
    """Specialize an existing fragment: the child inherits kind and phase
    and records its parent (the inheritance mechanism)."""

    parent: str
    name: str
    definition: str = ""
    fragment_id: str | None = None

    op = "extend-fragment"


@dataclass(frozen=True)
class RemoveFragment:
    fragment: str
    waiver: str | None = None

    op = "remove-fragment"


@dataclass(frozen=True)
class SetSequence:
    """Replace the sequence edge list wholesale."""

    edges: tuple[tuple[str, str], ...] = ()

    op = "set-sequence"


@dataclass(frozen=True)
class BindTechnique:
    task: str
    technique: str

    op = "bind-technique"


@dataclass(frozen=True)
class UnbindTechnique:
    task: str
    technique: str

    op = "unbind-technique"


@dataclass(frozen=True)
class EditDefinition:
    """Override a member's definition. Catalog fragments get a local
    override inside the method; the shared catalog is never touched."""

    fragment: str
    definition: str

    op = "edit-definition"


TailoringAction = (
    AddFragment
    | ExtendFragment
    | RemoveFragment
    | SetSequence
    | BindTechnique
    | UnbindTechnique
    | EditDefinition
)


@dataclass
class TailoringResult:
    method: MethodModel
    issues: list[ValidationIssue] = field(default_factory=list)


def apply_action(
    method: MethodModel, metamodel: Metamodel, action: TailoringAction
) -> TailoringResult:
    """Apply one edit, returning a new method plus its fresh issue list."""
    edited = _edit(method, metamodel, action)
    return TailoringResult(method=edited, issues=check_conformance(edited, metamodel))


def replay(
    method: MethodModel, metamodel: Metamodel, actions: list[TailoringAction]
) -> TailoringResult:
    """Left-fold of apply. A failure at step k raises ReplayError carrying
    k and the cause; values are immutable, so the caller's method is
    untouched either way."""
    current = method
    for index, action in enumerate(actions):
        try:
            current = _edit(current, metamodel, action)
        except TailoringError as exc:
            raise ReplayError(index, exc) from exc
    return TailoringResult(method=current, issues=check_conformance(current, metamodel))


def _edit(method: MethodModel, metamodel: Metamodel, action: TailoringAction) -> MethodModel:
    if isinstance(action, AddFragment):
        return _add_fragment(method, metamodel, action)
    if isinstance(action, ExtendFragment):
        return _extend_fragment(method, metamodel, action)
    if isinstance(action, RemoveFragment):
        return _remove_fragment(method, metamodel, action)
    if isinstance(action, SetSequence):
        return _set_sequence(method, action)
    if isinstance(action, BindTechnique):
        return _bind_technique(method, metamodel, action)
    if isinstance(action, UnbindTechnique):
        return _unbind_technique(method, action)
    if isinstance(action, EditDefinition):
        return _edit_definition(method, metamodel, action)
    raise TailoringError(f"unsupported action {action!r}")


def _known_ids(method: MethodModel, metamodel: Metamodel) -> set[str]:
    return set(metamodel.fragment_map()) | set(method.user_fragment_map())


def _allocate_id(method: MethodModel, metamodel: Metamodel, wanted: str | None, name: str) -> str:
    taken = _known_ids(method, metamodel)
    if wanted is not None:
        if wanted in taken:
            raise DuplicateId(f"fragment id '{wanted}' already exists")
        return wanted
    base = slugify(name)
    candidate = base
    suffix = 2
    while candidate in taken:
        candidate = f"{base}-{suffix}"
        suffix += 1
    return candidate


def _include(method: MethodModel, fragment: MethodFragment) -> MethodModel:
    return replace(
        method,
        user_fragments=method.user_fragments + (fragment,),
        members=method.members + (FragmentInclusion(fragment.id),),
        # Re-including a fragment supersedes any waiver recorded for it.
        waivers=tuple(w for w in method.waivers if w.fragment != fragment.id),
    )


def _add_fragment(method: MethodModel, metamodel: Metamodel, action: AddFragment) -> MethodModel:
    if action.kind not in MEMBER_KINDS:
        raise KindMismatch(f"cannot add a {action.kind.value} to a method")
    phase = metamodel.fragment(action.phase) or method.user_fragment_map().get(action.phase)
    if phase is None:
        raise UnknownTarget(f"unknown phase '{action.phase}'")
    if phase.kind is not FragmentKind.PHASE:
        raise KindMismatch(f"'{action.phase}' is a {phase.kind.value}, not a phase")
    if phase.id not in method.phases:
        raise KindMismatch(f"phase '{phase.id}' is not selected by this method")
    fragment_id = _allocate_id(method, metamodel, action.fragment_id, action.name)
    fragment = MethodFragment(
        id=fragment_id,
        name=action.name,
        kind=action.kind,
        definition=action.definition,
        phase=phase.id,
        provenance=Provenance.USER_DEFINED,
    )
    return _include(method, fragment)


def _extend_fragment(method: MethodModel, metamodel: Metamodel, action: ExtendFragment) -> MethodModel:
    parent = method.resolve(metamodel, action.parent)
    if parent is None:
        raise UnknownTarget(f"unknown parent fragment '{action.parent}'")
    if parent.kind not in MEMBER_KINDS:
        raise KindMismatch(f"cannot extend a {parent.kind.value} inside a method")
    if parent.phase is not None and parent.phase not in method.phases:
        raise KindMismatch(f"parent phase '{parent.phase}' is not selected by this method")
    fragment_id = _allocate_id(method, metamodel, action.fragment_id, action.name)
    child = MethodFragment(
        id=fragment_id,
        name=action.name,
        kind=parent.kind,
        definition=action.definition,
        phase=parent.phase,
        provenance=Provenance.USER_DEFINED,
        parent=parent.id,
    )
    return _include(method, child)


def _remove_fragment(method: MethodModel, metamodel: Metamodel, action: RemoveFragment) -> MethodModel:
    if action.fragment not in method.member_ids():
        raise UnknownTarget(f"'{action.fragment}' is not a member of this method")

    # Removing a user fragment takes its user-defined descendants along.
    doomed = {action.fragment}
    user_map = method.user_fragment_map()
    changed = True
    while changed:
        changed = False
        for uf in user_map.values():
            if uf.id not in doomed and uf.parent in doomed:
                doomed.add(uf.id)
                changed = True

    waivers = list(method.waivers)
    # Waivers justify dropping catalog fragments (the only ones the
    # matrix can mark mandatory); a removed user fragment leaves nothing
    # to waive.
    if action.waiver and metamodel.fragment(action.fragment) is not None:
        waivers.append(Waiver(fragment=action.fragment, justification=action.waiver))

    return replace(
        method,
        members=tuple(m for m in method.members if m.fragment not in doomed),
        user_fragments=tuple(f for f in method.user_fragments if f.id not in doomed),
        sequences=tuple(
            e for e in method.sequences if e.source not in doomed and e.target not in doomed
        ),
        technique_bindings=tuple(
            b for b in method.technique_bindings if b.task not in doomed
        ),
        waivers=tuple(waivers),
    )


def _set_sequence(method: MethodModel, action: SetSequence) -> MethodModel:
    member_ids = method.member_ids()
    for source, target in action.edges:
        for endpoint in (source, target):
            if endpoint not in member_ids:
                raise UnknownTarget(f"sequence endpoint '{endpoint}' is not a member")
    return replace(
        method, sequences=tuple(SequenceEdge(s, t) for s, t in action.edges)
    )


def _bind_technique(method: MethodModel, metamodel: Metamodel, action: BindTechnique) -> MethodModel:
    task = method.resolve(metamodel, action.task)
    if task is None or action.task not in method.member_ids():
        raise UnknownTarget(f"'{action.task}' is not a member of this method")
    if task.kind is not FragmentKind.TASK:
        raise KindMismatch(f"'{action.task}' is a {task.kind.value}; techniques bind to tasks")
    technique = method.resolve(metamodel, action.technique)
    if technique is None:
        raise UnknownTarget(f"unknown technique '{action.technique}'")
    if technique.kind is not FragmentKind.TECHNIQUE:
        raise KindMismatch(f"'{action.technique}' is a {technique.kind.value}, not a technique")
    binding = TechniqueBinding(task=action.task, technique=action.technique)
    if binding in method.technique_bindings:
        return method
    return replace(method, technique_bindings=method.technique_bindings + (binding,))


def _unbind_technique(method: MethodModel, action: UnbindTechnique) -> MethodModel:
    binding = TechniqueBinding(task=action.task, technique=action.technique)
    if binding not in method.technique_bindings:
        raise UnknownTarget(
            f"no binding of '{action.technique}' to '{action.task}' on this method"
        )
    return replace(
        method,
        technique_bindings=tuple(b for b in method.technique_bindings if b != binding),
    )


def _edit_definition(method: MethodModel, metamodel: Metamodel, action: EditDefinition) -> MethodModel:
    if action.fragment not in method.member_ids():
        raise UnknownTarget(f"'{action.fragment}' is not a member of this method")
    user = method.user_fragment_map().get(action.fragment)
    if user is not None:
        updated = replace(user, definition=action.definition)
        return replace(
            method,
            user_fragments=tuple(
                updated if f.id == action.fragment else f for f in method.user_fragments
            ),
        )
    catalog_fragment = metamodel.fragment(action.fragment)
    if catalog_fragment is None:
        raise UnknownTarget(f"'{action.fragment}' resolves in neither catalog nor user fragments")
    override = action.definition if action.definition != catalog_fragment.definition else None
    return replace(
        method,
        members=tuple(
            replace(m, definition_override=override) if m.fragment == action.fragment else m
            for m in method.members
        ),
    )


# --- action scripts -------------------------------------------------------

SCRIPT_SCHEMAS = records.schema_map(
    records.BlockSchema(
        "action",
        keys=(
            "op", "id", "name", "kind", "phase", "parent", "definition",
            "fragment", "waiver", "edge", "task", "technique",
        ),
        required=("op",),
        repeatable=("edge",),
    ),
)

_KIND_BY_VALUE = {k.value: k for k in FragmentKind}


def parse_script(text: str) -> list[TailoringAction]:
    """Parse an action script (one [action] block per edit)."""
    actions: list[TailoringAction] = []
    for rec in records.parse(text, SCRIPT_SCHEMAS):
        op = rec.require("op")
        if op == "add-fragment":
            kind_raw = rec.require("kind")
            if kind_raw not in _KIND_BY_VALUE:
                raise ParseError(f"bad kind '{kind_raw}'", line=rec.line)
            actions.append(
                AddFragment(
                    name=rec.require("name"),
                    kind=_KIND_BY_VALUE[kind_raw],
                    phase=rec.require("phase"),
                    definition=rec.get("definition", "") or "",
                    fragment_id=rec.get("id"),
                )
            )
        elif op == "extend-fragment":
            actions.append(
                ExtendFragment(
                    parent=rec.require("parent"),
                    name=rec.require("name"),
                    definition=rec.get("definition", "") or "",
                    fragment_id=rec.get("id"),
                )
            )
        elif op == "remove-fragment":
            actions.append(
                RemoveFragment(fragment=rec.require("fragment"), waiver=rec.get("waiver"))
            )
        elif op == "set-sequence":
            edges = []
            for raw in rec.get_all("edge"):
                if "->" not in raw:
                    raise ParseError(f"bad edge '{raw}' (expected 'source -> target')", line=rec.line)
                source, _, target = raw.partition("->")
                edges.append((source.strip(), target.strip()))
            actions.append(SetSequence(edges=tuple(edges)))
        elif op == "bind-technique":
            actions.append(BindTechnique(task=rec.require("task"), technique=rec.require("technique")))
        elif op == "unbind-technique":
            actions.append(UnbindTechnique(task=rec.require("task"), technique=rec.require("technique")))
        elif op == "edit-definition":
            actions.append(
                EditDefinition(fragment=rec.require("fragment"), definition=rec.require("definition"))
            )
        else:
            raise ParseError(f"unknown action op '{op}'", line=rec.line)
    return actions


def serialize_script(actions: list[TailoringAction]) -> str:
    out: list[records.Record] = []
    for action in actions:
        rec = records.Record("action")
        rec.fields.append(("op", action.op))
        if isinstance(action, AddFragment):
            if action.fragment_id:
                rec.fields.append(("id", action.fragment_id))
            rec.fields.append(("name", action.name))
            rec.fields.append(("kind", action.kind.value))
            rec.fields.append(("phase", action.phase))
            rec.fields.append(("definition", action.definition))
        elif isinstance(action, ExtendFragment):
            if action.fragment_id:
                rec.fields.append(("id", action.fragment_id))
            rec.fields.append(("name", action.name))
            rec.fields.append(("parent", action.parent))
            rec.fields.append(("definition", action.definition))
        elif isinstance(action, RemoveFragment):
            rec.fields.append(("fragment", action.fragment))
            if action.waiver is not None:
                rec.fields.append(("waiver", action.waiver))
        elif isinstance(action, SetSequence):
            for source, target in action.edges:
                rec.fields.append(("edge", f"{source} -> {target}"))
        elif isinstance(action, (BindTechnique, UnbindTechnique)):
            rec.fields.append(("task", action.task))
            rec.fields.append(("technique", action.technique))
        elif isinstance(action, EditDefinition):
            rec.fields.append(("fragment", action.fragment))
            rec.fields.append(("definition", action.definition))
        out.append(rec)
    return records.emit(out, SCRIPT_SCHEMAS)
