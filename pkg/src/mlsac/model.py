"""Domain types for the three modeling levels in scope and the
conformance relation between methods and the metamodel.

The metamodel (M2) is a set of method fragments, typed relationships,
an applicability matrix keyed by migration type, a technique library and
a set of transformation rules. A method model (M1) selects migration
types and phases, includes fragments, orders them and binds techniques.
A method instance (M0) records the techniques chosen for an enactment.

All types are immutable values; every operation here is a pure function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class FragmentKind(str, Enum):
    PHASE = "phase"
    TASK = "task"
    WORK_PRODUCT = "work-product"
    PRINCIPLE = "principle"
    TECHNIQUE = "technique"


class Provenance(str, Enum):
    CATALOG = "catalog"
    USER_DEFINED = "user-defined"


class RelationshipType(str, Enum):
    USES = "uses"
    FOLLOWS = "follows"
    PRODUCES = "produces"
    IS_A_GROUP_OF = "is-a-group-of"
    IS_A_KIND_OF = "is-a-kind-of"

    @property
    def category(self) -> str:
        """Association, aggregation or specialization."""
        if self in (RelationshipType.USES, RelationshipType.FOLLOWS, RelationshipType.PRODUCES):
            return "association"
        if self is RelationshipType.IS_A_GROUP_OF:
            return "aggregation"
        return "specialization"


_REL_ORDER = {t: i for i, t in enumerate(RelationshipType)}


class KnowledgeSource(str, Enum):
    LITERATURE = "L"
    METAMODELING = "M"


class MigrationType(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"

    @property
    def description(self) -> str:
        return _MIGRATION_TYPE_DESCRIPTIONS[self]


_MIGRATION_TYPE_DESCRIPTIONS = {
    MigrationType.I: (
        "deploying business logic of a legacy application on cloud via IaaS "
        "service delivery model"
    ),
    MigrationType.II: (
        "replacing or reengineering legacy components with SaaS delivery model"
    ),
    MigrationType.III: (
        "deploying legacy database components on cloud data storages"
    ),
    MigrationType.IV: (
        "converting legacy database components to cloud database solutions"
    ),
    MigrationType.V: (
        "deploying whole legacy application stack on cloud via IaaS service "
        "delivery model"
    ),
}

_MT_ORDER = {t: i for i, t in enumerate(MigrationType)}


class ApplicabilityLevel(str, Enum):
    MANDATORY = "mandatory"
    SITUATIONAL = "situational"
    UNNECESSARY = "unnecessary"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


# Closed set of validation issue codes.
DANGLING_REF = "DANGLING_REF"
MISSING_MANDATORY = "MISSING_MANDATORY"
ILLOGICAL_SEQUENCE = "ILLOGICAL_SEQUENCE"
EMPTY_SELECTION = "EMPTY_SELECTION"
KIND_MISMATCH = "KIND_MISMATCH"
DUPLICATE_ID = "DUPLICATE_ID"

ISSUE_CODES = (
    DANGLING_REF,
    DUPLICATE_ID,
    EMPTY_SELECTION,
    ILLOGICAL_SEQUENCE,
    KIND_MISMATCH,
    MISSING_MANDATORY,
)


def slugify(name: str) -> str:
    """Stable id from a display name: lowercase, non-alphanumerics
    collapsed to single hyphens."""
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "fragment"


@dataclass(frozen=True)
class MethodFragment:
    """An M2-level reusable unit of a reengineering method."""

    id: str
    name: str
    kind: FragmentKind
    definition: str
    phase: str | None = None
    provenance: Provenance = Provenance.CATALOG
    parent: str | None = None
    definition_note: str | None = None  # "name-only" marks placeholder text


@dataclass(frozen=True)
class FragmentRelationship:
    rel_type: RelationshipType
    source: str
    target: str
    knowledge_source: KnowledgeSource

    def sort_key(self) -> tuple:
        return (_REL_ORDER[self.rel_type], self.source, self.target)


@dataclass(frozen=True)
class ApplicabilityEntry:
    fragment: str
    migration_type: MigrationType
    level: ApplicabilityLevel
    situation_note: str | None = None

    def sort_key(self) -> tuple:
        return (self.fragment, _MT_ORDER[self.migration_type])


@dataclass(frozen=True)
class TechniqueAssignment:
    """Technique-library entry: a technique fragment applicable to a task."""

    task: str
    technique: str


@dataclass(frozen=True)
class TransformationRule:
    """A data-encoded instantiation rule. Rules with an ``action``
    contribute to member or relationship selection; rules without one
    state structural laws and carry documentation only.

    ``phase_filter`` is either the marker ``"selected"`` (apply to every
    selected phase) or a comma-separated list of phase ids intersected
    with the selection. An empty ``kind_filter`` matches any kind; an
    empty ``level_filter`` matches applicable (mandatory or situational)
    fragments.
    """

    rule_id: str
    name: str
    meaning: str
    action: str | None = None  # include-fragments | include-relationships
    phase_filter: str = "selected"
    kind_filter: tuple[FragmentKind, ...] = ()
    level_filter: tuple[ApplicabilityLevel, ...] = ()
    syntax_note: str = ""


@dataclass(frozen=True)
class Metamodel:
    """The M2 artifact. ``fragments`` preserve catalog order (phase order
    is significant for display and export); the other collections are
    canonically sorted at construction."""

    version: str
    fragments: tuple[MethodFragment, ...]
    relationships: tuple[FragmentRelationship, ...] = ()
    applicability: tuple[ApplicabilityEntry, ...] = ()
    techniques: tuple[TechniqueAssignment, ...] = ()
    rules: tuple[TransformationRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "relationships", tuple(sorted(self.relationships, key=lambda r: r.sort_key()))
        )
        object.__setattr__(
            self, "applicability", tuple(sorted(self.applicability, key=lambda a: a.sort_key()))
        )
        object.__setattr__(
            self, "techniques", tuple(sorted(self.techniques, key=lambda t: (t.task, t.technique)))
        )
        object.__setattr__(
            self, "rules", tuple(sorted(self.rules, key=lambda r: r.rule_id))
        )

    def fragment_map(self) -> dict[str, MethodFragment]:
        return {f.id: f for f in self.fragments}

    def fragment(self, fragment_id: str) -> MethodFragment | None:
        return self.fragment_map().get(fragment_id)

    def phases(self) -> tuple[MethodFragment, ...]:
        """Phase fragments in catalog order."""
        return tuple(f for f in self.fragments if f.kind is FragmentKind.PHASE)

    def phase_order(self) -> dict[str, int]:
        return {p.id: i for i, p in enumerate(self.phases())}

    def applicability_map(self) -> dict[tuple[str, MigrationType], ApplicabilityEntry]:
        return {(e.fragment, e.migration_type): e for e in self.applicability}

    def level_of(self, fragment_id: str, mt: MigrationType) -> tuple[ApplicabilityLevel, str | None]:
        """Matrix lookup; fragments with no stored entry default to
        Situational with no note."""
        entry = self.applicability_map().get((fragment_id, mt))
        if entry is None:
            return (ApplicabilityLevel.SITUATIONAL, None)
        return (entry.level, entry.situation_note)


@dataclass(frozen=True)
class FragmentInclusion:
    """Membership of one fragment in a method, with an optional local
    definition override (the shared catalog is never mutated)."""

    fragment: str
    definition_override: str | None = None


@dataclass(frozen=True)
class SequenceEdge:
    source: str
    target: str


@dataclass(frozen=True)
class TechniqueBinding:
    task: str
    technique: str


@dataclass(frozen=True)
class Waiver:
    """Justification for removing a fragment the matrix marks Mandatory."""

    fragment: str
    justification: str


@dataclass(frozen=True)
class MethodModel:
    """An M1 method: an instance of the metamodel for a migration scenario.

    ``sequences`` keep user order; every other collection is canonically
    sorted at construction so that structural equality and serialized
    bytes are stable.
    """

    id: str
    name: str
    metamodel_version: str
    migration_types: tuple[MigrationType, ...]
    phases: tuple[str, ...]
    description: str = ""
    members: tuple[FragmentInclusion, ...] = ()
    user_fragments: tuple[MethodFragment, ...] = ()
    sequences: tuple[SequenceEdge, ...] = ()
    technique_bindings: tuple[TechniqueBinding, ...] = ()
    waivers: tuple[Waiver, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "migration_types",
            tuple(sorted(set(self.migration_types), key=lambda t: _MT_ORDER[t])),
        )
        object.__setattr__(self, "phases", tuple(sorted(set(self.phases))))
        object.__setattr__(
            self, "members", tuple(sorted(self.members, key=lambda m: m.fragment))
        )
        object.__setattr__(
            self, "user_fragments", tuple(sorted(self.user_fragments, key=lambda f: f.id))
        )
        object.__setattr__(self, "sequences", tuple(self.sequences))
        object.__setattr__(
            self,
            "technique_bindings",
            tuple(sorted(set(self.technique_bindings), key=lambda b: (b.task, b.technique))),
        )
        object.__setattr__(
            self, "waivers", tuple(sorted(self.waivers, key=lambda w: w.fragment))
        )

    def member_ids(self) -> set[str]:
        return {m.fragment for m in self.members}

    def user_fragment_map(self) -> dict[str, MethodFragment]:
        return {f.id: f for f in self.user_fragments}

    def resolve(self, metamodel: Metamodel, fragment_id: str) -> MethodFragment | None:
        """Resolve an id against the catalog, then this method's own
        user-defined fragments."""
        found = metamodel.fragment(fragment_id)
        if found is not None:
            return found
        return self.user_fragment_map().get(fragment_id)


@dataclass(frozen=True)
class MethodInstance:
    """An M0 enactment record: the techniques a team chose for a method."""

    id: str
    method: str
    chosen_techniques: tuple[TechniqueBinding, ...] = ()
    enactment_notes: str = ""

    def __post_init__(self):
        object.__setattr__(
            self,
            "chosen_techniques",
            tuple(sorted(set(self.chosen_techniques), key=lambda b: (b.task, b.technique))),
        )


@dataclass(frozen=True)
class ValidationIssue:
    severity: Severity
    code: str
    message: str
    subjects: tuple[str, ...] = ()

    def sort_key(self) -> tuple:
        return (0 if self.severity is Severity.ERROR else 1, self.code, self.subjects, self.message)


def _error(code: str, message: str, *subjects: str) -> ValidationIssue:
    return ValidationIssue(Severity.ERROR, code, message, tuple(subjects))


def _warning(code: str, message: str, *subjects: str) -> ValidationIssue:
    return ValidationIssue(Severity.WARNING, code, message, tuple(subjects))


MEMBER_KINDS = (FragmentKind.TASK, FragmentKind.WORK_PRODUCT, FragmentKind.PRINCIPLE)


def check_conformance(method: MethodModel, metamodel: Metamodel) -> list[ValidationIssue]:
    """Decide membership of ``method`` in the set of valid metamodel
    instances. Returns an empty list iff the method conforms; all
    problems come back as issues, nothing is raised.

    Issues are ordered by severity, then code, then subject ids, so the
    result is byte-stable under serialization.
    """
    issues: list[ValidationIssue] = []
    catalog_ids = metamodel.fragment_map()
    user_ids = method.user_fragment_map()

    if not method.migration_types:
        issues.append(_error(EMPTY_SELECTION, "method declares no migration types"))
    if not method.phases:
        issues.append(_error(EMPTY_SELECTION, "method selects no phases"))

    # Id uniqueness across catalog and local fragments.
    for uf in method.user_fragments:
        if uf.id in catalog_ids:
            issues.append(
                _error(DUPLICATE_ID, f"user fragment id '{uf.id}' collides with the catalog", uf.id)
            )
    seen_users: set[str] = set()
    for uf in method.user_fragments:
        if uf.id in seen_users:
            issues.append(_error(DUPLICATE_ID, f"duplicate user fragment id '{uf.id}'", uf.id))
        seen_users.add(uf.id)
    seen_members: set[str] = set()
    for m in method.members:
        if m.fragment in seen_members:
            issues.append(_error(DUPLICATE_ID, f"fragment '{m.fragment}' included twice", m.fragment))
        seen_members.add(m.fragment)

    def resolve(fragment_id: str) -> MethodFragment | None:
        found = catalog_ids.get(fragment_id)
        if found is not None:
            return found
        return user_ids.get(fragment_id)

    # Selected phases must resolve to Phase-kind fragments.
    for phase_id in method.phases:
        target = resolve(phase_id)
        if target is None:
            issues.append(_error(DANGLING_REF, f"selected phase '{phase_id}' does not resolve", phase_id))
        elif target.kind is not FragmentKind.PHASE:
            issues.append(
                _error(KIND_MISMATCH, f"selected phase '{phase_id}' is a {target.kind.value}", phase_id)
            )

    # Members resolve and carry an includable kind within selected phases.
    for m in method.members:
        target = resolve(m.fragment)
        if target is None:
            issues.append(
                _error(DANGLING_REF, f"member '{m.fragment}' resolves in neither catalog nor user fragments", m.fragment)
            )
            continue
        if target.kind not in MEMBER_KINDS:
            issues.append(
                _error(KIND_MISMATCH, f"member '{m.fragment}' is a {target.kind.value}, not an includable fragment", m.fragment)
            )
            continue
        if target.phase is not None and target.phase not in method.phases:
            issues.append(
                _error(KIND_MISMATCH, f"member '{m.fragment}' belongs to phase '{target.phase}' which is not selected", m.fragment)
            )

    # User fragments: phase and parent references.
    for uf in method.user_fragments:
        if uf.phase is not None:
            phase = resolve(uf.phase)
            if phase is None:
                issues.append(_error(DANGLING_REF, f"fragment '{uf.id}' references unknown phase '{uf.phase}'", uf.id, uf.phase))
            elif phase.kind is not FragmentKind.PHASE:
                issues.append(_error(KIND_MISMATCH, f"fragment '{uf.id}' phase '{uf.phase}' is a {phase.kind.value}", uf.id, uf.phase))
        if uf.parent is not None:
            parent = resolve(uf.parent)
            if parent is None:
                issues.append(_error(DANGLING_REF, f"fragment '{uf.id}' extends unknown fragment '{uf.parent}'", uf.id, uf.parent))
            elif parent.kind is not uf.kind:
                issues.append(_error(KIND_MISMATCH, f"fragment '{uf.id}' ({uf.kind.value}) extends a {parent.kind.value}", uf.id, uf.parent))

    member_ids = method.member_ids()

    # Sequence endpoints must be members.
    for edge in method.sequences:
        for endpoint in (edge.source, edge.target):
            if endpoint not in member_ids:
                issues.append(
                    _error(DANGLING_REF, f"sequence endpoint '{endpoint}' is not a member", endpoint)
                )

    # Technique bindings pair Task members with Technique fragments.
    for binding in method.technique_bindings:
        task = resolve(binding.task)
        if binding.task not in member_ids or task is None:
            issues.append(_error(DANGLING_REF, f"technique bound to non-member '{binding.task}'", binding.task))
        elif task.kind is not FragmentKind.TASK:
            issues.append(
                _error(KIND_MISMATCH, f"technique bound to '{binding.task}' which is a {task.kind.value}", binding.task)
            )
        technique = resolve(binding.technique)
        if technique is None:
            issues.append(_error(DANGLING_REF, f"bound technique '{binding.technique}' does not resolve", binding.technique))
        elif technique.kind is not FragmentKind.TECHNIQUE:
            issues.append(
                _error(KIND_MISMATCH, f"'{binding.technique}' is a {technique.kind.value}, not a technique", binding.technique)
            )

    for waiver in method.waivers:
        if resolve(waiver.fragment) is None:
            issues.append(_error(DANGLING_REF, f"waiver names unknown fragment '{waiver.fragment}'", waiver.fragment))

    # Mandatory coverage: for the selected types, every catalog fragment
    # marked Mandatory whose phase is selected must be a member or waived.
    waived = {w.fragment for w in method.waivers}
    for f in metamodel.fragments:
        if f.phase is None or f.phase not in method.phases:
            continue
        mandatory_for = [
            t for t in method.migration_types
            if metamodel.level_of(f.id, t)[0] is ApplicabilityLevel.MANDATORY
        ]
        if mandatory_for and f.id not in member_ids and f.id not in waived:
            types = ", ".join(t.value for t in mandatory_for)
            issues.append(
                _warning(MISSING_MANDATORY, f"'{f.id}' is mandatory for migration type(s) {types} but is neither included nor waived", f.id)
            )

    # Sequences that reverse a catalog Follows edge.
    follows = {
        (r.source, r.target)
        for r in metamodel.relationships
        if r.rel_type is RelationshipType.FOLLOWS
    }
    for edge in method.sequences:
        if (edge.target, edge.source) in follows:
            issues.append(
                _warning(ILLOGICAL_SEQUENCE, f"sequence '{edge.source}' before '{edge.target}' reverses the usual order", edge.source, edge.target)
            )

    # Cycles in the user-defined sequence graph are allowed but flagged.
    for cycle in _sequence_cycles(method.sequences):
        issues.append(
            _warning(ILLOGICAL_SEQUENCE, "sequence edges form a cycle: " + " -> ".join(cycle), *cycle)
        )

    issues.sort(key=lambda i: i.sort_key())
    return issues


def _sequence_cycles(sequences: tuple[SequenceEdge, ...]) -> list[tuple[str, ...]]:
    """Strongly connected components of size > 1 (plus self-loops) in the
    sequence graph, each returned as a sorted node tuple."""
    graph: dict[str, set[str]] = {}
    for edge in sequences:
        graph.setdefault(edge.source, set()).add(edge.target)
        graph.setdefault(edge.target, set())

    index = 0
    indices: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[tuple[str, ...]] = []

    def strongconnect(node: str) -> None:
        nonlocal index
        indices[node] = low[node] = index
        index += 1
        stack.append(node)
        on_stack.add(node)
        for succ in sorted(graph[node]):
            if succ not in indices:
                strongconnect(succ)
                low[node] = min(low[node], low[succ])
            elif succ in on_stack:
                low[node] = min(low[node], indices[succ])
        if low[node] == indices[node]:
            component = []
            while True:
                member = stack.pop()
                on_stack.discard(member)
                component.append(member)
                if member == node:
                    break
            if len(component) > 1 or node in graph[node]:
                components.append(tuple(sorted(component)))

    for node in sorted(graph):
        if node not in indices:
            strongconnect(node)
    components.sort()
    return components


def relationship_set(
    metamodel: Metamodel, rel_filter: RelationshipType | None = None
) -> tuple[FragmentRelationship, ...]:
    """All metamodel relationships, optionally filtered by type."""
    if rel_filter is None:
        return metamodel.relationships
    return tuple(r for r in metamodel.relationships if r.rel_type is rel_filter)


def method_relationships(
    metamodel: Metamodel, method: MethodModel, rel_filter: RelationshipType | None = None
) -> tuple[FragmentRelationship, ...]:
    """Relationships visible from a method: catalog edges between
    included fragments plus the implicit specialization edge each
    extension fragment has to its parent."""
    ids = method.member_ids() | set(method.user_fragment_map())
    edges = [
        r for r in metamodel.relationships if r.source in ids and r.target in ids
    ]
    for uf in method.user_fragments:
        if uf.parent is not None:
            edges.append(
                FragmentRelationship(
                    RelationshipType.IS_A_KIND_OF, uf.id, uf.parent, KnowledgeSource.METAMODELING
                )
            )
    edges.sort(key=lambda r: r.sort_key())
    if rel_filter is None:
        return tuple(edges)
    return tuple(r for r in edges if r.rel_type is rel_filter)
