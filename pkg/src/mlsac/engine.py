"""Rule-driven instantiation: deriving a base M1 method from the
metamodel for a chosen set of migration types and phases.

The rules are data (loaded with the catalog) and the engine interprets
them: inclusion rules select fragments through the applicability matrix,
the relationship rule carries the induced relationship subgraph over,
and initial sequences come from catalog Follows edges between included
members. No topological completion is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

from mlsac.errors import EmptySelection, UnknownFragment, UnknownPhase
from mlsac.model import (
    ApplicabilityLevel,
    FragmentInclusion,
    FragmentKind,
    Metamodel,
    MethodModel,
    MigrationType,
    RelationshipType,
    SequenceEdge,
    TransformationRule,
    slugify,
)

_DEFAULT_LEVELS = (ApplicabilityLevel.MANDATORY, ApplicabilityLevel.SITUATIONAL)


def _effective_levels(rule: TransformationRule) -> tuple[ApplicabilityLevel, ...]:
    # An inclusion rule with no level filter selects applicable fragments,
    # never unnecessary ones.
    return rule.level_filter or _DEFAULT_LEVELS


def _rule_scope(rule: TransformationRule, phases: set[str]) -> set[str]:
    if rule.phase_filter == "selected":
        return phases
    listed = {p.strip() for p in rule.phase_filter.split(",") if p.strip()}
    return listed & phases


def instantiate(
    metamodel: Metamodel,
    name: str,
    mts: set[MigrationType] | frozenset[MigrationType],
    phases: set[str] | frozenset[str],
    description: str = "",
    method_id: str | None = None,
) -> MethodModel:
    """Vertical transformation: build the base method for ``mts`` and
    ``phases``. Members are every fragment of a selected phase that the
    matrix marks mandatory or situational for at least one selected
    type; situational members stay in (they are suggestions the engineer
    may prune during tailoring). Deterministic for equal arguments.
    """
    if not mts:
        raise EmptySelection("at least one migration type is required")
    if not phases:
        raise EmptySelection("at least one phase is required")
    by_id = metamodel.fragment_map()
    for phase_id in sorted(phases):
        phase = by_id.get(phase_id)
        if phase is None or phase.kind is not FragmentKind.PHASE:
            raise UnknownPhase(f"'{phase_id}' is not a phase of the metamodel")

    selected_phases = set(phases)
    selected_types = set(mts)

    member_ids: set[str] = set()
    for rule in metamodel.rules:
        if rule.action != "include-fragments":
            continue
        scope = _rule_scope(rule, selected_phases)
        if not scope:
            continue
        levels = _effective_levels(rule)
        for f in metamodel.fragments:
            if f.phase not in scope:
                continue
            if rule.kind_filter and f.kind not in rule.kind_filter:
                continue
            if any(metamodel.level_of(f.id, t)[0] in levels for t in selected_types):
                member_ids.add(f.id)

    carries_relationships = any(
        rule.action == "include-relationships" for rule in metamodel.rules
    )
    sequences: list[SequenceEdge] = []
    if carries_relationships:
        follows = [
            r
            for r in metamodel.relationships
            if r.rel_type is RelationshipType.FOLLOWS
            and r.source in member_ids
            and r.target in member_ids
        ]
        sequences = [
            SequenceEdge(r.source, r.target)
            for r in sorted(follows, key=lambda r: (r.source, r.target))
        ]

    return MethodModel(
        id=method_id or slugify(name),
        name=name,
        description=description,
        metamodel_version=metamodel.version,
        migration_types=tuple(selected_types),
        phases=tuple(selected_phases),
        members=tuple(FragmentInclusion(fid) for fid in sorted(member_ids)),
        sequences=tuple(sequences),
    )


def list_rules(metamodel: Metamodel) -> tuple[TransformationRule, ...]:
    """All rules in rule-id order."""
    return metamodel.rules


@dataclass(frozen=True)
class InclusionEntry:
    """Why one fragment is (or is not) part of a method for one type."""

    migration_type: MigrationType
    level: ApplicabilityLevel
    situation_note: str | None
    rule_id: str | None


@dataclass(frozen=True)
class InclusionExplanation:
    fragment: str
    entries: tuple[InclusionEntry, ...]


def explain_inclusion(
    metamodel: Metamodel,
    mts: set[MigrationType] | frozenset[MigrationType],
    fragment_id: str,
) -> InclusionExplanation:
    """Per selected migration type: the applicability level, the
    situation note, and the rule that governs the inclusion."""
    fragment = metamodel.fragment(fragment_id)
    if fragment is None:
        raise UnknownFragment(f"no fragment '{fragment_id}' in the metamodel")

    entries = []
    for mt in sorted(mts, key=lambda t: t.value):
        level, note = metamodel.level_of(fragment_id, mt)
        entries.append(
            InclusionEntry(
                migration_type=mt,
                level=level,
                situation_note=note,
                rule_id=_governing_rule(metamodel, fragment, level),
            )
        )
    return InclusionExplanation(fragment=fragment_id, entries=tuple(entries))


def _governing_rule(metamodel: Metamodel, fragment, level: ApplicabilityLevel) -> str | None:
    if level is ApplicabilityLevel.UNNECESSARY or fragment.phase is None:
        return None
    candidates = []
    for rule in metamodel.rules:
        if rule.action != "include-fragments":
            continue
        if level not in _effective_levels(rule):
            continue
        if rule.kind_filter and fragment.kind not in rule.kind_filter:
            continue
        if rule.phase_filter != "selected":
            listed = {p.strip() for p in rule.phase_filter.split(",")}
            if fragment.phase not in listed:
                continue
        # Prefer the tightest level filter, then phase-specific rules.
        specificity = (
            len(_effective_levels(rule)),
            1 if rule.phase_filter == "selected" else 0,
            rule.rule_id,
        )
        candidates.append((specificity, rule.rule_id))
    if not candidates:
        return None
    return min(candidates)[1]
