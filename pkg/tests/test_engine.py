import itertools
import time

import pytest

from mlsac.engine import explain_inclusion, instantiate, list_rules
from mlsac.errors import EmptySelection, UnknownFragment, UnknownPhase
from mlsac.model import (
    ApplicabilityLevel,
    FragmentKind,
    Metamodel,
    MigrationType,
    check_conformance,
)

ALL_PHASE_IDS = ("plan", "design", "enable", "maintain")


def member_oracle(metamodel, mts, phases):
    """Brute-force scan of the applicability matrix, independent of the
    rule interpreter: a fragment of a selected phase is in unless it is
    unnecessary for every selected type."""
    out = set()
    for f in metamodel.fragments:
        if f.phase not in phases:
            continue
        for t in mts:
            if metamodel.level_of(f.id, t)[0] is not ApplicabilityLevel.UNNECESSARY:
                out.add(f.id)
                break
    return out


def nonempty_phase_subsets():
    for size in range(1, len(ALL_PHASE_IDS) + 1):
        yield from itertools.combinations(ALL_PHASE_IDS, size)


def task_members(metamodel, method):
    return {
        m.fragment
        for m in method.members
        if method.resolve(metamodel, m.fragment).kind is FragmentKind.TASK
    }


def test_type_v_plan_yields_the_four_suggested_tasks(catalog):
    method = instantiate(catalog, "EclipseSCADA reengineering", {MigrationType.V}, {"plan"})
    assert task_members(catalog, method) == {
        "analyze-context",
        "recover-legacy-application-knowledge",
        "analyze-migration-requirements",
        "define-plan",
    }
    # Only tasks live in the Plan phase, so the member set matches too.
    assert len(method.members) == 4


def test_type_ii_all_phases_covers_the_saas_set(catalog):
    method = instantiate(catalog, "Hackystat to SaaS", {MigrationType.II}, set(ALL_PHASE_IDS))
    members = {m.fragment for m in method.members}
    assert members >= {
        "isolate-tenant-availability",
        "isolate-tenant-customizability",
        "isolate-tenant-data",
        "isolate-tenant-performance",
        "handle-transient-faults",
        "identify-incompatibilities",
        "analyze-business-requirements",
        "analyze-migration-cost",
        "analyze-migration-feasibility",
    }


def test_type_i_enable_excludes_unnecessary_fragments(catalog):
    method = instantiate(catalog, "Lift and shift", {MigrationType.I}, {"enable"})
    members = {m.fragment for m in method.members}
    assert "isolate-tenant-availability" not in members
    assert "adapt-data" not in members


def test_empty_selection_raises(catalog):
    with pytest.raises(EmptySelection):
        instantiate(catalog, "m", {MigrationType.I}, set())
    with pytest.raises(EmptySelection):
        instantiate(catalog, "m", set(), {"plan"})


def test_unknown_phase_raises(catalog):
    with pytest.raises(UnknownPhase):
        instantiate(catalog, "m", {MigrationType.I}, {"deploy"})
    with pytest.raises(UnknownPhase):
        # A task id is not a phase id.
        instantiate(catalog, "m", {MigrationType.I}, {"adapt-data"})


def test_engine_matches_oracle_for_all_75_cases(catalog):
    started = time.monotonic()
    cases = 0
    for mt in MigrationType:
        for phases in nonempty_phase_subsets():
            method = instantiate(catalog, "probe", {mt}, set(phases))
            got = {m.fragment for m in method.members}
            assert got == member_oracle(catalog, {mt}, set(phases)), (mt, phases)
            cases += 1
    assert cases == 75
    assert time.monotonic() - started < 5.0


def test_fresh_instantiations_conform_with_zero_issues(catalog):
    for mt in MigrationType:
        for phases in nonempty_phase_subsets():
            method = instantiate(catalog, "probe", {mt}, set(phases))
            assert check_conformance(method, catalog) == [], (mt, phases)


def test_union_monotonicity(catalog):
    phases = set(ALL_PHASE_IDS)
    singles = {
        mt: {m.fragment for m in instantiate(catalog, "p", {mt}, phases).members}
        for mt in MigrationType
    }
    for a, b in itertools.combinations(MigrationType, 2):
        union = {m.fragment for m in instantiate(catalog, "p", {a, b}, phases).members}
        assert union >= singles[a]
        assert union >= singles[b]
        assert union == singles[a] | singles[b]


def test_phase_monotonicity(catalog):
    for mt in (MigrationType.II, MigrationType.V):
        previous = set()
        selected = set()
        for phase in ALL_PHASE_IDS:
            selected.add(phase)
            members = {m.fragment for m in instantiate(catalog, "p", {mt}, selected).members}
            assert members >= previous
            previous = members


def test_instantiation_is_deterministic(catalog):
    a = instantiate(catalog, "Hackystat to SaaS", {MigrationType.II}, set(ALL_PHASE_IDS))
    b = instantiate(catalog, "Hackystat to SaaS", {MigrationType.II}, set(ALL_PHASE_IDS))
    assert a == b


def test_sequences_seeded_from_follows_edges(catalog):
    full = instantiate(catalog, "p", {MigrationType.II}, set(ALL_PHASE_IDS))
    assert [(e.source, e.target) for e in full.sequences] == [
        ("choose-cloud-platform-provider", "identify-incompatibilities")
    ]
    plan_only = instantiate(catalog, "p", {MigrationType.V}, {"plan"})
    assert plan_only.sequences == ()


def test_list_rules_order_and_meanings(catalog):
    rules = list_rules(catalog)
    assert [r.rule_id for r in rules] == ["R00", "R01", "R01.1", "R04", "R04.3", "R05.1"]
    assert rules[0].rule_id == "R00"
    r01 = rules[1]
    assert "instantiated" in r01.meaning


def test_list_rules_on_ruleless_metamodel():
    empty = Metamodel(version="0", fragments=())
    assert list_rules(empty) == ()


def test_explain_situational_with_note(catalog):
    explanation = explain_inclusion(catalog, {MigrationType.V}, "develop-integrators")
    (entry,) = explanation.entries
    assert entry.level is ApplicabilityLevel.SITUATIONAL
    assert "effort to refactor/modify legacy codes" in entry.situation_note


def test_explain_mandatory_via_r01(catalog):
    explanation = explain_inclusion(catalog, {MigrationType.II}, "analyze-business-requirements")
    (entry,) = explanation.entries
    assert entry.level is ApplicabilityLevel.MANDATORY
    assert entry.rule_id == "R01"


def test_explain_plan_situational_via_r00(catalog):
    explanation = explain_inclusion(catalog, {MigrationType.V}, "define-plan")
    (entry,) = explanation.entries
    assert entry.level is ApplicabilityLevel.SITUATIONAL
    assert entry.rule_id == "R00"


def test_explain_unknown_fragment(catalog):
    with pytest.raises(UnknownFragment):
        explain_inclusion(catalog, {MigrationType.I}, "no-such-id")


def test_explain_orders_entries_by_type(catalog):
    explanation = explain_inclusion(
        catalog, {MigrationType.V, MigrationType.I, MigrationType.II}, "enable-elasticity"
    )
    assert [e.migration_type for e in explanation.entries] == [
        MigrationType.I,
        MigrationType.II,
        MigrationType.V,
    ]
