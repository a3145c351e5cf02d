import random
import xml.etree.ElementTree as ET
from dataclasses import replace
from pathlib import Path

import pytest

from mlsac.engine import instantiate
from mlsac.errors import IntegrityError, ParseError, VersionMismatch
from mlsac.model import FragmentInclusion, MigrationType
from mlsac.tailoring import RemoveFragment, parse_script, replay
from mlsac.xmlio import export_xml, import_xml

from tests.conftest import random_method

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
ALL_PHASES = {"plan", "design", "enable", "maintain"}


@pytest.fixture
def eclipse_tailored(catalog):
    base = instantiate(catalog, "EclipseSCADA reengineering", {MigrationType.V}, {"plan"})
    script = parse_script((FIXTURES / "eclipsescada.actions").read_text())
    return replay(base, catalog, script).method


def test_eclipse_export_has_seven_plan_fragments(catalog, eclipse_tailored):
    doc = export_xml(eclipse_tailored, catalog)
    root = ET.fromstring(doc)
    phases = root.findall("phase")
    assert [p.get("name") for p in phases] == ["Plan"]
    assert len(phases[0].findall("fragment")) == 7


def test_export_structure_and_order(catalog):
    method = instantiate(catalog, "Hackystat to SaaS", {MigrationType.II}, ALL_PHASES)
    root = ET.fromstring(export_xml(method, catalog))
    assert root.tag == "method"
    assert root.get("migration-types") == "II"
    assert [child.tag for child in root][:1] == ["description"]
    phase_names = [p.get("name") for p in root.findall("phase")]
    assert phase_names == ["Plan", "Design", "Enable", "Maintain"]
    assert [child.tag for child in root][-1] == "sequences"
    edges = root.find("sequences").findall("edge")
    assert [(e.get("from"), e.get("to")) for e in edges] == [
        ("choose-cloud-platform-provider", "identify-incompatibilities")
    ]


def test_empty_members_method_exports_validly(catalog):
    method = instantiate(catalog, "Skeleton", {MigrationType.V}, {"plan"})
    for member in list(method.members):
        method = replace(
            method,
            members=tuple(m for m in method.members if m != member),
            sequences=(),
        )
    doc = export_xml(method, catalog)
    root = ET.fromstring(doc)
    assert len(root.find("phase").findall("fragment")) == 0
    assert import_xml(doc, catalog) == method


def test_export_twice_is_byte_identical(catalog, eclipse_tailored):
    assert export_xml(eclipse_tailored, catalog) == export_xml(eclipse_tailored, catalog)


def test_waived_fragment_round_trips(catalog):
    method = instantiate(catalog, "Hackystat to SaaS", {MigrationType.II}, ALL_PHASES)
    method = replay(
        method,
        catalog,
        [RemoveFragment("isolate-tenant-availability", waiver="single-tenant deployment")],
    ).method
    doc = export_xml(method, catalog)
    root = ET.fromstring(doc)
    waived = [
        f
        for phase in root.findall("phase")
        for f in phase.findall("fragment")
        if f.find("waiver") is not None
    ]
    assert [f.get("id") for f in waived] == ["isolate-tenant-availability"]
    assert import_xml(doc, catalog) == method


def test_export_rejects_methods_with_errors(catalog):
    method = instantiate(catalog, "Broken", {MigrationType.V}, {"plan"})
    broken = replace(method, members=method.members + (FragmentInclusion("ghost"),))
    with pytest.raises(IntegrityError):
        export_xml(broken, catalog)


def test_malformed_bytes_are_a_parse_error(catalog):
    with pytest.raises(ParseError):
        import_xml(b"<method id='x'", catalog)
    with pytest.raises(ParseError):
        import_xml(b"not xml at all", catalog)


def test_unknown_element_rejected(catalog, eclipse_tailored):
    doc = export_xml(eclipse_tailored, catalog).decode()
    doc = doc.replace("<sequences>", "<sequences><surprise/>", 1)
    with pytest.raises(ParseError, match="surprise"):
        import_xml(doc, catalog)


def test_unknown_attribute_rejected(catalog, eclipse_tailored):
    doc = export_xml(eclipse_tailored, catalog).decode()
    doc = doc.replace("<method ", '<method color="red" ', 1)
    with pytest.raises(ParseError, match="color"):
        import_xml(doc, catalog)


def test_wrong_root_rejected(catalog):
    with pytest.raises(ParseError, match="root"):
        import_xml(b"<fragment/>", catalog)


def test_version_mismatch_and_force(catalog, eclipse_tailored):
    doc = export_xml(eclipse_tailored, catalog).decode()
    doc = doc.replace('metamodel-version="1"', 'metamodel-version="99"', 1)
    with pytest.raises(VersionMismatch):
        import_xml(doc, catalog)
    forced = import_xml(doc, catalog, force=True)
    assert forced.metamodel_version == catalog.version
    assert forced.member_ids() == eclipse_tailored.member_ids()


def test_definition_override_survives_round_trip(catalog):
    method = instantiate(catalog, "Hackystat to SaaS", {MigrationType.II}, ALL_PHASES)
    override = "Convert ISAM files to DynamoDB.\nKeep row-level audit trails."
    method = replace(
        method,
        members=tuple(
            replace(m, definition_override=override) if m.fragment == "adapt-data" else m
            for m in method.members
        ),
    )
    back = import_xml(export_xml(method, catalog), catalog)
    assert back == method
    member = next(m for m in back.members if m.fragment == "adapt-data")
    assert member.definition_override == override


def test_unmatched_ids_become_user_defined_members(catalog, eclipse_tailored):
    back = import_xml(export_xml(eclipse_tailored, catalog), catalog)
    user_ids = set(back.user_fragment_map())
    assert user_ids == {
        "determine-application-disposition",
        "plan-migration",
        "define-migration-road-map",
    }
    assert back == eclipse_tailored


def test_200_randomized_methods_round_trip(catalog):
    rng = random.Random(2024)
    for idx in range(200):
        method = random_method(catalog, rng, idx)
        doc = export_xml(method, catalog)
        assert import_xml(doc, catalog) == method, idx
        assert export_xml(import_xml(doc, catalog), catalog) == doc, idx
