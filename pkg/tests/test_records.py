import pytest
from hypothesis import given, strategies as st

from mlsac import records
from mlsac.errors import ParseError

SCHEMAS = records.schema_map(
    records.BlockSchema("thing", keys=("id", "note", "tag"), required=("id",), repeatable=("tag",)),
)


def roundtrip(recs):
    return records.parse(records.emit(recs, SCHEMAS), SCHEMAS)


def test_basic_roundtrip():
    rec = records.Record("thing")
    rec.fields = [("id", "a"), ("note", "hello world"), ("tag", "x"), ("tag", "y")]
    back = roundtrip([rec])
    assert len(back) == 1
    assert back[0].get("id") == "a"
    assert back[0].get_all("tag") == ["x", "y"]


@given(st.text(max_size=200))
def test_value_escaping_roundtrips(value):
    assert records.unescape_value(records.escape_value(value)) == value


@given(st.lists(st.text(max_size=80), min_size=1, max_size=5))
def test_document_roundtrip_preserves_values(values):
    recs = []
    for i, value in enumerate(values):
        rec = records.Record("thing")
        rec.fields = [("id", f"id-{i}"), ("note", value)]
        recs.append(rec)
    back = roundtrip(recs)
    assert [r.get("note") for r in back] == values


def test_comments_and_blank_lines_ignored():
    text = "# heading comment\n\n[thing]\n# inner comment\nid: a\n\n\n[thing]\nid: b\n"
    parsed = records.parse(text, SCHEMAS)
    assert [r.get("id") for r in parsed] == ["a", "b"]


def test_unknown_block_rejected():
    with pytest.raises(ParseError, match="unknown block"):
        records.parse("[nope]\nid: a\n", SCHEMAS)


def test_unknown_key_rejected():
    with pytest.raises(ParseError, match="unknown key"):
        records.parse("[thing]\nid: a\nbogus: b\n", SCHEMAS)


def test_missing_required_key_rejected():
    with pytest.raises(ParseError, match="missing key 'id'"):
        records.parse("[thing]\nnote: a\n", SCHEMAS)


def test_duplicate_key_rejected():
    with pytest.raises(ParseError, match="duplicate key"):
        records.parse("[thing]\nid: a\nid: b\n", SCHEMAS)


def test_repeatable_key_allowed():
    parsed = records.parse("[thing]\nid: a\ntag: one\ntag: two\n", SCHEMAS)
    assert parsed[0].get_all("tag") == ["one", "two"]


def test_field_outside_block_rejected():
    with pytest.raises(ParseError, match="outside of any block"):
        records.parse("id: a\n", SCHEMAS)


def test_bad_escape_rejected():
    with pytest.raises(ParseError, match="escape"):
        records.parse("[thing]\nid: a\\q\n", SCHEMAS)


def test_error_carries_line_number():
    with pytest.raises(ParseError, match="line 3"):
        records.parse("[thing]\nid: a\nbogus: b\n", SCHEMAS)


def test_emission_is_canonical():
    rec = records.Record("thing")
    rec.fields = [("note", "later"), ("id", "a")]  # out of schema order
    text = records.emit([rec], SCHEMAS)
    assert text == "[thing]\nid: a\nnote: later\n"
