"""Line-oriented record format used for catalog files, method files,
action scripts, and the repository tables.

A document is a sequence of blocks. Each block starts with a ``[name]``
header line, followed by ``key: value`` field lines, and ends at a blank
line or the next header. Lines starting with ``#`` are comments and are
ignored. Values are single lines; embedded newlines, carriage returns and
backslashes are escaped as ``\\n``, ``\\r`` and ``\\\\``. A small set of
keys (declared per block schema) may repeat to encode lists; all other
keys must appear at most once.

Parsing is strict: unknown block names, unknown keys, duplicated
non-repeatable keys and malformed lines raise :class:`ParseError` with a
line number. Emission is canonical: fields are written in schema order,
so equal documents produce identical bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from mlsac.errors import ParseError

_KEY_RE = re.compile(r"^[a-z][a-z0-9-]*$")
_HEADER_RE = re.compile(r"^\[([a-z][a-z0-9-]*)\]$")


def escape_value(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\r", "\\r").replace("\n", "\\n")


def unescape_value(raw: str, line_no: int = 0) -> str:
    out: list[str] = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            if i + 1 >= len(raw):
                raise ParseError("dangling escape at end of value", line=line_no)
            nxt = raw[i + 1]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            else:
                raise ParseError(f"unknown escape '\\{nxt}'", line=line_no)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


@dataclass
class Record:
    """One parsed block: a kind plus ordered (key, value) fields."""

    kind: str
    fields: list[tuple[str, str]] = field(default_factory=list)
    line: int = 0

    def get(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def require(self, key: str) -> str:
        value = self.get(key)
        if value is None:
            raise ParseError(f"[{self.kind}] block is missing key '{key}'", line=self.line)
        return value

    def get_all(self, key: str) -> list[str]:
        return [v for k, v in self.fields if k == key]


@dataclass(frozen=True)
class BlockSchema:
    """Allowed keys for one block kind. ``repeatable`` keys may occur
    more than once; everything else at most once."""

    kind: str
    keys: tuple[str, ...]
    required: tuple[str, ...] = ()
    repeatable: tuple[str, ...] = ()


def parse(text: str, schemas: dict[str, BlockSchema] | None = None) -> list[Record]:
    """Parse a records document. With ``schemas`` given, enforce strict
    mode (unknown blocks/keys rejected, required keys checked)."""

    records: list[Record] = []
    current: Record | None = None

    def close(rec: Record | None) -> None:
        if rec is None:
            return
        if schemas is not None:
            schema = schemas[rec.kind]
            seen: set[str] = set()
            for key, _ in rec.fields:
                if key in seen and key not in schema.repeatable:
                    raise ParseError(
                        f"duplicate key '{key}' in [{rec.kind}] block", line=rec.line
                    )
                seen.add(key)
            for key in schema.required:
                if key not in seen:
                    raise ParseError(
                        f"[{rec.kind}] block is missing key '{key}'", line=rec.line
                    )
        records.append(rec)

    # Split on "\n" only: escaped values may legitimately contain other
    # Unicode line-boundary characters, which must survive verbatim.
    for line_no, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.rstrip("\r")
        if not line.strip():
            close(current)
            current = None
            continue
        if line.lstrip().startswith("#"):
            continue
        header = _HEADER_RE.match(line)
        if header:
            close(current)
            kind = header.group(1)
            if schemas is not None and kind not in schemas:
                raise ParseError(f"unknown block kind '[{kind}]'", line=line_no)
            current = Record(kind=kind, line=line_no)
            continue
        if current is None:
            raise ParseError("field line outside of any block", line=line_no)
        if ":" not in line:
            raise ParseError("expected 'key: value' line", line=line_no)
        key, _, rest = line.partition(":")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ParseError(f"invalid key '{key}'", line=line_no)
        if schemas is not None and key not in schemas[current.kind].keys:
            raise ParseError(
                f"unknown key '{key}' in [{current.kind}] block", line=line_no
            )
        value = rest[1:] if rest.startswith(" ") else rest
        current.fields.append((key, unescape_value(value, line_no)))
    close(current)
    return records


def emit(records: list[Record], schemas: dict[str, BlockSchema]) -> str:
    """Emit records canonically: keys in schema order, one blank line
    between blocks, trailing newline."""

    chunks: list[str] = []
    for rec in records:
        schema = schemas[rec.kind]
        lines = [f"[{rec.kind}]"]
        for key in schema.keys:
            for value in rec.get_all(key):
                lines.append(f"{key}: {escape_value(value)}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n" if chunks else ""


def schema_map(*schemas: BlockSchema) -> dict[str, BlockSchema]:
    return {s.kind: s for s in schemas}
