"""Value and table data model: bag semantics, projection, cross product, containment."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .errors import ParseError, SchemaError, UsageError

# A cell value is one of: None (null), float (number), str (text),
# datetime (naive, normalized to UTC), or Placeholder (an opaque made-up
# value used only inside intermediate specifications).

KIND_NULL = 0
KIND_NUMBER = 1
KIND_TEXT = 2
KIND_DATETIME = 3
KIND_PLACEHOLDER = 4


@dataclass(frozen=True)
class Placeholder:
    """Stands for an unknown concrete value; matching binds it consistently."""

    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class Const:
    """A literal value embedded in a program (predicate operand, channel, mutate arg)."""

    value: object

    def __repr__(self) -> str:
        return f"Const({self.value!r})"


def value_kind(v) -> int:
    if v is None:
        return KIND_NULL
    if isinstance(v, float):
        return KIND_NUMBER
    if isinstance(v, str):
        return KIND_TEXT
    if isinstance(v, datetime):
        return KIND_DATETIME
    if isinstance(v, Placeholder):
        return KIND_PLACEHOLDER
    raise UsageError(f"not a table value: {v!r}")


def canonical_value(v):
    """Normalize a raw cell into the value domain; rejects anything else."""
    if v is None or isinstance(v, (float, str)):
        if isinstance(v, float) and not math.isfinite(v):
            raise UsageError("non-finite numbers are not table values")
        return v
    if isinstance(v, bool):
        # JSON booleans have no slot of their own; keep them readable.
        return "true" if v else "false"
    if isinstance(v, int):
        return float(v)
    if isinstance(v, datetime):
        if v.tzinfo is not None:
            v = v.astimezone(timezone.utc).replace(tzinfo=None)
        return v
    if isinstance(v, Placeholder):
        return v
    raise UsageError(f"not a table value: {v!r}")


def sort_key(v):
    """Total order across kinds: null < number < text < datetime < placeholder."""
    k = value_kind(v)
    if k == KIND_NULL:
        return (0, 0)
    if k == KIND_PLACEHOLDER:
        return (4, v.name)
    return (k, v)


def values_lt(a, b) -> bool:
    return sort_key(a) < sort_key(b)


def row_key(row: tuple):
    return tuple(sort_key(v) for v in row)


def format_value(v) -> str:
    """Compact text form: numbers drop a trailing .0, datetimes are ISO-8601."""
    if v is None:
        return ""
    if isinstance(v, float):
        if v.is_integer() and abs(v) < 2**53:
            return str(int(v))
        return repr(v)
    if isinstance(v, str):
        return v
    if isinstance(v, datetime):
        return v.isoformat()
    if isinstance(v, Placeholder):
        return repr(v)
    raise UsageError(f"not a table value: {v!r}")


def value_to_json(v):
    if isinstance(v, datetime):
        return v.isoformat()
    if isinstance(v, Placeholder):
        return {"placeholder": v.name}
    return v


def _parse_iso_datetime(text: str) -> datetime:
    s = text.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return dt


def parse_scalar(text: str):
    """Type inference for a text cell: number, then ISO-8601 datetime, else text."""
    if text == "":
        return None
    if "_" not in text:
        try:
            n = float(text)
            if math.isfinite(n):
                return n
        except ValueError:
            pass
    try:
        return _parse_iso_datetime(text)
    except ValueError:
        pass
    return text


def json_cell(v):
    """Ingest a JSON cell: numbers and null keep their type, strings may be datetimes."""
    if v is None:
        return None
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return canonical_value(float(v))
    if isinstance(v, str):
        try:
            return _parse_iso_datetime(v)
        except ValueError:
            return v
    raise ParseError(f"unsupported JSON cell: {v!r}")


class Table:
    """Immutable table: an ordered schema and an unordered bag of rows.

    Two tables are equal when their schemas match and their row multisets
    match; the stored row order is an artifact of construction only.
    """

    __slots__ = ("columns", "rows", "_counter", "_hash")

    def __init__(self, columns: Sequence[str], rows: Iterable[Sequence]):
        cols = tuple(columns)
        if len(set(cols)) != len(cols):
            raise SchemaError(f"duplicate column names: {cols}")
        for c in cols:
            if not isinstance(c, str) or not c:
                raise SchemaError(f"bad column name: {c!r}")
        packed = []
        for r in rows:
            t = tuple(canonical_value(v) for v in r)
            if len(t) != len(cols):
                raise SchemaError(
                    f"row arity {len(t)} does not match schema arity {len(cols)}"
                )
            packed.append(t)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "rows", tuple(packed))
        object.__setattr__(self, "_counter", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Table is immutable")

    @property
    def counter(self) -> Counter:
        c = self._counter
        if c is None:
            c = Counter(self.rows)
            object.__setattr__(self, "_counter", c)
        return c

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_cells(self) -> int:
        return len(self.rows) * len(self.columns)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise SchemaError(f"unknown column {name!r}; have {self.columns}") from None

    def column_values(self, name: str) -> tuple:
        i = self.column_index(name)
        return tuple(r[i] for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.columns == other.columns and self.counter == other.counter

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.columns, frozenset(self.counter.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Table(columns={list(self.columns)}, rows={self.n_rows})"

    def sorted_rows(self) -> tuple:
        return tuple(sorted(self.rows, key=row_key))

    def pretty(self) -> str:
        header = list(self.columns)
        body = [[format_value(v) for v in r] for r in self.sorted_rows()]
        widths = [
            max(len(header[i]), *(len(row[i]) for row in body)) if body else len(header[i])
            for i in range(len(header))
        ]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(header, widths)),
            "  ".join("-" * w for w in widths),
        ]
        for row in body:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        return "\n".join(lines)

    # -- ingestion / serialization ------------------------------------

    @classmethod
    def from_csv_text(cls, text: str) -> "Table":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("CSV input is empty; a header row is required") from None
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise ParseError(
                    f"CSV row {lineno} has {len(rec)} fields, header has {len(header)}"
                )
            rows.append([parse_scalar(cell) for cell in rec])
        try:
            return cls(header, rows)
        except SchemaError as e:
            raise ParseError(str(e)) from None

    def to_csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([format_value(v) for v in r])
        return out.getvalue()

    @classmethod
    def from_json_obj(cls, obj) -> "Table":
        if not isinstance(obj, dict) or "columns" not in obj or "rows" not in obj:
            raise ParseError('expected {"columns": [...], "rows": [[...], ...]}')
        cols = obj["columns"]
        if not isinstance(cols, list):
            raise ParseError("columns must be a list")
        rows = obj["rows"]
        if not isinstance(rows, list):
            raise ParseError("rows must be a list of lists")
        parsed = []
        for i, r in enumerate(rows):
            if not isinstance(r, list):
                raise ParseError(f"row {i} is not a list")
            parsed.append([json_cell(v) for v in r])
        try:
            return cls(cols, parsed)
        except SchemaError as e:
            raise ParseError(str(e)) from None

    @classmethod
    def from_json_text(cls, text: str) -> "Table":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e}") from None
        return cls.from_json_obj(obj)

    def to_json_obj(self) -> dict:
        return {
            "columns": list(self.columns),
            "rows": [[value_to_json(v) for v in r] for r in self.rows],
        }


@dataclass(frozen=True)
class ColumnMapping:
    """Injective mapping from made-up (abstract) column names to concrete ones."""

    pairs: tuple  # tuple of (abstract, concrete) name pairs

    def __post_init__(self):
        srcs = [a for a, _ in self.pairs]
        dsts = [b for _, b in self.pairs]
        if len(set(srcs)) != len(srcs):
            raise UsageError(f"mapping rebinds an abstract column: {self.pairs}")
        if len(set(dsts)) != len(dsts):
            raise UsageError(f"mapping is not injective: {self.pairs}")

    @classmethod
    def of(cls, pairs) -> "ColumnMapping":
        return cls(tuple((a, b) for a, b in pairs))

    @property
    def domain(self) -> tuple:
        return tuple(a for a, _ in self.pairs)

    @property
    def image(self) -> tuple:
        return tuple(b for _, b in self.pairs)

    def __getitem__(self, abstract: str) -> str:
        for a, b in self.pairs:
            if a == abstract:
                return b
        raise KeyError(abstract)

    def get(self, abstract: str, default=None):
        for a, b in self.pairs:
            if a == abstract:
                return b
        return default

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def __repr__(self):
        inner = ", ".join(f"{a}->{b}" for a, b in self.pairs)
        return f"ColumnMapping({inner})"


# -- bag operations ----------------------------------------------------


def multiplicity(row: Sequence, t: Table) -> int:
    """Number of occurrences of row in t's bag."""
    r = tuple(canonical_value(v) for v in row)
    if len(r) != t.n_cols:
        raise UsageError(f"row arity {len(r)} vs schema arity {t.n_cols}")
    return t.counter[r]


def bag_subset(t1: Table, t2: Table) -> bool:
    """Positional bag containment: every row of t1 occurs at least as often in t2."""
    if t1.n_cols != t2.n_cols:
        return False
    if t1.n_rows > t2.n_rows:
        return False
    c2 = t2.counter
    for row, n in t1.counter.items():
        if c2[row] < n:
            return False
    return True


def bag_equal(t1: Table, t2: Table) -> bool:
    """Containment in both directions, ignoring column names."""
    return t1.n_cols == t2.n_cols and t1.counter == t2.counter


def project(t: Table, cols: Sequence[str]) -> Table:
    cols = tuple(cols)
    idx = [t.column_index(c) for c in cols]
    return Table(cols, [tuple(r[i] for i in idx) for r in t.rows])


def project_except(t: Table, cols: Sequence[str]) -> Table:
    drop = set(cols)
    for c in drop:
        t.column_index(c)  # raise on unknown names
    keep = [c for c in t.columns if c not in drop]
    return project(t, keep)


def _disambiguate(cols1: Sequence[str], cols2: Sequence[str]) -> tuple:
    """Resolve name clashes between two schemas by suffixing the source index."""
    clash = set(cols1) & set(cols2)
    out1 = [c + ".1" if c in clash else c for c in cols1]
    out2 = [c + ".2" if c in clash else c for c in cols2]
    combined = out1 + out2
    if len(set(combined)) != len(combined):
        raise SchemaError(f"cannot disambiguate columns: {cols1} x {cols2}")
    return tuple(out1), tuple(out2)


def cross_product(t1: Table, t2: Table) -> Table:
    cols1, cols2 = _disambiguate(t1.columns, t2.columns)
    rows = [r1 + r2 for r1 in t1.rows for r2 in t2.rows]
    return Table(cols1 + cols2, rows)


def _column_counters(t: Table) -> list:
    counters = [Counter() for _ in t.columns]
    for r in t.rows:
        for i, v in enumerate(r):
            counters[i][v] += 1
    return counters


def proj_subset(t1: Table, t2: Table, first_only: bool = False) -> list:
    """All injective column mappings m with t1 contained in t2 projected onto m.

    t1 is contained in t2 with projection iff the result is nonempty. Mappings
    are returned in a deterministic order (by target column indices, in t1
    column order). With first_only, stops at the first witness.
    """
    k, n = t1.n_cols, t2.n_cols
    if k > n:
        return []
    if k == 0:
        # Zero-column containment only counts row cardinalities.
        if t1.n_rows <= t2.n_rows:
            return [ColumnMapping(())]
        return []

    c1 = _column_counters(t1)
    c2 = _column_counters(t2)
    # Per-column candidates: value multiset of the small column must fit.
    cand = []
    for i in range(k):
        ci = []
        for j in range(n):
            big = c2[j]
            if all(big[v] >= m for v, m in c1[i].items()):
                ci.append(j)
        if not ci:
            return []
        cand.append(ci)

    order = sorted(range(k), key=lambda i: len(cand[i]))
    found = []
    assign = [-1] * k
    used = set()
    t1_rows = t1.rows
    t2_rows = t2.rows

    def leaf_check() -> bool:
        small = Counter(tuple(r[assign[i]] for i in range(k)) for r in t2_rows)
        need = Counter(r for r in t1_rows)
        for row, m in need.items():
            if small[row] < m:
                return False
        return True

    def walk(pos: int) -> bool:
        if pos == k:
            if leaf_check():
                found.append(
                    ColumnMapping.of(
                        (t1.columns[i], t2.columns[assign[i]]) for i in range(k)
                    )
                )
                return first_only
            return False
        i = order[pos]
        for j in cand[i]:
            if j in used:
                continue
            assign[i] = j
            used.add(j)
            stop = walk(pos + 1)
            used.discard(j)
            assign[i] = -1
            if stop:
                return True
        return False

    walk(0)
    found.sort(key=lambda m: tuple(t2.columns.index(c) for c in m.image))
    return found


def has_proj_subset(t1: Table, t2: Table) -> bool:
    return bool(proj_subset(t1, t2, first_only=True))
