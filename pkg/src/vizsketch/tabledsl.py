"""Table transformation programs: predicates, statements, evaluation, printing.

Programs are straight-line: each statement reads named tables from an
environment and defines the next variable t1, t2, ... Statements store
concrete arguments only; partially filled programs live in the synthesizer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EvalError, SchemaError, UsageError
from .table import (
    Const,
    KIND_NUMBER,
    KIND_TEXT,
    Table,
    cross_product,
    format_value,
    sort_key,
    value_kind,
)

CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
MUTATE_OPS = ("+", "-", "*", "/", "concat")
AGG_OPS = ("min", "max", "sum", "count", "avg")


# ---------------------------------------------------------------------------
# Predicates


@dataclass(frozen=True)
class Cmp:
    left: object  # column name or Const
    op: str
    right: object

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise UsageError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class IsNull:
    col: str


@dataclass(frozen=True)
class And:
    left: object
    right: object


def _operand(term, row, t: Table):
    if isinstance(term, Const):
        return term.value
    return row[t.column_index(term)]


def eval_pred(pred, row, t: Table) -> bool:
    """Comparisons involving null are false; use IsNull to test for null."""
    if isinstance(pred, And):
        return eval_pred(pred.left, row, t) and eval_pred(pred.right, row, t)
    if isinstance(pred, IsNull):
        return row[t.column_index(pred.col)] is None
    a = _operand(pred.left, row, t)
    b = _operand(pred.right, row, t)
    if a is None or b is None:
        return False
    if pred.op == "==":
        return a == b
    if pred.op == "!=":
        return a != b
    ka, kb = sort_key(a), sort_key(b)
    if pred.op == "<":
        return ka < kb
    if pred.op == "<=":
        return ka <= kb
    if pred.op == ">":
        return ka > kb
    return ka >= kb


def pred_columns(pred) -> set:
    if isinstance(pred, And):
        return pred_columns(pred.left) | pred_columns(pred.right)
    if isinstance(pred, IsNull):
        return {pred.col}
    out = set()
    for term in (pred.left, pred.right):
        if not isinstance(term, Const):
            out.add(term)
    return out


def _term_str(term) -> str:
    if isinstance(term, Const):
        v = term.value
        return repr(v) if isinstance(v, str) else format_value(v)
    return str(term)


def pred_str(pred) -> str:
    if isinstance(pred, And):
        return f"{pred_str(pred.left)} and {pred_str(pred.right)}"
    if isinstance(pred, IsNull):
        return f"is_null({pred.col})"
    return f"{_term_str(pred.left)} {pred.op} {_term_str(pred.right)}"


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Select:
    source: str
    columns: tuple

    size = 2

    def refs(self):
        return (self.source,)

    def arg_str(self):
        return ", ".join(self.columns)


@dataclass(frozen=True)
class Filter:
    source: str
    pred: object

    size = 2

    def refs(self):
        return (self.source,)

    def arg_str(self):
        return pred_str(self.pred)


@dataclass(frozen=True)
class Mutate:
    source: str
    out: str
    op: str  # one of MUTATE_OPS
    left: str
    right: object  # column name or Const

    size = 4

    def __post_init__(self):
        if self.op not in MUTATE_OPS:
            raise UsageError(f"unknown mutate op {self.op!r}")

    def refs(self):
        return (self.source,)

    def arg_str(self):
        if self.op == "concat":
            return f"{self.out} = concat({self.left}, {_term_str(self.right)})"
        return f"{self.out} = {self.left} {self.op} {_term_str(self.right)}"


@dataclass(frozen=True)
class Gather:
    source: str
    targets: tuple

    size = 2

    def refs(self):
        return (self.source,)

    def arg_str(self):
        return "targets=(" + ", ".join(self.targets) + ")"


@dataclass(frozen=True)
class Spread:
    source: str
    key: str
    value: str

    size = 3

    def refs(self):
        return (self.source,)

    def arg_str(self):
        return f"{self.key}, {self.value}"


@dataclass(frozen=True)
class Summarize:
    source: str
    out: str
    keys: tuple
    agg: str  # one of AGG_OPS
    target: str

    size = 4

    def __post_init__(self):
        if self.agg not in AGG_OPS:
            raise UsageError(f"unknown aggregate {self.agg!r}")

    def refs(self):
        return (self.source,)

    def arg_str(self):
        keys = ", ".join(self.keys)
        return f"keys=({keys}), {self.out} = {self.agg}({self.target})"


@dataclass(frozen=True)
class Join:
    left: str
    right: str
    pred: object

    size = 3

    def refs(self):
        return (self.left, self.right)

    def arg_str(self):
        return pred_str(self.pred)


@dataclass(frozen=True)
class Separate:
    source: str
    col: str
    delim: str

    size = 3

    def refs(self):
        return (self.source,)

    def arg_str(self):
        return f"{self.col}, {self.delim!r}"


@dataclass(frozen=True)
class Cumsum:
    source: str
    out: str
    src: str
    keys: tuple

    size = 3

    def refs(self):
        return (self.source,)

    def arg_str(self):
        keys = ", ".join(self.keys)
        return f"{self.out} = cumsum({self.src}), keys=({keys})"


STMT_KINDS = (Select, Filter, Mutate, Gather, Spread, Summarize, Join, Separate, Cumsum)


# ---------------------------------------------------------------------------
# Evaluation


def eval_select(t: Table, columns) -> Table:
    idx = [t.column_index(c) for c in columns]
    return Table(tuple(columns), [tuple(r[i] for i in idx) for r in t.rows])


def eval_filter(t: Table, pred) -> Table:
    return Table(t.columns, [r for r in t.rows if eval_pred(pred, r, t)])


def _check_new_column(t: Table, out: str):
    if out in t.columns:
        raise EvalError(f"column {out!r} already exists")


def eval_mutate(t: Table, out: str, op: str, left: str, right) -> Table:
    """Null operands propagate to a null result; type errors abort."""
    _check_new_column(t, out)
    li = t.column_index(left)
    ri = None if isinstance(right, Const) else t.column_index(right)

    def apply(row):
        a = row[li]
        b = right.value if ri is None else row[ri]
        if a is None or b is None:
            return None
        if op == "concat":
            if value_kind(a) != KIND_TEXT or value_kind(b) != KIND_TEXT:
                raise EvalError("concat needs text operands")
            return a + b
        if value_kind(a) != KIND_NUMBER or value_kind(b) != KIND_NUMBER:
            raise EvalError(f"{op} needs numeric operands")
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            raise EvalError("division by zero")
        return a / b

    return Table(t.columns + (out,), [r + (apply(r),) for r in t.rows])


def eval_gather(t: Table, targets) -> Table:
    """Fold the target columns into key/value pairs; other columns identify rows."""
    if not targets:
        raise UsageError("gather needs at least one target column")
    tidx = [t.column_index(c) for c in targets]
    ids = [c for c in t.columns if c not in targets]
    if "key" in ids or "value" in ids:
        raise EvalError('gather output clashes with an existing "key"/"value" column')
    iidx = [t.column_index(c) for c in ids]
    rows = []
    for r in t.rows:
        base = tuple(r[i] for i in iidx)
        for c, i in zip(targets, tidx):
            rows.append(base + (c, r[i]))
    return Table(tuple(ids) + ("key", "value"), rows)


def eval_spread(t: Table, key: str, value: str) -> Table:
    """Pivot key/value pairs into one column per key; gaps become null."""
    ki, vi = t.column_index(key), t.column_index(value)
    ids = [c for c in t.columns if c not in (key, value)]
    iidx = [t.column_index(c) for c in ids]

    key_vals = []
    seen = set()
    for r in t.rows:
        kv = r[ki]
        if kv is None:
            raise EvalError("spread key is null")
        h = (value_kind(kv), kv)
        if h not in seen:
            seen.add(h)
            key_vals.append(kv)
    key_vals.sort(key=sort_key)
    new_cols = [format_value(kv) for kv in key_vals]
    if len(set(new_cols)) != len(new_cols):
        raise EvalError("spread keys collide after formatting")
    for c in new_cols:
        if c in ids:
            raise EvalError(f"spread column {c!r} already exists")
    col_of = {(value_kind(kv), kv): j for j, kv in enumerate(key_vals)}

    groups: dict = {}
    order = []
    for r in t.rows:
        gid = tuple(r[i] for i in iidx)
        gkey = tuple((value_kind(v), v) for v in gid)
        if gkey not in groups:
            groups[gkey] = (gid, [None] * len(key_vals), set())
            order.append(gkey)
        _, cells, used = groups[gkey]
        j = col_of[(value_kind(r[ki]), r[ki])]
        if j in used:
            raise EvalError("duplicate key within a spread group")
        used.add(j)
        cells[j] = r[vi]
    rows = [groups[g][0] + tuple(groups[g][1]) for g in order]
    return Table(tuple(ids) + tuple(new_cols), rows)


def eval_summarize(t: Table, out: str, keys, agg: str, target: str) -> Table:
    for k in keys:
        t.column_index(k)
    if target in keys:
        raise UsageError("summarize target cannot be a key")
    if out in keys:
        raise EvalError(f"column {out!r} already exists")
    kidx = [t.column_index(k) for k in keys]
    ti = t.column_index(target)

    groups: dict = {}
    for r in t.rows:
        gid = tuple(r[i] for i in kidx)
        gkey = tuple((value_kind(v), v) for v in gid)
        groups.setdefault(gkey, (gid, []))[1].append(r[ti])

    def aggregate(values):
        present = [v for v in values if v is not None]
        if agg == "count":
            return float(len(present))
        if not present:
            raise EvalError(f"{agg} over an all-null group")
        if agg in ("min", "max"):
            pick = min if agg == "min" else max
            return pick(present, key=sort_key)
        for v in present:
            if value_kind(v) != KIND_NUMBER:
                raise EvalError(f"{agg} needs numeric values")
        s = sum(present)
        return s if agg == "sum" else s / len(present)

    rows = []
    for gkey in sorted(groups, key=lambda g: tuple(sort_key(v) for _, v in g)):
        gid, values = groups[gkey]
        rows.append(gid + (aggregate(values),))
    return Table(tuple(keys) + (out,), rows)


def eval_join(t1: Table, t2: Table, pred) -> Table:
    crossed = cross_product(t1, t2)
    return eval_filter(crossed, pred)


def eval_separate(t: Table, col: str, delim: str) -> Table:
    """Split a text column at the first delimiter, in place as col_1/col_2."""
    ci = t.column_index(col)
    c1, c2 = f"{col}_1", f"{col}_2"
    rest = [c for c in t.columns if c != col]
    if c1 in rest or c2 in rest or c1 == c2:
        raise EvalError(f"separate output {c1!r}/{c2!r} already exists")
    cols = t.columns[:ci] + (c1, c2) + t.columns[ci + 1 :]

    def split(v):
        if v is None:
            return (None, None)
        if value_kind(v) != KIND_TEXT:
            raise EvalError("separate needs a text column")
        head, found, tail = v.partition(delim)
        return (head, tail) if found else (v, None)

    rows = [r[:ci] + split(r[ci]) + r[ci + 1 :] for r in t.rows]
    return Table(cols, rows)


def eval_cumsum(t: Table, out: str, src: str, keys) -> Table:
    """Running sum of src within each key group, ordered by the other columns."""
    _check_new_column(t, out)
    si = t.column_index(src)
    kidx = [t.column_index(k) for k in keys]
    oidx = [i for i in range(t.n_cols) if i not in kidx]

    groups: dict = {}
    for r in t.rows:
        gkey = tuple((value_kind(r[i]), r[i]) for i in kidx)
        groups.setdefault(gkey, []).append(r)
    rows = []
    for grp in groups.values():
        grp.sort(key=lambda r: tuple(sort_key(r[i]) for i in oidx))
        acc = 0.0
        for r in grp:
            v = r[si]
            if v is None or value_kind(v) != KIND_NUMBER:
                raise EvalError("cumsum needs numeric values")
            acc += v
            rows.append(r + (acc,))
    return Table(t.columns + (out,), rows)


def eval_statement(stmt, env: dict) -> Table:
    def get(name):
        if name not in env:
            raise SchemaError(f"unknown table {name!r}")
        return env[name]

    if isinstance(stmt, Select):
        return eval_select(get(stmt.source), stmt.columns)
    if isinstance(stmt, Filter):
        return eval_filter(get(stmt.source), stmt.pred)
    if isinstance(stmt, Mutate):
        return eval_mutate(get(stmt.source), stmt.out, stmt.op, stmt.left, stmt.right)
    if isinstance(stmt, Gather):
        return eval_gather(get(stmt.source), stmt.targets)
    if isinstance(stmt, Spread):
        return eval_spread(get(stmt.source), stmt.key, stmt.value)
    if isinstance(stmt, Summarize):
        return eval_summarize(
            get(stmt.source), stmt.out, stmt.keys, stmt.agg, stmt.target
        )
    if isinstance(stmt, Join):
        return eval_join(get(stmt.left), get(stmt.right), stmt.pred)
    if isinstance(stmt, Cumsum):
        return eval_cumsum(get(stmt.source), stmt.out, stmt.src, stmt.keys)
    if isinstance(stmt, Separate):
        return eval_separate(get(stmt.source), stmt.col, stmt.delim)
    raise UsageError(f"unknown statement {stmt!r}")


# ---------------------------------------------------------------------------
# Programs


OP_NAMES = {
    Select: "select",
    Filter: "filter",
    Mutate: "mutate",
    Gather: "gather",
    Spread: "spread",
    Summarize: "summarize",
    Join: "join",
    Separate: "separate",
    Cumsum: "cumsum",
}


class TableProgram:
    """Straight-line program; statement i defines variable t{i+1}."""

    __slots__ = ("inputs", "statements")

    def __init__(self, inputs, statements):
        inputs = tuple(inputs)
        statements = tuple(statements)
        if not inputs:
            raise UsageError("a program needs at least one input table")
        defined = set(inputs)
        if len(defined) != len(inputs):
            raise UsageError("duplicate input names")
        for i, stmt in enumerate(statements):
            var = f"t{i + 1}"
            if var in defined:
                raise UsageError(f"variable {var} collides with an input name")
            for ref in stmt.refs():
                if ref not in defined:
                    raise UsageError(f"statement {i + 1} reads unknown table {ref!r}")
            defined.add(var)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "statements", statements)

    def __setattr__(self, name, value):
        raise AttributeError("TableProgram is immutable")

    def __eq__(self, other):
        if not isinstance(other, TableProgram):
            return NotImplemented
        return self.inputs == other.inputs and self.statements == other.statements

    def __hash__(self):
        return hash((self.inputs, self.statements))

    @property
    def size(self) -> int:
        return sum(s.size for s in self.statements)

    def var_names(self):
        return tuple(f"t{i + 1}" for i in range(len(self.statements)))

    def run(self, tables: dict) -> Table:
        """Evaluate on named input tables; the last variable is the result."""
        env = {}
        for name in self.inputs:
            if name not in tables:
                raise UsageError(f"missing input table {name!r}")
            env[name] = tables[name]
        if not self.statements:
            if len(self.inputs) != 1:
                raise UsageError("an empty program needs exactly one input")
            return env[self.inputs[0]]
        for i, stmt in enumerate(self.statements):
            env[f"t{i + 1}"] = eval_statement(stmt, env)
        return env[f"t{len(self.statements)}"]

    def pretty(self) -> str:
        lines = []
        for i, stmt in enumerate(self.statements):
            op = OP_NAMES[type(stmt)]
            srcs = ", ".join(stmt.refs())
            args = stmt.arg_str()
            body = f"{op}({srcs}, {args})" if args else f"{op}({srcs})"
            lines.append(f"t{i + 1} = {body}")
        if not lines:
            lines.append(f"t1 = {self.inputs[0]}")
        return "\n".join(lines)

    def __repr__(self):
        return f"TableProgram({'; '.join(self.pretty().splitlines())})"


# ---------------------------------------------------------------------------
# Static schemas

OPEN_SCHEMA = None  # unknown column set, produced by spread on an unknown input


def schema_after(stmt, schema_of) -> tuple | None:
    """Static output schema of one statement, or OPEN_SCHEMA if undetermined.

    schema_of maps a table name to its schema tuple or OPEN_SCHEMA.
    """
    if isinstance(stmt, Select):
        return tuple(stmt.columns)
    if isinstance(stmt, Summarize):
        return tuple(stmt.keys) + (stmt.out,)
    src = schema_of(stmt.refs()[0])
    if isinstance(stmt, Filter):
        return src
    if isinstance(stmt, Mutate) or isinstance(stmt, Cumsum):
        return None if src is OPEN_SCHEMA else src + (stmt.out,)
    if isinstance(stmt, Gather):
        if src is OPEN_SCHEMA:
            return OPEN_SCHEMA
        ids = tuple(c for c in src if c not in stmt.targets)
        return ids + ("key", "value")
    if isinstance(stmt, Spread):
        return OPEN_SCHEMA
    if isinstance(stmt, Separate):
        if src is OPEN_SCHEMA:
            return OPEN_SCHEMA
        i = src.index(stmt.col)
        return src[:i] + (f"{stmt.col}_1", f"{stmt.col}_2") + src[i + 1 :]
    if isinstance(stmt, Join):
        left, right = schema_of(stmt.left), schema_of(stmt.right)
        if left is OPEN_SCHEMA or right is OPEN_SCHEMA:
            return OPEN_SCHEMA
        from .table import _disambiguate

        c1, c2 = _disambiguate(left, right)
        return c1 + c2
    raise UsageError(f"unknown statement {stmt!r}")


def program_schemas(prog: TableProgram, input_schemas: dict) -> list:
    """Static schema after each statement; entries may be OPEN_SCHEMA."""
    known = dict(input_schemas)

    def schema_of(name):
        return known.get(name, OPEN_SCHEMA)

    out = []
    for i, stmt in enumerate(prog.statements):
        s = schema_after(stmt, schema_of)
        known[f"t{i + 1}"] = s
        out.append(s)
    return out
