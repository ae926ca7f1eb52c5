"""Seeded random tables, programs, and whole search instances.

Everything here is driven by a caller-owned random.Random so test runs are
replayable. Generators validate their drafts by executing them and retry a
bounded number of times, which keeps the callers free of feasibility logic.
"""

from .errors import VizSketchError
from .table import Const, Table
from .tabledsl import (
    Cmp, Cumsum, Filter, Gather, Join, Mutate, Select, Summarize, TableProgram,
)
from .trace import VisualTrace
from .vizdsl import MultiPlot, Scatter, StackedBar, Line, render

CATEGORIES = ("a", "b", "c", "red", "blue")
COLUMN_NAMES = ("A", "B", "C", "D", "E", "F")


class GenerationError(Exception):
    """A generator ran out of retries; loosen the draw or reseed."""


def random_table(
    rng, *, max_cols=5, max_rows=6, min_cols=2, min_rows=2, min_numeric=1
) -> Table:
    n_cols = rng.randint(min_cols, max_cols)
    n_rows = rng.randint(min_rows, max_rows)
    numeric = set(rng.sample(range(n_cols), max(min_numeric, 1)))
    for i in range(n_cols):
        if i not in numeric and rng.random() < 0.6:
            numeric.add(i)
    rows = []
    for _ in range(n_rows):
        row = []
        for i in range(n_cols):
            if i in numeric:
                row.append(float(rng.randint(0, 9)))
            else:
                row.append(rng.choice(CATEGORIES))
        rows.append(row)
    return Table(COLUMN_NAMES[:n_cols], rows)


def random_key_table(rng, *, max_rows=6, max_value_cols=3) -> Table:
    """A table whose first column is a unique key; value columns are numeric."""
    n_rows = rng.randint(1, max_rows)
    n_vals = rng.randint(1, max_value_cols)
    columns = ("K",) + COLUMN_NAMES[:n_vals]
    rows = []
    for i in range(n_rows):
        rows.append([f"k{i}"] + [float(rng.randint(0, 9)) for _ in range(n_vals)])
    return Table(columns, rows)


def random_stack_table(rng, *, max_groups=3, max_colors=3) -> Table:
    """(group, color, height) rows with unique pairs and non-negative heights."""
    groups = [float(g) for g in range(1, rng.randint(1, max_groups) + 1)]
    colors = list(CATEGORIES[: rng.randint(1, max_colors)])
    rows = []
    for g in groups:
        for c in colors:
            if rng.random() < 0.85:
                rows.append([g, c, float(rng.randint(0, 9))])
    if not rows:
        rows.append([1.0, CATEGORIES[0], float(rng.randint(0, 9))])
    return Table(("G", "C", "H"), rows)


def _numeric_columns(table):
    out = []
    for c in table.columns:
        vals = [v for v in table.column_values(c) if v is not None]
        if vals and all(isinstance(v, float) for v in vals):
            out.append(c)
    return out


def _nonneg_columns(table):
    return [
        c for c in _numeric_columns(table)
        if all(v is None or v >= 0 for v in table.column_values(c))
    ]


def _low_cardinality_columns(table, limit=3):
    out = []
    for c in table.columns:
        vals = set(table.column_values(c))
        if 1 <= len(vals) <= limit:
            out.append(c)
    return out


def _draw_layer(rng, table):
    # Column channels never repeat within a layer: column bindings are
    # injective, so an aliased layer could not be recovered from its trace.
    used = set()

    def pick(pool):
        fresh = [c for c in pool if c not in used]
        if not fresh:
            raise GenerationError("no unused column for channel")
        choice = rng.choice(fresh)
        used.add(choice)
        return choice

    numeric = _numeric_columns(table)
    if len(numeric) < 2:
        raise GenerationError("need two numeric columns for positions")
    roll = rng.random()
    if roll < 0.55:
        x, y = pick(numeric), pick(numeric)
        extras = {}
        if rng.random() < 0.5:
            extras["c_color"] = (
                pick(table.columns)
                if rng.random() < 0.7 else Const(rng.choice(CATEGORIES))
            )
        if rng.random() < 0.15 and set(numeric) - used:
            extras["c_size"] = pick(numeric)
        return Scatter(c_x=x, c_y=y, **extras)
    if roll < 0.8:
        x, y = pick(numeric), pick(numeric)
        extras = {}
        if rng.random() < 0.4 and set(table.columns) - used:
            extras["c_color"] = pick(table.columns)
        return Line(c_x=x, c_y=y, **extras)
    nonneg = _nonneg_columns(table)
    if not nonneg:
        raise GenerationError("no non-negative height column")
    height = pick(nonneg)
    return StackedBar(
        orient="v",
        c_x=pick(table.columns),
        c_h=height,
        c_color=pick(table.columns),
    )


def random_visual_program(rng, table, *, max_size=6, tries=60):
    """(visual program, non-empty rendering) over the given table."""
    for _ in range(tries):
        try:
            viz = _draw_layer(rng, table)
            if rng.random() < 0.25 and viz.size + 2 <= max_size:
                taken = {
                    v for v in viz.channels().values() if isinstance(v, str)
                }
                facets = [
                    c for c in _low_cardinality_columns(table) if c not in taken
                ]
                if facets:
                    viz = MultiPlot(viz, c_col=rng.choice(facets))
            if viz.size > max_size:
                continue
            trace = render(viz, [table])
        except (GenerationError, VizSketchError):
            continue
        if len(trace) > 0:
            return viz, trace
    raise GenerationError("no renderable visual program found")


def _draw_statement(rng, env, source):
    table = env[source]
    numeric = _numeric_columns(table)
    choices = ["select", "filter"]
    if len(numeric) >= 2:
        choices += ["mutate", "cumsum"]
    if len(table.columns) >= 3 and len(numeric) >= 2:
        choices.append("gather")
    if numeric and len(table.columns) >= 2:
        choices.append("summarize")
    others = [n for n in env if n != source]
    if others:
        choices.append("join")
    kind = rng.choice(choices)
    if kind == "select":
        k = rng.randint(1, len(table.columns))
        cols = sorted(rng.sample(table.columns, k), key=table.columns.index)
        return Select(source, tuple(cols))
    if kind == "filter":
        col = rng.choice(table.columns)
        value = rng.choice(table.column_values(col))
        if value is None:
            raise GenerationError("null filter value")
        op = rng.choice(("==", "!=", "<=", ">="))
        if isinstance(value, str) and op not in ("==", "!="):
            op = "=="
        return Filter(source, Cmp(col, op, Const(value)))
    if kind == "mutate":
        left, right = rng.choice(numeric), rng.choice(numeric)
        return Mutate(source, "v1", rng.choice(("+", "-")), left, right)
    if kind == "cumsum":
        src = rng.choice(numeric)
        keys = tuple(
            rng.sample([c for c in table.columns if c != src],
                       k=rng.randint(0, 1))
        )
        return Cumsum(source, "v1", src, keys)
    if kind == "gather":
        k = rng.randint(2, min(3, len(numeric)))
        targets = sorted(rng.sample(numeric, k), key=table.columns.index)
        if len(targets) == len(table.columns):
            raise GenerationError("gather needs an id column left over")
        return Gather(source, tuple(targets))
    if kind == "summarize":
        target = rng.choice(numeric)
        keys = [c for c in table.columns if c != target]
        keys = tuple(rng.sample(keys, k=rng.randint(0, min(2, len(keys)))))
        return Summarize(source, "v1", keys, rng.choice(("sum", "min", "max")),
                         target)
    other = rng.choice(others)
    left_col = rng.choice(table.columns)
    right_col = rng.choice(env[other].columns)
    return Join(source, other, Cmp(left_col, "==", right_col))


def random_table_program(rng, tables, *, max_stmts=2, tries=40) -> TableProgram:
    """A program over the named tables whose output is a non-empty table."""
    names = sorted(tables)
    for _ in range(tries):
        env = dict(tables)
        statements = []
        source = rng.choice(names)
        n = rng.randint(0, max_stmts)
        try:
            for i in range(n):
                stmt = _draw_statement(rng, env, source)
                program = TableProgram(names, tuple(statements) + (stmt,))
                out = program.run(tables)
                if len(out.rows) == 0 or len(out.rows) > 40:
                    raise GenerationError("degenerate intermediate")
                statements.append(stmt)
                source = f"t{i + 1}"
                env[source] = out
            program = TableProgram(names, tuple(statements))
            final = program.run(tables)
        except (GenerationError, VizSketchError) as e:
            last = e
            continue
        if len(final.rows) > 0:
            return program
        last = GenerationError("empty output")
    raise GenerationError(f"no viable program: {last}")


def random_instance(rng, *, max_stmts=2, max_cols=4, max_rows=5):
    """(input tables, table program, visual program, full rendering)."""
    while True:
        tables = {
            "T1": random_table(
                rng, max_cols=max_cols, max_rows=max_rows, min_numeric=2
            )
        }
        if rng.random() < 0.25:
            tables["T2"] = random_table(
                rng, max_cols=3, max_rows=max_rows, min_numeric=1
            )
        try:
            program = random_table_program(rng, tables, max_stmts=max_stmts)
            viz, full = random_visual_program(rng, program.run(tables))
        except GenerationError:
            continue
        return tables, program, viz, full
