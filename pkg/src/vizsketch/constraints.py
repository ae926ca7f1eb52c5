"""Constraints relating candidate tables to sketch content.

A Spec is a conjunction of inclusion atoms (a small table of required rows,
possibly containing placeholders, embedded in a program variable) plus side
conditions for stacking sums and line adjacency. Placeholder cells bind
existentially but consistently across the whole spec.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import UsageError
from .table import (
    KIND_NUMBER,
    Placeholder,
    Table,
    project,
    sort_key,
    value_kind,
)
from .trace import values_match

CELL_CAP = 50_000

SUBSET = "subset"
PROJ_SUBSET = "proj_subset"


@dataclass(frozen=True)
class Inclusion:
    """The rows of `table` must appear (injectively, by column name) in `var`."""

    table: Table
    var: str
    relation: str = PROJ_SUBSET

    def __post_init__(self):
        if self.relation not in (SUBSET, PROJ_SUBSET):
            raise UsageError(f"unknown relation {self.relation!r}")


@dataclass(frozen=True)
class StackedSum:
    """Each item pins where a stacked segment starts.

    Item layout: (x, subs, color, y1). Rows of `var` grouped with the item
    (same x, same subplot values) whose color sorts strictly below the item's
    color must have heights summing to y1.
    """

    var: str
    c_x: str
    c_color: str
    c_h: str
    c_subs: tuple = ()
    items: tuple = ()


@dataclass(frozen=True)
class LineGap:
    """Each item forbids interior points along one sketched segment.

    Item layout: (subs, color, x1, x2). No row of `var` in the same group may
    have an x value strictly between x1 and x2.
    """

    var: str
    c_x: str
    c_color: str | None
    c_subs: tuple = ()
    items: tuple = ()


@dataclass(frozen=True)
class Spec:
    atoms: tuple = ()
    conditions: tuple = ()

    def vars(self) -> tuple:
        seen = []
        for a in self.atoms:
            if a.var not in seen:
                seen.append(a.var)
        for c in self.conditions:
            if c.var not in seen:
                seen.append(c.var)
        return tuple(seen)

    def columns_of(self, var: str) -> tuple:
        """Columns the spec mentions for one variable, first occurrence order."""
        seen = []
        for a in self.atoms:
            if a.var != var:
                continue
            for c in a.table.columns:
                if c not in seen:
                    seen.append(c)
        for c in self.conditions:
            if c.var != var:
                continue
            refs = [c.c_x, c.c_h] if isinstance(c, StackedSum) else [c.c_x]
            if getattr(c, "c_color", None) is not None:
                refs.append(c.c_color)
            refs.extend(c.c_subs)
            for r in refs:
                if r is not None and r not in seen:
                    seen.append(r)
        return tuple(seen)

    def for_var(self, var: str) -> "Spec":
        return Spec(
            tuple(a for a in self.atoms if a.var == var),
            tuple(c for c in self.conditions if c.var == var),
        )


def _rename_value(v):
    return v


def rename_spec(spec: Spec, mapping: dict, var_mapping: dict | None = None) -> Spec:
    """Apply a column substitution (and optional variable renaming)."""

    def col(c):
        return mapping.get(c, c) if c is not None else None

    def var(v):
        return var_mapping.get(v, v) if var_mapping else v

    atoms = []
    for a in spec.atoms:
        t = Table(tuple(col(c) for c in a.table.columns), list(a.table.rows))
        atoms.append(Inclusion(t, var(a.var), a.relation))
    conds = []
    for c in spec.conditions:
        subs = tuple(col(s) for s in c.c_subs)
        if isinstance(c, StackedSum):
            conds.append(
                replace(
                    c, var=var(c.var), c_x=col(c.c_x), c_color=col(c.c_color),
                    c_h=col(c.c_h), c_subs=subs,
                )
            )
        else:
            conds.append(
                replace(
                    c, var=var(c.var), c_x=col(c.c_x), c_color=col(c.c_color),
                    c_subs=subs,
                )
            )
    return Spec(tuple(atoms), tuple(conds))


def spec_placeholders(spec: Spec) -> set:
    out = set()
    for a in spec.atoms:
        for row in a.table.rows:
            for v in row:
                if isinstance(v, Placeholder):
                    out.add(v.name)
    for c in spec.conditions:
        for item in c.items:
            for v in _item_values(item):
                if isinstance(v, Placeholder):
                    out.add(v.name)
    return out


def _item_values(item):
    for v in item:
        if isinstance(v, tuple):
            yield from v
        else:
            yield v


# ---------------------------------------------------------------------------
# Symbol-aware row matching


def _cell_match(spec_cell, target_cell, binding, news):
    if isinstance(spec_cell, Placeholder):
        name = spec_cell.name
        if name in binding:
            return binding[name] == target_cell
        if name in news:
            return news[name] == target_cell
        news[name] = target_cell
        return True
    return values_match(spec_cell, target_cell)


def _row_match(spec_row, target_row, binding):
    """Return newly bound placeholders if the rows agree, else None."""
    news: dict = {}
    for s, t in zip(spec_row, target_row):
        if not _cell_match(s, t, binding, news):
            return None
    return news


def match_bindings(spec_rows, target_rows, binding=None):
    """Yield placeholder bindings under which spec_rows embed injectively."""
    if binding is None:
        binding = {}
    if len(spec_rows) > len(target_rows):
        return
    # Most constrained first: rows with fewer candidate targets early.
    order = sorted(
        range(len(spec_rows)),
        key=lambda i: sum(
            1 for t in target_rows if _row_match(spec_rows[i], t, binding) is not None
        ),
    )
    used = [False] * len(target_rows)

    def walk(k, bnd):
        if k == len(order):
            yield dict(bnd)
            return
        row = spec_rows[order[k]]
        for j, target in enumerate(target_rows):
            if used[j]:
                continue
            news = _row_match(row, target, bnd)
            if news is None:
                continue
            used[j] = True
            bnd.update(news)
            yield from walk(k + 1, bnd)
            for name in news:
                del bnd[name]
            used[j] = False

    yield from walk(0, dict(binding))


def _project_for(table: Table, target: Table):
    """Project target by name onto the spec table's columns, or None if absent."""
    for c in table.columns:
        if c not in target.columns:
            return None
    return project(target, table.columns)


def ground_check(spec_table: Table, target: Table) -> bool:
    """Could the spec rows embed in the target? False only on a sure mismatch."""
    if target.n_cells > CELL_CAP:
        return True
    p = _project_for(spec_table, target)
    if p is None:
        return False
    for _ in match_bindings(spec_table.rows, p.rows):
        return True
    return False


# ---------------------------------------------------------------------------
# Full evaluation


def _resolve(v, binding):
    if isinstance(v, Placeholder):
        if v.name not in binding:
            raise UsageError(f"unbound placeholder ?{v.name} in a side condition")
        return binding[v.name]
    return v


def _subs_match(row, sub_idx, subs, binding) -> bool:
    for i, want in zip(sub_idx, subs):
        if not values_match(_resolve(want, binding), row[i]):
            return False
    return True


def _check_stacked_sum(cond: StackedSum, t: Table, binding) -> bool:
    xi = t.column_index(cond.c_x)
    ci = t.column_index(cond.c_color)
    hi = t.column_index(cond.c_h)
    sub_idx = [t.column_index(s) for s in cond.c_subs]
    for item in cond.items:
        x, subs, color, y1 = item
        x = _resolve(x, binding)
        color = _resolve(color, binding)
        y1 = _resolve(y1, binding)
        ck = sort_key(color)
        total = 0.0
        for row in t.rows:
            if not values_match(x, row[xi]):
                continue
            if not _subs_match(row, sub_idx, subs, binding):
                continue
            if sort_key(row[ci]) >= ck:
                continue
            h = row[hi]
            if h is None or value_kind(h) != KIND_NUMBER:
                return False
            total += h
        if not (isinstance(y1, float) and values_match(total, y1)):
            return False
    return True


def _check_line_gap(cond: LineGap, t: Table, binding) -> bool:
    xi = t.column_index(cond.c_x)
    ci = t.column_index(cond.c_color) if cond.c_color is not None else None
    sub_idx = [t.column_index(s) for s in cond.c_subs]
    for item in cond.items:
        subs, color, x1, x2 = item
        x1 = _resolve(x1, binding)
        x2 = _resolve(x2, binding)
        if not isinstance(x1, float) or not isinstance(x2, float):
            return False
        color = _resolve(color, binding) if ci is not None else None
        for row in t.rows:
            if ci is not None and not values_match(color, row[ci]):
                continue
            if not _subs_match(row, sub_idx, subs, binding):
                continue
            xv = row[xi]
            if xv is None or value_kind(xv) != KIND_NUMBER:
                continue
            if values_match(xv, x1) or values_match(xv, x2):
                continue
            if x1 < xv < x2:
                return False
    return True


def _check_condition(cond, tables, binding) -> bool:
    t = tables[cond.var]
    if isinstance(cond, StackedSum):
        return _check_stacked_sum(cond, t, binding)
    return _check_line_gap(cond, t, binding)


def eval_spec(spec: Spec, tables: dict) -> bool:
    """True iff some consistent placeholder binding satisfies every conjunct."""
    prepared = []
    for a in spec.atoms:
        target = tables.get(a.var)
        if target is None:
            raise UsageError(f"no table bound for {a.var!r}")
        p = _project_for(a.table, target)
        if p is None:
            return False
        prepared.append((a.table.rows, p.rows))
    prepared.sort(key=lambda pair: len(pair[0]))

    def walk(k, binding):
        if k == len(prepared):
            return all(_check_condition(c, tables, binding) for c in spec.conditions)
        spec_rows, target_rows = prepared[k]
        for bnd in match_bindings(spec_rows, target_rows, binding):
            if walk(k + 1, bnd):
                return True
        return False

    return walk(0, {})


def could_embed(spec_table: Table, target: Table, free_cols: int = 0) -> bool:
    """Could the spec rows embed in target under some partial column mapping?

    The mapping is injective over spec columns; up to free_cols spec columns
    may stay unmapped (their cells are ignored, e.g. columns a later statement
    will compute). Conservative: True means maybe, False means definitely not.
    Targets past the cell cap are not examined.
    """
    if len(target.columns) * len(target.rows) > CELL_CAP:
        return True
    if len(spec_table.rows) > len(target.rows):
        return False
    if len(spec_table.columns) - free_cols > len(target.columns):
        return False
    tcols = target.columns
    tvals = {c: target.column_values(c) for c in tcols}

    ranked = []
    for i, c in enumerate(spec_table.columns):
        vals = [
            v for v in spec_table.column_values(c)
            if not isinstance(v, Placeholder)
        ]
        options = tuple(
            tc for tc in tcols
            if all(any(values_match(v, w) for w in tvals[tc]) for v in vals)
        )
        ranked.append((len(options), i, options))
    ranked.sort(key=lambda r: (r[0], r[1]))

    tindex = {c: j for j, c in enumerate(tcols)}

    def rows_match(chosen) -> bool:
        if not chosen:
            return True
        sidx = [i for i, _ in chosen]
        tidx = [tindex[tc] for _, tc in chosen]
        srows = [tuple(r[i] for i in sidx) for r in spec_table.rows]
        trows = [tuple(r[j] for j in tidx) for r in target.rows]
        return next(match_bindings(srows, trows), None) is not None

    def walk(j, used, chosen, skipped):
        if skipped > free_cols:
            return False
        if j == len(ranked):
            return rows_match(chosen)
        _, i, options = ranked[j]
        for tc in options:
            if tc in used:
                continue
            if walk(j + 1, used | {tc}, chosen + [(i, tc)], skipped):
                return True
        return walk(j + 1, used, chosen, skipped + 1)

    return walk(0, frozenset(), [], 0)
