"""Table program search.

Programs are single chains: statement 1 reads an input table, statement k
reads t{k-1}; joins may pull in another input or an earlier variable. Chains
are enumerated skeleton-first by total size, then hole fillings depth-first
with the prefix always evaluated exactly. Candidate outputs are matched
against the spec by enumerating injective column mappings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations, product

from .constraints import CELL_CAP, Spec, could_embed, eval_spec, rename_spec
from .errors import EvalError, UsageError
from .table import (
    Const,
    KIND_NUMBER,
    KIND_TEXT,
    Placeholder,
    Table,
    cross_product,
    sort_key,
    value_kind,
)
from .tabledsl import (
    Cmp,
    Cumsum,
    Filter,
    Gather,
    IsNull,
    Join,
    Mutate,
    Select,
    Separate,
    Spread,
    Summarize,
    TableProgram,
    eval_filter,
    eval_statement,
)
from .trace import values_match

OPS_ORDER = (Select, Filter, Mutate, Gather, Spread, Summarize, Join, Separate, Cumsum)

# Columns a statement can create that the spec may need and the prefix lacks.
CREATOR_SLOTS = {
    Select: 0, Filter: 0, Join: 0, Spread: 0,
    Mutate: 1, Cumsum: 1, Summarize: 1,
    Gather: 2, Separate: 2,
}

# Ops under which "spec rows embed in the current table" stays a sound check.
ROW_SAFE = frozenset((Select, Filter, Mutate, Cumsum))

DELIMS = (",", "-", "_", "/", ":", ";", " ", ".")

CONST_POOL_CAP = 64
GATHER_CAP = 512


@dataclass(frozen=True)
class TableSolution:
    program: TableProgram
    sigma: tuple  # ((spec column, output column), ...)
    output: Table

    @property
    def sigma_dict(self) -> dict:
        return dict(self.sigma)


STAT_KEYS = (
    "sketches", "statements", "finishes", "sigma_checks",
    "pruned_sketch", "pruned_status", "pruned_join", "solutions",
)


def _expired(deadline, cancel) -> bool:
    if cancel is not None and cancel.is_set():
        return True
    return deadline is not None and time.monotonic() > deadline


def _sketches(max_stmts: int) -> list:
    seqs = [()]
    for n in range(1, max_stmts + 1):
        seqs.extend(product(OPS_ORDER, repeat=n))
    seqs.sort(key=lambda s: sum(op.size for op in s))
    return seqs


def _col_kind(table: Table, col: str):
    for v in table.column_values(col):
        if v is not None:
            return value_kind(v)
    return None


def _const_pool(spec: Spec) -> list:
    seen = []
    keys = set()

    def add(v):
        if v is None or isinstance(v, Placeholder):
            return
        k = sort_key(v)
        if k in keys:
            return
        keys.add(k)
        seen.append(v)

    for a in spec.atoms:
        for row in a.table.rows:
            for v in row:
                add(v)
    for c in spec.conditions:
        for item in c.items:
            for v in item:
                if isinstance(v, (int, float, str)) and not isinstance(v, bool):
                    add(v)
    return seen[:CONST_POOL_CAP]


class _Search:
    def __init__(
        self, tables, spec, var, max_stmts, prune, deadline, cancel, stats,
        size_cap=None,
    ):
        if not tables:
            raise UsageError("no input tables")
        if spec.vars() not in ((), (var,)):
            raise UsageError(f"spec references variables other than {var!r}")
        self.size_cap = size_cap
        self.tables = dict(tables)
        self.names = tuple(tables)
        self.spec = spec
        self.var = var
        self.max_stmts = max_stmts
        self.prune = prune
        self.deadline = deadline
        self.cancel = cancel
        self.stats = stats
        self.atoms = tuple(a.table for a in spec.atoms)
        self.spec_cols = spec.columns_of(var)
        self.col_vals = {
            c: [
                v
                for a in self.atoms
                if c in a.columns
                for v in a.column_values(c)
                if not isinstance(v, Placeholder)
            ]
            for c in self.spec_cols
        }
        self.pool = _const_pool(spec)
        self._valset_cache = {}

    def expired(self) -> bool:
        return _expired(self.deadline, self.cancel)

    # -- pruning -----------------------------------------------------------

    def _valsets(self, table: Table):
        hit = self._valset_cache.get(id(table))
        if hit is not None:
            return hit[1]
        got = [tuple(table.column_values(c)) for c in table.columns]
        if len(self._valset_cache) < 4096:
            # The cached table reference keeps its id() from being recycled.
            self._valset_cache[id(table)] = (table, got)
        return got

    def _value_coverage(self, suffix, env_tables) -> bool:
        budget = sum(CREATOR_SLOTS[op] for op in suffix)
        pools = [vals for t in env_tables for vals in self._valsets(t)]
        name_pool = None
        if Gather in suffix:
            name_pool = [c for t in env_tables for c in t.columns]
        uncovered = 0
        for c in self.spec_cols:
            vals = self.col_vals[c]
            if not vals:
                continue
            if any(
                all(any(values_match(v, w) for w in pool) for v in vals)
                for pool in pools
            ):
                continue
            if name_pool is not None and all(isinstance(v, str) for v in vals):
                if all(v in name_pool for v in vals):
                    continue
            uncovered += 1
            if uncovered > budget:
                return False
        return True

    def sketch_ok(self, sketch) -> bool:
        if not sketch:
            return True
        if all(op in ROW_SAFE for op in sketch):
            free = sum(CREATOR_SLOTS[op] for op in sketch)
            return any(
                all(could_embed(a, t, free_cols=free) for a in self.atoms)
                for t in self.tables.values()
            )
        return self._value_coverage(sketch, self.tables.values())

    def status_ok(self, suffix, current: Table, env) -> bool:
        if not suffix:
            return True
        if all(op in ROW_SAFE for op in suffix):
            free = sum(CREATOR_SLOTS[op] for op in suffix)
            return all(could_embed(a, current, free_cols=free) for a in self.atoms)
        return self._value_coverage(suffix, (*env.values(), current))

    # -- finishing ---------------------------------------------------------

    def sigmas(self, output: Table):
        cols = self.spec_cols
        out_cols = output.columns
        if len(cols) > len(out_cols):
            return
        options = []
        for c in cols:
            vals = self.col_vals[c]
            if self.prune and vals:
                opts = tuple(
                    oc for oc in out_cols
                    if all(
                        any(values_match(v, w) for w in output.column_values(oc))
                        for v in vals
                    )
                )
            else:
                opts = out_cols
            if not opts:
                return
            options.append(opts)

        def walk(i, used, acc):
            if i == len(cols):
                self.stats["sigma_checks"] += 1
                mapping = dict(acc)
                renamed = rename_spec(self.spec, mapping)
                if eval_spec(renamed, {self.var: output}):
                    yield tuple(acc)
                return
            for oc in options[i]:
                if oc in used:
                    continue
                yield from walk(i + 1, used | {oc}, acc + [(cols[i], oc)])

        yield from walk(0, frozenset(), [])

    def finish(self, program: TableProgram, output: Table):
        self.stats["finishes"] += 1
        for sigma in self.sigmas(output):
            self.stats["solutions"] += 1
            yield TableSolution(program, sigma, output)

    # -- statement fillings --------------------------------------------------

    def out_name(self, k: int, table: Table) -> str:
        name = f"v{k + 1}"
        while name in table.columns:
            name += "_"
        return name

    def _select_fills(self, src, t):
        cols = t.columns
        n = len(cols)
        if n > 12:
            sizes = [n, n - 1, 1]
        else:
            sizes = list(range(n, 0, -1))
        for size in sizes:
            for combo in combinations(cols, size):
                yield Select(src, combo)

    def _filter_fills(self, src, t):
        cols = t.columns
        vals = {c: [v for v in t.column_values(c) if v is not None] for c in cols}
        sets = {c: set(vals[c]) for c in cols}
        kinds = {c: _col_kind(t, c) for c in cols}
        sorted_keys = {c: sorted(sort_key(v) for v in vals[c]) for c in cols}

        for c in cols:
            for v in self.pool:
                if v in sets[c]:
                    yield Filter(src, Cmp(c, "==", Const(v)))
        for i, c in enumerate(cols):
            for d in cols[i + 1:]:
                if sets[c] & sets[d]:
                    yield Filter(src, Cmp(c, "==", d))
        for c in cols:
            if len(vals[c]) < len(t.rows):
                yield Filter(src, IsNull(c))
        for op in ("<", "<=", ">", ">="):
            for c in cols:
                if not sorted_keys[c]:
                    continue
                lo, hi = sorted_keys[c][0], sorted_keys[c][-1]
                for v in self.pool:
                    if value_kind(v) != kinds[c]:
                        continue
                    k = sort_key(v)
                    # Keep only predicates that neither drop everything nor
                    # keep everything.
                    if op == "<" and not (lo < k <= hi):
                        continue
                    if op == "<=" and not (lo <= k and k < hi):
                        continue
                    if op == ">" and not (lo <= k < hi):
                        continue
                    if op == ">=" and not (lo < k <= hi):
                        continue
                    yield Filter(src, Cmp(c, op, Const(v)))
        for c in cols:
            for d in cols:
                if c == d or kinds[c] != kinds[d] or kinds[c] is None:
                    continue
                yield Filter(src, Cmp(c, "<", d))
                yield Filter(src, Cmp(c, "<=", d))
        for c in cols:
            for v in self.pool:
                if v in sets[c] and len(sets[c]) > 1:
                    yield Filter(src, Cmp(c, "!=", Const(v)))
        for i, c in enumerate(cols):
            for d in cols[i + 1:]:
                if sets[c] & sets[d]:
                    yield Filter(src, Cmp(c, "!=", d))

    def _mutate_fills(self, src, t, out):
        num_cols = [c for c in t.columns if _col_kind(t, c) == KIND_NUMBER]
        text_cols = [c for c in t.columns if _col_kind(t, c) == KIND_TEXT]
        num_pool = [v for v in self.pool if value_kind(v) == KIND_NUMBER]
        text_pool = [v for v in self.pool if value_kind(v) == KIND_TEXT]
        for op in ("+", "-", "*", "/"):
            for a in num_cols:
                for b in num_cols:
                    yield Mutate(src, out, op, a, b)
                for v in num_pool:
                    yield Mutate(src, out, op, a, Const(v))
        for a in text_cols:
            for b in text_cols:
                if a != b:
                    yield Mutate(src, out, "concat", a, b)
            for v in text_pool:
                yield Mutate(src, out, "concat", a, Const(v))

    def _gather_fills(self, src, t):
        cols = t.columns
        emitted = 0
        for size in range(1, len(cols) + 1):
            for combo in combinations(cols, size):
                yield Gather(src, combo)
                emitted += 1
                if emitted >= GATHER_CAP:
                    return

    def _spread_fills(self, src, t):
        for key in t.columns:
            for value in t.columns:
                if key != value:
                    yield Spread(src, key, value)

    def _summarize_fills(self, src, t, out):
        cols = t.columns
        num_cols = [c for c in cols if _col_kind(t, c) == KIND_NUMBER]
        for size in range(0, min(3, len(cols) - 1) + 1):
            for keys in combinations(cols, size):
                rest = [c for c in cols if c not in keys]
                for agg in ("min", "max", "sum", "count", "avg"):
                    targets = rest if agg in ("min", "max", "count") else [
                        c for c in rest if c in num_cols
                    ]
                    for target in targets:
                        yield Summarize(src, out, keys, agg, target)

    def _separate_fills(self, src, t):
        for c in t.columns:
            if _col_kind(t, c) != KIND_TEXT:
                continue
            cells = [v for v in t.column_values(c) if isinstance(v, str)]
            for d in DELIMS:
                if any(d in v for v in cells):
                    yield Separate(src, c, d)

    def _cumsum_fills(self, src, t, out):
        num_cols = [c for c in t.columns if _col_kind(t, c) == KIND_NUMBER]
        for target in num_cols:
            others = [c for c in t.columns if c != target]
            for size in range(0, min(2, len(others)) + 1):
                for keys in combinations(others, size):
                    yield Cumsum(src, out, target, keys)

    def _join_fills(self, src, env, k, suffix):
        left_t = env[src]
        rights = [n for n in self.names if n != src]
        rights += [f"t{j}" for j in range(1, k)]
        for right in rights:
            right_t = env[right]
            cells = (len(left_t.rows) * len(right_t.rows)) * (
                len(left_t.columns) + len(right_t.columns)
            )
            if cells > CELL_CAP:
                continue
            cross = cross_product(left_t, right_t)
            if self.prune and all(op in ROW_SAFE for op in suffix):
                free = sum(CREATOR_SLOTS[op] for op in suffix)
                if not all(
                    could_embed(a, cross, free_cols=free) for a in self.atoms
                ):
                    self.stats["pruned_join"] += 1
                    continue
            nl = len(left_t.columns)
            lcols, rcols = cross.columns[:nl], cross.columns[nl:]
            for i, lc in enumerate(lcols):
                lvals = set(
                    v for v in left_t.column_values(left_t.columns[i])
                    if v is not None
                )
                for j, rc in enumerate(rcols):
                    rvals = set(
                        v for v in right_t.column_values(right_t.columns[j])
                        if v is not None
                    )
                    if not lvals or lvals != rvals:
                        continue
                    pred = Cmp(lc, "==", rc)
                    yield Join(src, right, pred), eval_filter(cross, pred)

    def fillings(self, op, src, env, k, suffix):
        t = env[src]
        if op is Join:
            yield from self._join_fills(src, env, k, suffix)
            return
        if op is Select:
            stmts = self._select_fills(src, t)
        elif op is Filter:
            stmts = self._filter_fills(src, t)
        elif op is Mutate:
            stmts = self._mutate_fills(src, t, self.out_name(k, t))
        elif op is Gather:
            stmts = self._gather_fills(src, t)
        elif op is Spread:
            stmts = self._spread_fills(src, t)
        elif op is Summarize:
            stmts = self._summarize_fills(src, t, self.out_name(k, t))
        elif op is Separate:
            stmts = self._separate_fills(src, t)
        elif op is Cumsum:
            stmts = self._cumsum_fills(src, t, self.out_name(k, t))
        else:
            raise AssertionError(op)
        for stmt in stmts:
            try:
                yield stmt, eval_statement(stmt, env)
            except (EvalError, UsageError):
                continue

    # -- search ------------------------------------------------------------

    def run(self):
        for sketch in _sketches(self.max_stmts):
            if self.expired():
                return
            if self.size_cap is not None:
                cap = self.size_cap()
                if cap is not None and sum(op.size for op in sketch) > cap:
                    return
            self.stats["sketches"] += 1
            if self.prune and not self.sketch_ok(sketch):
                self.stats["pruned_sketch"] += 1
                continue
            if not sketch:
                for name in self.names:
                    yield from self.finish(
                        TableProgram((name,), ()), self.tables[name]
                    )
                continue
            yield from self._fill(sketch)

    def _fill(self, sketch):
        env = dict(self.tables)

        def rec(k, stmts):
            if self.expired():
                return
            if k == len(sketch):
                yield from self.finish(
                    TableProgram(self.names, stmts), env[f"t{k}"]
                )
                return
            suffix = sketch[k + 1:]
            sources = self.names if k == 0 else (f"t{k}",)
            for src in sources:
                for stmt, out in self.fillings(sketch[k], src, env, k, suffix):
                    if self.expired():
                        return
                    self.stats["statements"] += 1
                    if self.prune and not self.status_ok(suffix, out, env):
                        self.stats["pruned_status"] += 1
                        continue
                    env[f"t{k + 1}"] = out
                    yield from rec(k + 1, stmts + (stmt,))
                    del env[f"t{k + 1}"]

        yield from rec(0, ())


def learn_table_transforms(
    tables: dict,
    spec: Spec,
    var: str,
    *,
    max_stmts: int = 3,
    prune: bool = True,
    deadline: float = None,
    cancel=None,
    stats: dict = None,
    size_cap=None,
):
    """Yield (program, column mapping, output) solutions in size order.

    size_cap, when given, is polled between program skeletons; skeletons
    whose total statement size exceeds it are never explored. It may
    tighten over time as the caller learns what can still matter.
    """
    if stats is None:
        stats = {}
    for key in STAT_KEYS:
        stats.setdefault(key, 0)
    search = _Search(
        tables, spec, var, max_stmts, prune, deadline, cancel, stats, size_cap
    )
    yield from search.run()
