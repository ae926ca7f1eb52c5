import threading
import time
from itertools import islice

import pytest

from vizsketch.constraints import Inclusion, LineGap, Spec, eval_spec, rename_spec
from vizsketch.table import Placeholder, Table
from vizsketch.tabledsl import Gather, Join, Mutate, Spread, Summarize
from vizsketch.tablesynth import learn_table_transforms

VAR = "t0"


def spec_of(cols, rows, conditions=()):
    return Spec((Inclusion(Table(cols, rows), VAR),), tuple(conditions))


def solve(tables, spec, n=1, **kw):
    kw.setdefault("max_stmts", 2)
    return list(islice(learn_table_transforms(tables, spec, VAR, **kw), n))


def check(sol, spec, tables):
    out = sol.program.run(tables)
    assert out == sol.output
    renamed = rename_spec(spec, sol.sigma_dict)
    assert eval_spec(renamed, {VAR: out})


def test_identity_solution_comes_first():
    t1 = Table(("a", "b"), [(1.0, "x"), (2.0, "y")])
    spec = spec_of(("c1", "c2"), [(1.0, "x")])
    sols = solve({"T1": t1}, spec)
    assert sols
    assert sols[0].program.statements == ()
    assert sols[0].sigma_dict == {"c1": "a", "c2": "b"}
    check(sols[0], spec, {"T1": t1})


def test_gap_condition_forces_a_filter():
    t1 = Table(("x", "y"), [(1.0, 5.0), (2.0, 6.0), (1.5, 9.0)])
    gap = LineGap(var=VAR, c_x="c1", c_color=None, items=(((), None, 1.0, 2.0),))
    spec = spec_of(("c1", "c2"), [(1.0, 5.0), (2.0, 6.0)], [gap])
    sols = solve({"T1": t1}, spec, n=1)
    assert sols
    sol = sols[0]
    assert len(sol.program.statements) == 1
    rows = set(sol.output.rows)
    assert (1.5, 9.0) not in rows
    assert {(1.0, 5.0), (2.0, 6.0)} <= rows
    check(sol, spec, {"T1": t1})


def test_mutate_builds_missing_column():
    t1 = Table(("g", "a", "b"), [("u", 1.0, 6.0), ("v", 2.0, 10.0)])
    spec = spec_of(("c1", "c2"), [("u", 7.0), ("v", 12.0)])
    sols = solve({"T1": t1}, spec)
    assert sols
    sol = sols[0]
    stmt = sol.program.statements[0]
    assert isinstance(stmt, Mutate)
    assert sol.sigma_dict["c2"] == stmt.out
    check(sol, spec, {"T1": t1})


def test_join_combines_two_inputs():
    t1 = Table(("id", "val"), [(1.0, 10.0), (2.0, 20.0)])
    t2 = Table(("id", "name"), [(1.0, "a"), (2.0, "b")])
    spec = spec_of(("c1", "c2"), [(10.0, "a"), (20.0, "b")])
    sols = solve({"T1": t1, "T2": t2}, spec)
    assert sols
    sol = sols[0]
    assert any(isinstance(s, Join) for s in sol.program.statements)
    check(sol, spec, {"T1": t1, "T2": t2})


def test_summarize_aggregates_groups():
    t1 = Table(
        ("g", "v"),
        [("a", 1.0), ("a", 2.0), ("b", 7.0), ("b", 20.0)],
    )
    spec = spec_of(("c1", "c2"), [("a", 3.0), ("b", 27.0)])
    sols = solve({"T1": t1}, spec, n=4)
    assert sols
    sol = next(
        s for s in sols
        if any(
            isinstance(st, Summarize) and st.agg == "sum"
            for st in s.program.statements
        )
    )
    check(sol, spec, {"T1": t1})


def test_gather_reshapes_wide_input():
    t1 = Table(
        ("country", "1990", "2000"),
        [("de", 63.0, 66.0), ("fr", 57.0, 61.0)],
    )
    spec = spec_of(
        ("c1", "c2", "c3"),
        [("de", "1990", 63.0), ("de", "2000", 66.0), ("fr", "1990", 57.0)],
    )
    sols = solve({"T1": t1}, spec)
    assert sols
    sol = sols[0]
    assert any(isinstance(s, Gather) for s in sol.program.statements)
    assert sol.sigma_dict["c2"] == "key"
    assert sol.sigma_dict["c3"] == "value"
    check(sol, spec, {"T1": t1})


def test_spread_pivots_long_input():
    t1 = Table(
        ("country", "year", "pop"),
        [("de", "y90", 63.0), ("de", "y00", 66.0),
         ("fr", "y90", 57.0), ("fr", "y00", 61.0)],
    )
    spec = spec_of(("c1", "c2", "c3"), [("de", 63.0, 66.0), ("fr", 57.0, 61.0)])
    sols = solve({"T1": t1}, spec)
    assert sols
    sol = sols[0]
    assert any(isinstance(s, Spread) for s in sol.program.statements)
    check(sol, spec, {"T1": t1})


def test_separate_splits_text():
    t1 = Table(("code", "v"), [("a-1", 5.0), ("b-2", 6.0)])
    spec = spec_of(("c1", "c2"), [("a", 5.0), ("b", 6.0)])
    sols = solve({"T1": t1}, spec)
    assert sols
    check(sols[0], spec, {"T1": t1})


def test_cumsum_running_total():
    t1 = Table(("m", "s"), [(1.0, 5.0), (2.0, 7.0), (3.0, 1.0)])
    spec = spec_of(("c1", "c2"), [(2.0, 12.0), (3.0, 13.0)])
    sols = solve({"T1": t1}, spec)
    assert sols
    check(sols[0], spec, {"T1": t1})


def test_placeholder_cells_bind_consistently():
    t1 = Table(("a", "b"), [(1.0, "x"), (2.0, "x"), (3.0, "y")])
    p = Placeholder("q")
    spec = spec_of(("c1", "c2"), [(1.0, p), (2.0, p)])
    sols = solve({"T1": t1}, spec)
    assert sols
    check(sols[0], spec, {"T1": t1})
    bad = spec_of(("c1", "c2"), [(1.0, p), (3.0, p)])
    assert not solve({"T1": t1}, bad, max_stmts=0)


def test_sigma_is_injective():
    t1 = Table(("a",), [(1.0,), (2.0,)])
    spec = spec_of(("c1", "c2"), [(1.0, 2.0)])
    assert not solve({"T1": t1}, spec, max_stmts=0)


def test_solutions_come_in_size_order():
    t1 = Table(("g", "a", "b"), [("u", 1.0, 6.0), ("v", 2.0, 10.0)])
    spec = spec_of(("c1", "c2"), [("u", 7.0)])
    sols = solve({"T1": t1}, spec, n=12)
    sizes = [s.program.size for s in sols]
    assert sizes == sorted(sizes)


def test_prune_and_noprune_agree():
    cases = []
    t1 = Table(("g", "a", "b"), [("u", 1.0, 6.0), ("v", 2.0, 10.0)])
    cases.append(({"T1": t1}, spec_of(("c1", "c2"), [("u", 7.0), ("v", 12.0)])))
    t2 = Table(("x", "y"), [(1.0, 5.0), (2.0, 6.0), (1.5, 9.0)])
    gap = LineGap(var=VAR, c_x="c1", c_color=None, items=(((), None, 1.0, 2.0),))
    cases.append(({"T1": t2}, spec_of(("c1", "c2"), [(1.0, 5.0), (2.0, 6.0)], [gap])))
    t3 = Table(("g", "v"), [("a", 1.0), ("a", 2.0), ("b", 3.0)])
    cases.append(({"T1": t3}, spec_of(("c1", "c2"), [("a", 3.0)])))
    for tables, spec in cases:
        on = [
            (s.program, s.sigma)
            for s in learn_table_transforms(tables, spec, VAR, max_stmts=2, prune=True)
        ]
        off = [
            (s.program, s.sigma)
            for s in learn_table_transforms(tables, spec, VAR, max_stmts=2, prune=False)
        ]
        assert on == off


def test_pruning_reduces_work():
    t1 = Table(("g", "a", "b"), [("u", 1.0, 6.0), ("v", 2.0, 10.0)])
    spec = spec_of(("c1", "c2"), [("u", 7.0), ("v", 12.0)])
    s_on, s_off = {}, {}
    list(learn_table_transforms({"T1": t1}, spec, VAR, max_stmts=2, stats=s_on))
    list(
        learn_table_transforms(
            {"T1": t1}, spec, VAR, max_stmts=2, prune=False, stats=s_off
        )
    )
    assert s_on["pruned_status"] + s_on["pruned_sketch"] > 0
    assert s_on["statements"] < s_off["statements"]
    assert s_off["pruned_status"] == s_off["pruned_sketch"] == 0


def test_deadline_stops_search():
    t1 = Table(("a", "b", "c", "d"), [(float(i), float(i * 2), float(i * 3), str(i)) for i in range(8)])
    spec = spec_of(("c1", "c2"), [(99.0, 98.0)])
    start = time.monotonic()
    sols = list(
        learn_table_transforms(
            {"T1": t1}, spec, VAR, max_stmts=3, deadline=time.monotonic() + 0.2
        )
    )
    assert time.monotonic() - start < 2.0
    assert sols == []


def test_cancel_event_stops_immediately():
    ev = threading.Event()
    ev.set()
    t1 = Table(("a",), [(1.0,)])
    spec = spec_of(("c1",), [(1.0,)])
    sols = list(
        learn_table_transforms({"T1": t1}, spec, VAR, max_stmts=3, cancel=ev)
    )
    assert sols == []


def test_empty_spec_columns_counts_rows():
    t1 = Table(("a",), [(1.0,), (2.0,)])
    spec = spec_of((), [(), (), ()])
    assert not solve({"T1": t1}, spec, max_stmts=0)
    t2 = Table(("a",), [(1.0,), (2.0,), (3.0,)])
    sols = solve({"T2": t2}, spec, max_stmts=0)
    assert sols and sols[0].sigma == ()
