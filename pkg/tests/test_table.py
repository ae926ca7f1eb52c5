"""Tables: bag semantics, projection, cross product, containment relations."""

from __future__ import annotations

import itertools
import random
import time
from collections import Counter
from datetime import datetime

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vizsketch.errors import ParseError, SchemaError, UsageError
from vizsketch.table import (
    ColumnMapping,
    Placeholder,
    Table,
    bag_equal,
    bag_subset,
    cross_product,
    format_value,
    has_proj_subset,
    multiplicity,
    parse_scalar,
    proj_subset,
    project,
    project_except,
    sort_key,
    values_lt,
)


def tbl(cols, rows):
    return Table(cols, rows)


# -- values -------------------------------------------------------------


def test_parse_scalar_inference():
    assert parse_scalar("") is None
    assert parse_scalar("7") == 7.0
    assert parse_scalar("7.0") == 7.0
    assert parse_scalar("-1.5e2") == -150.0
    assert parse_scalar("2021-03-04") == datetime(2021, 3, 4)
    assert parse_scalar("2021-03-04T10:30:00Z") == datetime(2021, 3, 4, 10, 30)
    assert parse_scalar("hello") == "hello"
    # things float() would accept but users mean as text
    assert parse_scalar("nan") == "nan"
    assert parse_scalar("inf") == "inf"
    assert parse_scalar("1_000") == "1_000"


def test_cross_kind_order_is_total():
    vals = [None, 1.0, 2.0, "a", "b", datetime(2020, 1, 1), Placeholder("s")]
    assert sorted(vals, key=sort_key) == vals
    assert values_lt(None, 1.0)
    assert values_lt(2.0, "a")
    assert values_lt("b", datetime(2020, 1, 1))


def test_format_value():
    assert format_value(7.0) == "7"
    assert format_value(7.5) == "7.5"
    assert format_value(None) == ""
    assert format_value("x") == "x"


# -- table construction --------------------------------------------------


def test_table_validation():
    with pytest.raises(SchemaError):
        tbl(["a", "a"], [])
    with pytest.raises(SchemaError):
        tbl(["a", "b"], [(1, 2, 3)])
    t = tbl(["a"], [(1,), (2.0,)])
    assert t.rows == ((1.0,), (2.0,))


def test_table_equality_ignores_row_order():
    t1 = tbl(["a", "b"], [(1, "x"), (2, "y")])
    t2 = tbl(["a", "b"], [(2, "y"), (1, "x")])
    assert t1 == t2
    assert hash(t1) == hash(t2)
    t3 = tbl(["a", "b"], [(1, "x"), (1, "x"), (2, "y")])
    assert t1 != t3  # multiplicities matter
    t4 = tbl(["a", "c"], [(1, "x"), (2, "y")])
    assert t1 != t4  # schema matters


def test_csv_round_trip():
    text = "a,b\n1,x\n,y\n2021-01-02,z\n"
    t = Table.from_csv_text(text)
    assert t.columns == ("a", "b")
    assert t.rows[0] == (1.0, "x")
    assert t.rows[1] == (None, "y")
    assert t.rows[2] == (datetime(2021, 1, 2), "z")
    again = Table.from_csv_text(t.to_csv_text())
    assert again == t


def test_csv_errors():
    with pytest.raises(ParseError):
        Table.from_csv_text("")
    with pytest.raises(ParseError):
        Table.from_csv_text("a,b\n1\n")


def test_json_ingestion():
    t = Table.from_json_text('{"columns": ["a", "b"], "rows": [[1, "x"], [null, "2021-01-01"]]}')
    assert t.rows[0] == (1.0, "x")
    assert t.rows[1] == (None, datetime(2021, 1, 1))
    # JSON strings that look like numbers stay text
    t2 = Table.from_json_text('{"columns": ["a"], "rows": [["7"]]}')
    assert t2.rows[0] == ("7",)
    with pytest.raises(ParseError):
        Table.from_json_text('{"columns": ["a"]}')


# -- multiplicity and bag containment ------------------------------------


def test_multiplicity_definition():
    t = tbl(["a", "b"], [(1, "M"), (1, "M"), (2, "F")])
    assert multiplicity((1, "M"), t) == 2
    assert multiplicity((3, "M"), t) == 0
    with pytest.raises(UsageError):
        multiplicity((1,), t)


def test_multiplicity_matches_linear_scan():
    rng = random.Random(7)
    for _ in range(50):
        rows = [
            tuple(rng.choice([1.0, 2.0, "x", None]) for _ in range(3))
            for _ in range(6)
        ]
        t = tbl(["a", "b", "c"], rows)
        probe = rng.choice(rows)
        assert multiplicity(probe, t) == sum(1 for r in rows if r == probe)


def test_bag_subset_basics():
    t = tbl(["a"], [(1,), (2,)])
    assert bag_subset(tbl(["x"], []), t)
    assert not bag_subset(tbl(["x"], [(1,), (1,)]), t)  # multiplicity
    assert not bag_subset(tbl(["x", "y"], [(1, 2)]), t)  # arity mismatch is False
    assert bag_subset(t, t)


def naive_bag_subset(t1, t2):
    if t1.n_cols != t2.n_cols:
        return False
    c1, c2 = Counter(t1.rows), Counter(t2.rows)
    return all(c2[r] >= n for r, n in c1.items())


@given(st.data())
@settings(max_examples=120, deadline=None)
def test_bag_subset_matches_oracle(data):
    vals = st.sampled_from([1.0, 2.0, 3.0, "a", "b", None])
    n = data.draw(st.integers(1, 3))
    rows1 = data.draw(st.lists(st.tuples(*[vals] * n), max_size=5))
    rows2 = data.draw(st.lists(st.tuples(*[vals] * n), max_size=5))
    t1 = tbl([f"c{i}" for i in range(n)], rows1)
    t2 = tbl([f"d{i}" for i in range(n)], rows2)
    assert bag_subset(t1, t2) == naive_bag_subset(t1, t2)


def test_bag_subset_reflexive_transitive_antisym():
    a = tbl(["x"], [(1,), (2,)])
    b = tbl(["x"], [(1,), (2,), (2,)])
    c = tbl(["x"], [(1,), (2,), (2,), (3,)])
    assert bag_subset(a, a)
    assert bag_subset(a, b) and bag_subset(b, c) and bag_subset(a, c)
    # containment both ways is equality
    d = tbl(["y"], [(2,), (1,)])
    assert bag_subset(a, d) and bag_subset(d, a)
    assert bag_equal(a, d)


# -- projection and cross product -----------------------------------------


def test_project_identity_and_multiplicity():
    t = tbl(["a", "b"], [(1, "x"), (1, "x"), (2, "y")])
    assert project(t, ["a", "b"]) == t
    p = project(t, ["a"])
    assert p.counter == Counter({(1.0,): 2, (2.0,): 1})
    with pytest.raises(SchemaError):
        project(t, ["zzz"])


def test_project_except_matches_slice():
    rng = random.Random(3)
    for _ in range(20):
        rows = [tuple(float(rng.randint(0, 4)) for _ in range(3)) for _ in range(5)]
        t = tbl(["a", "b", "c"], rows)
        assert project_except(t, ["a"]).rows == tuple(r[1:] for r in rows)


def test_cross_product_cardinality_and_renaming():
    t1 = tbl(["id", "x"], [(1, 10), (2, 20)])
    t2 = tbl(["id", "y"], [(1, "a"), (2, "b"), (3, "c")])
    x = cross_product(t1, t2)
    assert x.n_rows == 6
    assert x.columns == ("id.1", "x", "id.2", "y")
    y = cross_product(t1, tbl(["z"], [("q",)]))
    assert y.columns == ("id", "x", "z")


# -- projective containment ------------------------------------------------


def brute_force_proj(t1, t2):
    """Oracle: try every injective column assignment."""
    out = []
    k = t1.n_cols
    if k > t2.n_cols:
        return out
    if k == 0:
        return [()] if t1.n_rows <= t2.n_rows else []
    for combo in itertools.permutations(range(t2.n_cols), k):
        proj = tbl([f"p{i}" for i in range(k)], [tuple(r[j] for j in combo) for r in t2.rows])
        if naive_bag_subset(t1, proj):
            out.append(tuple(t2.columns[j] for j in combo))
    return sorted(out, key=lambda img: tuple(t2.columns.index(c) for c in img))


def test_proj_subset_trivial_cases():
    t2 = tbl(["a", "b"], [(1, 3), (2, 4)])
    empty = tbl([], [])
    assert proj_subset(empty, t2) == [ColumnMapping(())]
    one = tbl(["c1"], [(1,)])
    maps = proj_subset(one, t2)
    assert [m.image for m in maps] == [("a",)]
    wide = tbl(["c1", "c2", "c3"], [(1, 2, 3)])
    assert proj_subset(wide, t2) == []


def test_proj_subset_matches_brute_force_randomized():
    rng = random.Random(11)
    pool = [1.0, 2.0, 3.0, "a", "b", None]
    for _ in range(300):
        k = rng.randint(0, 3)
        n = rng.randint(0, 4)
        r1 = rng.randint(0, 4)
        r2 = rng.randint(0, 6)
        t1 = tbl([f"c{i}" for i in range(k)],
                 [tuple(rng.choice(pool) for _ in range(k)) for _ in range(r1)])
        t2 = tbl([f"d{i}" for i in range(n)],
                 [tuple(rng.choice(pool) for _ in range(n)) for _ in range(r2)])
        got = [m.image for m in proj_subset(t1, t2)]
        want = brute_force_proj(t1, t2)
        assert got == want
        assert has_proj_subset(t1, t2) == bool(want)


def test_plain_subset_implies_projective():
    t1 = tbl(["p", "q"], [(1, "a")])
    t2 = tbl(["u", "v"], [(1, "a"), (2, "b")])
    assert bag_subset(t1, t2)
    assert any(m.image == ("u", "v") for m in proj_subset(t1, t2))


def test_column_mapping_invariants():
    with pytest.raises(UsageError):
        ColumnMapping.of([("c1", "a"), ("c2", "a")])
    with pytest.raises(UsageError):
        ColumnMapping.of([("c1", "a"), ("c1", "b")])
    m = ColumnMapping.of([("c1", "a"), ("c2", "b")])
    assert m["c1"] == "a"
    assert m.domain == ("c1", "c2")
    assert m.image == ("a", "b")
