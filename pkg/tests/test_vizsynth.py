import random

import pytest

from vizsketch.constraints import Inclusion, LineGap, StackedSum, eval_spec
from vizsketch.table import Const, Placeholder, Table
from vizsketch.trace import VisualTrace, area, barh, barv, line, point, trace_contains
from vizsketch.vizdsl import (
    Area,
    Bar,
    Line,
    MultiLayer,
    MultiPlot,
    Scatter,
    StackedArea,
    StackedBar,
    render,
)
from vizsketch.vizsynth import learn_visual_programs


def programs(cands):
    return [c.program for c in cands]


def spec_table(cand, var="t0"):
    atoms = [a for a in cand.spec.atoms if a.var == var]
    assert len(atoms) == 1
    return atoms[0].table


def test_scatter_two_points_distinct_colors():
    sketch = VisualTrace([
        point(x=4.0, y=10.0, color="red"),
        point(x=2.0, y=12.0, color="blue"),
    ])
    cands = learn_visual_programs(sketch)
    first = cands[0]
    assert first.program == Scatter(c_x="c1", c_y="c2", c_color="c3")
    assert first.n_layers == 1
    t = spec_table(first)
    assert t.columns == ("c1", "c2", "c3")
    assert set(t.rows) == {(4.0, 10.0, "red"), (2.0, 12.0, "blue")}
    # A faceted variant exists further down the list.
    assert any(isinstance(p, MultiPlot) for p in programs(cands))
    assert all(
        not isinstance(p, MultiPlot) or cands[i].size >= first.size
        for i, p in enumerate(programs(cands))
    )


def test_scatter_literal_before_column():
    sketch = VisualTrace([
        point(x=1.0, y=2.0, color="red"),
        point(x=3.0, y=4.0, color="red"),
    ])
    cands = learn_visual_programs(sketch)
    lit = next(
        i for i, p in enumerate(programs(cands))
        if isinstance(p, Scatter) and p.c_color == Const("red")
    )
    col = next(
        i for i, p in enumerate(programs(cands))
        if isinstance(p, Scatter) and isinstance(p.c_color, str)
    )
    assert lit < col


def test_scatter_partial_attr_gets_placeholder_cells():
    sketch = VisualTrace([point(x=1.0), point(x=2.0, color="a")])
    cands = learn_visual_programs(sketch)
    col = next(
        c for c in cands
        if isinstance(c.program, Scatter) and isinstance(c.program.c_color, str)
    )
    t = spec_table(col)
    cells = t.column_values("c2")
    assert any(isinstance(v, Placeholder) for v in cells)
    assert "a" in cells
    # The literal variant is offered too since every set color agrees.
    assert any(
        isinstance(c.program, Scatter) and c.program.c_color == Const("a")
        for c in cands
    )


def test_scatter_all_unset_channel_is_unbound():
    sketch = VisualTrace([point(x=1.0, y=2.0), point(x=3.0, y=1.0)])
    cands = learn_visual_programs(sketch)
    assert cands[0].program == Scatter(c_x="c1", c_y="c2")


def test_bar_baseline_and_span_variants():
    sketch = VisualTrace([
        barv(x="Q1", y1=0.0, y2=7.0),
        barv(x="Q2", y2=3.0),
    ])
    cands = learn_visual_programs(sketch)
    baseline = next(
        c for c in cands
        if isinstance(c.program, Bar) and c.program.c_y2 is None
    )
    assert baseline.program == Bar(c_x="c1", c_y="c2")
    t = spec_table(baseline)
    assert set(t.rows) == {("Q1", 7.0), ("Q2", 3.0)}
    span = next(
        c for c in cands
        if isinstance(c.program, Bar) and isinstance(c.program.c_y2, str)
    )
    tt = spec_table(span)
    assert tt.column_values(span.program.c_y2) in ((7.0, 3.0), (3.0, 7.0))
    assert baseline.size < span.size


def test_bar_negative_baseline_binds_low_end():
    sketch = VisualTrace([barv(x="a", y1=-5.0, y2=0.0)])
    cands = learn_visual_programs(sketch)
    match = [
        c for c in cands
        if isinstance(c.program, Bar) and c.program.c_y2 is None
        and -5.0 in spec_table(c).rows[0]
    ]
    assert match
    t = spec_table(match[0])
    out = render(match[0].program, Table(t.columns, t.rows))
    assert trace_contains(sketch, out)


def test_barh_baseline_uses_zero_literal():
    sketch = VisualTrace([barh(y="a", x1=0.0, x2=4.0)])
    cands = learn_visual_programs(sketch)
    baselines = [
        c for c in cands
        if isinstance(c.program, Bar) and c.program.c_x == Const(0.0)
    ]
    assert baselines
    baseline = baselines[0]
    assert isinstance(baseline.program.c_x2, str)
    t = spec_table(baseline)
    assert 4.0 in t.rows[0]
    out = render(baseline.program, Table(t.columns, t.rows))
    assert trace_contains(sketch, out)


def test_stacked_bar_candidate_and_roundtrip():
    sketch = VisualTrace([
        barv(x="Q1", y1=0.0, y2=7.0, color="A"),
        barv(x="Q1", y1=7.0, y2=10.0, color="B"),
    ])
    cands = learn_visual_programs(sketch)
    stacked = next(
        c for c in cands if isinstance(c.program, StackedBar)
    )
    assert stacked.program.orient == "v"
    conds = [c for c in stacked.spec.conditions if isinstance(c, StackedSum)]
    assert len(conds) == 1
    assert set(i[3] for i in conds[0].items) == {0.0, 7.0}
    t = Table(
        ("c1", "c2", "c3"),
        [("Q1", 7.0, "A"), ("Q1", 3.0, "B")],
    )
    assert eval_spec(stacked.spec, {"t0": t})
    out = render(stacked.program, t)
    assert trace_contains(sketch, out)


def test_stacked_bar_requires_some_color():
    sketch = VisualTrace([barv(x="Q1", y1=0.0, y2=7.0)])
    cands = learn_visual_programs(sketch)
    assert not any(isinstance(p, StackedBar) for p in programs(cands))


def test_stacked_bar_rejects_wrong_partial_sum():
    sketch = VisualTrace([
        barv(x="Q1", y1=0.0, y2=7.0, color="A"),
        barv(x="Q1", y1=6.0, y2=10.0, color="B"),
    ])
    cands = learn_visual_programs(sketch)
    stacked = next(c for c in cands if isinstance(c.program, StackedBar))
    t = Table(("c1", "c2", "c3"), [("Q1", 7.0, "A"), ("Q1", 4.0, "B")])
    assert not eval_spec(stacked.spec, {"t0": t})


def test_line_candidate_endpoint_tables_and_gap():
    sketch = VisualTrace([
        line(x1=1.0, y1=5.0, x2=2.0, y2=6.0),
        line(x1=2.0, y1=6.0, x2=3.0, y2=4.0),
    ])
    cands = learn_visual_programs(sketch)
    cand = next(c for c in cands if isinstance(c.program, Line))
    assert cand.program == Line(c_x="c1", c_y="c2")
    atoms = [a for a in cand.spec.atoms if a.var == "t0"]
    assert len(atoms) == 2
    rows = {frozenset(a.table.rows) for a in atoms}
    assert frozenset([(1.0, 5.0), (2.0, 6.0)]) in rows
    assert frozenset([(2.0, 6.0), (3.0, 4.0)]) in rows
    good = Table(("c1", "c2"), [(1.0, 5.0), (2.0, 6.0), (3.0, 4.0)])
    assert eval_spec(cand.spec, {"t0": good})
    assert trace_contains(sketch, render(cand.program, good))
    # A point strictly inside a sketched segment breaks adjacency.
    bad = Table(("c1", "c2"), good.rows + ((1.5, 9.0),))
    assert not eval_spec(cand.spec, {"t0": bad})


def test_line_skips_text_coordinates():
    sketch = VisualTrace([line(x1="a", y1=1.0, x2="b", y2=2.0)])
    cands = learn_visual_programs(sketch)
    assert not any(isinstance(p, Line) for p in programs(cands))


def test_line_color_groups_share_cells():
    sketch = VisualTrace([
        line(x1=1.0, y1=5.0, x2=2.0, y2=6.0, color="u"),
    ])
    cands = learn_visual_programs(sketch)
    col = next(
        c for c in cands
        if isinstance(c.program, Line) and isinstance(c.program.c_color, str)
    )
    for a in col.spec.atoms:
        assert "u" in a.table.rows[0]
    gap = next(c for c in col.spec.conditions if isinstance(c, LineGap))
    assert gap.c_color == col.program.c_color
    assert gap.items[0][1] == "u"


def test_area_ribbon_with_unequal_tops_has_no_rectangle():
    sketch = VisualTrace([
        area(x_tl=1.0, y_tl=5.0, x_bl=1.0, y_bl=0.0,
             x_tr=2.0, y_tr=7.0, x_br=2.0, y_br=0.0),
    ])
    cands = learn_visual_programs(sketch)
    ribbons = [
        c for c in cands
        if isinstance(c.program, Area) and c.program.c_x2 is None
    ]
    assert ribbons
    baseline = next(c for c in ribbons if c.program.c_y2 is None)
    good = Table(("c1", "c2"), [(1.0, 5.0), (2.0, 7.0)])
    assert eval_spec(baseline.spec, {"t0": good})
    assert trace_contains(sketch, render(baseline.program, good))
    rects = [
        c for c in cands
        if isinstance(c.program, Area) and c.program.c_x2 is not None
    ]
    assert not rects


def test_area_rectangle_for_coherent_corners():
    sketch = VisualTrace([
        area(x_tl=1.0, y_tl=5.0, x_bl=1.0, y_bl=2.0,
             x_tr=2.0, y_tr=5.0, x_br=2.0, y_br=2.0),
    ])
    cands = learn_visual_programs(sketch)
    rect = next(
        c for c in cands
        if isinstance(c.program, Area) and c.program.c_x2 is not None
    )
    t = spec_table(rect)
    row = dict(zip(t.columns, t.rows[0]))
    assert set(row.values()) == {1.0, 2.0, 5.0}
    out = render(rect.program, Table(t.columns, t.rows))
    assert trace_contains(sketch, out)


def test_area_conflicting_corners_rejected():
    sketch = VisualTrace([
        area(x_tl=1.0, x_bl=9.0, y_tl=5.0, x_tr=2.0, x_br=2.0),
    ])
    cands = learn_visual_programs(sketch)
    assert not any(isinstance(p, Area) for p in programs(cands))


def test_stacked_area_candidate_roundtrip():
    sketch = VisualTrace([
        area(x_tl=1.0, y_tl=3.0, x_bl=1.0, y_bl=0.0,
             x_tr=2.0, y_tr=4.0, x_br=2.0, y_br=0.0, color="A"),
        area(x_tl=1.0, y_tl=8.0, x_bl=1.0, y_bl=3.0,
             x_tr=2.0, y_tr=9.0, x_br=2.0, y_br=4.0, color="B"),
    ])
    cands = learn_visual_programs(sketch)
    stacked = next(c for c in cands if isinstance(c.program, StackedArea))
    t = Table(
        ("c1", "c2", "c3"),
        [(1.0, 3.0, "A"), (2.0, 4.0, "A"), (1.0, 5.0, "B"), (2.0, 5.0, "B")],
    )
    assert eval_spec(stacked.spec, {"t0": t})
    assert trace_contains(sketch, render(stacked.program, t))
    wrong = Table(
        ("c1", "c2", "c3"),
        [(1.0, 9.0, "A"), (2.0, 4.0, "A"), (1.0, 5.0, "B"), (2.0, 5.0, "B")],
    )
    assert not eval_spec(stacked.spec, {"t0": wrong})


def test_subplot_attr_forces_multiplot():
    sketch = VisualTrace([
        point(x=1.0, y=2.0, col="u1"),
        point(x=1.0, y=3.0, col="u2"),
    ])
    cands = learn_visual_programs(sketch)
    assert all(isinstance(p, MultiPlot) for p in programs(cands))
    target = MultiPlot(Scatter(c_x="c1", c_y="c2"), c_col="c3")
    cand = next(c for c in cands if c.program == target)
    rows = set()
    for a in cand.spec.atoms:
        assert a.table.columns == ("c1", "c2", "c3")
        rows.update(a.table.rows)
    assert rows == {(1.0, 2.0, "u1"), (1.0, 3.0, "u2")}
    good = Table(("c1", "c2", "c3"), [(1.0, 2.0, "u1"), (1.0, 3.0, "u2")])
    assert eval_spec(cand.spec, {"t0": good})
    assert trace_contains(sketch, render(cand.program, good))


def test_unset_subplot_block_gets_shared_placeholder():
    sketch = VisualTrace([point(x=1.0, y=2.0), point(x=2.0, y=3.0)])
    cands = learn_visual_programs(sketch)
    assert not isinstance(cands[0].program, MultiPlot)
    facet = next(
        c for c in cands
        if c.program == MultiPlot(Scatter(c_x="c1", c_y="c2"), c_col="c3")
    )
    assert facet.program.c_row is None
    sub = facet.program.c_col
    phs = set()
    for a in facet.spec.atoms:
        for r in a.table.rows:
            v = dict(zip(a.table.columns, r))[sub]
            assert isinstance(v, Placeholder)
            phs.add(v)
    assert len(phs) == 1
    good = Table(("c1", "c2", "c3"), [(1.0, 2.0, "g"), (2.0, 3.0, "g")])
    assert eval_spec(facet.spec, {"t0": good})
    assert trace_contains(sketch, render(facet.program, good))


def test_multiplot_mixed_row_channel():
    sketch = VisualTrace([
        point(x=1.0, y=2.0, row="r1"),
        point(x=4.0, y=3.0),
    ])
    cands = learn_visual_programs(sketch)
    assert all(isinstance(p, MultiPlot) for p in programs(cands))
    first = cands[0]
    assert first.program.c_col is None and first.program.c_row is not None
    vals = set()
    for a in first.spec.atoms:
        for r in a.table.rows:
            vals.add(r[-1])
    assert "r1" in vals
    assert any(isinstance(v, Placeholder) for v in vals)


def test_multilayer_for_mixed_kinds():
    sketch = VisualTrace([
        point(x=1.0, y=2.0),
        line(x1=1.0, y1=2.0, x2=3.0, y2=4.0),
    ])
    cands = learn_visual_programs(sketch)
    plain = next(
        c for c in cands
        if isinstance(c.program, MultiLayer)
        and isinstance(c.program.layers[0].c_x, str)
        and isinstance(c.program.layers[0].c_y, str)
    )
    assert isinstance(plain.program.layers[0], Scatter)
    assert isinstance(plain.program.layers[1], Line)
    assert plain.n_layers == 2
    vars_seen = {a.var for a in plain.spec.atoms}
    assert vars_seen == {"t0", "t1"}
    scatter_cols = plain.spec.columns_of("t0")
    line_cols = plain.spec.columns_of("t1")
    assert not (set(scatter_cols) & set(line_cols))
    t0 = Table(scatter_cols, [(1.0, 2.0)])
    t1 = Table(line_cols[:2], [(1.0, 2.0), (3.0, 4.0)])
    assert eval_spec(plain.spec, {"t0": t0, "t1": t1})
    assert trace_contains(sketch, render(plain.program, [t0, t1]))


def test_unification_drops_mismatched_literals():
    sketch = VisualTrace([
        point(x=1.0, y=2.0, color="red", col="a"),
        point(x=3.0, y=4.0, color="blue", col="b"),
    ])
    cands = learn_visual_programs(sketch)
    for c in cands:
        sub = c.program.sub
        assert sub.c_color != Const("red") and sub.c_color != Const("blue")
    assert any(isinstance(c.program.sub.c_color, str) for c in cands)


def test_avoid_prefix():
    sketch = VisualTrace([point(x=1.0, y=2.0)])
    cands = learn_visual_programs(sketch, avoid=frozenset({"c1", "b"}))
    assert any(c.program == Scatter(c_x="k1", c_y="k2") for c in cands)
    assert not any(
        "c1" in c.spec.columns_of("t0") for c in cands
    )


def test_empty_sketch_no_candidates():
    assert learn_visual_programs(VisualTrace([])) == []


def test_candidates_sorted_by_size():
    sketch = VisualTrace([
        point(x=1.0, y=2.0, color="red"),
        point(x=3.0, y=4.0, color="red"),
    ])
    cands = learn_visual_programs(sketch)
    sizes = [c.size for c in cands]
    assert sizes == sorted(sizes)


def test_random_scatter_candidates_are_sound():
    rng = random.Random(7)
    for _ in range(25):
        n = rng.randint(1, 4)
        elems = []
        for _i in range(n):
            kw = {}
            if rng.random() < 0.9:
                kw["x"] = float(rng.randint(0, 5))
            if rng.random() < 0.9:
                kw["y"] = float(rng.randint(0, 5))
            if rng.random() < 0.5:
                kw["color"] = rng.choice(["a", "b"])
            if rng.random() < 0.3:
                kw["size"] = float(rng.randint(1, 3))
            elems.append(point(**kw))
        sketch = VisualTrace(elems)
        for cand in learn_visual_programs(sketch)[:6]:
            if isinstance(cand.program, MultiPlot):
                continue
            t = spec_table(cand)
            rows = [
                tuple(
                    v if not isinstance(v, Placeholder) else 1.5 + i
                    for v in row
                )
                for i, row in enumerate(t.rows)
            ]
            concrete = Table(t.columns, rows)
            assert eval_spec(cand.spec, {"t0": concrete})
            out = render(cand.program, concrete)
            assert trace_contains(sketch, out), (cand.program, concrete)
