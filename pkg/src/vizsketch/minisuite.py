"""Bundled twelve-case benchmark suite.

Each case pairs input tables with a reference script (table program per
layer plus a visual program over real column names).  The full rendering
of the reference script is the ground-truth target trace; the stored
sketch is a deterministic sample of that target.  ``write_dir`` emits the
cases as task files that ``synth`` and ``bench`` consume directly.

The reference scripts stay within each case's search limits, so every
target is reachable by the engine.  ``validate_case`` checks that once,
when the suite is built, and the test suite re-checks the bundled files
against this module.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .synthesis import sample_sketch
from .table import Const, Table
from .tabledsl import (
    Cmp,
    Cumsum,
    Filter,
    Gather,
    Join,
    Mutate,
    Spread,
    Summarize,
    TableProgram,
)
from .trace import VisualTrace, parse_trace, serialize_trace
from .vizdsl import (
    Area,
    Bar,
    Line,
    MultiLayer,
    MultiPlot,
    Scatter,
    StackedBar,
    program_layers,
    render,
)

SKETCH_N = 4
SKETCH_SEED = 0


@dataclass(frozen=True)
class BenchCase:
    """One benchmark case: inputs, reference script, and search options."""

    name: str
    tables: dict
    programs: tuple
    visual: object
    options: dict

    def target(self) -> VisualTrace:
        """Full rendering of the reference script (the ground truth)."""
        outputs = [program.run(self.tables) for program in self.programs]
        return render(self.visual, outputs)

    def sketch(self, n: int = SKETCH_N, seed: int = SKETCH_SEED) -> VisualTrace:
        return sample_sketch(self.target(), n, seed=seed)


def _identity(tables: dict, source: str = None) -> TableProgram:
    names = tuple(tables)
    return TableProgram((source or names[0],), ())


def _case_scatter_identity() -> BenchCase:
    t = Table(
        ("hours", "score"),
        [(1.0, 12.0), (2.0, 20.0), (3.0, 33.0), (4.0, 38.0), (5.0, 52.0), (6.0, 61.0)],
    )
    tables = {"study": t}
    return BenchCase(
        name="scatter_identity",
        tables=tables,
        programs=(_identity(tables),),
        visual=Scatter(c_x="hours", c_y="score"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 1, "seed": 0},
    )


def _case_mutate_total() -> BenchCase:
    t = Table(
        ("ID", "Cond", "A", "Aneg"),
        [
            (304.0, 2.0, 33.0, 38.0),
            (317.0, 1.0, 40.0, 52.0),
            (318.0, 2.0, 48.0, 22.0),
            (319.0, 1.0, 36.0, 30.0),
        ],
    )
    tables = {"scores": t}
    program = TableProgram(("scores",), (Mutate("scores", "v1", "+", "A", "Aneg"),))
    return BenchCase(
        name="mutate_total",
        tables=tables,
        programs=(program,),
        visual=Scatter(c_x="Cond", c_y="v1"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_join_cohort() -> BenchCase:
    scores = Table(
        ("ID", "Cond", "A", "Aneg"),
        [
            (304.0, 2.0, 33.0, 38.0),
            (317.0, 1.0, 40.0, 52.0),
            (318.0, 2.0, 48.0, 22.0),
            (319.0, 1.0, 36.0, 30.0),
        ],
    )
    people = Table(
        ("ID", "Gender"),
        [(304.0, "F"), (317.0, "M"), (318.0, "F"), (319.0, "M")],
    )
    tables = {"scores": scores, "people": people}
    program = TableProgram(
        ("scores", "people"),
        (
            Mutate("scores", "v1", "+", "A", "Aneg"),
            Join("t1", "people", Cmp("ID.1", "==", "ID.2")),
        ),
    )
    return BenchCase(
        name="join_cohort",
        tables=tables,
        programs=(program,),
        visual=Scatter(c_x="Cond", c_y="v1", c_color="Gender"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_filter_trend() -> BenchCase:
    t = Table(
        ("day", "temp", "station"),
        [
            (1.0, 14.0, "north"),
            (1.0, 21.0, "south"),
            (2.0, 15.0, "north"),
            (2.0, 22.0, "south"),
            (3.0, 13.0, "north"),
            (3.0, 24.0, "south"),
            (4.0, 16.0, "north"),
            (4.0, 23.0, "south"),
        ],
    )
    tables = {"weather": t}
    program = TableProgram(
        ("weather",), (Filter("weather", Cmp("station", "==", Const("north"))),)
    )
    return BenchCase(
        name="filter_trend",
        tables=tables,
        programs=(program,),
        visual=Line(c_x="day", c_y="temp"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_gather_melt() -> BenchCase:
    t = Table(
        ("name", "q1", "q2"),
        [
            ("ada", 10.0, 14.0),
            ("bob", 8.0, 11.0),
            ("cyd", 12.0, 9.0),
            ("dee", 7.0, 13.0),
        ],
    )
    tables = {"sales": t}
    program = TableProgram(("sales",), (Gather("sales", ("q1", "q2")),))
    return BenchCase(
        name="gather_melt",
        tables=tables,
        programs=(program,),
        visual=Scatter(c_x="key", c_y="value", c_color="name"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_summarize_totals() -> BenchCase:
    t = Table(
        ("crew", "haul"),
        [
            ("red", 4.0),
            ("red", 6.0),
            ("red", 5.0),
            ("blue", 9.0),
            ("blue", 3.0),
            ("blue", 7.0),
            ("green", 2.0),
            ("green", 8.0),
            ("green", 6.0),
        ],
    )
    tables = {"hauls": t}
    program = TableProgram(
        ("hauls",), (Summarize("hauls", "v1", ("crew",), "sum", "haul"),)
    )
    return BenchCase(
        name="summarize_totals",
        tables=tables,
        programs=(program,),
        visual=StackedBar(orient="v", c_x="crew", c_h="v1"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_cumsum_growth() -> BenchCase:
    t = Table(
        ("month", "signups"),
        [(1.0, 5.0), (2.0, 8.0), (3.0, 6.0), (4.0, 11.0), (5.0, 9.0), (6.0, 14.0)],
    )
    tables = {"signups": t}
    program = TableProgram(("signups",), (Cumsum("signups", "v1", "signups", ()),))
    return BenchCase(
        name="cumsum_growth",
        tables=tables,
        programs=(program,),
        visual=Area(c_x="month", c_y="v1"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_stacked_quarters() -> BenchCase:
    t = Table(
        ("quarter", "product", "sales"),
        [
            ("Q1", "gadget", 12.0),
            ("Q1", "widget", 7.0),
            ("Q2", "gadget", 15.0),
            ("Q2", "widget", 9.0),
            ("Q3", "gadget", 11.0),
            ("Q3", "widget", 13.0),
        ],
    )
    tables = {"revenue": t}
    return BenchCase(
        name="stacked_quarters",
        tables=tables,
        programs=(_identity(tables),),
        visual=StackedBar(orient="v", c_x="quarter", c_h="sales", c_color="product"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 1, "seed": 0},
    )


def _case_facet_groups() -> BenchCase:
    t = Table(
        ("dose", "effect", "trial"),
        [
            (1.0, 3.0, "alpha"),
            (2.0, 5.0, "alpha"),
            (3.0, 8.0, "alpha"),
            (4.0, 9.0, "alpha"),
            (1.0, 2.0, "beta"),
            (2.0, 3.0, "beta"),
            (3.0, 5.0, "beta"),
            (4.0, 6.0, "beta"),
        ],
    )
    tables = {"doses": t}
    return BenchCase(
        name="facet_groups",
        tables=tables,
        programs=(_identity(tables),),
        visual=MultiPlot(Scatter(c_x="dose", c_y="effect"), c_col="trial"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 1, "seed": 0},
    )


def _case_layered_overlay() -> BenchCase:
    t = Table(
        ("week", "price"),
        [(1.0, 10.0), (2.0, 12.0), (3.0, 9.0), (4.0, 15.0), (5.0, 13.0)],
    )
    tables = {"prices": t}
    identity = _identity(tables)
    return BenchCase(
        name="layered_overlay",
        tables=tables,
        programs=(identity, identity),
        visual=MultiLayer(
            (Scatter(c_x="week", c_y="price"), Line(c_x="week", c_y="price"))
        ),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 1, "seed": 0},
    )


def _case_spread_pivot() -> BenchCase:
    t = Table(
        ("city", "measure", "reading"),
        [
            ("oslo", "lo", 2.0),
            ("oslo", "hi", 9.0),
            ("bern", "lo", 4.0),
            ("bern", "hi", 12.0),
            ("lima", "lo", 11.0),
            ("lima", "hi", 20.0),
            ("kiev", "lo", 1.0),
            ("kiev", "hi", 8.0),
        ],
    )
    tables = {"readings": t}
    program = TableProgram(("readings",), (Spread("readings", "measure", "reading"),))
    return BenchCase(
        name="spread_pivot",
        tables=tables,
        programs=(program,),
        visual=Scatter(c_x="lo", c_y="hi", c_color="city"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
    )


def _case_span_schedule() -> BenchCase:
    t = Table(
        ("task", "start", "finish"),
        [("design", 1.0, 3.0), ("build", 2.0, 6.0), ("test", 5.0, 8.0), ("ship", 7.0, 9.0)],
    )
    tables = {"plan": t}
    return BenchCase(
        name="span_schedule",
        tables=tables,
        programs=(_identity(tables),),
        visual=Bar(c_x="start", c_x2="finish", c_y="task"),
        options={"budget": 30.0, "top_k": 10, "max_stmts": 1, "seed": 0},
    )


CASES = (
    _case_scatter_identity(),
    _case_mutate_total(),
    _case_join_cohort(),
    _case_filter_trend(),
    _case_gather_melt(),
    _case_summarize_totals(),
    _case_cumsum_growth(),
    _case_stacked_quarters(),
    _case_facet_groups(),
    _case_layered_overlay(),
    _case_spread_pivot(),
    _case_span_schedule(),
)


def validate_case(case: BenchCase) -> None:
    """Check the suite invariants for one case.

    The reference script must stay within the case's search limits, its
    rendering must be non-empty, and layer counts must line up.
    """
    layers = program_layers(case.visual)
    if len(case.programs) != len(layers):
        raise ValueError(f"{case.name}: {len(case.programs)} programs for {len(layers)} layers")
    for program in case.programs:
        if len(program.statements) > case.options["max_stmts"]:
            raise ValueError(f"{case.name}: reference script exceeds max_stmts")
    target = case.target()
    if not target.elements:
        raise ValueError(f"{case.name}: reference script renders nothing")


def case_to_task_json(case: BenchCase) -> dict:
    """Task-file form of a case: tables, sampled sketch, options, target."""
    target = case.target()
    return {
        "name": case.name,
        "tables": {name: table.to_json_obj() for name, table in case.tables.items()},
        "sketch": json.loads(serialize_trace(case.sketch())),
        "options": dict(case.options),
        "target": json.loads(serialize_trace(target)),
    }


def write_dir(path: str) -> list:
    """Write every case as ``<name>.json`` under ``path``; return the paths."""
    os.makedirs(path, exist_ok=True)
    written = []
    for case in CASES:
        validate_case(case)
        doc = case_to_task_json(case)
        file_path = os.path.join(path, f"{case.name}.json")
        with open(file_path, "w", encoding="utf-8") as handle:
            json.dump(doc, handle, indent=2, sort_keys=True, ensure_ascii=False)
            handle.write("\n")
        written.append(file_path)
    return written


def load_target(doc: dict) -> VisualTrace:
    """Parse the ground-truth trace out of a task-file document."""
    return parse_trace(doc["target"])
