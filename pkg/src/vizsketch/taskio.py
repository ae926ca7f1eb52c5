"""Task files and result documents: the JSON surface of the engine.

A task bundles named input tables, a sketch, and search options. Tables may
be inline objects or, when path loading is enabled, references to CSV or
JSON files next to the task file. Results embed the engine version and the
fully resolved options so a result file stands on its own.
"""

from dataclasses import dataclass
import json
import os
import re

from . import __version__
from .errors import ParseError
from .synthesis import DEFAULT_BUDGET, DEFAULT_MAX_STMTS, DEFAULT_TOP_K
from .table import Table
from .trace import VisualTrace, parse_trace, serialize_trace
from .vega import to_vega

DEFAULT_SEED = 0

_TASK_KEYS = {"name", "tables", "sketch", "options", "target"}
_OPTION_KEYS = {"budget", "top_k", "max_stmts", "seed"}
_RESERVED_NAME = re.compile(r"t\d+$")


@dataclass(frozen=True)
class Task:
    name: str
    tables: dict
    sketch: VisualTrace
    options: dict
    target: VisualTrace | None = None


def resolve_options(options: dict | None) -> dict:
    """Options with defaults filled in and values checked."""
    options = dict(options or {})
    unknown = set(options) - _OPTION_KEYS
    if unknown:
        raise ParseError(f"unknown options: {sorted(unknown)}")
    out = {
        "budget": options.get("budget", DEFAULT_BUDGET),
        "top_k": options.get("top_k", DEFAULT_TOP_K),
        "max_stmts": options.get("max_stmts", DEFAULT_MAX_STMTS),
        "seed": options.get("seed", DEFAULT_SEED),
    }
    if not isinstance(out["budget"], (int, float)) or isinstance(
        out["budget"], bool
    ) or out["budget"] < 0:
        raise ParseError("budget must be a number of seconds, at least 0")
    out["budget"] = float(out["budget"])
    for key in ("top_k", "max_stmts", "seed"):
        v = out[key]
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParseError(f"{key} must be an integer")
    if out["top_k"] < 1:
        raise ParseError("top_k must be at least 1")
    if out["max_stmts"] < 0:
        raise ParseError("max_stmts must be at least 0")
    return out


def _load_table_value(name, value, base_dir):
    if isinstance(value, dict) and "path" in value:
        value = value["path"]
    if isinstance(value, str):
        if base_dir is None:
            raise ParseError(f"table {name!r}: file references are not allowed here")
        path = os.path.join(base_dir, value)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ParseError(f"table {name!r}: cannot read {value!r}: {e}") from None
        if value.lower().endswith(".csv"):
            return Table.from_csv_text(text)
        if value.lower().endswith(".json"):
            return Table.from_json_text(text)
        raise ParseError(f"table {name!r}: {value!r} is neither .csv nor .json")
    if isinstance(value, dict):
        return Table.from_json_obj(value)
    raise ParseError(f"table {name!r}: expected an object or a file path")


def task_from_json(obj, *, base_dir=None, name="task") -> Task:
    """Build a task from its JSON object form.

    base_dir enables {"path": ...} table references, resolved against it;
    leaving it unset rejects them, which is what a network service wants.
    """
    if not isinstance(obj, dict):
        raise ParseError("a task is a JSON object")
    unknown = set(obj) - _TASK_KEYS
    if unknown:
        raise ParseError(f"unknown task keys: {sorted(unknown)}")
    if "tables" not in obj or "sketch" not in obj:
        raise ParseError('a task needs "tables" and "sketch"')
    raw_tables = obj["tables"]
    if not isinstance(raw_tables, dict) or not raw_tables:
        raise ParseError('"tables" must be a non-empty object of named tables')
    tables = {}
    for tname, value in raw_tables.items():
        if not isinstance(tname, str) or not tname:
            raise ParseError("table names must be non-empty strings")
        if _RESERVED_NAME.match(tname):
            raise ParseError(f"table name {tname!r} is reserved for statements")
        tables[tname] = _load_table_value(tname, value, base_dir)
    sketch = parse_trace(obj["sketch"])
    if len(sketch) == 0:
        raise ParseError("the sketch must contain at least one element")
    target = None
    if obj.get("target") is not None:
        target = parse_trace(obj["target"])
    options = resolve_options(obj.get("options"))
    return Task(
        name=str(obj.get("name", name)),
        tables=tables,
        sketch=sketch,
        options=options,
        target=target,
    )


def load_task(path: str) -> Task:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read task file: {e}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"task file is not valid JSON: {e}") from None
    name = os.path.splitext(os.path.basename(path))[0]
    return task_from_json(obj, base_dir=os.path.dirname(path) or ".", name=name)


def solution_to_json(solution, rank: int) -> dict:
    return {
        "rank": rank,
        "size": solution.size,
        "layers": solution.n_layers,
        "table_programs": [
            p.pretty().split("\n") for p in solution.table_programs
        ],
        "visual": solution.viz.pretty(),
        "vega": to_vega(solution),
        "trace": json.loads(serialize_trace(solution.trace)),
    }


def result_to_json(options: dict, solutions) -> dict:
    return {
        "engine": {"name": "vizsketch", "version": __version__},
        "options": dict(options),
        "n_solutions": len(solutions),
        "solutions": [
            solution_to_json(sol, rank)
            for rank, sol in enumerate(solutions, start=1)
        ],
    }


def dump_result(result: dict) -> str:
    return json.dumps(result, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
