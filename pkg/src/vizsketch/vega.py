"""Export solutions as Vega-Lite v5 specifications with inline data."""

from .table import Const
from .vizdsl import (
    Area, Bar, Line, MultiPlot, Scatter, StackedArea, StackedBar,
    program_layers,
)

VEGA_SCHEMA = "https://vega-lite.github.io/schema/vega-lite/v5.json"

_SCATTER_MARKS = {"point": "point", "text": "text"}


def _plain(v):
    """JSON-friendly cell: integral floats print as ints."""
    if isinstance(v, float) and v.is_integer() and abs(v) < 2**53:
        return int(v)
    return v


def _field_type(name, table, *, band=False):
    values = [v for v in table.column_values(name) if v is not None]
    if values and all(isinstance(v, (int, float)) for v in values):
        return "ordinal" if band else "quantitative"
    return "nominal"


def _channel(value, table, *, band=False, quantitative=False):
    """Encoding entry for one channel: a field reference or a datum literal."""
    if isinstance(value, Const):
        return {"datum": _plain(value.value)}
    if quantitative:
        return {"field": value, "type": "quantitative"}
    return {"field": value, "type": _field_type(value, table, band=band)}


def _encode(pairs, table):
    encoding = {}
    for channel, value, opts in pairs:
        if value is None:
            continue
        encoding[channel] = _channel(value, table, **opts)
    return encoding


def _layer_mark_encoding(layer, table):
    plain, band, quant = {}, {"band": True}, {"quantitative": True}
    if isinstance(layer, Scatter):
        mark = _SCATTER_MARKS[layer.mark]
        pairs = [
            ("x", layer.c_x, plain),
            ("y", layer.c_y, plain),
            ("shape", layer.c_shape, plain),
            ("color", layer.c_color, plain),
            ("size", layer.c_size, quant),
        ]
        if mark == "text":
            pairs.append(("text", layer.c_x, plain))
    elif isinstance(layer, Line):
        mark = {"type": "line", "point": True}
        pairs = [
            ("x", layer.c_x, plain),
            ("y", layer.c_y, plain),
            ("order", layer.c_order, plain),
            ("color", layer.c_color, plain),
            ("strokeWidth", layer.c_width, quant),
        ]
    elif isinstance(layer, Bar):
        mark = "bar"
        pairs = [
            ("x", layer.c_x, band if layer.c_y2 is not None else quant),
            ("x2", layer.c_x2, quant),
            ("y", layer.c_y, band if layer.c_x2 is not None else quant),
            ("y2", layer.c_y2, quant),
            ("color", layer.c_color, plain),
            ("size", layer.c_width, quant),
        ]
    elif isinstance(layer, StackedBar):
        mark = "bar"
        x, h = ("x", "y") if layer.orient == "v" else ("y", "x")
        pairs = [
            (x, layer.c_x, band),
            (h, layer.c_h, quant),
            ("color", layer.c_color, plain),
            ("size", layer.c_width, quant),
        ]
    elif isinstance(layer, Area):
        mark = "area"
        pairs = [
            ("x", layer.c_x, plain),
            ("x2", layer.c_x2, quant),
            ("y", layer.c_y, quant),
            ("y2", layer.c_y2, quant),
            ("color", layer.c_color, plain),
        ]
    elif isinstance(layer, StackedArea):
        mark = "area"
        x, h = ("x", "y") if layer.orient == "v" else ("y", "x")
        pairs = [
            (x, layer.c_x, plain),
            (h, layer.c_h, quant),
            ("color", layer.c_color, plain),
        ]
    else:
        raise TypeError(f"not a layer: {layer!r}")
    return mark, _encode(pairs, table)


def _records(table, extra=None):
    rows = []
    for row in table.rows:
        rec = {c: _plain(v) for c, v in zip(table.columns, row)}
        if extra:
            rec.update(extra)
        rows.append(rec)
    return rows


def _facet_fields(solution):
    """(display name, per-layer output column) for col and row subplot axes."""
    viz = solution.viz
    abstract = solution.abstract_viz
    out = {}
    for axis in ("c_col", "c_row"):
        display = getattr(viz, axis)
        if display is None:
            continue
        per_layer = []
        for sigma in solution.sigmas:
            per_layer.append(dict(sigma).get(getattr(abstract, axis), display))
        out[axis] = (display, per_layer)
    return out


def to_vega(solution) -> dict:
    """A self-contained Vega-Lite v5 spec for one solution."""
    viz = solution.viz
    layers = program_layers(viz)
    outputs = solution.outputs
    facet = isinstance(viz, MultiPlot)
    head = {"$schema": VEGA_SCHEMA, "description": viz.pretty()}

    if len(layers) == 1:
        mark, encoding = _layer_mark_encoding(layers[0], outputs[0])
        if facet:
            for axis, key in (("c_col", "column"), ("c_row", "row")):
                name = getattr(viz, axis)
                if name is not None:
                    encoding[key] = _channel(name, outputs[0], band=True)
        return {
            **head,
            "data": {"values": _records(outputs[0])},
            "mark": mark,
            "encoding": encoding,
        }

    if not facet:
        entries = []
        for layer, out in zip(layers, outputs):
            mark, encoding = _layer_mark_encoding(layer, out)
            entries.append(
                {"data": {"values": _records(out)}, "mark": mark,
                 "encoding": encoding}
            )
        return {**head, "layer": entries}

    # Faceting a multi-layer chart takes one shared dataset, so the layer
    # tables are pooled with a discriminator and each layer filters its rows
    # back out. The subplot fields keep their displayed name in every record.
    fields = _facet_fields(solution)
    entries = []
    values = []
    for i, (layer, out) in enumerate(zip(layers, outputs)):
        renames = {
            per_layer[i]: display
            for display, per_layer in fields.values()
            if per_layer[i] != display
        }
        for rec in _records(out, {"__layer": i}):
            for src, dst in renames.items():
                rec[dst] = rec.pop(src)
            values.append(rec)
        mark, encoding = _layer_mark_encoding(layer, out)
        for name, value in list(encoding.items()):
            if value.get("field") in renames:
                encoding[name] = {**value, "field": renames[value["field"]]}
        entries.append(
            {"transform": [{"filter": f"datum.__layer === {i}"}],
             "mark": mark, "encoding": encoding}
        )

    facet_map = {}
    for axis, key in (("c_col", "column"), ("c_row", "row")):
        if axis in fields:
            display, per_layer = fields[axis]
            table = outputs[0]
            facet_map[key] = {
                "field": display,
                "type": _field_type(per_layer[0], table, band=True),
            }
    return {
        **head,
        "data": {"values": values},
        "facet": facet_map,
        "spec": {"layer": entries},
    }
