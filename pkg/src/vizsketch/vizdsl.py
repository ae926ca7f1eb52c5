"""Visual programs: layer grammar, rendering to traces, sizes, printing.

A channel is a column name (str), a literal (Const), or None for unbound.
Rendering is insensitive to input row order: every construct that pairs or
stacks rows sorts them first.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import RenderError, UsageError
from .table import (
    Const,
    KIND_NUMBER,
    Table,
    canonical_value,
    format_value,
    sort_key,
    value_kind,
)
from .trace import VisualElement, VisualTrace

ORIENTS = ("v", "h")
MARKS = ("point", "text")


def _check_channel(name, value):
    if value is None or isinstance(value, (str, Const)):
        return
    raise UsageError(f"channel {name} must be a column, literal, or None")


class _Layer:
    """Common behavior for single-layer nodes."""

    def channels(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name.startswith("c_")}

    def __post_init__(self):
        for name, value in self.channels().items():
            _check_channel(name, value)

    @property
    def size(self) -> int:
        return 1 + sum(1 for v in self.channels().values() if v is not None)

    def pretty(self) -> str:
        parts = []
        for name, value in self.channels().items():
            if value is None:
                continue
            if isinstance(value, Const):
                v = value.value
                shown = repr(v) if isinstance(v, str) else format_value(v)
            else:
                shown = value
            parts.append(f"{name[2:]}={shown}")
        head = type(self).__name__
        extra = getattr(self, "orient", None)
        if extra is not None:
            parts.insert(0, f"orient={extra}")
        mark = getattr(self, "mark", None)
        if mark is not None and mark != "point":
            parts.insert(0, f"mark={mark}")
        return f"{head}({', '.join(parts)})"


@dataclass(frozen=True)
class Scatter(_Layer):
    c_x: object = None
    c_y: object = None
    c_shape: object = None
    c_color: object = None
    c_size: object = None
    mark: str = "point"

    def __post_init__(self):
        super().__post_init__()
        if self.mark not in MARKS:
            raise UsageError(f"unknown mark {self.mark!r}")


@dataclass(frozen=True)
class Line(_Layer):
    c_x: object = None
    c_y: object = None
    c_width: object = None
    c_order: object = None
    c_color: object = None


@dataclass(frozen=True)
class Bar(_Layer):
    c_x: object = None
    c_x2: object = None
    c_y: object = None
    c_y2: object = None
    c_color: object = None
    c_width: object = None

    def __post_init__(self):
        super().__post_init__()
        if self.c_x2 is not None and self.c_y2 is not None:
            raise UsageError("a bar spans along one axis only")


@dataclass(frozen=True)
class StackedBar(_Layer):
    orient: str = "v"
    c_x: object = None
    c_h: object = None
    c_color: object = None
    c_width: object = None

    def __post_init__(self):
        super().__post_init__()
        if self.orient not in ORIENTS:
            raise UsageError(f"unknown orient {self.orient!r}")


@dataclass(frozen=True)
class Area(_Layer):
    c_x: object = None
    c_x2: object = None
    c_y: object = None
    c_y2: object = None
    c_color: object = None


@dataclass(frozen=True)
class StackedArea(_Layer):
    orient: str = "v"
    c_x: object = None
    c_h: object = None
    c_color: object = None

    def __post_init__(self):
        super().__post_init__()
        if self.orient not in ORIENTS:
            raise UsageError(f"unknown orient {self.orient!r}")


LAYER_KINDS = (Scatter, Line, Bar, StackedBar, Area, StackedArea)

# Element kind each layer type produces, for partition-by-type dispatch.
def layer_element_kind(layer) -> str:
    if isinstance(layer, Scatter):
        return "point"
    if isinstance(layer, Line):
        return "line"
    if isinstance(layer, Bar):
        return "barH" if layer.c_x2 is not None else "barV"
    if isinstance(layer, StackedBar):
        return "barV" if layer.orient == "v" else "barH"
    return "area"


@dataclass(frozen=True)
class MultiLayer:
    layers: tuple

    def __post_init__(self):
        if len(self.layers) < 2:
            raise UsageError("MultiLayer needs at least two layers")
        for l in self.layers:
            if not isinstance(l, LAYER_KINDS):
                raise UsageError(f"not a layer: {l!r}")

    @property
    def size(self) -> int:
        return 1 + sum(1 + l.size for l in self.layers)

    def pretty(self) -> str:
        return "MultiLayer(" + ", ".join(l.pretty() for l in self.layers) + ")"


@dataclass(frozen=True)
class MultiPlot:
    sub: object
    c_col: object = None
    c_row: object = None

    def __post_init__(self):
        if not isinstance(self.sub, (MultiLayer,) + LAYER_KINDS):
            raise UsageError(f"not a subplot body: {self.sub!r}")
        for name in ("c_col", "c_row"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, str):
                raise UsageError(f"{name} must be a column name or None")
        if self.c_col is None and self.c_row is None:
            raise UsageError("MultiPlot needs a subplot channel")

    @property
    def size(self) -> int:
        n = 1 + self.sub.size
        n += sum(1 for v in (self.c_col, self.c_row) if v is not None)
        return n

    def pretty(self) -> str:
        parts = [self.sub.pretty()]
        if self.c_col is not None:
            parts.append(f"col={self.c_col}")
        if self.c_row is not None:
            parts.append(f"row={self.c_row}")
        return "MultiPlot(" + ", ".join(parts) + ")"


def program_layers(viz) -> tuple:
    """The layer nodes of a visual program, in order."""
    body = viz.sub if isinstance(viz, MultiPlot) else viz
    if isinstance(body, MultiLayer):
        return body.layers
    return (body,)


def program_size(viz) -> int:
    return viz.size


# ---------------------------------------------------------------------------
# Rendering


def _cell(channel, row, t: Table):
    if channel is None:
        return None
    if isinstance(channel, Const):
        return canonical_value(channel.value)
    return row[t.column_index(channel)]


def _require_number(v, what: str) -> float:
    if v is None or value_kind(v) != KIND_NUMBER:
        raise RenderError(f"{what} must be a number, got {v!r}")
    return v


def _render_scatter(layer: Scatter, t: Table) -> list:
    out = []
    for row in t.rows:
        out.append(
            VisualElement(
                "point",
                {
                    "x": _cell(layer.c_x, row, t),
                    "y": _cell(layer.c_y, row, t),
                    "shape": _cell(layer.c_shape, row, t),
                    "color": _cell(layer.c_color, row, t),
                    "size": _cell(layer.c_size, row, t),
                },
            )
        )
    return out


def _render_line(layer: Line, t: Table) -> list:
    groups: dict = {}
    for row in t.rows:
        c = _cell(layer.c_color, row, t)
        groups.setdefault((value_kind(c), c) if c is not None else None, []).append(row)
    out = []
    order_chan = layer.c_order if layer.c_order is not None else layer.c_x
    for key in sorted(groups, key=lambda k: sort_key(None if k is None else k[1])):
        rows = groups[key]
        # Ties break on the plotted values alone so the polyline is the
        # same whether rendered from the full table or its projection.
        rows.sort(key=lambda r: (
            sort_key(_cell(order_chan, r, t)),
            sort_key(_cell(layer.c_x, r, t)),
            sort_key(_cell(layer.c_y, r, t)),
        ))
        color = None if key is None else key[1]
        for a, b in zip(rows, rows[1:]):
            x1 = _require_number(_cell(layer.c_x, a, t), "line x")
            y1 = _require_number(_cell(layer.c_y, a, t), "line y")
            x2 = _require_number(_cell(layer.c_x, b, t), "line x")
            y2 = _require_number(_cell(layer.c_y, b, t), "line y")
            if x1 == x2 and y1 == y2:
                continue
            out.append(
                VisualElement(
                    "line",
                    {
                        "x1": x1, "y1": y1, "x2": x2, "y2": y2,
                        "width": _cell(layer.c_width, a, t),
                        "color": color,
                    },
                )
            )
    return out


def _render_bar(layer: Bar, t: Table) -> list:
    out = []
    horizontal = layer.c_x2 is not None
    for row in t.rows:
        attrs = {
            "color": _cell(layer.c_color, row, t),
            "width": _cell(layer.c_width, row, t),
        }
        if horizontal:
            attrs["y"] = _cell(layer.c_y, row, t)
            attrs["x1"] = _cell(layer.c_x, row, t)
            attrs["x2"] = _cell(layer.c_x2, row, t)
            kind = "barH"
        else:
            attrs["x"] = _cell(layer.c_x, row, t)
            if layer.c_y2 is not None:
                attrs["y1"] = _cell(layer.c_y, row, t)
                attrs["y2"] = _cell(layer.c_y2, row, t)
            elif layer.c_y is not None:
                # Bars with one bound y channel grow from the zero baseline.
                attrs["y1"] = 0.0
                attrs["y2"] = _cell(layer.c_y, row, t)
            kind = "barV"
        out.append(VisualElement(kind, attrs))
    return out


def _stack_groups(t: Table, c_x, c_h, c_color):
    """Group rows by the x value; order colors ascending; reject duplicates."""
    groups: dict = {}
    for row in t.rows:
        x = _cell(c_x, row, t)
        groups.setdefault((value_kind(x), x) if x is not None else None, []).append(row)
    prepared = []
    for key in sorted(groups, key=lambda k: sort_key(None if k is None else k[1])):
        rows = groups[key]
        rows.sort(key=lambda r: sort_key(_cell(c_color, r, t)))
        colors = [_cell(c_color, r, t) for r in rows]
        if len({(value_kind(c), c) if c is not None else None for c in colors}) != len(colors):
            raise RenderError("duplicate stacking color within one position")
        heights = [_require_number(_cell(c_h, r, t), "stacked height") for r in rows]
        if any(h < 0 for h in heights):
            raise RenderError("stacked heights must be non-negative")
        x = None if key is None else key[1]
        prepared.append((x, rows, colors, heights))
    return prepared


def _render_stacked_bar(layer: StackedBar, t: Table) -> list:
    out = []
    for x, rows, colors, heights in _stack_groups(t, layer.c_x, layer.c_h, layer.c_color):
        acc = 0.0
        for row, color, h in zip(rows, colors, heights):
            lo, hi = acc, acc + h
            acc = hi
            attrs = {"color": color, "width": _cell(layer.c_width, row, t)}
            if layer.orient == "v":
                attrs.update(x=x, y1=lo, y2=hi)
                kind = "barV"
            else:
                attrs.update(y=x, x1=lo, x2=hi)
                kind = "barH"
            out.append(VisualElement(kind, attrs))
    return out


def _render_area(layer: Area, t: Table) -> list:
    out = []
    if layer.c_x2 is not None:
        for row in t.rows:
            x1 = _require_number(_cell(layer.c_x, row, t), "area x")
            x2 = _require_number(_cell(layer.c_x2, row, t), "area x2")
            top = _require_number(_cell(layer.c_y, row, t), "area y")
            b = _cell(layer.c_y2, row, t)
            bot = 0.0 if b is None else _require_number(b, "area y2")
            out.append(
                VisualElement(
                    "area",
                    {
                        "x_tl": x1, "y_tl": top, "x_bl": x1, "y_bl": bot,
                        "x_tr": x2, "y_tr": top, "x_br": x2, "y_br": bot,
                        "color": _cell(layer.c_color, row, t),
                    },
                )
            )
        return out

    groups: dict = {}
    for row in t.rows:
        c = _cell(layer.c_color, row, t)
        groups.setdefault((value_kind(c), c) if c is not None else None, []).append(row)
    for key in sorted(groups, key=lambda k: sort_key(None if k is None else k[1])):
        rows = groups[key]
        rows.sort(key=lambda r: (
            sort_key(_cell(layer.c_x, r, t)),
            sort_key(_cell(layer.c_y, r, t)),
            sort_key(_cell(layer.c_y2, r, t)),
        ))
        color = None if key is None else key[1]
        pts = []
        for row in rows:
            x = _require_number(_cell(layer.c_x, row, t), "area x")
            top = _require_number(_cell(layer.c_y, row, t), "area y")
            b = _cell(layer.c_y2, row, t)
            bot = 0.0 if b is None else _require_number(b, "area y2")
            pts.append((x, top, bot))
        for (x1, t1, b1), (x2, t2, b2) in zip(pts, pts[1:]):
            out.append(
                VisualElement(
                    "area",
                    {
                        "x_tl": x1, "y_tl": t1, "x_bl": x1, "y_bl": b1,
                        "x_tr": x2, "y_tr": t2, "x_br": x2, "y_br": b2,
                        "color": color,
                    },
                )
            )
    return out


def _render_stacked_area(layer: StackedArea, t: Table) -> list:
    if layer.orient != "v":
        raise RenderError("horizontal stacked areas are not supported")
    prepared = _stack_groups(t, layer.c_x, layer.c_h, layer.c_color)
    if not prepared:
        return []
    color_seq = None
    for x, rows, colors, heights in prepared:
        token = [(value_kind(c), c) if c is not None else None for c in colors]
        if color_seq is None:
            color_seq = token
        elif color_seq != token:
            raise RenderError("stacked area needs every color at every position")
    xs = [p[0] for p in prepared]
    for x in xs:
        if x is None or value_kind(x) != KIND_NUMBER:
            raise RenderError("stacked area positions must be numbers")
    spans = []  # per position: list of (lo, hi) per color
    for x, rows, colors, heights in prepared:
        acc = 0.0
        level = []
        for h in heights:
            level.append((acc, acc + h))
            acc += h
        spans.append(level)
    out = []
    for i in range(len(prepared) - 1):
        x1, x2 = xs[i], xs[i + 1]
        for c in range(len(color_seq)):
            lo1, hi1 = spans[i][c]
            lo2, hi2 = spans[i + 1][c]
            out.append(
                VisualElement(
                    "area",
                    {
                        "x_tl": x1, "y_tl": hi1, "x_bl": x1, "y_bl": lo1,
                        "x_tr": x2, "y_tr": hi2, "x_br": x2, "y_br": lo2,
                        "color": prepared[i][2][c],
                    },
                )
            )
    return out


_LAYER_RENDER = {
    Scatter: _render_scatter,
    Line: _render_line,
    Bar: _render_bar,
    StackedBar: _render_stacked_bar,
    Area: _render_area,
    StackedArea: _render_stacked_area,
}


def render_layer(layer, t: Table) -> list:
    return _LAYER_RENDER[type(layer)](layer, t)


_NOCHAN = object()


def _facet(t: Table, c_col, c_row) -> dict:
    """Split rows by subplot channel values; keys are (col, row) value pairs."""
    groups: dict = {}
    for row in t.rows:
        key = (
            row[t.column_index(c_col)] if c_col is not None else _NOCHAN,
            row[t.column_index(c_row)] if c_row is not None else _NOCHAN,
        )
        hkey = tuple(
            (value_kind(v), v) if v is not _NOCHAN and v is not None else v
            for v in key
        )
        groups.setdefault(hkey, (key, []))[1].append(row)
    return {
        hkey: (key, Table(t.columns, rows)) for hkey, (key, rows) in groups.items()
    }


def _tag(elements, key) -> list:
    col, row = key
    out = []
    for e in elements:
        updates = {}
        if col is not _NOCHAN and col is not None:
            updates["col"] = col
        if row is not _NOCHAN and row is not None:
            updates["row"] = row
        out.append(e.replace(**updates) if updates else e)
    return out


def render(viz, tables) -> VisualTrace:
    """Evaluate a visual program; tables is one Table or one per layer."""
    layers = program_layers(viz)
    if isinstance(tables, Table):
        tables = [tables] * len(layers) if len(layers) == 1 else None
        if tables is None:
            raise UsageError("a multi-layer program needs one table per layer")
    else:
        tables = list(tables)
    if len(tables) != len(layers):
        raise UsageError(
            f"expected {len(layers)} layer tables, got {len(tables)}"
        )
    for t in tables:
        if not isinstance(t, Table):
            raise UsageError(f"not a table: {t!r}")

    if not isinstance(viz, MultiPlot):
        out = []
        for layer, t in zip(layers, tables):
            out.extend(render_layer(layer, t))
        return VisualTrace(out)

    facets = [_facet(t, viz.c_col, viz.c_row) for t in tables]
    all_keys: dict = {}
    for f in facets:
        for hkey, (key, _) in f.items():
            all_keys.setdefault(hkey, key)
    out = []
    for hkey in sorted(
        all_keys,
        key=lambda k: tuple(
            (0,) if v is _NOCHAN else (1,) + sort_key(None if v is None else v[1])
            for v in k
        ),
    ):
        key = all_keys[hkey]
        for layer, f in zip(layers, facets):
            if hkey not in f:
                continue
            _, sub_table = f[hkey]
            out.extend(_tag(render_layer(layer, sub_table), key))
    return VisualTrace(out)
