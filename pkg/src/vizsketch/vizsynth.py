"""Candidate visual programs for a sketch.

Each candidate pairs a visual program over abstract column names with a Spec
pinning which rows (and stacking sums / adjacency gaps) the layer tables must
provide. Abstract names are later mapped to real columns by table synthesis.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from itertools import product

from .constraints import Inclusion, LineGap, Spec, StackedSum, rename_spec
from .table import Const, KIND_NUMBER, Placeholder, Table, value_kind
from .trace import (
    KIND_ORDER,
    VisualTrace,
    partition_by_subplot,
    partition_by_type,
    subplot_keys,
    values_match,
)
from .vizdsl import (
    Area,
    Bar,
    Line,
    MultiLayer,
    MultiPlot,
    Scatter,
    StackedArea,
    StackedBar,
    program_size,
)

VAR = "@"  # placeholder variable name inside per-layer option specs


@dataclass(frozen=True)
class VizCandidate:
    program: object
    spec: Spec
    n_layers: int
    priority: int

    @property
    def size(self) -> int:
        return program_size(self.program)

    def layer_vars(self) -> tuple:
        return tuple(f"t{i}" for i in range(self.n_layers))


@dataclass(frozen=True)
class _Option:
    """One way to explain a block of same-kind elements with a single layer."""

    layer: object
    spec: Spec  # variable VAR; local columns c1..c{n_cols}
    n_cols: int


def _ph(tag: str, i: int, attr: str) -> Placeholder:
    return Placeholder(f"{tag}.{i}.{attr}")


def _is_number(v) -> bool:
    return v is not None and value_kind(v) == KIND_NUMBER


def _numeric_guard(elems, attrs) -> bool:
    """All set values of these attributes must be numbers."""
    for e in elems:
        for a in attrs:
            v = e.get(a)
            if v is not None and not _is_number(v):
                return False
    return True


def _attr_options(elems, attr: str, tag: str) -> list:
    """Channel options for one attribute: unbound, a literal, or a column."""
    vals = [e.get(attr) for e in elems]
    set_vals = [v for v in vals if v is not None]
    if not set_vals:
        return [("eps", None)]
    opts = []
    first = set_vals[0]
    if all(values_match(v, first) for v in set_vals):
        opts.append(("lit", first))
    cells = tuple(
        v if v is not None else _ph(tag, i, attr) for i, v in enumerate(vals)
    )
    opts.append(("col", cells))
    return opts


def _forced_cells(elems, attr: str, tag: str) -> tuple:
    return tuple(
        e.get(attr) if e.get(attr) is not None else _ph(tag, i, attr)
        for i, e in enumerate(elems)
    )


class _Names:
    """Local column name allocator: c1, c2, ..."""

    def __init__(self):
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"c{self.n}"


def _build_option(layer_cls, kw, col_cells):
    """Assemble a layer and its atom from channel keyword choices.

    col_cells: list of (field, cells) in allocation order for column channels.
    """
    names = _Names()
    columns = []
    cell_cols = []
    for field, cells in col_cells:
        name = names.fresh()
        kw[field] = name
        columns.append(name)
        cell_cols.append(cells)
    layer = layer_cls(**kw)
    n = len(cell_cols[0])
    rows = [tuple(col[i] for col in cell_cols) for i in range(n)]
    atoms = [Inclusion(Table(tuple(columns), rows), VAR)]
    return layer, atoms, names.n


def _channel_kw(kw, field, opt):
    """Apply a non-column option; return True if a column is still needed."""
    kind, payload = opt
    if kind == "eps":
        kw[field] = None
        return False
    if kind == "lit":
        kw[field] = Const(payload)
        return False
    return True


def _scatter_options(elems, tag: str) -> list:
    chans = (("x", "c_x"), ("y", "c_y"), ("shape", "c_shape"),
             ("color", "c_color"), ("size", "c_size"))
    per = [_attr_options(elems, a, tag) for a, _ in chans]
    out = []
    for combo in product(*per):
        kw = {}
        col_cells = []
        for (attr, field), opt in zip(chans, combo):
            if _channel_kw(kw, field, opt):
                col_cells.append((field, opt[1]))
        if not col_cells:
            # Pure wildcard atom: n rows, no columns.
            layer = Scatter(**kw)
            atom = Inclusion(Table((), [() for _ in elems]), VAR)
            out.append(_Option(layer, Spec((atom,)), 0))
            continue
        layer, atoms, n_cols = _build_option(Scatter, kw, col_cells)
        out.append(_Option(layer, Spec(tuple(atoms)), n_cols))
    return out


def _bar_options(kind: str, elems, tag: str) -> list:
    if kind == "barV":
        pos_attr, lo_attr, hi_attr = "x", "y1", "y2"
        pos_field, lo_field, hi_field = "c_x", "c_y", "c_y2"
    else:
        pos_attr, lo_attr, hi_attr = "y", "x1", "x2"
        pos_field, lo_field, hi_field = "c_y", "c_x", "c_x2"
    if not _numeric_guard(elems, (lo_attr, hi_attr)):
        return []
    lo_vals = [e.get(lo_attr) for e in elems]
    hi_vals = [e.get(hi_attr) for e in elems]
    lo_cells = _forced_cells(elems, lo_attr, tag)
    hi_cells = _forced_cells(elems, hi_attr, tag)
    zeroish_lo = all(v is None or values_match(v, 0.0) for v in lo_vals)
    zeroish_hi = all(v is None or values_match(v, 0.0) for v in hi_vals)

    spans = []
    if kind == "barV":
        # Baseline bars bind a single span channel; the other end is zero.
        if zeroish_lo:
            spans.append(({}, [(lo_field, hi_cells)]))
        if zeroish_hi:
            spans.append(({}, [(lo_field, lo_cells)]))
        spans.append(({}, [(lo_field, lo_cells), (hi_field, hi_cells)]))
    else:
        # Horizontal bars always bind the far end; baseline uses a 0 literal.
        if zeroish_lo:
            spans.append(({lo_field: Const(0.0)}, [(hi_field, hi_cells)]))
        if zeroish_hi:
            spans.append(({lo_field: Const(0.0)}, [(hi_field, lo_cells)]))
        spans.append(({}, [(lo_field, lo_cells), (hi_field, hi_cells)]))

    pos_opts = _attr_options(elems, pos_attr, tag)
    color_opts = _attr_options(elems, "color", tag)
    width_opts = _attr_options(elems, "width", tag)
    out = []
    for span_kw, span_cols in spans:
        for pos_o, color_o, width_o in product(pos_opts, color_opts, width_opts):
            kw = dict(span_kw)
            col_cells = []
            if _channel_kw(kw, pos_field, pos_o):
                col_cells.append((pos_field, pos_o[1]))
            col_cells.extend(span_cols)
            if _channel_kw(kw, "c_color", color_o):
                col_cells.append(("c_color", color_o[1]))
            if _channel_kw(kw, "c_width", width_o):
                col_cells.append(("c_width", width_o[1]))
            layer, atoms, n_cols = _build_option(Bar, kw, col_cells)
            out.append(_Option(layer, Spec(tuple(atoms)), n_cols))
    return out


def _stacked_bar_options(kind: str, elems, tag: str) -> list:
    if kind == "barV":
        pos_attr, lo_attr, hi_attr = "x", "y1", "y2"
        orient = "v"
    else:
        pos_attr, lo_attr, hi_attr = "y", "x1", "x2"
        orient = "h"
    if not any(e.has("color") for e in elems):
        return []
    if not _numeric_guard(elems, (lo_attr, hi_attr)):
        return []
    pos_cells = _forced_cells(elems, pos_attr, tag + ".s")
    color_cells = _forced_cells(elems, "color", tag + ".s")
    h_cells = []
    for i, e in enumerate(elems):
        lo, hi = e.get(lo_attr), e.get(hi_attr)
        if lo is not None and hi is not None:
            h_cells.append(hi - lo)
        else:
            h_cells.append(_ph(tag + ".s", i, "h"))
    items = tuple(
        (pos_cells[i], (), color_cells[i], e.get(lo_attr))
        for i, e in enumerate(elems)
        if e.get(lo_attr) is not None
    )
    width_opts = _attr_options(elems, "width", tag + ".s")
    out = []
    for width_o in width_opts:
        kw = {"orient": orient}
        col_cells = [("c_x", pos_cells), ("c_h", tuple(h_cells)),
                     ("c_color", color_cells)]
        if _channel_kw(kw, "c_width", width_o):
            col_cells.append(("c_width", width_o[1]))
        layer, atoms, n_cols = _build_option(StackedBar, kw, col_cells)
        cond = StackedSum(
            var=VAR, c_x=layer.c_x, c_color=layer.c_color, c_h=layer.c_h,
            items=items,
        )
        out.append(_Option(layer, Spec(tuple(atoms), (cond,)), n_cols))
    return out


def _line_options(elems, tag: str) -> list:
    if not _numeric_guard(elems, ("x1", "y1", "x2", "y2")):
        return []
    x1 = _forced_cells(elems, "x1", tag)
    y1 = _forced_cells(elems, "y1", tag)
    x2 = _forced_cells(elems, "x2", tag)
    y2 = _forced_cells(elems, "y2", tag)
    width_opts = _attr_options(elems, "width", tag)
    color_opts = _attr_options(elems, "color", tag)
    out = []
    for width_o, color_o in product(width_opts, color_opts):
        names = _Names()
        kw = {}
        cx, cy = names.fresh(), names.fresh()
        kw["c_x"], kw["c_y"] = cx, cy
        t1_cols, t1_cells = [cx, cy], [x1, y1]
        t2_cols, t2_cells = [cx, cy], [x2, y2]
        if _channel_kw(kw, "c_width", width_o):
            cw = names.fresh()
            kw["c_width"] = cw
            t1_cols.append(cw)
            t1_cells.append(width_o[1])
        gap_color = None
        if _channel_kw(kw, "c_color", color_o):
            cc = names.fresh()
            kw["c_color"] = cc
            color_cells = color_o[1]
            t1_cols.append(cc)
            t1_cells.append(color_cells)
            t2_cols.append(cc)
            t2_cells.append(color_cells)
            gap_color = cc
        layer = Line(**kw)
        n = len(elems)
        t1 = Table(tuple(t1_cols), [tuple(c[i] for c in t1_cells) for i in range(n)])
        t2 = Table(tuple(t2_cols), [tuple(c[i] for c in t2_cells) for i in range(n)])
        items = tuple(
            ((), color_o[1][i] if gap_color else None, x1[i], x2[i])
            for i in range(n)
        )
        cond = LineGap(var=VAR, c_x=cx, c_color=gap_color, items=items)
        spec = Spec((Inclusion(t1, VAR), Inclusion(t2, VAR)), (cond,))
        out.append(_Option(layer, spec, names.n))
    return out


def _merge_corner(e, a: str, b: str, tag: str, i: int, label: str):
    """One cell for two corner attributes that must agree; None on conflict."""
    va, vb = e.get(a), e.get(b)
    if va is not None and vb is not None:
        if not values_match(va, vb):
            return None
        return va
    if va is not None:
        return va
    if vb is not None:
        return vb
    return _ph(tag, i, label)


def _area_corner_cells(elems, tag: str, pairs):
    """Merged cells per element for coinciding corner pairs, or None."""
    out = []
    for label, a, b in pairs:
        cells = []
        for i, e in enumerate(elems):
            v = _merge_corner(e, a, b, tag, i, label)
            if v is None and (e.get(a) is not None or e.get(b) is not None):
                return None
            cells.append(v)
        out.append(tuple(cells))
    return out


def _area_options(elems, tag: str) -> list:
    if not _numeric_guard(
        elems, ("x_tl", "y_tl", "x_bl", "y_bl", "x_tr", "y_tr", "x_br", "y_br")
    ):
        return []
    out = []
    color_opts = _attr_options(elems, "color", tag)

    # Ribbon form: left and right edges are vertical.
    ribbon = _area_corner_cells(
        elems, tag + ".r", (("lx", "x_tl", "x_bl"), ("rx", "x_tr", "x_br"))
    )
    if ribbon is not None:
        lx, rx = ribbon
        top_l = _forced_cells(elems, "y_tl", tag + ".r")
        top_r = _forced_cells(elems, "y_tr", tag + ".r")
        bot_l_vals = [e.get("y_bl") for e in elems]
        bot_r_vals = [e.get("y_br") for e in elems]
        zero_bottom = all(
            v is None or values_match(v, 0.0) for v in bot_l_vals + bot_r_vals
        )
        bottoms = [False]
        if zero_bottom:
            bottoms.insert(0, True)
        for baseline in bottoms:
            for color_o in color_opts:
                names = _Names()
                kw = {}
                cx, cy = names.fresh(), names.fresh()
                kw["c_x"], kw["c_y"] = cx, cy
                t1_cols, t1_cells = [cx, cy], [lx, top_l]
                t2_cols, t2_cells = [cx, cy], [rx, top_r]
                if not baseline:
                    cy2 = names.fresh()
                    kw["c_y2"] = cy2
                    t1_cols.append(cy2)
                    t1_cells.append(_forced_cells(elems, "y_bl", tag + ".r"))
                    t2_cols.append(cy2)
                    t2_cells.append(_forced_cells(elems, "y_br", tag + ".r"))
                gap_color = None
                if _channel_kw(kw, "c_color", color_o):
                    cc = names.fresh()
                    kw["c_color"] = cc
                    t1_cols.append(cc)
                    t1_cells.append(color_o[1])
                    t2_cols.append(cc)
                    t2_cells.append(color_o[1])
                    gap_color = cc
                layer = Area(**kw)
                n = len(elems)
                t1 = Table(
                    tuple(t1_cols), [tuple(c[i] for c in t1_cells) for i in range(n)]
                )
                t2 = Table(
                    tuple(t2_cols), [tuple(c[i] for c in t2_cells) for i in range(n)]
                )
                items = tuple(
                    ((), color_o[1][i] if gap_color else None, lx[i], rx[i])
                    for i in range(n)
                )
                cond = LineGap(var=VAR, c_x=cx, c_color=gap_color, items=items)
                spec = Spec((Inclusion(t1, VAR), Inclusion(t2, VAR)), (cond,))
                out.append(_Option(layer, spec, names.n))

    # Rectangle form: one row per element.
    rect = _area_corner_cells(
        elems,
        tag + ".q",
        (
            ("lx", "x_tl", "x_bl"), ("rx", "x_tr", "x_br"),
            ("top", "y_tl", "y_tr"), ("bot", "y_bl", "y_br"),
        ),
    )
    if rect is not None:
        lx, rx, top, bot = rect
        bot_vals = [
            v
            for e in elems
            for v in (e.get("y_bl"), e.get("y_br"))
        ]
        zero_bottom = all(v is None or values_match(v, 0.0) for v in bot_vals)
        for baseline in ([True, False] if zero_bottom else [False]):
            for color_o in color_opts:
                kw = {}
                col_cells = [("c_x", lx), ("c_x2", rx), ("c_y", top)]
                if not baseline:
                    col_cells.append(("c_y2", bot))
                if _channel_kw(kw, "c_color", color_o):
                    col_cells.append(("c_color", color_o[1]))
                layer, atoms, n_cols = _build_option(Area, kw, col_cells)
                out.append(_Option(layer, Spec(tuple(atoms)), n_cols))
    return out


def _stacked_area_options(elems, tag: str) -> list:
    if not any(e.has("color") for e in elems):
        return []
    if not _numeric_guard(
        elems, ("x_tl", "y_tl", "x_bl", "y_bl", "x_tr", "y_tr", "x_br", "y_br")
    ):
        return []
    edges = _area_corner_cells(
        elems, tag + ".sa", (("lx", "x_tl", "x_bl"), ("rx", "x_tr", "x_br"))
    )
    if edges is None:
        return []
    lx, rx = edges
    color_cells = _forced_cells(elems, "color", tag + ".sa")

    def height(e, i, top_a, bot_a, label):
        top, bot = e.get(top_a), e.get(bot_a)
        if top is not None and bot is not None:
            return top - bot
        return _ph(tag + ".sa", i, label)

    lh = tuple(height(e, i, "y_tl", "y_bl", "lh") for i, e in enumerate(elems))
    rh = tuple(height(e, i, "y_tr", "y_br", "rh") for i, e in enumerate(elems))

    names = _Names()
    cx, ch, cc = names.fresh(), names.fresh(), names.fresh()
    layer = StackedArea(orient="v", c_x=cx, c_h=ch, c_color=cc)
    n = len(elems)
    t1 = Table((cx, ch, cc), [(lx[i], lh[i], color_cells[i]) for i in range(n)])
    t2 = Table((cx, ch, cc), [(rx[i], rh[i], color_cells[i]) for i in range(n)])
    items = []
    for i, e in enumerate(elems):
        if e.get("y_bl") is not None:
            items.append((lx[i], (), color_cells[i], e.get("y_bl")))
        if e.get("y_br") is not None:
            items.append((rx[i], (), color_cells[i], e.get("y_br")))
    sums = StackedSum(var=VAR, c_x=cx, c_color=cc, c_h=ch, items=tuple(items))
    gaps = LineGap(
        var=VAR, c_x=cx, c_color=None,
        items=tuple(((), None, lx[i], rx[i]) for i in range(n)),
    )
    spec = Spec((Inclusion(t1, VAR), Inclusion(t2, VAR)), (sums, gaps))
    return [_Option(layer, spec, names.n)]


def _options_for_kind(kind: str, elems: list, tag: str) -> list:
    if kind == "point":
        return _scatter_options(elems, tag)
    if kind == "line":
        return _line_options(elems, tag)
    if kind in ("barV", "barH"):
        return _bar_options(kind, elems, tag) + _stacked_bar_options(kind, elems, tag)
    if kind == "area":
        return _area_options(elems, tag) + _stacked_area_options(elems, tag)
    raise AssertionError(kind)


# ---------------------------------------------------------------------------
# Assembly


def _substitute(layer, mapping: dict):
    updates = {}
    for f in fields(layer):
        if not f.name.startswith("c_"):
            continue
        v = getattr(layer, f.name)
        if isinstance(v, str):
            updates[f.name] = mapping[v]
    return replace(layer, **updates)


def _extend_subplot(spec: Spec, subcols: tuple, subvals: tuple) -> Spec:
    atoms = tuple(
        Inclusion(
            Table(a.table.columns + subcols, [r + subvals for r in a.table.rows]),
            a.var,
            a.relation,
        )
        for a in spec.atoms
    )
    conds = []
    for c in spec.conditions:
        if isinstance(c, StackedSum):
            items = tuple(
                (x, subs + subvals, color, y1) for (x, subs, color, y1) in c.items
            )
        else:
            items = tuple(
                (subs + subvals, color, x1, x2) for (subs, color, x1, x2) in c.items
            )
        conds.append(replace(c, c_subs=c.c_subs + subcols, items=items))
    return Spec(atoms, tuple(conds))


class _Prefixed:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"


def _assemble(chosen, subplot, prefix: str, priority: int) -> VizCandidate:
    """chosen: per layer (program_local, n_cols, [(block_values, spec_local)])."""
    namer = _Prefixed(prefix)
    mappings = []
    for layer_local, n_cols, _ in chosen:
        mappings.append({f"c{j + 1}": namer.fresh() for j in range(n_cols)})
    subcols = ()
    if subplot is not None:
        subcols = tuple(namer.fresh() for _ in subplot)
    layers = []
    parts_atoms = []
    parts_conds = []
    for idx, (layer_local, n_cols, block_specs) in enumerate(chosen):
        mapping = mappings[idx]
        layers.append(_substitute(layer_local, mapping))
        for subvals, spec_local in block_specs:
            s = rename_spec(spec_local, mapping, {VAR: f"t{idx}"})
            if subplot is not None:
                s = _extend_subplot(s, subcols, subvals)
            parts_atoms.extend(s.atoms)
            parts_conds.extend(s.conditions)
    body = layers[0] if len(layers) == 1 else MultiLayer(tuple(layers))
    if subplot is not None:
        kw = {}
        for axis, name in zip(subplot, subcols):
            kw["c_col" if axis == "col" else "c_row"] = name
        body = MultiPlot(body, **kw)
    return VizCandidate(
        body, Spec(tuple(parts_atoms), tuple(parts_conds)), len(layers), priority
    )


def _kind_blocks(trace: VisualTrace):
    blocks = partition_by_type(trace)
    return [(b.elements[0].kind, list(b.elements)) for b in blocks]


def _plain_candidates(sketch: VisualTrace, prefix: str) -> list:
    kinds = _kind_blocks(sketch)
    per_kind = [
        _options_for_kind(kind, elems, f"p.{kind}") for kind, elems in kinds
    ]
    priority = 0 if len(kinds) == 1 else 2
    out = []
    for combo in product(*per_kind):
        chosen = [(o.layer, o.n_cols, [((), o.spec)]) for o in combo]
        out.append(_assemble(chosen, None, prefix, priority))
    return out


_OPTION_PRODUCT_CAP = 32


def _multiplot_candidates(sketch: VisualTrace, prefix: str) -> list:
    any_col = any(e.has("col") for e in sketch)
    any_row = any(e.has("row") for e in sketch)
    axes = []
    if any_col or not any_row:
        axes.append("col")
    if any_row:
        axes.append("row")
    keys = subplot_keys(sketch)
    blocks = partition_by_subplot(sketch)

    block_values = []
    for bi, key in enumerate(keys):
        vals = []
        for axis in axes:
            v = key[0] if axis == "col" else key[1]
            vals.append(v if v is not None else Placeholder(f"b{bi}.{axis}v"))
        block_values.append(tuple(vals))

    # Per block, per element kind: the layer options explaining that piece.
    kind_union = []
    block_kind_opts = []
    for bi, block in enumerate(blocks):
        opts = {}
        for kind, elems in _kind_blocks(block):
            opts[kind] = _options_for_kind(kind, elems, f"b{bi}.{kind}")
            if kind not in kind_union:
                kind_union.append(kind)
        block_kind_opts.append(opts)
    kind_union.sort(key=KIND_ORDER.index)

    # Unify: one shared layer program per kind across the blocks that show it.
    per_kind_choices = []
    for kind in kind_union:
        holders = [bi for bi in range(len(blocks)) if kind in block_kind_opts[bi]]
        first = holders[0]
        choices = []
        seen_programs = []
        for opt in block_kind_opts[first][kind]:
            if opt.layer in seen_programs:
                continue
            per_block = []
            for bi in holders:
                matches = [
                    o for o in block_kind_opts[bi][kind] if o.layer == opt.layer
                ]
                if not matches:
                    per_block = None
                    break
                per_block.append((bi, matches))
            if per_block is None:
                continue
            seen_programs.append(opt.layer)
            combos = [[]]
            for bi, matches in per_block:
                combos = [
                    c + [(bi, m)] for c in combos for m in matches
                ][:_OPTION_PRODUCT_CAP]
            for c in combos:
                choices.append((opt.layer, opt.n_cols, c))
        if not choices:
            return []
        per_kind_choices.append(choices)

    out = []
    base_priority = 1 if len(kind_union) == 1 else 3
    for combo in product(*per_kind_choices):
        chosen = []
        for layer_local, n_cols, per_block in combo:
            block_specs = [(block_values[bi], o.spec) for bi, o in per_block]
            chosen.append((layer_local, n_cols, block_specs))
        out.append(_assemble(chosen, tuple(axes), prefix, base_priority))
    return out


def _pick_prefix(avoid) -> str:
    for prefix in ("c", "k", "u", "w", "z", "cc"):
        pat = re.compile(re.escape(prefix) + r"\d+$")
        if not any(pat.match(name) for name in avoid):
            return prefix
    return "c._"


def learn_visual_programs(sketch: VisualTrace, avoid=frozenset()) -> list:
    """All candidate programs for a sketch, smallest and simplest first."""
    if len(sketch) == 0:
        return []
    prefix = _pick_prefix(avoid)
    cands = []
    if not any(e.has("col") or e.has("row") for e in sketch):
        cands.extend(_plain_candidates(sketch, prefix))
    cands.extend(_multiplot_candidates(sketch, prefix))
    seen = set()
    unique = []
    for c in cands:
        key = (c.program, c.spec)
        if key in seen:
            continue
        seen.add(key)
        unique.append(c)
    unique.sort(key=lambda c: (c.size, c.priority))
    return unique
