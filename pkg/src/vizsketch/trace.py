"""Visual traces: elements, parsing, containment, and partitioning."""

from __future__ import annotations

import json
import math
from collections import Counter
from typing import Iterable

from .errors import ParseError, UsageError
from .table import canonical_value, sort_key, value_to_json

# Attribute sets per element kind, in canonical order.
ELEMENT_ATTRS = {
    "point": ("x", "y", "shape", "color", "size", "col", "row"),
    "line": ("x1", "y1", "x2", "y2", "width", "color", "col", "row"),
    "barV": ("x", "y1", "y2", "width", "color", "col", "row"),
    "barH": ("y", "x1", "x2", "width", "color", "col", "row"),
    "area": (
        "x_tl", "y_tl", "x_bl", "y_bl",
        "x_tr", "y_tr", "x_br", "y_br",
        "color", "col", "row",
    ),
}

KIND_ORDER = ("point", "line", "barV", "barH", "area")

REL_TOL = 1e-9
ABS_TOL = 1e-12


class VisualElement:
    """One visual mark with a partial attribute map; unset attributes are absent."""

    __slots__ = ("kind", "attrs")

    def __init__(self, kind: str, attrs: dict):
        if kind not in ELEMENT_ATTRS:
            raise UsageError(f"unknown element kind {kind!r}")
        allowed = ELEMENT_ATTRS[kind]
        clean = {}
        for name, v in attrs.items():
            if name not in allowed:
                raise UsageError(f"{kind} has no attribute {name!r}")
            if v is None:
                continue
            clean[name] = canonical_value(v)
        clean = _canonicalize(kind, clean)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(
            self, "attrs", tuple((a, clean[a]) for a in allowed if a in clean)
        )

    def __setattr__(self, name, value):
        raise AttributeError("VisualElement is immutable")

    def get(self, name: str):
        for a, v in self.attrs:
            if a == name:
                return v
        return None

    def has(self, name: str) -> bool:
        return any(a == name for a, _ in self.attrs)

    def replace(self, **updates) -> "VisualElement":
        d = dict(self.attrs)
        d.update(updates)
        return VisualElement(self.kind, d)

    def __eq__(self, other):
        if not isinstance(other, VisualElement):
            return NotImplemented
        return self.kind == other.kind and self.attrs == other.attrs

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        return hash((self.kind, self.attrs))

    def __repr__(self):
        inner = ", ".join(f"{a}={v!r}" for a, v in self.attrs)
        return f"{self.kind}({inner})"

    def sort_token(self):
        return (
            KIND_ORDER.index(self.kind),
            tuple((a, sort_key(v)) for a, v in self.attrs),
        )


def _swap(attrs: dict, a1: str, b1: str, a2: str, b2: str):
    """Swap the (a1,b1) pair with the (a2,b2) pair, moving absences along."""
    va1, vb1 = attrs.pop(a1, None), attrs.pop(b1, None)
    va2, vb2 = attrs.pop(a2, None), attrs.pop(b2, None)
    for k, v in ((a1, va2), (b1, vb2), (a2, va1), (b2, vb1)):
        if v is not None:
            attrs[k] = v


def _canonicalize(kind: str, attrs: dict) -> dict:
    attrs = dict(attrs)
    if kind == "line":
        x1, x2 = attrs.get("x1"), attrs.get("x2")
        y1, y2 = attrs.get("y1"), attrs.get("y2")
        if x1 is not None and x2 is not None:
            if sort_key(x1) > sort_key(x2) or (
                x1 == x2 and y1 is not None and y2 is not None
                and sort_key(y1) > sort_key(y2)
            ):
                _swap(attrs, "x1", "y1", "x2", "y2")
    elif kind == "barV":
        y1, y2 = attrs.get("y1"), attrs.get("y2")
        if y1 is not None and y2 is not None and sort_key(y1) > sort_key(y2):
            attrs["y1"], attrs["y2"] = y2, y1
    elif kind == "barH":
        x1, x2 = attrs.get("x1"), attrs.get("x2")
        if x1 is not None and x2 is not None and sort_key(x1) > sort_key(x2):
            attrs["x1"], attrs["x2"] = x2, x1
    return attrs


def element(kind: str, **attrs) -> VisualElement:
    return VisualElement(kind, attrs)


def point(**attrs) -> VisualElement:
    return VisualElement("point", attrs)


def line(**attrs) -> VisualElement:
    return VisualElement("line", attrs)


def barv(**attrs) -> VisualElement:
    return VisualElement("barV", attrs)


def barh(**attrs) -> VisualElement:
    return VisualElement("barH", attrs)


def area(**attrs) -> VisualElement:
    return VisualElement("area", attrs)


class VisualTrace:
    """A bag of visual elements; order of construction is not observable."""

    __slots__ = ("elements", "_counter")

    def __init__(self, elements: Iterable[VisualElement] = ()):
        elems = tuple(elements)
        for e in elems:
            if not isinstance(e, VisualElement):
                raise UsageError(f"not a visual element: {e!r}")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "_counter", None)

    def __setattr__(self, name, value):
        raise AttributeError("VisualTrace is immutable")

    @property
    def counter(self) -> Counter:
        c = self._counter
        if c is None:
            c = Counter(self.elements)
            object.__setattr__(self, "_counter", c)
        return c

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        if not isinstance(other, VisualTrace):
            return NotImplemented
        return self.counter == other.counter

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        return hash(frozenset(self.counter.items()))

    def __repr__(self):
        return f"VisualTrace({len(self.elements)} elements)"

    def sorted_elements(self) -> tuple:
        return tuple(sorted(self.elements, key=lambda e: e.sort_token()))


def parse_trace(text_or_obj) -> VisualTrace:
    """Parse the JSON sketch format: a list of elements keyed by attribute name."""
    if isinstance(text_or_obj, str):
        try:
            obj = json.loads(text_or_obj)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e}") from None
    else:
        obj = text_or_obj
    if not isinstance(obj, list):
        raise ParseError("a trace is a JSON list of elements")
    from .table import json_cell

    elems = []
    for i, item in enumerate(obj):
        if not isinstance(item, dict) or "kind" not in item:
            raise ParseError(f'element {i}: expected an object with a "kind" key')
        kind = item["kind"]
        if kind not in ELEMENT_ATTRS:
            raise ParseError(f"element {i}: unknown kind {kind!r}")
        attrs = {}
        for k, v in item.items():
            if k == "kind":
                continue
            if k not in ELEMENT_ATTRS[kind]:
                raise ParseError(f"element {i}: {kind} has no attribute {k!r}")
            if v is None:
                continue
            try:
                attrs[k] = json_cell(v)
            except ParseError as e:
                raise ParseError(f"element {i}, attribute {k}: {e}") from None
        elems.append(VisualElement(kind, attrs))
    return VisualTrace(elems)


def serialize_trace(trace: VisualTrace) -> str:
    out = []
    for e in trace.sorted_elements():
        d = {"kind": e.kind}
        for a, v in e.attrs:
            d[a] = value_to_json(v)
        out.append(d)
    return json.dumps(out)


def values_match(small, big) -> bool:
    """Attribute comparison: tolerant on numbers, exact elsewhere."""
    if isinstance(small, float) and isinstance(big, float):
        return math.isclose(small, big, rel_tol=REL_TOL, abs_tol=ABS_TOL)
    return small == big


def element_matches(small: VisualElement, big: VisualElement) -> bool:
    """Attributes set on the small element must agree; unset ones are wildcards."""
    if small.kind != big.kind:
        return False
    for a, v in small.attrs:
        if not big.has(a):
            return False
        if not values_match(v, big.get(a)):
            return False
    return True


def trace_contains(small: VisualTrace, big: VisualTrace) -> bool:
    """True iff an injective element matching embeds small into big."""
    if len(small) > len(big):
        return False
    bigs = list(big.elements)
    cands = []
    for s in small.elements:
        c = [j for j, b in enumerate(bigs) if element_matches(s, b)]
        if not c:
            return False
        cands.append(c)

    # Maximum bipartite matching via augmenting paths.
    order = sorted(range(len(cands)), key=lambda i: len(cands[i]))
    match_of_big: dict[int, int] = {}

    def augment(i: int, seen: set) -> bool:
        for j in cands[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match_of_big or augment(match_of_big[j], seen):
                match_of_big[j] = i
                return True
        return False

    for i in order:
        if not augment(i, set()):
            return False
    return True


def partition_by_subplot(trace: VisualTrace) -> list:
    """Blocks keyed by the (col,row) attribute pair, ordered by key."""
    groups: dict = {}
    for e in trace.elements:
        key = (e.get("col"), e.get("row"))
        groups.setdefault(key, []).append(e)
    keys = sorted(groups, key=lambda k: (sort_key(k[0]), sort_key(k[1])))
    return [VisualTrace(groups[k]) for k in keys]


def subplot_keys(trace: VisualTrace) -> list:
    keys = {(e.get("col"), e.get("row")) for e in trace.elements}
    return sorted(keys, key=lambda k: (sort_key(k[0]), sort_key(k[1])))


def partition_by_type(trace: VisualTrace) -> list:
    """Blocks keyed by element kind, in canonical kind order."""
    groups: dict = {}
    for e in trace.elements:
        groups.setdefault(e.kind, []).append(e)
    return [VisualTrace(groups[k]) for k in KIND_ORDER if k in groups]
