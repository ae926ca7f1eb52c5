"""Top-level synthesis: turn input tables and a sketch into ranked solutions.

The search couples the two enumerators. Visual-program candidates come out
smallest first, and each candidate owns one table-synthesis stream per layer
that also yields smallest first. A scheduler cycles over the candidates,
advancing each by one completion per turn, so every candidate surfaces its
best solutions early instead of waiting behind a neighbour with a large
supply of small ones. Each surviving combination is verified end to end by
rendering it and checking that the rendering contains the sketch; collection
stops at the first top_k distinct renderings, which are then ranked.
"""

from collections import deque
from dataclasses import dataclass, replace
import heapq
import itertools
import random
import threading
import time

from .constraints import eval_spec
from .errors import UsageError
from .table import Table
from .tabledsl import Select, TableProgram
from .tablesynth import STAT_KEYS, learn_table_transforms
from .trace import VisualTrace, partition_by_type, trace_contains
from .vizdsl import MultiLayer, MultiPlot, program_layers, program_size, render
from .vizsynth import learn_visual_programs

DEFAULT_BUDGET = 600.0
DEFAULT_TOP_K = 10
DEFAULT_MAX_STMTS = 4

SOLVE_STAT_KEYS = ("viz_candidates", "combos", "accepted") + STAT_KEYS


@dataclass(frozen=True)
class Solution:
    """One verified answer: scripts, column mapping, and the rendered trace."""

    viz: object            # visual program with output column names applied
    table_programs: tuple  # one per layer
    sigmas: tuple          # per layer: ((abstract column, output column), ...)
    outputs: tuple         # per layer: table the layer is rendered from
    trace: VisualTrace     # rendering on the given inputs
    abstract_viz: object   # visual program over abstract column names
    abstract_columns: tuple  # per layer: abstract columns, output order
    order: tuple           # (candidate index, completion index)

    @property
    def size(self) -> int:
        return program_size(self.viz) + sum(p.size for p in self.table_programs)

    @property
    def n_layers(self) -> int:
        return len(self.table_programs)

    def abstract_views(self) -> tuple:
        """Per-layer outputs projected and renamed to the abstract columns."""
        views = []
        for cols, sigma, out in zip(self.abstract_columns, self.sigmas, self.outputs):
            mapping = dict(sigma)
            picks = [out.column_index(mapping[c]) for c in cols]
            views.append(
                Table(cols, [tuple(r[i] for i in picks) for r in out.rows])
            )
        return tuple(views)


def rank(solutions) -> list:
    """Order solutions by total size, then fewer layers, then discovery."""
    return sorted(solutions, key=lambda s: (s.size, s.n_layers, s.order))


def sample_sketch(full_trace: VisualTrace, n_per_layer: int = 4, seed=0) -> VisualTrace:
    """Sample min(n, block size) elements per element-kind block, without replacement."""
    if len(full_trace) == 0:
        raise UsageError("cannot sample from an empty trace")
    if n_per_layer < 1:
        raise UsageError("n_per_layer must be at least 1")
    rng = random.Random(seed)
    picked = []
    for block in partition_by_type(full_trace):
        elems = list(block.elements)
        k = min(n_per_layer, len(elems))
        for i in sorted(rng.sample(range(len(elems)), k)):
            picked.append(elems[i])
    return VisualTrace(picked)


# ---------------------------------------------------------------------------
# Lazy size-ordered combination of per-layer table solutions


class _LayerStream:
    """Materialized prefix of one layer's table-synthesis generator."""

    def __init__(self, gen):
        self.gen = gen
        self.items = []
        self.done = False

    def get(self, i):
        while not self.done and len(self.items) <= i:
            nxt = next(self.gen, None)
            if nxt is None:
                self.done = True
            else:
                self.items.append(nxt)
        return self.items[i] if i < len(self.items) else None


class _Combos:
    """Tuples of per-layer solutions, in nondecreasing total program size."""

    def __init__(self, streams):
        self.streams = streams
        self.heap = []
        self.seen = set()
        self._push(tuple(0 for _ in streams))

    def _push(self, idx):
        if idx in self.seen:
            return
        sols = []
        total = 0
        for stream, i in zip(self.streams, idx):
            item = stream.get(i)
            if item is None:
                return
            sols.append(item)
            total += item.program.size
        self.seen.add(idx)
        heapq.heappush(self.heap, (total, idx, tuple(sols)))

    def next(self):
        if not self.heap:
            return None
        total, idx, sols = heapq.heappop(self.heap)
        for j in range(len(idx)):
            self._push(idx[:j] + (idx[j] + 1,) + idx[j + 1:])
        return sols


class _Candidate:
    """One visual-program candidate and its per-layer table searches."""

    def __init__(
        self, index, cand, tables, max_stmts, prune, deadline, cancel, cutoff_fn
    ):
        self.index = index
        self.cand = cand
        self.vars = cand.layer_vars()
        self.layer_cols = tuple(cand.spec.columns_of(v) for v in self.vars)
        self.table_stats = {}
        self._combos = None

        def size_cap():
            cutoff = cutoff_fn()
            return None if cutoff is None else cutoff - cand.size

        self._make = lambda: _Combos([
            _LayerStream(learn_table_transforms(
                tables, cand.spec.for_var(v), v,
                max_stmts=max_stmts, prune=prune,
                deadline=deadline, cancel=cancel, stats=self.table_stats,
                size_cap=size_cap,
            ))
            for v in self.vars
        ])

    def next(self):
        if self._combos is None:
            self._combos = self._make()
        return self._combos.next()


# ---------------------------------------------------------------------------
# Combination gates


def _rename_channels(layer, mapping: dict):
    updates = {}
    for name, value in layer.channels().items():
        if isinstance(value, str) and value in mapping:
            updates[name] = mapping[value]
    return replace(layer, **updates) if updates else layer


def _subplot_name(col, sigmas):
    if col is None:
        return None
    names = {dict(s)[col] for s in sigmas if col in dict(s)}
    return names.pop() if len(names) == 1 else col


def _display_viz(viz, sigmas):
    """The visual program with each layer's output column names applied."""
    layers = tuple(
        _rename_channels(layer, dict(sigma))
        for layer, sigma in zip(program_layers(viz), sigmas)
    )
    body = layers[0] if len(layers) == 1 else MultiLayer(layers)
    if isinstance(viz, MultiPlot):
        return MultiPlot(
            body,
            _subplot_name(viz.c_col, sigmas),
            _subplot_name(viz.c_row, sigmas),
        )
    return body


def _view(table_sol, abstract_cols):
    """The solution's output projected and renamed to the abstract columns."""
    sigma = table_sol.sigma_dict
    output = table_sol.output
    picks = [output.column_index(sigma[c]) for c in abstract_cols]
    return Table(abstract_cols, [tuple(r[i] for i in picks) for r in output.rows])


def _shape(table_sol, abstract_cols):
    """Append a final select so the output is exactly the plotted columns."""
    sigma = table_sol.sigma_dict
    wanted = tuple(sigma[c] for c in abstract_cols)
    program = table_sol.program
    output = table_sol.output
    if not wanted or output.columns == wanted:
        return program, output
    last = f"t{len(program.statements)}" if program.statements else program.inputs[0]
    program = TableProgram(program.inputs, program.statements + (Select(last, wanted),))
    picks = [output.column_index(c) for c in wanted]
    output = Table(wanted, [tuple(row[i] for i in picks) for row in output.rows])
    return program, output


def _combine(candidate, combo, sketch):
    """Verify one combination end to end; return a gated Solution or None."""
    cand = candidate.cand
    shaped = [
        _shape(sol, cols) for sol, cols in zip(combo, candidate.layer_cols)
    ]
    views = [
        _view(sol, cols) for sol, cols in zip(combo, candidate.layer_cols)
    ]
    if not eval_spec(cand.spec, dict(zip(candidate.vars, views))):
        return None
    try:
        rendered = render(cand.program, views)
    except Exception:
        return None
    if not trace_contains(sketch, rendered):
        return None
    sigmas = tuple(sol.sigma for sol in combo)
    return Solution(
        viz=_display_viz(cand.program, sigmas),
        table_programs=tuple(p for p, _ in shaped),
        sigmas=sigmas,
        outputs=tuple(o for _, o in shaped),
        trace=rendered,
        abstract_viz=cand.program,
        abstract_columns=candidate.layer_cols,
        order=(candidate.index, 0),
    )


# ---------------------------------------------------------------------------
# Scheduler


def _expired(deadline, cancel) -> bool:
    if cancel is not None and cancel.is_set():
        return True
    return deadline is not None and time.monotonic() >= deadline


class _Collector:
    """Thread-safe best-solution-per-rendered-trace store."""

    def __init__(self, top_k):
        self.top_k = top_k
        self.lock = threading.Lock()
        self.best = {}
        self.ticket = itertools.count()

    def stamp(self):
        with self.lock:
            return next(self.ticket)

    def offer(self, solution):
        with self.lock:
            key = solution.trace
            cur = self.best.get(key)
            if cur is None or _sort_key(solution) < _sort_key(cur):
                self.best[key] = solution

    def count(self):
        with self.lock:
            return len(self.best)

    def cutoff(self):
        """Rank that a candidate must beat to still matter, or None."""
        with self.lock:
            if len(self.best) < self.top_k:
                return None
            sizes = sorted(s.size for s in self.best.values())
            return sizes[self.top_k - 1]

    def ranked(self):
        with self.lock:
            return rank(self.best.values())


def _sort_key(solution):
    return (solution.size, solution.n_layers, solution.order)


class _AnyEvent:
    """Union of cancellation signals, usable wherever one event is expected."""

    def __init__(self, *events):
        self.events = [e for e in events if e is not None]

    def is_set(self):
        return any(e.is_set() for e in self.events)


def _run_queue(queue, tasks, sketch, collector, deadline, cancel, lock, stats, stop):
    while True:
        with lock:
            if stop.is_set() or _expired(deadline, cancel) or not queue:
                return
            index = queue.popleft()
        task = tasks[index]
        combo = task.next()
        if combo is None:
            continue
        with lock:
            stats["combos"] += 1
        solution = _combine(task, combo, sketch)
        if solution is not None:
            solution = replace(solution, order=(task.index, collector.stamp()))
            collector.offer(solution)
            with lock:
                stats["accepted"] += 1
            if collector.count() >= collector.top_k:
                stop.set()
                return
        with lock:
            queue.append(index)


def synthesize(
    tables: dict,
    sketch: VisualTrace,
    *,
    budget: float = DEFAULT_BUDGET,
    top_k: int = DEFAULT_TOP_K,
    max_stmts: int = DEFAULT_MAX_STMTS,
    prune: bool = True,
    workers: int = 1,
    cancel=None,
    stats: dict = None,
) -> list:
    """Ranked verified solutions, stopping at the budget or at top_k outputs."""
    if len(sketch) == 0:
        raise UsageError("sketch must contain at least one element")
    if top_k < 1:
        raise UsageError("top_k must be at least 1")
    if not tables:
        raise UsageError("at least one input table is required")
    for name, t in tables.items():
        if not isinstance(t, Table):
            raise UsageError(f"input {name!r} is not a table")
    if stats is None:
        stats = {}
    for key in SOLVE_STAT_KEYS:
        stats.setdefault(key, 0)
    if budget is not None and budget <= 0:
        return []
    deadline = None if budget is None else time.monotonic() + float(budget)

    avoid = set()
    for t in tables.values():
        avoid.update(t.columns)
    candidates = learn_visual_programs(sketch, avoid=avoid)
    stats["viz_candidates"] += len(candidates)
    if not candidates:
        return []

    collector = _Collector(top_k)
    stop = threading.Event()
    halt = _AnyEvent(cancel, stop)
    tasks = [
        _Candidate(
            i, cand, tables, max_stmts, prune, deadline, halt, collector.cutoff
        )
        for i, cand in enumerate(candidates)
    ]
    queue = deque(task.index for task in tasks)
    lock = threading.Lock()

    if workers <= 1:
        _run_queue(queue, tasks, sketch, collector, deadline, cancel, lock, stats, stop)
    else:
        threads = [
            threading.Thread(
                target=_run_queue,
                args=(queue, tasks, sketch, collector, deadline, cancel, lock,
                      stats, stop),
            )
            for _ in range(workers)
        ]
        for th in threads:
            th.start()
        for th in threads:
            th.join()

    for task in tasks:
        for key in STAT_KEYS:
            stats[key] += task.table_stats.get(key, 0)
    return collector.ranked()[:top_k]
