"""Benchmark harness over directories of task files.

Each task file must carry a ``target`` trace (the ground truth).  For
every case the harness samples a sketch from the target, runs the
synthesizer under each budget, and records whether some returned
solution's rendering contains the full target along with the rank of the
first one that does.  Reports aggregate solved counts by budget and
top-k counts by sketch size, written as a CSV plus rendered figures.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

from .synthesis import sample_sketch, synthesize
from .taskio import Task, load_task
from .trace import trace_contains

RANK_THRESHOLDS = (1, 5, 10)


@dataclass(frozen=True)
class CaseResult:
    """Outcome of one (case, sketch size, budget) run."""

    case: str
    n: int
    budget: float
    wall_time: float
    n_solutions: int
    target_rank: int | None

    @property
    def solved(self) -> bool:
        return self.target_rank is not None


def load_suite(path: str) -> tuple[list[Task], list[str]]:
    """Load every ``*.json`` task under ``path``.

    Returns the tasks that carry a ground-truth target, plus the names of
    files skipped for lacking one.  Files are taken in sorted order so
    runs are reproducible.
    """
    tasks, skipped = [], []
    names = sorted(n for n in os.listdir(path) if n.endswith(".json"))
    for name in names:
        task = load_task(os.path.join(path, name))
        if task.target is None:
            skipped.append(task.name)
        else:
            tasks.append(task)
    return tasks, skipped


def run_case(
    task: Task,
    *,
    n: int,
    seed: int,
    budget: float,
    prune: bool = True,
    workers: int = 1,
) -> CaseResult:
    """Run one case: sample a sketch of ``n`` per layer, then synthesize."""
    sketch = sample_sketch(task.target, n, seed=seed)
    options = task.options
    start = time.monotonic()
    solutions = synthesize(
        task.tables,
        sketch,
        budget=budget,
        top_k=options["top_k"],
        max_stmts=options["max_stmts"],
        prune=prune,
        workers=workers,
    )
    wall_time = time.monotonic() - start
    rank = None
    for i, solution in enumerate(solutions, start=1):
        if trace_contains(task.target, solution.trace):
            rank = i
            break
    return CaseResult(
        case=task.name,
        n=n,
        budget=budget,
        wall_time=wall_time,
        n_solutions=len(solutions),
        target_rank=rank,
    )


def run_suite(
    tasks: list,
    *,
    budgets: tuple,
    ns: tuple,
    seed: int = 0,
    prune: bool = True,
    progress=None,
) -> list:
    """Run every case under every (sketch size, budget) combination."""
    results = []
    for task in tasks:
        for n in ns:
            for budget in budgets:
                result = run_case(task, n=n, seed=seed, budget=budget, prune=prune)
                results.append(result)
                if progress is not None:
                    progress(result)
    return results


def write_csv(results: list, path: str) -> None:
    """Write one row per run, sorted for reproducible diffs."""
    rows = sorted(results, key=lambda r: (r.case, r.n, r.budget))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["case", "n", "budget", "wall_time", "n_solutions", "target_rank", "solved"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.case,
                    r.n,
                    f"{r.budget:g}",
                    f"{r.wall_time:.3f}",
                    r.n_solutions,
                    "" if r.target_rank is None else r.target_rank,
                    int(r.solved),
                ]
            )


def solved_by_budget(results: list) -> dict:
    """Count solved cases per (sketch size, budget) cell."""
    counts = {}
    for r in results:
        key = (r.n, r.budget)
        counts[key] = counts.get(key, 0) + int(r.solved)
    return counts


def topk_by_n(results: list) -> dict:
    """Count cases whose target ranks within each threshold, at the
    largest budget present, keyed by sketch size."""
    if not results:
        return {}
    top_budget = max(r.budget for r in results)
    counts = {}
    for r in results:
        if r.budget != top_budget:
            continue
        row = counts.setdefault(r.n, [0] * len(RANK_THRESHOLDS))
        if r.target_rank is None:
            continue
        for i, k in enumerate(RANK_THRESHOLDS):
            if r.target_rank <= k:
                row[i] += 1
    return {n: tuple(row) for n, row in counts.items()}


def format_tables(results: list) -> str:
    """Human-readable aggregate tables for the report."""
    cases = sorted({r.case for r in results})
    ns = sorted({r.n for r in results})
    budgets = sorted({r.budget for r in results})
    lines = [f"cases: {len(cases)}"]

    by_budget = solved_by_budget(results)
    lines.append("")
    lines.append("solved by budget (seconds):")
    header = "  n \\ budget " + "".join(f"{b:>8g}" for b in budgets)
    lines.append(header)
    for n in ns:
        row = "".join(f"{by_budget.get((n, b), 0):>8d}" for b in budgets)
        lines.append(f"  n={n:<9d}" + row)

    by_n = topk_by_n(results)
    lines.append("")
    lines.append(f"target rank at budget {max(budgets):g}s:")
    lines.append("  n \\ rank   " + "".join(f"{f'<={k}':>8s}" for k in RANK_THRESHOLDS))
    for n in ns:
        row = "".join(f"{c:>8d}" for c in by_n.get(n, (0,) * len(RANK_THRESHOLDS)))
        lines.append(f"  n={n:<9d}" + row)
    return "\n".join(lines) + "\n"


def write_figures(results: list, out_dir: str) -> list:
    """Render the two report figures next to the CSV; return their paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ns = sorted({r.n for r in results})
    budgets = sorted({r.budget for r in results})
    n_cases = len({r.case for r in results})
    by_budget = solved_by_budget(results)
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for n in ns:
        ys = [by_budget.get((n, b), 0) for b in budgets]
        ax.plot(budgets, ys, marker="o", label=f"n={n}")
    if budgets and min(budgets) > 0 and max(budgets) / max(min(budgets), 1e-9) >= 100:
        ax.set_xscale("log")
    ax.set_xlabel("budget (s)")
    ax.set_ylabel("cases solved")
    ax.set_ylim(0, max(n_cases, 1) + 0.5)
    ax.set_title("Cases solved per time budget")
    ax.legend()
    ax.grid(True, alpha=0.3)
    path = os.path.join(out_dir, "solved_by_budget.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)

    by_n = topk_by_n(results)
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / max(len(RANK_THRESHOLDS), 1)
    for i, k in enumerate(RANK_THRESHOLDS):
        xs = [j + i * width for j in range(len(ns))]
        ys = [by_n.get(n, (0,) * len(RANK_THRESHOLDS))[i] for n in ns]
        ax.bar(xs, ys, width=width, label=f"rank <= {k}")
    ax.set_xticks([j + width for j in range(len(ns))])
    ax.set_xticklabels([f"n={n}" for n in ns])
    ax.set_ylabel("cases")
    ax.set_ylim(0, max(n_cases, 1) + 0.5)
    ax.set_title("Target rank by sketch size")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    path = os.path.join(out_dir, "target_rank.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)
    return paths


def write_report(results: list, out_dir: str) -> dict:
    """Write CSV, figures, and the aggregate text into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    write_csv(results, csv_path)
    figure_paths = write_figures(results, out_dir)
    summary = format_tables(results)
    summary_path = os.path.join(out_dir, "summary.txt")
    with open(summary_path, "w", encoding="utf-8") as handle:
        handle.write(summary)
    return {
        "csv": csv_path,
        "figures": figure_paths,
        "summary": summary_path,
        "text": summary,
    }
