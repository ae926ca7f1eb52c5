#!/usr/bin/env python3
"""Build the frontend test fixtures by running the engine CLI.

Everything here goes through the public surface only: task files in,
result files out.  Two fixture groups are produced under tests/fixtures:

  sec2_task.json / sec2_result.json
      The two-table running example; the UI parity test checks that the
      first gallery card shows exactly the first-ranked spec from here.

  refine/<case>_{n4,n8}_{task,result}.json
      Every bundled benchmark case as shipped (its sketch is the n=4
      sample) and an extended variant with up to four more elements
      drawn from the ground-truth target.  The refinement test replays
      a user adding those elements and checks the target's rank.

Run from the frontend directory with the engine installed:

    python3 scripts/make_fixtures.py
"""

import json
import os
import random
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.normpath(os.path.join(HERE, "..", "tests", "fixtures"))
SUITE = os.path.normpath(os.path.join(HERE, "..", "..", "benchmarks", "mini"))

SEC2_TASK = {
    "name": "sec2_example",
    "tables": {
        "scores": {
            "columns": ["ID", "Cond", "A", "Aneg"],
            "rows": [
                [1, 1, 4, 3],
                [2, 2, 2, 4],
                [3, 1, 5, 1],
                [4, 2, 3, 1],
            ],
        },
        "people": {
            "columns": ["ID", "Gender"],
            "rows": [[1, "M"], [2, "M"], [3, "F"], [4, "F"]],
        },
    },
    "sketch": [
        {"kind": "point", "x": 1, "y": 7, "color": "M"},
        {"kind": "point", "x": 2, "y": 6, "color": "M"},
    ],
    "options": {"budget": 30.0, "top_k": 10, "max_stmts": 2, "seed": 0},
}

EXTRA_ELEMENTS = 4


def run_synth(task_path: str, result_path: str) -> None:
    proc = subprocess.run(
        ["vizsketch", "synth", task_path, "--out", result_path],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        sys.exit(
            f"synth failed on {task_path} (exit {proc.returncode}):\n{proc.stderr}"
        )


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def element_id(element: dict) -> str:
    return json.dumps(element, sort_keys=True)


def extend_sketch(task: dict, rng: random.Random) -> list:
    """The shipped sketch plus up to four more target elements.

    The target is a bag, so each sketch element consumes one matching
    occurrence; whatever remains is the pool the extra elements come
    from, sampled in a stable order.
    """
    pool = [dict(e) for e in task["target"]]
    pool_ids = [element_id(e) for e in pool]
    for e in task["sketch"]:
        eid = element_id(e)
        if eid not in pool_ids:
            sys.exit(f"{task['name']}: sketch element not found in target: {eid}")
        at = pool_ids.index(eid)
        del pool[at], pool_ids[at]
    take = min(EXTRA_ELEMENTS, len(pool))
    picked = sorted(rng.sample(range(len(pool)), take))
    return list(task["sketch"]) + [pool[i] for i in picked]


def main() -> None:
    os.makedirs(FIXTURES, exist_ok=True)
    refine_dir = os.path.join(FIXTURES, "refine")
    os.makedirs(refine_dir, exist_ok=True)

    sec2_task = os.path.join(FIXTURES, "sec2_task.json")
    write_json(sec2_task, SEC2_TASK)
    run_synth(sec2_task, os.path.join(FIXTURES, "sec2_result.json"))
    print("sec2 fixture done")

    cases = sorted(
        name[:-5] for name in os.listdir(SUITE) if name.endswith(".json")
    )
    for case in cases:
        with open(os.path.join(SUITE, f"{case}.json"), encoding="utf-8") as fh:
            task = json.load(fh)
        if task.get("target") is None:
            sys.exit(f"{case}: no target trace, cannot build refine fixtures")

        n4 = dict(task, name=f"{case}_n4")
        n8 = dict(
            task,
            name=f"{case}_n8",
            sketch=extend_sketch(task, random.Random(f"refine:{case}")),
        )
        for tag, doc in (("n4", n4), ("n8", n8)):
            task_path = os.path.join(refine_dir, f"{case}_{tag}_task.json")
            write_json(task_path, doc)
            run_synth(
                task_path, os.path.join(refine_dir, f"{case}_{tag}_result.json")
            )
        print(f"{case}: n4 sketch {len(n4['sketch'])}, n8 sketch {len(n8['sketch'])}")

    write_json(os.path.join(FIXTURES, "index.json"), {"cases": cases})
    print(f"{len(cases)} cases done")


if __name__ == "__main__":
    main()
