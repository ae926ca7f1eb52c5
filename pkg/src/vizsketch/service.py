"""HTTP front end for the synthesis engine.

``POST /synthesize`` takes a task document (inline tables only; file
references are rejected) and returns the same result body the command
line produces for the same payload and seed, since both go through one
engine path and one serializer.  ``GET /health`` and ``GET /version``
report liveness and the engine build.

The engine runs on a worker thread while the request handler watches for
client disconnects; a dropped connection cancels the search within a
second.  At most ``max_concurrent`` syntheses run at once, further
requests get 429.  Tables past the cell cap get 413 before any search
starts.
"""

from __future__ import annotations

import asyncio
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import __version__
from .errors import VizSketchError
from .synthesis import synthesize
from .taskio import dump_result, result_to_json, task_from_json

MAX_CELLS = 1_000_000
DISCONNECT_POLL_S = 0.05


def _payload_cells(payload) -> int:
    """Upper bound on the largest table's cell count, straight off the
    raw payload so oversized inputs are rejected before canonicalization."""
    worst = 0
    tables = payload.get("tables") if isinstance(payload, dict) else None
    if not isinstance(tables, dict):
        return 0
    for value in tables.values():
        if not isinstance(value, dict):
            continue
        columns = value.get("columns")
        rows = value.get("rows")
        if isinstance(columns, list) and isinstance(rows, list):
            worst = max(worst, len(columns) * len(rows))
    return worst


def create_app(max_concurrent: int = 4) -> FastAPI:
    app = FastAPI(title="vizsketch", version=__version__)
    gate = threading.Semaphore(max_concurrent)

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.get("/version")
    async def version():
        return {"name": "vizsketch", "version": __version__}

    @app.post("/synthesize")
    async def run_synthesis(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if _payload_cells(payload) > MAX_CELLS:
            return JSONResponse(
                {"error": f"table exceeds {MAX_CELLS} cells"}, status_code=413
            )
        if not gate.acquire(blocking=False):
            return JSONResponse(
                {"error": "too many concurrent requests"}, status_code=429
            )
        try:
            try:
                task = task_from_json(payload)
            except VizSketchError as exc:
                return JSONResponse({"error": str(exc)}, status_code=400)

            cancel = threading.Event()
            box: dict = {}

            def work():
                try:
                    box["solutions"] = synthesize(
                        task.tables,
                        task.sketch,
                        budget=task.options["budget"],
                        top_k=task.options["top_k"],
                        max_stmts=task.options["max_stmts"],
                        cancel=cancel,
                    )
                except Exception as exc:
                    box["error"] = exc

            worker = threading.Thread(target=work, daemon=True)
            worker.start()
            while worker.is_alive():
                if await request.is_disconnected():
                    cancel.set()
                    break
                await asyncio.sleep(DISCONNECT_POLL_S)
            await asyncio.to_thread(worker.join)
            if cancel.is_set():
                return Response(status_code=204)
            if "error" in box:
                exc = box["error"]
                if isinstance(exc, VizSketchError):
                    return JSONResponse({"error": str(exc)}, status_code=400)
                raise exc
            body = dump_result(result_to_json(task.options, box["solutions"]))
            return Response(content=body, media_type="application/json")
        finally:
            gate.release()

    return app
