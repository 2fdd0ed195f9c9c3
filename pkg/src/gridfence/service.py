"""Embedded HTTP service for the solver pipeline.

JSON-only API consumed by scripts and the companion browser UI:

    POST   /api/datasets              upload CSV text or a synth config
    GET    /api/datasets              list dataset summaries
    GET    /api/datasets/{id}/grid    density matrix at a requested level
    POST   /api/solve                 discrete solve (async, returns run_id)
    POST   /api/solve/circular        circular baseline solve (async)
    GET    /api/runs                  run summaries, newest first
    GET    /api/runs/{id}             full run record
    DELETE /api/runs/{id}
    GET    /api/schema                request schemas for client validation

Runs and datasets persist as flat JSON/CSV files under the state directory,
so a restarted service still serves every completed run. All solve requests
carry an explicit seed; the result payload inside a run record is the same
canonical form the CLI prints, byte for byte.
"""

from __future__ import annotations

import io
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .circular import CircularParams
from .ingest import PoiCell, normalize, parse_trajectories, poi_to_cell, write_csv
from .model import ModelFlags, Weights
from .pipeline import (
    CircularConfig,
    DiscreteConfig,
    IngestOptions,
    load_trajectories,
    normalize_poi,
    prepare_grid,
    run_circular,
    run_discrete,
    window_from_pct,
)
from .serialize import (
    circular_result_to_dict,
    coverage_report_to_dict,
    grid_to_dict,
    solve_result_to_dict,
)
from .solvers import InfeasibleModelError, SolverError

DEFAULT_STATE_DIR = "./gridfence_state"


class SynthSpec(BaseModel):
    preset: Literal["data1", "data2"] | None = None
    n: int = Field(9, ge=2, le=64)
    thin_p: float = Field(0.3, ge=0.0, lt=1.0)
    m: int = Field(60, ge=1, le=5000)
    noise_std: float = Field(0.01, ge=0.0, le=0.2)
    k_pois: int = Field(2, ge=1, le=16)
    seed: int = 0


class IngestSpec(BaseModel):
    has_header: bool = False
    latlon: bool = False
    region_center: tuple[float, float] | None = None
    region_radius: float | None = Field(None, gt=0)
    min_points: int | None = Field(None, ge=1)


class DatasetRequest(BaseModel):
    name: str | None = None
    csv_text: str | None = None
    synth: SynthSpec | None = None
    ingest: IngestSpec = IngestSpec()

    @model_validator(mode="after")
    def _one_source(self):
        if (self.csv_text is None) == (self.synth is None):
            raise ValueError("provide exactly one of csv_text or synth")
        return self


class WeightsModel(BaseModel):
    a_area: float = Field(1.0, ge=0.0, le=1000.0)
    a_cover: float = Field(60.0, ge=0.0, le=1000.0)
    a_2dw: float = Field(1.0, ge=0.0, le=1000.0)
    a_ng: float = Field(1.0, ge=0.0, le=1000.0)
    alpha: float = Field(0.5, gt=0.0, le=10.0)
    sigma: float = Field(0.5, gt=0.0, le=10.0)


class WindowModel(BaseModel):
    """Area window as percent of all grid cells."""

    min_pct: float = Field(12.0, ge=0.0, le=100.0)
    max_pct: float = Field(15.0, ge=0.0, le=100.0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.min_pct > self.max_pct:
            raise ValueError("min_pct must be <= max_pct")
        return self


class FlagsModel(BaseModel):
    poi_hard: bool = False
    dw_directions: list[Literal["RD", "LU", "RU", "LD"]] = ["RD", "LU"]
    forbidden_cells: list[tuple[int, int]] = []

    @model_validator(mode="after")
    def _nonempty(self):
        if not self.dw_directions:
            raise ValueError("dw_directions must be non-empty")
        return self


class SolveRequest(BaseModel):
    dataset_id: str
    d: int = Field(4, ge=1, le=7)
    poi: tuple[float, float] | None = None
    poi_cell: tuple[int, int] | None = None
    weights: WeightsModel = WeightsModel()
    window: WindowModel | None = WindowModel()
    flags: FlagsModel = FlagsModel()
    solver: Literal["exact", "anneal", "hier"] = "anneal"
    seed: int
    sweeps: int | None = Field(None, ge=1, le=100_000_000)
    restarts: int = Field(8, ge=1, le=64)
    d_coarse: int | None = Field(None, ge=1, le=6)
    normalization: Literal["peak", "total"] = "peak"

    @model_validator(mode="after")
    def _poi_given(self):
        if (self.poi is None) == (self.poi_cell is None):
            raise ValueError("provide exactly one of poi or poi_cell")
        return self


class CircularSolveRequest(BaseModel):
    dataset_id: str
    poi: tuple[float, float]
    cr_limit: float = Field(0.5, ge=0.0, le=1.0)
    mu: float = Field(10.0, ge=0.0, le=1000.0)
    cover_oriented: bool = False
    r_star: float | None = Field(None, gt=0.0, le=1.0)
    epsilon: float = Field(0.01, gt=0.0, le=0.5)
    population: int = Field(64, ge=4, le=512)
    generations: int = Field(300, ge=1, le=5000)
    seed: int

    @model_validator(mode="after")
    def _cover_needs_radius(self):
        if self.cover_oriented and self.r_star is None:
            raise ValueError("cover_oriented requires r_star")
        return self


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class _Store:
    """Datasets and run records: memory-first with flat-file persistence."""

    def __init__(self, root: Path) -> None:
        self.root = root
        (root / "datasets").mkdir(parents=True, exist_ok=True)
        (root / "runs").mkdir(parents=True, exist_ok=True)
        self.lock = threading.Lock()
        self.datasets: dict[str, dict] = {}
        self.runs: dict[str, dict] = {}
        for meta in sorted((root / "datasets").glob("*.meta.json")):
            doc = json.loads(meta.read_text())
            self.datasets[doc["id"]] = doc
        for rec in sorted((root / "runs").glob("*.json")):
            doc = json.loads(rec.read_text())
            self.runs[doc["run_id"]] = doc

    def dataset_csv(self, dataset_id: str) -> Path:
        return self.root / "datasets" / f"{dataset_id}.csv"

    def add_dataset(self, meta: dict, csv_body: str) -> None:
        with self.lock:
            self.dataset_csv(meta["id"]).write_text(csv_body)
            path = self.root / "datasets" / f"{meta['id']}.meta.json"
            path.write_text(json.dumps(meta, sort_keys=True))
            self.datasets[meta["id"]] = meta

    def add_run(self, record: dict) -> None:
        with self.lock:
            self.runs[record["run_id"]] = record

    def update_run(self, run_id: str, **fields) -> None:
        with self.lock:
            rec = self.runs[run_id]
            rec.update(fields)
            if rec["status"] in ("done", "failed"):
                path = self.root / "runs" / f"{run_id}.json"
                path.write_text(json.dumps(rec, sort_keys=True))

    def delete_run(self, run_id: str) -> bool:
        with self.lock:
            if run_id not in self.runs:
                return False
            del self.runs[run_id]
            path = self.root / "runs" / f"{run_id}.json"
            if path.exists():
                path.unlink()
            return True


def _run_summary(rec: dict) -> dict:
    return {
        "run_id": rec["run_id"],
        "kind": rec["kind"],
        "status": rec["status"],
        "dataset_id": rec["request"].get("dataset_id"),
        "created_at": rec["created_at"],
        "error": rec.get("error"),
    }


def create_app(state_dir: str | None = None) -> FastAPI:
    root = Path(state_dir or os.environ.get("GRIDFENCE_STATE_DIR") or DEFAULT_STATE_DIR)
    store = _Store(root)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(max_workers=4)
        yield
        app.state.executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="gridfence", version=__version__, lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    def _dataset_or_404(dataset_id: str) -> dict:
        meta = store.datasets.get(dataset_id)
        if meta is None:
            raise HTTPException(404, f"unknown dataset {dataset_id}")
        if meta.get("status") != "ready":
            raise HTTPException(409, f"dataset {dataset_id} still processing")
        return meta

    def _load_dataset(dataset_id: str):
        text = store.dataset_csv(dataset_id).read_text()
        return parse_trajectories(io.StringIO(text))

    @app.post("/api/datasets")
    def create_dataset(req: DatasetRequest) -> dict:
        dataset_id = "ds-" + uuid.uuid4().hex[:12]
        pois = None
        try:
            if req.synth is not None:
                from .synth import PRESETS, SynthConfig, build_dataset

                cfg = (
                    PRESETS[req.synth.preset]
                    if req.synth.preset
                    else SynthConfig(
                        n=req.synth.n, thin_p=req.synth.thin_p, m=req.synth.m,
                        noise_std=req.synth.noise_std, k_pois=req.synth.k_pois,
                        seed=req.synth.seed,
                    )
                )
                data, pois = build_dataset(cfg)
                name = req.name or (req.synth.preset or "synth")
            else:
                opts = IngestOptions(
                    has_header=req.ingest.has_header,
                    latlon=req.ingest.latlon,
                    region_center=req.ingest.region_center,
                    region_radius=req.ingest.region_radius,
                    min_points=req.ingest.min_points,
                )
                data = load_trajectories(io.StringIO(req.csv_text), opts)
                name = req.name or "upload"
        except ValueError as e:
            raise HTTPException(400, str(e)) from None
        buf = io.StringIO()
        write_csv(data, buf)
        _, bbox = normalize(data)
        meta = {
            "id": dataset_id,
            "name": name,
            "status": "ready",
            "n_users": len(data),
            "n_points": data.n_points,
            "bbox": list(bbox),
            "pois": [list(p) for p in pois] if pois else None,
            "created_at": _now(),
        }
        store.add_dataset(meta, buf.getvalue())
        return meta

    @app.get("/api/datasets")
    def list_datasets() -> list[dict]:
        return sorted(store.datasets.values(), key=lambda m: m["created_at"])

    @app.get("/api/datasets/{dataset_id}/grid")
    def dataset_grid(dataset_id: str, d: int = 4, normalization: str = "peak") -> dict:
        meta = _dataset_or_404(dataset_id)
        if not 1 <= d <= 7:
            raise HTTPException(400, "d must be in [1, 7]")
        if normalization not in ("peak", "total"):
            raise HTTPException(400, "normalization must be peak or total")
        data = _load_dataset(dataset_id)
        grid, _ = prepare_grid(data, d, normalization)
        doc = grid_to_dict(grid)
        doc["pois"] = meta.get("pois")
        return doc

    def _precheck_window(req: SolveRequest) -> None:
        if req.window is None:
            return
        n = (2**req.d) ** 2
        window = window_from_pct(n, req.window.min_pct / 100, req.window.max_pct / 100)
        n_fixed1 = 1 if req.flags.poi_hard else 0
        n_forbidden = len(set(map(tuple, req.flags.forbidden_cells)))
        if window.max_cells < n_fixed1:
            raise HTTPException(422, "window max_cells excludes the pinned POI cell; "
                                     "raise max_pct or drop poi_hard")
        if window.min_cells > n - n_forbidden:
            raise HTTPException(422, "window min_cells exceeds the available cells; "
                                     "relax the window or the forbidden set")

    def _worker_discrete(run_id: str, req: SolveRequest) -> None:
        try:
            store.update_run(run_id, status="running")
            data = _load_dataset(req.dataset_id)
            cfg = DiscreteConfig(
                d=req.d,
                weights=Weights(**req.weights.model_dump()),
                window_pct=(
                    None if req.window is None
                    else (req.window.min_pct / 100, req.window.max_pct / 100)
                ),
                flags=ModelFlags(
                    poi_hard=req.flags.poi_hard,
                    dw_directions=frozenset(req.flags.dw_directions),
                    forbidden_cells=frozenset(map(tuple, req.flags.forbidden_cells)),
                ),
                solver=req.solver,
                seed=req.seed,
                d_coarse=req.d_coarse,
                sweeps=req.sweeps,
                restarts=req.restarts,
                normalization=req.normalization,
            )
            grid, norm = prepare_grid(data, cfg.d, cfg.normalization)
            if req.poi_cell is not None:
                poi = PoiCell(*req.poi_cell)
                if not (0 <= poi.row < grid.spec.L and 0 <= poi.col < grid.spec.L):
                    raise ValueError(f"poi_cell {req.poi_cell} outside the {grid.spec.L}^2 grid")
            else:
                poi = poi_to_cell(req.poi, grid.spec.bbox, cfg.d)
            result = run_discrete(grid, poi, cfg)
            from .evaluation import coverage_report

            metrics = coverage_report(result.x, norm)
            store.update_run(
                run_id,
                status="done",
                result=solve_result_to_dict(result),
                metrics=coverage_report_to_dict(metrics),
                wall_time=result.wall_time,
                poi_cell=[poi.row, poi.col],
            )
        except (ValueError, SolverError, InfeasibleModelError) as e:
            store.update_run(run_id, status="failed", error=str(e))

    def _worker_circular(run_id: str, req: CircularSolveRequest) -> None:
        try:
            store.update_run(run_id, status="running")
            data = _load_dataset(req.dataset_id)
            norm, bbox = normalize(data)
            poi_norm = normalize_poi(req.poi, bbox)
            cfg = CircularConfig(
                params=CircularParams(
                    cr_limit=req.cr_limit, mu=req.mu, seed=req.seed,
                    population=req.population, generations=req.generations,
                ),
                cover_oriented=req.cover_oriented,
                r_star=req.r_star,
                epsilon=req.epsilon,
            )
            g, objective, coverage = run_circular(norm, poi_norm, cfg)
            from .evaluation import coverage_report

            metrics = coverage_report(g, norm)
            store.update_run(
                run_id,
                status="done",
                result=circular_result_to_dict(g, objective, coverage),
                metrics=coverage_report_to_dict(metrics),
            )
        except (ValueError, SolverError) as e:
            store.update_run(run_id, status="failed", error=str(e))

    def _launch(kind: str, req, worker) -> dict:
        run_id = "run-" + uuid.uuid4().hex[:12]
        record = {
            "run_id": run_id,
            "kind": kind,
            "status": "queued",
            "request": req.model_dump(),
            "result": None,
            "metrics": None,
            "error": None,
            "created_at": _now(),
        }
        store.add_run(record)
        app.state.executor.submit(worker, run_id, req)
        return record

    @app.post("/api/solve")
    def solve_discrete_endpoint(req: SolveRequest) -> dict:
        _dataset_or_404(req.dataset_id)
        _precheck_window(req)
        return _launch("discrete", req, _worker_discrete)

    @app.post("/api/solve/circular")
    def solve_circular_endpoint(req: CircularSolveRequest) -> dict:
        _dataset_or_404(req.dataset_id)
        return _launch("circular", req, _worker_circular)

    @app.get("/api/runs")
    def list_runs() -> list[dict]:
        with store.lock:
            recs = list(store.runs.values())
        return [
            _run_summary(r)
            for r in sorted(recs, key=lambda r: r["created_at"], reverse=True)
        ]

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        rec = store.runs.get(run_id)
        if rec is None:
            raise HTTPException(404, f"unknown run {run_id}")
        return rec

    @app.delete("/api/runs/{run_id}")
    def delete_run(run_id: str) -> dict:
        if not store.delete_run(run_id):
            raise HTTPException(404, f"unknown run {run_id}")
        return {"deleted": run_id}

    @app.get("/api/schema")
    def schema() -> dict:
        return {
            "version": __version__,
            "dataset": DatasetRequest.model_json_schema(),
            "solve": SolveRequest.model_json_schema(),
            "solve_circular": CircularSolveRequest.model_json_schema(),
        }

    return app
