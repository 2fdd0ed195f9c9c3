"""Record HTTP API payloads as fixtures for the browser studio's test suite.

Runs the service in-process against a throwaway state directory, executes the
default tuning flow on preset data1 (grid fetch, discrete solve at guideline
defaults, equal-area cover-oriented circular baseline), and writes the raw
JSON responses under frontend/tests/fixtures/. The studio's vitest suite
replays these payloads instead of talking to a live server.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from gridfence.ingest import poi_to_cell
from gridfence.service import create_app

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"


def wait_run(client: TestClient, run_id: str, timeout: float = 180.0) -> dict:
    t0 = time.monotonic()
    while time.monotonic() - t0 < timeout:
        rec = client.get(f"/api/runs/{run_id}").json()
        if rec["status"] in ("done", "failed"):
            return rec
        time.sleep(0.05)
    raise RuntimeError(f"run {run_id} did not finish within {timeout}s")


def dump(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=FIXTURE_DIR)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp, TestClient(create_app(tmp)) as client:
        dump(args.out_dir / "schema.json", client.get("/api/schema").json())

        meta = client.post(
            "/api/datasets", json={"synth": {"preset": "data1"}}
        ).json()
        d = 4
        grid = client.get(f"/api/datasets/{meta['id']}/grid", params={"d": d}).json()
        dump(args.out_dir / "grid_data1_d4.json", grid)

        poi = tuple(meta["pois"][1])
        cell = poi_to_cell(poi, tuple(meta["bbox"]), d)
        resp = client.post(
            "/api/solve",
            json={
                "dataset_id": meta["id"],
                "d": d,
                "poi_cell": [cell.row, cell.col],
                "seed": args.seed,
            },
        )
        resp.raise_for_status()
        disc = wait_run(client, resp.json()["run_id"])
        if disc["status"] != "done":
            print(f"discrete run failed: {disc['error']}", file=sys.stderr)
            return 1
        dump(args.out_dir / "run_discrete.json", disc)

        n_sel = sum(sum(row) for row in disc["result"]["x"])
        l2 = (2**d) ** 2
        r_star = math.sqrt(n_sel / l2 / math.pi)
        resp = client.post(
            "/api/solve/circular",
            json={
                "dataset_id": meta["id"],
                "poi": list(poi),
                "cover_oriented": True,
                "r_star": r_star,
                "epsilon": 0.01,
                "seed": args.seed,
            },
        )
        resp.raise_for_status()
        circ = wait_run(client, resp.json()["run_id"])
        if circ["status"] != "done":
            print(f"circular run failed: {circ['error']}", file=sys.stderr)
            return 1
        dump(args.out_dir / "run_circular.json", circ)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
