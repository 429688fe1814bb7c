#!/usr/bin/env python3
"""Regenerate test/fixtures/five_city_graph.json from the Python pipeline.

Run from the repository root with the package installed:
    python3 frontend/scripts/make-fixture.py
"""

import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, os.path.join(ROOT, "tests"))

from helpers import CITY_INDICES, write_chain_csvs  # noqa: E402
from mapper_scope.cli import run_pipeline  # noqa: E402
from mapper_scope.config import validate_config  # noqa: E402


def main() -> None:
    tmp = tempfile.mkdtemp()
    data = write_chain_csvs(
        os.path.join(tmp, "data"), months=213, count=88,
        cities=CITY_INDICES, scale=0.008, onset=60,
    )
    config = validate_config(
        {
            "dataset": {
                "kind": "spatiotemporal",
                "deaths": data["deaths"],
                "centroids": data["centroids"],
            },
            "filter": ["month", "latitude", "longitude", "cumulative_deaths"],
            "cover": {"n": 8, "p": 0.10},
            "cluster": {"eps": 3.0, "min_samples": 1},
            "colors": ["month", "cumulative_deaths", "latitude"],
            "layout": {"seed": 42, "iterations": 60},
        }
    )
    artifacts = run_pipeline(config, os.path.join(tmp, "out"))
    target = os.path.join(ROOT, "frontend", "test", "fixtures", "five_city_graph.json")
    os.makedirs(os.path.dirname(target), exist_ok=True)
    shutil.copy(artifacts.graph_json, target)
    shutil.rmtree(tmp)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
