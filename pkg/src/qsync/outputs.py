"""Writing run and scenario results to an output directory."""

from __future__ import annotations

import json
from pathlib import Path

from .formats import atomic_write, write_trajectory
from .plotting import save_correlation_plane, save_overview


def _trajectory_name(key: str) -> str:
    return "trajectory.csv" if key == "main" else f"trajectory_{key}.csv"


def write_run_outputs(out_dir, runs: dict, title: str = "", formats=("csv", "png")) -> dict:
    """Write each run's frames as CSV and draw figures; returns name -> path."""
    out = Path(out_dir)
    files = {}
    for key, frames in runs.items():
        if not frames:
            continue
        if "csv" in formats:
            files[_trajectory_name(key)] = str(write_trajectory(out / _trajectory_name(key), frames))
    main = runs.get("main")
    if main and "png" in formats:
        files["overview.png"] = str(save_overview(main, out / "overview.png", title))
        if main[0].n_osc == 2:
            files["correlation_plane.png"] = str(
                save_correlation_plane(main, out / "correlation_plane.png", runs.get("reduced"), title)
            )
    return files


def write_json(path, payload) -> Path:
    return atomic_write(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")


def write_scenario_outputs(report, out_dir, formats=("csv", "png")) -> dict:
    out = Path(out_dir)
    files = write_run_outputs(out, report.runs, report.scenario, formats)
    files["report.json"] = str(out / "report.json")
    report.files = files
    write_json(out / "report.json", report.to_dict())
    return files
