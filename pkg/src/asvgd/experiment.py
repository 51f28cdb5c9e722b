"""Run experiments from configs and write their artifacts.

A single run directory holds

* ``particles.csv``: ``iter, particle_id, x_0..x_{d-1}`` (every checkpoint
  when the trajectory is emitted, otherwise the final state only);
* ``diagnostics.csv``: ``iter, gamma, mmd2, modes_covered, frac_mode_0..``;
* ``histograms.json``: per-mode distance histograms of the final state;
* ``manifest.json``: resolved config, seeds, version, backend, wall time.

Everything except the manifest is a deterministic function of the config.
Files are written to a temporary name and renamed into place.
"""
from __future__ import annotations

import json
import logging
import math
import os
import re
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from asvgd import _backend, __version__
from asvgd.config import ExperimentConfig, expand_seed
from asvgd.diagnostics import DiagnosticsTracker, distance_histogram
from asvgd.engine import run

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
RUN_FILES = ("particles.csv", "diagnostics.csv", "histograms.json", "manifest.json")


def fmt(value) -> str:
    """Round-trippable text for a CSV cell; missing values become ``nan``."""
    if value is None:
        return "nan"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    return "nan" if math.isnan(v) else format(v, ".17g")


def atomic_write(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def prepare_directory(out_dir, names, overwrite: bool) -> Path:
    """Create ``out_dir`` and refuse to clobber any of ``names`` unless asked to."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not overwrite:
        existing = [n for n in names if (out / n).exists()]
        if existing:
            raise FileExistsError(f"{out}: {', '.join(existing)} already exist (use --overwrite)")
    return out


def diagnostics_header(n_modes: int) -> list[str]:
    return ["iter", "gamma", "mmd2", "modes_covered"] + [f"frac_mode_{k}" for k in range(n_modes)]


def diagnostics_rows(records) -> list[list[str]]:
    return [
        [fmt(r.iteration), fmt(r.gamma), fmt(r.mmd2), fmt(r.modes_covered)] + [fmt(f) for f in r.mode_fractions]
        for r in records
    ]


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def particles_text(snapshots) -> str:
    dim = snapshots[0].dim
    lines = [",".join(["iter", "particle_id"] + [f"x_{j}" for j in range(dim)])]
    for snap in snapshots:
        it = str(snap.iteration)
        for i, row in enumerate(snap.positions):
            lines.append(",".join([it, str(i)] + [format(float(v), ".17g") for v in row]))
    return "\n".join(lines) + "\n"


@dataclass
class RunSummary:
    """What a finished run reports back (also returned from worker processes)."""

    name: str
    directory: str
    iteration: int
    modes_covered: int | None
    mmd2: float
    mode_fractions: list
    records: list = field(default_factory=list, repr=False)


def execute(config: ExperimentConfig, backend=None):
    """Run ``config`` in memory: returns the engine result, tracker and histograms."""
    run_cfg = config.run_config()
    mixture = run_cfg.target
    diag = config.diagnostics
    seeds = expand_seed(config.seed)
    reference = None
    if diag["mmd"]:
        reference = mixture.sample(diag["reference_samples"], seeds.reference)
    tracker = DiagnosticsTracker(mixture, reference=reference, coverage=diag["coverage"],
                                 radius_multiplier=diag["radius"], backend=backend)
    result = run(run_cfg, observers=[tracker], keep_snapshots=config.emit_trajectory, backend=backend)
    hists = distance_histogram(result.final, mixture, bins=diag["bins"]) if diag["histograms"] else None
    if hists is not None:
        tracker.records[-1].distance_histogram = hists
    return result, tracker, hists


def run_experiment(config: ExperimentConfig, out_dir=None, overwrite: bool = False,
                   backend=None) -> RunSummary:
    """Run one experiment and write its artifacts to ``out_dir``.

    Raises:
        FileExistsError: Artifacts already present and ``overwrite`` is false.
        NumericalError: The particle system diverged.
    """
    out_dir = out_dir or config.output_directory or os.path.join("runs", config.name)
    out = prepare_directory(out_dir, RUN_FILES, overwrite)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    result, tracker, hists = execute(config, backend)
    wall = time.perf_counter() - t0

    snapshots = [c.particles for c in result.checkpoints] if config.emit_trajectory else [result.final]
    n_modes = len(tracker.records[0].mode_fractions)
    atomic_write(out / "particles.csv", particles_text(snapshots))
    atomic_write(out / "diagnostics.csv", csv_text(diagnostics_header(n_modes), diagnostics_rows(tracker.records)))
    artifacts = ["particles.csv", "diagnostics.csv"]
    if hists is not None:
        atomic_write(out / "histograms.json", json.dumps([h.to_dict() for h in hists], indent=1) + "\n")
        artifacts.append("histograms.json")
    last = tracker.records[-1]
    summary = RunSummary(config.name, str(out), last.iteration, last.modes_covered, float(last.mmd2),
                         [float(f) for f in last.mode_fractions], tracker.records)
    write_manifest(out, config, wall, started, artifacts, summary, backend)
    logger.info("%s: %d steps in %.1fs, modes covered %s", config.name, config.steps, wall, last.modes_covered)
    return summary


def write_manifest(out: Path, config, wall, started, artifacts, summary, backend=None, extra=None):
    seeds = expand_seed(config.seed)
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "name": config.name,
        "config": config.to_dict(),
        "seed": config.seed,
        "derived_seeds": seeds._asdict(),
        "version": __version__,
        "backend": backend or _backend.name,
        "started_utc": started.isoformat(timespec="seconds"),
        "wall_time_s": round(wall, 3),
        "artifacts": artifacts,
        "final": {
            "iteration": summary.iteration,
            "modes_covered": summary.modes_covered,
            "mmd2": None if math.isnan(summary.mmd2) else summary.mmd2,
            "mode_fractions": summary.mode_fractions,
        },
    }
    if extra:
        manifest.update(extra)
    atomic_write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=+-]", "_", label)


def _run_job(args):
    config, out_dir, overwrite, backend = args
    summary = run_experiment(config, out_dir, overwrite, backend)
    summary.records = [
        (r.iteration, r.gamma, r.mmd2, r.modes_covered, list(r.mode_fractions)) for r in summary.records
    ]
    return summary


def _map(jobs: int, tasks):
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_run_job, tasks))


def _summary_table(key, labels, summaries, n_modes):
    header = [key, "iter", "modes_covered", "mmd2"] + [f"frac_mode_{k}" for k in range(n_modes)]
    rows = [
        [label, fmt(s.iteration), fmt(s.modes_covered), fmt(s.mmd2)] + [fmt(f) for f in s.mode_fractions]
        for label, s in zip(labels, summaries)
    ]
    return header, rows


def run_sweep(config: ExperimentConfig, out_dir=None, overwrite: bool = False, jobs: int = 1,
              backend=None) -> list[tuple[str, RunSummary]]:
    """Run every sweep entry of ``config``, each in its own subdirectory.

    Writes ``sweep.csv`` with one row per entry. Results do not depend on
    ``jobs``.
    """
    runs = config.sweep_configs()
    if not runs:
        raise ValueError(f"{config.name} has no sweep entries")
    out = prepare_directory(out_dir or config.output_directory or os.path.join("runs", config.name),
                            ["sweep.csv"], overwrite)
    tasks = [(cfg, out / _safe(label), overwrite, backend) for label, cfg in runs]
    for _, sub, _, _ in tasks:
        prepare_directory(sub, RUN_FILES, overwrite)
    summaries = _map(jobs, tasks)
    labels = [label for label, _ in runs]
    header, rows = _summary_table("run", labels, summaries, len(summaries[0].mode_fractions))
    atomic_write(out / "sweep.csv", csv_text(header, rows))
    return list(zip(labels, summaries))


def compare_schedules(config: ExperimentConfig, out_dir=None, overwrite: bool = False, jobs: int = 1,
                      backend=None, schedules=None) -> list[tuple[str, RunSummary]]:
    """One run per schedule (plus the unannealed baseline) on a shared seed.

    Writes a merged ``diagnostics.csv`` with a leading ``schedule`` column and
    a ``summary.csv`` with the final state of every run.

    Args:
        config: Template; its ``compare`` list is used unless ``schedules``
            is given.
        schedules: Optional list of family names or schedule mappings.
    """
    if schedules is not None:
        config = config.with_overrides({"compare": list(schedules)})
    if not config.compare:
        config = config.with_overrides({"compare": [config.schedule["family"]]})
    specs = config.compare_schedules()
    out = prepare_directory(out_dir or config.output_directory or os.path.join("runs", config.name),
                            ["diagnostics.csv", "summary.csv"], overwrite)
    tasks = []
    for label, spec in specs:
        base = config.to_dict()
        base.pop("compare", None)
        base.pop("sweep", None)
        base["schedule"] = spec
        base["name"] = f"{config.name}/{label}"
        tasks.append((ExperimentConfig.from_dict(base, source=label), out / _safe(label), overwrite, backend))
    for _, sub, _, _ in tasks:
        prepare_directory(sub, RUN_FILES, overwrite)
    summaries = _map(jobs, tasks)
    labels = [label for label, _ in specs]
    n_modes = len(summaries[0].mode_fractions)
    rows = []
    for label, s in zip(labels, summaries):
        for it, g, mmd2, covered, fracs in s.records:
            rows.append([label, fmt(it), fmt(g), fmt(mmd2), fmt(covered)] + [fmt(f) for f in fracs])
    atomic_write(out / "diagnostics.csv", csv_text(["schedule"] + diagnostics_header(n_modes), rows))
    header, rows = _summary_table("schedule", labels, summaries, n_modes)
    atomic_write(out / "summary.csv", csv_text(header, rows))
    return list(zip(labels, summaries))
