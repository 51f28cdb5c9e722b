"""Experiment configuration: file format, validation and seed expansion.

A config is a YAML mapping (JSON is accepted too, being a YAML subset)::

    name: my-run
    seed: 0
    steps: 2000
    particles: 100
    step_size: 0.1
    checkpoint_every: 100
    init: {mean: -6.0, scale: 0.25}
    target: {name: univariate5}          # or {components: [{weight, mean, sigma}, ...]}
    kernel: {bandwidth: median}          # or a positive number
    schedule: {family: hyperbolic, p: 5, cycles: 5, final_clamp_fraction: 0.05}
    output: {directory: runs/my-run, trajectory: false}
    diagnostics: {mmd: true, coverage: true, histograms: true,
                  reference_samples: 1000, radius: 2.0, bins: 50}
    sweep: [{label: h=0.1, kernel: {bandwidth: 0.1}}, ...]   # optional
    compare: [none, linear, {family: cyclical, cycles: 5}]   # optional

``steps``, ``particles``, ``step_size`` and ``target`` are required. The
schedule family ``none`` is unannealed SVGD (gamma = 1 throughout).
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
import yaml

from asvgd.engine import RunConfig
from asvgd.errors import ValidationError
from asvgd.kernels import KernelSpec
from asvgd.schedules import DEFAULT_CLAMP, FAMILIES, AnnealingSchedule
from asvgd.targets import PAPER_TARGETS, GaussianMixture, paper_targets

BASELINE = "none"
SCHEDULE_NAMES = (BASELINE,) + FAMILIES

TOP_KEYS = {
    "name", "seed", "steps", "particles", "step_size", "checkpoint_every", "init", "target",
    "kernel", "schedule", "output", "diagnostics", "sweep", "compare",
}
REQUIRED = ("steps", "particles", "step_size", "target")
SECTION_KEYS = {
    "init": {"mean", "scale"},
    "target": {"name", "params", "components"},
    "kernel": {"bandwidth"},
    "schedule": {"family", "p", "cycles", "gamma0", "final_clamp_fraction", "label"},
    "output": {"directory", "trajectory"},
    "diagnostics": {"mmd", "coverage", "histograms", "reference_samples", "radius", "bins"},
}
DIAGNOSTICS_DEFAULTS = {
    "mmd": True,
    "coverage": True,
    "histograms": True,
    "reference_samples": 1000,
    "radius": 2.0,
    "bins": 50,
}
SCHEDULE_DEFAULTS = {"family": BASELINE, "p": None, "cycles": 5, "gamma0": 1.0,
                     "final_clamp_fraction": DEFAULT_CLAMP}


class Seeds(NamedTuple):
    init: int
    target: int
    reference: int


def expand_seed(master: int) -> Seeds:
    """Derive independent (init, target, reference) seeds from one master seed."""
    children = np.random.SeedSequence(int(master)).spawn(3)
    return Seeds(*(int(c.generate_state(1, dtype=np.uint32)[0]) for c in children))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; see the module docstring for the file layout.

    Build with :meth:`from_dict` or :func:`load_config`; ``to_dict`` gives
    back a mapping that reloads to an equal config.
    """

    name: str
    target: dict
    steps: int
    particles: int
    step_size: float
    seed: int = 0
    checkpoint_every: int = 0
    init_mean: object = 0.0
    init_scale: float = 1.0
    bandwidth: float | None = None
    schedule: dict = field(default_factory=lambda: dict(SCHEDULE_DEFAULTS))
    output_directory: str | None = None
    emit_trajectory: bool = False
    diagnostics: dict = field(default_factory=lambda: dict(DIAGNOSTICS_DEFAULTS))
    sweep: tuple = ()
    compare: tuple = ()

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "seed": self.seed,
            "steps": self.steps,
            "particles": self.particles,
            "step_size": self.step_size,
            "checkpoint_every": self.checkpoint_every,
            "init": {"mean": _plain(self.init_mean), "scale": self.init_scale},
            "target": copy.deepcopy(self.target),
            "kernel": {"bandwidth": "median" if self.bandwidth is None else self.bandwidth},
            "schedule": dict(self.schedule),
            "output": {"directory": self.output_directory, "trajectory": self.emit_trajectory},
            "diagnostics": dict(self.diagnostics),
        }
        if self.sweep:
            out["sweep"] = copy.deepcopy(list(self.sweep))
        if self.compare:
            out["compare"] = copy.deepcopy(list(self.compare))
        return out

    @classmethod
    def from_dict(cls, raw, source: str = "config") -> "ExperimentConfig":
        """Validate a raw mapping, reporting every problem at once."""
        if not isinstance(raw, dict):
            raise ValidationError(f"{source}: top level must be a mapping, got {type(raw).__name__}")
        problems = []
        for key in sorted(set(raw) - TOP_KEYS):
            problems.append(f"unknown field '{key}'")
        for key in REQUIRED:
            if raw.get(key) is None:
                problems.append(f"missing required field '{key}'")
        sections = {}
        for sec, allowed in SECTION_KEYS.items():
            value = raw.get(sec) or {}
            if not isinstance(value, dict):
                problems.append(f"field '{sec}' must be a mapping")
                value = {}
            for key in sorted(set(value) - allowed):
                problems.append(f"unknown field '{sec}.{key}'")
            sections[sec] = value

        def number(key, kind, value, minimum=None, strict=False):
            if isinstance(value, bool) or value is None:
                problems.append(f"field '{key}' must be a {kind.__name__}, got {value!r}")
                return None
            try:
                v = kind(value)
            except (TypeError, ValueError):
                problems.append(f"field '{key}' must be a {kind.__name__}, got {value!r}")
                return None
            if kind is int and v != value:
                problems.append(f"field '{key}' must be an integer, got {value!r}")
                return None
            if kind is float and not math.isfinite(v):
                problems.append(f"field '{key}' must be finite, got {value!r}")
                return None
            if minimum is not None and (v <= minimum if strict else v < minimum):
                rel = ">" if strict else ">="
                problems.append(f"field '{key}' must be {rel} {minimum}, got {value!r}")
                return None
            return v

        steps = number("steps", int, raw.get("steps"), 0) if raw.get("steps") is not None else None
        particles = number("particles", int, raw.get("particles"), 1) if raw.get("particles") is not None else None
        step_size = number("step_size", float, raw.get("step_size"), 0.0, strict=True) \
            if raw.get("step_size") is not None else None
        seed = number("seed", int, raw.get("seed", 0), 0)
        every = number("checkpoint_every", int, raw.get("checkpoint_every", 0), 0)
        if steps is not None and every is not None and steps and every > steps:
            problems.append(f"field 'checkpoint_every' ({every}) must not exceed 'steps' ({steps})")

        init = sections["init"]
        init_scale = number("init.scale", float, init.get("scale", 1.0), 0.0)
        init_mean = init.get("mean", 0.0)
        try:
            mean_arr = np.atleast_1d(np.asarray(init_mean, dtype=float))
            if mean_arr.ndim != 1 or not np.all(np.isfinite(mean_arr)):
                raise ValueError
            init_mean = float(mean_arr[0]) if np.ndim(init_mean) == 0 else [float(v) for v in mean_arr]
        except (TypeError, ValueError):
            problems.append(f"field 'init.mean' must be a number or a list of numbers, got {init_mean!r}")
            init_mean = 0.0

        target = _check_target(sections["target"], problems) if raw.get("target") is not None else {}

        bandwidth = sections["kernel"].get("bandwidth", "median")
        try:
            bandwidth = KernelSpec.from_value(bandwidth).bandwidth
        except ValidationError as exc:
            problems.append(f"field 'kernel.bandwidth': {exc}")
            bandwidth = None

        schedule = _check_schedule(sections["schedule"], "schedule", problems)

        out = sections["output"]
        directory = out.get("directory")
        if directory is not None and not isinstance(directory, str):
            problems.append(f"field 'output.directory' must be a string, got {directory!r}")
        trajectory = out.get("trajectory", False)
        if not isinstance(trajectory, bool):
            problems.append(f"field 'output.trajectory' must be true or false, got {trajectory!r}")

        diag = dict(DIAGNOSTICS_DEFAULTS)
        diag.update(sections["diagnostics"])
        for key in ("mmd", "coverage", "histograms"):
            if not isinstance(diag[key], bool):
                problems.append(f"field 'diagnostics.{key}' must be true or false, got {diag[key]!r}")
        diag["reference_samples"] = number("diagnostics.reference_samples", int, diag["reference_samples"], 2)
        diag["radius"] = number("diagnostics.radius", float, diag["radius"], 0.0, strict=True)
        diag["bins"] = number("diagnostics.bins", int, diag["bins"], 1)

        sweep = raw.get("sweep") or []
        if not isinstance(sweep, list) or not all(isinstance(r, dict) for r in sweep):
            problems.append("field 'sweep' must be a list of mappings")
            sweep = []
        compare = raw.get("compare") or []
        if not isinstance(compare, list):
            problems.append("field 'compare' must be a list")
            compare = []
        for i, entry in enumerate(compare):
            spec = {"family": entry} if isinstance(entry, str) else entry
            if not isinstance(spec, dict):
                problems.append(f"field 'compare[{i}]' must be a family name or a mapping")
                continue
            extra = set(spec) - SECTION_KEYS["schedule"] - {"steps"}
            for key in sorted(extra):
                problems.append(f"unknown field 'compare[{i}].{key}'")
            if "steps" in spec and steps is not None and spec["steps"] != steps:
                problems.append(f"field 'compare[{i}].steps' ({spec['steps']}) differs from 'steps' ({steps})")
            _check_schedule({k: v for k, v in spec.items() if k != "steps"}, f"compare[{i}]", problems)

        name = raw.get("name", "experiment")
        if not isinstance(name, str) or not name:
            problems.append(f"field 'name' must be a non-empty string, got {name!r}")

        if problems:
            raise ValidationError(f"{source}: " + "; ".join(problems), problems)

        cfg = cls(
            name=name,
            target=target,
            steps=steps,
            particles=particles,
            step_size=step_size,
            seed=seed,
            checkpoint_every=every,
            init_mean=init_mean,
            init_scale=init_scale,
            bandwidth=bandwidth,
            schedule=schedule,
            output_directory=directory,
            emit_trajectory=trajectory,
            diagnostics=diag,
            sweep=tuple(copy.deepcopy(sweep)),
            compare=tuple(copy.deepcopy(compare)),
        )
        # domain-level checks (dimension of init mean, etc.)
        try:
            cfg.run_config()
        except ValidationError as exc:
            raise ValidationError(f"{source}: {exc}", exc.problems) from None
        cfg.sweep_configs()
        return cfg

    def mixture(self) -> GaussianMixture:
        """Build the target mixture; random layouts use the derived target seed."""
        return build_target(self.target, expand_seed(self.seed).target)

    def schedule_for(self, spec: dict | None = None) -> AnnealingSchedule:
        spec = self.schedule if spec is None else spec
        return build_schedule(spec, max(self.steps, 1))

    def run_config(self, schedule: dict | None = None) -> RunConfig:
        return RunConfig(
            target=self.mixture(),
            kernel=KernelSpec(self.bandwidth),
            schedule=self.schedule_for(schedule),
            step_size=self.step_size,
            total_steps=self.steps,
            n_particles=self.particles,
            init_mean=self.init_mean,
            init_scale=self.init_scale,
            seed=expand_seed(self.seed).init,
            checkpoint_every=self.checkpoint_every,
        )

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        """New config with ``overrides`` deep-merged over this one."""
        return ExperimentConfig.from_dict(deep_merge(self.to_dict(), overrides), source=self.name)

    def sweep_configs(self) -> list:
        """``(label, config)`` per sweep entry; sweep entries do not nest."""
        runs = []
        for i, entry in enumerate(self.sweep):
            entry = dict(entry)
            label = str(entry.pop("label", f"run{i}"))
            base = self.to_dict()
            base.pop("sweep", None)
            base.pop("compare", None)
            merged = deep_merge(base, entry)
            merged["name"] = f"{self.name}/{label}"
            runs.append((label, ExperimentConfig.from_dict(merged, source=f"sweep[{i}]")))
        return runs

    def compare_schedules(self) -> list:
        """``(label, schedule spec)`` pairs, with the unannealed baseline first if absent."""
        specs = []
        for entry in self.compare:
            spec = {"family": entry} if isinstance(entry, str) else dict(entry)
            spec.pop("steps", None)
            specs.append((str(spec.pop("label", spec["family"])), spec))
        if not any(s.get("family") == BASELINE for _, s in specs):
            specs.insert(0, (BASELINE, {"family": BASELINE}))
        return specs


def _plain(v):
    return [float(x) for x in v] if isinstance(v, (list, tuple)) else v


def _check_target(target: dict, problems: list) -> dict:
    has_name = "name" in target
    has_components = "components" in target
    if has_name == has_components:
        problems.append("field 'target' needs exactly one of 'name' or 'components'")
        return dict(target)
    if has_name:
        if target["name"] not in PAPER_TARGETS:
            problems.append(f"field 'target.name': unknown target {target['name']!r}; "
                            f"expected one of {sorted(PAPER_TARGETS)}")
        params = target.get("params") or {}
        if not isinstance(params, dict):
            problems.append("field 'target.params' must be a mapping")
        return {"name": target["name"], "params": dict(params) if isinstance(params, dict) else {}}
    if "params" in target:
        problems.append("field 'target.params' only applies to named targets")
    try:
        GaussianMixture.from_components(target["components"])
    except (ValidationError, TypeError) as exc:
        problems.append(f"field 'target.components': {exc}")
    return {"components": copy.deepcopy(target["components"])}


def _check_schedule(spec: dict, where: str, problems: list) -> dict:
    merged = dict(SCHEDULE_DEFAULTS)
    merged.update({k: v for k, v in spec.items() if k != "label"})
    if "label" in spec:
        merged["label"] = spec["label"]
    if merged["family"] not in SCHEDULE_NAMES:
        problems.append(f"field '{where}.family': unknown schedule {merged['family']!r}; "
                        f"expected one of {SCHEDULE_NAMES}")
        return merged
    try:
        build_schedule(merged, 1)
    except (ValidationError, TypeError) as exc:
        problems.append(f"field '{where}': {exc}")
    return merged


def build_schedule(spec: dict, total_steps: int) -> AnnealingSchedule:
    family = spec.get("family", BASELINE)
    clamp = spec.get("final_clamp_fraction", DEFAULT_CLAMP)
    if family == BASELINE:
        return AnnealingSchedule.standard(total_steps)
    return AnnealingSchedule(family, total_steps, p=spec.get("p"), cycles=spec.get("cycles", 5),
                             gamma0=spec.get("gamma0", 1.0), final_clamp_fraction=clamp)


def build_target(target: dict, target_seed: int) -> GaussianMixture:
    if "components" in target:
        return GaussianMixture.from_components(target["components"])
    params = dict(target.get("params") or {})
    if target["name"] == "highdim":
        params.setdefault("seed", target_seed)
    return paper_targets(target["name"], **params)


def deep_merge(base: dict, overrides: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def read_mapping(path) -> dict:
    """Parse a YAML/JSON file; a run manifest is accepted and its config used."""
    path = Path(path)
    text = path.read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ValidationError(f"{path}:{where}: {problem}") from None
    if isinstance(raw, dict) and "config" in raw and "manifest_version" in raw:
        raw = raw["config"]
    return raw


def load_config(source, overrides: dict | None = None) -> ExperimentConfig:
    """Load a config file or a preset id, then apply ``overrides`` (they win).

    Raises:
        ValidationError: Unknown preset, parse error (with line context) or
            invalid fields (all listed).
        OSError: The file cannot be read.
    """
    from asvgd.presets import PRESETS

    source = str(source)
    if source in PRESETS:
        raw, label = copy.deepcopy(PRESETS[source]), f"preset {source}"
    elif Path(source).suffix in (".yaml", ".yml", ".json") or Path(source).exists():
        raw, label = read_mapping(source), source
    else:
        raise ValidationError(f"unknown preset {source!r}; known presets: {', '.join(sorted(PRESETS))}")
    if overrides:
        if not isinstance(raw, dict):
            raise ValidationError(f"{label}: top level must be a mapping")
        raw = deep_merge(raw, overrides)
    return ExperimentConfig.from_dict(raw, source=label)


def write_config(config: ExperimentConfig, path) -> None:
    """Write ``config`` as YAML (``.json`` suffix writes JSON)."""
    path = Path(path)
    data = config.to_dict()
    if path.suffix == ".json":
        path.write_text(json.dumps(data, indent=2) + "\n")
    else:
        path.write_text(yaml.safe_dump(data, sort_keys=False))
