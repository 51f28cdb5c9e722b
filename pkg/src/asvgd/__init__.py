"""Stein variational gradient descent with annealing for multimodal targets."""
__version__ = "0.1.0"

from asvgd._backend import name as backend  # noqa: E402
from asvgd.diagnostics import (  # noqa: E402
    Coverage,
    DiagnosticsRecord,
    DiagnosticsTracker,
    assign_modes,
    coverage_stats,
    distance_histogram,
    mmd2_unbiased,
)
from asvgd.engine import (  # noqa: E402
    Checkpoint,
    RunConfig,
    RunResult,
    init_particles,
    run,
    step,
    update_components,
    update_direction,
)
from asvgd.errors import ASVGDError, NumericalError, ValidationError  # noqa: E402
from asvgd.kernels import KernelSpec, kernel_eval, kernel_grad_first, median_heuristic  # noqa: E402
from asvgd.particles import ParticleSet  # noqa: E402
from asvgd.schedules import AnnealingSchedule, gamma  # noqa: E402
from asvgd.targets import GaussianMixture, log_density, paper_targets, sample_exact, score  # noqa: E402

__all__ = [
    "ASVGDError", "AnnealingSchedule", "Checkpoint", "Coverage", "DiagnosticsRecord",
    "DiagnosticsTracker", "GaussianMixture", "KernelSpec", "NumericalError", "ParticleSet",
    "RunConfig", "RunResult", "ValidationError", "assign_modes", "backend", "coverage_stats",
    "distance_histogram", "gamma", "init_particles", "kernel_eval", "kernel_grad_first",
    "log_density", "median_heuristic", "mmd2_unbiased", "paper_targets", "run", "sample_exact",
    "score", "step", "update_components", "update_direction",
]
