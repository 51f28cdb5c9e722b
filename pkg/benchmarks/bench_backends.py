"""Time one SVGD step with the compiled core and the numpy fallback.

Usage: python benchmarks/bench_backends.py [--repeat N] [--sizes n:d,n:d,...]
"""
import argparse
import time

import numpy as np

from asvgd import _backend
from asvgd.engine import step
from asvgd.kernels import KernelSpec
from asvgd.particles import ParticleSet
from asvgd.schedules import AnnealingSchedule
from asvgd.targets import paper_targets


def target_for(d):
    return paper_targets("highdim", d=d, seed=0) if d > 2 else paper_targets("grid16") if d == 2 \
        else paper_targets("univariate5")


def time_step(backend, n, d, repeat):
    m = target_for(d)
    p = ParticleSet(np.random.default_rng(0).normal(size=(n, d)))
    s = AnnealingSchedule("hyperbolic", 10)
    kernel = KernelSpec()
    step(p, m, kernel, s, 0.1, backend=backend)  # warm-up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        step(p, m, kernel, s, 0.1, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sizes", default="100:1,200:2,500:2,1000:2,500:100,2000:100")
    args = parser.parse_args(argv)
    sizes = [tuple(int(v) for v in s.split(":")) for s in args.sizes.split(",")]
    names = [b for b in ("compiled", "python") if b in _backend.BACKENDS]
    print(f"{'n':>6} {'d':>5} " + " ".join(f"{b + ' ms':>12}" for b in names) + f" {'speedup':>8}")
    for n, d in sizes:
        times = [time_step(b, n, d, args.repeat) * 1e3 for b in names]
        speed = f"{times[1] / times[0]:8.2f}" if len(times) == 2 else f"{'-':>8}"
        print(f"{n:>6} {d:>5} " + " ".join(f"{t:12.3f}" for t in times) + f" {speed}")


if __name__ == "__main__":
    main()
