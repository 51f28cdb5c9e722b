"""Named experiment presets.

Each preset is a complete raw config mapping (see :mod:`asvgd.config`).
``*-svgd`` presets run unannealed SVGD, ``*-asvgd`` the annealed variant on
the same target, initialization and seed.
"""
from __future__ import annotations

import copy

from asvgd.config import deep_merge

ALL_SCHEDULES = ["none", "linear", "hyperbolic", "cyclical"]
BANDWIDTHS = [0.001, 0.01, 0.1, 1, 10, 100, "median"]

_UNIVARIATE = {
    "target": {"name": "univariate5"},
    "steps": 2000,
    "particles": 100,
    "step_size": 0.1,
    "checkpoint_every": 100,
    "init": {"mean": -6.0, "scale": 0.25},
    "output": {"trajectory": True},
}

# Particles start around the bottom-left corner mode of the grid.
_GRID_CORNER = {
    "target": {"name": "grid16"},
    "steps": 3000,
    "particles": 200,
    "step_size": 0.4,
    "checkpoint_every": 100,
    "init": {"mean": [-4.5, -4.5], "scale": 0.5},
    "output": {"trajectory": True},
}

# Particles start inside one of the four central modes.
_GRID_CENTRAL = deep_merge(_GRID_CORNER, {"particles": 100, "init": {"mean": [-1.5, -1.5], "scale": 0.25}})

# Particles start just outside the 0.25-weight component.
_IRREGULAR = {
    "target": {"name": "irregular"},
    "steps": 5000,
    "particles": 500,
    "step_size": 0.4,
    "checkpoint_every": 100,
    "init": {"mean": [2.4, 2.4], "scale": 0.5},
    "output": {"trajectory": True},
}

_HIGHDIM = {
    "target": {"name": "highdim", "params": {"d": 100}},
    "steps": 120_000,
    "particles": 5000,
    "step_size": 0.3,
    "checkpoint_every": 100,
    "init": {"mean": 0.0, "scale": 1.0},
    "schedule": {"family": "cyclical", "cycles": 5, "p": 2},
    "output": {"trajectory": False},
    "compare": list(ALL_SCHEDULES),
}

_SVGD = {"schedule": {"family": "none"}}
_HYPERBOLIC = {"schedule": {"family": "hyperbolic", "p": 5}}
_CYCLICAL = {"schedule": {"family": "cyclical", "cycles": 5, "p": 2}}


def _preset(name, *parts):
    raw = {"name": name, "seed": 0}
    for part in parts:
        raw = deep_merge(raw, part)
    return raw


PRESETS = {
    "fig1-svgd": _preset("fig1-svgd", _UNIVARIATE, _SVGD),
    "fig1-asvgd": _preset("fig1-asvgd", _UNIVARIATE, _HYPERBOLIC),
    "fig2-svgd": _preset("fig2-svgd", _GRID_CORNER, _SVGD),
    "fig2-asvgd": _preset("fig2-asvgd", _GRID_CORNER, _HYPERBOLIC),
    "fig4-svgd": _preset("fig4-svgd", _GRID_CORNER, _SVGD),
    "fig4-asvgd": _preset("fig4-asvgd", _GRID_CORNER, _CYCLICAL),
    "fig5-svgd": _preset("fig5-svgd", _IRREGULAR, _SVGD),
    "fig5-asvgd": _preset("fig5-asvgd", _IRREGULAR, {"schedule": {"family": "hyperbolic", "p": 2}}),
    "appendixA-svgd": _preset("appendixA-svgd", _GRID_CENTRAL, _SVGD),
    "appendixA-asvgd": _preset("appendixA-asvgd", _GRID_CENTRAL, _CYCLICAL),
    "appendixB": _preset("appendixB", _GRID_CORNER, _SVGD, {
        "output": {"trajectory": False},
        "sweep": [{"label": f"h={h}", "kernel": {"bandwidth": h}} for h in BANDWIDTHS]
        + [{"label": "asvgd-median", "kernel": {"bandwidth": "median"}, **_CYCLICAL}],
    }),
    "appendixC": _preset("appendixC", _IRREGULAR, _CYCLICAL,
                         {"output": {"trajectory": False}, "compare": list(ALL_SCHEDULES)}),
    "appendixD": _preset("appendixD", _HIGHDIM),
    "appendixD-desk": _preset("appendixD-desk", _HIGHDIM,
                              {"particles": 500, "steps": 5000, "checkpoint_every": 50}),
}


def preset(name: str) -> dict:
    """Copy of the raw preset mapping."""
    return copy.deepcopy(PRESETS[name])
