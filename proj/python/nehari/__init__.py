"""Positive solutions of -u'' = lambda u + a(x) u^3 with a piecewise-constant weight."""

import json as _json

from ._core import (
    Bundle,
    Discretization,
    Interval,
    Mesh,
    NehariError,
    Weight,
    default_config,
    mask_census,
    newton,
    potential_energy,
    refined_mesh,
    run_diagram as _run_diagram,
    run_h_sweep as _run_h_sweep,
    shoot_count,
    sine_amplitude,
    sine_seed,
    time_map,
    time_map_bound,
    toeplitz_eigenvalue,
    uniform_mesh,
    worker_count,
)


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config or {})


def run_diagram(config=None):
    """Run the full pipeline. `config` is a dict or a JSON string; missing keys take defaults."""
    return _run_diagram(_as_json(config))


def run_h_sweep(config, h_values):
    """First branch point on the main branch for each h, as (h, lambda_b or None) pairs."""
    return _run_h_sweep(_as_json(config), list(h_values))


__all__ = [
    "Bundle",
    "Discretization",
    "Interval",
    "Mesh",
    "NehariError",
    "Weight",
    "default_config",
    "mask_census",
    "newton",
    "potential_energy",
    "refined_mesh",
    "run_diagram",
    "run_h_sweep",
    "shoot_count",
    "sine_amplitude",
    "sine_seed",
    "time_map",
    "time_map_bound",
    "toeplitz_eigenvalue",
    "uniform_mesh",
    "worker_count",
]
