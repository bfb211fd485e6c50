"""Deterministic initial-data construction from a config spec."""

from __future__ import annotations

import numpy as np

from .diagnostics import random_smooth_field
from .field import Field
from .grid import Boundary, ConfigurationError, Grid

__all__ = ["seeded_initial_field"]


def _mode_values(grid: Grid, mode: dict) -> np.ndarray:
    k = [int(v) for v in mode.get("k", [])]
    if len(k) != grid.d:
        raise ConfigurationError(f"mode index needs {grid.d} entries, got {k}")
    comp = int(mode.get("component", 0))
    if not 0 <= comp < grid.m:
        raise ConfigurationError(f"mode component {comp} out of range for m={grid.m}")
    amp = float(mode.get("amplitude", 1.0))
    kind = mode.get("kind", "sin")
    if kind not in ("sin", "cos"):
        raise ConfigurationError(f"mode kind must be sin or cos, got {kind!r}")
    coords = grid.meshgrid()
    factor = np.ones(grid.shape)
    for a in range(grid.d):
        if k[a] == 0:
            continue
        if grid.boundary is Boundary.PERIODIC:
            arg = 2.0 * np.pi * k[a] * coords[a] / grid.lengths[a]
            factor = factor * (np.sin(arg) if kind == "sin" else np.cos(arg))
        else:
            factor = factor * np.cos(np.pi * k[a] * coords[a] / grid.lengths[a])
    out = np.zeros(grid.field_shape)
    out[comp] = amp * factor
    return out


def seeded_initial_field(spec: dict, grid: Grid) -> Field:
    """Build the initial state described by a config ``initial`` section.

    kinds:
      random   - seeded spectrum with decay exponent and hard cutoff,
                 optional constant offset folded in before the exact
                 L2 normalisation to ``amplitude``
      constant - the given m-vector
      modes    - sum of named trigonometric modes
    """
    kind = spec.get("kind", "random")
    if kind == "constant":
        vec = spec.get("vector")
        if vec is None:
            raise ConfigurationError("constant initial data needs a 'vector' entry")
        return Field.constant(grid, vec)
    if kind == "modes":
        modes = spec.get("modes") or []
        if not modes:
            raise ConfigurationError("mode initial data needs a nonempty 'modes' list")
        vals = np.zeros(grid.field_shape)
        for mode in modes:
            vals += _mode_values(grid, mode)
        return Field.from_values(grid, vals)
    if kind == "random":
        seed = int(spec.get("seed", 0))
        decay = float(spec.get("decay", 2.0))
        cutoff = float(spec.get("cutoff", 1.0 / 3.0))
        amplitude = spec.get("amplitude", 1.0)
        f = random_smooth_field(grid, seed=seed, decay=decay, cutoff_fraction=cutoff)
        vals = f.values
        offset = spec.get("offset")
        if offset is not None:
            vec = np.asarray(offset, dtype=np.float64).reshape(grid.m)
            vals = vals + vec.reshape((grid.m,) + (1,) * grid.d)
        if amplitude is not None:
            cur = float(np.sqrt(np.sum(vals**2) * grid.cell_volume))
            if cur == 0:
                raise ConfigurationError("cannot normalise zero initial data")
            vals = vals * (float(amplitude) / cur)
        return Field.from_values(grid, vals)
    raise ConfigurationError(f"unknown initial-data kind {kind!r}")
