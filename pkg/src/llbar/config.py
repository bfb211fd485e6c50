"""Experiment configuration: YAML parsing, validation, canonical serialisation.

A config plus the build version reproduces a run bit-identically: the
parser normalises every section (defaults filled, types coerced), and
the canonical serialisation of that normalised form is what gets hashed
into output provenance.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import yaml

from .grid import Boundary, ConfigurationError, Grid
from .model import AffineQuadraticSource, ModelParams
from .stepper import StepperConfig

__all__ = ["ExperimentConfig", "parse_config", "serialize_config", "load_config_file"]

EXPERIMENTS = ("simulate", "compare", "sweep_eps", "steady", "oracle_check", "audit")

_MODEL_DEFAULTS = {
    "sigma": 1.0,
    "eps": 0.0,
    "gamma": 0.0,
    "kappa1": 1.0,
    "kappa2": 1.0,
    "lambda1": 0.0,
    "lambda2": 0.0,
    "easy_axis": [0.0, 0.0, 1.0],
    "beta1": 0.0,
    "beta2": 0.0,
    "chi": 0.0,
    "nu": None,
    "source": None,
    "demag": False,
    "aniso": False,
    "dealias": "two_thirds",
}

_STEPPER_DEFAULTS = {
    "dt": 1e-3,
    "t_end": 1.0,
    "scheme": "imex_bdf2",
    "record_every": 1,
    "max_field_norm": 1e8,
}

_INITIAL_DEFAULTS = {
    "kind": "random",
    "seed": 0,
    "decay": 2.0,
    "cutoff": 1.0 / 3.0,
    "amplitude": 1.0,
    "offset": None,
    "vector": None,
    "modes": [],
}

_SECTION_DEFAULTS = {
    "compare": {"deltas": [1e-4], "seed": 99, "kind": "l2", "slope_tolerance": 0.05},
    "sweep": {
        "eps_values": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
        "kind": "h1",
        "slope_range": [0.9, 1.1],
        "min_r_squared": 0.98,
    },
    "steady": {"residual_max": 1e-8, "min_r_squared": 0.99, "fit_decades": 1.0},
    "oracle": {"n_modes": 8, "dt": None, "max_discrepancy": 1e-4},
    "audit": {"pairs": 100, "seed": 0, "identity_max": 1e-8, "inequality_max": 1e-10},
}

_EXPR_NAMES = {
    "pi": np.pi,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: Grid
    model: ModelParams
    stepper: StepperConfig
    initial: dict
    sections: dict
    output: str | None
    raw: dict

    def canonical_text(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True, default_flow_style=False)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()[:16]


def _merge(defaults: dict, given: dict | None, where: str) -> dict:
    given = given or {}
    if not isinstance(given, dict):
        raise ConfigurationError(f"section {where!r} must be a mapping")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigurationError(f"unknown keys in {where!r}: {sorted(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


def _as_float_list(value, count, where):
    arr = [float(v) for v in value]
    if len(arr) != count:
        raise ConfigurationError(f"{where}: expected {count} entries, got {len(arr)}")
    return arr


def _evaluate_nu(nu_spec, grid: Grid):
    if nu_spec is None:
        return None
    if isinstance(nu_spec, dict):
        exprs = nu_spec.get("expr")
        if exprs is None or len(exprs) != grid.d:
            raise ConfigurationError(f"nu.expr needs {grid.d} component expressions")
        coords = grid.meshgrid()
        names = dict(_EXPR_NAMES)
        for a, axis_name in enumerate("xyz"[: grid.d]):
            names[axis_name] = coords[a]
            names[f"L{a}"] = grid.lengths[a]
        out = np.empty((grid.d,) + grid.n)
        for a, expr in enumerate(exprs):
            try:
                out[a] = eval(expr, {"__builtins__": {}}, names)  # noqa: S307 - restricted names
            except Exception as exc:
                raise ConfigurationError(f"cannot evaluate nu expression {expr!r}: {exc}") from exc
        return out
    return np.asarray(_as_float_list(nu_spec, grid.d, "model.nu"))


def _normalise(data: dict) -> dict:
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping at the top level")
    known_top = {"experiment", "output", "grid", "model", "stepper", "initial"} | set(
        _SECTION_DEFAULTS
    )
    unknown = set(data) - known_top
    if unknown:
        raise ConfigurationError(f"unknown top-level config keys: {sorted(unknown)}")

    experiment = data.get("experiment", "simulate")
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")

    grid_sec = data.get("grid")
    if not isinstance(grid_sec, dict):
        raise ConfigurationError("config needs a 'grid' section")
    grid_norm = _merge(
        {"d": 1, "m": 1, "n": None, "lengths": None, "boundary": "periodic"}, grid_sec, "grid"
    )
    if grid_norm["n"] is None or grid_norm["lengths"] is None:
        raise ConfigurationError("grid needs 'n' and 'lengths' lists")
    grid_norm["d"] = int(grid_norm["d"])
    grid_norm["m"] = int(grid_norm["m"])
    grid_norm["n"] = [int(v) for v in grid_norm["n"]]
    grid_norm["lengths"] = [float(v) for v in grid_norm["lengths"]]
    if grid_norm["boundary"] not in ("periodic", "neumann_cosine"):
        raise ConfigurationError(f"unknown boundary mode {grid_norm['boundary']!r}")

    model_norm = _merge(_MODEL_DEFAULTS, data.get("model"), "model")
    for key in (
        "sigma",
        "eps",
        "gamma",
        "kappa1",
        "kappa2",
        "lambda1",
        "lambda2",
        "beta1",
        "beta2",
        "chi",
    ):
        model_norm[key] = float(model_norm[key])
    model_norm["easy_axis"] = _as_float_list(model_norm["easy_axis"], 3, "model.easy_axis")
    if model_norm["source"] is not None:
        src = model_norm["source"]
        if not isinstance(src, dict) or "a" not in src:
            raise ConfigurationError("model.source must be null or a mapping with key 'a'")
        model_norm["source"] = {"a": [float(v) for v in src["a"]]}
    if model_norm["nu"] is not None and not isinstance(model_norm["nu"], dict):
        model_norm["nu"] = [float(v) for v in model_norm["nu"]]
    model_norm["demag"] = bool(model_norm["demag"])
    model_norm["aniso"] = bool(model_norm["aniso"])

    stepper_norm = _merge(_STEPPER_DEFAULTS, data.get("stepper"), "stepper")
    stepper_norm["dt"] = float(stepper_norm["dt"])
    stepper_norm["t_end"] = float(stepper_norm["t_end"])
    stepper_norm["record_every"] = int(stepper_norm["record_every"])
    stepper_norm["max_field_norm"] = float(stepper_norm["max_field_norm"])

    initial_norm = _merge(_INITIAL_DEFAULTS, data.get("initial"), "initial")
    initial_norm["seed"] = int(initial_norm["seed"])
    initial_norm["decay"] = float(initial_norm["decay"])
    initial_norm["cutoff"] = float(initial_norm["cutoff"])
    if initial_norm["amplitude"] is not None:
        initial_norm["amplitude"] = float(initial_norm["amplitude"])
    if initial_norm["offset"] is not None:
        initial_norm["offset"] = [float(v) for v in initial_norm["offset"]]
    if initial_norm["vector"] is not None:
        initial_norm["vector"] = [float(v) for v in initial_norm["vector"]]

    sections = {}
    for name, defaults in _SECTION_DEFAULTS.items():
        sections[name] = _merge(defaults, data.get(name), name)
    sections["compare"]["deltas"] = [float(v) for v in sections["compare"]["deltas"]]
    sections["sweep"]["eps_values"] = [float(v) for v in sections["sweep"]["eps_values"]]

    out = {
        "experiment": experiment,
        "output": data.get("output"),
        "grid": grid_norm,
        "model": model_norm,
        "stepper": stepper_norm,
        "initial": initial_norm,
    }
    out.update(sections)
    return out


def build_model(norm: dict, grid: Grid) -> ModelParams:
    source = None
    if norm["source"] is not None:
        source = AffineQuadraticSource(tuple(norm["source"]["a"]))
    return ModelParams(
        grid=grid,
        sigma=norm["sigma"],
        eps=norm["eps"],
        gamma=norm["gamma"],
        kappa1=norm["kappa1"],
        kappa2=norm["kappa2"],
        lambda1=norm["lambda1"],
        lambda2=norm["lambda2"],
        easy_axis=tuple(norm["easy_axis"]),
        beta1=norm["beta1"],
        beta2=norm["beta2"],
        chi=norm["chi"],
        nu=_evaluate_nu(norm["nu"], grid),
        source=source,
        demag_enabled=norm["demag"],
        aniso_enabled=norm["aniso"],
        dealias_policy=norm["dealias"],
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a YAML experiment config."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigurationError(f"config parse error{loc}: {exc}") from exc
    if data is None:
        raise ConfigurationError("empty config")
    norm = _normalise(data)
    grid = Grid(
        d=norm["grid"]["d"],
        m=norm["grid"]["m"],
        n=tuple(norm["grid"]["n"]),
        lengths=tuple(norm["grid"]["lengths"]),
        boundary=Boundary(norm["grid"]["boundary"]),
    )
    model = build_model(norm["model"], grid)
    stepper = StepperConfig(
        dt=norm["stepper"]["dt"],
        t_end=norm["stepper"]["t_end"],
        scheme=norm["stepper"]["scheme"],
        record_every=norm["stepper"]["record_every"],
        max_field_norm=norm["stepper"]["max_field_norm"],
    )
    if norm["experiment"] == "sweep_eps" and grid.d > 2:
        raise ConfigurationError("the damping-parameter sweep is restricted to d <= 2")
    return ExperimentConfig(
        experiment=norm["experiment"],
        grid=grid,
        model=model,
        stepper=stepper,
        initial=norm["initial"],
        sections={k: norm[k] for k in _SECTION_DEFAULTS},
        output=norm["output"],
        raw=norm,
    )


def serialize_config(cfg: ExperimentConfig) -> str:
    return cfg.canonical_text()


def load_config_file(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
