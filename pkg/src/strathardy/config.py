"""Configuration files for the command-line experiments.

A configuration is a JSON object of named blocks; anything omitted takes
the defaults below.  Unknown keys are rejected so typos fail loudly
(exit code 3 at the CLI) instead of silently running the default.

{
  "group": "heisenberg:1",
  "halfspace": {"preset": "t-axis", "d": 0.0}      or {"nu": [...], "d": ...},
  "trials": {"family": "bump", "count": 20, "radius": [0.1, 0.35],
             "region": 1.2, "clearance": 0.1},
  "quadrature": {"method": "boundary-graded", "points_per_axis": 16,
                 "sample_count": 200000, "grading_exponent": 4.0},
  "p": [2.0],
  "beta": [-0.5],                  # general-hardy only; default beta_star(p)
  "eps": [0.5, 0.2, 0.1, 0.05],    # sharpness only
  "cutoff_radius": 1.0,            # sharpness only
  "samples": 1000000,              # bft-fuzz only
  "identity_points": 1000,         # identities only
  "identity_indices": [1, 2, 3],   # identities only
  "seed": 42
}
"""

from __future__ import annotations

import json
from copy import deepcopy

import numpy as np

from .calculus import HalfSpace, halfspace_preset
from .groups import GroupSpec, group_from_name
from .quadrature import QuadConfig
from .trials import make_bump, random_interior_bumps

__all__ = ["ConfigError", "DEFAULT_CONFIG", "load_config", "resolve"]


class ConfigError(ValueError):
    """Bad configuration file or values; mapped to exit code 3."""


DEFAULT_CONFIG = {
    "group": "heisenberg:1",
    "halfspace": {"preset": "t-axis", "d": 0.0},
    "trials": {
        "family": "bump",
        "count": 20,
        "radius": [0.1, 0.35],
        "region": 1.2,
        "clearance": 0.1,
    },
    "quadrature": {
        "method": "boundary-graded",
        "points_per_axis": 16,
        "sample_count": 200_000,
        "grading_exponent": 4.0,
    },
    "p": [2.0],
    "beta": None,
    "eps": [0.5, 0.2, 0.1, 0.05],
    "cutoff_radius": 1.0,
    "samples": 1_000_000,
    "identity_points": 1000,
    "identity_indices": [1, 2, 3],
    "seed": 42,
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown configuration key {path + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path + key!r} must be an object")
            out[key] = _merge(base[key], value, path=f"{path}{key}.")
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    """Read a JSON config file and merge it over the defaults."""
    if path is None:
        return deepcopy(DEFAULT_CONFIG)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must contain a JSON object")
    forgiving = dict(DEFAULT_CONFIG)
    # halfspace blocks may use either "preset" or an explicit "nu"
    if isinstance(raw.get("halfspace"), dict):
        hs = dict(raw["halfspace"])
        if "nu" in hs and "preset" not in hs:
            forgiving = dict(forgiving)
            forgiving["halfspace"] = {"nu": None, "d": 0.0}
    return _merge(forgiving, raw)


def resolve(config: dict, seed: int | None = None):
    """Turn a merged config dict into runnable objects.

    Returns (group, halfspace, quad_config, resolved_config); the resolved
    dict is what gets echoed into JSON reports and hashed into digests.
    """
    cfg = deepcopy(config)
    if seed is not None:
        cfg["seed"] = int(seed)
    try:
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer: {cfg['seed']!r}") from exc

    try:
        group = group_from_name(str(cfg["group"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    hs_block = cfg["halfspace"]
    if not isinstance(hs_block, dict):
        raise ConfigError("halfspace block must be an object")
    try:
        d = float(hs_block.get("d", 0.0))
        if "nu" in hs_block and hs_block["nu"] is not None:
            nu = np.asarray(hs_block["nu"], dtype=float)
            if nu.shape != (group.total_dim,):
                raise ConfigError(
                    f"halfspace normal has {nu.size} entries, group needs {group.total_dim}"
                )
            hs = HalfSpace(nu=nu, d=d)
            cfg["halfspace"] = {"nu": [float(v) for v in hs.nu], "d": d}
        else:
            preset = hs_block.get("preset", "t-axis")
            hs = halfspace_preset(group, preset, d=d)
            cfg["halfspace"] = {"preset": preset, "d": d}
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad halfspace block: {exc}") from exc

    qblock = cfg["quadrature"]
    try:
        quad = QuadConfig(
            method=str(qblock["method"]),
            points_per_axis=int(qblock["points_per_axis"]),
            sample_count=int(qblock["sample_count"]),
            seed=cfg["seed"],
            grading_exponent=float(qblock["grading_exponent"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad quadrature block: {exc}") from exc

    try:
        cfg["p"] = [float(p) for p in cfg["p"]]
        if any(p <= 1 for p in cfg["p"]):
            raise ConfigError("every p must exceed 1")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad p list: {exc}") from exc

    return group, hs, quad, cfg


def build_trials(group: GroupSpec, hs: HalfSpace, cfg: dict):
    """Materialize the trial family of a resolved config as ScalarFields."""
    block = cfg["trials"]
    family = block.get("family", "bump")
    if family != "bump":
        raise ConfigError(f"unknown trial family {family!r}")
    try:
        specs = random_interior_bumps(
            hs,
            count=int(block["count"]),
            seed=cfg["seed"],
            radius_range=tuple(float(r) for r in block["radius"]),
            region_halfwidth=float(block["region"]),
            clearance=float(block["clearance"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad trials block: {exc}") from exc
    return [make_bump(s) for s in specs]
