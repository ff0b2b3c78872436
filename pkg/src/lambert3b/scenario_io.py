"""Scenario files: TOML with a ``[scenario]`` table and an optional ``[integrator]`` table."""

from __future__ import annotations

import math
import warnings
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ScenarioError
from .oracle import IntegratorConfig
from .two_body import G_SI, ScenarioConfig

__all__ = ["SCENARIO_KEYS", "INTEGRATOR_KEYS", "load_scenario", "parse_scenario", "schema_text",
           "dump_scenario"]

# key -> (unit, required, default, description)
SCENARIO_KEYS = {
    "G": ("m^3 kg^-1 s^-2", False, G_SI, "gravitational constant"),
    "m1": ("kg", True, None, "mass of primary 1"),
    "m2": ("kg", True, None, "mass of primary 2"),
    "m3": ("kg", True, None, "mass of the small third body"),
    "r1o": ("m", True, None, "initial distance of m1 from the primaries' centre of mass"),
    "r2o": ("m", True, None, "initial distance of m2 from the primaries' centre of mass"),
    "rdot1o": ("m/s", True, None, "initial radial speed of m1"),
    "rdot2o": ("m/s", True, None, "initial radial speed of m2"),
    "theta1o": ("rad", True, None, "initial polar angle of m1"),
    "theta2o": ("rad", True, None, "initial polar angle of m2; must equal theta1o + pi"),
    "thetadot_o": ("rad/s", True, None, "initial common angular rate of the primaries"),
    "t0": ("s", False, 0.0, "initial time"),
    "t_end": ("s", True, None, "end of the horizon"),
    "dt_out": ("s", True, None, "output sampling interval"),
}

INTEGRATOR_KEYS = {
    "method": ("-", False, "rk45", '"rk45" (adaptive Dormand-Prince) or "rk4" (fixed step)'),
    "dt": ("s", False, 1.0, "step for rk4"),
    "rel_tol": ("-", False, 1e-10, "relative tolerance for rk45"),
    "abs_tol": ("m, m/s", False, 1e-6, "absolute tolerance for rk45"),
    "max_steps": ("-", False, 1_000_000, "accepted-step budget"),
    "min_separation": ("m", False, None, "collision guard; default 1e-6 x initial minimum separation"),
    "force_law": ("-", False, "newton", '"newton" or "unit_difference" (direction of the difference of unit position vectors)'),
}


def parse_scenario(doc: dict) -> tuple[ScenarioConfig, IntegratorConfig]:
    """Validate a decoded document and build the two configuration objects."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a table")
    unknown = set(doc) - {"scenario", "integrator"}
    if unknown:
        raise ScenarioError(f"unknown top-level keys: {sorted(unknown)}")
    if "scenario" not in doc:
        raise ScenarioError("missing [scenario] table")
    sc = doc["scenario"]
    it = doc.get("integrator", {})
    if not isinstance(sc, dict) or not isinstance(it, dict):
        raise ScenarioError("[scenario] and [integrator] must be tables")
    for table, keys, name in ((sc, SCENARIO_KEYS, "scenario"), (it, INTEGRATOR_KEYS, "integrator")):
        extra = set(table) - set(keys)
        if extra:
            raise ScenarioError(f"unknown keys in [{name}]: {sorted(extra)}")
    missing = [k for k, meta in SCENARIO_KEYS.items() if meta[1] and k not in sc]
    if missing:
        raise ScenarioError(f"missing required keys in [scenario]: {missing}")
    try:
        cfg = ScenarioConfig(**sc)
        icfg = IntegratorConfig(**it)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc
    return cfg, icfg


def load_scenario(path) -> tuple[ScenarioConfig, IntegratorConfig]:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed scenario {path}: {exc}") from exc
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        return parse_scenario(doc)


def _toml_value(v) -> str:
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else "nan"
    return str(v)


def dump_scenario(cfg: ScenarioConfig, icfg: IntegratorConfig | None = None) -> str:
    """Serialise configurations back to scenario-file text."""
    lines = ["[scenario]"]
    for key in SCENARIO_KEYS:
        lines.append(f"{key} = {_toml_value(getattr(cfg, key))}")
    if icfg is not None:
        lines += ["", "[integrator]"]
        for key in INTEGRATOR_KEYS:
            value = getattr(icfg, key)
            if value is not None:
                lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def schema_text() -> str:
    out = [
        "# Scenario file schema (TOML). Units are SI. '#' starts a comment.",
        "# Unknown keys are rejected.",
        "",
        "[scenario]",
    ]
    for table, keys in (("scenario", SCENARIO_KEYS), ("integrator", INTEGRATOR_KEYS)):
        if table == "integrator":
            out += ["", "[integrator]   # optional table"]
        for key, (unit, required, default, desc) in keys.items():
            status = "required" if required else f"optional, default {default!r}"
            out.append(f"# {key:<14} [{unit}] {status}: {desc}")
    return "\n".join(out) + "\n"
