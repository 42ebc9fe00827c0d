"""JSON run configuration: schema, defaults and object construction."""
from __future__ import annotations

import copy
import json
import os

import jsonschema
import numpy as np

from .counting import law_from_dict
from .fluxes import FluxSpec, parse_threshold, threshold_to_json
from .kernels import kernel_from_dict

SEED_ENV = "ITAD_SEED"


class ConfigError(ValueError):
    """Configuration document is invalid or incomplete."""


_num = {"type": "number"}
_int = {"type": "integer"}
_thr = {"anyOf": [{"type": "integer", "minimum": 1},
                  {"type": "string", "enum": ["inf", "infinity"]}, {"type": "null"}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


KERNEL_SCHEMA = _obj({
    "family": {"type": "string", "enum": ["central", "central_rational", "subcentral",
                                          "subcentral_rational", "decentral", "local"]},
    "params": {"type": "object", "additionalProperties": _num},
    "fixed": {"type": "object", "additionalProperties": _num},
    "target_mass": _num,
    "label": {"type": "string"},
}, ["family"])

SCHEMA = _obj({
    "law": _obj({
        "family": {"type": "string",
                   "enum": ["dirac", "binomial", "poisson", "negative_binomial", "negbin"]},
        "n": _int, "p": _num, "c": _num, "r": _int,
    }, ["family"]),
    "kernel": KERNEL_SCHEMA,
    "flux": _obj({
        "k": {"type": "integer", "minimum": 1}, "l": _thr, "m": _thr,
        "a": _num, "b": _num, "alpha": _num, "beta": _num,
        "self_interaction": {"type": "boolean"},
    }),
    "solver": _obj({
        "mode": {"type": "string", "enum": ["continuous", "discrete"]},
        "dt": _num, "t_end": _num, "grid_points": _int,
        "C1": _num, "C2": _num, "C3": _num,
        "initial": {"anyOf": [_num, {"type": "array", "items": _num}, {"type": "null"}]},
        "save_every": {"anyOf": [_int, {"type": "null"}]},
        "scheme": {"type": "string", "enum": ["auto", "euler", "rk4"]},
        "snap_grid": {"type": "boolean"},
    }),
    "orbit": _obj({
        "xi0": {"anyOf": [_num, {"type": "null"}]},
        "r": _num, "s": _num, "n_steps": _int,
        "scale": {"anyOf": [_num, {"type": "null"}]},
        "sweep": _obj({
            "parameter": {"type": "string", "enum": ["r", "s", "m", "l"]},
            "values": {"type": "array", "items": {"anyOf": [_num, {"type": "string"}]}},
            "start": _num, "stop": _num, "num": _int,
            "direction": {"type": "string", "enum": ["up", "down", "up-down"]},
            "warm_start": {"type": "boolean"},
        }, ["parameter"]),
    }),
    "mc": _obj({
        "replicates": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "k": {"type": "integer", "minimum": 1},
        "l": {"anyOf": [{"type": "integer", "minimum": 1}, {"type": "null"}]},
        "kernels": {"type": "array", "items": KERNEL_SCHEMA, "minItems": 1},
        "edges": {"type": "boolean"},
    }),
    "telegrapher": _obj({
        "a": _num, "v": _num, "t_end": _num, "cfl": _num,
        "grids": {"type": "array", "items": _int, "minItems": 2},
    }),
    "output": _obj({
        "directory": {"type": "string"},
        "formats": {"type": "array", "items": {"type": "string", "enum": ["csv", "svg"]}},
    }),
    "seed": {"type": "integer", "minimum": 0},
})

DEFAULTS = {
    "flux": {"k": 1, "l": 1, "m": "inf", "a": 0.0, "b": 0.0, "alpha": 1.0, "beta": 1.0,
             "self_interaction": True},
    "solver": {"mode": "continuous", "dt": 1e-3, "t_end": 10.0, "grid_points": 201,
               "C1": 0.0, "C2": 1.0, "C3": 1.0, "initial": None, "save_every": None,
               "scheme": "auto", "snap_grid": True},
    "orbit": {"xi0": None, "r": 0.0, "s": 0.0, "n_steps": 1000, "scale": None},
    "mc": {"replicates": 10000, "k": 8, "l": None, "edges": False},
    "telegrapher": {"a": 0.5, "v": 0.5, "t_end": 1.0, "cfl": 1.0, "grids": [51, 101, 201, 401]},
    "output": {"directory": ".", "formats": ["csv"]},
}


def validate(doc: dict) -> dict:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    return doc


def load(path) -> dict:
    """Read a config document, or the ``config`` section of a run manifest."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if isinstance(doc, dict) and "manifest_version" in doc:
        doc = doc["config"]
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return validate(doc)


def resolve(doc: dict) -> dict:
    """Copy of ``doc`` with every default made explicit."""
    out = copy.deepcopy(doc)
    for section, defaults in DEFAULTS.items():
        merged = dict(defaults)
        merged.update(out.get(section, {}))
        out[section] = merged
    return validate(out)


def resolve_seed(doc: dict, cli_seed=None, required: bool = True):
    """Seed precedence: command line, then ``ITAD_SEED``, then the config
    (``mc.seed`` or top-level ``seed``)."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an unsigned integer, got {env!r}") from None
    seed = doc.get("mc", {}).get("seed", doc.get("seed"))
    if seed is None and required:
        raise ConfigError(f"no seed: pass --seed, set {SEED_ENV} or give mc.seed in the config")
    if seed is not None and not 0 <= int(seed) < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return None if seed is None else int(seed)


def _need(doc, section):
    if section not in doc:
        raise ConfigError(f"missing section {section!r}")
    return doc[section]


def build_law(doc):
    return law_from_dict(_need(doc, "law"))


def build_kernel(spec):
    spec = dict(spec)
    spec.pop("label", None)
    return kernel_from_dict(spec)


def build_flux(doc):
    return FluxSpec.from_dict(doc.get("flux", {}))


def build_field_config(doc):
    from .field import FieldConfig

    s = dict(DEFAULTS["solver"])
    s.update(doc.get("solver", {}))
    initial = s["initial"]
    if isinstance(initial, list):
        initial = np.asarray(initial, float)
    return FieldConfig(
        build_law(doc), build_kernel(_need(doc, "kernel")), build_flux(doc),
        grid_points=int(s["grid_points"]), t_end=float(s["t_end"]), dt=float(s["dt"]),
        mode=s["mode"], C1=float(s["C1"]), C2=float(s["C2"]), C3=float(s["C3"]),
        initial=initial, save_every=s["save_every"], snap_grid=bool(s["snap_grid"]),
        scheme=s["scheme"])


def build_orbit_config(doc, renormalize=False):
    from .orbits import OrbitConfig

    f = build_flux(doc)
    o = dict(DEFAULTS["orbit"])
    o.update(doc.get("orbit", {}))
    return OrbitConfig(
        build_law(doc), build_kernel(_need(doc, "kernel")), l=f.l, m=f.m,
        r=float(o["r"]), s=float(o["s"]), self_interaction=f.self_interaction,
        renormalize=renormalize, xi0=o["xi0"], k=f.k, n_steps=int(o["n_steps"]),
        scale=o["scale"])


def sweep_values(spec: dict) -> list:
    """Parameter values of a sweep spec: explicit ``values`` or an inclusive
    ``start``/``stop``/``num`` grid."""
    if "values" in spec:
        vals = spec["values"]
    elif {"start", "stop", "num"} <= spec.keys():
        vals = np.linspace(spec["start"], spec["stop"], int(spec["num"])).tolist()
    else:
        raise ConfigError("sweep needs 'values' or 'start', 'stop' and 'num'")
    if spec["parameter"] in ("m", "l"):
        return [parse_threshold(v) for v in vals]
    return [float(v) for v in vals]


def sweep_value_to_json(v):
    return threshold_to_json(v) if v == float("inf") else v
