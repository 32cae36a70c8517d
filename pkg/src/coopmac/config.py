"""Run configuration: JSON schema, override merging and object construction.

A configuration is one JSON object.  Every section is optional at the
schema level; each command checks for the sections it needs.  Unknown keys
are rejected everywhere.  Indices (fading entries, transmitters) are
0-based.  Powers and noise variances are given either linearly
(``power``, ``noise_var``) or in dB (``power_db``, ``noise_db``), never
both.
"""

from __future__ import annotations

import copy
import hashlib
import json
from typing import Any, Dict

import numpy as np
from jsonschema import Draft202012Validator

from .channel import (
    CsitQuantizer,
    FadingChannelSpec,
    FadingDistribution,
    NoCsit,
    ThresholdCsit,
    db_to_linear,
)
from .errors import ValidationError
from .expectation import MonteCarlo, Quadrature

__all__ = [
    "SCHEMA",
    "ConfigError",
    "validate",
    "merge",
    "load_overrides",
    "config_hash",
    "build_channel",
    "build_quantizer",
    "build_engine",
    "build_policy",
]

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 1}
_seed = {"type": "integer", "minimum": 0}


def _vec(item):
    return {"anyOf": [item, {"type": "array", "items": item, "minItems": 1}]}


def _obj(props: Dict[str, Any], required=()) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props,
            "required": list(required)}


_law = _obj({
    "pu": {"type": "array", "items": _nonneg, "minItems": 1},
    "px": {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "items": _nonneg, "minItems": 1}}},
}, required=("pu", "px"))

SCHEMA = _obj({
    "channel": _obj({
        "num_tx": _count,
        "num_rx": _count,
        "noise_var": _vec(_pos),
        "noise_db": _vec(_num),
        "power": _vec(_nonneg),
        "power_db": _vec(_num),
        "fading": {"oneOf": [
            _obj({"kind": {"const": "iid_rayleigh"}}, required=("kind",)),
            _obj({"kind": {"const": "deterministic"},
                  "matrix": {"type": "array", "minItems": 1,
                             "items": {"type": "array", "items": _nonneg, "minItems": 1}}},
                 required=("kind", "matrix")),
        ]},
    }, required=("num_tx", "num_rx")),
    "csit": {"type": "array", "items": {"oneOf": [
        _obj({"kind": {"const": "none"}}, required=("kind",)),
        _obj({"kind": {"const": "threshold"},
              "entry": {"type": "array", "items": {"type": "integer", "minimum": 0},
                        "minItems": 2, "maxItems": 2},
              "cuts": {"type": "array", "items": _num, "minItems": 1}},
             required=("kind", "entry", "cuts")),
    ]}},
    "policy": _obj({
        "power": {"type": "array", "items": {"type": "array", "items": _nonneg, "minItems": 1}},
        "corr": {"type": "array", "items": {"type": "array",
                                            "items": {"type": "number", "minimum": 0, "maximum": 1},
                                            "minItems": 1}},
    }),
    "engine": {"oneOf": [
        _obj({"kind": {"const": "mc"}, "samples": {"type": "integer", "minimum": 2}, "seed": _seed},
             required=("kind",)),
        _obj({"kind": {"const": "quad"}, "nodes": _count}, required=("kind",)),
    ]},
    "conferencing": _obj({"c12": _nonneg, "c21": _nonneg}),
    "region": _obj({"common_message": {"type": "boolean"}}),
    "frontier": _obj({
        "directions": {"type": "integer", "minimum": 2},
        "weights": {"type": "array", "minItems": 1,
                    "items": {"type": "array", "items": _nonneg, "minItems": 1}},
        "rho_points": _count,
        "power_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "max_policies": _count,
    }),
    "discrete": _obj({
        "num_tx": _count,
        "transition": {"type": "array", "minItems": 1},
        "law": _law,
        "grid_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "u_size_cap": _count,
        "weights": {"type": "array", "minItems": 1,
                    "items": {"type": "array", "items": _nonneg, "minItems": 1}},
        "max_laws": _count,
    }, required=("num_tx", "transition")),
    "simulate": _obj({
        "rates": {"type": "array", "items": _nonneg, "minItems": 1},
        "n_list": {"type": "array", "items": _count, "minItems": 1},
        "trials": {"type": "integer", "minimum": 100},
        "eps": _pos,
        "seed": _seed,
        "law": _law,
        "symbol_budget": _count,
    }, required=("rates", "n_list")),
    "equiv": _obj({"policies": _count, "states": _count, "seed": _seed}),
    "reproduce": _obj({
        "mc_samples": {"type": "integer", "minimum": 2},
        "mc_seed": _seed,
        "quad_nodes": _count,
        "directions": {"type": "integer", "minimum": 2},
        "rho_points": _count,
    }),
    "output": _obj({"dir": {"type": "string"}, "format": {"enum": ["csv", "json"]}}),
})

_VALIDATOR = Draft202012Validator(SCHEMA)


class ConfigError(ValidationError):
    """Invalid configuration; ``pointer`` is a JSON pointer to the offending key."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.message = message


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(config: dict) -> dict:
    """Check ``config`` against :data:`SCHEMA` and the cross-field rules."""
    errors = sorted(_VALIDATOR.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        # inside a oneOf, report the branch selected by its "kind" constant
        while err.context:
            branches = {}
            for sub in err.context:
                branches.setdefault(sub.relative_schema_path[0], []).append(sub)
            matching = [b for b in branches.values() if not any(e.validator == "const" for e in b)]
            pool = [e for b in matching for e in b] or err.context
            err = max(pool, key=lambda e: len(e.absolute_path))
        path = list(err.absolute_path)
        if err.validator == "additionalProperties":
            extra = [k for k in err.instance if k not in err.schema.get("properties", {})]
            if extra:
                path.append(sorted(extra)[0])
        raise ConfigError(_pointer(path), err.message)
    ch = config.get("channel")
    if ch is not None:
        for lin, db in (("power", "power_db"), ("noise_var", "noise_db")):
            if lin in ch and db in ch:
                raise ConfigError(f"/channel/{db}", f"'{lin}' and '{db}' are mutually exclusive")
    return config


def merge(base: dict, overrides: dict) -> dict:
    """Recursive merge; override values replace base values except nested objects."""
    out = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_overrides(doc: dict) -> dict:
    """Overrides from a plain JSON object or from an exported result document."""
    if "provenance" in doc and "config" in doc:
        return doc["config"]
    return doc


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _per(value, count: int, pointer: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.repeat(arr, count)
    if arr.size != count:
        raise ConfigError(pointer, f"expected {count} values, got {arr.size}")
    return arr


def build_channel(config: dict) -> FadingChannelSpec:
    ch = config.get("channel")
    if ch is None:
        raise ConfigError("/channel", "this command needs a channel section")
    p, q = ch["num_tx"], ch["num_rx"]
    if "power_db" in ch:
        power = db_to_linear(_per(ch["power_db"], p, "/channel/power_db"))
    elif "power" in ch:
        power = _per(ch["power"], p, "/channel/power")
    else:
        raise ConfigError("/channel", "one of 'power' or 'power_db' is required")
    if "noise_db" in ch:
        noise = db_to_linear(_per(ch["noise_db"], q, "/channel/noise_db"))
    else:
        noise = _per(ch.get("noise_var", 1.0), q, "/channel/noise_var")
    fad = ch.get("fading", {"kind": "iid_rayleigh"})
    if fad["kind"] == "deterministic":
        matrix = np.asarray(fad["matrix"], dtype=float)
        if matrix.shape != (q, p):
            raise ConfigError("/channel/fading/matrix", f"matrix must have shape ({q}, {p})")
        fading = FadingDistribution.deterministic(matrix)
    else:
        fading = FadingDistribution.iid_rayleigh()
    try:
        return FadingChannelSpec(p, q, noise, power, fading)
    except ValidationError as exc:
        raise ConfigError("/channel", str(exc)) from exc


def build_quantizer(config: dict, num_tx: int) -> CsitQuantizer:
    items = config.get("csit")
    if items is None:
        return CsitQuantizer.none(num_tx)
    if len(items) != num_tx:
        raise ConfigError("/csit", f"expected {num_tx} CSIT descriptors")
    q, p = config["channel"]["num_rx"], config["channel"]["num_tx"]
    maps = []
    for i, item in enumerate(items):
        if item["kind"] == "none":
            maps.append(NoCsit())
        else:
            j, k = item["entry"]
            if j >= q or k >= p:
                raise ConfigError(f"/csit/{i}/entry", "entry outside the state matrix")
            if list(item["cuts"]) != sorted(item["cuts"]):
                raise ConfigError(f"/csit/{i}/cuts", "cut points must be increasing")
            maps.append(ThresholdCsit((j, k), item["cuts"]))
    return CsitQuantizer(maps)


def build_engine(config: dict, default=None):
    eng = config.get("engine")
    if eng is None:
        return default if default is not None else Quadrature()
    if eng["kind"] == "mc":
        return MonteCarlo(eng.get("samples", 200_000), eng.get("seed", 0))
    return Quadrature(eng.get("nodes", 64))


def build_policy(config: dict, spec: FadingChannelSpec, quantizer: CsitQuantizer):
    """Tables from the policy section; missing tables mean full power and zero correlation."""
    from .fading import TransmitPolicy

    pol = config.get("policy", {})
    power = pol.get("power")
    corr = pol.get("corr")
    if power is None:
        power = [[float(P)] for P in spec.power_budget]
    if corr is None:
        corr = [[0.0] for _ in range(spec.num_tx)]
    for name, tables in (("power", power), ("corr", corr)):
        if len(tables) != spec.num_tx:
            raise ConfigError(f"/policy/{name}", f"expected {spec.num_tx} tables")
        for i, (t, m) in enumerate(zip(tables, quantizer.sizes)):
            if len(t) not in (1, m):
                raise ConfigError(f"/policy/{name}/{i}", f"table needs 1 or {m} entries")
    return TransmitPolicy(tuple(np.asarray(t, float) for t in power),
                          tuple(np.asarray(t, float) for t in corr))
