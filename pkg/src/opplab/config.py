"""Experiment configuration: JSON, schema-validated, unknown keys rejected."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import ConfigurationError
from .expansion import SCHEMES
from .families import DistributionFamily
from .model import ModelSpec, PRESETS, iid_model, phi_from_dict, preset, q_from_dict
from .statistics import THEOREMS
from .verify import LEMMAS

EXIT_PARSE = 2
EXIT_SCHEMA = 3

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}
_RATIONAL = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}
_GRID = {"type": "array", "items": _NUM, "minItems": 1}
_INT_GRID = {"type": "array", "items": _POS_INT, "minItems": 1}


def _obj(props: dict, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


FAMILY_SCHEMA = _obj({
    "kind": {"enum": ["uniform", "power", "perturbed-power"]},
    "alpha": {"type": "number", "exclusiveMinimum": 0},
    "coeffs": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
}, ["kind"])

PHI_SCHEMA = _obj({
    "kind": {"enum": ["constant", "linear", "sylvester", "table"]},
    "value": _RATIONAL,
    "scale": _RATIONAL,
    "table": {"type": "object", "additionalProperties": _RATIONAL},
    "default": {"type": "object"},
}, ["kind"])

Q_SCHEMA = _obj({
    "kind": {"enum": ["constant", "reciprocal"]},
    "value": _RATIONAL,
    "scale": _RATIONAL,
}, ["kind"])

MODEL_SCHEMA = _obj({
    "preset": {"enum": list(PRESETS) + ["iid"]},
    "name": {"type": "string"},
    "phi": PHI_SCHEMA,
    "q": Q_SCHEMA,
    "family": {"oneOf": [FAMILY_SCHEMA, {"type": "array", "items": FAMILY_SCHEMA, "minItems": 1}]},
    "alpha": _NUM,
    "L": _NUM,
})

WEIGHTS_SCHEMA = _obj({
    "u": _NUM, "v": _NUM, "s": _NUM, "r": _NUM,
    "p": {"type": "number"},
    "j0": _POS_INT,
})

RHO_SCHEMA = _obj({"exponent": _NUM, "log_exponent": _NUM, "scale": {"type": "number", "exclusiveMinimum": 0}})
ARRAY_SCHEMA = _obj({"kind": {"enum": ["inverse_square_log", "power"]}, "exponent": _NUM}, ["kind"])

TASK_SCHEMAS = {
    "expand": _obj({
        "kind": {"const": "expand"},
        "x": {"type": "string"},
        "scheme": {"enum": list(SCHEMES)},
        "max_digits": _POS_INT,
    }, ["kind", "x", "scheme"]),
    "sample": _obj({
        "kind": {"const": "sample"},
        "n": _POS_INT,
        "replications": _POS_INT,
        "mode": {"enum": ["exact", "fast"]},
        "v_bits": {"enum": [64, 128]},
    }, ["kind", "n"]),
    "verify": _obj({
        "kind": {"const": "verify"},
        "lemma": {"enum": list(LEMMAS)},
        "N": _POS_INT,
        "n": _POS_INT,
        "x_grid": _GRID,
        "q_grid": {"type": "array", "items": {"oneOf": [_NUM, {"enum": ["alpha"]}]}, "minItems": 1},
        "t_grid": _GRID,
        "n_grid": _INT_GRID,
        "weights": WEIGHTS_SCHEMA,
        "alpha": _NUM,
        "p": _NUM,
        "l_prime": _NUM,
        "ij_grid": {"type": "array", "items": {"type": "array", "items": _POS_INT, "minItems": 2,
                                               "maxItems": 2}, "minItems": 1},
    }, ["kind", "lemma"]),
    "law": _obj({
        "kind": {"const": "law"},
        "theorem": {"enum": list(THEOREMS)},
        "weights": WEIGHTS_SCHEMA,
        "p": _NUM,
        "beta": _NUM,
        "rho": RHO_SCHEMA,
        "array": ARRAY_SCHEMA,
        "n_grid": _INT_GRID,
        "replications": _POS_INT,
        "eps": _GRID,
        "mc_reps": _POS_INT,
    }, ["kind", "theorem", "n_grid", "replications"]),
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "opplab experiment",
    **_obj({
        "model": MODEL_SCHEMA,
        "task": {"type": "object", "required": ["kind"],
                 "properties": {"kind": {"enum": list(TASK_SCHEMAS)}}},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output_dir": {"type": "string"},
        "threads": _POS_INT,
    }, ["task"]),
}


class ConfigError(ConfigurationError):
    """Config rejected; ``violations`` lists (field path, message) pairs."""

    def __init__(self, message, exit_code=EXIT_SCHEMA, violations=()):
        super().__init__(message)
        self.exit_code = exit_code
        self.violations = list(violations)


def _path(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def _semantic(cfg: dict) -> list:
    out = []
    task = cfg["task"]
    kind = task["kind"]
    if kind in ("sample", "verify", "law") and "model" not in cfg:
        out.append(("model", f"a {kind} task needs a model section"))
    if kind == "law":
        th = task["theorem"]
        if th == "thm5":
            p = task.get("p", task.get("weights", {}).get("p", 2.0))
            if p < 2:
                out.append(("task/p", "p must be ≥ 2"))
            if task.get("beta", 1.0) <= 0:
                out.append(("task/beta", "beta must be > 0"))
        elif th == "thm4":
            if "array" not in task:
                out.append(("task/array", "thm4 needs a triangular array"))
        elif "weights" not in task:
            out.append(("task/weights", f"{th} needs weights"))
        if sorted(task["n_grid"]) != list(task["n_grid"]):
            out.append(("task/n_grid", "n grid must be increasing"))
    model = cfg.get("model", {})
    if model and "preset" not in model and "phi" not in model:
        out.append(("model", "give either a preset or a phi map"))
    return out


def validate_config(cfg) -> dict:
    """Schema plus semantic checks; raises :class:`ConfigError` listing every violation."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = [(_path(e), e.message) for e in sorted(validator.iter_errors(cfg), key=lambda e: list(e.path))]
    if not errors:
        kind = cfg["task"]["kind"]
        task_validator = jsonschema.Draft202012Validator(TASK_SCHEMAS[kind])
        errors = [("task/" + _path(e) if e.absolute_path else "task", e.message)
                  for e in task_validator.iter_errors(cfg["task"])]
    if not errors:
        errors = _semantic(cfg)
    if errors:
        text = "; ".join(f"{p}: {m}" for p, m in errors)
        raise ConfigError(f"invalid config: {text}", EXIT_SCHEMA, errors)
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})", EXIT_PARSE) from exc
    return validate_config(cfg)


def resolve(cfg: dict, seed=None, out=None) -> dict:
    """Apply CLI overrides and defaults; the result is echoed in the manifest."""
    cfg = json.loads(json.dumps(cfg))
    if seed is not None:
        cfg["seed"] = int(seed)
    if out is not None:
        cfg["output_dir"] = str(out)
    cfg.setdefault("seed", 0)
    cfg.setdefault("output_dir", "opplab-out")
    env = os.environ.get("OPPLAB_THREADS")
    if env:
        cfg["threads"] = int(env)
    cfg.setdefault("threads", os.cpu_count() or 1)
    return validate_config(cfg)


def build_model(section: dict) -> ModelSpec:
    fam_data = section.get("family")
    if isinstance(fam_data, list):
        family = tuple(DistributionFamily.from_dict(f) for f in fam_data)
    else:
        family = DistributionFamily.from_dict(fam_data) if fam_data else DistributionFamily.uniform()
    name = section.get("preset")
    try:
        if name == "iid":
            return iid_model(family if not isinstance(family, tuple) else family[0], section.get("name"))
        if name:
            return preset(name, family if not isinstance(family, tuple) else None)
        return ModelSpec(name=section.get("name", "custom"), phi=phi_from_dict(section["phi"]),
                         q=q_from_dict(section.get("q", {"kind": "constant"})), family=family,
                         alpha_meta=section.get("alpha"), l_meta=section.get("L"))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"model: {exc}", EXIT_SCHEMA, [("model", str(exc))]) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @property
    def task(self) -> dict:
        return self.raw["task"]

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def output_dir(self) -> Path:
        return Path(self.raw["output_dir"])

    @property
    def threads(self) -> int:
        return self.raw["threads"]

    def model(self) -> ModelSpec:
        return build_model(self.raw["model"])
