"""Experiment configuration: YAML file, JSON-schema validated, merged over defaults."""

from __future__ import annotations

import copy
import re
from pathlib import Path

import jsonschema
import yaml

CONFIG_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer


class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 only reads "1.0e-10" as a float; accept "1e-10" as well.
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"""),
    list("-+0123456789"),
)

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int_list = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}
_pos_list = {"type": "array", "items": _pos, "minItems": 1}


def _obj(props: dict, required=()):
    return {"type": "object", "additionalProperties": False, "properties": props, "required": list(required)}


FUNCTION_SPEC = {
    "oneOf": [
        _obj({"kind": {"const": "moser"}, "k": _pos, "label": {"type": "string"}}, ["kind", "k"]),
        _obj({"kind": {"const": "step"}, "c": _num, "R": _pos, "label": {"type": "string"}}, ["kind", "c", "R"]),
        _obj({"kind": {"const": "witness"}, "S": {"type": "number", "minimum": 10},
              "label": {"type": "string"}}, ["kind"]),
        _obj({"kind": {"const": "file"}, "path": {"type": "string"}, "label": {"type": "string"}},
             ["kind", "path"]),
    ]
}

EXTRACTION_SCHEMA = _obj({
    "threshold": _pos,
    "a_rule": {"enum": ["last", "tail_max"]},
    "limit_rule": {"enum": ["last", "richardson"]},
    "argmax_slack": {"type": "number", "minimum": 0},
    "y_grid": {"type": "array", "items": _num, "minItems": 2},
    "stop_eps": {"oneOf": [_pos, {"type": "null"}]},
    "stop_eps_rel": _pos,
    "max_levels": {"type": "integer", "minimum": 1},
    "orthogonality_bar": _pos,
    "ledger_tol": _pos,
    "zero_rtol": _pos,
    "force": {"type": "boolean"},
})

SCHEMA = _obj({
    "version": {"const": CONFIG_VERSION},
    "N": {"type": "integer", "minimum": 2},
    "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
    "threads": {"type": "integer", "minimum": 1},
    "quadrature": _obj({"rel_tol": _pos, "abs_tol": _pos, "max_subdivisions": {"type": "integer", "minimum": 1}}),
    "norms": _obj({"functions": {"type": "array", "items": FUNCTION_SPEC}, "theta": _pos}),
    "moser": _obj({"k": _pos_list, "theta": _pos}),
    "adams": _obj({"gamma_factors": _pos_list, "corpus_size": {"type": "integer", "minimum": 0},
                   "moser_k": _pos_list, "fit_k": _pos_list, "slope_tol": _pos}),
    "adachi": _obj({"gamma_factors": _pos_list, "corpus_size": {"type": "integer", "minimum": 0},
                    "moser_k": _pos_list, "beta": _pos_list, "eps": _pos_list}),
    "reduce": _obj({"corpus_size": {"type": "integer", "minimum": 0}, "moser_k": _pos_list,
                    "r0": {"oneOf": [_pos, {"type": "null"}]}}),
    "decompose": _obj({"manifest": {"type": "string"}, "extraction": EXTRACTION_SCHEMA}),
}, required=["N"])

DEFAULTS = {
    "version": CONFIG_VERSION,
    "N": 2,
    "seed": 0,
    "threads": 1,
    "quadrature": {"rel_tol": 1e-10, "abs_tol": 1e-12, "max_subdivisions": 10000},
    "norms": {"functions": [{"kind": "moser", "k": 1}, {"kind": "moser", "k": 10},
                            {"kind": "step", "c": 1.0, "R": 1.0}, {"kind": "witness", "S": 20}],
              "theta": 1.0},
    "moser": {"k": [5, 10, 20, 40], "theta": 1.0},
    "adams": {"gamma_factors": [0.5, 1.0, 1.2], "corpus_size": 20,
              "moser_k": [1, 2, 5, 10, 15, 20], "fit_k": list(range(10, 26)), "slope_tol": 0.15},
    "adachi": {"gamma_factors": [0.5, 0.9, 1.0], "corpus_size": 20, "moser_k": [5, 10, 20, 40],
               "beta": [0.3, 0.5, 0.7], "eps": [0.2, 0.5]},
    "reduce": {"corpus_size": 20, "moser_k": [3, 5], "r0": None},
    "decompose": {"manifest": "builtin:two_level", "extraction": {}},
}


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def validate(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        ptr = _pointer(e.absolute_path)
        raise ConfigError(f"config error at {ptr or '/'}: {e.message}", ptr)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "extraction":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Read, validate and merge over defaults.  Validation runs before any computation."""
    doc: dict = {}
    if path is not None:
        try:
            doc = yaml.load(Path(path).read_text(), Loader=_Loader) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a mapping at the top level", "/")
        if "N" not in doc:
            doc = {"N": DEFAULTS["N"], **doc}
        validate(doc)
    cfg = _merge(DEFAULTS, doc)
    if overrides:
        cfg = _merge(cfg, {k: v for k, v in overrides.items() if v is not None})
    validate(cfg)
    return cfg
