"""Planted sequence families and manifest files.

A manifest is a YAML file listing one two-column function file per index,
plus optional extraction settings and the planted levels (if synthetic)::

    N: 2
    entries:
      - {index: 4, file: u_4.txt}
    extraction: {limit_rule: richardson}
    planted:
      - {profile: moser, law: power, p: 1}
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema
import yaml

from .concentration import (
    ConcentrationFamily,
    Profile,
    ScaleSequence,
    moser_function,
    moser_profile,
    superpose,
    triangle_profile,
)
from .decomposition import ExtractionConfig, SequenceFamily
from .radial import Dimension
from .textio import atomic_write_text, dumps, load

TWO_LEVEL_INDICES = (4, 8, 16, 32, 64)

PROFILES = {"moser": moser_profile, "triangle": triangle_profile}

MANIFEST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["N", "entries"],
    "properties": {
        "N": {"type": "integer", "minimum": 2},
        "description": {"type": "string"},
        "entries": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["index", "file"],
                "properties": {"index": {"type": "integer", "minimum": 1}, "file": {"type": "string"}},
            },
        },
        "extraction": {"type": "object"},
        "planted": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["profile", "law"],
                "properties": {
                    "profile": {"enum": sorted(PROFILES)},
                    "law": {"enum": ["power", "nlogn"]},
                    "p": {"type": "number"},
                },
            },
        },
    },
}


def planted_families(dim: Dimension, planted: Sequence[dict], indices: Sequence[int]) -> list[ConcentrationFamily]:
    return [ConcentrationFamily(PROFILES[p["profile"]](),
                                ScaleSequence.from_law(indices, p["law"], p.get("p", 1.0)), dim)
            for p in planted]


TWO_LEVEL_PLANTED = (
    {"profile": "moser", "law": "power", "p": 1},
    {"profile": "triangle", "law": "power", "p": 2},
)


def two_level_family(dim: Dimension | int = 2, indices: Sequence[int] = TWO_LEVEL_INDICES) -> SequenceFamily:
    """``u_n = g_n[L, n] + g_n[triangle, n^2]``."""
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    fams = planted_families(dim, TWO_LEVEL_PLANTED, indices)
    return SequenceFamily(dim, indices, [superpose(fams, n) for n in indices])


def moser_family(dim: Dimension | int = 2, n_max: int = 64) -> SequenceFamily:
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    idx = list(range(1, n_max + 1))
    return SequenceFamily(dim, idx, [moser_function(dim, n) for n in idx])


def write_manifest(directory, fam: SequenceFamily, extraction: dict | None = None,
                   planted: Sequence[dict] | None = None, description: str | None = None) -> Path:
    directory = Path(directory)
    entries = []
    for n, f in zip(fam.indices, fam.functions):
        name = f"u_{n}.txt"
        atomic_write_text(directory / name, dumps(f))
        entries.append({"index": n, "file": name})
    doc = {"N": fam.dim.N}
    if description:
        doc["description"] = description
    doc["entries"] = entries
    if extraction:
        doc["extraction"] = dict(extraction)
    if planted:
        doc["planted"] = [dict(p) for p in planted]
    path = directory / "manifest.yaml"
    atomic_write_text(path, yaml.safe_dump(doc, sort_keys=False))
    return path


def load_manifest(path) -> tuple[SequenceFamily, dict, list]:
    """Returns ``(family, extraction overrides, planted levels)``."""
    path = Path(path)
    doc = yaml.safe_load(path.read_text())
    jsonschema.validate(doc, MANIFEST_SCHEMA)
    dim = Dimension(doc["N"])
    entries = sorted(doc["entries"], key=lambda e: e["index"])
    funcs = []
    for e in entries:
        f = load(path.parent / e["file"])
        if getattr(f, "dim", None) != dim:
            raise ValueError(f"{e['file']}: not a LogRadialFunction in N={dim.N}")
        funcs.append(f)
    fam = SequenceFamily(dim, [e["index"] for e in entries], funcs)
    return fam, dict(doc.get("extraction", {})), list(doc.get("planted", []))


def extraction_config(overrides: dict) -> ExtractionConfig:
    return ExtractionConfig(**overrides)


def builtin_manifest(name: str = "two_level") -> Path:
    """Path of a manifest shipped with the package."""
    root = resources.files("hardy_adams") / "data" / name / "manifest.yaml"
    return Path(str(root))


def planted_profiles(planted: Sequence[dict]) -> list[Profile]:
    return [PROFILES[p["profile"]]() for p in planted]
