"""Scenario files: one JSON document describing a complete run.

Example::

    {
      "schema_version": 1,
      "name": "two-strand braid",
      "spectra": [
        {"chirality": 1, "a": 0.5, "c": 1.0},
        {"chirality": -1, "a": 0.8, "c": 1.0}
      ],
      "externals": {"kappa": 1.0, "beta": 0.0, "Z": [0.0, 0.0], "gamma": 1.0},
      "grid": {"L": 50.0, "N": 4096, "xi0_min": -5.0, "xi0_max": 5.0, "xi0_step": 0.1},
      "outputs": {"dir": "out/two_strand"},
      "tolerances": {"eps_cusp": 1e-7}
    }

A soliton record gives either ``a`` (eigenvalue i a) or ``re`` and ``im``,
plus a norming constant ``c`` (a number, or {"re", "im"} for complex
eigenvalues). Instead of a spectrum a chirality can be read from a field
file via ``"field_files": {"plus": "rho_plus.csv"}``; relative paths are
taken from the scenario file's directory.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import jsonschema

from .chiral_field import DEFAULT_TOL, ExternalVariables, GridSpec, Tolerances
from .errors import ValidationError
from .scattering import DiscreteSpectrum

SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_CONST = {"oneOf": [_NUMBER, {"type": "object", "required": ["re", "im"], "additionalProperties": False,
                              "properties": {"re": _NUMBER, "im": _NUMBER}}]}

SCHEMA = {
    "type": "object",
    "required": ["schema_version"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "spectra": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["chirality", "c"],
                "additionalProperties": False,
                "properties": {
                    "chirality": {"enum": [1, -1]},
                    "a": {"type": "number", "exclusiveMinimum": 0},
                    "re": _NUMBER,
                    "im": {"type": "number", "exclusiveMinimum": 0},
                    "c": _CONST,
                },
                "oneOf": [{"required": ["a"], "not": {"anyOf": [{"required": ["re"]}, {"required": ["im"]}]}},
                          {"required": ["im"], "not": {"required": ["a"]}}],
            },
        },
        "field_files": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"plus": {"type": "string"}, "minus": {"type": "string"}},
        },
        "externals": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "beta": _NUMBER,
                "Z": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
                "gamma": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "L": {"type": "number", "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 8},
                "xi0_min": _NUMBER,
                "xi0_max": _NUMBER,
                "xi0_step": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "snapshots": {"type": "integer", "minimum": 1},
                "xi1_stride": {"type": "integer", "minimum": 1},
                "lambda_max": {"type": "number", "exclusiveMinimum": 0},
                "n_lambda": {"type": "integer", "minimum": 2},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "exclusiveMinimum": 0} for k in DEFAULT_TOL.__dataclass_fields__},
        },
    },
}


class ScenarioError(ValidationError):
    """Invalid scenario; carries the offending line and/or field path."""

    def __init__(self, message, line=None, field=None, path=None):
        super().__init__(message)
        self.line = line
        self.field = field
        self.path = None if path is None else str(path)

    def to_record(self):
        return {"error": "ScenarioError", "message": str(self), "path": self.path,
                "line": self.line, "field": self.field}


@dataclass
class Scenario:
    spectra: dict  # chirality -> DiscreteSpectrum
    field_files: dict  # chirality -> Path
    externals: ExternalVariables
    grid: GridSpec
    xi0_min: float = -5.0
    xi0_max: float = 5.0
    xi0_step: float = 0.1
    out_dir: Path = Path("out")
    snapshots: int = 5
    xi1_stride: int = 8
    lambda_max: float = 5.0
    n_lambda: int = 201
    tolerances: Tolerances = DEFAULT_TOL
    name: str = ""
    source: Optional[Path] = None
    raw: dict = dc_field(default_factory=dict)

    @property
    def xi0_range(self):
        return (self.xi0_min, self.xi0_max)


def _field_path(err):
    return ".".join(str(p) for p in err.absolute_path) or "(root)"


def _line_of(text, err):
    """Best-effort line number of the innermost named key of a schema error."""
    keys = [p for p in err.absolute_path if isinstance(p, str)]
    return _line_of_key(text, keys[-1]) if keys else None


def parse_scenario(text: str, base_dir=Path("."), source=None) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON: {exc.msg}", line=exc.lineno, path=source) from exc
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise ScenarioError(f"{_field_path(e)}: {e.message}", line=_line_of(text, e),
                            field=_field_path(e), path=source)
    base_dir = Path(base_dir)
    groups = {1: [], -1: []}
    for k, rec in enumerate(raw.get("spectra", [])):
        lam = complex(0.0, rec["a"]) if "a" in rec else complex(rec.get("re", 0.0), rec["im"])
        c = rec["c"]
        c = complex(c["re"], c["im"]) if isinstance(c, dict) else complex(c, 0.0)
        groups[rec["chirality"]].append((lam, c))
    files = {}
    for key, s in (("plus", 1), ("minus", -1)):
        f = raw.get("field_files", {}).get(key)
        if f is None:
            continue
        if groups[s]:
            raise ScenarioError(f"chirality {key} has both a spectrum and a field file",
                                field=f"field_files.{key}", path=source)
        p = Path(f) if Path(f).is_absolute() else base_dir / f
        if not p.is_file():
            raise ScenarioError(f"field file {p} does not exist", field=f"field_files.{key}", path=source)
        files[s] = p
    spectra = {}
    for s, items in groups.items():
        if s in files:
            continue
        try:
            spectra[s] = DiscreteSpectrum(s, tuple(l for l, _ in items), tuple(c for _, c in items))
        except ValidationError as exc:
            raise ScenarioError(str(exc), field="spectra", path=source) from exc
    ex = raw.get("externals", {})
    externals = ExternalVariables(ex.get("kappa", 1.0), ex.get("beta", 0.0),
                                  tuple(ex.get("Z", (0.0, 0.0))), ex.get("gamma", 1.0))
    g = raw.get("grid", {})
    N = int(g.get("N", 4096))
    if N & (N - 1):
        raise ScenarioError(f"grid.N = {N} is not a power of two", line=_line_of_key(text, "N"),
                            field="grid.N", path=source)
    t0, t1 = float(g.get("xi0_min", -5.0)), float(g.get("xi0_max", 5.0))
    if t1 < t0:
        raise ScenarioError("grid.xi0_max is below grid.xi0_min", field="grid.xi0_max", path=source)
    out = raw.get("outputs", {})
    try:
        tol = DEFAULT_TOL.replace(**raw.get("tolerances", {}))
    except ValidationError as exc:
        raise ScenarioError(str(exc), field="tolerances", path=source) from exc
    return Scenario(spectra, files, externals, GridSpec(float(g.get("L", 50.0)), N), t0, t1,
                    float(g.get("xi0_step", 0.1)), Path(out.get("dir", "out")),
                    int(out.get("snapshots", 5)), int(out.get("xi1_stride", 8)),
                    float(out.get("lambda_max", 5.0)), int(out.get("n_lambda", 201)),
                    tol, raw.get("name", ""), None if source is None else Path(source), raw)


def _line_of_key(text, key):
    pos = text.find(f'"{key}"')
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", path=path) from exc
    return parse_scenario(text, path.parent, path)
