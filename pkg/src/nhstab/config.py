"""Scenario configuration: JSON documents validated against a schema.

Times in a scenario (``t_end``, ``dt``) are dimensionless, tau = omega*t,
with omega = hbar = 1 by default so that tau = t.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .dynamics import EvolutionConfig, NHHamiltonian
from .errors import ConfigError, NHStabError
from .models import (
    PerturbationParams,
    TunnelingComplexElementModel,
    TunnelingDetuningModel,
    model1_hamiltonian,
    model1_pure_state,
    model2_hamiltonian,
    model2_pure_state,
)
from .qmatrix import DensityMatrix, HermitianMatrix, VariationMatrix, parse_matrix_literal

SCHEMA_VERSION = 1

_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {
        "oneOf": [
            {"type": "number"},
            {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
            {
                "type": "array",
                "minItems": 1,
                "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
            },
        ]
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "model"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "model": {"enum": ["model1", "model2", "custom"]},
        "parameters": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega": {"type": "number", "exclusiveMinimum": 0},
                "hbar": {"type": "number", "exclusiveMinimum": 0},
                "lambda_tilde": {"type": "number"},
                "eta_tilde": {"type": "number"},
                "H_plus": _MATRIX,
                "Gamma": _MATRIX,
            },
        },
        "reference_state": {"oneOf": [{"enum": ["model1", "model2"]}, _MATRIX]},
        "perturbation": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"delta1": {"type": "number"}, "delta2": {"type": "number"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["matrix"],
                    "properties": {"matrix": _MATRIX},
                },
            ]
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "method": {"enum": ["RK4Fixed", "RK4Adaptive"]},
                "representation": {"enum": ["NormalizedRho", "OmegaThenNormalize"]},
                "renormalize_each_step": {"type": "boolean"},
                "singularity_trace_floor": {"type": "number", "exclusiveMinimum": 0},
                "blowup_ceiling": {"type": "number", "exclusiveMinimum": 0},
                "record_stride": {"type": "integer", "minimum": 1},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trajectory_csv": {"type": "string"},
                "stability_report": {"type": "string"},
                "figure_bundle": {"type": "string"},
            },
        },
        "sweep": {
            "type": "object",
            "required": ["parameter"],
            "additionalProperties": False,
            "properties": {
                "parameter": {"enum": ["lambda_tilde", "eta_tilde"]},
                "values": {"type": "array", "items": {"type": "number"}},
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "step": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

_EVOLUTION_DEFAULTS = {"t_end": 10.0, "dt": 1e-3, "record_stride": 10}


@dataclass
class Scenario:
    """A validated scenario ready to run."""

    model: str
    hamiltonian: NHHamiltonian
    omega: float
    reference: DensityMatrix | None
    initial: DensityMatrix | None
    evolution: EvolutionConfig
    raw: dict = field(repr=False)
    outputs: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    validate(doc)
    return doc


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc


def build_hamiltonian(doc: dict, overrides: dict | None = None) -> tuple[NHHamiltonian, float]:
    """Hamiltonian and omega (time unit) of a validated document."""
    params = dict(doc.get("parameters", {}))
    params.update(overrides or {})
    omega = float(params.get("omega", 1.0))
    hbar = float(params.get("hbar", 1.0))
    model = doc["model"]
    if model == "model1":
        if "lambda_tilde" not in params:
            raise ConfigError("model1 needs parameters.lambda_tilde")
        m = TunnelingDetuningModel.from_ratio(float(params["lambda_tilde"]), omega, hbar)
        return model1_hamiltonian(m), omega
    if model == "model2":
        if "eta_tilde" not in params:
            raise ConfigError("model2 needs parameters.eta_tilde")
        m = TunnelingComplexElementModel.from_ratio(float(params["eta_tilde"]), omega, hbar)
        return model2_hamiltonian(m), omega
    if "H_plus" not in params or "Gamma" not in params:
        raise ConfigError("custom model needs parameters.H_plus and parameters.Gamma")
    try:
        hp = HermitianMatrix(parse_matrix_literal(params["H_plus"]))
        g = HermitianMatrix(parse_matrix_literal(params["Gamma"]))
        return NHHamiltonian(hp, g, hbar), omega
    except (NHStabError, ValueError) as exc:
        raise ConfigError(f"bad custom Hamiltonian: {exc}") from exc


def _reference(doc: dict) -> DensityMatrix | None:
    ref = doc.get("reference_state", doc["model"] if doc["model"] != "custom" else None)
    if ref is None:
        return None
    if ref == "model1":
        return model1_pure_state()
    if ref == "model2":
        return model2_pure_state()
    try:
        return DensityMatrix(parse_matrix_literal(ref))
    except (NHStabError, ValueError) as exc:
        raise ConfigError(f"bad reference_state: {exc}") from exc


def _initial(doc: dict, ref: DensityMatrix | None) -> DensityMatrix | None:
    if ref is None:
        return None
    pert = doc.get("perturbation", {})
    try:
        if "matrix" in pert:
            delta = VariationMatrix(parse_matrix_literal(pert["matrix"]))
            if delta.dim != ref.dim:
                raise ConfigError("perturbation matrix dimension does not match the reference state")
            return DensityMatrix(ref.data + delta.data)
        p = PerturbationParams(float(pert.get("delta1", 0.0)), float(pert.get("delta2", 0.0)))
        if p.delta1 == 0 and p.delta2 == 0:
            return ref
        if ref.dim != 2:
            raise ConfigError("delta1/delta2 perturbations need a two-level reference; use 'matrix'")
        return DensityMatrix(ref.data + p.matrix)
    except (NHStabError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad perturbation: {exc}") from exc


def evolution_config(doc: dict, omega: float) -> EvolutionConfig:
    ev = {**_EVOLUTION_DEFAULTS, **doc.get("evolution", {})}
    try:
        return EvolutionConfig(
            t_end=ev["t_end"] / omega,
            dt=ev["dt"] / omega,
            method=ev.get("method", "RK4Fixed"),
            representation=ev.get("representation", "NormalizedRho"),
            renormalize_each_step=ev.get("renormalize_each_step", False),
            singularity_trace_floor=ev.get("singularity_trace_floor", 1e-10),
            blowup_ceiling=ev.get("blowup_ceiling", 1e12),
            record_stride=ev["record_stride"],
        )
    except ValueError as exc:
        raise ConfigError(f"bad evolution settings: {exc}") from exc


def build_scenario(doc: dict, overrides: dict | None = None) -> Scenario:
    H, omega = build_hamiltonian(doc, overrides)
    ref = _reference(doc)
    if ref is not None and ref.dim != H.dim:
        raise ConfigError(f"reference state has dim {ref.dim}, Hamiltonian has dim {H.dim}")
    init = _initial(doc, ref)
    return Scenario(doc["model"], H, omega, ref, init, evolution_config(doc, omega), doc,
                    dict(doc.get("outputs", {})))


def load_scenario(path) -> Scenario:
    return build_scenario(load_json(path))


def sweep_values(doc: dict) -> tuple[str, list[float]]:
    sw = doc.get("sweep")
    if sw is None:
        raise ConfigError("config has no 'sweep' section")
    name = sw["parameter"]
    expected = {"model1": "lambda_tilde", "model2": "eta_tilde"}.get(doc["model"])
    if name != expected:
        raise ConfigError(f"sweep parameter {name!r} does not belong to model {doc['model']!r}")
    if "values" in sw:
        values = [float(v) for v in sw["values"]]
    elif {"start", "stop", "step"} <= sw.keys():
        start, stop, step = float(sw["start"]), float(sw["stop"]), float(sw["step"])
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [] if n <= 0 else [round(start + i * step, 12) for i in range(n)]
    else:
        raise ConfigError("sweep needs either 'values' or 'start'/'stop'/'step'")
    if not values:
        raise ConfigError("sweep grid is empty")
    return name, values
