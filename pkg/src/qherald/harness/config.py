"""JSON run configuration.

Angular-rate fields carry an explicit ``_over_2pi_mhz`` suffix and are
converted to rad/us on load (the laboratory convention quotes kappa/2pi
etc., and silent 2pi mistakes are the classic failure mode).  Plain decay
rates use ``_per_us``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from ..cavity import SystemParams
from ..exceptions import ConfigError

TWO_PI = 2.0 * math.pi

_PAIR = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_EFF = {"type": "number", "exclusiveMinimum": 0.0, "maximum": 1.0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["chi_over_2pi_mhz", "kappa_over_2pi_mhz"],
            "properties": {
                "chi_over_2pi_mhz": _PAIR,
                "kappa_over_2pi_mhz": _PAIR,
                "kappa_in_over_2pi_mhz": _PAIR,
                "delta_over_2pi_mhz": _PAIR,
                "gamma1_per_us": _PAIR,
                "gamma_phi_per_us": _PAIR,
                "etabar": _PAIR,
                "eta": _EFF,
                "gain": {"type": ["number", "null"], "exclusiveMinimum": 1.0},
            },
        },
        "drive": {
            "type": "object",
            "additionalProperties": False,
            "required": ["eps_m_over_2pi_mhz", "t_s_us", "t_e_us"],
            "properties": {
                "shape": {"enum": ["rect_ramped"]},
                "eps_m_over_2pi_mhz": {"type": "number"},
                "t_s_us": {"type": "number", "minimum": 0.0},
                "t_e_us": {"type": "number", "exclusiveMinimum": 0.0},
                "t_ramp_us": {"type": "number", "minimum": 0.0},
                "balance": {"type": "boolean"},
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt_us": {"type": "number", "exclusiveMinimum": 0.0},
                "dt_out_us": {"type": "number", "exclusiveMinimum": 0.0},
                "t_m_us": {"type": "number", "exclusiveMinimum": 0.0},
                "dt_full_us": {"type": "number", "exclusiveMinimum": 0.0},
                "dt_cavity_us": {"type": ["number", "null"], "exclusiveMinimum": 0.0},
                "n_fock": {"type": "integer", "minimum": 2},
                "model": {"enum": ["reduced", "full"]},
                "relaxation": {"type": "boolean"},
                "leak_threshold": {"type": "number", "exclusiveMinimum": 0.0},
            },
        },
        "ensemble": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_traj": {"type": "integer", "minimum": 1},
                "base_seed": {"type": "integer", "minimum": 0},
                "n_workers": {"type": "integer", "minimum": 1},
            },
        },
        "herald": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"threshold": {"type": ["number", "null"]}},
        },
        "amplifier": {
            "type": "object",
            "additionalProperties": False,
            "required": [
                "kappa_si_over_2pi_mhz",
                "kappa_id_over_2pi_mhz",
                "lambda_over_2pi_mhz",
            ],
            "properties": {
                "kappa_si_over_2pi_mhz": {"type": "number", "exclusiveMinimum": 0.0},
                "kappa_id_over_2pi_mhz": {"type": "number", "exclusiveMinimum": 0.0},
                "lambda_over_2pi_mhz": {"type": "number", "minimum": 0.0},
                "phi_rad": {"type": "number"},
                "omega_max_over_2pi_mhz": {"type": "number", "exclusiveMinimum": 0.0},
                "n_points": {"type": "integer", "minimum": 3},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axis", "start", "stop", "num"],
            "properties": {
                "axis": {"enum": ["eta", "Lambda", "gamma2"]},
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "num": {"type": "integer", "minimum": 2},
                "lambda_m": {"type": ["number", "null"]},
                "optimize_lambda": {"type": "boolean"},
                "gamma2_s_per_us": {"type": "number", "minimum": 0.0},
                "eta_t": {"type": ["number", "null"]},
                "t_m_us": {"type": "number", "exclusiveMinimum": 0.0},
            },
        },
    },
}

_SIM_DEFAULTS = {
    "dt_us": 1e-4,
    "dt_out_us": 1e-3,
    "dt_full_us": 2e-5,
    "dt_cavity_us": None,
    "n_fock": 8,
    "model": "reduced",
    "relaxation": False,
    "leak_threshold": 1e-5,
}
_ENSEMBLE_DEFAULTS = {"n_traj": 10000, "base_seed": 20260809, "n_workers": 1}


@dataclass
class RunConfig:
    """Validated run configuration with all defaults resolved."""

    raw: dict
    system: dict = field(default_factory=dict)
    drive: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    ensemble: dict = field(default_factory=dict)
    herald: dict = field(default_factory=dict)
    amplifier: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as err:
            path = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ConfigError(f"config field {path}: {err.message}") from err

        cfg = cls(raw=data)
        cfg.system = dict(data.get("system", {}))
        cfg.drive = {"shape": "rect_ramped", "t_ramp_us": 0.0, "balance": True}
        cfg.drive.update(data.get("drive", {}))
        cfg.simulation = dict(_SIM_DEFAULTS)
        cfg.simulation.update(data.get("simulation", {}))
        cfg.ensemble = dict(_ENSEMBLE_DEFAULTS)
        cfg.ensemble.update(data.get("ensemble", {}))
        cfg.herald = {"threshold": None}
        cfg.herald.update(data.get("herald", {}))
        cfg.amplifier = {"phi_rad": 0.0, "omega_max_over_2pi_mhz": 50.0, "n_points": 201}
        cfg.amplifier.update(data.get("amplifier", {}))
        cfg.sweep = {
            "lambda_m": None,
            "optimize_lambda": False,
            "gamma2_s_per_us": 0.0,
            "eta_t": None,
            "t_m_us": 1.0,
        }
        cfg.sweep.update(data.get("sweep", {}))
        cfg._cross_validate()
        return cfg

    def _cross_validate(self) -> None:
        if self.drive and "t_m_us" in self.simulation:
            if self.drive.get("t_e_us", 0.0) > self.simulation["t_m_us"]:
                raise ConfigError("drive.t_e_us must not exceed simulation.t_m_us")
        if self.simulation["dt_out_us"] < self.simulation["dt_us"]:
            raise ConfigError("simulation.dt_out_us must be >= dt_us")

    def system_params(self) -> SystemParams:
        s = self.system
        if "chi_over_2pi_mhz" not in s:
            raise ConfigError("config requires a 'system' section for this command")

        def pair(key, default=(0.0, 0.0), scale=1.0):
            v = s.get(key)
            return default if v is None else (scale * v[0], scale * v[1])

        try:
            return SystemParams(
                chi=pair("chi_over_2pi_mhz", scale=TWO_PI),
                kappa=pair("kappa_over_2pi_mhz", scale=TWO_PI),
                kappa_in=pair("kappa_in_over_2pi_mhz", scale=TWO_PI),
                delta=pair("delta_over_2pi_mhz", scale=TWO_PI),
                gamma1=pair("gamma1_per_us"),
                gamma_phi=pair("gamma_phi_per_us"),
                etabar=pair("etabar", default=(1.0, 1.0)),
                eta=s.get("eta", 1.0),
                gain=s.get("gain"),
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def drive_params(self) -> dict:
        if "eps_m_over_2pi_mhz" not in self.drive:
            raise ConfigError("config requires a 'drive' section for this command")
        return {
            "eps_m": TWO_PI * self.drive["eps_m_over_2pi_mhz"],
            "t_s": self.drive["t_s_us"],
            "t_e": self.drive["t_e_us"],
            "t_ramp": self.drive["t_ramp_us"],
            "shape": self.drive["shape"],
        }

    def t_m(self) -> float:
        return self.simulation.get("t_m_us") or self.drive.get("t_e_us", 1.0)

    def resolved(self) -> dict:
        return {
            "system": self.system,
            "drive": self.drive,
            "simulation": self.simulation,
            "ensemble": self.ensemble,
            "herald": self.herald,
            "amplifier": self.amplifier,
            "sweep": self.sweep,
        }


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    return RunConfig.from_dict(data)
