"""Run-configuration loading: JSON schema validation plus physics checks.

Schema violations (shape, types, unknown keys, mutually exclusive
fields) raise :class:`ConfigSchemaError` and map to CLI exit code 2;
physics-invariant violations surface as the usual package errors and
map to exit code 3.  Loading re-runs every module-level validator by
constructing the actual parameter records.
"""

import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .device import DeviceParams
from .drive import PulseSpec
from .errors import SquidGatesError
from .propagator import IntegratorConfig


class ConfigSchemaError(SquidGatesError):
    """Configuration file violates the JSON schema."""

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path


SOLVER_DEFAULTS = {"n_points": 256, "half_width": 0.35, "method": "product-basis",
                   "n_states": 20, "K": 16}
INTEGRATOR_DEFAULTS = {"dtau": 0.05, "record_stride": 20,
                       "method": "split-operator", "include_d12": False}


@dataclass(frozen=True)
class SolverConfig:
    n_points: int = 256
    half_width: float = 0.35
    method: str = "product-basis"
    n_states: int = 20
    K: int = 16


@dataclass(frozen=True)
class RunConfig:
    device: DeviceParams
    solver: SolverConfig
    integrator: IntegratorConfig
    include_d12: bool
    pulses: tuple
    resolved: dict      # fully-defaulted plain-dict echo of the input


def _schema():
    with resources.files("squidgates").joinpath("schema/config.schema.json").open() as f:
        return json.load(f)


def default_config_path():
    """Path of the shipped working-point configuration."""
    return str(resources.files("squidgates").joinpath("data/paper_defaults.json"))


def _device_from_section(sec):
    kwargs = dict(L=sec["L_pH"] * 1e-12, C=sec["C_fF"] * 1e-15,
                  xe1=sec["xe1"], xe2=sec["xe2"])
    if "beta_L" in sec:
        kwargs["beta_L"] = sec["beta_L"]
    else:
        kwargs["Ic"] = sec["Ic_uA"] * 1e-6
    if "kappa" in sec:
        kwargs["kappa"] = sec["kappa"]
    else:
        kwargs["M"] = sec["M_pH"] * 1e-12
    return DeviceParams(**kwargs)


def _pulse_from_entry(entry):
    return PulseSpec(line=entry["line"], amplitude=entry["amplitude"],
                     omega=entry["omega_over_omegaLC"], width=entry["width"],
                     t_start=entry.get("t_start", 0.0),
                     phase=entry.get("phase", 0.0),
                     envelope=entry.get("envelope", "rectangular"),
                     ramp_fraction=entry.get("ramp_fraction", 0.1))


def load_config_dict(raw):
    """Validate a configuration dict and build the typed RunConfig."""
    try:
        jsonschema.validate(raw, _schema())
    except jsonschema.ValidationError as exc:
        path = ".".join(str(k) for k in exc.absolute_path)
        raise ConfigSchemaError(f"config field {path or '<root>'}: {exc.message}",
                                path=path) from None
    device = _device_from_section(raw["device"])
    solver_sec = {**SOLVER_DEFAULTS, **raw.get("solver", {})}
    integ_sec = {**INTEGRATOR_DEFAULTS, **raw.get("integrator", {})}
    include_d12 = integ_sec.pop("include_d12")
    solver = SolverConfig(**solver_sec)
    integrator = IntegratorConfig(**integ_sec)
    pulses = tuple(_pulse_from_entry(e) for e in raw.get("pulses", []))

    device_echo = dict(raw["device"])
    resolved = {"device": device_echo, "solver": dict(solver_sec),
                "integrator": {**integ_sec, "include_d12": include_d12},
                "pulses": [dict(e) for e in raw.get("pulses", [])]}
    return RunConfig(device=device, solver=solver, integrator=integrator,
                     include_d12=include_d12, pulses=pulses, resolved=resolved)


def load_config(path):
    """Load and validate a configuration file (see errors above)."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigSchemaError(f"not valid JSON: {exc}") from None
    return load_config_dict(raw)
