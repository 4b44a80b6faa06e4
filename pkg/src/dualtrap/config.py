"""Human-editable run configuration with explicit unit suffixes.

Every physical quantity in a config file is a string like ``"2.5 kVpp"``,
``"17.5 MHz"`` or ``"800 e"``; the parser converts to strict SI (rad/s
for frequencies, zero-to-peak volts for amplitudes, kg, m, counts of e
for charge) and refuses unit/dimension mismatches.  Serialization emits
SI base units with full float precision, so parse -> serialize -> parse
is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from . import presets
from .cooling import LaserParams, NoiseBudget
from .errors import ConfigError
from .trap import ParticleSpec, TrapConfig

TWO_PI = 2.0 * math.pi

# factor tables per dimension; "angular" means the target is rad/s and a
# cyclic unit brings a 2*pi
_UNITS: dict[str, dict[str, float]] = {
    "voltage": {"V": 1.0, "mV": 1e-3, "kV": 1e3,
                "Vpp": 0.5, "mVpp": 0.5e-3, "kVpp": 0.5e3},
    "angular_frequency": {"rad/s": 1.0, "krad/s": 1e3, "Mrad/s": 1e6,
                          "Hz": TWO_PI, "kHz": TWO_PI * 1e3,
                          "MHz": TWO_PI * 1e6, "GHz": TWO_PI * 1e9,
                          "nHz": TWO_PI * 1e-9, "uHz": TWO_PI * 1e-6,
                          "mHz": TWO_PI * 1e-3},
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "mass": {"kg": 1.0},
    "charge_counts": {"e": 1.0},
    "power": {"J/s": 1.0, "W": 1.0},
    "field_gain": {"V/m/V": 1.0, "(V/m)/V": 1.0},
    "dimensionless": {"": 1.0},
}

# canonical unit written back out per dimension
_CANONICAL = {"voltage": "V", "angular_frequency": "rad/s", "length": "m",
              "mass": "kg", "charge_counts": "e", "power": "J/s",
              "field_gain": "V/m/V", "dimensionless": ""}


def parse_quantity(text, dimension: str) -> float:
    """Parse ``"2.5 kVpp"`` and friends into SI for the given dimension."""
    table = _UNITS[dimension]
    if isinstance(text, (int, float)):
        return float(text)  # bare numbers are taken as SI base units
    parts = str(text).split()
    if len(parts) == 1:
        try:
            return float(parts[0])
        except ValueError as err:
            raise ConfigError(f"cannot parse quantity {text!r}") from err
    if len(parts) != 2:
        raise ConfigError(f"expected 'value unit', got {text!r}")
    value_s, unit = parts
    try:
        value = float(value_s)
    except ValueError as err:
        raise ConfigError(f"bad number in {text!r}") from err
    if unit not in table:
        raise ConfigError(
            f"unit {unit!r} not valid for {dimension} (allowed: "
            f"{', '.join(u for u in table if u)})")
    return value * table[unit]


def format_quantity(value: float, dimension: str) -> str:
    unit = _CANONICAL[dimension]
    return f"{value!r} {unit}".strip() if unit else repr(value)


@dataclass
class RunConfig:
    """Everything a CLI run needs: trap, particles, laser, noise budget,
    output location, seed, worker count, and free-form per-subcommand
    options."""

    scenario: str
    trap: TrapConfig
    ion: ParticleSpec
    nanoparticle: ParticleSpec
    laser: LaserParams
    noise: NoiseBudget
    outdir: str = "out"
    seed: int = 0
    workers: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def reference_config(np_variant: str = "nominal") -> RunConfig:
    laser = presets.reference_laser()
    return RunConfig(
        scenario="reference",
        trap=presets.reference_trap(),
        ion=presets.reference_ion(),
        nanoparticle=presets.reference_nanoparticle(np_variant),
        laser=laser,
        noise=presets.reference_noise(laser),
    )


_TRAP_FIELDS = {
    "r0": "length", "kappa_geo": "dimensionless",
    "omega_slow": "angular_frequency", "omega_fast": "angular_frequency",
    "v_slow": "voltage", "v_fast": "voltage", "v_endcap": "voltage",
    "comp_gain": "field_gain", "axial_gain": "dimensionless",
}
_PARTICLE_FIELDS = {"charge": "charge_counts", "mass": "mass"}
_LASER_FIELDS = {
    "wavelength": "length", "linewidth": "angular_frequency",
    "saturation": "dimensionless", "detuning": "angular_frequency",
    "emission_factor": "dimensionless",
}
_NOISE_FIELDS = {
    "heating_ion": "power", "heating_np": "power",
    "gamma_ion": "angular_frequency", "gamma_np": "angular_frequency",
}


def _parse_section(mapping, fields, cls, extra=None):
    kwargs = dict(extra or {})
    for key, raw in mapping.items():
        if key not in fields:
            raise ConfigError(f"unknown key {key!r} for {cls.__name__}")
        kwargs[key] = parse_quantity(raw, fields[key])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid {cls.__name__}: {err}") from err


def _parse_trap(mapping) -> TrapConfig:
    mapping = dict(mapping)
    v_comp = mapping.pop("v_comp", (0.0, 0.0))
    v_comp = tuple(parse_quantity(v, "voltage") for v in v_comp)
    if len(v_comp) != 2:
        raise ConfigError("v_comp needs exactly two entries")
    return _parse_section(mapping, _TRAP_FIELDS, TrapConfig,
                          extra={"v_comp": v_comp})


def _parse_particle(mapping) -> ParticleSpec:
    mapping = dict(mapping)
    extra = {}
    omega_sec = mapping.pop("omega_sec", None)
    if omega_sec is not None:
        extra["omega_sec"] = tuple(parse_quantity(w, "angular_frequency")
                                   for w in omega_sec)
    if "charge" in mapping:
        extra["charge"] = int(parse_quantity(mapping.pop("charge"),
                                             "charge_counts"))
    return _parse_section(mapping, _PARTICLE_FIELDS, ParticleSpec, extra=extra)


def loads(text: str) -> RunConfig:
    """Parse a YAML config string."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"not valid YAML: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    base = reference_config()
    try:
        trap = _parse_trap(doc["trap"]) if "trap" in doc else base.trap
        particles = doc.get("particles", {})
        ion = (_parse_particle(particles["ion"])
               if "ion" in particles else base.ion)
        nano = (_parse_particle(particles["nanoparticle"])
                if "nanoparticle" in particles else base.nanoparticle)
        laser = (_parse_section(doc["laser"], _LASER_FIELDS, LaserParams)
                 if "laser" in doc else base.laser)
        noise = (_parse_section(doc["noise"], _NOISE_FIELDS, NoiseBudget)
                 if "noise" in doc else base.noise)
    except KeyError as err:
        raise ConfigError(f"missing config key: {err}") from err
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("options must be a mapping")
    return RunConfig(
        scenario=str(doc.get("scenario", base.scenario)),
        trap=trap, ion=ion, nanoparticle=nano, laser=laser, noise=noise,
        outdir=str(doc.get("outdir", base.outdir)),
        seed=int(doc.get("seed", base.seed)),
        workers=int(doc.get("workers", base.workers)),
        options=options,
    )


def load(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(cfg: RunConfig) -> str:
    """Serialize with SI base units and full precision (round-trip safe)."""
    def q(value, dim):
        return format_quantity(value, dim)

    doc = {
        "scenario": cfg.scenario,
        "outdir": cfg.outdir,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "trap": {k: q(getattr(cfg.trap, k), dim)
                 for k, dim in _TRAP_FIELDS.items()},
        "particles": {
            name: {
                "charge": f"{p.charge} e",
                "mass": q(p.mass, "mass"),
                **({"omega_sec": [q(w, "angular_frequency")
                                  for w in p.omega_sec]}
                   if p.omega_sec else {}),
            }
            for name, p in (("ion", cfg.ion), ("nanoparticle", cfg.nanoparticle))
        },
        "laser": {k: q(getattr(cfg.laser, k), dim)
                  for k, dim in _LASER_FIELDS.items()},
        "noise": {k: q(getattr(cfg.noise, k), dim)
                  for k, dim in _NOISE_FIELDS.items()},
        "options": cfg.options,
    }
    doc["trap"]["v_comp"] = [q(v, "voltage") for v in cfg.trap.v_comp]
    return yaml.safe_dump(doc, sort_keys=True)


def dump(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))
