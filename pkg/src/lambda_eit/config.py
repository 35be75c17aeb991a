"""Strict INI configuration with unit-suffixed keys.

Every physical quantity names its unit in the key (``Gamma_MHz``,
``tau_d_ns``, ``phi_bias_phi0``).  Keys are case-insensitive.  Unknown keys,
wrong units, missing required keys and non-numeric values are rejected with
the offending line number.
"""
import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .device import DeviceParams, DriveConfig
from .errors import ConfigurationError, DomainError
from .operators import DEFAULT_N_FOCK, MAX_DIM
from .units import TWO_PI

# unit suffix -> (dimension, factor to internal units)
UNITS = {
    "ghz": ("freq", TWO_PI),
    "mhz": ("freq", TWO_PI * 1e-3),
    "khz": ("freq", TWO_PI * 1e-6),
    "ns": ("time", 1.0),
    "us": ("time", 1e3),
    "phi0": ("flux", 1.0),
    "um": ("length", 1.0),
}

# section -> key -> (dimension, required, kind); kind is "float", "list", "int", "str"
SCHEMA = {
    "device": {
        "e_c": ("freq", True, "float"),
        "e_j0": ("freq", True, "float"),
        "asymmetry": (None, True, "float"),
        "g": ("freq", True, "float"),
        "gamma": ("freq", True, "float"),
        "gamma_phi": ("freq", True, "float"),
        "kappa": ("freq", True, "float"),
        "omega_r": ("freq", True, "float"),
        "omega_r_dressed": ("freq", False, "float"),
        "omega_q": ("freq", False, "float"),
        "omega_q_dressed": ("freq", False, "float"),
        "phi_bias": ("flux", False, "float"),
        "l": ("length", False, "float"),
        "c0": ("freq", False, "float"),
        "c1": ("freq", False, "float"),
    },
    "drive": {
        "omega_p": ("freq", False, "float"),
        "omega_phi": ("freq", False, "float"),
        "delta_phi": ("flux", False, "float"),
        "eps_phi": ("freq", False, "float"),
        "omega_phi_rabi": ("freq", False, "float"),
        "omega_p_rabi": ("freq", False, "float"),
    },
    "pulse": {
        "amp": ("freq", False, "float"),
        "tau_d": ("time", False, "float"),
        "t0": ("time", False, "float"),
        "carrier": ("freq", False, "float"),
    },
    "schedule": {
        "boundaries": ("time", False, "list"),
        "levels": ("freq", False, "list"),
        "ramp": ("time", False, "float"),
        "t_c": ("time", False, "float"),
        "t_s": ("time", False, "float"),
        "read_level": ("freq", False, "float"),
    },
    "solver": {
        "n_fock": (None, False, "int"),
        "tol": (None, False, "float"),
        "frame": (None, False, "str"),
        "dt": ("time", False, "float"),
        "parallel": (None, False, "int"),
    },
    "sweep": {
        "axis": (None, False, "str"),
        "start": (None, False, "float"),
        "stop": (None, False, "float"),
        "points": (None, False, "int"),
        "values": (None, False, "list"),
    },
    "spectrum": {
        "center": ("freq", False, "float"),
        "span": ("freq", False, "float"),
        "points": (None, False, "int"),
        "probe": ("freq", False, "float"),
    },
    "output": {
        "directory": (None, False, "str"),
        "formats": (None, False, "str"),
    },
}

# Keys that differ from their base name only by letter case in the physics
# notation are disambiguated by spelling: Omega_p (Rabi) vs omega_p (frequency).
_CASE_ALIASES = {
    ("drive", "Omega_p"): "omega_p_rabi",
    ("drive", "Omega_phi"): "omega_phi_rabi",
}

# Scalar knobs whose unit lives in the axis name (sweep start/stop/values).
SWEEP_AXES = {
    "delta_phi_phi0": ("flux", 1.0),
    "omega_phi_ghz": ("freq", TWO_PI),
    "omega_phi_mhz": ("freq", TWO_PI * 1e-3),
    "omega_phi_rabi_mhz": ("freq", TWO_PI * 1e-3),
    "omega_p_rabi_mhz": ("freq", TWO_PI * 1e-3),
    "ts_ns": ("time", 1.0),
    "tc_ns": ("time", 1.0),
}

FORMATS = {"csv", "json", "svg"}


@dataclass(frozen=True)
class SolverConfig:
    n_fock: int = DEFAULT_N_FOCK
    tol: float = 1e-8
    frame: str = "effective"
    dt: float = 1.0
    parallel: int = 1


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: tuple          # internal units
    raw_values: tuple      # as written, in the axis unit


@dataclass(frozen=True)
class SpectrumConfig:
    center: Optional[float] = None
    span: float = TWO_PI * 0.05
    points: int = 801
    probe: Optional[float] = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    device: DeviceParams
    drive: Optional[DriveConfig]
    pulse: dict
    schedule: dict
    solver: SolverConfig
    sweep: Optional[SweepConfig]
    spectrum: SpectrumConfig
    output: OutputConfig
    source: str = ""
    values: dict = field(default_factory=dict)


def _line_index(text):
    """Map ``(section, key)`` to line numbers for diagnostics."""
    index = {}
    section = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            index[(section, None)] = n
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section:
            index[(section, m.group(1).strip().lower())] = n
    return index


def _split_key(section, key_raw):
    """Return ``(base, unit)`` for a key, folding case and known aliases."""
    k = key_raw.strip()
    for (sec, alias), base in _CASE_ALIASES.items():
        if sec == section and k.startswith(alias + "_"):
            return base, k[len(alias) + 1:].lower()
    k = k.lower()
    schema = SCHEMA[section]
    if k in schema:
        return k, None
    m = re.match(r"(.+)_([a-z0-9]+)$", k)
    if m and m.group(2) in UNITS:
        return m.group(1), m.group(2)
    return k, None


def _parse_number(text, where):
    try:
        v = float(text)
    except ValueError:
        raise ConfigurationError(f"{where}: value {text!r} is not a number") from None
    if not math.isfinite(v):
        raise ConfigurationError(f"{where}: value {text!r} is not finite")
    return v


def _read_raw(text, path):
    """Parse the INI text, keeping the original key spelling."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return parser


def parse_config_text(text, path="<string>"):
    parser = _read_raw(text, path)
    lines = _line_index(text)
    values = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            raise ConfigurationError(f"{path}:{lines.get((sec, None), '?')}: unknown section [{section}]")
        values[sec] = {}
        for key_raw, text_val in parser.items(section):
            where = f"{path}:{lines.get((sec, key_raw.strip().lower()), '?')}: [{section}] {key_raw}"
            base, unit = _split_key(sec, key_raw)
            if base not in SCHEMA[sec]:
                raise ConfigurationError(f"{where}: unknown key {key_raw!r}")
            dim, _, kind = SCHEMA[sec][base]
            if dim is None and unit is not None:
                raise ConfigurationError(f"{where}: {base} is dimensionless but has unit suffix _{unit}")
            if dim is not None:
                if unit is None:
                    raise ConfigurationError(f"{where}: missing unit suffix (expects a {dim} unit)")
                if UNITS[unit][0] != dim:
                    raise ConfigurationError(f"{where}: unit suffix _{unit} does not match {dim} quantity {base}")
            if base in values[sec]:
                raise ConfigurationError(f"{where}: {base} given twice")
            factor = UNITS[unit][1] if unit else 1.0
            if kind == "float":
                v = _parse_number(text_val, where) * factor
            elif kind == "int":
                v = _parse_number(text_val, where)
                if v != int(v):
                    raise ConfigurationError(f"{where}: expected an integer")
                v = int(v)
            elif kind == "list":
                v = tuple(_parse_number(x, where) * factor for x in re.split(r"[,\s]+", text_val.strip()) if x)
            else:
                v = text_val.strip()
            values[sec][base] = (v, where)
    return _build(values, path, text)


def parse_config(path):
    """Read and validate a configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"{path}: no such file")
    return parse_config_text(path.read_text(), path)


def _get(values, sec, key, default=None):
    return values.get(sec, {}).get(key, (default, None))[0]


def _require(values, sec, path):
    for key, (_, required, _) in SCHEMA[sec].items():
        if required and key not in values.get(sec, {}):
            raise ConfigurationError(f"{path}: [{sec}] missing required key {key}")


def _build(values, path, text):
    if "device" not in values:
        raise ConfigurationError(f"{path}: missing [device] section")
    _require(values, "device", path)
    dev_v = values["device"]
    try:
        device = DeviceParams(
            E_c=dev_v["e_c"][0], E_J0=dev_v["e_j0"][0], d=dev_v["asymmetry"][0],
            g=dev_v["g"][0], Gamma=dev_v["gamma"][0], gamma_phi=dev_v["gamma_phi"][0],
            kappa=dev_v["kappa"][0], omega_r=dev_v["omega_r"][0],
            omega_r_dressed=_get(values, "device", "omega_r_dressed"),
            phi_bias=_get(values, "device", "phi_bias", 0.0),
            L=_get(values, "device", "l", 340.0),
            C0=_get(values, "device", "c0"), C1=_get(values, "device", "c1"),
            omega_q=_get(values, "device", "omega_q"),
            omega_q_dressed=_get(values, "device", "omega_q_dressed"))
    except DomainError as exc:
        name = str(exc).split()[0]
        key = {"E_c": "e_c", "Gamma": "gamma", "gamma_phi": "gamma_phi", "kappa": "kappa",
               "g": "g", "omega_r": "omega_r", "L": "l"}.get(name)
        where = dev_v[key][1] if key in dev_v else f"{path}: [device]"
        raise ConfigurationError(f"{where}: {exc}") from None

    drive = None
    if "drive" in values:
        dv = values["drive"]
        Om = _get(values, "drive", "omega_p_rabi", 0.0)
        try:
            drive = DriveConfig(
                Omega_p=Om,
                omega_p=_get(values, "drive", "omega_p", device.omega_q_tilde),
                omega_phi=_get(values, "drive", "omega_phi", device.omega_q_tilde - device.omega_r_tilde),
                delta_phi=_get(values, "drive", "delta_phi"),
                eps_phi=_get(values, "drive", "eps_phi"),
                Omega_phi=_get(values, "drive", "omega_phi_rabi"))
        except DomainError as exc:
            raise ConfigurationError(f"{path}: [drive] {exc}") from None

    sv = values.get("solver", {})
    solver = SolverConfig(
        n_fock=_get(values, "solver", "n_fock", DEFAULT_N_FOCK),
        tol=_get(values, "solver", "tol", 1e-8),
        frame=_get(values, "solver", "frame", "effective").lower(),
        dt=_get(values, "solver", "dt", 1.0),
        parallel=_get(values, "solver", "parallel", 1))
    if solver.n_fock < 2 or 2 * solver.n_fock > MAX_DIM:
        raise ConfigurationError(f"{sv['n_fock'][1]}: n_fock must lie in [2, {MAX_DIM // 2}]")
    if not 0 < solver.tol < 1:
        raise ConfigurationError(f"{sv['tol'][1]}: tol must lie in (0, 1)")
    if solver.frame not in ("effective", "lab"):
        raise ConfigurationError(f"{sv['frame'][1]}: frame must be 'effective' or 'lab'")
    if solver.dt <= 0:
        raise ConfigurationError(f"{sv['dt'][1]}: dt must be positive")
    if solver.parallel < 1:
        raise ConfigurationError(f"{sv['parallel'][1]}: parallel must be >= 1")

    sweep = None
    if "sweep" in values:
        sweep = _build_sweep(values["sweep"], path)

    sp = SpectrumConfig(
        center=_get(values, "spectrum", "center"),
        span=_get(values, "spectrum", "span", TWO_PI * 0.05),
        points=_get(values, "spectrum", "points", 801),
        probe=_get(values, "spectrum", "probe"))
    if sp.points < 6 or sp.span <= 0:
        raise ConfigurationError(f"{path}: [spectrum] needs points >= 6 and span > 0")

    ov = values.get("output", {})
    formats = tuple(f.strip().lower() for f in re.split(r"[,\s]+", _get(values, "output", "formats", "csv, json")) if f)
    bad = set(formats) - FORMATS
    if bad:
        raise ConfigurationError(f"{ov['formats'][1]}: unknown format(s) {', '.join(sorted(bad))}")
    output = OutputConfig(directory=_get(values, "output", "directory", "out"), formats=formats)

    pulse = {k: v[0] for k, v in values.get("pulse", {}).items()}
    for key in ("amp", "tau_d"):
        if key in pulse and pulse[key] <= 0:
            raise ConfigurationError(f"{values['pulse'][key][1]}: must be positive")
    schedule = {k: v[0] for k, v in values.get("schedule", {}).items()}
    if "levels" in schedule or "boundaries" in schedule:
        nb, nl = len(schedule.get("boundaries", ())), len(schedule.get("levels", ()))
        if nl != nb + 1:
            raise ConfigurationError(f"{path}: [schedule] needs one more level than boundaries")
    plain = {sec: {k: v[0] for k, v in d.items()} for sec, d in values.items()}
    return ExperimentConfig(device, drive, pulse, schedule, solver, sweep, sp, output,
                            source=text, values=plain)


def _build_sweep(sv, path):
    axis_raw = sv.get("axis", (None, None))[0]
    if axis_raw is None:
        raise ConfigurationError(f"{path}: [sweep] missing axis")
    axis = axis_raw.strip()
    key = axis.lower()
    if key not in SWEEP_AXES:
        raise ConfigurationError(f"{sv['axis'][1]}: unknown sweep axis {axis!r} "
                                 f"(known: {', '.join(sorted(SWEEP_AXES))})")
    _, factor = SWEEP_AXES[key]
    if "values" in sv:
        raw = tuple(sv["values"][0])
    else:
        try:
            start, stop, points = sv["start"][0], sv["stop"][0], sv["points"][0]
        except KeyError as exc:
            raise ConfigurationError(f"{path}: [sweep] needs values or start/stop/points (missing {exc.args[0]})") from None
        if points < 1:
            raise ConfigurationError(f"{sv['points'][1]}: points must be >= 1")
        raw = tuple(start + (stop - start) * i / (points - 1) for i in range(points)) if points > 1 else (start,)
    return SweepConfig(axis, tuple(v * factor for v in raw), raw)


def bundled_config_path():
    return Path(__file__).with_name("data") / "reference_device.cfg"
