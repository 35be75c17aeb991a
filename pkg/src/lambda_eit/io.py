"""CSV and JSON persistence.

Numbers are written with 17 significant digits so files round-trip exactly
and re-runs can be diffed byte for byte.
"""
import csv
import hashlib
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .units import to_ghz, to_mhz

SPECTRUM_COLUMNS = ("omega_p_GHz", "re_t", "im_t", "abs_t", "phase_rad")
TRACE_COLUMNS = ("t_ns", "alpha_out_abs", "n_res", "p_exc", "omega_phi_MHz")

# DeviceParams / DriveConfig field -> (IO name, converter)
_DEVICE_IO = {
    "E_c": ("E_c_MHz", to_mhz), "E_J0": ("E_J0_GHz", to_ghz), "d": ("asymmetry", float),
    "g": ("g_MHz", to_mhz), "Gamma": ("Gamma_MHz", to_mhz),
    "gamma_phi": ("gamma_phi_MHz", to_mhz), "kappa": ("kappa_MHz", to_mhz),
    "omega_r": ("omega_r_GHz", to_ghz), "omega_r_dressed": ("omega_r_dressed_GHz", to_ghz),
    "phi_bias": ("phi_bias_phi0", float), "L": ("L_um", float),
    "C0": ("C0_MHz", to_mhz), "C1": ("C1_MHz", to_mhz),
    "omega_q": ("omega_q_GHz", to_ghz), "omega_q_dressed": ("omega_q_dressed_GHz", to_ghz),
}
_DRIVE_IO = {
    "Omega_p": ("Omega_p_MHz", to_mhz), "omega_p": ("omega_p_GHz", to_ghz),
    "omega_phi": ("omega_phi_GHz", to_ghz), "delta_phi": ("delta_phi_phi0", float),
    "eps_phi": ("eps_phi_MHz", to_mhz), "Omega_phi": ("Omega_phi_MHz", to_mhz),
}


def fmt(x):
    return "%.17g" % x


def _convert(obj, table):
    out = {}
    for name, (key, conv) in table.items():
        v = getattr(obj, name)
        out[key] = None if v is None else float(conv(v))
    return out


def params_snapshot(device, drive=None):
    snap = {"device": _convert(device, _DEVICE_IO)}
    if drive is not None:
        snap["drive"] = _convert(drive, _DRIVE_IO)
    return snap


def write_csv(path, columns, data):
    """Write ``data`` (rows x columns) with a header line."""
    path = Path(path)
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise SchemaError(f"data shape {data.shape} does not match {len(columns)} columns")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in data:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path, required=()):
    """Return ``(columns, data)``; raise ``SchemaError`` on empty or malformed files."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    cols = tuple(c.strip() for c in rows[0])
    missing = [c for c in required if c not in cols]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric entry ({exc})") from None
    if data.shape[1] != len(cols):
        raise SchemaError(f"{path}: ragged rows")
    return cols, data


def spectrum_rows(spectrum):
    t = spectrum.t_c
    return np.column_stack((to_ghz(spectrum.omega_p), t.real, t.imag, np.abs(t), spectrum.phase))


def write_spectrum(path, spectrum):
    return write_csv(path, SPECTRUM_COLUMNS, spectrum_rows(spectrum))


def write_spectrum_map(path, axis_name, axis_values, spectra):
    """2-D sweep: one block of spectrum rows per value of the leading axis."""
    blocks = []
    for v, s in zip(axis_values, spectra):
        rows = spectrum_rows(s)
        blocks.append(np.column_stack((np.full(len(rows), v), rows)))
    return write_csv(path, (axis_name,) + SPECTRUM_COLUMNS, np.vstack(blocks))


def read_spectrum(path):
    from .spectroscopy import Spectrum
    from .units import ghz
    cols, data = read_csv(path, required=SPECTRUM_COLUMNS)
    idx = {c: i for i, c in enumerate(cols)}
    w = ghz(data[:, idx["omega_p_GHz"]])
    t = data[:, idx["re_t"]] + 1j * data[:, idx["im_t"]]
    return Spectrum(w, t, {"source": str(path)})


def write_trace(path, trace):
    data = np.column_stack((trace.times, trace.alpha_out_abs, trace.n_res, trace.p_exc,
                            to_mhz(trace.mod_envelope)))
    return write_csv(path, TRACE_COLUMNS, data)


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def sha256_of(path_or_bytes):
    data = path_or_bytes if isinstance(path_or_bytes, bytes) else Path(path_or_bytes).read_bytes()
    return hashlib.sha256(data).hexdigest()
