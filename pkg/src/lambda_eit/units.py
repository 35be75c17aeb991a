"""Unit conversions at the IO boundary.

Internally every frequency is angular in rad/ns and every time is in ns.
"""
import numpy as np

TWO_PI = 2.0 * np.pi
HBAR = 1.054571817e-34  # J s


def ghz(f):
    """Cyclic frequency in GHz -> angular frequency in rad/ns."""
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def mhz(f):
    """Cyclic frequency in MHz -> angular frequency in rad/ns."""
    return ghz(np.asarray(f, dtype=float) * 1e-3) if np.ndim(f) else ghz(float(f) * 1e-3)


def to_ghz(omega):
    return np.asarray(omega) / TWO_PI if np.ndim(omega) else float(omega) / TWO_PI


def to_mhz(omega):
    return np.asarray(omega) * (1e3 / TWO_PI) if np.ndim(omega) else float(omega) * 1e3 / TWO_PI


def watts_to_dbm(p):
    return 10.0 * np.log10(p / 1e-3)


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (p_dbm / 10.0)
