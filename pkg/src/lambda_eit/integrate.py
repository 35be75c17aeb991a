"""Adaptive Dormand-Prince 5(4) integrator for complex array-valued ODEs.

Written for the small dense problems in this package: the state can be any
complex array (a vectorised density matrix, or a stack of propagator columns).
Output is returned on a caller-supplied grid; steps are shortened to land
on grid points exactly, so no interpolant is needed.
"""
import numpy as np

from .errors import IntegrationError

# Butcher tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# difference between 5th and embedded 4th order weights
_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def _initial_step(f, t0, y0, f0, rtol, atol, h_max):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, h_max)
    y1 = y0 + h * f0
    f1 = f(t0 + h, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, 1e-3 * h)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h, h1, h_max)


def dopri5(f, t_grid, y0, rtol=1e-8, atol=None, h_max=np.inf, h0=None,
           project=None, sample=None, h_min=1e-12, max_steps=10_000_000):
    """Integrate ``y' = f(t, y)`` and return ``y`` sampled on ``t_grid``.

    Real initial states are integrated in real arithmetic.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, y)`` returning an array shaped like ``y``.
    t_grid : array_like
        Strictly increasing output times; integration starts at ``t_grid[0]``.
    y0 : array_like
        Initial state.
    rtol, atol : float
        Error tolerances.  ``atol`` defaults to ``rtol * 1e-3``.
    h_max : float
        Largest permitted step.
    project : callable, optional
        Applied to every accepted state (e.g. to restore Hermiticity).  The
        stage derivative is then re-evaluated instead of reused.
    sample : callable, optional
        Maps the state to what is stored at each output time (default: the
        state itself).  Lets long runs keep only a few observables.

    Returns
    -------
    ndarray with one row per output time.

    Raises
    ------
    IntegrationError
        When the step size underflows or the step budget is exhausted.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D array")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if atol is None:
        atol = rtol * 1e-3
    y0 = np.asarray(y0)
    dtype = complex if np.iscomplexobj(y0) else float
    y = np.array(y0, dtype=dtype)
    if project is not None:
        y = project(y)
    if sample is None:
        sample = lambda v: v
    first = np.asarray(sample(y))
    out = np.empty((t_grid.size,) + first.shape, dtype=np.result_type(first, dtype))
    out[0] = first
    if t_grid.size == 1:
        return out

    t = float(t_grid[0])
    k1 = f(t, y)
    h = h0 if h0 is not None else _initial_step(f, t, y, k1, rtol, atol, h_max)
    h = min(h, h_max)
    steps = 0
    k = [None] * 7
    for i in range(1, t_grid.size):
        t_next = float(t_grid[i])
        while t < t_next:
            steps += 1
            if steps > max_steps:
                raise IntegrationError("step budget exhausted", t)
            remaining = t_next - t
            if remaining <= 1e-14 * max(1.0, abs(t_next)):
                t = t_next
                break
            clipped = h >= remaining
            step = remaining if clipped else h
            if not clipped and step < h_min * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow (h = {step:.3e} ns)", t)

            k[0] = k1
            for s in range(1, 7):
                acc = y.copy()
                for j, a in enumerate(_A[s]):
                    if a:
                        acc += (step * a) * k[j]
                if s == 6:
                    y_new = acc
                k[s] = f(t + _C[s] * step, acc)
            err = step * sum(e * kk for e, kk in zip(_E, k) if e)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = np.sqrt(np.mean(np.abs(err / scale) ** 2))

            if err_norm <= 1.0:
                t = t_next if clipped else t + step
                if project is not None:
                    y = project(y_new)
                    k1 = f(t, y)
                else:
                    y = y_new
                    k1 = k[6]
                factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
                # a clipped step says nothing about the natural step size
                h_new = step * factor
                h = max(h, h_new) if clipped else h_new
                h = min(h, h_max)
            else:
                h = step * max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
        out[i] = sample(y)
    return out
