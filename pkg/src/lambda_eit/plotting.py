"""Deterministic SVG rendering of result CSV files."""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import SchemaError
from .io import read_csv

LABELS = {
    "omega_p_GHz": "probe frequency (GHz)",
    "abs_t": "|t_c|",
    "phase_rad": "arg t_c (rad)",
    "re_t": "Re t_c",
    "im_t": "Im t_c",
    "t_ns": "time (ns)",
    "alpha_out_abs": "|alpha_out|",
    "n_res": "<a^dag a>",
    "p_exc": "<sigma^dag sigma>",
    "omega_phi_MHz": "Omega_phi (MHz)",
    "delta_phi_phi0": "flux amplitude (phi0)",
    "omega_phi_GHz": "modulation frequency (GHz)",
    "Ts_ns": "storage time (ns)",
    "Tc_ns": "turn-off time (ns)",
    "eta": "storage efficiency",
    "eta_c": "capture efficiency",
}


@dataclass(frozen=True)
class PlotSpec:
    """``kind`` is ``line`` (``y`` columns against ``x``) or ``heatmap``
    (``z`` over the ``x``-``y`` grid of a long-format sweep file)."""

    kind: str
    x: str
    y: Sequence[str]
    z: Optional[str] = None
    title: str = ""
    logy: bool = False


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "lambda-eit"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def emit_plot(csv_path, spec: PlotSpec, svg_path=None):
    """Render ``csv_path`` according to ``spec``; returns the SVG path."""
    cols, data = read_csv(csv_path)
    needed = [spec.x, *spec.y] + ([spec.z] if spec.z else [])
    missing = [c for c in needed if c not in cols]
    if missing:
        raise SchemaError(f"{csv_path}: missing column(s) {', '.join(missing)}")
    idx = {c: i for i, c in enumerate(cols)}
    svg_path = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x = data[:, idx[spec.x]]
    if spec.kind == "line":
        for name in spec.y:
            ax.plot(x, data[:, idx[name]], lw=1.2, label=LABELS.get(name, name))
        ax.set_ylabel(LABELS.get(spec.y[0], spec.y[0]) if len(spec.y) == 1 else "")
        if len(spec.y) > 1:
            ax.legend(frameon=False)
        if spec.logy:
            ax.set_yscale("log")
    elif spec.kind == "heatmap":
        if spec.z is None or len(spec.y) != 1:
            raise SchemaError("heatmap needs one y column and a z column")
        y = data[:, idx[spec.y[0]]]
        z = data[:, idx[spec.z]]
        xs, ys = np.unique(x), np.unique(y)
        if xs.size * ys.size != z.size:
            raise SchemaError(f"{csv_path}: sweep is not a full grid")
        order = np.lexsort((y, x))
        Z = z[order].reshape(xs.size, ys.size).T
        mesh = ax.pcolormesh(xs, ys, Z, shading="nearest", cmap="viridis", rasterized=False)
        fig.colorbar(mesh, ax=ax, label=LABELS.get(spec.z, spec.z))
        ax.set_ylabel(LABELS.get(spec.y[0], spec.y[0]))
    else:
        raise SchemaError(f"unknown plot kind {spec.kind!r}")
    ax.set_xlabel(LABELS.get(spec.x, spec.x))
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path
