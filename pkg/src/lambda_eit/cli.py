"""Command-line entry point.

    lambda-eit run --preset NAME --config PATH [--out DIR] [--plots] [--parallel N]
    lambda-eit fit --input CSV --model {two_level,eit} [--config PATH]
    lambda-eit validate --config PATH

Exit codes: 0 success, 2 configuration or input error, 3 solver error,
4 fit did not converge.  ``LAMBDA_EIT_LOG`` sets the log level.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, io
from . import spectroscopy as sp
from .config import bundled_config_path, parse_config
from .errors import ConfigurationError, DomainError, FitError, LambdaEITError, SchemaError
from .plotting import emit_plot
from .presets import PRESETS
from .units import ghz, to_ghz, to_mhz

log = logging.getLogger("lambda_eit")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FIT = 0, 2, 3, 4


@dataclass
class RunManifest:
    preset: str
    config_hash: str
    version: str
    started: str
    finished: str
    files: list = field(default_factory=list)     # [{"path", "sha256"}]
    config_path: str = ""
    config_snapshot: str = ""
    parameters: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    command: list = field(default_factory=list)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_preset(name, config, out=None, plots=False, parallel=None):
    """Execute preset ``name`` for a parsed config and write its outputs.

    Returns the :class:`RunManifest`, which is also written to
    ``manifest.json`` in the output directory.
    """
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r} (known: {', '.join(PRESETS)})")
    out = Path(out if out is not None else config.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    parallel = parallel or config.solver.parallel
    started = _now()
    log.info("running %s into %s", name, out)
    result = PRESETS[name](config, out, parallel)
    files = list(result.files)
    if plots or "svg" in config.output.formats:
        for csv_path, spec in result.plots:
            files.append(emit_plot(csv_path, spec))
    if "json" in config.output.formats:
        files.append(io.write_json(out / f"{name}_summary.json", result.summary))
    manifest = RunManifest(
        preset=name,
        config_hash=io.sha256_of(config.source.encode()),
        version=__version__,
        started=started,
        finished=_now(),
        files=[{"path": Path(f).name, "sha256": io.sha256_of(f)} for f in files],
        config_snapshot=config.source,
        parameters=io.params_snapshot(config.device, config.drive),
        summary=result.summary,
        command=["run", "--preset", name],
    )
    io.write_json(out / "manifest.json", manifest)
    return manifest


def _split_blocks(cols, data):
    """Spectrum file, or a sweep file with one leading axis column."""
    if cols[0] in io.SPECTRUM_COLUMNS:
        return [(None, data)]
    axis = data[:, 0]
    keys = list(dict.fromkeys(axis.tolist()))
    return [(k, data[axis == k][:, 1:]) for k in keys]


def fit_file(path, model, config=None):
    """Fit every spectrum in ``path``; returns a list of JSON-ready dicts."""
    cols, data = io.read_csv(path)
    body = cols if cols[0] in io.SPECTRUM_COLUMNS else cols[1:]
    missing = [c for c in io.SPECTRUM_COLUMNS if c not in body]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    idx = {c: i for i, c in enumerate(body)}
    out = []
    for key, block in _split_blocks(cols, data):
        s = sp.Spectrum(ghz(block[:, idx["omega_p_GHz"]]),
                        block[:, idx["re_t"]] + 1j * block[:, idx["im_t"]])
        row = {} if key is None else {cols[0]: key}
        if model == "two_level":
            f = sp.fit_two_level(s)
            row.update(omega_q_GHz=to_ghz(f.omega_q), Gamma_MHz=to_mhz(f.Gamma),
                       gamma_phi_MHz=to_mhz(f.gamma_phi), residual_norm=f.residual_norm)
        else:
            cfg = config if config is not None else parse_config(bundled_config_path())
            dev = cfg.device
            wphi = cfg.drive.omega_phi if cfg.drive else dev.omega_q_tilde - dev.omega_r_tilde
            f = sp.fit_eit(s, dev.Gamma, dev.gamma, dev.kappa, dev.omega_r_tilde, wphi)
            row.update(omega_qM_GHz=to_ghz(f.omega_q_motional), Omega_phi_MHz=to_mhz(f.Omega_phi),
                       rms=f.rms, residual_norm=f.residual_norm)
        out.append(row)
    return out


def _parser():
    p = argparse.ArgumentParser(prog="lambda-eit", description="EIT simulator for a flux-modulated transmon.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment preset")
    r.add_argument("--preset", required=True, choices=sorted(PRESETS))
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--plots", action="store_true", help="also render SVG figures")
    r.add_argument("--parallel", type=int, default=None)
    f = sub.add_parser("fit", help="fit a spectrum CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--model", required=True, choices=("two_level", "eit"))
    f.add_argument("--config", help="device constants for the eit model (default: bundled)")
    v = sub.add_parser("validate", help="check a configuration file")
    v.add_argument("--config", required=True)
    return p


def _setup_logging():
    level = os.environ.get("LAMBDA_EIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = parse_config(args.config)
            print(f"{args.config}: ok (Gamma/2pi = {to_mhz(cfg.device.Gamma):g} MHz, "
                  f"n_fock = {cfg.solver.n_fock}, frame = {cfg.solver.frame})")
        elif args.command == "run":
            if args.parallel is not None and args.parallel < 1:
                raise ConfigurationError("--parallel must be >= 1")
            cfg = parse_config(args.config)
            m = run_preset(args.preset, cfg, args.out, args.plots, args.parallel)
            for f in m.files:
                print(f["path"])
        else:
            cfg = parse_config(args.config) if args.config else None
            json.dump(fit_file(args.input, args.model, cfg), sys.stdout, indent=2)
            print()
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ConfigurationError, SchemaError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LambdaEITError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
