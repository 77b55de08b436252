"""Command-line entry point: ``matterwave-om {params,wigner-grid,negativity,homodyne-scan}``.

Settings are resolved as command-line flags over a JSON ``--config`` file over
built-in defaults.  CSV output carries a header row and ends with a
``# config=<canonical json>`` line; identical settings give identical bytes.

Exit codes: 0 success, 2 invalid configuration, 3 numerical validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import homodyne, physparams
from .beamstate import BeamState, Mode
from .wigner import (GridError, PhasePoint, QuadratureGrid, default_grid, gaussian_sigma,
                     negativity, negativity_fluctuating, wigner_mixture, wigner_shifted)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


LAB_FLAGS = {
    "mirror_mass": "mirror_mass",
    "mech_freq": "mech_freq",
    "particle_mass": "particle_mass",
    "particle_charge": "particle_charge",
    "voltage": "accel_voltage",
    "cavity_wavelength": "cavity_wavelength",
    "length_multiplier": "cavity_length_multiplier",
    "finesse": "finesse",
}

_LAB = physparams.LabParams()

DEFAULTS = {
    "params": {"format": "json", **{k: getattr(_LAB, v) for k, v in LAB_FLAGS.items()}},
    "wigner-grid": {"n_particles": 5, "gamma": 10.0, "nbar": 0.0, "mbar": 0.0, "mode": "coherent",
                    "grid_points": None, "grid_halfwidth": None, "re_halfwidth": None,
                    "full": False, "format": "csv"},
    "negativity": {"n_particles": 1, "gamma": 1.0, "nbar": 0.0, "mbar": 0.0, "mode": "coherent",
                   "grid_points": None, "grid_halfwidth": None, "scan": "nbar", "range": None,
                   "format": "csv"},
    "homodyne-scan": {"n_particles": 5, "gamma": 5.0, "nbar": 0.0, "mode": "coherent",
                      "scan": "n", "range": None, "nu_method": "lowest-order", "format": "csv"},
}

DEFAULT_RANGES = {
    "negativity": {"nbar": "0:1:3", "gamma": "1:5:2", "mbar": "0:2:2"},
    "homodyne-scan": {"n": "1:12:12", "nu": "0:0.3:61", "nbar": "0:1:5", "gamma": "1:5:5"},
}

# keys that steer file handling rather than the computation
_IO_KEYS = {"out", "config", "plot", "format"}


def _add_physics(p, grid=True):
    p.add_argument("--n-particles", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--nbar", type=float)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    if grid:
        p.add_argument("--grid-points", type=int)
        p.add_argument("--grid-halfwidth", type=float)


def _add_io(p):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--config", help="JSON file of settings; flags take precedence")
    p.add_argument("--plot", action="store_true", default=None,
                   help="also render a PNG next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matterwave-om", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="laboratory numbers")
    for flag in LAB_FLAGS:
        p.add_argument("--" + flag.replace("_", "-"), type=float)
    _add_io(p)

    p = sub.add_parser("wigner-grid", help="tabulate the shifted Wigner function")
    _add_physics(p)
    p.add_argument("--mbar", type=float)
    p.add_argument("--re-halfwidth", type=float)
    shape = p.add_mutually_exclusive_group()
    shape.add_argument("--full", action="store_true", default=None, help="points^4 grid")
    shape.add_argument("--slice", dest="full", action="store_false",
                       help="beta2 = -beta1 slice, points^2 rows (default)")
    _add_io(p)

    p = sub.add_parser("negativity", help="Wigner negativity scans")
    _add_physics(p)
    p.add_argument("--mbar", type=float)
    p.add_argument("--scan", choices=["nbar", "gamma", "mbar"])
    p.add_argument("--range", help="a:b:steps (inclusive, evenly spaced)")
    _add_io(p)

    p = sub.add_parser("homodyne-scan", help="resonance-peak height scans")
    _add_physics(p, grid=False)
    p.add_argument("--scan", choices=["n", "nu", "nbar", "gamma"])
    p.add_argument("--range", help="a:b:steps (inclusive, evenly spaced)")
    p.add_argument("--nu-method", choices=["lowest-order", "exact"])
    _add_io(p)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = set(loaded) - set(cfg) - {"plot"}
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    if cfg.get("range") is None and cmd in DEFAULT_RANGES:
        cfg["range"] = DEFAULT_RANGES[cmd].get(cfg["scan"])
    _validate(cmd, cfg)
    return cfg


def _validate(cmd: str, cfg: dict) -> None:
    def nonneg(key):
        v = cfg.get(key)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v < 0:
            raise ConfigError(f"{key} must be a non-negative number, got {v!r}")

    if cmd == "params":
        for key in LAB_FLAGS:
            nonneg(key)
            if cfg[key] == 0:
                raise ConfigError(f"{key} must be strictly positive")
        return
    n = cfg["n_particles"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ConfigError(f"n_particles must be a non-negative integer, got {n!r}")
    for key in ("gamma", "nbar", "mbar"):
        if key in cfg:
            nonneg(key)
    if cfg["mode"] not in [m.value for m in Mode]:
        raise ConfigError(f"mode must be coherent or incoherent, got {cfg['mode']!r}")
    if cfg.get("grid_points") is not None and (not isinstance(cfg["grid_points"], int) or cfg["grid_points"] < 2):
        raise ConfigError("grid_points must be an integer >= 2")
    for key in ("grid_halfwidth", "re_halfwidth"):
        if cfg.get(key) is not None:
            nonneg(key)
            if cfg[key] == 0:
                raise ConfigError(f"{key} must be positive")
    if "range" in cfg:
        parse_range(cfg["range"], integer=cfg.get("scan") == "n")


def parse_range(text, integer: bool = False) -> list:
    """'a:b:steps' -> evenly spaced inclusive values."""
    if not isinstance(text, str) or text.count(":") != 2:
        raise ConfigError(f"range must look like a:b:steps, got {text!r}")
    a, b, steps = text.split(":")
    try:
        a, b, steps = float(a), float(b), int(steps)
    except ValueError as exc:
        raise ConfigError(f"malformed range {text!r}") from exc
    if steps < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise ConfigError(f"malformed range {text!r}")
    values = [a] if steps == 1 else [round(float(v), 12) for v in np.linspace(a, b, steps)]
    if integer:
        ints = [round(v) for v in values]
        if any(abs(i - v) > 1e-9 for i, v in zip(ints, values)) or any(i < 0 for i in ints):
            raise ConfigError(f"range {text!r} must produce non-negative integers")
        if len(set(ints)) != len(ints):
            raise ConfigError(f"range {text!r} repeats values")
        return ints
    return [float(v) for v in values]


def canonical(cfg: dict) -> str:
    return json.dumps({k: v for k, v in cfg.items() if k not in _IO_KEYS},
                      sort_keys=True, separators=(",", ":"))


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def render(columns, rows, cfg) -> str:
    if cfg["format"] == "json":
        body = {"columns": list(columns), "rows": [list(r) for r in rows],
                "config": json.loads(canonical(cfg))}
        return json.dumps(body, indent=2, sort_keys=True, default=float) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    buf.write(f"# config={canonical(cfg)}\n")
    return buf.getvalue()


# --------------------------------------------------------------------------
# subcommands; each returns (columns, rows, plot callback or None, exit code)


def cmd_params(cfg):
    lab = physparams.LabParams(**{v: float(cfg[k]) for k, v in LAB_FLAGS.items()})
    rows = physparams.report(lab)
    if cfg["format"] == "json":
        text = json.dumps({"quantities": {q: {"value": v, "unit": u} for q, v, u in rows},
                           "config": json.loads(canonical(cfg))}, indent=2, sort_keys=True) + "\n"
        return text, None, EXIT_OK
    return render(("quantity", "value", "unit"), rows, cfg), None, EXIT_OK


def _beam(cfg, n=None, mbar=None):
    mbar = cfg.get("mbar", 0.0) if mbar is None else mbar
    return BeamState(cfg["n_particles"] if n is None else n, Mode(cfg["mode"]), mbar or None)


def cmd_wigner_grid(cfg):
    N, g, nb = cfg["n_particles"], float(cfg["gamma"]), float(cfg["nbar"])
    sig = gaussian_sigma(nb)
    hw = cfg["grid_halfwidth"] or 0.5 * g * N + 6 * sig
    rhw = cfg["re_halfwidth"] or 4 * sig
    pts = cfg["grid_points"] or (9 if cfg["full"] else 61)
    re_ax = np.linspace(-rhw, rhw, pts)
    im_ax = np.linspace(-hw, hw, pts)
    beam = _beam(cfg)
    if cfg["full"]:
        X1, Y1, X2, Y2 = np.meshgrid(re_ax, im_ax, re_ax, im_ax, indexing="ij")
    else:
        X1, Y1 = np.meshgrid(re_ax, im_ax, indexing="ij")
        X2, Y2 = -X1, -Y1
    point = PhasePoint(X1 + 1j * Y1, X2 + 1j * Y2)
    if beam.fluctuation_mean:
        W = wigner_mixture(point, beam, g, nb)
    else:
        W = wigner_shifted(point, beam, g, nb)
    if not np.all(np.isfinite(W)):
        print("non-finite Wigner values", file=sys.stderr)
        return None, None, EXIT_NUMERIC
    cols = [a.ravel() for a in (X1, Y1, X2, Y2, W)]
    rows = list(zip(*cols))
    text = render(("b1r", "b1i", "b2r", "b2i", "W"), rows, cfg)

    def plot(path):
        from .plotting import plot_negative_part
        if cfg["full"]:
            return
        plot_negative_part(re_ax, im_ax, W, path, f"N={N}, gamma={g:g}, nbar={nb:g}")
    return text, plot, EXIT_OK


def _grid_override(cfg, N, g, nb):
    if cfg["grid_points"] is None and cfg["grid_halfwidth"] is None:
        return None
    base = default_grid(N, g, nb)
    pts = cfg["grid_points"] or base.points
    return QuadratureGrid(cfg["grid_halfwidth"] or base.half_width, max(pts, 8),
                          re_half_width=base.re_hw, re_points=max(pts, 8))


def cmd_negativity(cfg):
    values = parse_range(cfg["range"])
    rows, status = [], EXIT_OK
    for v in values:
        local = {"nbar": cfg["nbar"], "gamma": cfg["gamma"], "mbar": cfg["mbar"], cfg["scan"]: v}
        if local["nbar"] < 0 or local["gamma"] < 0 or local["mbar"] < 0:
            raise ConfigError("scan range must be non-negative")
        N = cfg["n_particles"]
        beam = _beam(cfg, mbar=local["mbar"])
        try:
            grid = _grid_override(cfg, N, local["gamma"], local["nbar"])
            if beam.fluctuation_mean:
                res = negativity_fluctuating(beam, local["gamma"], local["nbar"], grid)
            else:
                res = negativity(beam, local["gamma"], local["nbar"], grid)
        except GridError as exc:
            print(f"{cfg['scan']}={v!r}: {exc}", file=sys.stderr)
            status = EXIT_NUMERIC
            continue
        rows.append((v, res.delta, res.norm_integral))
    text = render(("param", "delta", "norm_check"), rows, cfg)

    def plot(path):
        from .plotting import plot_curve
        plot_curve([r[0] for r in rows], [r[1] for r in rows], path, cfg["scan"], "delta")
    return text, plot, status


def cmd_homodyne_scan(cfg):
    scan = cfg["scan"]
    values = parse_range(cfg["range"], integer=scan == "n")
    N, g, nb, mode = cfg["n_particles"], float(cfg["gamma"]), float(cfg["nbar"]), cfg["mode"]
    if scan == "n":
        heights = homodyne.n_scan(values, g, nb, mode).heights
    elif scan == "nu":
        heights = homodyne.nu_scan(values, N, g, nb, mode, method=cfg["nu_method"]).heights
    else:
        if any(v < 0 for v in values):
            raise ConfigError("scan range must be non-negative")
        heights = [homodyne.resonance_peak(_beam({**cfg, "mbar": 0}), v if scan == "gamma" else g,
                                           v if scan == "nbar" else nb) for v in values]
    rows = [(v, h, mode) for v, h in zip(values, heights)]
    text = render(("scan_value", "peak_height", "mode"), rows, cfg)

    def plot(path):
        from .plotting import plot_curve
        plot_curve(values, heights, path, scan, "resonance peak height", mode)
    return text, plot, EXIT_OK


COMMANDS = {"params": cmd_params, "wigner-grid": cmd_wigner_grid,
            "negativity": cmd_negativity, "homodyne-scan": cmd_homodyne_scan}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if cfg.get("plot") and not cfg.get("out"):
            raise ConfigError("--plot needs --out")
        text, plot, status = COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if text is None:
        return status
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
        if cfg.get("plot") and plot is not None:
            plot(Path(out).with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
