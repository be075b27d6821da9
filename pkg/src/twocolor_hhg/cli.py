"""Command-line front end producing deterministic CSV/JSON tables.

Every table starts with ``#`` comment lines carrying the fully resolved
configuration, so an output file is enough to reproduce itself. Floats are
written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (
    central_window,
    gamma_ratio,
    plateau_markers,
    sweep_gamma,
    tau0_half_periods,
    trace_pair,
)
from .exceptions import DomainError, RangeError, SFAError
from .saddle import omega_grid_for, trace_branch
from .twocolor import spectrogram
from .units import LaserConfig, derive_field_params
from .validation import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 2, 3, 4
COMMANDS = ("trace", "insitu", "spectrogram", "gamma", "sweep", "universal", "validate")
DEFAULTS = {
    "wavelength_nm": [800.0],
    "intensity_wcm2": [2e14],
    "ip_ev": [15.76],
    "lambda2": 1e-3,
    "orders": None,
    "omega_step": 0.05,
    "phi_steps": 64,
    "branch": "both",
    "mode": "single",
    "window": "interior",
    "classical_shift": False,
    "format": "csv",
    "out": None,
    "jobs": 1,
}
LIST_KEYS = ("wavelength_nm", "intensity_wcm2", "ip_ev")

logger = logging.getLogger(__name__)


class ConfigError(DomainError):
    kind = "config"


@dataclass
class Table:
    columns: list
    units: list
    rows: list
    meta: dict = field(default_factory=dict)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return "" if value is None else str(value)


def _json_value(value):
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(format(v, ".12g")) if math.isfinite(v) else None
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return str(value)


def render(table: Table, command: str, config: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "command": command,
            "config": _json_value(config),
            "columns": [{"name": c, "unit": u} for c, u in zip(table.columns, table.units)],
            "rows": [_json_value(list(r)) for r in table.rows],
            "meta": _json_value(table.meta),
            "version": __version__,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# twocolor_hhg {__version__} {command}\n")
    buf.write("# config: " + json.dumps(_json_value(config), sort_keys=True) + "\n")
    units = ", ".join(f"{c}[{u}]" for c, u in zip(table.columns, table.units) if u != "arb.")
    buf.write(f"# units: {units}\n")
    for key in sorted(table.meta):
        buf.write(f"# {key}: " + json.dumps(_json_value(table.meta[key]), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def parse_orders(text: str) -> list[float]:
    """``lo:hi[:step]`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or hi < lo:
                raise ValueError
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + k * step for k in range(n)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse orders {text!r}; use lo:hi[:step] or a comma list") from None
    if not values:
        raise ConfigError("empty order list")
    return values


class _Parser(argparse.ArgumentParser):
    """Argument errors become config errors so they are reported like every other failure."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("laser and atom")
    g.add_argument("--wavelength-nm", type=float, nargs="+", default=None)
    g.add_argument("--intensity-wcm2", type=float, nargs="+", default=None)
    g.add_argument("--ip-ev", type=float, nargs="+", default=None)
    g.add_argument("--lambda2", type=float, default=None, help="second-harmonic amplitude ratio")
    g = common.add_argument_group("grids")
    g.add_argument("--orders", default=None, help="lo:hi[:step] or comma list, in units of the photon energy")
    g.add_argument("--omega-step", type=float, default=None, help="trace step in units of the photon energy")
    g.add_argument("--phi-steps", type=int, default=None)
    g = common.add_argument_group("selection")
    g.add_argument("--branch", choices=["1", "2", "both"], default=None)
    g.add_argument("--mode", choices=["single", "coherent"], default=None)
    g.add_argument("--window", choices=["literal", "interior"], default=None)
    g.add_argument("--classical-shift", action="store_true", default=None,
                   help="trace ip=0 and shift orders by 1.3 ip")
    g = common.add_argument_group("output")
    g.add_argument("--format", choices=["csv", "json"], default=None)
    g.add_argument("--out", default=None, help="output path (default stdout)")
    g.add_argument("--config", default=None, help="JSON file; command-line flags override it")
    g.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")

    parser = _Parser(prog="twocolor-hhg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "trace": "complex saddle points p, t, t0 versus harmonic order",
        "insitu": "emission times and in-situ phases versus order",
        "spectrogram": "harmonic intensity versus two-color delay",
        "gamma": "slope ratio gamma for one configuration",
        "sweep": "gamma over a grid of intensities, wavelengths and atoms",
        "universal": "gamma versus Up/Ip, sorted",
        "validate": "closed forms against independent numerical oracles",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    config = {k: (list(v) if isinstance(v, list) else v) for k, v in DEFAULTS.items()}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        config.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    for key in LIST_KEYS:
        if not isinstance(config[key], list):
            config[key] = [config[key]]
        if not config[key]:
            raise ConfigError(f"{key} must not be empty")
        config[key] = [float(v) for v in config[key]]
    config["branch"] = str(config["branch"])
    if config["omega_step"] <= 0 or config["omega_step"] > 0.1:
        raise ConfigError("omega-step must lie in (0, 0.1]")
    if config["phi_steps"] < 4:
        raise ConfigError("phi-steps must be at least 4")
    if config["jobs"] < 1:
        raise ConfigError("jobs must be at least 1")
    if config["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    return config


def _single_config(config: dict) -> LaserConfig:
    if any(len(config[k]) != 1 for k in LIST_KEYS):
        raise ConfigError("this command takes a single wavelength, intensity and ip")
    return LaserConfig(config["wavelength_nm"][0], config["intensity_wcm2"][0], config["ip_ev"][0],
                       config["lambda2"])


def _all_configs(config: dict) -> list[LaserConfig]:
    return [LaserConfig(wl, i, ip, config["lambda2"])
            for ip in config["ip_ev"] for wl in config["wavelength_nm"] for i in config["intensity_wcm2"]]


def _branches(config: dict) -> tuple:
    return (1, 2) if config["branch"] == "both" else (int(config["branch"]),)


def _grid(params, config, orders=None):
    step = config["omega_step"]
    if orders is None:
        return omega_grid_for(params, step=step)
    top = params.nominal_cutoff / params.omega + 10.0
    if min(orders) <= 0 or max(orders) > top:
        raise RangeError(f"orders must lie in (0, {top:.4g}], the traceable range for this field")
    return omega_grid_for(params, step=step, lo=min(orders) - 0.5, hi=max(orders) + 0.5)


def _points(traj, orders):
    if orders is None:
        return list(traj.points)
    return [traj.at(q * traj.params.omega) for q in orders]


def cmd_trace(config: dict) -> Table:
    params = derive_field_params(_single_config(config))
    shift = 0.0
    if config["classical_shift"]:
        shift = 1.3 * params.ip
        params = params.with_ip(0.0)
    orders = parse_orders(config["orders"]) if config["orders"] else None
    if orders is not None and shift:
        orders = [q - shift / params.omega for q in orders]
    grid = _grid(params, config, orders)
    rows = []
    for b in _branches(config):
        traj = trace_branch(b, grid, params)
        for sp in _points(traj, orders):
            rows.append(((sp.omega_h + shift) / params.omega, b, sp.p.real, sp.p.imag, sp.t.real, sp.t.imag,
                         sp.t0.real, sp.t0.imag, sp.physical, sp.residual_norm))
    cols = ["order", "branch", "re_p", "im_p", "re_t", "im_t", "re_t0", "im_t0", "physical", "residual"]
    units = ["hbar*omega", "-", "a.u.", "a.u.", "a.u.", "a.u.", "a.u.", "a.u.", "-", "a.u."]
    return Table(cols, units, rows, {"order_shift": shift / params.omega, "period_au": params.period})


def cmd_insitu(config: dict) -> Table:
    params = derive_field_params(_single_config(config))
    orders = parse_orders(config["orders"]) if config["orders"] else None
    grid = _grid(params, config, orders)
    pair = trace_pair(params, grid)
    rows = []
    for traj, phi0 in zip(pair.traces, pair.phi0):
        if traj.branch not in _branches(config):
            continue
        if orders is None:
            sel = zip(traj.points, phi0)
        else:
            # phi0 is unwrapped along the trace, so interpolate it rather than recomputing mod pi
            sel = [(traj.at(q * params.omega), float(np.interp(q * params.omega, grid, phi0))) for q in orders]
        for sp, ph in sel:
            rows.append((sp.omega_h / params.omega, traj.branch, sp.t.real, sp.t.real / params.period, ph,
                         float(tau0_half_periods(ph, params)), sp.physical))
    markers = plateau_markers(pair)
    meta = {
        "nominal_cutoff_order": markers.nominal_cutoff / params.omega,
        "classical_cutoff_order": markers.classical_cutoff / params.omega,
        "intra_plateau_crossing_order": (None if markers.intra_plateau_crossing is None
                                         else markers.intra_plateau_crossing / params.omega),
        "insitu_merge_at_cutoff": markers.insitu_merge_at_cutoff,
    }
    cols = ["order", "branch", "t_r", "t_r_over_T", "phi0", "tau0", "physical"]
    units = ["hbar*omega", "-", "a.u.", "T", "rad", "T/2", "-"]
    return Table(cols, units, rows, meta)


def _default_even_orders(params):
    lo = math.ceil((params.ip + 0.1 * params.up) / params.omega)
    hi = math.floor(params.nominal_cutoff / params.omega)
    return [float(q) for q in range(lo + lo % 2, hi + 1, 2)]


def cmd_spectrogram(config: dict) -> Table:
    params = derive_field_params(_single_config(config))
    orders = parse_orders(config["orders"]) if config["orders"] else _default_even_orders(params)
    grid = _grid(params, config, orders)
    traces = [trace_branch(b, grid, params) for b in (1, 2)]
    phi = np.linspace(0.0, 2.0 * math.pi, config["phi_steps"], endpoint=False)
    if config["mode"] == "coherent":
        modes = ["coherent-sum"]
    else:
        modes = [f"single-branch-{b}" for b in _branches(config)]
    rows, delays = [], ()
    for mode in modes:
        spec = spectrogram(traces, orders, phi, mode, params)
        delays = spec.delays
        for i, q in enumerate(spec.orders):
            rows.append((mode, q, spec.max_delays[i], *spec.intensity[i]))
    # wide layout: one row per order, one column per delay (header holds the delay in units of T)
    cols = ["mode", "order", "max_delay"] + [_fmt(d) for d in delays]
    units = ["-", "hbar*omega", "T"] + ["arb."] * len(delays)
    return Table(cols, units, rows, {"delays": list(delays), "orders": list(orders)})


def cmd_gamma(config: dict) -> Table:
    params = derive_field_params(_single_config(config))
    lo, hi = central_window(params, config["window"])
    w = params.omega
    grid = omega_grid_for(params, step=config["omega_step"], lo=lo / w - 0.5, hi=hi / w + 0.5)
    pair = trace_pair(params, grid)
    rows = []
    for traj, phi0 in zip(pair.traces, pair.phi0):
        if traj.branch not in _branches(config):
            continue
        rep = gamma_ratio(traj, phi0, (lo, hi))
        rows.append((rep.branch, rep.window[0] / w, rep.window[1] / w, rep.slope_tr, rep.slope_phi0, rep.gamma,
                     rep.fit_residual))
    cols = ["branch", "window_lo", "window_hi", "slope_tr", "slope_phi0", "gamma", "fit_residual"]
    units = ["-", "hbar*omega", "hbar*omega", "a.u./a.u.", "rad/a.u.", "-", "-"]
    return Table(cols, units, rows)


def _sweep_rows(config: dict):
    results = sweep_gamma(_all_configs(config), config["window"], config["omega_step"], config["jobs"])
    rows = []
    for cfg, params, gammas, error in results:
        ratio = params.up / params.ip if params.ip > 0 else math.inf
        g1, g2 = gammas if gammas else (None, None)
        status = "ok" if error is None else error.kind
        rows.append((cfg.ip_ev, cfg.wavelength_nm, cfg.intensity_wcm2, ratio, g1, g2, status,
                     "" if error is None else str(error)))
    return rows


SWEEP_COLS = ["ip_ev", "wavelength_nm", "intensity_wcm2", "up_over_ip", "gamma_1", "gamma_2", "status", "message"]
SWEEP_UNITS = ["eV", "nm", "W/cm^2", "-", "-", "-", "-", "-"]


def cmd_sweep(config: dict) -> Table:
    return Table(SWEEP_COLS, SWEEP_UNITS, _sweep_rows(config))


def cmd_universal(config: dict) -> Table:
    if any(ip <= 0 for ip in config["ip_ev"]):
        raise ConfigError("universal curve needs ip > 0 for every config")
    rows = _sweep_rows(config)
    ok = sorted((r for r in rows if r[6] == "ok"), key=lambda r: (r[3], r[0], r[1], r[2]))
    failed = [r for r in rows if r[6] != "ok"]
    table_rows = [(r[3], r[4], r[5], r[0], r[1], r[2]) for r in ok]
    meta = {"failures": [{"ip_ev": r[0], "wavelength_nm": r[1], "intensity_wcm2": r[2], "error": r[6],
                          "message": r[7]} for r in failed]}
    cols = ["up_over_ip", "gamma_1", "gamma_2", "ip_ev", "wavelength_nm", "intensity_wcm2"]
    units = ["-", "-", "-", "eV", "nm", "W/cm^2"]
    return Table(cols, units, table_rows, meta)


def cmd_validate(config: dict) -> Table:
    rows = []
    for cfg in _all_configs(config):
        params = derive_field_params(cfg)
        pair = trace_pair(params, step=max(config["omega_step"], 0.1))
        for r in run_checks(pair.traces, params):
            rows.append((cfg.ip_ev, cfg.wavelength_nm, cfg.intensity_wcm2, r.name, r.value, r.tolerance,
                         r.samples, r.passed))
    cols = ["ip_ev", "wavelength_nm", "intensity_wcm2", "check", "value", "tolerance", "samples", "passed"]
    units = ["eV", "nm", "W/cm^2", "-", "-", "-", "-", "-"]
    return Table(cols, units, rows)


HANDLERS = {
    "trace": cmd_trace,
    "insitu": cmd_insitu,
    "spectrogram": cmd_spectrogram,
    "gamma": cmd_gamma,
    "sweep": cmd_sweep,
    "universal": cmd_universal,
    "validate": cmd_validate,
}


def _fail(error: Exception, code: int) -> int:
    kind = getattr(error, "kind", "config" if code == EXIT_CONFIG else "error")
    sys.stderr.write(json.dumps({"error": kind, "message": str(error), "exit_code": code}, sort_keys=True) + "\n")
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        return _fail(exc, EXIT_CONFIG)
    try:
        config = resolve_config(args)
        table = HANDLERS[args.command](config)
    except (DomainError, RangeError, ValueError) as exc:
        return _fail(exc, EXIT_CONFIG)
    except SFAError as exc:
        return _fail(exc, EXIT_SOLVER)
    text = render(table, args.command, config, config["format"])
    if config["out"]:
        with open(config["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "validate" and not all(r[-1] for r in table.rows):
        return _fail(SFAError("one or more oracle checks failed"), EXIT_VALIDATION)
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())
