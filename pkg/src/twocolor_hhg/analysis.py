"""Emission times, in-situ phase slopes and their ratio gamma.

gamma = -omega (d t_R / d Omega) / (d phi0 / d Omega), fitted by ordinary least
squares over a window in the middle of the plateau.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import NonlinearityError, RangeError, SFAError
from .saddle import BranchTrajectory, classical_cutoff_energy, omega_grid_for, trace_branch
from .twocolor import in_situ_phases
from .units import FieldParams, LaserConfig, derive_field_params

logger = logging.getLogger(__name__)

MAX_FIT_RESIDUAL = 0.05
MIN_WINDOW_POINTS = 8
MERGE_PHASE = 0.1  # rad
MERGE_TIME = 0.02  # units of T
WINDOW_MODES = ("interior", "literal")


@dataclass(frozen=True)
class GammaReport:
    branch: int
    params: FieldParams
    window: tuple
    slope_tr: float
    slope_phi0: float
    gamma: float
    fit_residual: float


@dataclass(frozen=True)
class PlateauMarkers:
    nominal_cutoff: float
    classical_cutoff: float
    intra_plateau_crossing: float | None
    insitu_merge_at_cutoff: bool


@dataclass(frozen=True)
class BranchPair:
    """Both traces over a shared grid with their unwrapped in-situ phases."""

    params: FieldParams
    traces: tuple
    phi0: tuple

    @property
    def omega_grid(self) -> np.ndarray:
        return self.traces[0].omega_grid


def nominal_cutoff(params: FieldParams) -> float:
    return 1.3 * params.ip + 3.2 * params.up


def classical_cutoff(params: FieldParams) -> float:
    return params.ip + classical_cutoff_energy(params)


def cutoff_departure(traj: BranchTrajectory) -> float:
    """Omega where Im t of a trace departs from its plateau trend.

    Taken as the midpoint of the steepest grid interval of Im t above the
    mid-plateau anchor 1.3 ip + 1.6 up.
    """
    params = traj.params
    grid = traj.omega_grid
    d = np.diff(traj.column("t").imag) / np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    above = mid > 1.3 * params.ip + 1.6 * params.up
    if not above.any():
        raise RangeError("trace does not extend above the mid plateau")
    k = int(np.argmax(np.abs(d[above])))
    return float(mid[above][k])


def emission_times(traj: BranchTrajectory) -> list[tuple[float, float]]:
    """(Omega, Re t) per traced point, both in atomic units."""
    return [(sp.omega_h, sp.t.real) for sp in traj.points]


def tau0(phi0, params: FieldParams):
    """Delay -phi0 / 2 omega in atomic units (divide by T/2 for the table unit)."""
    return -np.asarray(phi0) / (2.0 * params.omega) if np.ndim(phi0) else -phi0 / (2.0 * params.omega)


def tau0_half_periods(phi0, params: FieldParams):
    return tau0(phi0, params) / (0.5 * params.period)


def central_window(params: FieldParams, mode: str = "interior", traced: tuple | None = None) -> tuple:
    """Fitting window for the slopes.

    ``interior`` is the central half of [1.3 ip, 1.3 ip + 3.2 up]; ``literal``
    is 1.3 ip + 3.2 up +- 0.25 * 3.2 up, which straddles the cutoff.
    """
    if mode not in WINDOW_MODES:
        raise ValueError(f"window mode must be one of {WINDOW_MODES}")
    if params.up <= 0:
        raise RangeError("zero-width window: no ponderomotive energy")
    base = 1.3 * params.ip
    span = 3.2 * params.up
    if mode == "interior":
        lo, hi = base + 0.25 * span, base + 0.75 * span
    else:
        lo, hi = base + 0.75 * span, base + 1.25 * span
    if traced is not None and (lo < traced[0] - 1e-12 or hi > traced[1] + 1e-12):
        raise RangeError(f"window [{lo:.6g}, {hi:.6g}] exceeds traced range [{traced[0]:.6g}, {traced[1]:.6g}]")
    return lo, hi


def _linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    span = abs(slope) * (x.max() - x.min())
    dev = np.max(np.abs(y - (slope * x + intercept)))
    return slope, dev / span if span > 0 else math.inf


def _as_pairs(phi0, traj):
    arr = np.asarray(phi0, dtype=float)
    if arr.ndim == 2:
        return arr[:, 0], arr[:, 1]
    if arr.shape != (len(traj),):
        raise RangeError(f"phi0 has {arr.size} values for {len(traj)} trajectory points")
    return traj.omega_grid, arr


def gamma_ratio(traj: BranchTrajectory, phi0, window: tuple, *, max_residual: float = MAX_FIT_RESIDUAL) -> GammaReport:
    """Slopes of t_R and phi0 over ``window`` and their ratio.

    ``phi0`` is either (Omega, phi0) pairs or an array aligned with ``traj``;
    it must already be unwrapped. Raises :class:`NonlinearityError` when
    either quantity deviates from its line by more than ``max_residual`` of
    the fitted span.
    """
    omega_phi, phi = _as_pairs(phi0, traj)
    grid = traj.omega_grid
    if grid.size != omega_phi.size or not np.allclose(grid, omega_phi, rtol=0, atol=1e-12):
        raise RangeError("phi0 must be sampled on the trajectory grid")
    lo, hi = window
    if lo < grid[0] - 1e-12 or hi > grid[-1] + 1e-12:
        raise RangeError(f"window [{lo:.6g}, {hi:.6g}] exceeds traced range")
    mask = (grid >= lo) & (grid <= hi)
    if mask.sum() < MIN_WINDOW_POINTS:
        raise RangeError(f"only {mask.sum()} grid points inside the window; need {MIN_WINDOW_POINTS}")
    x = grid[mask]
    t_r = traj.column("t").real[mask]
    slope_tr, res_tr = _linear_fit(x, t_r)
    slope_phi, res_phi = _linear_fit(x, phi[mask])
    residual = max(res_tr, res_phi)
    if residual > max_residual:
        raise NonlinearityError(
            f"branch {traj.branch}: fit residual {residual:.3g} exceeds {max_residual} "
            f"(window [{lo:.6g}, {hi:.6g}] a.u.)"
        )
    params = traj.params
    gamma = -params.omega * slope_tr / slope_phi
    return GammaReport(traj.branch, params, (lo, hi), slope_tr, slope_phi, gamma, residual)


def intra_plateau_crossing(phi0_b1, phi0_b2, cutoff: float | None = None) -> float | None:
    """Lowest Omega where the two in-situ phase curves intersect.

    Both inputs are (Omega, phi0) pairs on a shared grid. In-situ phases are
    only defined modulo pi, so an intersection is a point where the difference
    passes through a multiple of pi. Returns None when there is none below
    ``cutoff``.
    """
    a = np.asarray(phi0_b1, dtype=float)
    b = np.asarray(phi0_b2, dtype=float)
    if a.shape != b.shape or not np.allclose(a[:, 0], b[:, 0]):
        raise RangeError("in-situ phase curves must share one grid")
    omega = a[:, 0]
    diff = np.unwrap(2.0 * (a[:, 1] - b[:, 1])) / (2.0 * math.pi)  # in units of pi
    for i in range(diff.size - 1):
        if cutoff is not None and omega[i] >= cutoff:
            break
        d0, d1 = diff[i], diff[i + 1]
        if d0 == round(d0):
            return float(omega[i])
        k = math.floor(min(d0, d1)) + 1
        if k <= max(d0, d1):
            frac = (k - d0) / (d1 - d0)
            x = float(omega[i] + frac * (omega[i + 1] - omega[i]))
            if cutoff is None or x < cutoff:
                return x
            return None
    return None


def mod_pi_distance(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b), math.pi)
    return np.minimum(d, math.pi - d)


def trace_pair(params: FieldParams, omega_grid=None, step: float = 0.05) -> BranchPair:
    """Trace both branches over ``omega_grid`` (default: full plateau plus 10 photons)."""
    grid = omega_grid_for(params, step=step) if omega_grid is None else omega_grid
    traces = tuple(trace_branch(b, grid, params) for b in (1, 2))
    phi0 = tuple(in_situ_phases(tr) for tr in traces)
    return BranchPair(params, traces, phi0)


def plateau_markers(pair: BranchPair) -> PlateauMarkers:
    params = pair.params
    grid = pair.omega_grid
    cutoff = nominal_cutoff(params)
    crossing = intra_plateau_crossing(np.column_stack([grid, pair.phi0[0]]),
                                      np.column_stack([grid, pair.phi0[1]]), cutoff)
    if grid[0] <= cutoff <= grid[-1]:
        p1 = np.interp(cutoff, grid, pair.phi0[0])
        p2 = np.interp(cutoff, grid, pair.phi0[1])
        merged = bool(mod_pi_distance(p1, p2) < MERGE_PHASE)
    else:
        merged = False
    return PlateauMarkers(cutoff, classical_cutoff(params), crossing, merged)


def gamma_reports(params: FieldParams, window_mode: str = "interior", step: float = 0.05) -> tuple:
    """(GammaReport branch 1, GammaReport branch 2) traced only around the window."""
    lo, hi = central_window(params, window_mode)
    w = params.omega
    grid = omega_grid_for(params, step=step, lo=lo / w - 0.5, hi=hi / w + 0.5)
    pair = trace_pair(params, grid)
    return tuple(gamma_ratio(tr, ph, (lo, hi)) for tr, ph in zip(pair.traces, pair.phi0))


def _universal_row(args):
    config, window_mode, step = args
    params = derive_field_params(config)
    try:
        g1, g2 = gamma_reports(params, window_mode, step)
    except SFAError as exc:
        return config, params, None, exc
    return config, params, (g1.gamma, g2.gamma), None


def universal_curve(configs, window_mode: str = "interior", step: float = 0.05, jobs: int = 1):
    """gamma of both branches against Up/Ip for every config, sorted by Up/Ip.

    Returns ``(rows, failures)`` with rows ``(up_over_ip, gamma_1, gamma_2)``
    and failures ``(config, error)``; a failing config does not stop the run.
    """
    for cfg in configs:
        if cfg.ip_ev <= 0:
            raise RangeError("universal curve needs ip > 0 for every config")
    work = [(cfg, window_mode, step) for cfg in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_universal_row, work))
    else:
        results = [_universal_row(w) for w in work]
    rows, failures = [], []
    for config, params, gammas, error in results:
        if error is not None:
            logger.warning("config %s failed: %s", config, error)
            failures.append((config, error))
        else:
            rows.append((params.up / params.ip, gammas[0], gammas[1]))
    rows.sort(key=lambda r: r[0])
    return rows, failures


def sweep_gamma(configs, window_mode: str = "interior", step: float = 0.05, jobs: int = 1):
    """gamma per config in input order; failures give ``None`` entries plus an error."""
    work = [(cfg, window_mode, step) for cfg in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_universal_row, work))
    return [_universal_row(w) for w in work]


def laser_configs(intensities, wavelengths, ips, lambda2: float = 1e-3):
    return [LaserConfig(wl, i, ip, lambda2) for ip in ips for wl in wavelengths for i in intensities]
