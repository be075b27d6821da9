"""Perturbative second-harmonic phase and the even-harmonic response.

With A(t) = a1 sin(wt) + lambda2 a1 sin(2wt + phi) the action to first order in
lambda2 picks up

    sigma(phi) = -lambda2 int_{t0}^{t} (p - a1 sin wt') a1 sin(2wt' + phi) dt'

evaluated on the one-color saddle. Because sigma is linear in (cos phi, sin phi)
it is stored as two complex coefficients per saddle.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dipole import half_period_dipole, half_period_phase, trajectory_dipoles
from .exceptions import DomainError, RangeError
from .saddle import BranchTrajectory, SaddlePoint
from .units import FieldParams

SIGMA_WARN = 0.3
MODES = ("single-branch-1", "single-branch-2", "coherent-sum")


@dataclass(frozen=True)
class SigmaCoefficients:
    omega_h: float
    branch: int
    c_cos: complex
    c_sin: complex

    def __call__(self, phi):
        return self.c_cos * np.cos(phi) + self.c_sin * np.sin(phi)


@dataclass(frozen=True)
class Spectrogram:
    orders: tuple
    delays: tuple  # units of T
    intensity: np.ndarray  # shape (len(orders), len(delays))
    mode: str
    phi: tuple = ()
    max_delays: tuple = ()  # units of T, one per order


def sigma_parts(p, t, t0, phi, params: FieldParams):
    """Closed-form sigma at arbitrary complex (p, t, t0)."""
    w, a1 = params.omega, params.a1

    def primitive(x):
        return (p * a1 * cmath.cos(2 * w * x + phi) / (2 * w)
                + a1 * a1 * (cmath.sin(w * x + phi) / (2 * w) - cmath.sin(3 * w * x + phi) / (6 * w)))

    return params.lambda2 * (primitive(t) - primitive(t0))


def sigma(sp: SaddlePoint, phi: float, params: FieldParams) -> complex:
    return sigma_parts(sp.p, sp.t, sp.t0, phi, params)


def sigma_coefficients(sp: SaddlePoint, params: FieldParams) -> SigmaCoefficients:
    return SigmaCoefficients(sp.omega_h, sp.branch, sigma(sp, 0.0, params), sigma(sp, 0.5 * math.pi, params))


def even_intensity(coeffs: SigmaCoefficients, phi):
    """Single-branch even-harmonic intensity |sigma(phi)|^2 (arbitrary units)."""
    s = coeffs(phi)
    if np.max(np.abs(s)) > SIGMA_WARN:
        warnings.warn(f"|sigma| = {np.max(np.abs(s)):.3g} rad exceeds the perturbative range", stacklevel=2)
    return np.abs(s) ** 2


def in_situ_phase(coeffs: SigmaCoefficients) -> float:
    """Relative phase in [0, pi) maximizing |c_cos cos(phi) + c_sin sin(phi)|^2.

    Writing the intensity as a + b cos 2phi + c sin 2phi gives the maximum at
    2phi = atan2(c, b).
    """
    cc, cs = coeffs.c_cos, coeffs.c_sin
    if cc == 0 and cs == 0:
        raise DomainError("in-situ phase undefined for vanishing sigma")
    b = 0.5 * (abs(cc) ** 2 - abs(cs) ** 2)
    c = (cc * cs.conjugate()).real
    return (0.5 * math.atan2(c, b)) % math.pi


def unwrap_mod_pi(values) -> np.ndarray:
    """Remove jumps larger than pi/2 from a quantity defined modulo pi."""
    return np.unwrap(2.0 * np.asarray(values, dtype=float)) / 2.0


def in_situ_phases(traj: BranchTrajectory) -> np.ndarray:
    """Unwrapped in-situ phase along a trajectory."""
    raw = [in_situ_phase(sigma_coefficients(sp, traj.params)) for sp in traj.points]
    return unwrap_mod_pi(raw)


def two_color_dipole(contribs, sigmas, omega_h: float, params: FieldParams) -> complex:
    """Full-cycle two-color dipole from half-cycle amplitudes and their sigma values.

    Adjacent half cycles carry sigma of opposite sign, hence
    sum_n x_n (exp(i sigma_n) - exp(-i sigma_n - i Omega T/2)).
    """
    shift = half_period_phase(omega_h, params)
    return sum(c.amplitude * (cmath.exp(1j * s) - cmath.exp(-1j * s) * shift) for c, s in zip(contribs, sigmas))


def _refine_peak(phi_grid, row):
    k = int(np.argmax(row))
    n = len(row)
    periodic = np.isclose(phi_grid[-1] - phi_grid[0] + (phi_grid[1] - phi_grid[0]), math.pi) or \
        np.isclose(phi_grid[-1] - phi_grid[0] + (phi_grid[1] - phi_grid[0]), 2 * math.pi)
    if periodic or 0 < k < n - 1:
        y0, y1, y2 = row[(k - 1) % n], row[k], row[(k + 1) % n]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            return phi_grid[k] + 0.5 * (y0 - y2) / denom * (phi_grid[1] - phi_grid[0])
    return phi_grid[k]


def spectrogram(branches, orders, phi_grid, mode: str, params: FieldParams) -> Spectrogram:
    """Harmonic intensity versus relative phase for the requested orders.

    Even orders are weighted by i sin(sigma_n), odd orders by cos(sigma_n).
    ``coherent-sum`` adds both branches with their stationary-phase amplitudes,
    skipping saddles flagged unphysical; the single-branch modes use unit
    amplitude for the selected branch only. ``max_delays`` holds the delay of
    the intensity maximum of each row, -phi_max / 2 omega in units of T.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    by_branch = {tr.branch: tr for tr in branches}
    if mode == "coherent-sum":
        use = sorted(by_branch)
    else:
        use = [int(mode[-1])]
        if use[0] not in by_branch:
            raise DomainError(f"mode {mode} needs a trace of branch {use[0]}")
    dipoles = {b: trajectory_dipoles(by_branch[b]) for b in use} if mode == "coherent-sum" else {}
    phi_grid = np.asarray(phi_grid, dtype=float)
    cos_phi, sin_phi = np.cos(phi_grid), np.sin(phi_grid)

    rows, maxima = [], []
    for q in orders:
        omega_h = q * params.omega
        total = np.zeros(phi_grid.size, dtype=complex)
        for b in use:
            tr = by_branch[b]
            grid = tr.omega_grid
            if not grid[0] <= omega_h <= grid[-1]:
                raise RangeError(f"order {q} outside traced range of branch {b}")
            sp = tr.at(omega_h)
            if mode == "coherent-sum":
                if not sp.physical:
                    continue
                near = dipoles[b][int(np.argmin(np.abs(grid - omega_h)))]
                weight = half_period_dipole(sp, params, reference=near.prefactor).amplitude
            else:
                weight = 1.0
            coeffs = sigma_coefficients(sp, params)
            s = coeffs.c_cos * cos_phi + coeffs.c_sin * sin_phi
            total += weight * (1j * np.sin(s) if q % 2 == 0 else np.cos(s))
        row = np.abs(2.0 * total) ** 2
        rows.append(row)
        maxima.append(-_refine_peak(phi_grid, row) / (4 * math.pi))
    delays = tuple(float(d) + 0.0 for d in -phi_grid / (4 * math.pi))  # + 0.0 drops negative zero
    return Spectrogram(tuple(orders), delays, np.array(rows), mode, tuple(phi_grid), tuple(maxima))
