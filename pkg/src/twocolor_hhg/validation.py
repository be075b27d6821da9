"""Independent numerical oracles for the closed-form expressions.

Each check compares a closed form against a computation that shares no code
with it: adaptive quadrature along the straight complex segment t0 -> t,
a dense grid scan for the in-situ phase, and Richardson-extrapolated finite
differences for the Hessian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .dipole import action, action_parts, hessian_matrix
from .saddle import BranchTrajectory, SaddlePoint
from .twocolor import in_situ_phase, sigma, sigma_coefficients
from .units import FieldParams

ACTION_TOL = 1e-8
SIGMA_TOL = 1e-8
PHI0_TOL = 1e-3
HESSIAN_TOL = 1e-6
RESIDUAL_TOL = 1e-12
SCAN_POINTS = 10_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return bool(self.value < self.tolerance)


def segment_integral(f, t0: complex, t: complex) -> complex:
    """int_{t0}^{t} f(t') dt' along the straight segment, by adaptive quadrature."""
    d = t - t0

    def part(s, which):
        v = f(t0 + s * d) * d
        return v.real if which == 0 else v.imag

    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    with warnings.catch_warnings():
        # quad reports roundoff once it reaches machine precision
        warnings.simplefilter("ignore", IntegrationWarning)
        re = quad(part, 0.0, 1.0, args=(0,), **opts)[0]
        im = quad(part, 0.0, 1.0, args=(1,), **opts)[0]
    return complex(re, im)


def action_by_quadrature(sp: SaddlePoint, params: FieldParams) -> complex:
    w, a1 = params.omega, params.a1
    return segment_integral(lambda x: 0.5 * (sp.p - a1 * np.sin(w * x)) ** 2 + params.ip, sp.t0, sp.t)


def sigma_by_quadrature(sp: SaddlePoint, phi: float, params: FieldParams) -> complex:
    """First-order action change: -lambda2 int (p - A1(t')) A2(t') dt'."""
    w, a1 = params.omega, params.a1

    def integrand(x):
        return -(sp.p - a1 * np.sin(w * x)) * params.lambda2 * a1 * np.sin(2 * w * x + phi)

    return segment_integral(integrand, sp.t0, sp.t)


def phi0_by_scan(sp: SaddlePoint, params: FieldParams, n: int = SCAN_POINTS) -> float:
    phis = np.linspace(0.0, math.pi, n, endpoint=False)
    c = sigma_coefficients(sp, params)
    return float(phis[np.argmax(np.abs(c.c_cos * np.cos(phis) + c.c_sin * np.sin(phis)) ** 2)])


def hessian_by_differences(sp: SaddlePoint, params: FieldParams, h: float = 0.05) -> np.ndarray:
    """Second derivatives of S - Omega t in (p, t, t0) by central differences.

    Two step sizes are combined by Richardson extrapolation (error O(h^4)).
    The linear term -Omega t drops out of every second difference and is left
    out to reduce roundoff.
    """
    x0 = np.array([sp.p, sp.t, sp.t0], dtype=complex)

    def f(x):
        return action_parts(x[0], x[1], x[2], params)

    def second(i, j, step):
        ei = np.zeros(3)
        ej = np.zeros(3)
        ei[i] = step
        ej[j] = step
        if i == j:
            return (f(x0 + ei) - 2 * f(x0) + f(x0 - ei)) / step**2
        return (f(x0 + ei + ej) - f(x0 + ei - ej) - f(x0 - ei + ej) + f(x0 - ei - ej)) / (4 * step**2)

    out = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(i, 3):
            v = (4 * second(i, j, h / 2) - second(i, j, h)) / 3
            out[i, j] = out[j, i] = v
    return out


def hessian_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Per-entry relative error.

    Entries below 1e-6 of the largest one are compared against the largest
    entry instead: at ip = 0 the t0 row is zero up to the solver tolerance
    (p - A(t0) ~ 1e-6), so a relative error there would measure noise.
    """
    scale = np.max(np.abs(analytic))
    err = 0.0
    for a, b in zip(analytic.ravel(), numeric.ravel()):
        ref = abs(a) if abs(a) > 1e-6 * scale else scale
        err = max(err, abs(a - b) / ref)
    return err


def mod_pi_gap(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def plateau_sample(traces, params: FieldParams, n: int = 20, seed: int = 0) -> list[SaddlePoint]:
    """``n`` random saddles with 1.3 ip < Omega < nominal cutoff, drawn from all traces."""
    pool = [sp for tr in traces for sp in tr.points if 1.3 * params.ip < sp.omega_h < params.nominal_cutoff]
    if not pool:
        raise ValueError("no plateau saddles to sample")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(pool), size=min(n, len(pool)), replace=False)
    return [pool[i] for i in sorted(idx)]


def run_checks(traces, params: FieldParams, n: int = 20, seed: int = 0) -> list[CheckResult]:
    """All oracle comparisons on a random plateau sample plus residuals of every traced point."""
    sample = plateau_sample(traces, params, n, seed)
    rng = np.random.default_rng(seed + 1)
    act = sig = ph = hes = 0.0
    for sp in sample:
        closed = action(sp, params)
        act = max(act, abs(closed - action_by_quadrature(sp, params)) / abs(closed))
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        s = sigma(sp, phi, params)
        sig = max(sig, abs(s - sigma_by_quadrature(sp, phi, params)) / abs(s))
        ph = max(ph, mod_pi_gap(in_situ_phase(sigma_coefficients(sp, params)), phi0_by_scan(sp, params)))
        m = hessian_matrix(sp.p, sp.t, sp.t0, params)
        hes = max(hes, hessian_error(m, hessian_by_differences(sp, params)))
    res = max(sp.residual_norm for tr in traces for sp in tr.points)
    k = len(sample)
    total = sum(len(tr) for tr in traces)
    return [
        CheckResult("action_quadrature", act, ACTION_TOL, k),
        CheckResult("sigma_quadrature", sig, SIGMA_TOL, k),
        CheckResult("phi0_grid_scan", ph, PHI0_TOL, k),
        CheckResult("hessian_finite_difference", hes, HESSIAN_TOL, k),
        CheckResult("saddle_residual", res, RESIDUAL_TOL, total),
    ]


def traced_residuals(traj: BranchTrajectory) -> np.ndarray:
    return np.array([sp.residual_norm for sp in traj.points])
