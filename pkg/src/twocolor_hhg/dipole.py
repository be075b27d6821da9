"""Quasiclassical action, Hessian determinant and stationary-phase dipole.

Amplitudes follow x = (i h^5 / det M)^(1/2) exp(iS - i Omega t) with the
transition prefactor reduced to a sign, evaluated on the stored saddles
(Im t0 > 0). With this sign choice |exp(iS - i Omega t)| exceeds one in the
plateau; the exponentially small member of each conjugate pair is
``conjugate_saddle(sp)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSaddleError
from .saddle import BranchTrajectory, SaddlePoint
from .units import FieldParams

PLANCK = 2.0 * math.pi  # h in atomic units
DEGENERATE_DET = 1e-30


@dataclass(frozen=True)
class DipoleContribution:
    omega_h: float
    branch: int
    action: complex
    hessdet: complex
    amplitude: complex
    prefactor: complex = 0j


def action_parts(p, t, t0, params: FieldParams):
    """Closed-form action for A = a1 sin(wt), evaluated at arbitrary complex (p, t, t0)."""
    w, a1 = params.omega, params.a1
    d = t - t0
    int_a = 2.0 * a1 / w * cmath.sin(0.5 * w * (t + t0)) * cmath.sin(0.5 * w * d)
    int_a2 = a1 * a1 * (0.5 * d - cmath.cos(w * (t + t0)) * cmath.sin(w * d) / (2.0 * w))
    return (0.5 * p * p + params.ip) * d - p * int_a + 0.5 * int_a2


def action(sp: SaddlePoint, params: FieldParams) -> complex:
    """S = int_{t0}^{t} [(p - A)^2 / 2 + ip] dt'."""
    return action_parts(sp.p, sp.t, sp.t0, params)


def hessian_matrix(p, t, t0, params: FieldParams) -> np.ndarray:
    """Second derivatives of S - Omega t in (p_parallel, t, t0)."""
    w, a1 = params.omega, params.a1
    u = p - a1 * cmath.sin(w * t)
    u0 = p - a1 * cmath.sin(w * t0)
    return np.array(
        [
            [t - t0, u, -u0],
            [u, -u * a1 * w * cmath.cos(w * t), 0.0],
            [-u0, 0.0, u0 * a1 * w * cmath.cos(w * t0)],
        ],
        dtype=complex,
    )


def hessian_det(sp: SaddlePoint, params: FieldParams) -> complex:
    """Determinant of the full 5x5 Hessian.

    The two transverse momentum directions decouple with curvature (t - t0)
    each, so the result is the 3x3 parallel block times (t - t0)^2.
    """
    m = hessian_matrix(sp.p, sp.t, sp.t0, params)
    det = complex(np.linalg.det(m)) * (sp.t - sp.t0) ** 2
    if abs(det) < DEGENERATE_DET:
        raise DegenerateSaddleError(f"|det M| = {abs(det):.3g} at omega_h={sp.omega_h:.6g}")
    return det


def _half_cycle_sign(t0, params: FieldParams) -> float:
    # parity of the tunneling-field sign entering the transition prefactor
    return 1.0 if math.cos(params.omega * complex(t0).real) >= 0 else -1.0


def conjugate_saddle(sp: SaddlePoint) -> SaddlePoint:
    """Complex-conjugate partner of ``sp``, a saddle of the same real system."""
    return SaddlePoint(sp.omega_h, sp.p.conjugate(), sp.t.conjugate(), sp.t0.conjugate(), sp.branch,
                       sp.residual_norm, sp.physical, sp.iterations)


def half_period_dipole(sp: SaddlePoint, params: FieldParams, reference: complex | None = None) -> DipoleContribution:
    """Stationary-phase contribution of one saddle from one half cycle.

    The transition prefactor is taken as the sign of the tunneling field, so
    contributions from adjacent half cycles differ by the expected overall
    minus sign. The square-root branch is principal unless ``reference`` (the
    prefactor of a neighbouring point) is given, in which case the root
    closest in phase to it is used.
    """
    s = action(sp, params)
    det = hessian_det(sp, params)
    pref = cmath.sqrt(1j * PLANCK**5 / det)
    if reference is not None and abs(cmath.phase(pref / reference)) > 0.5 * math.pi:
        pref = -pref
    amp = _half_cycle_sign(sp.t0, params) * pref * cmath.exp(1j * s - 1j * sp.omega_h * sp.t)
    return DipoleContribution(sp.omega_h, sp.branch, s, det, amp, pref)


def trajectory_dipoles(traj: BranchTrajectory, anchor: int | None = None) -> list[DipoleContribution]:
    """Half-period contributions along a trace with a continuous square-root branch.

    The principal root is used at ``anchor`` (default: the point nearest the
    mid plateau) and continued outward by phase continuity.
    """
    params = traj.params
    pts = traj.points
    if anchor is None:
        grid = traj.omega_grid
        anchor = int(np.argmin(np.abs(grid - (1.3 * params.ip + 1.6 * params.up))))
    out = [None] * len(pts)
    out[anchor] = half_period_dipole(pts[anchor], params)
    for order in (range(anchor + 1, len(pts)), range(anchor - 1, -1, -1)):
        ref = out[anchor].prefactor
        for i in order:
            out[i] = half_period_dipole(pts[i], params, reference=ref)
            ref = out[i].prefactor
    return out


def half_period_phase(omega_h: float, params: FieldParams) -> complex:
    """exp(-i Omega T / 2), exact at integer orders.

    Omega/omega is reduced mod 2 before exponentiating; orders within 1e-9 of
    an integer give exactly +-1.
    """
    r = math.fmod(omega_h / params.omega, 2.0)
    k = round(r)
    if abs(r - k) < 1e-9:
        return complex(1.0 if k % 2 == 0 else -1.0)
    return cmath.exp(-1j * math.pi * r)


def parity_bracket(omega_h: float, params: FieldParams) -> complex:
    """1 - exp(-i Omega T / 2): 2 for odd orders, 0 for even ones."""
    return 1.0 - half_period_phase(omega_h, params)


def total_dipole(contribs, omega_h: float, params: FieldParams) -> complex:
    """Full-cycle dipole from the half-cycle contributions of every branch at ``omega_h``."""
    return sum(c.amplitude for c in contribs) * parity_bracket(omega_h, params)
