"""Complex stationary points of the one-color SFA action.

The stationarity system in (p, t, t0) is

    int_{t0}^{t} A dt' = (t - t0) p                (return)
    (p - A(t0))^2 / 2 = -ip                         (tunneling)
    (p - A(t))^2 / 2 = Omega - ip                   (energy)

with A(t) = a1 sin(wt). The drift momentum is eliminated exactly through the
return condition and the remaining two complex equations in (t0, t) are solved
by damped Newton iteration with an analytic Jacobian.

Branch 1 is the short trajectory family, branch 2 the long one. Both are
taken from the first half cycle, 0 < Re(wt0) < pi/2.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .exceptions import (
    BranchJumpError,
    ConvergenceError,
    DomainError,
    HomotopyError,
    NoSolutionError,
    RangeError,
)
from .units import FieldParams

TOL = 1e-12
MAX_ITER = 50
MAX_HALVINGS = 8
JUMP_FRACTION = 0.05
HOMOTOPY_STEPS = 20
HOMOTOPY_START = 1e-4
MAX_SUBSTEP_DEPTH = 6
PATH_FRACTION = 0.5  # corrector size allowed, relative to the predicted stride
PATH_FLOOR = 1e-6  # a.u.


@dataclass(frozen=True)
class SaddlePoint:
    omega_h: float
    p: complex
    t: complex
    t0: complex
    branch: int
    residual_norm: float
    physical: bool = True
    iterations: int = 0

    def translated(self, period: float) -> "SaddlePoint":
        """Equivalent saddle one half cycle later, where A changes sign."""
        half = period / 2.0
        return SaddlePoint(self.omega_h, -self.p, self.t + half, self.t0 + half, self.branch,
                           self.residual_norm, self.physical, self.iterations)


@dataclass(frozen=True)
class BranchTrajectory:
    branch: int
    params: FieldParams
    points: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def omega_grid(self) -> np.ndarray:
        return np.array([sp.omega_h for sp in self.points])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(sp, name) for sp in self.points])

    def at(self, omega_h: float) -> SaddlePoint:
        """Saddle at an arbitrary frequency inside the traced range.

        The nearest traced point seeds a fresh Newton solve, so the result is
        exact rather than interpolated.
        """
        grid = self.omega_grid
        if not grid[0] - 1e-12 <= omega_h <= grid[-1] + 1e-12:
            raise RangeError(f"omega_h={omega_h:.6g} outside traced range [{grid[0]:.6g}, {grid[-1]:.6g}]")
        nearest = self.points[int(np.argmin(np.abs(grid - omega_h)))]
        if nearest.omega_h == omega_h:
            return nearest
        sp = solve((nearest.p, nearest.t, nearest.t0), omega_h, self.params, branch=self.branch)
        return _with_flag(sp, _is_physical(self.branch, omega_h, self.params))


def _is_physical(branch: int, omega_h: float, params: FieldParams) -> bool:
    return not (branch == 1 and omega_h > params.nominal_cutoff)


def _with_flag(sp: SaddlePoint, physical: bool) -> SaddlePoint:
    return SaddlePoint(sp.omega_h, sp.p, sp.t, sp.t0, sp.branch, sp.residual_norm, physical, sp.iterations)


# -- field primitives ------------------------------------------------------

def vector_potential(t, params: FieldParams):
    return params.a1 * cmath.sin(params.omega * t)


def integral_a(t0, t, params: FieldParams):
    """int_{t0}^{t} A(t') dt' in a cancellation-free product form."""
    w = params.omega
    return 2.0 * params.a1 / w * cmath.sin(0.5 * w * (t + t0)) * cmath.sin(0.5 * w * (t - t0))


def drift_momentum(t0, t, params: FieldParams):
    return integral_a(t0, t, params) / (t - t0)


def residual(p, t, t0, omega_h: float, params: FieldParams):
    """Residuals (return, tunneling, energy) of the full three-equation system."""
    r1 = integral_a(t0, t, params) - (t - t0) * p
    r2 = (p - vector_potential(t0, params)) ** 2 / 2 + params.ip
    r3 = (p - vector_potential(t, params)) ** 2 / 2 - (omega_h - params.ip)
    return r1, r2, r3


def _norm(r) -> float:
    return math.sqrt(sum(abs(x) ** 2 for x in r))


def _reduced_system(t0, t, omega_h, params):
    """Tunneling/energy residuals with p eliminated, and their Jacobian in (t0, t)."""
    w, a1 = params.omega, params.a1
    d = t - t0
    p = integral_a(t0, t, params) / d
    u0 = p - a1 * cmath.sin(w * t0)
    u = p - a1 * cmath.sin(w * t)
    da0 = a1 * w * cmath.cos(w * t0)
    da = a1 * w * cmath.cos(w * t)
    f = (u0 * u0 / 2 + params.ip, u * u / 2 + params.ip - omega_h)
    jac = (
        (u0 * (u0 / d - da0), -u0 * u / d),
        (u * u0 / d, -u * (u / d + da)),
    )
    return f, jac, p


def solve(guess, omega_h: float, params: FieldParams, branch: int = 1, *, tol: float = TOL,
          max_iter: int = MAX_ITER, jump_fraction: float = JUMP_FRACTION) -> SaddlePoint:
    """Newton-solve for the saddle nearest ``guess = (p, t, t0)``.

    The momentum entry of the guess is not used; p follows from (t0, t).
    Raises :class:`BranchJumpError` if the converged t or t0 moved by more
    than ``jump_fraction * T`` from the guess.
    """
    _, t, t0 = guess
    t, t0 = complex(t), complex(t0)
    t_guess, t0_guess = t, t0

    def full_norm(t0_, t_):
        p_ = drift_momentum(t0_, t_, params)
        return _norm(residual(p_, t_, t0_, omega_h, params))

    norm = full_norm(t0, t)
    iterations = 0
    while norm >= tol:
        if iterations >= max_iter or not math.isfinite(norm):
            raise ConvergenceError(
                f"no convergence after {iterations} iterations at omega_h={omega_h:.6g} (residual {norm:.3g})"
            )
        (f1, f2), ((j11, j12), (j21, j22)), _ = _reduced_system(t0, t, omega_h, params)
        det = j11 * j22 - j12 * j21
        if det == 0:
            raise ConvergenceError(f"singular Jacobian at omega_h={omega_h:.6g}")
        dt0 = -(j22 * f1 - j12 * f2) / det
        dt = -(-j21 * f1 + j11 * f2) / det
        step = 1.0
        for _ in range(MAX_HALVINGS + 1):
            nt0, nt = t0 + step * dt0, t + step * dt
            if nt != nt0:
                trial = full_norm(nt0, nt)
                if trial < norm:
                    break
            step *= 0.5
        else:
            trial = full_norm(nt0, nt) if nt != nt0 else math.inf
        t0, t, norm = nt0, nt, trial
        iterations += 1

    limit = jump_fraction * params.period
    if abs(t - t_guess) >= limit or abs(t0 - t0_guess) >= limit:
        raise BranchJumpError(
            f"solution at omega_h={omega_h:.6g} moved |dt|={abs(t - t_guess):.4g}, "
            f"|dt0|={abs(t0 - t0_guess):.4g} a.u. from its guess (limit {limit:.4g})"
        )
    p = drift_momentum(t0, t, params)
    return SaddlePoint(omega_h, p, t, t0, branch, norm, True, iterations)


# -- classical (ip = 0) trajectories --------------------------------------

def _return_phase(theta0: float) -> float:
    """First return phase wt > wt0 of an electron born at rest at phase wt0."""
    s0, c0 = math.sin(theta0), math.cos(theta0)

    def g(delta):
        # excursion divided by delta^2; its first zero is the return
        return (s0 * (delta - math.sin(delta)) - 2.0 * c0 * math.sin(0.5 * delta) ** 2) / delta**2

    deltas = np.linspace(1e-9, 2.0 * math.pi + 1e-6, 2049)
    vals = (s0 * (deltas - np.sin(deltas)) - 2.0 * c0 * np.sin(0.5 * deltas) ** 2) / deltas**2
    change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if change.size == 0:
        raise NoSolutionError(f"no return for birth phase {theta0:.6g}")
    k = change[0]
    if vals[k] == 0.0:
        return theta0 + deltas[k]
    return theta0 + brentq(g, deltas[k], deltas[k + 1], xtol=1e-15, rtol=1e-15)


def _return_energy(theta0: float) -> float:
    """Return kinetic energy in units of Up."""
    theta = _return_phase(theta0)
    return 2.0 * (math.sin(theta0) - math.sin(theta)) ** 2


@functools.lru_cache(maxsize=1)
def classical_cutoff_phases():
    """(birth phase, return phase, max return energy / Up) at the classical cutoff."""
    res = minimize_scalar(lambda x: -_return_energy(x), bounds=(0.1, 0.6), method="bounded",
                          options={"xatol": 1e-12})
    theta0 = float(res.x)
    return theta0, _return_phase(theta0), _return_energy(theta0)


def classical_cutoff_energy(params: FieldParams) -> float:
    """Maximum classical return kinetic energy (ip excluded), a.u."""
    return classical_cutoff_phases()[2] * params.up


def classical_guess(omega_h: float, branch: int, params: FieldParams):
    """Real (t0, t) of the classical trajectory returning with kinetic energy ``omega_h``.

    Ip is ignored. Branch 1 is born after the cutoff phase and returns earlier.
    """
    if branch not in (1, 2):
        raise DomainError(f"branch must be 1 or 2, got {branch}")
    if params.up <= 0:
        raise NoSolutionError("no classical returns without a field")
    theta0_c, _, kmax = classical_cutoff_phases()
    target = omega_h / params.up
    if target > kmax:
        raise NoSolutionError(
            f"return energy {omega_h:.6g} a.u. exceeds the classical maximum {kmax * params.up:.6g} a.u."
        )
    if target < 0:
        raise NoSolutionError("negative return energy")
    if target == kmax:
        theta0 = theta0_c
    else:
        lo, hi = (theta0_c, 0.5 * math.pi) if branch == 1 else (1e-12, theta0_c)
        theta0 = brentq(lambda x: _return_energy(x) - target, lo, hi, xtol=1e-15, rtol=1e-15)
    w = params.omega
    return theta0 / w, _return_phase(theta0) / w


def classical_saddle(omega_h: float, branch: int, params: FieldParams) -> SaddlePoint:
    """Newton-polished real saddle for ip = 0."""
    params0 = params.with_ip(0.0)
    t0, t = classical_guess(omega_h, branch, params0)
    return solve((0.0, t, t0), omega_h, params0, branch=branch)


# -- continuation ---------------------------------------------------------

def _tunneling_kick(t0: complex, ip: float, params: FieldParams) -> complex:
    """Leading-order imaginary shift of t0 when ip is switched on from zero."""
    field_strength = abs(params.a1 * params.omega * cmath.cos(params.omega * t0))
    return 1j * math.sqrt(2.0 * ip) / max(field_strength, 1e-300)


def _homotopy_fractions(steps=HOMOTOPY_STEPS, start=HOMOTOPY_START):
    return [0.0] + list(np.geomspace(start, 1.0, steps))


def anchor_saddle(branch: int, omega_h: float, params: FieldParams) -> SaddlePoint:
    """Saddle at ``omega_h`` reached by switching on ip from the classical solution.

    Along the homotopy the photon energy is lowered by 1.3 (1 - s) ip so the
    intermediate problems stay at the same relative position in the plateau.
    """
    if params.ip == 0.0:
        return classical_saddle(omega_h, branch, params)

    fractions = _homotopy_fractions()
    shift = 1.3 * params.ip

    def stage(s):
        return params.with_ip(s * params.ip), omega_h - (1.0 - s) * shift

    p_s, omega_s = stage(0.0)
    try:
        sp = classical_saddle(omega_s, branch, p_s)
    except (NoSolutionError, ConvergenceError) as exc:
        raise HomotopyError(f"classical seed failed: {exc}", 0.0) from exc
    last = 0.0
    for s in fractions[1:]:
        try:
            sp = _homotopy_step(sp, last, s, stage, branch)
        except (ConvergenceError, BranchJumpError):
            mid = math.sqrt(last * s) if last > 0 else 0.5 * s
            try:
                sp = _homotopy_step(sp, last, mid, stage, branch)
                sp = _homotopy_step(sp, mid, s, stage, branch)
            except (ConvergenceError, BranchJumpError) as exc:
                raise HomotopyError(f"ip homotopy failed at omega_h={omega_h:.6g}: {exc}", last) from exc
        last = s
    return sp


def _homotopy_step(sp, s_prev, s, stage, branch):
    p_s, omega_s = stage(s)
    if s_prev == 0.0:
        t0 = sp.t0 + _tunneling_kick(sp.t0, p_s.ip, p_s)
        t = sp.t
    else:
        # imaginary parts grow like sqrt(ip) at small ip
        scale = math.sqrt(s / s_prev)
        t0 = complex(sp.t0.real, sp.t0.imag * scale)
        t = complex(sp.t.real, sp.t.imag * scale)
    return solve((0.0, t, t0), omega_s, p_s, branch=branch)


def _check_grid(omega_grid, params):
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("omega_grid needs at least two points")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise DomainError("omega_grid must be strictly increasing")
    if np.any(steps > 0.1 * params.omega * (1 + 1e-9)):
        raise DomainError("omega_grid spacing must not exceed 0.1 omega")
    return grid


def _extrapolate(prev, prev2, omega_h):
    if prev2 is None:
        return prev.t, prev.t0
    r = (omega_h - prev.omega_h) / (prev.omega_h - prev2.omega_h)
    return prev.t + r * (prev.t - prev2.t), prev.t0 + r * (prev.t0 - prev2.t0)


def _off_path(sp, prev, prev2, t, t0):
    """True when the corrector moved far from the secant prediction relative to the step.

    Near an avoided crossing the partner branch can sit much closer than the
    absolute jump limit; a secant predictor on a smooth path errs by a small
    fraction of the step, so a large relative correction means a jump.
    """
    if prev2 is None:
        return False
    r = abs((sp.omega_h - prev.omega_h) / (prev.omega_h - prev2.omega_h))
    stride = r * max(abs(prev.t - prev2.t), abs(prev.t0 - prev2.t0))
    miss = max(abs(sp.t - t), abs(sp.t0 - t0))
    return miss > max(PATH_FRACTION * stride, PATH_FLOOR)


def _continue(prev, prev2, omega_h, params, branch, depth=0):
    t, t0 = _extrapolate(prev, prev2, omega_h)
    try:
        sp = solve((0.0, t, t0), omega_h, params, branch=branch)
        if depth >= MAX_SUBSTEP_DEPTH or not _off_path(sp, prev, prev2, t, t0):
            return sp
    except (ConvergenceError, BranchJumpError):
        if depth >= MAX_SUBSTEP_DEPTH:
            raise
    mid = 0.5 * (prev.omega_h + omega_h)
    half = _continue(prev, prev2, mid, params, branch, depth + 1)
    return _continue(half, prev, omega_h, params, branch, depth + 1)


class _Fold:
    """Square-root model of the real ip = 0 branch near the classical cutoff."""

    def __init__(self, params):
        theta0_c, theta_c, kmax = classical_cutoff_phases()
        self.omega_c = kmax * params.up
        self.t0_c = theta0_c / params.omega
        self.t_c = theta_c / params.omega

    def seed(self, last_real: SaddlePoint, omega_h: float, im_sign: int):
        root = math.sqrt(self.omega_c - last_real.omega_h)
        bt0 = (last_real.t0.real - self.t0_c) / root
        bt = (last_real.t.real - self.t_c) / root
        s = im_sign * 1j * math.sqrt(omega_h - self.omega_c)
        # keep the orientation of the requested sign on t0
        if (bt0 * s).imag * im_sign < 0:
            s = -s
        return self.t_c + bt * s, self.t0_c + bt0 * s


def _classical_step(prev, prev2, omega_h, params, branch, fold):
    # below the fold a real Newton continuation stays real; guard against
    # sliding onto the other branch, which is told apart by the birth phase
    try:
        sp = _continue(prev, prev2, omega_h, params, branch)
        after_cutoff_phase = sp.t0.real > fold.t0_c
        if sp.t0.imag == 0.0 and after_cutoff_phase == (branch == 1):
            return sp
    except (ConvergenceError, BranchJumpError):
        pass
    return classical_saddle(omega_h, branch, params)


def trace_branch(branch: int, omega_grid, params: FieldParams, *,
                 jump_fraction: float = JUMP_FRACTION) -> BranchTrajectory:
    """Follow one branch over ``omega_grid`` by continuation from the mid plateau.

    Branch-1 points above the nominal cutoff 1.3 ip + 3.2 up are flagged
    ``physical=False``; this threshold is a modelling choice.

    For ip = 0 the two branches coalesce at the classical cutoff and continue
    as a complex-conjugate pair. Branch 1 takes the member with Im(t0) > 0,
    which is the small-ip limit of the short branch, and branch 2 its
    conjugate.
    """
    if branch not in (1, 2):
        raise DomainError(f"branch must be 1 or 2, got {branch}")
    grid = _check_grid(omega_grid, params)
    if params.up <= 0:
        raise DomainError("tracing requires a non-zero field")

    anchor_omega = 1.3 * params.ip + 1.6 * params.up
    if not grid[0] <= anchor_omega <= grid[-1]:
        # bridge from the mid plateau at the grid's own spacing, then keep only the request
        h = float(np.min(np.diff(grid)))
        if anchor_omega < grid[0]:
            n = int(math.ceil((grid[0] - anchor_omega) / h))
            full, keep = np.concatenate([grid[0] - h * np.arange(n, 0, -1), grid]), slice(n, None)
        else:
            n = int(math.ceil((anchor_omega - grid[-1]) / h))
            full, keep = np.concatenate([grid, grid[-1] + h * np.arange(1, n + 1)]), slice(0, grid.size)
        traj = trace_branch(branch, full, params, jump_fraction=jump_fraction)
        return BranchTrajectory(branch, params, traj.points[keep])
    ia = int(np.argmin(np.abs(grid - anchor_omega)))
    points = [None] * grid.size
    points[ia] = anchor_saddle(branch, float(grid[ia]), params)

    classical = params.ip == 0.0
    fold = _Fold(params) if classical else None

    def step(i, prev, prev2):
        omega_h = float(grid[i])
        if classical and omega_h < fold.omega_c:
            return _classical_step(prev, prev2, omega_h, params, branch, fold)
        if classical and prev.t0.imag == 0.0 and prev.t.imag == 0.0:
            t, t0 = fold.seed(prev, omega_h, -1 if branch == 2 else +1)
            return solve((0.0, t, t0), omega_h, params, branch=branch)
        return _continue(prev, prev2, omega_h, params, branch)

    for order in (range(ia + 1, grid.size), range(ia - 1, -1, -1)):
        prev, prev2 = points[ia], None
        for i in order:
            try:
                sp = step(i, prev, prev2)
            except (ConvergenceError, BranchJumpError) as exc:
                raise type(exc)(f"branch {branch} trace aborted: {exc}") from exc
            points[i] = sp
            prev2, prev = prev, sp

    flagged = tuple(_with_flag(sp, _is_physical(branch, sp.omega_h, params)) for sp in points)
    return BranchTrajectory(branch, params, flagged)


def omega_grid_for(params: FieldParams, step: float = 0.05, lo: float | None = None,
                   hi: float | None = None) -> np.ndarray:
    """Default Omega grid: ip + 0.1 up to 10 photons above the nominal cutoff.

    ``step``, ``lo`` and ``hi`` are in units of the fundamental photon energy.
    """
    w = params.omega
    lo_au = params.ip + 0.1 * params.up if lo is None else lo * w
    hi_au = params.nominal_cutoff + 10.0 * w if hi is None else hi * w
    n = int(math.ceil((hi_au - lo_au) / (step * w))) + 1
    return np.linspace(lo_au, hi_au, max(n, 2))
