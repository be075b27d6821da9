"""Laser inputs in lab units and the derived atomic-unit field parameters.

All other modules work in atomic units (hbar = m_e = e = 1). Conversions use
CODATA-2018 values, listed below so results can be reproduced bit-for-bit:

=====================================  ==========================
hartree energy                         27.211386245988 eV
atomic unit of time                    2.4188843265857e-17 s
speed of light                         299792458 m/s
hc                                     1239.84198433 eV nm
atomic unit of intensity (1/2 eps0 c)  3.509445e16 W/cm^2
=====================================  ==========================

The intensity unit is the cycle-averaged intensity of a linearly polarized
field of peak strength 1 a.u., so ``E0 = sqrt(I / I_au)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .exceptions import DomainError

HARTREE_EV = 27.211386245988
AU_TIME_S = 2.4188843265857e-17
SPEED_OF_LIGHT = 299792458.0
HC_EV_NM = 1239.84198433
# 0.5 * eps0 * c * (5.14220674763e11 V/m)^2, in W/cm^2
AU_INTENSITY_WCM2 = 3.50944758e16

SECOND_HARMONIC_WARN = 0.1


@dataclass(frozen=True)
class LaserConfig:
    """Experimental description of the driving field and target atom.

    ``second_harmonic_ratio`` is the relative vector-potential amplitude of the
    2-omega field and ``phi`` its phase, so that
    A(t) = A1 sin(wt) + ratio * A1 sin(2wt + phi).
    """

    wavelength_nm: float
    intensity_wcm2: float
    ip_ev: float
    second_harmonic_ratio: float = 1e-3
    phi: float = 0.0


@dataclass(frozen=True)
class FieldParams:
    """Field and atom parameters in atomic units."""

    omega: float
    a1: float
    lambda2: float
    phi: float
    up: float
    ip: float
    period: float

    def with_ip(self, ip: float) -> "FieldParams":
        return FieldParams(self.omega, self.a1, self.lambda2, self.phi, self.up, ip, self.period)

    def with_lambda2(self, lambda2: float) -> "FieldParams":
        return FieldParams(self.omega, self.a1, lambda2, self.phi, self.up, self.ip, self.period)

    @property
    def nominal_cutoff(self) -> float:
        return 1.3 * self.ip + 3.2 * self.up

    @property
    def e0(self) -> float:
        return self.a1 * self.omega


def _check(name, value, positive=False):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if value < 0 or (positive and value == 0):
        raise DomainError(f"{name} must be {'positive' if positive else 'non-negative'}, got {value!r}")


def photon_energy_au(wavelength_nm: float) -> float:
    return HC_EV_NM / wavelength_nm / HARTREE_EV


def derive_field_params(config: LaserConfig) -> FieldParams:
    _check("wavelength_nm", config.wavelength_nm, positive=True)
    _check("intensity_wcm2", config.intensity_wcm2)
    _check("ip_ev", config.ip_ev)
    _check("second_harmonic_ratio", config.second_harmonic_ratio)
    if not math.isfinite(config.phi):
        raise DomainError(f"phi must be finite, got {config.phi!r}")
    if config.second_harmonic_ratio > SECOND_HARMONIC_WARN:
        warnings.warn(
            f"second_harmonic_ratio={config.second_harmonic_ratio} is outside the perturbative regime",
            stacklevel=2,
        )

    omega = photon_energy_au(config.wavelength_nm)
    e0 = math.sqrt(config.intensity_wcm2 / AU_INTENSITY_WCM2)
    a1 = e0 / omega
    return FieldParams(
        omega=omega,
        a1=a1,
        lambda2=config.second_harmonic_ratio,
        phi=config.phi,
        up=a1 * a1 / 4.0,
        ip=config.ip_ev / HARTREE_EV,
        period=2.0 * math.pi / omega,
    )


def to_laser_config(params: FieldParams) -> LaserConfig:
    """Inverse of :func:`derive_field_params`."""
    e0 = params.a1 * params.omega
    return LaserConfig(
        wavelength_nm=HC_EV_NM / (params.omega * HARTREE_EV),
        intensity_wcm2=e0 * e0 * AU_INTENSITY_WCM2,
        ip_ev=params.ip * HARTREE_EV,
        second_harmonic_ratio=params.lambda2,
        phi=params.phi,
    )


def keldysh(params: FieldParams) -> float:
    """Keldysh parameter sqrt(Ip / 2Up)."""
    if params.up <= 0:
        raise DomainError("Keldysh parameter is infinite for a zero field")
    return math.sqrt(params.ip / (2.0 * params.up))


def up_ev(intensity_wcm2: float, wavelength_nm: float) -> float:
    """Ponderomotive energy in eV."""
    params = derive_field_params(LaserConfig(wavelength_nm, intensity_wcm2, 0.0))
    return params.up * HARTREE_EV


def ev(energy_au: float) -> float:
    return energy_au * HARTREE_EV


def au(energy_ev: float) -> float:
    return energy_ev / HARTREE_EV
