"""Shared parameter builders for the test suite."""

from __future__ import annotations

from twocolor_hhg.units import LaserConfig, derive_field_params

AR_IP = 15.76
HE_IP = 24.58
NA_IP = 5.14


def params_for(intensity: float, ip_ev: float = AR_IP, wavelength_nm: float = 800.0, lambda2: float = 1e-3):
    return derive_field_params(LaserConfig(wavelength_nm, intensity, ip_ev, lambda2))

# PASS/FAIL lines of the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
