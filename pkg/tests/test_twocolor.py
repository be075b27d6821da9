from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twocolor_hhg.exceptions import DomainError, RangeError
from twocolor_hhg.saddle import classical_cutoff_phases, classical_saddle
from twocolor_hhg.twocolor import (
    SigmaCoefficients,
    even_intensity,
    in_situ_phase,
    sigma,
    sigma_coefficients,
    spectrogram,
    unwrap_mod_pi,
)
from twocolor_hhg.validation import mod_pi_gap, phi0_by_scan, plateau_sample, sigma_by_quadrature

PHASES = (0.1, 0.7, 1.3, 2.0, 2.9, 3.5, 4.4, 5.8)


def _scan_argmax(cc, cs, n=10_000):
    phi = np.linspace(0.0, math.pi, n, endpoint=False)
    return phi[int(np.argmax(np.abs(cc * np.cos(phi) + cs * np.sin(phi)) ** 2))]


# -- sigma -------------------------------------------------------------------

def test_sigma_matches_quadrature(ar2_pair, ar2):
    for sp in plateau_sample(ar2_pair.traces, ar2, n=20, seed=13):
        closed = sigma(sp, 0.7, ar2)
        assert abs(closed - sigma_by_quadrature(sp, 0.7, ar2)) / abs(closed) < 1e-8


def test_sigma_zero_without_second_harmonic(ar2_pair, ar2):
    params = ar2.with_lambda2(0.0)
    for sp in plateau_sample(ar2_pair.traces, ar2, n=5, seed=1):
        assert sigma(sp, 0.7, params) == 0


def test_coefficients_reconstruct_sigma(ar2_pair, ar2):
    for sp in plateau_sample(ar2_pair.traces, ar2, n=10, seed=17):
        coeffs = sigma_coefficients(sp, ar2)
        for phi in PHASES:
            direct = sigma(sp, phi, ar2)
            assert abs(coeffs(phi) - direct) / abs(direct) < 1e-10


def test_sigma_odd_under_pi_shift(ar2_pair, ar2):
    for sp in plateau_sample(ar2_pair.traces, ar2, n=10, seed=19):
        for phi in PHASES:
            s = sigma(sp, phi, ar2)
            assert abs(sigma(sp, phi + math.pi, ar2) + s) / abs(s) < 1e-10


def test_coefficients_scale_with_lambda2(ar2_pair, ar2):
    sp = ar2_pair.traces[0].points[200]
    one = sigma_coefficients(sp, ar2)
    two = sigma_coefficients(sp, ar2.with_lambda2(2 * ar2.lambda2))
    assert two.c_cos == 2 * one.c_cos and two.c_sin == 2 * one.c_sin


def test_classical_coefficients_are_real(classical2):
    kmax = classical_cutoff_phases()[2] * classical2.up
    for branch in (1, 2):
        for frac in (0.2, 0.5, 0.9):
            coeffs = sigma_coefficients(classical_saddle(frac * kmax, branch, classical2), classical2)
            assert coeffs.c_cos.imag == 0 and coeffs.c_sin.imag == 0


def test_half_period_antisymmetry_every_saddle(ar2_pair, ar2):
    worst = 0.0
    for tr in ar2_pair.traces:
        for sp in tr:
            s = sigma(sp, 0.7, ar2)
            shifted = sigma(sp.translated(ar2.period), 0.7, ar2)
            worst = max(worst, abs(shifted + s) / abs(s))
    assert worst < 1e-9


# -- even-harmonic intensity -------------------------------------------------

@given(phi=st.floats(-10, 10))
def test_even_intensity_pi_periodic(phi):
    coeffs = SigmaCoefficients(1.0, 1, 0.01 + 0.02j, -0.03 + 0.005j)
    assert even_intensity(coeffs, phi + math.pi) == pytest.approx(even_intensity(coeffs, phi), rel=1e-9)


def test_even_intensity_warns_outside_perturbative_range():
    with pytest.warns(UserWarning, match="perturbative"):
        even_intensity(SigmaCoefficients(1.0, 1, 0.5, 0.0), 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        even_intensity(SigmaCoefficients(1.0, 1, 0.1, 0.0), 0.0)


def test_even_intensity_nonnegative_array():
    phi = np.linspace(0, 2 * math.pi, 50)
    assert np.all(even_intensity(SigmaCoefficients(1.0, 1, 0.01j, 0.02), phi) >= 0)


# -- in-situ phase -----------------------------------------------------------

def test_in_situ_phase_limits():
    assert in_situ_phase(SigmaCoefficients(1.0, 1, 0.3 - 0.1j, 0.0)) == 0.0
    assert in_situ_phase(SigmaCoefficients(1.0, 1, 0.0, 0.3 - 0.1j)) == pytest.approx(math.pi / 2, abs=1e-15)


def test_in_situ_phase_degenerate():
    with pytest.raises(DomainError):
        in_situ_phase(SigmaCoefficients(1.0, 1, 0.0, 0.0))


def test_in_situ_phase_example_matches_scan():
    cc, cs = 1 + 2j, 0.3 - 1j
    assert mod_pi_gap(in_situ_phase(SigmaCoefficients(1.0, 1, cc, cs)), _scan_argmax(cc, cs)) < 1e-3


@given(
    cc=st.complex_numbers(min_magnitude=1e-3, max_magnitude=10),
    cs=st.complex_numbers(min_magnitude=1e-3, max_magnitude=10),
)
def test_in_situ_phase_random_coefficients(cc, cs):
    phi = np.linspace(0.0, math.pi, 10_000, endpoint=False)
    intensity = np.abs(cc * np.cos(phi) + cs * np.sin(phi)) ** 2
    # a flat intensity has no unique maximum
    if intensity.max() - intensity.min() < 1e-6 * intensity.max():
        return
    phi0 = in_situ_phase(SigmaCoefficients(1.0, 1, cc, cs))
    best = np.abs(cc * math.cos(phi0) + cs * math.sin(phi0)) ** 2
    assert best >= intensity.max() * (1 - 1e-9)


def test_in_situ_phase_matches_scan_on_saddles(ar2_pair, ar2):
    for sp in plateau_sample(ar2_pair.traces, ar2, n=20, seed=23):
        phi0 = in_situ_phase(sigma_coefficients(sp, ar2))
        assert mod_pi_gap(phi0, phi0_by_scan(sp, ar2)) < 1e-3


def test_in_situ_phase_invariant_under_lambda2(ar2_pair, ar2):
    for sp in plateau_sample(ar2_pair.traces, ar2, n=10, seed=29):
        a = in_situ_phase(sigma_coefficients(sp, ar2))
        b = in_situ_phase(sigma_coefficients(sp, ar2.with_lambda2(7.3 * ar2.lambda2)))
        assert mod_pi_gap(a, b) < 1e-12


def test_complex_phi0_matches_classical(classical2_pair, classical2):
    kmax = classical_cutoff_phases()[2] * classical2.up
    for tr, phi0 in zip(classical2_pair.traces, classical2_pair.phi0):
        for k in range(20, len(tr), 37):
            sp = tr.points[k]
            if sp.omega_h > 0.95 * kmax:
                continue
            real = classical_saddle(sp.omega_h, tr.branch, classical2)
            assert mod_pi_gap(phi0[k], in_situ_phase(sigma_coefficients(real, classical2))) < 1e-6


def test_unwrap_mod_pi_removes_jumps():
    smooth = np.linspace(0.0, 4.0, 200)
    assert np.allclose(unwrap_mod_pi(np.mod(smooth, math.pi)), smooth, atol=1e-12)


def test_in_situ_phase_curves_are_continuous(ar2_pair):
    for phi0 in ar2_pair.phi0:
        assert np.max(np.abs(np.diff(phi0))) < 0.5 * math.pi


# -- spectrogram -------------------------------------------------------------

PHI = np.linspace(0.0, 2 * math.pi, 128, endpoint=False)


def test_one_color_limit(ar2_pair, ar2):
    params = ar2.with_lambda2(0.0)
    for mode in ("single-branch-1", "coherent-sum"):
        sg = spectrogram(ar2_pair.traces, [20, 21, 22, 23], PHI, mode, params)
        for q, row in zip(sg.orders, sg.intensity):
            if q % 2 == 0:
                assert np.all(row == 0)
            else:
                assert np.ptp(row) <= 1e-12 * row.max()


def test_spectrogram_nonnegative_and_periodic(ar2_pair, ar2):
    sg = spectrogram(ar2_pair.traces, [18, 19, 24, 25], PHI, "coherent-sum", ar2)
    assert np.all(sg.intensity >= 0)
    half = PHI.size // 2
    for row in sg.intensity:
        assert np.allclose(row[:half], row[half:], rtol=1e-9, atol=1e-12 * row.max())


def test_spectrogram_delay_axis(ar2_pair, ar2):
    sg = spectrogram(ar2_pair.traces, [20], PHI, "single-branch-1", ar2)
    assert sg.delays[0] == 0.0
    assert sg.delays[1] == pytest.approx(-PHI[1] / (4 * math.pi), rel=1e-15)


@pytest.mark.parametrize("branch", [1, 2])
def test_single_branch_maxima_match_in_situ_phase(ar2_pair, ar2, branch):
    tr = ar2_pair.traces[branch - 1]
    orders = list(range(14, 36, 2))
    sg = spectrogram(ar2_pair.traces, orders, PHI, f"single-branch-{branch}", ar2)
    for q, delay in zip(orders, sg.max_delays):
        phi0 = in_situ_phase(sigma_coefficients(tr.at(q * ar2.omega), ar2))
        expected = -phi0 / (4 * math.pi)  # units of T
        gap = (delay - expected) % 0.25
        assert min(gap, 0.25 - gap) < 1e-3


def test_spectrogram_order_out_of_range(ar2_pair, ar2):
    with pytest.raises(RangeError):
        spectrogram(ar2_pair.traces, [200], PHI, "single-branch-1", ar2)


def test_spectrogram_bad_mode(ar2_pair, ar2):
    with pytest.raises(DomainError):
        spectrogram(ar2_pair.traces, [20], PHI, "both", ar2)
    with pytest.raises(DomainError):
        spectrogram(ar2_pair.traces[:1], [20], PHI, "single-branch-2", ar2)
