"""Radiometry, coincidence-window, and limiting-magnitude checks.

The limiting-magnitude anchors are checked two ways: the scanner output is
frozen to the exact bisection dyadic, and the faint edge is recomputed by
hand from the binding constraint (min_events accepted coincidences per
atmospheric coherence time) to confirm the frozen value is where it belongs.
"""
import math

import pytest

from entscope.errors import ConfigError, InfeasibleBudgetError
from entscope.sensitivity import (
    DEFAULT_ZERO_POINT,
    MAGNITUDE_RESOLUTION,
    SPEED_OF_LIGHT,
    SensitivityBudget,
    accidental_rate,
    bandwidth_from_timing,
    coherence_time_from_bandwidth,
    coincidence_window,
    limiting_magnitude,
    mode_rate,
    photon_rate_from_magnitude,
    signal_event_rate,
)


def faint_edge_by_hand(budget: SensitivityBudget) -> float:
    """Closed-form faint edge when the events-per-coherence-time bound binds.

    0.5 * s * R(m) * tau = N  =>  m = 2.5 log10(0.5 s Z A tau / N).
    """
    scale = (0.5 * budget.merit_nm * budget.zero_point * budget.aperture_area
             * budget.atmospheric_coherence_time / budget.min_events)
    return 2.5 * math.log10(scale)


# ---------------------------------------------------------------------------
# Bandwidth / timing / mode-rate conversions
# ---------------------------------------------------------------------------

def test_bandwidth_from_timing_anchor():
    # lambda^2 / (2 pi c tau) at 550 nm and 35 ps, in nm.
    got = bandwidth_from_timing(550e-9, 35e-12)
    by_hand = (550e-9) ** 2 / (2.0 * math.pi * SPEED_OF_LIGHT * 35e-12) * 1e9
    assert got == pytest.approx(by_hand, rel=1e-15)
    assert got == pytest.approx(4.588e-3, rel=1e-3)


def test_bandwidth_timing_round_trip():
    for wavelength in (550e-9, 800e-9, 1.55e-6):
        for timing in (5e-12, 35e-12, 1e-9):
            dl = bandwidth_from_timing(wavelength, timing)
            assert coherence_time_from_bandwidth(wavelength, dl) == pytest.approx(
                timing, rel=1e-12)


def test_bandwidth_conversion_rejects_nonpositive():
    with pytest.raises(ValueError):
        bandwidth_from_timing(0.0, 35e-12)
    with pytest.raises(ValueError):
        bandwidth_from_timing(800e-9, -1e-12)
    with pytest.raises(ValueError):
        coherence_time_from_bandwidth(800e-9, 0.0)


def test_mode_rate_anchor():
    # c dl / lambda^2 for a 0.1 nm filter at 800 nm.
    got = mode_rate(0.1, 800e-9)
    assert got == pytest.approx(SPEED_OF_LIGHT * 0.1e-9 / (800e-9) ** 2, rel=1e-15)
    assert got == pytest.approx(4.684e10, rel=1e-3)
    assert mode_rate(0.0, 800e-9) == 0.0
    with pytest.raises(ValueError):
        mode_rate(-0.1, 800e-9)
    with pytest.raises(ValueError):
        mode_rate(0.1, 0.0)


# ---------------------------------------------------------------------------
# Budget construction
# ---------------------------------------------------------------------------

def test_default_budget_merit_and_area():
    budget = SensitivityBudget()
    assert budget.merit_nm == pytest.approx(0.025, rel=1e-12)
    assert budget.aperture_area == pytest.approx(math.pi / 4.0, rel=1e-15)
    assert budget.n_channels == 1


def test_improved_budget_channels():
    budget = SensitivityBudget.improved()
    assert budget.timing_fwhm == 5e-12
    assert budget.dark_counts_per_s == 10.0
    assert budget.n_channels == 100
    per_channel = bandwidth_from_timing(budget.wavelength, 5e-12)
    assert budget.bandwidth_nm == pytest.approx(100 * per_channel, rel=1e-12)
    # Total bandwidth lands near 6.8 nm; merit is rate * efficiency * that.
    assert budget.bandwidth_nm == pytest.approx(6.795, rel=1e-3)
    assert budget.merit_nm == pytest.approx(1.69883, rel=1e-4)


def test_improved_accepts_overrides():
    budget = SensitivityBudget.improved(aperture_diameter=2.0, min_events=10)
    assert budget.aperture_diameter == 2.0
    assert budget.min_events == 10
    assert budget.n_channels == 100
    assert budget.timing_fwhm == 5e-12


@pytest.mark.parametrize("field, value", [
    ("wavelength", 0.0),
    ("bandwidth_nm", -0.1),
    ("aperture_diameter", 0.0),
    ("timing_fwhm", 0.0),
    ("atmospheric_coherence_time", -1.0),
    ("zero_point", 0.0),
    ("rate", 1.5),
    ("efficiency", -0.2),
    ("dark_counts_per_s", -1.0),
    ("min_events", 0),
    ("n_channels", 0),
])
def test_budget_validation(field, value):
    with pytest.raises(ConfigError, match=field):
        SensitivityBudget(**{field: value})


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------

def test_photon_rate_zero_point_anchor():
    budget = SensitivityBudget()
    at_zero = photon_rate_from_magnitude(0.0, budget)
    assert at_zero == pytest.approx(DEFAULT_ZERO_POINT * math.pi / 4.0, rel=1e-15)
    # Five magnitudes is exactly a factor of 100.
    assert photon_rate_from_magnitude(5.0, budget) == pytest.approx(
        at_zero / 100.0, rel=1e-12)
    # Doubling the aperture diameter quadruples the collected rate.
    wide = SensitivityBudget(aperture_diameter=2.0)
    assert photon_rate_from_magnitude(0.0, wide) == pytest.approx(
        4.0 * at_zero, rel=1e-12)


def test_signal_event_rate():
    assert signal_event_rate(0.025, 40_000.0) == pytest.approx(500.0, rel=1e-12)
    assert signal_event_rate(0.0, 1e6) == 0.0
    with pytest.raises(ValueError):
        signal_event_rate(-0.1, 1e6)


def test_coincidence_window_takes_the_wider():
    # Default: 35 ps timing beats the 3.4 ps coherence time of 0.1 nm.
    assert coincidence_window(SensitivityBudget()) == 35e-12
    # A narrow 0.001 nm filter has a 340 ps coherence time, which wins.
    narrow = SensitivityBudget(bandwidth_nm=0.001)
    assert coincidence_window(narrow) == pytest.approx(
        coherence_time_from_bandwidth(800e-9, 0.001), rel=1e-12)
    # Channelization uses the per-channel width: 100 channels of 0.001 nm.
    split = SensitivityBudget(bandwidth_nm=0.1, n_channels=100)
    assert coincidence_window(split) == coincidence_window(narrow)


def test_accidental_rate_hand_value():
    budget = SensitivityBudget()
    # per-detector rate 2*100 dark + (4000 + 4000) photons = 8200/s;
    # 35 ps * 8200^2 = 2.3534e-3 accidentals/s.
    assert accidental_rate(budget, 4000.0) == pytest.approx(
        35e-12 * 8200.0 ** 2, rel=1e-12)
    # Explicit reference rate replaces the matched-rate default.
    assert accidental_rate(budget, 4000.0, 0.0) == pytest.approx(
        35e-12 * 4200.0 ** 2, rel=1e-12)


def test_accidental_rate_channel_scaling():
    # With no dark counts and a timing-limited window, splitting the photons
    # over n channels divides the accidental rate by exactly n.
    one = SensitivityBudget(dark_counts_per_s=0.0, timing_fwhm=1e-9)
    four = SensitivityBudget(dark_counts_per_s=0.0, timing_fwhm=1e-9,
                             n_channels=4)
    assert accidental_rate(four, 8000.0) == pytest.approx(
        accidental_rate(one, 8000.0) / 4.0, rel=1e-12)


# ---------------------------------------------------------------------------
# Limiting magnitude
# ---------------------------------------------------------------------------

def test_limiting_magnitude_default_frozen():
    budget = SensitivityBudget()
    m_lim = limiting_magnitude(budget)
    assert m_lim == 7.4375
    # The events-per-coherence-time constraint binds: the hand-derived faint
    # edge sits within one bisection step above the returned value.
    edge = faint_edge_by_hand(budget)
    assert edge - MAGNITUDE_RESOLUTION <= m_lim <= edge + 1e-9
    # And accidentals are slack there by orders of magnitude.
    astro_per_nm = photon_rate_from_magnitude(m_lim, budget)
    signal = signal_event_rate(budget.merit_nm, astro_per_nm)
    noise = accidental_rate(budget, astro_per_nm * budget.bandwidth_nm)
    assert signal > 100.0 * noise


def test_limiting_magnitude_improved_frozen():
    budget = SensitivityBudget.improved()
    m_lim = limiting_magnitude(budget)
    assert m_lim == 12.015625
    edge = faint_edge_by_hand(budget)
    assert edge - MAGNITUDE_RESOLUTION <= m_lim <= edge + 1e-9
    astro_per_nm = photon_rate_from_magnitude(m_lim, budget)
    signal = signal_event_rate(budget.merit_nm, astro_per_nm)
    noise = accidental_rate(budget, astro_per_nm * budget.bandwidth_nm)
    assert signal > 100.0 * noise


def test_limiting_magnitude_monotone_in_aperture():
    values = [limiting_magnitude(SensitivityBudget(aperture_diameter=d))
              for d in (0.5, 1.0, 2.0, 4.0)]
    assert values == sorted(values)
    assert values[0] < values[-1]
    # Doubling the diameter is 4x the flux = 1.505 magnitudes, up to grid
    # resolution.
    for lo, hi in zip(values, values[1:]):
        assert hi - lo == pytest.approx(2.5 * math.log10(4.0), abs=0.02)


def test_limiting_magnitude_monotone_in_rate():
    values = [limiting_magnitude(SensitivityBudget(rate=r))
              for r in (0.1, 0.3, 0.5, 1.0)]
    assert values == sorted(values)
    assert values[0] < values[-1]


def test_limiting_magnitude_monotone_in_min_events():
    values = [limiting_magnitude(SensitivityBudget(min_events=n))
              for n in (1, 5, 25)]
    assert values == sorted(values, reverse=True)
    assert values[0] > values[-1]


def test_limiting_magnitude_dark_count_regimes():
    # Below ~2e6 dark counts/s the min-events constraint binds and the
    # limiting magnitude does not move at all.
    assert limiting_magnitude(SensitivityBudget(dark_counts_per_s=1e4)) == 7.4375
    assert limiting_magnitude(SensitivityBudget(dark_counts_per_s=1e6)) == 7.4375
    # Past that, accidentals take over and the limit collapses.
    at_1e7 = limiting_magnitude(SensitivityBudget(dark_counts_per_s=1e7))
    at_1e8 = limiting_magnitude(SensitivityBudget(dark_counts_per_s=1e8))
    assert at_1e7 < 7.4375
    assert at_1e8 < at_1e7
    with pytest.raises(InfeasibleBudgetError, match="dark_counts_per_s"):
        limiting_magnitude(SensitivityBudget(dark_counts_per_s=1e9))


def test_limiting_magnitude_caps_at_scan_end():
    # An absurd zero point pushes the faint edge past the scan window; the
    # solver returns the last scanned magnitude rather than extrapolating.
    assert limiting_magnitude(SensitivityBudget(zero_point=1e20)) == 30.0
