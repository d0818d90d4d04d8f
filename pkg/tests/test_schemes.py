"""Measurement schemes: closed forms, circuit agreement, Monte Carlo."""
import math

import numpy as np
import pytest

from entscope import oracle
from entscope.errors import ConfigError
from entscope.eventlog import fringe_counts, pair_counts
from entscope.fock import DetectorModel
from entscope.schemes import (
    SchemeConfig,
    classify_pattern,
    direct_detection_probs,
    entangled_coincidence_probs,
    hbt_coincidence_prob,
    optimal_p_e,
    simulate_run,
    temporal_overlap_factor,
    two_telescope_distribution,
    w_state_probs,
    weak_coherent_stats,
)
from entscope.sky import Baseline, SourceModel, arrival_density_matrix
from entscope.schemes import resource_state

WAVELENGTH = 800e-9


def binary_with_visibility(v: float) -> SourceModel:
    """Equal binary whose fringe at a 100 m baseline has Re V = v, Im V = 0."""
    x = math.acos(v)
    separation = 2.0 * math.asin(x * WAVELENGTH / (2.0 * math.pi * 100.0))
    return SourceModel.binary(separation)


def five_sigma(p: float, n: int) -> float:
    return 5.0 * math.sqrt(max(p * (1.0 - p), 1e-12) / n)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def test_direct_probs_anchor_values():
    p1, p2 = direct_detection_probs(1.0, 0.0)
    assert (p1, p2) == (1.0, 0.0)
    p1, p2 = direct_detection_probs(0.7, math.pi)
    assert p1 == pytest.approx(0.15, abs=1e-15)
    p1, _ = direct_detection_probs(0.5j, math.pi / 2.0)
    assert p1 == pytest.approx(0.75, abs=1e-15)


def test_entangled_probs():
    probs = entangled_coincidence_probs(0.7, 0.0)
    assert probs.acceptance == 0.5
    assert probs.correlated == pytest.approx(0.85, abs=1e-15)
    assert probs.correlated + probs.anticorrelated == pytest.approx(1.0)
    with pytest.raises(ValueError):
        entangled_coincidence_probs(1.5, 0.0)


def test_weak_coherent_anchor():
    stats = weak_coherent_stats(0.02, 0.02, 1.0, 0.0)
    assert stats.visibility_factor == pytest.approx(0.4, abs=1e-15)
    assert stats.p_total_coincidence == pytest.approx(5.0 * 0.02**2 / 4.0,
                                                      abs=1e-15)
    with pytest.raises(ValueError):
        weak_coherent_stats(0.5, 0.02, 1.0, 0.0)


def test_optimal_p_e_formula_and_clamp():
    assert optimal_p_e(0.02, 0.0) == pytest.approx(0.02, abs=1e-15)
    assert optimal_p_e(0.02, 1.0) == pytest.approx(0.02 * math.sqrt(2.0),
                                                   abs=1e-15)
    assert optimal_p_e(0.19, 1.0) == 0.2


def test_hbt_anchor():
    assert hbt_coincidence_prob(0.02, 1.0) == pytest.approx(0.02**2 / 2.0,
                                                            abs=1e-15)
    assert hbt_coincidence_prob(0.02, 0.0) == pytest.approx(0.02**2 / 4.0,
                                                            abs=1e-15)


def test_w_state_probs():
    for n in (2, 5, 10):
        probs = w_state_probs(n, 0.6, 0.3, 0.3)
        assert probs.discard == pytest.approx(1.0 / n, abs=1e-15)
        assert probs.correlated == pytest.approx(0.8, abs=1e-12)
    probs = w_state_probs(4, 0.6, 0.0, math.pi / 2.0)
    assert probs.correlated == pytest.approx(0.5, abs=1e-12)


def test_temporal_overlap_factor():
    assert temporal_overlap_factor(1.0, 0.0, 0.0) == 1.0
    tau = 2.0
    got = temporal_overlap_factor(tau, tau, 0.0)
    assert got == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    got = temporal_overlap_factor(tau, 0.0, 3.0)
    assert got == pytest.approx(math.exp(-9.0 / 8.0), abs=1e-15)
    assert temporal_overlap_factor(1.0, 1.0, 10.0) < 1e-10
    with pytest.raises(ValueError):
        temporal_overlap_factor(0.0, 1.0, 0.0)


def test_scheme_config_validation():
    with pytest.raises(ConfigError):
        SchemeConfig(kind="unknown")
    with pytest.raises(ConfigError):
        SchemeConfig(kind="weak_coherent", p_a=0.5)
    with pytest.raises(ConfigError):
        SchemeConfig(kind="w_state", n_telescopes=1, w_phases=(0.0,))
    with pytest.raises(ConfigError):
        SchemeConfig(kind="w_state", n_telescopes=3, w_phases=(0.0,))
    with pytest.raises(ConfigError):
        SchemeConfig(kind="direct", n_telescopes=3)
    with pytest.raises(ConfigError):
        SchemeConfig(kind="direct", delta_schedule=())
    with pytest.raises(ConfigError):
        SchemeConfig(kind="weak_coherent", bell_complete=True)


# ---------------------------------------------------------------------------
# Analytic vs circuit (the documented verification grids)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("group", [
    oracle.check_direct,
    oracle.check_entangled,
    oracle.check_weak_coherent,
    oracle.check_hbt,
])
def test_oracle_grid(group):
    report = group()
    assert report.passed, report.line()


def test_acceptance_pattern_classifier():
    assert classify_pattern((1, 0, 0, 1)) == (True, False)
    assert classify_pattern((1, 1, 0, 0)) == (True, True)
    assert classify_pattern((0, 0, 1, 1)) == (True, True)
    assert classify_pattern((1, 0, 1, 0)) == (False, False)
    assert classify_pattern((0, 0, 0, 0)) == (False, False)
    assert classify_pattern((2, 1, 0, 0)) == (True, True)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def test_entangled_monte_carlo_statistics():
    deltas = tuple(2.0 * math.pi * k / 4.0 for k in range(4))
    config = SchemeConfig(kind="entangled", delta_schedule=deltas)
    log = simulate_run(config, binary_with_visibility(0.7),
                       Baseline(100.0, WAVELENGTH), 200_000, seed=42)
    got_deltas, successes, totals = fringe_counts(log)
    slots_per_delta = 50_000
    for k, delta in enumerate(deltas):
        expected = entangled_coincidence_probs(0.7, delta)
        acceptance = totals[k] / slots_per_delta
        assert abs(acceptance - 0.5) < five_sigma(0.5, slots_per_delta)
        corr = successes[k] / totals[k]
        assert abs(corr - expected.correlated) < five_sigma(
            expected.correlated, int(totals[k]))


def test_direct_monte_carlo_statistics():
    config = SchemeConfig(kind="direct", delta_schedule=(0.0, math.pi))
    log = simulate_run(config, binary_with_visibility(0.7),
                       Baseline(100.0, WAVELENGTH), 100_000, seed=9)
    _, successes, totals = fringe_counts(log)
    for k, delta in enumerate((0.0, math.pi)):
        p1, _ = direct_detection_probs(0.7, delta)
        frac = successes[k] / totals[k]
        assert abs(frac - p1) < five_sigma(p1, int(totals[k]))


def test_monte_carlo_with_lossy_detector_matches_table():
    """Sampled acceptance equals the exact pattern-table acceptance."""
    det = DetectorModel(efficiency=0.6, dark_prob_per_window=1e-3)
    config = SchemeConfig(kind="entangled", delta_schedule=(0.4,), detector=det)
    dist = two_telescope_distribution(
        arrival_density_matrix(1.0), resource_state(0.4), det)
    acceptance = sum(p for pattern, p in dist.items()
                     if classify_pattern(pattern)[0])
    n = 150_000
    log = simulate_run(config, SourceModel.point(),
                       Baseline(10.0, WAVELENGTH), n, seed=5)
    _, _, totals = fringe_counts(log)
    assert abs(totals[0] / n - acceptance) < five_sigma(acceptance, n)


def test_w_state_monte_carlo_discard_and_fringe():
    n_tel = 4
    config = SchemeConfig(kind="w_state", n_telescopes=n_tel,
                          w_phases=(0.0,) * n_tel)
    positions = (0.0, 40.0, 90.0, 160.0)
    n = 120_000
    log = simulate_run(config, binary_with_visibility(0.8),
                       (positions, WAVELENGTH), n, seed=21)
    discard = 1.0 - log.n_accepted_slots() / n
    assert abs(discard - 1.0 / n_tel) < five_sigma(1.0 / n_tel, n)

    counts = pair_counts(log, n_tel)
    assert set(counts) == {(i, j) for i in range(n_tel)
                           for j in range(i + 1, n_tel)}
    from entscope.schemes import _pairwise_visibilities
    vis = _pairwise_visibilities(binary_with_visibility(0.8), positions,
                                 WAVELENGTH)
    for (i, j), (succ, tot) in counts.items():
        expected = w_state_probs(n_tel, vis[(i, j)], 0.0, 0.0).correlated
        assert abs(succ / tot - expected) < five_sigma(expected, tot)


def test_simulate_run_deterministic_and_thread_invariant():
    config = SchemeConfig(kind="entangled", delta_schedule=(0.0, 1.0, 2.0))
    src = binary_with_visibility(0.5)
    base = Baseline(100.0, WAVELENGTH)
    a = simulate_run(config, src, base, 70_000, seed=17, threads=1)
    b = simulate_run(config, src, base, 70_000, seed=17, threads=4)
    c = simulate_run(config, src, base, 70_000, seed=18)
    for name in ("slot", "telescope", "detector", "accepted", "delta_index"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert not np.array_equal(a.slot, c.slot) or not np.array_equal(
        a.detector, c.detector)


def test_simulate_run_covers_full_delta_schedule():
    config = SchemeConfig(kind="entangled",
                          delta_schedule=tuple(np.linspace(0.0, 5.0, 7)))
    log = simulate_run(config, SourceModel.point(),
                       Baseline(10.0, WAVELENGTH), 7_000, seed=1)
    assert sorted(set(log.delta_index.tolist())) == list(range(7))
    # slot -> delta assignment is round robin
    assert np.all(log.delta_index == log.slot % 7)


def test_double_pair_background_dilutes_fringe():
    clean = SchemeConfig(kind="entangled", delta_schedule=(0.0,),
                         p_a=0.6, p_e=0.6)
    noisy = SchemeConfig(kind="entangled", delta_schedule=(0.0,),
                         p_a=0.6, p_e=0.6, double_pair_prob=0.15)
    src = SourceModel.point()
    base = Baseline(10.0, WAVELENGTH)
    log_c = simulate_run(clean, src, base, 60_000, seed=3)
    log_n = simulate_run(noisy, src, base, 60_000, seed=3)
    _, s_c, t_c = fringe_counts(log_c)
    _, s_n, t_n = fringe_counts(log_n)
    assert t_n[0] > t_c[0]
    assert s_n[0] / t_n[0] < s_c[0] / t_c[0] - 0.02

    overfull = SchemeConfig(kind="entangled", delta_schedule=(0.0,),
                            double_pair_prob=0.3)
    with pytest.raises(ConfigError):
        simulate_run(overfull, src, base, 100, seed=3)


def test_temporal_mismatch_washes_out_fringe():
    config = SchemeConfig(kind="entangled", delta_schedule=(0.0,),
                          coherence_time=1.0, jitter_sigma=0.2,
                          arrival_offset=5.0)
    log = simulate_run(config, SourceModel.point(),
                       Baseline(10.0, WAVELENGTH), 50_000, seed=4)
    _, succ, tot = fringe_counts(log)
    assert abs(succ[0] / tot[0] - 0.5) < five_sigma(0.5, int(tot[0]))


def test_bell_complete_removes_acceptance_loss():
    config = SchemeConfig(kind="entangled", delta_schedule=(0.0,),
                          bell_complete=True)
    log = simulate_run(config, SourceModel.point(),
                       Baseline(10.0, WAVELENGTH), 30_000, seed=6)
    _, succ, tot = fringe_counts(log)
    assert tot[0] == 30_000
    assert succ[0] / tot[0] > 1.0 - five_sigma(0.999, 30_000) - 1e-9
