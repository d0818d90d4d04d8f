"""Interferometric measurement schemes and their event statistics.

Covers four ways of turning starlight into fringe data:

* direct detection -- recombine the two collection modes on one beam splitter,
* entangled coincidence -- interfere each collection mode with one arm of a
  distributed single-photon resource and post-select on one click per site,
* weak coherent reference -- same optics with faint laser light standing in
  for the shared single photon,
* intensity correlation (photon bunching across the two sites).

Each scheme has closed-form per-slot probabilities plus a Monte Carlo
(`simulate_run`) that samples the exact click-pattern distribution of the
corresponding few-mode circuit, so analytic and sampled statistics agree by
construction and both can be checked against the Fock simulator.

Per-slot event model for faint sources: time is discretized into coherence
slots.  Leading-order photon-number cases (single astronomical photon, single
reference photon, one of each, two of a kind) are mutually exclusive
alternatives with the stated rates; the two-of-a-kind astronomical case
carries the bunching enhancement of chaotic light.  Case rates assume
p_a, p_e << 1 and are enforced below 0.2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rngmod
from .errors import ConfigError
from .eventlog import EventLog
from .fock import (
    DEFAULT_CUTOFF,
    DensityOperator,
    DetectorModel,
    FockRegister,
    IDEAL_DETECTOR,
    apply_beam_splitter,
    apply_phase,
    outcome_distribution,
)
from .sky import Baseline, SourceModel, arrival_density_matrix, visibility

SCHEME_KINDS = ("direct", "entangled", "weak_coherent", "w_state", "hbt")

MAX_FAINT_PROB = 0.2
WARN_FAINT_PROB = 0.1

# Slots per deterministic sampling partition (one RNG substream each).
CHUNK_SLOTS = 1 << 16


def _check_visibility(v: complex) -> complex:
    v = complex(v)
    if abs(v) > 1.0 + 1e-12:
        raise ValueError(f"|visibility| must be <= 1, got {abs(v)}")
    return v


# ---------------------------------------------------------------------------
# Closed-form per-slot statistics
# ---------------------------------------------------------------------------

def direct_detection_probs(v: complex, delta: float) -> tuple[float, float]:
    """Single-photon interferometer port probabilities.

    Port 1 fires with probability [1 + Re(v e^{-i delta})]/2.
    """
    v = _check_visibility(v)
    p1 = 0.5 * (1.0 + (v * np.exp(-1j * delta)).real)
    return float(p1), float(1.0 - p1)


@dataclass(frozen=True)
class CoincidenceProbs:
    acceptance: float
    correlated: float
    anticorrelated: float


def entangled_coincidence_probs(v: complex, delta: float) -> CoincidenceProbs:
    """Shared-single-photon scheme: acceptance and conditional correlations.

    Half of all slots put one photon on each side (acceptance 1/2); given
    acceptance, the two sites fire matching detectors with probability
    [1 + Re(v e^{-i delta})]/2.
    """
    v = _check_visibility(v)
    corr = 0.5 * (1.0 + (v * np.exp(-1j * delta)).real)
    return CoincidenceProbs(acceptance=0.5, correlated=float(corr),
                            anticorrelated=float(1.0 - corr))


def _check_faint(name: str, p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= MAX_FAINT_PROB:
        raise ValueError(f"{name} must be in [0, {MAX_FAINT_PROB}] "
                         f"(faint-source regime), got {p}")
    if p > WARN_FAINT_PROB:
        warnings.warn(f"{name}={p} is large for the leading-order faint-source "
                      f"statistics", stacklevel=3)
    return p


@dataclass(frozen=True)
class WeakCoherentStats:
    p_total_coincidence: float
    p_correlated: float
    p_anticorrelated: float
    visibility_factor: float


def weak_coherent_stats(p_a: float, p_e: float, v: complex, delta: float) -> WeakCoherentStats:
    """Leading-order coincidence statistics with a weak coherent reference.

    Per slot, with mean astronomical/reference photon numbers p_a and p_e
    (split between the two sites), the one-click-per-side cases are: one of
    each (p_a p_e / 2, carrying the fringe), two reference photons (p_e^2/4),
    and two astronomical photons (p_a^2 (1 + Re v)/4, bunching-enhanced).
    The fringe amplitude is suppressed by visibility_factor
    = 2 p_a p_e / [p_e^2 + p_a^2 (1 + Re v) + 2 p_a p_e].
    """
    p_a = _check_faint("p_a", p_a)
    p_e = _check_faint("p_e", p_e)
    v = _check_visibility(v)
    fringe = (v * np.exp(-1j * delta)).real
    background = p_e**2 + p_a**2 * (1.0 + v.real) + 2.0 * p_a * p_e
    p_total = p_a * p_e / 2.0 + p_e**2 / 4.0 + p_a**2 * (1.0 + v.real) / 4.0
    p_corr = (background + 2.0 * p_a * p_e * fringe) / 8.0
    vf = 0.0 if background == 0.0 else 2.0 * p_a * p_e / background
    return WeakCoherentStats(
        p_total_coincidence=float(p_total),
        p_correlated=float(p_corr),
        p_anticorrelated=float(p_total - p_corr),
        visibility_factor=float(vf),
    )


def optimal_p_e(p_a: float, v: complex) -> float:
    """Reference brightness maximizing the visibility factor at fixed p_a.

    The factor 2 p_a p_e / [p_e^2 + p_a^2 (1 + Re v) + 2 p_a p_e] peaks at
    p_e = p_a sqrt(1 + Re v), clamped to the faint-source domain.
    """
    p_a = float(p_a)
    if not 0.0 < p_a <= MAX_FAINT_PROB:
        raise ValueError(f"p_a must be in (0, {MAX_FAINT_PROB}], got {p_a}")
    v = _check_visibility(v)
    return float(min(p_a * math.sqrt(max(1.0 + v.real, 0.0)), MAX_FAINT_PROB))


def hbt_coincidence_prob(p_a: float, v: complex) -> float:
    """Two-site intensity-correlation (bunching) coincidence probability.

    p_a^2 (1 + Re v) / 4 per slot for chaotic light of mean photon number
    p_a split between the sites.
    """
    p_a = _check_faint("p_a", p_a)
    v = _check_visibility(v)
    return float(p_a**2 * (1.0 + v.real) / 4.0)


@dataclass(frozen=True)
class WStateProbs:
    discard: float
    correlated: float
    anticorrelated: float


def w_state_probs(n: int, v_ij: complex, delta_i: float, delta_j: float) -> WStateProbs:
    """Telescope-array statistics with a shared single photon over n sites.

    Both photons land on the same site (discard) with probability 1/n.
    Conditional on occupying the pair (i, j), the sites correlate with
    probability [1 + Re(v_ij e^{-i(delta_i - delta_j)})]/2.
    """
    if n < 2:
        raise ValueError(f"need at least 2 telescopes, got {n}")
    v_ij = _check_visibility(v_ij)
    corr = 0.5 * (1.0 + (v_ij * np.exp(-1j * (delta_i - delta_j))).real)
    return WStateProbs(discard=1.0 / n, correlated=float(corr),
                       anticorrelated=float(1.0 - corr))


def temporal_overlap_factor(coherence_time: float, jitter_sigma: float,
                            arrival_offset: float = 0.0) -> float:
    """Interference-visibility multiplier for imperfect temporal mode overlap.

    Gaussian wavepacket model: photons of coherence time tau_c with relative
    timing jitter sigma_t and mean offset dt overlap with amplitude
    exp(-dt^2 / (2 (tau_c^2 + sigma_t^2))) * tau_c / sqrt(tau_c^2 + sigma_t^2).
    Equals 1 for perfectly matched photons and 1/sqrt(2) at sigma_t = tau_c.
    """
    tau = float(coherence_time)
    sig = float(jitter_sigma)
    dt = float(arrival_offset)
    if tau <= 0.0:
        raise ValueError(f"coherence_time must be positive, got {tau}")
    if sig < 0.0:
        raise ValueError(f"jitter_sigma must be non-negative, got {sig}")
    width2 = tau * tau + sig * sig
    return float(math.exp(-dt * dt / (2.0 * width2)) * tau / math.sqrt(width2))


# ---------------------------------------------------------------------------
# Exact few-mode circuits (the oracle route for everything above)
# ---------------------------------------------------------------------------

def resource_state(delta: float, photon_cutoff: int = 2) -> FockRegister:
    """Distributed single photon (|0,1> + e^{i delta}|1,0>)/sqrt(2), site-L arm delayed."""
    return FockRegister(2, photon_cutoff, {
        (0, 1): 1.0 / math.sqrt(2.0),
        (1, 0): np.exp(1j * delta) / math.sqrt(2.0),
    })


def lab_pair_state(delta: float, photon_cutoff: int = 2) -> FockRegister:
    """Two-photon component of the split coherent reference (L arm delayed)."""
    return FockRegister(2, photon_cutoff, {
        (0, 2): 0.5,
        (1, 1): np.exp(1j * delta) / math.sqrt(2.0),
        (2, 0): np.exp(2j * delta) * 0.5,
    })


def hbt_pair_state(v: complex, photon_cutoff: int = 2) -> DensityOperator:
    """Two chaotic-light photons shared between the sites, visibility v.

    Built from independent-emission pairs c+(phi) c+(0)|0> with the site-L
    phase phi drawn from a two-point distribution of mean v, weighted by the
    bosonic pair-production rate (no per-pair renormalization), then
    normalized.  The one-photon-per-site weight is (1 + Re v)/(3 + Re v).
    """
    v = _check_visibility(v)
    spread = math.acos(min(abs(v), 1.0))
    phases = [np.angle(v) + spread, np.angle(v) - spread] if abs(v) > 0 else [
        math.pi / 2.0, -math.pi / 2.0]
    components = []
    total = 0.0
    for phi in phases:
        ket = FockRegister(2, photon_cutoff, {
            (0, 2): math.sqrt(2.0) / 2.0,
            (1, 1): (1.0 + np.exp(1j * phi)) / 2.0,
            (2, 0): math.sqrt(2.0) * np.exp(1j * phi) / 2.0,
        })
        weight = 0.5
        components.append((weight, ket))
        total += weight * ket.norm() ** 2
    rho = DensityOperator.from_mixture(components)
    return DensityOperator(2, photon_cutoff, rho.matrix / total)


def astro_pair_rate(p_a: float, v: complex) -> float:
    """Per-slot rate of two-astronomical-photon events (bunching included)."""
    return float(p_a**2 * (3.0 + complex(v).real) / 4.0)


def two_telescope_distribution(rho_astro: DensityOperator | None,
                               rho_ref: DensityOperator | FockRegister | None,
                               detector: DetectorModel = IDEAL_DETECTOR,
                               photon_cutoff: int = DEFAULT_CUTOFF,
                               ) -> dict[tuple[int, ...], float]:
    """Click-pattern table of the two-site interference circuit.

    Mode order (astro_L, astro_R, ref_L, ref_R); each site mixes its astro and
    reference modes on a balanced splitter, all four outputs are detected.
    Detector ids per site: 1 = astro-port output, 2 = reference-port output.
    None inputs mean vacuum.
    """
    astro = rho_astro if rho_astro is not None else DensityOperator.vacuum(2, 0)
    ref = rho_ref if rho_ref is not None else DensityOperator.vacuum(2, 0)
    if isinstance(ref, FockRegister):
        ref = DensityOperator.from_register(ref)
    joint = astro.tensor(ref, photon_cutoff=min(
        photon_cutoff, astro.photon_cutoff + ref.photon_cutoff))
    joint = apply_beam_splitter(joint, 0, 2, 0.5)
    joint = apply_beam_splitter(joint, 1, 3, 0.5)
    return outcome_distribution(joint, detector)


def direct_distribution(v: complex, delta: float,
                        detector: DetectorModel = IDEAL_DETECTOR,
                        photon_cutoff: int = 2) -> dict[tuple[int, ...], float]:
    """Click-pattern table of the direct-detection circuit (modes = 2 ports).

    The recombining splitter carries a fixed pi/2 internal phase so that port
    1 realizes [1 + Re(v e^{-i delta})]/2 under the package splitter
    convention.
    """
    rho = arrival_density_matrix(v, photon_cutoff=photon_cutoff)
    rho = apply_phase(rho, 1, delta)
    rho = apply_beam_splitter(rho, 0, 1, 0.5, phase=math.pi / 2.0)
    return outcome_distribution(rho, detector)


def classify_pattern(pattern: tuple[int, ...]) -> tuple[bool, bool]:
    """(accepted, correlated) for a 4-mode two-site click pattern."""
    l_astro, r_astro, l_ref, r_ref = (c > 0 for c in pattern)
    accepted = (l_astro ^ l_ref) and (r_astro ^ r_ref)
    correlated = (l_astro and r_astro) or (l_ref and r_ref)
    return accepted, accepted and correlated


# ---------------------------------------------------------------------------
# Scheme configuration and Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeConfig:
    """Per-run measurement configuration.

    p_a / p_e are per-slot source and reference photon probabilities
    (1.0 = ideal deterministic source, allowed for the single-photon
    schemes; the weak-coherent scheme requires the faint regime <= 0.2).
    delta_schedule is cycled slot by slot.  w_phases are the per-telescope
    delay phases of the telescope-array scheme (length n_telescopes).
    double_pair_prob adds uncorrelated reference-pair background events.
    coherence_time/jitter_sigma/arrival_offset feed the temporal overlap
    factor applied to the visibility (coherence_time 0 disables it).
    bell_complete models a complete two-photon parity measurement; it removes
    the one-click-per-side acceptance loss (ideal detectors only).
    """

    kind: str
    delta_schedule: tuple[float, ...] = (0.0,)
    p_a: float = 1.0
    p_e: float = 1.0
    n_telescopes: int = 2
    w_phases: tuple[float, ...] = ()
    detector: DetectorModel = field(default_factory=DetectorModel)
    double_pair_prob: float = 0.0
    coherence_time: float = 0.0
    jitter_sigma: float = 0.0
    arrival_offset: float = 0.0
    bell_complete: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta_schedule",
                           tuple(float(d) for d in self.delta_schedule))
        object.__setattr__(self, "w_phases", tuple(float(d) for d in self.w_phases))
        self.validate()

    def validate(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ConfigError(f"kind must be one of {SCHEME_KINDS}, got {self.kind!r}")
        if not self.delta_schedule:
            raise ConfigError("delta_schedule must not be empty")
        if not all(math.isfinite(d) for d in self.delta_schedule):
            raise ConfigError("delta_schedule entries must be finite")
        if not 0.0 <= self.p_a <= 1.0:
            raise ConfigError(f"p_a must be in [0, 1], got {self.p_a}")
        if not 0.0 <= self.p_e <= 1.0:
            raise ConfigError(f"p_e must be in [0, 1], got {self.p_e}")
        if self.kind in ("weak_coherent", "hbt") and self.p_a > MAX_FAINT_PROB:
            raise ConfigError(f"p_a must be <= {MAX_FAINT_PROB} for kind={self.kind}")
        if self.kind == "weak_coherent" and self.p_e > MAX_FAINT_PROB:
            raise ConfigError(f"p_e must be <= {MAX_FAINT_PROB} for kind=weak_coherent")
        if self.kind == "w_state":
            if self.n_telescopes < 2:
                raise ConfigError("n_telescopes must be >= 2 for kind=w_state")
            if len(self.w_phases) != self.n_telescopes:
                raise ConfigError("w_phases must have one entry per telescope")
        elif self.n_telescopes != 2:
            raise ConfigError(f"kind={self.kind} uses exactly 2 telescopes")
        if not 0.0 <= self.double_pair_prob < 1.0:
            raise ConfigError("double_pair_prob must be in [0, 1)")
        if self.coherence_time < 0 or self.jitter_sigma < 0:
            raise ConfigError("temporal parameters must be non-negative")
        if self.bell_complete and self.kind != "entangled":
            raise ConfigError("bell_complete applies to kind=entangled only")

    def overlap_factor(self) -> float:
        if self.coherence_time <= 0.0:
            return 1.0
        return temporal_overlap_factor(self.coherence_time, self.jitter_sigma,
                                       self.arrival_offset)


def effective_visibility(config: SchemeConfig, v: complex) -> complex:
    """Visibility after the temporal mode-overlap penalty."""
    return complex(v) * config.overlap_factor()


def double_pair_rate_ok(config: SchemeConfig, slot_rate: float,
                        dark_equivalent_cps: float) -> bool:
    """True when double-pair background stays below the dark-count-equivalent bound."""
    return config.double_pair_prob * slot_rate <= dark_equivalent_cps


@dataclass(frozen=True)
class _Outcome:
    probability: float
    records: tuple[tuple[int, int], ...]  # (telescope, detector) per click
    accepted: bool


def _two_telescope_outcomes(config: SchemeConfig, v: complex, delta: float
                            ) -> list[_Outcome]:
    """Combined per-slot click distribution for the 2-telescope schemes."""
    det = config.detector
    v_eff = effective_visibility(config, v)

    if config.kind == "entangled" and config.bell_complete:
        probs = entangled_coincidence_probs(v_eff, delta)
        out = []
        for d_l, d_r, p in (
            (1, 1, probs.correlated / 2.0), (2, 2, probs.correlated / 2.0),
            (1, 2, probs.anticorrelated / 2.0), (2, 1, probs.anticorrelated / 2.0),
        ):
            out.append(_Outcome(p, ((0, d_l), (1, d_r)), True))
        return out

    cases: list[tuple[float, dict]] = []
    if config.kind == "entangled":
        p_mixed = config.p_a * config.p_e
        cases.append((p_mixed, two_telescope_distribution(
            arrival_density_matrix(v_eff), resource_state(delta), det)))
        if config.p_a < 1.0 and config.p_e > 0.0:
            cases.append((config.p_e * (1.0 - config.p_a), two_telescope_distribution(
                None, resource_state(delta), det)))
        if config.p_e < 1.0 and config.p_a > 0.0:
            cases.append((config.p_a * (1.0 - config.p_e), two_telescope_distribution(
                arrival_density_matrix(v_eff), None, det)))
    elif config.kind == "weak_coherent":
        p_a, p_e = config.p_a, config.p_e
        cases.append((p_a * p_e, two_telescope_distribution(
            arrival_density_matrix(v_eff), resource_state(delta), det)))
        cases.append((p_e**2 / 2.0, two_telescope_distribution(
            None, lab_pair_state(delta), det)))
        cases.append((astro_pair_rate(p_a, v_eff), two_telescope_distribution(
            hbt_pair_state(v_eff), None, det)))
        cases.append((p_a * (1.0 - p_e), two_telescope_distribution(
            arrival_density_matrix(v_eff), None, det)))
        cases.append((p_e * (1.0 - p_a), two_telescope_distribution(
            None, resource_state(delta), det)))
    elif config.kind == "hbt":
        p_a = config.p_a
        cases.append((astro_pair_rate(p_a, v_eff), two_telescope_distribution(
            hbt_pair_state(v_eff), None, det)))
        cases.append((p_a, two_telescope_distribution(
            arrival_density_matrix(v_eff), None, det)))
    else:
        raise ValueError(f"not a two-telescope circuit scheme: {config.kind}")

    if config.double_pair_prob > 0.0:
        pair = DensityOperator.from_register(
            FockRegister.from_occupation((1, 1), photon_cutoff=2))
        cases.append((config.double_pair_prob,
                      two_telescope_distribution(None, pair, det)))

    total_case = sum(p for p, _ in cases)
    if total_case > 1.0 + 1e-9:
        raise ConfigError(f"per-slot case probabilities sum to {total_case:.4f} > 1")

    combined: dict[tuple[int, ...], float] = {}
    for case_prob, dist in cases:
        for pattern, p in dist.items():
            combined[pattern] = combined.get(pattern, 0.0) + case_prob * p
    # Remaining probability: empty slot, dark counts only.
    vacuum_prob = max(1.0 - total_case, 0.0)
    if vacuum_prob > 0.0:
        vac = outcome_distribution(DensityOperator.vacuum(4, 0), det)
        for pattern, p in vac.items():
            combined[pattern] = combined.get(pattern, 0.0) + vacuum_prob * p

    outcomes = []
    for pattern in sorted(combined):
        p = combined[pattern]
        if p <= 0.0:
            continue
        accepted, _ = classify_pattern(pattern)
        records = []
        if pattern[0]:
            records.append((0, 1))
        if pattern[2]:
            records.append((0, 2))
        if pattern[1]:
            records.append((1, 1))
        if pattern[3]:
            records.append((1, 2))
        outcomes.append(_Outcome(p, tuple(records), accepted))
    return outcomes


def _direct_outcomes(config: SchemeConfig, v: complex, delta: float) -> list[_Outcome]:
    v_eff = effective_visibility(config, v)
    det = config.detector
    combined: dict[tuple[int, ...], float] = {}
    for case_prob, dist in (
        (config.p_a, direct_distribution(v_eff, delta, det)),
        (1.0 - config.p_a, outcome_distribution(DensityOperator.vacuum(2, 0), det)),
    ):
        if case_prob <= 0.0:
            continue
        for pattern, p in dist.items():
            combined[pattern] = combined.get(pattern, 0.0) + case_prob * p
    outcomes = []
    for pattern in sorted(combined):
        p = combined[pattern]
        if p <= 0.0:
            continue
        clicks = (pattern[0] > 0) + (pattern[1] > 0)
        records = []
        if pattern[0]:
            records.append((0, 1))
        if pattern[1]:
            records.append((0, 2))
        outcomes.append(_Outcome(p, tuple(records), clicks == 1))
    return outcomes


def _w_state_outcomes(config: SchemeConfig, vis: dict[tuple[int, int], complex]
                      ) -> list[_Outcome]:
    """Per-slot outcomes for the telescope-array scheme (ideal detectors).

    Both photons land on one site with probability 1/n (single merged click,
    not accepted); otherwise the occupied pair is uniform over the n(n-1)/2
    unordered pairs with the pairwise fringe statistics.
    """
    n = config.n_telescopes
    outcomes = []
    for i in range(n):
        for d in (1, 2):
            outcomes.append(_Outcome(1.0 / (2.0 * n * n), ((i, d),), False))
    for i in range(n):
        for j in range(i + 1, n):
            v_ij = effective_visibility(config, vis[(i, j)])
            probs = w_state_probs(n, v_ij, config.w_phases[i], config.w_phases[j])
            pair_prob = 2.0 / (n * n)
            for d_i, d_j, frac in (
                (1, 1, probs.correlated / 2.0), (2, 2, probs.correlated / 2.0),
                (1, 2, probs.anticorrelated / 2.0), (2, 1, probs.anticorrelated / 2.0),
            ):
                outcomes.append(_Outcome(pair_prob * frac, ((i, d_i), (j, d_j)), True))
    return outcomes


def _pairwise_visibilities(source: SourceModel, positions,
                           wavelength: float) -> dict[tuple[int, int], complex]:
    vis = {}
    n = len(positions)
    for i in range(n):
        for j in range(i + 1, n):
            if np.isscalar(positions[i]):
                vec = float(positions[i]) - float(positions[j])
            else:
                vec = tuple(np.asarray(positions[i], dtype=float)
                            - np.asarray(positions[j], dtype=float))
            vis[(i, j)] = visibility(source, Baseline(vec, wavelength))
    return vis


def _sample_block(outcomes: list[_Outcome], slots: np.ndarray, delta_idx: int,
                  rng: np.random.Generator, cols: dict) -> None:
    probs = np.array([o.probability for o in outcomes])
    cdf = np.cumsum(probs)
    cdf[-1] = max(cdf[-1], 1.0)  # guard roundoff; tail mass goes to the last outcome
    draw = np.searchsorted(cdf, rng.random(len(slots)), side="right")
    for idx, outcome in enumerate(outcomes):
        if not outcome.records:
            continue
        sel = slots[draw == idx]
        if not len(sel):
            continue
        for tel, det in outcome.records:
            cols["slot"].append(sel)
            cols["tel"].append(np.full(len(sel), tel, dtype=np.int64))
            cols["det"].append(np.full(len(sel), det, dtype=np.int64))
            cols["acc"].append(np.full(len(sel), outcome.accepted, dtype=bool))
            cols["di"].append(np.full(len(sel), delta_idx, dtype=np.int64))


def simulate_run(config: SchemeConfig, source: SourceModel, geometry,
                 n_slots: int, seed: int, threads: int = 1) -> EventLog:
    """Monte Carlo event log for a measurement run.

    geometry: a Baseline for the two-telescope schemes, or a sequence of
    telescope positions (same units as baseline vectors) plus a wavelength
    via a (positions, wavelength) tuple for the telescope-array scheme.
    Slots cycle through the delay schedule round-robin.  Sampling is
    partitioned into fixed-size chunks with one RNG substream per chunk
    derived from (seed, chunk index), so results are identical for any
    worker count.  threads is accepted for API symmetry; chunk evaluation
    is sequential since sampling is vectorized numpy.
    """
    if n_slots <= 0:
        raise ValueError(f"n_slots must be positive, got {n_slots}")
    if config.kind == "w_state":
        positions, wavelength = geometry
        if len(positions) != config.n_telescopes:
            raise ConfigError("geometry must list one position per telescope")
        vis = _pairwise_visibilities(source, positions, wavelength)
        per_delta = [_w_state_outcomes(config, vis)]
        schedule = (0.0,)
    else:
        if not isinstance(geometry, Baseline):
            raise TypeError("two-telescope schemes take a Baseline geometry")
        v = visibility(source, geometry)
        schedule = config.delta_schedule
        if config.kind == "direct":
            per_delta = [_direct_outcomes(config, v, d) for d in schedule]
        else:
            per_delta = [_two_telescope_outcomes(config, v, d) for d in schedule]

    n_deltas = len(schedule)
    cols: dict[str, list] = {k: [] for k in ("slot", "tel", "det", "acc", "di")}
    for chunk_idx, start in enumerate(range(0, n_slots, CHUNK_SLOTS)):
        stop = min(start + CHUNK_SLOTS, n_slots)
        chunk = np.arange(start, stop, dtype=np.int64)
        rng = rngmod.stream(seed, chunk_idx)
        for delta_idx in range(n_deltas):
            slots = chunk[(chunk % n_deltas) == delta_idx]
            if len(slots):
                _sample_block(per_delta[delta_idx], slots, delta_idx, rng, cols)

    if cols["slot"]:
        slot = np.concatenate(cols["slot"])
        order = np.argsort(slot, kind="stable")
        # Secondary order (telescope, detector) within a slot: records were
        # appended telescope-major per outcome, and each (tel, det) appears at
        # most once per slot, so a stable sort keyed by slot then tel then det
        # gives a canonical log.
        tel = np.concatenate(cols["tel"])
        det = np.concatenate(cols["det"])
        composite = slot * 100 + tel * 10 + det
        order = np.argsort(composite, kind="stable")
        log_arrays = dict(
            slot=slot[order],
            telescope=tel[order],
            detector=det[order],
            accepted=np.concatenate(cols["acc"])[order],
            delta_index=np.concatenate(cols["di"])[order],
        )
    else:
        log_arrays = dict(slot=[], telescope=[], detector=[], accepted=[],
                          delta_index=[])
    return EventLog(
        scheme=config.kind,
        n_slots=n_slots,
        deltas=schedule,
        meta={"seed": int(seed), "kind": config.kind},
        **log_arrays,
    )
