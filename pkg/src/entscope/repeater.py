"""Single-rail entanglement distribution: links, distillation, swapping, chains.

The states flowing through a repeater chain live in a three-parameter family
(`EntangledPairState`): a vacuum weight, a balanced one-photon sector with
coherence c and phase psi (the same shape as the interferometric arrival
state, with c e^{i psi} in place of the visibility), and a double-excitation
|11> weight from imperfect pair sources.  Loss and dephasing keep the family
closed; so do the distillation and swapping circuits below for states with no
double excitation.  Every protocol step is realized as an exact circuit on
the Fock simulator and then read back into the family, so the parameterized
bookkeeping can always be cross-checked against the raw density matrix.

Conventions: fidelity is always with respect to (|01> + |10>)/sqrt(2);
protocol heralds condition on exactly one photon detected across the two
monitored outputs (photon-number-resolving monitors), and distillation
additionally drops herald events that leave the kept modes empty (see
`sscg_distill`); time is measured in attempt slots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .fock import (
    DensityOperator,
    FockRegister,
    apply_beam_splitter,
    apply_phase,
    basis_index,
    condition_on_counts,
    dimension,
)

DEFAULT_SPLIT_LOW = 0.15
DEFAULT_SPLIT_HIGH = 0.85
FORM_TOL = 1e-12

TARGET_PAIR = FockRegister(2, 2, {(0, 1): 1.0 / math.sqrt(2.0),
                                  (1, 0): 1.0 / math.sqrt(2.0)})


@dataclass(frozen=True)
class LinkModel:
    """One physical channel between neighbouring nodes.

    transmission() = 10^(-attenuation_db_per_km * length_km / 10) * extra;
    `extra` covers everything that is not fibre attenuation (coupling,
    pointing; 0.01 for the satellite preset).  phase_noise_sigma is the
    standard deviation of the relative-phase kick per transit, in radians.
    attempt_rate is generation attempts per time slot.
    """

    length_km: float = 0.0
    attenuation_db_per_km: float = 0.2
    extra_transmission: float = 1.0
    phase_noise_sigma: float = 0.0
    attempt_rate: float = 1.0

    def __post_init__(self) -> None:
        if self.length_km < 0:
            raise ConfigError(f"length_km must be >= 0, got {self.length_km}")
        if self.attenuation_db_per_km < 0:
            raise ConfigError("attenuation_db_per_km must be >= 0, "
                              f"got {self.attenuation_db_per_km}")
        if not 0.0 < self.extra_transmission <= 1.0:
            raise ConfigError("extra_transmission must be in (0, 1], "
                              f"got {self.extra_transmission}")
        if self.phase_noise_sigma < 0:
            raise ConfigError("phase_noise_sigma must be >= 0")
        if self.attempt_rate <= 0:
            raise ConfigError("attempt_rate must be positive")

    def transmission(self) -> float:
        return 10.0 ** (-self.attenuation_db_per_km * self.length_km / 10.0) \
            * self.extra_transmission

    @classmethod
    def satellite(cls, phase_noise_sigma: float = 0.0) -> "LinkModel":
        """Free-space downlink preset: overall transmission 0.01."""
        return cls(length_km=0.0, attenuation_db_per_km=0.0,
                   extra_transmission=0.01, phase_noise_sigma=phase_noise_sigma)


@dataclass(frozen=True)
class EntangledPairState:
    """Two-mode single-rail pair in the vacuum/one-photon/double-excitation family.

    The one-photon sector is (|01><01| + |10><10| + c e^{i psi}|10><01| + h.c.)/2
    scaled by one_photon_weight; the double excitation is |11><11|.
    """

    vacuum_weight: float = 0.0
    one_photon_weight: float = 1.0
    coherence: float = 1.0
    phase: float = 0.0
    two_photon_weight: float = 0.0

    def __post_init__(self) -> None:
        w = (self.vacuum_weight, self.one_photon_weight, self.two_photon_weight)
        if min(w) < -FORM_TOL:
            raise ValueError(f"weights must be non-negative, got {w}")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(w)}")
        if not -FORM_TOL <= self.coherence <= 1.0 + FORM_TOL:
            raise ValueError(f"coherence must be in [0, 1], got {self.coherence}")

    @classmethod
    def perfect(cls) -> "EntangledPairState":
        return cls()

    @property
    def visibility(self) -> complex:
        return self.coherence * np.exp(1j * self.phase)

    def fidelity(self) -> float:
        """Overlap with (|01> + |10>)/sqrt(2)."""
        return self.one_photon_weight * (1.0 + self.coherence * math.cos(self.phase)) / 2.0

    def to_density(self, photon_cutoff: int = 2) -> DensityOperator:
        if photon_cutoff < 2:
            raise ValueError("photon_cutoff must be >= 2 to hold the |11> sector")
        idx = basis_index(2, photon_cutoff)
        mat = np.zeros((dimension(2, photon_cutoff),) * 2, dtype=complex)
        mat[idx[(0, 0)], idx[(0, 0)]] = self.vacuum_weight
        half = self.one_photon_weight / 2.0
        mat[idx[(0, 1)], idx[(0, 1)]] = half
        mat[idx[(1, 0)], idx[(1, 0)]] = half
        off = half * self.coherence * np.exp(1j * self.phase)
        mat[idx[(1, 0)], idx[(0, 1)]] = off
        mat[idx[(0, 1)], idx[(1, 0)]] = np.conj(off)
        mat[idx[(1, 1)], idx[(1, 1)]] = self.two_photon_weight
        return DensityOperator(2, photon_cutoff, mat)

    @classmethod
    def from_density(cls, rho: DensityOperator, atol: float = FORM_TOL
                     ) -> "EntangledPairState":
        """Read a density matrix back into the family; off-form entries must
        be below atol (in particular the one-photon sector must be balanced).
        """
        idx = basis_index(2, rho.photon_cutoff)
        m = rho.matrix
        w0 = float(m[idx[(0, 0)], idx[(0, 0)]].real)
        p01 = float(m[idx[(0, 1)], idx[(0, 1)]].real)
        p10 = float(m[idx[(1, 0)], idx[(1, 0)]].real)
        w2 = float(m[idx[(1, 1)], idx[(1, 1)]].real) if (1, 1) in idx else 0.0
        off = complex(m[idx[(1, 0)], idx[(0, 1)]])
        keep = {(idx[a], idx[b]) for a, b in [
            ((0, 0), (0, 0)), ((0, 1), (0, 1)), ((1, 0), (1, 0)),
            ((1, 0), (0, 1)), ((0, 1), (1, 0))]}
        if (1, 1) in idx:
            keep.add((idx[(1, 1)], idx[(1, 1)]))
        mask = np.ones_like(m, dtype=bool)
        for i, j in keep:
            mask[i, j] = False
        stray = float(np.abs(m[mask]).max()) if mask.any() else 0.0
        if stray > atol:
            raise ValueError(f"density matrix is not of pair-family form "
                             f"(off-form entry {stray:.3e} > {atol:.0e})")
        if abs(p01 - p10) > atol:
            raise ValueError(f"one-photon sector unbalanced by {abs(p01 - p10):.3e}")
        w1 = p01 + p10
        if w1 > atol:
            c = min(abs(off) / (w1 / 2.0), 1.0)
            psi = float(np.angle(off))
        else:
            w1, c, psi = 0.0, 0.0, 0.0
        total = w0 + w1 + w2
        return cls(w0 / total, w1 / total, c, psi, w2 / total)


def pair_family_projection(rho: DensityOperator, atol: float = 1e-9
                           ) -> tuple[EntangledPairState, float]:
    """Project onto the at-most-one-photon-per-mode subspace and read back.

    Returns (state, leakage).  Leakage counts the discarded probability in
    higher occupations plus the trace-distance cost of rebalancing an uneven
    one-photon sector, so a zero leakage means the input was exactly of
    family form.  Used when double excitations or asymmetric splitter
    settings push a protocol output outside the exact family.
    """
    idx = basis_index(2, rho.photon_cutoff)
    inside = [idx[occ] for occ in ((0, 0), (0, 1), (1, 0), (1, 1)) if occ in idx]
    sel = np.ix_(inside, inside)
    kept = np.zeros_like(rho.matrix)
    kept[sel] = rho.matrix[sel]
    weight = float(np.real(np.trace(kept)))
    leakage = max(rho.trace() - weight, 0.0)
    if weight <= 1e-15:
        return EntangledPairState(1.0, 0.0, 0.0, 0.0), leakage
    i01, i10 = idx[(0, 1)], idx[(1, 0)]
    p01 = float(kept[i01, i01].real)
    p10 = float(kept[i10, i10].real)
    if abs(p01 - p10) > atol:
        half = (p01 + p10) / 2.0
        kept[i01, i01] = half
        kept[i10, i10] = half
        leakage += abs(p01 - p10) / 2.0
        # Rebalancing can strand an off-diagonal above sqrt(p01' p10');
        # from_density clamps the read-back coherence at 1.
    reduced = DensityOperator(2, rho.photon_cutoff, kept / weight)
    # Coherences between the kept sector and discarded occupations are gone;
    # within the kept sector the projection is exact.
    return EntangledPairState.from_density(reduced, atol=atol), leakage


# ---------------------------------------------------------------------------
# Channel steps
# ---------------------------------------------------------------------------

def transmit_pair(pair: EntangledPairState, link: LinkModel,
                  rng: np.random.Generator | None = None) -> EntangledPairState:
    """Send both arms of a pair through the link (loss + phase noise).

    Each arm independently keeps its photon with probability
    link.transmission().  In analytic mode (rng None) the phase noise
    dephases the coherence by exp(-sigma^2/2); in Monte Carlo mode a single
    relative-phase kick is drawn instead and the coherence is untouched.
    Asymmetric per-arm loss leaves the balanced family and is not modeled.
    """
    eta = link.transmission()
    w1, w2 = pair.one_photon_weight, pair.two_photon_weight
    w1_new = eta * w1 + 2.0 * eta * (1.0 - eta) * w2
    w2_new = eta * eta * w2
    w0_new = 1.0 - w1_new - w2_new
    denom = w1 + 2.0 * (1.0 - eta) * w2
    c = pair.coherence * (w1 / denom) if denom > 0 else 0.0
    psi = pair.phase
    sigma = link.phase_noise_sigma
    if rng is None:
        c *= math.exp(-sigma * sigma / 2.0)
    elif sigma > 0:
        psi = float(psi + rng.normal(0.0, sigma))
    if w1_new <= FORM_TOL:
        c, psi = 0.0, 0.0
    return EntangledPairState(w0_new, w1_new, c, psi, w2_new)


def heralded_generate(link: LinkModel | None = None, q: float | None = None,
                      rng: np.random.Generator | None = None) -> float:
    """Attempts until a heralded success; geometric with per-attempt rate q.

    q defaults to the link transmission.  With rng the sample is drawn;
    without, the expected value 1/q is returned.
    """
    if q is None:
        if link is None:
            raise ValueError("need a link or an explicit success probability q")
        q = link.transmission()
    if not 0.0 < q <= 1.0:
        raise ValueError(f"success probability must be in (0, 1], got {q}")
    if rng is None:
        return 1.0 / q
    return float(rng.geometric(q))


def heralded_pair_state(link: LinkModel,
                        double_excitation_weight: float = 0.0) -> EntangledPairState:
    """State delivered by a successful heralded generation over the link.

    Loss is absorbed by the retry-until-herald loop, so only the link's phase
    noise (as analytic dephasing) and the source's double-excitation weight
    degrade the delivered pair.
    """
    if not 0.0 <= double_excitation_weight < 1.0:
        raise ConfigError("double_excitation_weight must be in [0, 1)")
    c = math.exp(-link.phase_noise_sigma ** 2 / 2.0)
    return EntangledPairState(0.0, 1.0 - double_excitation_weight, c, 0.0,
                              double_excitation_weight)


# ---------------------------------------------------------------------------
# Distillation and swapping (exact circuits)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolResult:
    """Success probability and heralded output of a two-pair protocol step.

    output is the family form (projected if double excitations leak out of
    it; `leakage` records the discarded weight).  output_density is the exact
    unprojected conditional state for oracle comparisons.  output is None
    when the step cannot succeed.
    """

    success_probability: float
    output: EntangledPairState | None
    output_density: DensityOperator | None = None
    leakage: float = 0.0


def _monitored_heralds(rho: DensityOperator, monitor_a: int, monitor_b: int,
                       correction: float = 0.0, correct_mode: int = 0,
                       ) -> tuple[float, DensityOperator | None]:
    """Condition on exactly one photon detected across two monitored modes.

    Mixes the two single-photon heralds.  For the herald where monitor_b
    fired, the remaining two modes get a phase `correction` on
    `correct_mode` relative to the monitor_a branch.
    """
    cutoff = rho.photon_cutoff
    total = 0.0
    acc = None
    for counts, flip in (({monitor_a: 1, monitor_b: 0}, False),
                         ({monitor_a: 0, monitor_b: 1}, True)):
        prob, cond = condition_on_counts(rho, counts)
        if cond is None:
            continue
        if flip and correction:
            cond = apply_phase(cond, correct_mode, correction)
        total += prob
        acc = cond.matrix * prob if acc is None else acc + cond.matrix * prob
    if acc is None:
        return 0.0, None
    return total, DensityOperator(2, cutoff, acc / total)


def sscg_distill(a: EntangledPairState, b: EntangledPairState,
                 t_low: float = DEFAULT_SPLIT_LOW,
                 t_high: float = DEFAULT_SPLIT_HIGH,
                 photon_cutoff: int = 4) -> ProtocolResult:
    """One round of unbalanced-splitter distillation consuming pairs a and b.

    The two left-side modes meet on a splitter of transmissivity t_low, the
    two right-side modes on one of t_high, and one output of each splitter is
    monitored.  Success keeps the state iff exactly one photon is detected at
    the monitors and the kept modes are not left empty; two detections mean
    no photons remain and the output is discarded.  The kept modes are a's
    original pair of modes.

    A lone input photon (vacuum-mixed inputs) can itself trigger the single
    click, leaving nothing behind.  Those events are excluded from the
    success statistics here: in this single-rail setting every downstream
    consumer of the pair post-selects on detecting the photon, so an emptied
    register costs rate, not fidelity.  With them included no splitter choice
    could ever raise the fidelity of a vacuum-mixed input (the lone-photon
    click probability is exactly 1/2, independent of the splitters).

    The family reprojection is exact when t_high = 1 - t_low (the defaults;
    the reflection symmetry rebalances the mixed one-photon output) and the
    inputs carry no double excitation.
    """
    if not (0.0 <= t_low <= 1.0 and 0.0 <= t_high <= 1.0):
        raise ValueError("splitter transmissivities must be in [0, 1]")
    rho = a.to_density(2).tensor(b.to_density(2), photon_cutoff=photon_cutoff)
    # The relative pi between the two splitters plus the pi feed-forward on
    # the left-monitor herald are calibration choices under the package
    # splitter convention; together they make a left-monitor and a
    # right-monitor success produce the same output state for perfect
    # inputs (checked against the circuit in the tests).
    rho = apply_beam_splitter(rho, 0, 2, t_low)
    rho = apply_beam_splitter(rho, 1, 3, t_high, phase=math.pi)
    prob, cond = _monitored_heralds(rho, 3, 2, correction=math.pi, correct_mode=0)
    if cond is None:
        return ProtocolResult(0.0, None)
    vacuum_part = float(cond.matrix[0, 0].real)
    kept = 1.0 - vacuum_part
    if kept <= 1e-15:
        return ProtocolResult(0.0, None)
    matrix = cond.matrix.copy()
    matrix[0, 0] = 0.0
    cond = DensityOperator(2, cond.photon_cutoff, matrix / kept)
    prob *= kept
    if a.two_photon_weight == 0.0 and b.two_photon_weight == 0.0:
        try:
            return ProtocolResult(prob, EntangledPairState.from_density(cond), cond)
        except ValueError:
            pass
    pair, leakage = pair_family_projection(cond)
    return ProtocolResult(prob, pair, cond, leakage)


def entanglement_swap(a: EntangledPairState, b: EntangledPairState,
                      photon_cutoff: int = 4) -> ProtocolResult:
    """Linear-optics swap: pairs (1,2) and (2,3) become a pair (1,3).

    The two middle-node modes interfere on a balanced splitter and both
    outputs are monitored; exactly one click heralds success (probability 1/2
    for ideal inputs).  Each herald imposes a known +-pi/2 phase on the
    surviving pair, which is corrected here, so the output phase is
    psi_a + psi_b.
    """
    rho = a.to_density(2).tensor(b.to_density(2), photon_cutoff=photon_cutoff)
    rho = apply_beam_splitter(rho, 1, 2, 0.5)
    # Herald on monitor 1 leaves the outer pair with an extra +pi/2 on the
    # outer-left arm; the monitor-2 branch gets -pi/2.  Both are undone below
    # (the monitor-1 branch via the base correction, the monitor-2 branch via
    # the relative correction of +pi).
    prob, cond = _monitored_heralds(rho, 1, 2, correction=math.pi, correct_mode=0)
    if cond is None:
        return ProtocolResult(0.0, None)
    cond = apply_phase(cond, 0, -math.pi / 2.0)
    return ProtocolResult(prob, EntangledPairState.from_density(cond), cond)


def optimize_distill_splitter(a: EntangledPairState, b: EntangledPairState,
                              steps: int = 199) -> tuple[float, ProtocolResult]:
    """Best t_low (with t_high = 1 - t_low) for output fidelity; golden-section
    refinement after a coarse scan."""
    def fid(t: float) -> float:
        res = sscg_distill(a, b, t, 1.0 - t)
        return res.output.fidelity() if res.output is not None else 0.0

    grid = np.linspace(0.005, 0.995, steps)
    best = grid[int(np.argmax([fid(t) for t in grid]))]
    lo, hi = max(best - 0.01, 0.0), min(best + 0.01, 1.0)
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = hi - ratio * (hi - lo), lo + ratio * (hi - lo)
    f1, f2 = fid(x1), fid(x2)
    for _ in range(40):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + ratio * (hi - lo)
            f2 = fid(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - ratio * (hi - lo)
            f1 = fid(x1)
    t_best = (lo + hi) / 2.0
    return float(t_best), sscg_distill(a, b, t_best, 1.0 - t_best)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainPolicy:
    """Scheduling and distillation policy for a repeater chain.

    distill_rounds[k] = rounds applied at nesting level k (level 0 = freshly
    generated segment pairs, level k = pairs produced by the k-th swap
    layer); missing levels default to 0.  with_memory selects the
    generate-both-halves-then-swap schedule; the memoryless alternative
    requires everything to succeed in one slot and cannot distill.
    double_excitation_weight is carried by every generated pair.
    """

    distill_rounds: tuple[int, ...] = ()
    with_memory: bool = True
    double_excitation_weight: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "distill_rounds",
                           tuple(int(r) for r in self.distill_rounds))
        if any(r < 0 for r in self.distill_rounds):
            raise ConfigError("distill_rounds entries must be >= 0")
        if not self.with_memory and any(self.distill_rounds):
            raise ConfigError("distillation requires with_memory=True "
                              "(pairs must wait for each other)")
        if not 0.0 <= self.double_excitation_weight < 1.0:
            raise ConfigError("double_excitation_weight must be in [0, 1)")

    def rounds_at(self, level: int) -> int:
        return self.distill_rounds[level] if level < len(self.distill_rounds) else 0


@dataclass(frozen=True)
class ChainResult:
    rate: float
    fidelity: float
    distill_rounds_used: int
    final_state: EntangledPairState
    expected_slots: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must be in [0, 1], got {self.rate}")
        if not -1e-12 <= self.fidelity <= 1.0 + 1e-12:
            raise ValueError(f"fidelity must be in [0, 1], got {self.fidelity}")


def _expected_max_geometric(e1: float, e2: float) -> float:
    """E[max] of two independent geometrics given their means.

    Exact for geometric segment times; deeper levels feed their expected
    times back in as if geometric, which is the documented approximation of
    the analytic schedule model.
    """
    q1, q2 = 1.0 / e1, 1.0 / e2
    return e1 + e2 - 1.0 / (q1 + q2 - q1 * q2)


def _distill_schedule(state: EntangledPairState, slots: float, rounds: int
                      ) -> tuple[EntangledPairState, float, int]:
    used = 0
    for _ in range(rounds):
        step = sscg_distill(state, state)
        if step.output is None or step.success_probability <= 0.0:
            break
        slots = _expected_max_geometric(slots, slots) / step.success_probability
        state = step.output
        used += 1
    return state, slots, used


def _chain_analytic(links: list[LinkModel], policy: ChainPolicy
                    ) -> tuple[EntangledPairState, float, int, float]:
    """Returns (state, expected slots, rounds used, memoryless per-slot prob)."""

    def leaf(link: LinkModel):
        state = heralded_pair_state(link, policy.double_excitation_weight)
        q = link.transmission()
        slots = 1.0 / (q * link.attempt_rate)
        state, slots, used = _distill_schedule(state, slots, policy.rounds_at(0))
        return state, slots, used, q * link.attempt_rate

    def node(segment_links: list[LinkModel], level_of_parent: int):
        if len(segment_links) == 1:
            return leaf(segment_links[0])
        mid = (len(segment_links) + 1) // 2
        left = node(segment_links[:mid], level_of_parent + 1)
        right = node(segment_links[mid:], level_of_parent + 1)
        swap = entanglement_swap(left[0], right[0])
        if swap.output is None or swap.success_probability <= 0.0:
            raise ConfigError("chain cannot produce entanglement (swap never succeeds)")
        slots = _expected_max_geometric(left[1], right[1]) / swap.success_probability
        prob_slot = left[3] * right[3] * swap.success_probability
        state = swap.output
        level = _depth_of(len(segment_links))
        state, slots, used = _distill_schedule(state, slots, policy.rounds_at(level))
        return state, slots, left[2] + right[2] + used, prob_slot

    state, slots, used, prob_slot = node(links, 0)
    return state, slots, used, prob_slot


def _depth_of(n_segments: int) -> int:
    return max(math.ceil(math.log2(n_segments)), 0) if n_segments > 1 else 0


def chain_simulate(segments: int, links: LinkModel | list[LinkModel],
                   policy: ChainPolicy | None = None,
                   rng: np.random.Generator | None = None,
                   n_trials: int = 1000) -> ChainResult:
    """End-to-end rate and fidelity of a repeater chain.

    Analytic mode (rng None): with_memory uses the nested schedule with the
    geometric-composition approximation for expected times (exact for a
    single swap level); memoryless mode is exact (all segments and swaps must
    succeed within one slot).  Monte Carlo mode samples the schedule's
    delivery times over n_trials and reports rate = trials / total slots;
    the state and fidelity always come from the analytic ensemble average.
    """
    if segments < 1:
        raise ConfigError(f"segments must be >= 1, got {segments}")
    link_list = list(links) if isinstance(links, (list, tuple)) else [links] * segments
    if len(link_list) != segments:
        raise ConfigError(f"need one link per segment ({segments}), "
                          f"got {len(link_list)}")
    policy = policy or ChainPolicy()
    state, slots, used, prob_slot = _chain_analytic(link_list, policy)
    if not policy.with_memory:
        slots = 1.0 / prob_slot
    if rng is not None:
        total = _mc_total_slots(link_list, policy, rng, n_trials, prob_slot)
        slots = total / n_trials
    return ChainResult(rate=min(1.0 / slots, 1.0), fidelity=state.fidelity(),
                       distill_rounds_used=used, final_state=state,
                       expected_slots=slots)


def _mc_total_slots(links: list[LinkModel], policy: ChainPolicy,
                    rng: np.random.Generator, n_trials: int,
                    prob_slot: float) -> float:
    if not policy.with_memory:
        return float(rng.geometric(prob_slot, size=n_trials).sum())

    # Success probabilities of each protocol step depend only on the analytic
    # states, which are deterministic; precompute them per tree node.
    def build(segment_links: list[LinkModel]):
        if len(segment_links) == 1:
            link = segment_links[0]
            q = link.transmission()
            rate = link.attempt_rate
            base_state = heralded_pair_state(link, policy.double_excitation_weight)

            def raw() -> float:
                return float(rng.geometric(q)) / rate
            return _attach_distill(raw, base_state, policy.rounds_at(0), rng)
        mid = (len(segment_links) + 1) // 2
        left_state, left_sample = build(segment_links[:mid])
        right_state, right_sample = build(segment_links[mid:])
        swap = entanglement_swap(left_state, right_state)
        p_swap = swap.success_probability

        def sample() -> float:
            t = max(left_sample(), right_sample())
            while rng.random() >= p_swap:
                t += max(left_sample(), right_sample())
            return t
        return _attach_distill(sample, swap.output,
                               policy.rounds_at(_depth_of(len(segment_links))), rng)

    _, sampler = build(links)
    return float(sum(sampler() for _ in range(n_trials)))


def _attach_distill(sample, state: EntangledPairState, rounds: int,
                    rng: np.random.Generator):
    for _ in range(rounds):
        step = sscg_distill(state, state)
        if step.output is None or step.success_probability <= 0.0:
            break
        inner, p_d = sample, step.success_probability

        def rounded(inner=inner, p_d=p_d) -> float:
            t = max(inner(), inner())
            while rng.random() >= p_d:
                t += max(inner(), inner())
            return t
        sample = rounded
        state = step.output
    return state, sample


def figure_of_merit(rate: float, efficiency: float, bandwidth_nm: float) -> float:
    """Scalar score rate * efficiency * bandwidth (nm); spectral coincidence
    budget feeding the sensitivity calculator."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError(f"efficiency must be in [0, 1], got {efficiency}")
    if bandwidth_nm < 0:
        raise ValueError(f"bandwidth_nm must be >= 0, got {bandwidth_nm}")
    return rate * efficiency * bandwidth_nm
