"""Exact few-mode Fock-space simulation.

States live in a truncated occupation-number basis (all occupation vectors
with total photon number <= photon_cutoff).  Pure states are sparse amplitude
maps, mixed states are dense matrices over the same basis.  The module
provides the linear-optics primitives (beam splitters, phase shifters), loss
channels, and click-pattern detection used as the ground-truth reference by
the higher-level interferometry and repeater modules.

Beam splitter convention (fixed throughout the package), acting on creation
operators of the two coupled modes::

    a+  ->  sqrt(t) a+ + i e^{+i phi} sqrt(1-t) b+
    b+  ->  i e^{-i phi} sqrt(1-t) a+ + sqrt(t) b+

so a single photon |1,0> with t = 1/2, phi = 0 becomes (|1,0> + i|0,1>)/sqrt(2).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

Occupation = tuple[int, ...]

DEFAULT_CUTOFF = 4
MAX_MODES = 8

# Numerical tolerances for density-operator validation.
TRACE_TOL = 1e-10
HERM_TOL = 1e-12
EIG_TOL = 1e-10


class EmptyPostSelectionError(ValueError):
    """Raised when a post-selection predicate accepts probability zero."""


def _check_mode(mode: int, mode_count: int) -> None:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < mode_count:
        raise ValueError(f"mode index {mode!r} out of range for {mode_count} modes")


def _check_dims(mode_count: int, photon_cutoff: int) -> None:
    if not 1 <= mode_count <= MAX_MODES:
        raise ValueError(f"mode_count must be in [1, {MAX_MODES}], got {mode_count}")
    if photon_cutoff < 0:
        raise ValueError(f"photon_cutoff must be >= 0, got {photon_cutoff}")


@lru_cache(maxsize=None)
def basis_states(mode_count: int, photon_cutoff: int) -> tuple[Occupation, ...]:
    """All occupation vectors with sum <= photon_cutoff, in lexicographic order."""
    _check_dims(mode_count, photon_cutoff)
    return tuple(
        occ
        for occ in itertools.product(range(photon_cutoff + 1), repeat=mode_count)
        if sum(occ) <= photon_cutoff
    )


@lru_cache(maxsize=None)
def basis_index(mode_count: int, photon_cutoff: int) -> dict[Occupation, int]:
    return {occ: i for i, occ in enumerate(basis_states(mode_count, photon_cutoff))}


def dimension(mode_count: int, photon_cutoff: int) -> int:
    return len(basis_states(mode_count, photon_cutoff))


@dataclass(frozen=True)
class DetectorModel:
    """Per-mode detector: binomial efficiency thinning plus dark counts.

    A dark event adds one extra count in the detection window with probability
    dark_prob_per_window, independently of the incident light.  Threshold
    (non-photon-number-resolving) detectors report click/no-click only.
    timing_jitter_sigma and coincidence_window are carried for the scheme level
    (temporal overlap and accidental-rate bookkeeping); they do not enter the
    single-window click statistics computed here.
    """

    efficiency: float = 1.0
    dark_prob_per_window: float = 0.0
    photon_number_resolving: bool = False
    timing_jitter_sigma: float = 0.0
    coincidence_window: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob_per_window < 1.0:
            raise ValueError(
                f"dark_prob_per_window must be in [0, 1), got {self.dark_prob_per_window}"
            )
        if self.timing_jitter_sigma < 0 or self.coincidence_window < 0:
            raise ValueError("timing parameters must be non-negative")

    def count_probabilities(self, n_photons: int, max_count: int) -> np.ndarray:
        """P(reported count = k | n incident photons), k = 0..max_count."""
        eta, dark = self.efficiency, self.dark_prob_per_window
        detected = np.zeros(max_count + 2)
        for j in range(n_photons + 1):
            detected[j] += math.comb(n_photons, j) * eta**j * (1.0 - eta) ** (n_photons - j)
        probs = (1.0 - dark) * detected[: max_count + 1]
        probs[1:] += dark * detected[:max_count]
        if not self.photon_number_resolving:
            clicked = probs[1:].sum() + dark * detected[max_count]
            out = np.zeros(max_count + 1)
            out[0] = probs[0]
            out[1] = clicked
            return out
        # Counts beyond max_count cannot occur: n_photons <= cutoff <= max_count - 1.
        return probs


IDEAL_DETECTOR = DetectorModel()


class FockRegister:
    """Pure state as a sparse map occupation -> complex amplitude.

    Treated as immutable: all operations return new registers.
    """

    __slots__ = ("mode_count", "photon_cutoff", "amplitudes")

    def __init__(
        self,
        mode_count: int,
        photon_cutoff: int,
        amplitudes: dict[Occupation, complex],
    ) -> None:
        _check_dims(mode_count, photon_cutoff)
        index = basis_index(mode_count, photon_cutoff)
        for occ in amplitudes:
            if occ not in index:
                raise ValueError(f"occupation {occ} outside basis "
                                 f"({mode_count} modes, cutoff {photon_cutoff})")
        self.mode_count = mode_count
        self.photon_cutoff = photon_cutoff
        self.amplitudes = dict(amplitudes)

    @classmethod
    def from_occupation(cls, occ: Occupation, photon_cutoff: int | None = None) -> "FockRegister":
        occ = tuple(int(n) for n in occ)
        cutoff = sum(occ) if photon_cutoff is None else photon_cutoff
        return cls(len(occ), cutoff, {occ: 1.0 + 0.0j})

    @classmethod
    def vacuum(cls, mode_count: int, photon_cutoff: int) -> "FockRegister":
        return cls(mode_count, photon_cutoff, {(0,) * mode_count: 1.0 + 0.0j})

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "FockRegister":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockRegister(
            self.mode_count, self.photon_cutoff,
            {k: v / n for k, v in self.amplitudes.items()},
        )

    def inner(self, other: "FockRegister") -> complex:
        """<self|other>."""
        if (self.mode_count, self.photon_cutoff) != (other.mode_count, other.photon_cutoff):
            raise ValueError("registers live in different spaces")
        return sum(
            self.amplitudes[k].conjugate() * v
            for k, v in other.amplitudes.items()
            if k in self.amplitudes
        )

    def to_vector(self) -> np.ndarray:
        index = basis_index(self.mode_count, self.photon_cutoff)
        vec = np.zeros(len(index), dtype=complex)
        for occ, amp in self.amplitudes.items():
            vec[index[occ]] = amp
        return vec

    def tensor(self, other: "FockRegister", photon_cutoff: int | None = None) -> "FockRegister":
        cutoff = self.photon_cutoff + other.photon_cutoff if photon_cutoff is None else photon_cutoff
        amps: dict[Occupation, complex] = {}
        for occ_a, amp_a in self.amplitudes.items():
            for occ_b, amp_b in other.amplitudes.items():
                occ = occ_a + occ_b
                if sum(occ) <= cutoff:
                    amps[occ] = amp_a * amp_b
        return FockRegister(self.mode_count + other.mode_count, cutoff, amps)

    def __repr__(self) -> str:
        terms = ", ".join(f"{occ}: {amp:.4g}" for occ, amp in sorted(self.amplitudes.items()))
        return f"FockRegister({self.mode_count} modes, cutoff {self.photon_cutoff}, {{{terms}}})"


class DensityOperator:
    """Mixed state as a dense matrix over the truncated occupation basis."""

    __slots__ = ("mode_count", "photon_cutoff", "matrix")

    def __init__(self, mode_count: int, photon_cutoff: int, matrix: np.ndarray) -> None:
        _check_dims(mode_count, photon_cutoff)
        dim = dimension(mode_count, photon_cutoff)
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match basis size {dim}")
        self.mode_count = mode_count
        self.photon_cutoff = photon_cutoff
        self.matrix = matrix

    @classmethod
    def from_register(cls, reg: FockRegister) -> "DensityOperator":
        vec = reg.to_vector()
        return cls(reg.mode_count, reg.photon_cutoff, np.outer(vec, vec.conjugate()))

    @classmethod
    def from_mixture(cls, pairs) -> "DensityOperator":
        """Weighted mixture of FockRegister / DensityOperator components."""
        acc = None
        for weight, state in pairs:
            rho = state if isinstance(state, DensityOperator) else DensityOperator.from_register(state)
            term = weight * rho.matrix
            if acc is None:
                acc = (rho.mode_count, rho.photon_cutoff, term.copy())
            else:
                if (rho.mode_count, rho.photon_cutoff) != acc[:2]:
                    raise ValueError("mixture components live in different spaces")
                acc[2][...] += term
        if acc is None:
            raise ValueError("empty mixture")
        return cls(*acc)

    @classmethod
    def vacuum(cls, mode_count: int, photon_cutoff: int) -> "DensityOperator":
        return cls.from_register(FockRegister.vacuum(mode_count, photon_cutoff))

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def validate(self) -> None:
        """Raise if the matrix is not a physical state (trace/hermiticity/positivity)."""
        if abs(self.trace() - 1.0) > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {abs(self.trace() - 1.0):.3e}")
        herm_dev = np.max(np.abs(self.matrix - self.matrix.conjugate().T))
        if herm_dev > HERM_TOL:
            raise ValueError(f"hermiticity violated by {herm_dev:.3e}")
        eigs = np.linalg.eigvalsh(self.matrix)
        if eigs.min() < -EIG_TOL:
            raise ValueError(f"negative eigenvalue {eigs.min():.3e}")

    def diagonal_probabilities(self) -> dict[Occupation, float]:
        states = basis_states(self.mode_count, self.photon_cutoff)
        diag = np.real(np.diag(self.matrix))
        return {occ: float(p) for occ, p in zip(states, diag)}

    def fidelity_to(self, reg: FockRegister) -> float:
        """<psi|rho|psi> for a pure target."""
        vec = reg.to_vector()
        return float(np.real(vec.conjugate() @ self.matrix @ vec))

    def tensor(self, other: "DensityOperator", photon_cutoff: int | None = None) -> "DensityOperator":
        cutoff = (
            self.photon_cutoff + other.photon_cutoff if photon_cutoff is None else photon_cutoff
        )
        modes = self.mode_count + other.mode_count
        states_a = basis_states(self.mode_count, self.photon_cutoff)
        states_b = basis_states(other.mode_count, other.photon_cutoff)
        index = basis_index(modes, cutoff)
        dim = dimension(modes, cutoff)
        out = np.zeros((dim, dim), dtype=complex)
        # Map joint occupations into the combined (total-photon-truncated) basis.
        rows_a, rows_b, rows_out = [], [], []
        for ia, occ_a in enumerate(states_a):
            for ib, occ_b in enumerate(states_b):
                occ = occ_a + occ_b
                if sum(occ) <= cutoff:
                    rows_a.append(ia)
                    rows_b.append(ib)
                    rows_out.append(index[occ])
        rows_a = np.array(rows_a)
        rows_b = np.array(rows_b)
        rows_out = np.array(rows_out)
        block = self.matrix[np.ix_(rows_a, rows_a)] * other.matrix[np.ix_(rows_b, rows_b)]
        out[np.ix_(rows_out, rows_out)] = block
        return DensityOperator(modes, cutoff, out)

    def __repr__(self) -> str:
        return (f"DensityOperator({self.mode_count} modes, cutoff {self.photon_cutoff}, "
                f"trace {self.trace():.6f})")


State = FockRegister | DensityOperator


def _bs_output_amplitudes(n_a: int, n_b: int, t: float, phi: float, cache={}) -> dict[int, complex]:
    """Amplitudes <m_a, m_b|U|n_a, n_b> keyed by m_a (m_b = n_a + n_b - m_a)."""
    key = (n_a, n_b, t, phi)
    if key in cache:
        return cache[key]
    alpha = math.sqrt(t)
    beta = 1j * np.exp(1j * phi) * math.sqrt(1.0 - t)
    gamma = 1j * np.exp(-1j * phi) * math.sqrt(1.0 - t)
    delta = math.sqrt(t)
    total = n_a + n_b
    out: dict[int, complex] = {}
    for m_a in range(total + 1):
        m_b = total - m_a
        amp = 0.0 + 0.0j
        for j in range(max(0, m_a - n_b), min(n_a, m_a) + 1):
            k = m_a - j
            amp += (
                math.comb(n_a, j)
                * math.comb(n_b, k)
                * alpha**j
                * beta ** (n_a - j)
                * gamma**k
                * delta ** (n_b - k)
            )
        amp *= math.sqrt(math.factorial(m_a) * math.factorial(m_b)
                         / (math.factorial(n_a) * math.factorial(n_b)))
        if amp != 0:
            out[m_a] = amp
    cache[key] = out
    return out


@lru_cache(maxsize=None)
def _bs_unitary(mode_count: int, photon_cutoff: int, mode_a: int, mode_b: int,
                t: float, phi: float) -> np.ndarray:
    states = basis_states(mode_count, photon_cutoff)
    index = basis_index(mode_count, photon_cutoff)
    dim = len(states)
    u = np.zeros((dim, dim), dtype=complex)
    for col, occ in enumerate(states):
        n_a, n_b = occ[mode_a], occ[mode_b]
        for m_a, amp in _bs_output_amplitudes(n_a, n_b, t, phi).items():
            new = list(occ)
            new[mode_a] = m_a
            new[mode_b] = n_a + n_b - m_a
            u[index[tuple(new)], col] = amp
    return u


def apply_beam_splitter(state: State, mode_a: int, mode_b: int,
                        transmissivity: float, phase: float = 0.0) -> State:
    """Couple mode_a and mode_b with the package beam-splitter convention.

    Total photon number is conserved, so the truncated basis is closed under
    this operation and no renormalization is needed.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    _check_mode(mode_a, state.mode_count)
    _check_mode(mode_b, state.mode_count)
    if mode_a == mode_b:
        raise ValueError("beam splitter requires two distinct modes")
    if isinstance(state, FockRegister):
        amps: dict[Occupation, complex] = {}
        for occ, amp in state.amplitudes.items():
            n_a, n_b = occ[mode_a], occ[mode_b]
            for m_a, c in _bs_output_amplitudes(n_a, n_b, transmissivity, phase).items():
                new = list(occ)
                new[mode_a] = m_a
                new[mode_b] = n_a + n_b - m_a
                key = tuple(new)
                amps[key] = amps.get(key, 0.0 + 0.0j) + amp * c
        return FockRegister(state.mode_count, state.photon_cutoff,
                            {k: v for k, v in amps.items() if v != 0})
    u = _bs_unitary(state.mode_count, state.photon_cutoff, mode_a, mode_b,
                    float(transmissivity), float(phase))
    return DensityOperator(state.mode_count, state.photon_cutoff,
                           u @ state.matrix @ u.conjugate().T)


def apply_phase(state: State, mode: int, delta: float) -> State:
    """Phase shifter: |n> on the given mode picks up exp(i n delta)."""
    _check_mode(mode, state.mode_count)
    states = basis_states(state.mode_count, state.photon_cutoff)
    if isinstance(state, FockRegister):
        return FockRegister(
            state.mode_count, state.photon_cutoff,
            {occ: amp * np.exp(1j * occ[mode] * delta) for occ, amp in state.amplitudes.items()},
        )
    phases = np.exp(1j * delta * np.array([occ[mode] for occ in states]))
    return DensityOperator(state.mode_count, state.photon_cutoff,
                           state.matrix * np.outer(phases, phases.conjugate()))


def apply_loss(rho: DensityOperator, mode: int, transmission: float) -> DensityOperator:
    """Pure loss on one mode, Kraus form of a vacuum-ancilla beam splitter.

    K_k = sum_n sqrt(C(n, k) eta^(n-k) (1-eta)^k) |n-k><n|  on the lossy mode.
    """
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission must be in [0, 1], got {transmission}")
    if not isinstance(rho, DensityOperator):
        raise TypeError("apply_loss acts on DensityOperator (loss produces mixed states)")
    _check_mode(mode, rho.mode_count)
    eta = float(transmission)
    states = basis_states(rho.mode_count, rho.photon_cutoff)
    index = basis_index(rho.mode_count, rho.photon_cutoff)
    dim = len(states)
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(rho.photon_cutoff + 1):
        rows, cols, vals = [], [], []
        for i, occ in enumerate(states):
            n = occ[mode]
            if n < k:
                continue
            new = list(occ)
            new[mode] = n - k
            rows.append(index[tuple(new)])
            cols.append(i)
            vals.append(math.sqrt(math.comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k))
        if not rows:
            continue
        kraus = np.zeros((dim, dim))
        kraus[rows, cols] = vals
        out += kraus @ rho.matrix @ kraus.T
    return DensityOperator(rho.mode_count, rho.photon_cutoff, out)


def partial_trace(rho: DensityOperator, keep_modes: tuple[int, ...]) -> DensityOperator:
    """Trace out all modes not in keep_modes (order of keep_modes is preserved)."""
    keep = tuple(keep_modes)
    for m in keep:
        _check_mode(m, rho.mode_count)
    if len(set(keep)) != len(keep) or not keep:
        raise ValueError("keep_modes must be a non-empty set of distinct modes")
    traced = tuple(m for m in range(rho.mode_count) if m not in keep)
    states = basis_states(rho.mode_count, rho.photon_cutoff)
    new_index = basis_index(len(keep), rho.photon_cutoff)
    dim_new = dimension(len(keep), rho.photon_cutoff)
    out = np.zeros((dim_new, dim_new), dtype=complex)
    # Group basis indices by the traced-mode occupation; each group contributes
    # a sub-block mapped onto the reduced basis.
    groups: dict[Occupation, list[tuple[int, int]]] = {}
    for i, occ in enumerate(states):
        env = tuple(occ[m] for m in traced)
        sys = tuple(occ[m] for m in keep)
        groups.setdefault(env, []).append((new_index[sys], i))
    for pairs in groups.values():
        new_rows = np.array([p[0] for p in pairs])
        old_rows = np.array([p[1] for p in pairs])
        out[np.ix_(new_rows, new_rows)] += rho.matrix[np.ix_(old_rows, old_rows)]
    return DensityOperator(len(keep), rho.photon_cutoff, out)


def condition_on_counts(rho: DensityOperator, counts: dict[int, int]
                        ) -> tuple[float, DensityOperator | None]:
    """Project the given modes onto exact photon counts and trace them out.

    Returns (probability, normalized conditional state on the remaining modes).
    The conditional state is None when the probability is zero.
    """
    for m in counts:
        _check_mode(m, rho.mode_count)
    keep = tuple(m for m in range(rho.mode_count) if m not in counts)
    if not keep:
        raise ValueError("conditioning on all modes leaves no state")
    states = basis_states(rho.mode_count, rho.photon_cutoff)
    matched = [i for i, occ in enumerate(states)
               if all(occ[m] == c for m, c in counts.items())]
    sel = np.array(matched)
    prob = float(np.real(rho.matrix[sel, sel].sum()))
    if prob <= 0.0:
        return 0.0, None
    new_index = basis_index(len(keep), rho.photon_cutoff)
    dim_new = dimension(len(keep), rho.photon_cutoff)
    out = np.zeros((dim_new, dim_new), dtype=complex)
    new_rows = np.array([new_index[tuple(states[i][m] for m in keep)] for i in matched])
    out[np.ix_(new_rows, new_rows)] = rho.matrix[np.ix_(sel, sel)]
    return prob, DensityOperator(len(keep), rho.photon_cutoff, out / prob)


def _detector_list(state: State, detectors) -> list[DetectorModel]:
    if detectors is None:
        detectors = IDEAL_DETECTOR
    if isinstance(detectors, DetectorModel):
        return [detectors] * state.mode_count
    detectors = list(detectors)
    if len(detectors) != state.mode_count:
        raise ValueError(f"need one detector per mode ({state.mode_count}), got {len(detectors)}")
    return detectors


def outcome_distribution(state: State, detectors=None) -> dict[Occupation, float]:
    """Exact probability table over click patterns, one detector per mode.

    Threshold detectors report 0/1 per mode; photon-number-resolving ones
    report counts (light counts possibly +1 from a dark event).  The table
    sums to 1 up to floating-point roundoff.
    """
    dets = _detector_list(state, detectors)
    if isinstance(state, FockRegister):
        diag = {occ: abs(a) ** 2 for occ, a in state.amplitudes.items()}
    else:
        diag = state.diagonal_probabilities()
    max_count = state.photon_cutoff + 1  # light counts + at most one dark count
    # Per-mode reported-count tables, indexed by incident photon number.
    tables = [
        [det.count_probabilities(n, max_count) for n in range(state.photon_cutoff + 1)]
        for det in dets
    ]
    dist: dict[Occupation, float] = {}
    for occ, p in diag.items():
        if p <= 0.0:
            continue
        partial: dict[Occupation, float] = {(): p}
        for mode, n in enumerate(occ):
            row = tables[mode][n]
            nxt: dict[Occupation, float] = {}
            for prefix, w in partial.items():
                for count, q in enumerate(row):
                    if q > 0.0:
                        key = prefix + (count,)
                        nxt[key] = nxt.get(key, 0.0) + w * q
            partial = nxt
        for pattern, w in partial.items():
            dist[pattern] = dist.get(pattern, 0.0) + w
    return dist


def post_select(distribution: dict[Occupation, float], predicate
                ) -> tuple[dict[Occupation, float], float]:
    """Condition a click-pattern table on a predicate over patterns.

    Returns (renormalized accepted table, acceptance probability).
    """
    accepted = {k: v for k, v in distribution.items() if predicate(k)}
    acceptance = sum(accepted.values())
    if acceptance <= 0.0:
        raise EmptyPostSelectionError("post-selection accepts probability zero")
    return {k: v / acceptance for k, v in accepted.items()}, acceptance


def sample_outcome(state: State, detectors, rng: np.random.Generator) -> Occupation:
    """Draw one click pattern from the exact outcome distribution."""
    dist = outcome_distribution(state, detectors)
    patterns = list(dist.keys())
    probs = np.array([dist[p] for p in patterns])
    probs = probs / probs.sum()
    return patterns[rng.choice(len(patterns), p=probs)]
