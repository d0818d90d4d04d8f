"""Turn event logs back into science: visibilities, closure phases, images.

The fringe model throughout is correlated-fraction(delta) =
[1 + Re(V e^{-i delta})]/2, which is linear in (Re V, Im V), so the
visibility fit is an exact linear least-squares problem.  The fitted
amplitude is deliberately NOT clipped to [0, 1]: clipping would bias
averages of repeated fits, and the error bars carry the information
instead.

Image reconstruction is a plain inverse discrete Fourier transform of
gridded visibility samples (a dirty image with zero-filling, no
deconvolution), matching the forward convention of `sky.visibility`:
V(b_k) = sum_p I_p exp(+2 pi i k (p - n//2) / n) for baselines
b_k = k * wavelength / (n * pixel_scale).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import LowStatisticsError
from .eventlog import EventLog, fringe_counts
from .sky import Baseline

MIN_EVENTS_PER_DELTA = 10
_QUADRATURE_TOL = 1e-6
_GRID_TOL = 1e-6


@dataclass(frozen=True)
class FringeFit:
    """Result of a visibility fit over a delta sweep.

    amplitude_error and phase_error are one-standard-error sizes on |V| and
    arg V propagated from binomial counting noise; table rows are
    (delta, correlated, accepted) per schedule entry.
    """

    visibility: complex
    amplitude_error: float
    phase_error: float
    accepted: int
    table: tuple[tuple[float, int, int], ...]

    @property
    def amplitude(self) -> float:
        return abs(self.visibility)

    @property
    def phase(self) -> float:
        return cmath.phase(self.visibility)


def _has_quadrature_pair(deltas: np.ndarray) -> bool:
    for i in range(len(deltas)):
        for j in range(len(deltas)):
            gap = (deltas[j] - deltas[i]) % (2.0 * math.pi)
            if abs(gap - math.pi / 2.0) < _QUADRATURE_TOL:
                return True
    return False


def estimate_visibility(log: EventLog) -> FringeFit:
    """Least-squares visibility from the per-delta correlated fractions.

    Requires at least two distinct delta values including a quadrature pair
    (delta, delta + pi/2); otherwise Re V and Im V are not separable.
    Raises LowStatisticsError when any schedule entry has fewer than
    MIN_EVENTS_PER_DELTA accepted events.
    """
    deltas, successes, totals = fringe_counts(log)
    if len(np.unique(np.round(deltas, 12))) < 2:
        raise ValueError("need at least two distinct delta values")
    if not _has_quadrature_pair(np.asarray(deltas, dtype=float)):
        raise ValueError("delta schedule must contain a quadrature pair "
                         "(delta, delta + pi/2)")
    if np.any(totals < MIN_EVENTS_PER_DELTA):
        worst = int(np.argmin(totals))
        raise LowStatisticsError(
            f"only {int(totals[worst])} accepted events at delta="
            f"{float(deltas[worst]):.4f}; need >= {MIN_EVENTS_PER_DELTA}")

    fractions = successes / totals
    y = 2.0 * fractions - 1.0                       # Re(V e^{-i delta})
    design = np.column_stack([np.cos(deltas), np.sin(deltas)])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    re_v, im_v = float(coeffs[0]), float(coeffs[1])

    # Binomial variance of y = 2f - 1, with a rule-of-succession floor so
    # observed fractions of exactly 0 or 1 keep a nonzero variance.
    f_floor = (successes + 1.0) / (totals + 2.0)
    var_y = 4.0 * f_floor * (1.0 - f_floor) / totals
    normal = np.linalg.inv(design.T @ design)
    cov = normal @ (design.T * var_y) @ design @ normal

    amp = math.hypot(re_v, im_v)
    if amp > 1e-12:
        g_amp = np.array([re_v, im_v]) / amp
        g_phase = np.array([-im_v, re_v]) / amp ** 2
        amp_err = float(np.sqrt(g_amp @ cov @ g_amp))
        phase_err = float(np.sqrt(g_phase @ cov @ g_phase))
    else:
        amp_err = float(np.sqrt(0.5 * (cov[0, 0] + cov[1, 1])))
        phase_err = math.pi
    table = tuple((float(d), int(s), int(t))
                  for d, s, t in zip(deltas, successes, totals))
    return FringeFit(complex(re_v, im_v), amp_err, phase_err,
                     int(totals.sum()), table)


def closure_phase(v_ij: complex, v_jk: complex, v_ki: complex) -> float:
    """arg(V_ij V_jk V_ki) wrapped to (-pi, pi].

    Immune to per-telescope phase errors: a phase e_i on telescope i enters
    as V_ij -> V_ij e^{i(e_i - e_j)} and cancels around the triangle.
    """
    for name, v in (("v_ij", v_ij), ("v_jk", v_jk), ("v_ki", v_ki)):
        if abs(v) == 0.0:
            raise ValueError(f"{name} has zero amplitude; closure phase undefined")
    angle = cmath.phase(v_ij * v_jk * v_ki)
    if angle <= -math.pi:
        angle += 2.0 * math.pi
    return angle


def inject_telescope_phases(visibilities: dict[tuple[int, int], complex],
                            phases) -> dict[tuple[int, int], complex]:
    """Apply per-telescope phase errors e_i: V_ij -> V_ij e^{i(e_i - e_j)}.

    Models uncalibrated instrumental or atmospheric path errors; closure
    phases built from the result are unchanged.
    """
    out = {}
    for (i, j), v in visibilities.items():
        out[(i, j)] = v * cmath.exp(1j * (phases[i] - phases[j]))
    return out


class BaselineSet:
    """Visibility samples keyed by baseline, rejecting duplicates.

    Values may be supplied as complex numbers or FringeFit results (the
    fitted visibility is taken).
    """

    def __init__(self) -> None:
        self._entries: list[tuple[Baseline, complex]] = []
        self._seen: set[tuple] = set()

    def add(self, baseline: Baseline, value) -> None:
        key = (baseline.vector, baseline.wavelength)
        if key in self._seen:
            raise ValueError(f"duplicate baseline {baseline.vector!r}")
        vis = value.visibility if isinstance(value, FringeFit) else complex(value)
        self._seen.add(key)
        self._entries.append((baseline, vis))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)


def _axis_index(component: float, n: int, pixel_scale: float,
                wavelength: float) -> int:
    exact = component * n * pixel_scale / wavelength
    k = round(exact)
    if abs(exact - k) > _GRID_TOL:
        raise ValueError(
            f"baseline component {component!r} is off the reconstruction grid "
            f"(index {exact:.6f} not within {_GRID_TOL} of an integer)")
    return k % n


def reconstruct_image(samples: BaselineSet, grid_size, pixel_scale: float):
    """Inverse DFT of gridded visibilities; returns a real, unit-flux image.

    grid_size is an int for 1-D baselines (scalar vectors) or an (nx, ny)
    pair for 2-D; pixel i sits at angle (i - n//2) * pixel_scale per axis,
    mirroring `sky.SourceModel` grids.  Unsampled grid points are
    zero-filled after Hermitian completion V(-k) = conj(V(k)).
    """
    if len(samples) == 0:
        raise ValueError("cannot reconstruct from an empty baseline set")
    if pixel_scale <= 0.0:
        raise ValueError("pixel_scale must be positive")
    entries = list(samples)
    wavelength = entries[0][0].wavelength
    two_d = isinstance(entries[0][0].vector, tuple)
    if isinstance(grid_size, int):
        shape = (grid_size,) if not two_d else (grid_size, grid_size)
    else:
        shape = tuple(int(n) for n in grid_size)
    if two_d and len(shape) != 2:
        raise ValueError("2-D baselines need an (nx, ny) grid size")
    if not two_d and len(shape) != 1:
        raise ValueError("1-D baselines need a scalar grid size")

    grid = np.zeros(shape, dtype=complex)
    filled = np.zeros(shape, dtype=bool)
    for baseline, vis in entries:
        if isinstance(baseline.vector, tuple) != two_d:
            raise ValueError("mixed 1-D and 2-D baselines in one set")
        if not math.isclose(baseline.wavelength, wavelength, rel_tol=1e-12):
            raise ValueError("all baselines must share one wavelength")
        if two_d:
            idx = (_axis_index(baseline.vector[0], shape[0], pixel_scale, wavelength),
                   _axis_index(baseline.vector[1], shape[1], pixel_scale, wavelength))
        else:
            idx = (_axis_index(baseline.vector, shape[0], pixel_scale, wavelength),)
        grid[idx] = vis
        filled[idx] = True

    # Hermitian completion: fill missing conjugate samples.
    for idx in np.argwhere(filled):
        conj_idx = tuple((-i) % n for i, n in zip(idx, shape))
        if not filled[conj_idx]:
            grid[conj_idx] = np.conj(grid[tuple(idx)])
            filled[conj_idx] = True

    ramps = []
    for n in shape:
        k = np.arange(n)
        pix = np.arange(n) - n // 2
        ramps.append(np.exp(-2j * math.pi * np.outer(k, pix) / n) / n)
    if two_d:
        image = ramps[0].T @ grid @ ramps[1]
    else:
        image = grid @ ramps[0]
    worst_imag = float(np.abs(image.imag).max())
    if worst_imag > 1e-10:
        raise ValueError(f"reconstruction not real (max imaginary part "
                         f"{worst_imag:.3e}); visibility data not Hermitian")
    image = image.real
    flux = image.sum()
    if flux <= 1e-12 * float(np.abs(image).max(initial=0.0)):
        raise ValueError("reconstructed image has no usable total flux; "
                         "was the zero baseline sampled?")
    return image / flux
