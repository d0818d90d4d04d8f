"""Source models, baselines, and complex fringe visibility.

The visibility of a source seen through a two-telescope baseline is the
normalized Fourier transform of its brightness distribution.  A photon
arriving from the source is shared between the two collection modes; its
one-photon density matrix carries that visibility on the off-diagonal.

Source angle conventions: 1-D point sources use the exact geometric phase
2*pi*b*sin(theta)/lambda.  2-D sources (point lists with (theta_x, theta_y)
and pixel grids) use the small-angle form 2*pi*(b . theta)/lambda.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DensityOperator, basis_index, dimension


@dataclass(frozen=True)
class Baseline:
    """Telescope separation vector and operating wavelength, both in meters.

    vector is a scalar for 1-D geometries or an (east, north) pair for 2-D.
    """

    vector: float | tuple[float, float]
    wavelength: float

    def __post_init__(self) -> None:
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if isinstance(self.vector, (tuple, list)):
            object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))
            if len(self.vector) != 2:
                raise ValueError("2-D baseline vector must have two components")
        else:
            object.__setattr__(self, "vector", float(self.vector))


def point_phase(baseline: Baseline, theta) -> float:
    """Geometric phase difference between the two telescopes for a point source.

    1-D: 2*pi*b*sin(theta)/lambda with theta in radians, |theta| < pi/2.
    2-D: small-angle 2*pi*(b . theta)/lambda.
    """
    if isinstance(baseline.vector, tuple):
        tx, ty = (float(theta[0]), float(theta[1]))
        bx, by = baseline.vector
        return 2.0 * math.pi * (bx * tx + by * ty) / baseline.wavelength
    theta = float(theta)
    if not abs(theta) < math.pi / 2:
        raise ValueError(f"source angle must satisfy |theta| < pi/2, got {theta}")
    return 2.0 * math.pi * baseline.vector * math.sin(theta) / baseline.wavelength


@dataclass(frozen=True)
class SourceModel:
    """Incoherent brightness distribution: weighted points or a pixel grid.

    points: tuple of (theta, intensity) with theta a float (1-D) or an
    (theta_x, theta_y) pair (2-D).  grid: 2-D intensity array with square
    pixels of pixel_scale radians, pixel (ix, iy) at angle
    ((ix - nx//2) * pixel_scale, (iy - ny//2) * pixel_scale).
    """

    points: tuple | None = None
    grid: np.ndarray | None = None
    pixel_scale: float = 0.0

    def __post_init__(self) -> None:
        if (self.points is None) == (self.grid is None):
            raise ValueError("provide exactly one of points or grid")
        if self.points is not None:
            pts = tuple((t if np.isscalar(t) else tuple(map(float, t)), float(i))
                        for t, i in self.points)
            if not pts:
                raise ValueError("point source list is empty")
            if any(i < 0 for _, i in pts):
                raise ValueError("intensities must be non-negative")
            if sum(i for _, i in pts) <= 0:
                raise ValueError("total intensity must be positive")
            object.__setattr__(self, "points", pts)
        else:
            grid = np.asarray(self.grid, dtype=float)
            if grid.ndim != 2:
                raise ValueError("grid must be 2-D")
            if np.any(grid < 0) or grid.sum() <= 0:
                raise ValueError("grid intensities must be non-negative with positive total")
            if self.pixel_scale <= 0:
                raise ValueError("pixel_scale must be positive for grid sources")
            object.__setattr__(self, "grid", grid)

    @classmethod
    def point(cls, theta=0.0, intensity: float = 1.0) -> "SourceModel":
        return cls(points=((theta, intensity),))

    @classmethod
    def binary(cls, separation: float, ratio: float = 1.0) -> "SourceModel":
        """Equal-or-weighted pair at +/- separation/2 (1-D angles)."""
        return cls(points=((-separation / 2.0, 1.0), (separation / 2.0, ratio)))


def visibility(source: SourceModel, baseline: Baseline) -> complex:
    """Normalized complex visibility: sum_k I_k e^{i phase_k} / sum_k I_k."""
    if source.points is not None:
        total = sum(i for _, i in source.points)
        acc = sum(i * np.exp(1j * point_phase(baseline, t)) for t, i in source.points)
        return complex(acc / total)
    if not isinstance(baseline.vector, tuple):
        raise ValueError("grid sources require a 2-D baseline vector")
    grid = source.grid
    nx, ny = grid.shape
    tx = (np.arange(nx) - nx // 2) * source.pixel_scale
    ty = (np.arange(ny) - ny // 2) * source.pixel_scale
    bx, by = baseline.vector
    px = np.exp(2j * math.pi * bx * tx / baseline.wavelength)
    py = np.exp(2j * math.pi * by * ty / baseline.wavelength)
    return complex((px @ grid @ py) / grid.sum())


def arrival_density_matrix(v: complex, photon_cutoff: int = 2) -> DensityOperator:
    """One-photon two-mode state of an astronomical photon with visibility v.

    Basis (n_left, n_right): diagonal 1/2 on |0,1> and |1,0>, off-diagonal
    <1,0|rho|0,1> = v/2 (and conjugate).  |v| <= 1 required.
    """
    v = complex(v)
    if abs(v) > 1.0 + 1e-12:
        raise ValueError(f"|v| must be <= 1, got {abs(v)}")
    index = basis_index(2, photon_cutoff)
    dim = dimension(2, photon_cutoff)
    mat = np.zeros((dim, dim), dtype=complex)
    i01, i10 = index[(0, 1)], index[(1, 0)]
    mat[i01, i01] = 0.5
    mat[i10, i10] = 0.5
    mat[i10, i01] = v / 2.0
    mat[i01, i10] = v.conjugate() / 2.0
    return DensityOperator(2, photon_cutoff, mat)


def load_point_sources(path) -> SourceModel:
    """Read a plain-text point list: 'theta_x theta_y intensity' per line.

    Lines starting with '#' are comments.  Two-column lines are read as
    'theta intensity' (1-D source).
    """
    points = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split()
            try:
                vals = [float(c) for c in cols]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from exc
            if len(vals) == 2:
                points.append((vals[0], vals[1]))
            elif len(vals) == 3:
                points.append(((vals[0], vals[1]), vals[2]))
            else:
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(vals)}")
    return SourceModel(points=tuple(points))


def load_pgm(path) -> np.ndarray:
    """Read a portable graymap (P2 ASCII or P5 binary) into a float array in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        # Tokenize the header, skipping whitespace and '#' comment lines.
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if len(tokens) < 4 or tokens[0] not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 portable graymap")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval <= 0 or maxval > 65535:
        raise ValueError(f"{path}: bad maxval {maxval}")
    if tokens[0] == b"P2":
        vals = np.array(data[pos:].split(), dtype=float)
    else:
        pos += 1  # single whitespace after maxval
        dtype = np.uint8 if maxval < 256 else ">u2"
        vals = np.frombuffer(data[pos:], dtype=dtype, count=width * height).astype(float)
    if vals.size != width * height:
        raise ValueError(f"{path}: expected {width * height} pixels, got {vals.size}")
    return vals.reshape(height, width) / maxval


def save_pgm(path, image: np.ndarray, maxval: int = 255, comment: str | None = None) -> None:
    """Write a float image (scaled to its max) as an ASCII P2 graymap."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    top = image.max()
    scaled = np.zeros_like(image, dtype=int) if top <= 0 else np.rint(
        np.clip(image / top, 0.0, 1.0) * maxval).astype(int)
    lines = [b"P2"]
    if comment:
        lines.append(f"# {comment}".encode("ascii"))
    lines.append(f"{image.shape[1]} {image.shape[0]}".encode("ascii"))
    lines.append(str(maxval).encode("ascii"))
    for row in scaled:
        lines.append(" ".join(str(v) for v in row).encode("ascii"))
    with open(path, "wb") as fh:
        fh.write(b"\n".join(lines) + b"\n")
