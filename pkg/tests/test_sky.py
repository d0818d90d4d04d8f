"""Source models, visibilities, and image file I/O."""
import math

import numpy as np
import pytest

from entscope.sky import (
    Baseline,
    SourceModel,
    arrival_density_matrix,
    load_pgm,
    load_point_sources,
    point_phase,
    save_pgm,
    visibility,
)

WAVELENGTH = 800e-9


def test_point_source_has_unit_visibility():
    src = SourceModel.point()
    v = visibility(src, Baseline(120.0, WAVELENGTH))
    assert v == pytest.approx(1.0, abs=1e-15)


def test_offset_point_carries_pure_phase():
    theta = 3e-9
    b = Baseline(50.0, WAVELENGTH)
    v = visibility(SourceModel.point(theta=theta), b)
    expected = np.exp(2j * math.pi * 50.0 * math.sin(theta) / WAVELENGTH)
    assert v == pytest.approx(expected, abs=1e-12)
    assert abs(v) == pytest.approx(1.0, abs=1e-12)


def test_equal_binary_cosine_fringe():
    sep = 2.5e-9
    src = SourceModel.binary(sep)
    for b_len in (10.0, 60.0, 150.0):
        b = Baseline(b_len, WAVELENGTH)
        v = visibility(src, b)
        expected = math.cos(
            2.0 * math.pi * b_len * math.sin(sep / 2.0) / WAVELENGTH)
        assert v.real == pytest.approx(expected, abs=1e-12)
        assert v.imag == pytest.approx(0.0, abs=1e-12)


def test_unequal_binary_amplitude():
    """|V| of a ratio-r binary: sqrt(1 + r^2 + 2r cos x) / (1 + r)."""
    sep, ratio, b_len = 2.0e-9, 0.4, 80.0
    v = visibility(SourceModel.binary(sep, ratio=ratio),
                   Baseline(b_len, WAVELENGTH))
    x = 2.0 * math.pi * b_len * 2.0 * math.sin(sep / 2.0) / WAVELENGTH
    expected = math.sqrt(1.0 + ratio**2 + 2.0 * ratio * math.cos(x)) / (1.0 + ratio)
    assert abs(v) == pytest.approx(expected, abs=1e-12)


def test_grid_visibility_matches_direct_sum():
    rng = np.random.default_rng(3)
    grid = rng.random((5, 7))
    scale = 1e-9
    src = SourceModel(grid=grid, pixel_scale=scale)
    b = Baseline((40.0, -25.0), WAVELENGTH)

    total = 0.0 + 0.0j
    for ix in range(5):
        for iy in range(7):
            theta = ((ix - 2) * scale, (iy - 3) * scale)
            total += grid[ix, iy] * np.exp(1j * point_phase(b, theta))
    expected = total / grid.sum()

    assert visibility(src, b) == pytest.approx(expected, abs=1e-12)


def test_two_dimensional_points():
    pts = (((1e-9, -2e-9), 1.0), ((-1e-9, 0.5e-9), 2.0))
    src = SourceModel(points=pts)
    b = Baseline((30.0, 55.0), WAVELENGTH)
    expected = sum(
        i * np.exp(2j * math.pi * (30.0 * t[0] + 55.0 * t[1]) / WAVELENGTH)
        for t, i in pts) / 3.0
    assert visibility(src, b) == pytest.approx(expected, abs=1e-12)


def test_visibility_modulus_bounded():
    rng = np.random.default_rng(11)
    src = SourceModel(grid=rng.random((4, 4)), pixel_scale=2e-9)
    for bx, by in rng.uniform(-500.0, 500.0, size=(10, 2)):
        b = Baseline((float(bx), float(by)), WAVELENGTH)
        assert abs(visibility(src, b)) <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        visibility(src, Baseline(100.0, WAVELENGTH))


def test_arrival_density_matrix_structure():
    v = 0.6 * np.exp(0.8j)
    rho = arrival_density_matrix(v)
    rho.validate()
    probs = rho.diagonal_probabilities()
    assert probs[(0, 1)] == pytest.approx(0.5, abs=1e-15)
    assert probs[(1, 0)] == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        arrival_density_matrix(1.2)


def test_source_model_validation():
    with pytest.raises(ValueError):
        SourceModel()
    with pytest.raises(ValueError):
        SourceModel(points=((0.0, -1.0),))
    with pytest.raises(ValueError):
        SourceModel(grid=np.ones((3, 3)), pixel_scale=0.0)
    with pytest.raises(ValueError):
        Baseline((1.0, 2.0, 3.0), WAVELENGTH)
    with pytest.raises(ValueError):
        Baseline(10.0, -1.0)


def test_load_point_sources_one_and_two_dimensional(tmp_path):
    p1 = tmp_path / "oned.txt"
    p1.write_text("# theta intensity\n1e-9 1.0\n-1e-9 0.5\n")
    src = load_point_sources(p1)
    assert src.points == ((1e-9, 1.0), (-1e-9, 0.5))

    p2 = tmp_path / "twod.txt"
    p2.write_text("1e-9 2e-9 1.0\n0.0 0.0 3.0\n")
    src = load_point_sources(p2)
    assert src.points[0] == ((1e-9, 2e-9), 1.0)

    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3 4\n")
    with pytest.raises(ValueError):
        load_point_sources(bad)


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    image = rng.random((6, 9))
    path = tmp_path / "field.pgm"
    save_pgm(path, image, maxval=65535, comment="round-trip check")
    lines = path.read_text().splitlines()
    assert lines[0] == "P2"
    assert lines[1] == "# round-trip check"
    back = load_pgm(path)
    assert back.shape == image.shape
    scaled = image / image.max()
    assert np.max(np.abs(back - scaled)) < 1.0 / 65535


def test_load_pgm_binary_format(tmp_path):
    path = tmp_path / "raw.pgm"
    header = b"P5\n3 2\n255\n"
    payload = bytes([0, 128, 255, 64, 32, 16])
    path.write_bytes(header + payload)
    img = load_pgm(path)
    assert img.shape == (2, 3)
    assert img[0, 2] == pytest.approx(1.0)
    assert img[1, 0] == pytest.approx(64 / 255)
