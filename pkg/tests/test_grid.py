import logging
import math

import numpy as np
import pytest

from spherefft.grid import (
    BUILTIN_NAMES,
    PoleConsistencyError,
    SampleFileError,
    SphericalGrid,
    SphericalSamples,
    builtin,
    read_samples,
    sample,
    to_cartesian,
    write_samples,
)
from spherefft.harmonics import spherical_harmonic


def test_grid_nodes():
    g = SphericalGrid(4)
    np.testing.assert_allclose(g.theta, np.arange(5) * np.pi / 4)
    np.testing.assert_allclose(g.phi, np.arange(8) * np.pi / 4)
    assert g.theta[0] == 0.0 and g.theta[-1] == np.pi
    assert g.shape == (5, 8)
    with pytest.raises(ValueError):
        SphericalGrid(1)


@pytest.mark.parametrize("N", range(2, 17))
def test_distinct_point_count(N):
    g = SphericalGrid(N)
    th, ph = g.mesh()
    pts = np.stack(to_cartesian(th, ph), axis=-1).reshape(-1, 3)
    distinct = np.unique(np.round(pts, 12) + 0.0, axis=0)
    assert len(distinct) == g.n_points == 2 * N * (N - 1) + 2 == 2 * N * N - 2 * N + 2


def test_sample_constant():
    s = sample(lambda t, p: np.ones_like(t), 4)
    assert np.all(s.values == 1.0)


def test_builtin_values():
    assert builtin("F1")(np.pi / 2, 0.0) == pytest.approx(0.2)
    assert builtin("F1")(0.0, 1.3) == pytest.approx(0.2)
    assert builtin("F3")(np.pi / 2, np.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert builtin("F4")(math.acos(1 / math.sqrt(3)), np.pi / 4) == pytest.approx(0.0, abs=1e-15)


def test_builtin_closed_forms():
    rng = np.random.default_rng(0)
    th = rng.uniform(0, np.pi, 50)
    ph = rng.uniform(0, 2 * np.pi, 50)
    x, y, z = np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)
    np.testing.assert_allclose(builtin("F2")(th, ph), (1 - x**2) ** 0.5 * y * z, atol=1e-14)
    np.testing.assert_allclose(builtin("F3")(th, ph), (1 - x**2) ** -0.5 * y * z, rtol=1e-12)
    a = 1 / np.sqrt(3)
    np.testing.assert_allclose(builtin("F4")(th, ph), ((x - a) ** 2 + (y - a) ** 2 + (z - a) ** 2) ** 1.5, rtol=1e-13)


def test_singular_points_defined_by_continuity():
    # 1 - x^2 = 0 at theta = pi/2, phi in {0, pi}
    # (at phi = pi the floating-point point is only 1e-16 away from singular)
    for ph in (0.0, np.pi):
        assert abs(builtin("F2")(np.pi / 2, ph)) < 1e-30
        assert abs(builtin("F3")(np.pi / 2, ph)) < 1e-15
    assert builtin("F3")(np.pi / 2, 0.0) == 0.0


def test_builtin_partials_match_finite_differences():
    rng = np.random.default_rng(1)
    th = rng.uniform(0.2, np.pi - 0.2, 20)
    ph = rng.uniform(0.3, 2.8, 20)  # away from the F2/F3 singular points
    h = 1e-6
    for name in ("F1", "F2", "F3", "F4"):
        f = builtin(name)
        fd_t = (f(th + h, ph) - f(th - h, ph)) / (2 * h)
        fd_p = (f(th, ph + h) - f(th, ph - h)) / (2 * h)
        np.testing.assert_allclose(f.d_theta(th, ph), fd_t, atol=1e-7, err_msg=name)
        np.testing.assert_allclose(f.d_phi(th, ph), fd_p, atol=1e-7, err_msg=name)


def test_unknown_builtin_lists_names():
    with pytest.raises(KeyError, match="F1, F2, F3, F4"):
        builtin("F9")
    assert set(BUILTIN_NAMES) >= {"F1", "F2", "F3", "F4"}


@pytest.mark.parametrize("name", ["F1", "F2", "F3", "F4"])
def test_symmetry_partner(name):
    f = builtin(name)
    for N in (2, 5, 16, 64):
        g = SphericalGrid(N)
        th, ph = g.mesh()
        np.testing.assert_allclose(f(th, ph), f(-th, ph + np.pi), atol=1e-12)


def test_sample_matches_harmonics():
    N = 8
    s = sample(lambda t, p: spherical_harmonic(2, 1, t, p), N)
    th, ph = SphericalGrid(N).mesh()
    np.testing.assert_allclose(s.values, spherical_harmonic(2, 1, th, ph), atol=1e-15)


def test_sample_forces_constant_poles():
    # a function with a direction-dependent value at the pole is pinned per row
    s = sample(lambda t, p: np.cos(t) + 1e-3 * np.sin(p) * (t == 0), 4)
    assert np.all(s.values[0] == s.values[0, 0])
    assert np.all(s.values[-1] == s.values[-1, 0])


def test_sample_non_finite_names_position():
    def bad(t, p):
        out = np.ones_like(t)
        out[np.isclose(t, np.pi / 2) & np.isclose(p, np.pi / 2)] = np.nan
        return out

    with pytest.raises(ValueError, match=r"j=2, k=2"):
        sample(bad, 4)


def test_samples_validation():
    with pytest.raises(ValueError, match="shape"):
        SphericalSamples(4, np.zeros((4, 8)))
    v = np.zeros((5, 8))
    v[0, 3] = 1e-3
    with pytest.raises(PoleConsistencyError):
        SphericalSamples(4, v)
    v = np.zeros((5, 8))
    v[2, 2] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        SphericalSamples(4, v)


def test_samples_immutable():
    s = sample(builtin("F1"), 4)
    with pytest.raises(ValueError):
        s.values[1, 1] = 0.0


def test_lenient_pole_mode_warns(caplog):
    v = np.ones((5, 8))
    v[0, 1] = 1.001
    with caplog.at_level(logging.WARNING):
        s = SphericalSamples(4, v, strict=False)
    assert s.pole_deviation() == pytest.approx(1e-3)
    assert "pole rows" in caplog.text


def _random_samples(N, rng):
    v = rng.standard_normal((N + 1, 2 * N)) + 1j * rng.standard_normal((N + 1, 2 * N))
    v[0] = v[0, 0]
    v[-1] = v[-1, 0]
    return SphericalSamples(N, v)


def test_binary_round_trip_bitwise(tmp_path):
    s = _random_samples(4, np.random.default_rng(0))
    p = tmp_path / "s.sph"
    write_samples(s, p)
    assert p.read_bytes()[:4] == b"SPH1"
    r = read_samples(p)
    assert r.N == 4
    assert np.array_equal(r.values.view(np.uint64), s.values.view(np.uint64))


def test_text_round_trip_exact(tmp_path):
    s = _random_samples(5, np.random.default_rng(1))
    p = tmp_path / "s.csv"
    write_samples(s, p)
    assert p.read_text().splitlines()[0] == "N=5"
    assert np.array_equal(read_samples(p).values, s.values)


def test_text_real_entries(tmp_path):
    p = tmp_path / "r.txt"
    p.write_text("N=2\n1,1,1,1\n2,3.5,-1,0\n4,4,4,4\n")
    s = read_samples(p)
    assert s.values[1, 1] == 3.5 and np.all(s.values.imag == 0.0)


def test_text_row_count_error(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("N=4\n" + "\n".join([",".join(["1"] * 8)] * 4) + "\n")
    with pytest.raises(SampleFileError, match="expected 5 rows"):
        read_samples(p)


def test_text_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("N=2\n1,1,1,1\n1,1,1\n1,1,1,1\n")
    with pytest.raises(SampleFileError, match=r":3: expected 4 columns"):
        read_samples(p)
    p.write_text("N=2\n1,1,1,1\n1,x,1,1\n1,1,1,1\n")
    with pytest.raises(SampleFileError, match=r":3: cannot parse"):
        read_samples(p)
    p.write_text("N=2\n1,1,1,1\n1,nan,1,1\n1,1,1,1\n")
    with pytest.raises(SampleFileError, match=r":3: non-finite"):
        read_samples(p)
    p.write_text("M=2\n")
    with pytest.raises(SampleFileError, match=r":1: malformed header"):
        read_samples(p)


def test_binary_errors(tmp_path):
    p = tmp_path / "b.sph"
    p.write_bytes(b"SPH1\x04\x00\x00\x00" + b"\x00" * 16)
    with pytest.raises(SampleFileError, match="payload bytes"):
        read_samples(p)
    p.write_bytes(b"SPH1\x01")
    with pytest.raises(SampleFileError, match="truncated"):
        read_samples(p)


def test_strict_pole_check_on_read(tmp_path, caplog):
    p = tmp_path / "poles.txt"
    p.write_text("N=2\n1,1.001,1,1\n0,0,0,0\n2,2,2,2\n")
    with pytest.raises(PoleConsistencyError):
        read_samples(p, strict=True)
    with caplog.at_level(logging.WARNING):
        read_samples(p)
    assert "pole rows" in caplog.text
