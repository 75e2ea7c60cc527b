import json
import logging
import math

import numpy as np
import pytest

from spherefft.grid import TestFunction, builtin
from spherefft.harmonics import spherical_harmonic, spherical_harmonic_grad
from spherefft.norms import (
    ErrorRecord,
    NormQuadrature,
    convergence_table,
    eoc,
    h0_norm,
    h1_norm,
    interpolation_error,
    interpolation_errors,
    records_to_csv,
    records_to_json,
)

Q400 = NormQuadrature(400, 400)
Q_SMALL = NormQuadrature(64, 64)


def _harmonic(n, m):
    return (
        lambda t, p: spherical_harmonic(n, m, t, p),
        lambda t, p: spherical_harmonic_grad(n, m, t, p)[0],
        lambda t, p: spherical_harmonic_grad(n, m, t, p)[1],
    )


def _zero(t, p):
    return np.zeros(np.broadcast(t, p).shape)


def test_default_rule_has_enough_points():
    assert NormQuadrature().size >= 150_000
    assert Q400.size >= 150_000
    with pytest.raises(ValueError):
        NormQuadrature(0, 10)


def test_h0_constant_is_sphere_area():
    one = lambda t, p: np.ones(np.broadcast(t, p).shape)
    assert h0_norm(one, Q_SMALL) == pytest.approx(math.sqrt(4 * math.pi), abs=1e-13)


def test_h0_of_harmonic():
    g = _harmonic(2, 1)[0]
    assert h0_norm(g, Q_SMALL) == pytest.approx(1.0, abs=1e-8)


def test_h1_constant():
    one = lambda t, p: np.ones(np.broadcast(t, p).shape)
    assert h1_norm(one, _zero, _zero, Q_SMALL) == pytest.approx(math.sqrt(math.pi), abs=1e-13)


@pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (1, 1), (2, -1), (3, 2), (5, 5), (8, -3)])
def test_harmonic_norms_match_spectral_definition(n, m):
    # the integral formula gives 1/4 + n(n+1) = (n + 1/2)^2 for a unit harmonic
    g, gt, gp = _harmonic(n, m)
    assert h0_norm(g, Q_SMALL) == pytest.approx(1.0, abs=1e-7)
    assert h1_norm(g, gt, gp, Q_SMALL) ** 2 == pytest.approx((n + 0.5) ** 2, abs=1e-7)


def test_h1_of_combination_is_weighted_sum():
    # orthogonality of harmonics carries over to the H1 inner product
    c = {(1, 0): 0.5 - 1j, (2, 2): 2.0, (4, -1): -0.3j}

    def g(t, p):
        return sum(a * spherical_harmonic(n, m, t, p) for (n, m), a in c.items())

    def gt(t, p):
        return sum(a * spherical_harmonic_grad(n, m, t, p)[0] for (n, m), a in c.items())

    def gp(t, p):
        return sum(a * spherical_harmonic_grad(n, m, t, p)[1] for (n, m), a in c.items())

    expected = sum((n + 0.5) ** 2 * abs(a) ** 2 for (n, m), a in c.items())
    assert h1_norm(g, gt, gp, Q_SMALL) ** 2 == pytest.approx(expected, rel=1e-10)


def test_non_finite_integrand_raises():
    bad = lambda t, p: np.full(np.broadcast(t, p).shape, np.nan)
    with pytest.raises(ValueError, match="non-finite"):
        h0_norm(bad, Q_SMALL)


def test_h1_check_warns_on_rough_integrand(caplog):
    # |cos theta|^1.5: the squared theta-derivative has a kink on the equator
    g = lambda t, p: np.abs(np.cos(t)) ** 1.5 + 0 * p
    gt = lambda t, p: -1.5 * np.sign(np.cos(t)) * np.abs(np.cos(t)) ** 0.5 * np.sin(t) + 0 * p
    with caplog.at_level(logging.WARNING):
        h1_norm(g, gt, _zero, NormQuadrature(64, 8), check=True)
    assert "not self-converged" in caplog.text
    caplog.clear()
    g, gt, gp = _harmonic(2, 1)
    with caplog.at_level(logging.WARNING):
        h1_norm(g, gt, gp, Q_SMALL, check=True)
    assert caplog.text == ""


def test_h0_self_convergence_f1():
    f = builtin("F1")
    a = h0_norm(f, Q400)
    b = h0_norm(f, Q400.refined())
    assert abs(a - b) < 1e-10 * b


# F2's H1 error integrand settles only algebraically, so it needs a finer start
@pytest.mark.parametrize("name,N,n", [("F1", 8, 800), ("F2", 16, 1600), ("F4", 16, 800)])
def test_error_norms_self_converged(name, N, n):
    fn = builtin(name)
    q = NormQuadrature(n, n)
    a = interpolation_errors(fn, N, q)
    b = interpolation_errors(fn, N, q.refined())
    for x, y in zip(a, b):
        assert abs(x - y) < 1e-8 * y


def test_deterministic_bitwise():
    fn = builtin("F2")
    assert interpolation_errors(fn, 8, Q400) == interpolation_errors(fn, 8, Q400)


def test_f1_table_values():
    e0, e1 = interpolation_errors(builtin("F1"), 8, Q400)
    assert 4.86e-6 / 3 <= e0 <= 4.86e-6 * 3
    e0, e1 = interpolation_errors(builtin("F1"), 16, Q400)
    assert 2.02e-11 / 3 <= e0 <= 2.02e-11 * 3
    assert e1 == pytest.approx(3.37e-10, rel=0.05)
    assert interpolation_error(builtin("F1"), 32, Q400) <= 1e-13


def test_f3_n64_h0():
    e = interpolation_error(builtin("F3"), 64, NormQuadrature(1024, 1024))
    assert e == pytest.approx(4.33e-4, rel=0.2)


@pytest.mark.parametrize("N", [2, 5, 16])
def test_constant_error_vanishes(N):
    const = TestFunction(
        "c", lambda t, p: np.full(np.broadcast(t, p).shape, 1.5 - 0.5j), d_theta=_zero, d_phi=_zero
    )
    e0, e1 = interpolation_errors(const, N, Q_SMALL)
    assert e0 < 1e-13 and e1 < 1e-13


def test_error_of_low_degree_polynomial_vanishes():
    fn = TestFunction(
        "y21",
        lambda t, p: spherical_harmonic(2, 1, t, p),
        d_theta=lambda t, p: spherical_harmonic_grad(2, 1, t, p)[0],
        d_phi=lambda t, p: spherical_harmonic_grad(2, 1, t, p)[1],
    )
    e0, e1 = interpolation_errors(fn, 4, Q_SMALL)
    assert e0 < 1e-13 and e1 < 1e-12


def test_interpolation_error_validation():
    with pytest.raises(ValueError, match="H0"):
        interpolation_error(builtin("F1"), 8, Q_SMALL, which="L2")
    nopart = TestFunction("plain", lambda t, p: np.cos(t) + 0 * p)
    with pytest.raises(ValueError, match="partials"):
        interpolation_error(nopart, 8, Q_SMALL, which="H1")
    assert interpolation_error(nopart, 8, Q_SMALL, which="h0") < 1e-13


def test_eoc_examples():
    assert eoc([(8, 1.0), (16, 0.25)]) == [2.0]
    errs = [(n, 7.0 * n**-3.0) for n in (8, 16, 32, 64)]
    np.testing.assert_allclose(eoc(errs), 3.0, atol=1e-12)
    # non-doubling steps use the actual ratio
    assert eoc([(10, 1.0), (30, 1.0 / 9.0)])[0] == pytest.approx(2.0)
    assert math.isnan(eoc([(8, 0.0), (16, 1e-3)])[0])
    assert eoc([(8, 1.0)]) == []


def test_eoc_of_reference_f2_column():
    # reference F2 H0 errors for N = 8..128 and their two-digit EoC values
    col = [(8, 1.43e-3), (16, 8.14e-5), (32, 5.01e-6), (64, 3.12e-7), (128, 1.87e-8)]
    np.testing.assert_allclose(eoc(col), [4.14, 4.02, 4.01, 4.06], atol=0.01)


@pytest.mark.parametrize("name", ["F2", "F3", "F4"])
def test_monotone_decrease(name):
    table = convergence_table(builtin(name), [8, 16, 32, 64, 128], NormQuadrature(512, 512), h1=False)
    errs = [r.error_h0 for r in table]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_records_serialization():
    recs = convergence_table(builtin("F2"), [8, 16], Q400)
    assert recs[0].eoc_h0 is None and recs[0].eoc_h1 is None
    assert recs[1].eoc_h0 == pytest.approx(4.14, abs=0.3)
    text = records_to_csv(recs)
    lines = text.splitlines()
    assert lines[0] == "N,error_h0,eoc_h0,error_h1,eoc_h1"
    assert lines[1].startswith("8,") and ",," in lines[1]
    assert len(lines) == 3
    data = json.loads(records_to_json(recs))
    assert data[1]["N"] == 16 and data[1]["eoc_h1"] == pytest.approx(recs[1].eoc_h1)


def test_records_without_h1():
    recs = convergence_table(builtin("F1"), [4, 8], Q_SMALL, h1=False)
    assert all(r.error_h1 is None for r in recs)
    assert records_to_csv(recs).splitlines()[2].endswith(",,")
    assert isinstance(recs[0], ErrorRecord)
