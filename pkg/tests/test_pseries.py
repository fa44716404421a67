import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckelab.pseries import (
    DEFAULT_ORDER,
    NonUnit,
    SeriesMat2,
    TruncSeries,
    bruhat_companion,
)


def series(coeffs):
    return TruncSeries(np.asarray(coeffs, dtype=complex))


coeff = st.complex_numbers(min_magnitude=0, max_magnitude=4, allow_nan=False,
                           allow_infinity=False)
series_strategy = st.lists(coeff, min_size=4, max_size=9).map(series)


def test_polynomial_identity():
    one_plus = series([1, 1, 0, 0])
    one_minus = series([1, -1, 0, 0])
    prod = one_plus * one_minus
    assert np.allclose(prod.coeffs, [1, 0, -1, 0])


def test_identity_matrix_multiplication():
    rng = np.random.default_rng(0)
    m = SeriesMat2(rng.normal(size=(2, 2, 5)) + 1j * rng.normal(size=(2, 2, 5)))
    assert (SeriesMat2.identity(4) * m).allclose(m)
    assert (m * SeriesMat2.identity(4)).allclose(m)


def test_convolution_against_double_loop():
    rng = np.random.default_rng(1)
    n = 8
    a = series(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
    b = series(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
    prod = a * b
    # Independent brute-force convolution.
    want = np.zeros(n + 1, dtype=complex)
    for i in range(n + 1):
        for j in range(n + 1):
            if i + j <= n:
                want[i + j] += a.coeffs[i] * b.coeffs[j]
    assert np.allclose(prod.coeffs, want, atol=1e-14)


def test_invert_constant_and_geometric():
    one = TruncSeries.constant(1.0, 3)
    assert np.allclose(one.invert_unit().coeffs, [1, 0, 0, 0])
    geo = series([1, 1, 0, 0]).invert_unit()
    assert np.allclose(geo.coeffs, [1, -1, 1, -1])


def test_invert_random_matrix_roundtrip():
    from heckelab.grassmannian import random_unit

    rng = np.random.default_rng(2)
    for _ in range(20):
        m = random_unit(rng, 8)
        prod = m * m.invert_unit()
        assert prod.allclose(SeriesMat2.identity(8), tol=1e-12)


def test_nonunit_raises():
    with pytest.raises(NonUnit):
        series([0, 1, 2]).invert_unit()
    z = SeriesMat2.z_shift(0.0, 4)
    with pytest.raises(NonUnit):
        z.invert_unit()


@settings(max_examples=60, deadline=None)
@given(series_strategy, series_strategy, series_strategy)
def test_ring_laws(a, b, c):
    n = min(a.order, b.order, c.order)
    a, b, c = a.truncate(n), b.truncate(n), c.truncate(n)
    assert ((a * b) * c).allclose(a * (b * c), tol=1e-9)
    assert (a * (b + c)).allclose(a * b + a * c, tol=1e-9)
    assert (a * b).allclose(b * a, tol=1e-9)


tame_coeff = st.complex_numbers(min_magnitude=0, max_magnitude=1.25,
                                allow_nan=False, allow_infinity=False)
tame_series = st.lists(tame_coeff, min_size=4, max_size=9).map(series)


@settings(max_examples=40, deadline=None)
@given(tame_series)
def test_double_inverse(a):
    # Units with dominant constant term: inverse-coefficient growth stays
    # bounded, so the roundtrip is a meaningful identity at 1e-12.
    c = a.coeffs.copy()
    c[0] = c[0] + 2.0
    a = series(c)
    twice = a.invert_unit().invert_unit()
    assert twice.allclose(a, tol=1e-12)


def test_bruhat_companion_trivial_cases():
    ident = SeriesMat2.identity(DEFAULT_ORDER)
    assert bruhat_companion(ident).allclose(ident)
    rng = np.random.default_rng(3)
    const = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert bruhat_companion(SeriesMat2.constant(const, 8)).allclose(ident)


def test_bruhat_companion_identity_random():
    from heckelab.grassmannian import companion_residual, random_unit

    rng = np.random.default_rng(4)
    for _ in range(25):
        a = random_unit(rng, 8)
        assert companion_residual(a) < 1e-12
        b = bruhat_companion(a)
        assert abs(np.linalg.det(b.constant_term()) - 1) < 1e-12
