import numpy as np
import pytest

from heckelab.grassmannian import (
    NotInCell,
    constant_representative,
    eta_at,
    eta_invariance_check,
    in_bruhat_cell,
    random_unit,
)
from heckelab.projective import ProjPoint, chordal, sphere_grid
from heckelab.pseries import SeriesMat2, TruncSeries


def test_eta_of_pivot_matrix():
    mu = 0.7 - 0.2j
    m = lambda z: np.array([[1, 0], [0, z - mu]])
    assert eta_at(m, mu) == ProjPoint(1, 0)


def test_eta_lower_unipotent_shape():
    lam, mu = 1.3 + 0.4j, -0.2 + 0.9j
    m = lambda z: np.array([[lam, z - mu], [1, 0]])
    assert eta_at(m, mu) == ProjPoint(lam, 1)


def test_eta_two_step_composite():
    l1, l2 = 0.9 - 0.1j, -0.4 + 0.7j
    mu1, mu2 = 0.1, 1.2 + 0.5j
    a1 = lambda z: np.array([[l1, z - mu1], [1, 0]])
    a2 = lambda z: np.array([[z - mu2, l2], [0, 1]])
    comp = lambda z: a1(z) @ a2(z)
    lb2 = l2 / (mu2 - mu1)
    assert chordal(eta_at(comp, mu2), ProjPoint(l1 * lb2 + 1, lb2)) < 1e-12


def test_eta_rejects_full_rank_and_zero():
    with pytest.raises(NotInCell):
        eta_at(lambda z: np.eye(2), 0.0)
    with pytest.raises(NotInCell):
        eta_at(lambda z: np.zeros((2, 2)), 0.0)


def test_in_bruhat_cell():
    assert in_bruhat_cell(SeriesMat2.z_shift(0.0, 8))
    assert not in_bruhat_cell(SeriesMat2.identity(8))
    z = TruncSeries.variable(8)
    zero = TruncSeries.constant(0.0, 8)
    assert not in_bruhat_cell(SeriesMat2([[z, zero], [zero, z]]))


def test_invariance_trivial_and_random():
    ident = SeriesMat2.identity(8)
    assert eta_invariance_check(ident, ident) == 0.0
    rng = np.random.default_rng(5)
    a = random_unit(rng, 8)
    assert eta_invariance_check(a, ident) < 1e-12
    worst = 0.0
    for _ in range(100):
        worst = max(worst, eta_invariance_check(random_unit(rng, 8), random_unit(rng, 8)))
    assert worst < 1e-9


def test_surjectivity_witness():
    for point in sphere_grid(32):
        rep = constant_representative(point)
        back = eta_at(rep * SeriesMat2.z_shift(0.0, 8), 0.0)
        assert chordal(back, point) < 1e-12


def test_left_equivariance():
    rng = np.random.default_rng(6)
    for _ in range(50):
        a = random_unit(rng, 8)
        c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(c)) < 1e-2:
            continue
        m = a * SeriesMat2.z_shift(0.0, 8)
        cm = SeriesMat2.constant(c, 8) * m
        assert chordal(eta_at(cm, 0.0), eta_at(m, 0.0).apply(c)) < 1e-9
