"""The Bruhat cell of diag(1, z) and its direction map to CP^1.

A composite of Hecke morphism matrices, evaluated at the modification
point, is a rank-1 matrix whose column space is the direction of the
modification.  ``eta_at`` extracts that direction; ``in_bruhat_cell``
decides membership for local series data.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .projective import ProjPoint, chordal, rank_one_column_space
from .pseries import UNIT_TOL, SeriesMat2, bruhat_companion

#: Relative second-singular-value threshold for rank-1 detection.
RANK_TOL = 1e-8


class NotInCell(ValueError):
    """Evaluation point is not a simple-degeneracy point of the matrix."""


MatrixFunction = Callable[[complex], np.ndarray]


def _evaluate(m, z: complex) -> np.ndarray:
    if callable(m):
        return np.asarray(m(z), dtype=complex)
    return np.asarray(m, dtype=complex)


def eta_at(m: MatrixFunction, mu: complex) -> ProjPoint:
    """Direction in CP^1 of an analytic 2x2 matrix at the point ``mu``.

    ``m(mu)`` must have numerical rank exactly 1; the result is its column
    space.  For m = A(z - mu) diag(1, z - mu) with A a unit this is the
    class of the first column of A(0).
    """
    val = _evaluate(m, mu)
    point, s1, s2 = rank_one_column_space(val, rank_tol=RANK_TOL)
    if point is None:
        raise NotInCell(
            f"matrix at {mu} has singular values ({s1:.3e}, {s2:.3e}); not rank 1"
        )
    return point


def in_bruhat_cell(m: SeriesMat2, det_tol: float = UNIT_TOL) -> bool:
    """True iff det m vanishes to exactly first order at the series center
    and the center value has rank 1.

    The series is understood as centered at the modification point (local
    variable u = z - center).  Degenerate input returns False.
    """
    if m.order < 2:
        return False
    d = m.det().coeffs
    scale = max(np.abs(d).max(), 1.0)
    if abs(d[0]) > det_tol * scale or abs(d[1]) <= det_tol * scale:
        return False
    point, _, _ = rank_one_column_space(m.constant_term(), rank_tol=RANK_TOL)
    return point is not None


def eta_invariance_check(a: SeriesMat2, b: SeriesMat2) -> float:
    """Projective distance between eta(A Z) and eta(A Z B) at the center.

    Both A and B must be units; the contract is a residual below 1e-9,
    witnessing that eta only depends on the right-coset of A Z.
    """
    for unit in (a, b):
        if abs(np.linalg.det(unit.constant_term())) <= UNIT_TOL:
            raise _nonunit()
    z = SeriesMat2.z_shift(0.0, a.order)
    left = a * z
    right = a * z * b
    return chordal(eta_at(left, 0.0), eta_at(right, 0.0))


def _nonunit():
    from .pseries import NonUnit

    return NonUnit("operand constant term is singular")


def constant_representative(point: ProjPoint) -> SeriesMat2:
    """A unit constant matrix A with eta([A Z]) equal to ``point``.

    Completes (a, c) with the orthogonal column (-conj(c), conj(a)), so the
    determinant is |a|^2 + |c|^2 > 0.
    """
    a, c = point.a, point.c
    mat = np.array([[a, -np.conj(c)], [c, np.conj(a)]])
    return SeriesMat2.constant(mat)


def random_unit(rng: np.random.Generator, order: int) -> SeriesMat2:
    """A random series matrix with a well-conditioned constant term.

    Marginal units amplify coefficient growth through the inverse series;
    rejecting them keeps self-consistency residuals near roundoff.
    """
    decay = 0.4 ** np.arange(order + 1)
    while True:
        coeffs = rng.normal(size=(2, 2, order + 1)) + 1j * rng.normal(size=(2, 2, order + 1))
        coeffs = coeffs * decay
        m = SeriesMat2([[coeffs[i, j] for j in range(2)] for i in range(2)])
        if abs(np.linalg.det(m.constant_term())) > 0.3:
            return m


def companion_residual(a: SeriesMat2) -> float:
    """Coefficientwise residual of A(0) Z B = A Z for B = bruhat_companion(A)."""
    b = bruhat_companion(a)
    z = SeriesMat2.z_shift(0.0, a.order)
    lhs = SeriesMat2.constant(a.constant_term(), a.order) * z * b
    rhs = a * z
    n = min(lhs.order, rhs.order)
    worst = 0.0
    for i in range(2):
        for j in range(2):
            x = lhs.entries[i][j].coeffs[: n + 1]
            y = rhs.entries[i][j].coeffs[: n + 1]
            scale = max(np.abs(y).max(), 1.0)
            worst = max(worst, float(np.abs(x - y).max() / scale))
    return worst
