"""Points of the complex projective line and the chordal metric.

Directions of Hecke modifications, branch points of the elliptic double
cover, and moduli coordinates are all points of CP^1; this module is the
shared carrier for them.
"""

from __future__ import annotations

import numpy as np

#: Tolerance for projective equality and for the [1:0] / [lambda:1] dispatch.
PROJ_TOL = 1e-8

#: Homogeneous coordinates below this magnitude are considered degenerate.
NORM_TOL = 1e-13


class DegeneratePoint(ValueError):
    """Both homogeneous coordinates are numerically zero."""


class ProjPoint:
    """A point [a:c] of CP^1, normalized so the larger coordinate is 1."""

    __slots__ = ("a", "c")

    def __init__(self, a: complex, c: complex):
        a = complex(a)
        c = complex(c)
        if max(abs(a), abs(c)) < NORM_TOL:
            raise DegeneratePoint(f"[{a}:{c}] is not a projective point")
        if abs(a) >= abs(c):
            self.a, self.c = 1.0 + 0.0j, c / a
        else:
            self.a, self.c = a / c, 1.0 + 0.0j

    def __repr__(self) -> str:
        return f"ProjPoint({self.a:.6g}, {self.c:.6g})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjPoint) and chordal(self, other) < PROJ_TOL

    def __hash__(self):  # pragma: no cover - equality is tolerance based
        raise TypeError("ProjPoint is not hashable")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.a, self.c], dtype=complex)

    def is_zero_dir(self, tol: float = PROJ_TOL) -> bool:
        """True for points within ``tol`` of [1:0]."""
        return abs(self.a) >= abs(self.c) and abs(self.c) < tol

    def is_infinity_dir(self, tol: float = PROJ_TOL) -> bool:
        """True for points within ``tol`` of [0:1]."""
        return abs(self.c) > abs(self.a) and abs(self.a) < tol

    def affine(self) -> complex:
        """The ratio c/a (second chart coordinate); requires a != 0."""
        if abs(self.a) < NORM_TOL:
            raise ZeroDivisionError("point is [0:1]")
        return self.c / self.a

    def apply(self, mat: np.ndarray) -> "ProjPoint":
        """Image under an invertible 2x2 matrix acting on homogeneous coords."""
        v = np.asarray(mat, dtype=complex) @ self.vec
        return ProjPoint(v[0], v[1])

    def involution(self) -> "ProjPoint":
        """The map [x:y] -> [-y:x]."""
        return ProjPoint(-self.c, self.a)


def chordal(p: ProjPoint, q: ProjPoint) -> float:
    """Chordal distance |a_p c_q - c_p a_q| / (|p| |q|), bounded by 1."""
    num = abs(p.a * q.c - p.c * q.a)
    return num / (np.hypot(abs(p.a), abs(p.c)) * np.hypot(abs(q.a), abs(q.c)))


def sphere_grid(count: int) -> list[ProjPoint]:
    """A deterministic spread of ``count`` points covering CP^1.

    Includes both poles; the rest are spiral points of the Riemann sphere.
    """
    pts = [ProjPoint(1.0, 0.0), ProjPoint(0.0, 1.0)]
    k = count - 2
    for i in range(k):
        # Fibonacci-style spiral on the sphere, mapped to C by stereographic
        # projection from the north pole.
        cos_t = -1.0 + 2.0 * (i + 0.5) / k
        sin_t = np.sqrt(max(0.0, 1.0 - cos_t * cos_t))
        phi = i * 2.399963229728653
        if 1.0 - cos_t < 1e-12:
            pts.append(ProjPoint(0.0, 1.0))
            continue
        z = (sin_t / (1.0 - cos_t)) * np.exp(1j * phi)
        pts.append(ProjPoint(1.0, z))
    return pts[:count]


def random_point(rng: np.random.Generator) -> ProjPoint:
    """A projective point from a rotation-invariant-ish Gaussian draw."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return ProjPoint(v[0], v[1])


def rank_one_column_space(m: np.ndarray, rank_tol: float = PROJ_TOL,
                          norm_tol: float = NORM_TOL):
    """Column space of a numerically rank-1 2x2 matrix.

    Returns ``(point, sigma1, sigma2)`` with ``point`` the ProjPoint
    spanning the column space, or ``(None, sigma1, sigma2)`` when the
    matrix is not rank 1.  Two closed-form tests run: one on the
    top-normalized matrix (a pass means the returned direction is
    projectively accurate within the tolerance), and one on the
    row/column-equilibrated matrix (a pass sees structural rank-1 behind
    exponential frame anisotropy; a noise-level row fails it harmlessly
    because the other test already accepted).
    """
    m = np.asarray(m, dtype=complex)
    top = np.abs(m).max()
    if top < norm_tol:
        return None, 0.0, 0.0

    def closed_form(mm):
        g = mm @ mm.conj().T
        p, q = g[0, 0].real, g[1, 1].real
        r = g[0, 1]
        mean = 0.5 * (p + q)
        # Dominant eigenvalue (cancellation-free branch); the small
        # singular value via s1 s2 = |det| avoids squaring conditioning.
        disc = np.sqrt(max(0.25 * (p - q) ** 2 + abs(r) ** 2, 0.0))
        lam1 = mean + disc
        s1 = np.sqrt(max(lam1, 0.0))
        s2 = abs(np.linalg.det(mm)) / s1 if s1 > 0 else 0.0
        v1 = np.array([r, lam1 - p])
        v2 = np.array([lam1 - q, np.conj(r)])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        if np.linalg.norm(v) < norm_tol * max(s1, 1.0):
            v = np.array([1.0, 0.0]) if p >= q else np.array([0.0, 1.0])
        return s1, s2, v

    s1, s2, v = closed_form(m / top)
    if s1 >= norm_tol and s2 <= rank_tol * s1:
        return ProjPoint(v[0], v[1]), s1, s2

    rs = np.abs(m).max(axis=1)
    rs = np.where(rs > norm_tol * top, rs, top)
    mb = m / rs[:, None]
    cs = np.abs(mb).max(axis=0)
    cs = np.where(cs > norm_tol, cs, 1.0)
    s1b, s2b, vb = closed_form(mb / cs[None, :])
    if s1b >= norm_tol and s2b <= rank_tol * s1b:
        # Undo the row scaling: col space of m is D_r times that of mb.
        return ProjPoint(rs[0] * vb[0], rs[1] * vb[1]), s1b, s2b
    return None, s1, s2


def transport_direction(mat: np.ndarray, point: ProjPoint) -> ProjPoint:
    """Preimage of a direction under an invertible 2x2 matrix.

    Solves with row/column equilibration so exponential frame
    anisotropy does not destroy the projective answer.
    """
    m = np.asarray(mat, dtype=complex)
    r = np.abs(m).max(axis=1)
    m1 = m / r[:, None]
    c = np.abs(m1).max(axis=0)
    m2 = m1 / c[None, :]
    u = np.linalg.solve(m2, point.vec / r)
    return ProjPoint(u[0] / c[0], u[1] / c[1])
