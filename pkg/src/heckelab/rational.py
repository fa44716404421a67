"""Hecke modifications of rank-2 bundles on the projective line.

Bundles are split types O(n) + O(m); a modification at a point mu in a
direction of CP^1 moves between them.  Morphism representatives are 2x2
polynomial matrices in the coordinate z of the affine chart around 0,
composable along a sequence; the direction map reads composites back into
CP^1 coordinates, and the second chart certifies global regularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .projective import PROJ_TOL, ProjPoint, chordal
from .grassmannian import eta_at

#: Minimum separation of modification points within one sequence.
MIN_POINT_SEP = 1e-8


class NotGlobal(ValueError):
    """Chart conversion produced a negative power: not a bundle morphism."""


# ---------------------------------------------------------------------------
# Exact polynomial 2x2 matrices (ascending complex coefficients).


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    n = c.size
    while n > 1 and c[n - 1] == 0:
        n -= 1
    return c[:n]


class PolyMat2:
    """A 2x2 matrix of polynomials, exact over complex doubles."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        self.entries = tuple(
            tuple(_trim(np.atleast_1d(np.asarray(e, dtype=complex))) for e in row)
            for row in entries
        )

    @classmethod
    def identity(cls) -> "PolyMat2":
        return cls([[[1.0], [0.0]], [[0.0], [1.0]]])

    @classmethod
    def constant(cls, m) -> "PolyMat2":
        m = np.asarray(m, dtype=complex)
        return cls([[[m[0, 0]], [m[0, 1]]], [[m[1, 0]], [m[1, 1]]]])

    @classmethod
    def z_shift(cls, mu: complex) -> "PolyMat2":
        return cls([[[1.0], [0.0]], [[0.0], [-mu, 1.0]]])

    def __mul__(self, other: "PolyMat2") -> "PolyMat2":
        a, b = self.entries, other.entries
        return PolyMat2(
            [
                [
                    np.polyadd(
                        np.convolve(a[i][0], b[0][j])[::-1], np.convolve(a[i][1], b[1][j])[::-1]
                    )[::-1]
                    for j in range(2)
                ]
                for i in range(2)
            ]
        )

    def det(self) -> np.ndarray:
        e = self.entries
        d = np.polyadd(
            np.convolve(e[0][0], e[1][1])[::-1], -np.convolve(e[0][1], e[1][0])[::-1]
        )[::-1]
        return _trim(d)

    def __call__(self, z: complex) -> np.ndarray:
        return np.array(
            [[_polyval(self.entries[i][j], z) for j in range(2)] for i in range(2)]
        )

    def max_degree(self) -> int:
        return max(e.size - 1 for row in self.entries for e in row)

    def coeff_scale(self) -> float:
        return max(np.abs(e).max() for row in self.entries for e in row)

    def __repr__(self) -> str:
        return f"PolyMat2(deg<={self.max_degree()})"


def _polyval(c: np.ndarray, z: complex) -> complex:
    acc = 0.0 + 0.0j
    for v in c[::-1]:
        acc = acc * z + v
    return acc


# ---------------------------------------------------------------------------
# Bundles and transitions.


@dataclass(frozen=True)
class RationalBundle:
    """The split bundle O(n) + O(m), stored with n >= m."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < self.m:
            object.__setattr__(self, "n", self.m)
            object.__setattr__(self, "m", self.n)

    @property
    def hecke_length(self) -> int:
        return self.n - self.m

    @property
    def degree(self) -> int:
        return self.n + self.m

    def is_semistable(self) -> bool:
        return self.n == self.m

    def twist(self, k: int) -> "RationalBundle":
        return RationalBundle(self.n + k, self.m + k)

    def __str__(self) -> str:
        return f"O({self.n})+O({self.m})"


def single_hecke(b: RationalBundle, direction: ProjPoint) -> RationalBundle:
    """Class of the modified bundle, per the transition table.

    Normalized to (k, 0): semistable bundles always drop to (0, -1); for
    unstable ones the subbundle direction [1:0] raises the Hecke length
    and every other direction lowers it.
    """
    if b.is_semistable() or direction.is_zero_dir():
        return RationalBundle(b.n, b.m - 1)
    return RationalBundle(b.n - 1, b.m)


def branch_transition(b: RationalBundle, direction: ProjPoint) -> str:
    """Name of the transition-table row that ``single_hecke`` fires."""
    if b.is_semistable():
        return "semistable:any-direction"
    return "unstable:[1:0]" if direction.is_zero_dir() else "unstable:[lambda:1]"


@dataclass(frozen=True)
class RationalHeckeStep:
    """One modification: chart coordinate of the point, and the direction
    in the standard trivialization of the bundle being modified."""

    point: complex
    direction: ProjPoint


def default_points(n: int) -> list[complex]:
    return [(k + 1) / (n + 1) + 0.1j * (k + 1) for k in range(n)]


@dataclass(frozen=True)
class RationalSequence:
    """A sequence of Hecke modifications of the trivial bundle O + O."""

    steps: tuple[RationalHeckeStep, ...]
    base: RationalBundle = field(default_factory=lambda: RationalBundle(0, 0))

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        pts = [s.point for s in self.steps]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if abs(pts[i] - pts[j]) < MIN_POINT_SEP:
                    raise ValueError(f"points {pts[i]} and {pts[j]} coincide")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def points(self) -> list[complex]:
        return [s.point for s in self.steps]

    def bundles(self) -> list[RationalBundle]:
        """Intermediate classes E_0 .. E_n along the sequence."""
        out = [self.base]
        for s in self.steps:
            out.append(single_hecke(out[-1], s.direction))
        return out

    def terminal(self) -> RationalBundle:
        return self.bundles()[-1]

    def matrices(self) -> list[PolyMat2]:
        """Table morphism matrices, one per step."""
        out = []
        current = self.base
        for s in self.steps:
            out.append(morphism_matrix(current, s))
            current = single_hecke(current, s.direction)
        return out

    def composite(self) -> PolyMat2:
        p = PolyMat2.identity()
        for m in self.matrices():
            p = p * m
        return p

    def h_map(self) -> list[ProjPoint]:
        """Direction tuple in the trivialization of the base bundle."""
        return h_values(self.matrices(), self.points)


def morphism_matrix(b: RationalBundle, step: RationalHeckeStep) -> PolyMat2:
    """Table representative of the modification of ``b`` at ``step``.

    Matrices are invariant under twisting, so only the normalized type
    (k, 0) matters.  The determinant is a nonzero multiple of z - mu and
    the direction map returns ``step.direction`` at mu.
    """
    mu = step.point
    d = step.direction
    if b.is_semistable():
        if d.is_zero_dir():
            return PolyMat2([[[1.0], [0.0]], [[0.0], [-mu, 1.0]]])
        lam = d.a / d.c
        return PolyMat2([[[lam], [-mu, 1.0]], [[1.0], [0.0]]])
    if d.is_zero_dir():
        return PolyMat2([[[1.0], [0.0]], [[0.0], [-mu, 1.0]]])
    lam = d.a / d.c
    return PolyMat2([[[-mu, 1.0], [lam]], [[0.0], [1.0]]])


def h_values(matrices: list[PolyMat2], points: list[complex]) -> list[ProjPoint]:
    """h_i = eta of the composite of the first i matrices at the i-th point.

    Evaluated in factored form: the rank-1 column space is extracted from
    the final factor, where the degeneracy is structural and perfectly
    conditioned, and the invertible prefix transports the direction.
    """
    out = []
    for i, mu in enumerate(points):
        prefix = np.eye(2, dtype=complex)
        for mat in matrices[:i]:
            prefix = prefix @ mat(mu)
        local = eta_at(matrices[i](mu), mu)
        v = prefix @ local.vec
        out.append(ProjPoint(v[0], v[1]))
    return out


def chart_convert(
    alpha: PolyMat2, source: RationalBundle, target: RationalBundle, tol: float = 1e-12
) -> PolyMat2:
    """The matrix of the morphism in the chart at infinity.

    Entry (i, j) of the result is w^{dE_i} alpha_ij(1/w) w^{-dF_j} for the
    splitting degrees dE of ``target`` and dF of ``source``.  A coefficient
    on a negative power above ``tol`` (relative) means the polynomial data
    does not glue to a global morphism.
    """
    de = (target.n, target.m)
    df = (source.n, source.m)
    scale = max(alpha.coeff_scale(), 1.0)
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            c = alpha.entries[i][j]
            shift = de[i] - df[j]
            # Exponent of c[k] is shift - k, for k = 0 .. deg.
            lo = shift - (c.size - 1)
            hi = shift
            out = np.zeros(max(hi, 0) + 1, dtype=complex)
            for k, v in enumerate(c):
                e = shift - k
                if e < 0:
                    if abs(v) > tol * scale:
                        raise NotGlobal(
                            f"entry ({i},{j}) has w^{e} coefficient {v:.3e}"
                        )
                else:
                    out[e] += v
            row.append(out)
        rows.append(row)
    return PolyMat2(rows)


# ---------------------------------------------------------------------------
# Terminal type of an abstract direction tuple, and space membership.


def matrices_from_tuple(
    points: list[complex], dirs: list[ProjPoint]
) -> list[PolyMat2]:
    """Morphism matrices realizing a prescribed direction tuple.

    Step i uses any unit completion C of the transported direction
    P_{i-1}(mu_i)^{-1} a_i, so that eta of the composite at mu_i is a_i.
    The equivalence class of the sequence (hence every isomorphism
    invariant) depends only on the tuple.
    """
    mats = []
    for mu, a in zip(points, dirs):
        val = np.eye(2, dtype=complex)
        for mat in mats:
            val = val @ mat(mu)
        v = np.linalg.solve(val, a.vec)
        v = v / np.linalg.norm(v)
        c = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]])
        mats.append(PolyMat2.constant(c) * PolyMat2.z_shift(mu))
    return mats


def composite_from_tuple(points: list[complex], dirs: list[ProjPoint]) -> PolyMat2:
    p = PolyMat2.identity()
    for m in matrices_from_tuple(points, dirs):
        p = p * m
    return p


def min_column_degree(p: PolyMat2, tol: float = 1e-9) -> int:
    """Smallest d with a nonzero polynomial vector g, deg(P g) <= d.

    The composite of n modification matrices has splitting type
    (-d1, -(n - d1)) with d1 this minimum; the search is a nullspace test
    per candidate degree.
    """
    n = p.det().size - 1
    scale = p.coeff_scale()
    entries = [[c / scale for c in row] for row in p.entries]
    for d in range((n + 1) // 2 + 1):
        # Unknown g has degree <= d (adjugate bound); constraints kill the
        # coefficients of P g above degree d.
        unknowns = 2 * (d + 1)
        maxdeg = p.max_degree() + d
        rows = []
        for i in range(2):
            for t in range(d + 1, maxdeg + 1):
                row = np.zeros(unknowns, dtype=complex)
                for j in range(2):
                    c = entries[i][j]
                    for k in range(d + 1):
                        if 0 <= t - k < c.size:
                            row[j * (d + 1) + k] = c[t - k]
                rows.append(row)
        if not rows:
            return d
        a = np.array(rows)
        s = np.linalg.svd(a, compute_uv=False)
        if s.size < unknowns or s[unknowns - 1] < tol * max(s[0], 1.0):
            return d
    return (n + 1) // 2


def terminal_hecke_length(points: list[complex], dirs: list[ProjPoint]) -> int:
    """Hecke length of the terminal bundle of the tuple's sequence class."""
    n = len(dirs)
    if n == 0:
        return 0
    p = composite_from_tuple(points, dirs)
    d1 = min_column_degree(p)
    return n - 2 * d1


def membership_H(n: int, dirs: list[ProjPoint], points: list[complex] | None = None) -> bool:
    """True iff the tuple's terminal bundle has the minimum Hecke length
    (0 for n even, 1 for n odd)."""
    if len(dirs) != n:
        raise ValueError("need exactly n directions")
    if points is None:
        points = default_points(n)
    return terminal_hecke_length(points, dirs) == n % 2


def membership_H_closed_form(n: int, dirs: list[ProjPoint]) -> bool:
    """Closed-form complement descriptions, available for n <= 3."""
    if n == 0 or n == 1:
        return True
    if n == 2:
        return chordal(dirs[0], dirs[1]) >= PROJ_TOL
    if n == 3:
        return not (
            chordal(dirs[0], dirs[1]) < PROJ_TOL
            and chordal(dirs[1], dirs[2]) < PROJ_TOL
        )
    raise ValueError("closed forms cover n <= 3 only")


def random_minimal_sequence(
    n: int,
    rng: np.random.Generator,
    points: list[complex] | None = None,
    zero_dir_rate: float = 0.25,
) -> RationalSequence:
    """A random sequence whose terminal bundle has minimal Hecke length.

    From a semistable class every direction raises the length (draw any
    direction, occasionally the distinguished [1:0]); from an unstable
    class only non-[1:0] directions lower it, so those are forced.
    """
    if points is None:
        points = default_points(n)
    steps = []
    current = RationalBundle(0, 0)
    for mu in points:
        if current.is_semistable() and rng.random() < zero_dir_rate:
            d = ProjPoint(1.0, 0.0)
        else:
            lam = rng.normal() + 1j * rng.normal()
            d = ProjPoint(lam, 1.0)
        steps.append(RationalHeckeStep(mu, d))
        current = single_hecke(current, d)
    return RationalSequence(tuple(steps))
