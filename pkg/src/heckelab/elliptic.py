"""Hecke modifications of rank-2 bundles on the complex torus.

Bundles are described by factors of automorphy; morphisms between them by
theta-valued 2x2 matrix functions.  Line-bundle data carries an *exact*
complex lift of its Abel-Jacobi point, not just the class: the lift pins
the standard trivialization, which is what makes morphism matrices of
consecutive modifications directly composable.  Class-level comparisons
reduce lifts modulo the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .projective import PROJ_TOL, ProjPoint, chordal, transport_direction
from .grassmannian import eta_at
from .torus import CurvePoint, Lattice, halve_sum
from . import theta as th

TWO_PI_I = 2j * np.pi

#: Tolerance for bundle-class (twist) comparisons.
CLASS_TOL = 1e-6

#: Chordal tolerance for membership in the embedded curve f(X).
CURVE_TOL = 1e-6


class NotSemistable(ValueError):
    """Operation requires a semistable bundle (Hecke length 0)."""


class RowNotFound(ValueError):
    """Direction/bundle combination outside the morphism table."""


class Unsupported(ValueError):
    """Requested an exact computation outside the n <= 2 range."""


# ---------------------------------------------------------------------------
# Line bundle classes with pinned trivializations.


@dataclass(frozen=True)
class LineBundleClass:
    """Degree-d line bundle O((d-1)[0] + [t]) with an exact lift of t.

    Two instances with lifts differing by a lattice vector are isomorphic
    bundles but carry different standard trivializations; ``same_class``
    compares modulo the lattice, everything frame-sensitive uses ``lift``
    as given.
    """

    degree: int
    lift: complex
    lattice: Lattice

    def factor(self) -> Callable:
        """Standard automorphy factor exp(-2 pi i (d z - t - d/2))."""
        d, t = self.degree, self.lift

        def f(z):
            return np.exp(-TWO_PI_I * (d * np.asarray(z, dtype=complex) - t - d / 2))

        return f

    def tensor(self, other: "LineBundleClass") -> "LineBundleClass":
        return LineBundleClass(self.degree + other.degree, self.lift + other.lift, self.lattice)

    def inverse(self) -> "LineBundleClass":
        return LineBundleClass(-self.degree, -self.lift, self.lattice)

    def same_class(self, other: "LineBundleClass", tol: float = CLASS_TOL) -> bool:
        return (
            self.degree == other.degree
            and self.lattice.distance(self.lift, other.lift) < tol
        )

    def is_trivial(self, tol: float = CLASS_TOL) -> bool:
        return self.degree == 0 and self.lattice.distance(self.lift, 0.0) < tol

    def twist_point(self) -> CurvePoint:
        return CurvePoint(self.lift, self.lattice)

    def reduced(self) -> complex:
        return self.lattice.reduce(self.lift)


def trivial_line(lattice: Lattice) -> LineBundleClass:
    return LineBundleClass(0, 0.0, lattice)


def point_line(p: CurvePoint) -> LineBundleClass:
    """O(p), trivialized with the lift of p."""
    return LineBundleClass(1, p.lift, p.lattice)


def torsion_line(lattice: Lattice, i: int) -> LineBundleClass:
    """The 2-torsion bundle L_i = O([z_i] - [0]), i in 1..4."""
    return LineBundleClass(0, lattice.torsion_lifts()[i - 1], lattice)


# ---------------------------------------------------------------------------
# Rank-2 bundles.


@dataclass(frozen=True)
class Decomposable:
    """L1 + L2 in the stored order (the order is part of the frame)."""

    l1: LineBundleClass
    l2: LineBundleClass

    @property
    def lattice(self) -> Lattice:
        return self.l1.lattice

    @property
    def hecke_length(self) -> int:
        return abs(self.l1.degree - self.l2.degree)

    def det_class(self) -> LineBundleClass:
        return self.l1.tensor(self.l2)

    def tensor(self, l: LineBundleClass) -> "Decomposable":
        return Decomposable(self.l1.tensor(l), self.l2.tensor(l))

    def factor(self) -> Callable:
        f1, f2 = self.l1.factor(), self.l2.factor()

        def f(z):
            z = np.asarray(z, dtype=complex)
            out = np.zeros(z.shape + (2, 2), dtype=complex)
            out[..., 0, 0] = f1(z)
            out[..., 1, 1] = f2(z)
            return out

        return f

    def __str__(self) -> str:
        return f"O[{self.l1.degree},{self.l1.reduced():.4f}]+O[{self.l2.degree},{self.l2.reduced():.4f}]"


@dataclass(frozen=True)
class F2Twist:
    """F2 tensor L: the nontrivial self-extension of O, twisted."""

    l: LineBundleClass

    @property
    def lattice(self) -> Lattice:
        return self.l.lattice

    hecke_length = 0

    def det_class(self) -> LineBundleClass:
        return self.l.tensor(self.l)

    def tensor(self, l: LineBundleClass) -> "F2Twist":
        return F2Twist(self.l.tensor(l))

    def factor(self) -> Callable:
        fl = self.l.factor()

        def f(z):
            z = np.asarray(z, dtype=complex)
            out = np.zeros(z.shape + (2, 2), dtype=complex)
            v = fl(z)
            out[..., 0, 0] = v
            out[..., 0, 1] = v
            out[..., 1, 1] = v
            return out

        return f

    def __str__(self) -> str:
        return f"F2x[{self.l.degree},{self.l.reduced():.4f}]"


@dataclass(frozen=True)
class G2Twist:
    """G2(p) tensor L: the degree-1 extension of O(p) by O, twisted.

    ``point_lift`` is an exact lift of p, part of the trivialization.
    """

    point_lift: complex
    l: LineBundleClass

    @property
    def lattice(self) -> Lattice:
        return self.l.lattice

    hecke_length = 1

    def det_class(self) -> LineBundleClass:
        base = LineBundleClass(1, self.point_lift, self.lattice)
        return base.tensor(self.l).tensor(self.l)

    def tensor(self, l: LineBundleClass) -> "G2Twist":
        return G2Twist(self.point_lift, self.l.tensor(l))

    def factor(self) -> Callable:
        fl = self.l.factor()
        fw = th.automorphy_factor(self.point_lift + 0.5)

        def f(z):
            z = np.asarray(z, dtype=complex)
            out = np.zeros(z.shape + (2, 2), dtype=complex)
            v = fl(z)
            out[..., 0, 1] = v
            out[..., 1, 0] = v * fw(z)
            return out

        return f

    def __str__(self) -> str:
        return f"G2({self.lattice.reduce(self.point_lift):.4f})x[{self.l.degree},{self.l.reduced():.4f}]"


EllipticBundle = Decomposable | F2Twist | G2Twist


def automorphy(b: EllipticBundle) -> Callable:
    """Standard factor of automorphy of the stored presentation of ``b``."""
    return b.factor()


def is_semistable(b: EllipticBundle) -> bool:
    """Slope semistability: everything except split types of unequal
    degrees.  G2 twists are stable; they still have Hecke length 1 because
    the nearest even-degree semistable class is one modification away."""
    if isinstance(b, Decomposable):
        return b.l1.degree == b.l2.degree
    return True


def is_even_semistable(b: EllipticBundle) -> bool:
    """Semistable of even degree: Hecke length zero."""
    return b.hecke_length == 0


def has_trivial_det(b: EllipticBundle, tol: float = CLASS_TOL) -> bool:
    return b.det_class().is_trivial(tol)


def s_class(b: EllipticBundle):
    """S-equivalence data of a semistable bundle: the unordered pair of
    graded line-bundle classes."""
    if isinstance(b, Decomposable):
        if b.l1.degree != b.l2.degree:
            raise NotSemistable(f"{b} is unstable")
        return _sorted_pair(b.l1, b.l2)
    if isinstance(b, F2Twist):
        return _sorted_pair(b.l, b.l)
    raise NotSemistable("G2 twists are stable, not strictly semistable")


def _sorted_pair(a: LineBundleClass, b: LineBundleClass):
    ka = (a.degree, round(a.reduced().real, 6), round(a.reduced().imag, 6))
    kb = (b.degree, round(b.reduced().real, 6), round(b.reduced().imag, 6))
    return (a, b) if ka <= kb else (b, a)


def s_equivalent(b1: EllipticBundle, b2: EllipticBundle, tol: float = CLASS_TOL) -> bool:
    p1, p2 = s_class(b1), s_class(b2)
    direct = p1[0].same_class(p2[0], tol) and p1[1].same_class(p2[1], tol)
    crossed = p1[0].same_class(p2[1], tol) and p1[1].same_class(p2[0], tol)
    return direct or crossed


def g2_isomorphic(b1: G2Twist, b2: G2Twist, tol: float = CLASS_TOL) -> bool:
    """Stable bundles of odd degree are classified by their determinant;
    in particular twisting by L fixes the class exactly when L is its own
    inverse."""
    return b1.det_class().same_class(b2.det_class(), tol)


# ---------------------------------------------------------------------------
# Morphism representatives.


MatFn = Callable[[np.ndarray], np.ndarray]


def _matfn(e00, e01, e10, e11) -> MatFn:
    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = e00(z)
        out[..., 0, 1] = e01(z)
        out[..., 1, 0] = e10(z)
        out[..., 1, 1] = e11(z)
        return out

    return f


def _const(v: complex):
    def f(z):
        return np.full(np.asarray(z).shape, v, dtype=complex)

    return f


def _compose(phi: MatFn | None, mat: MatFn) -> MatFn:
    if phi is None:
        return mat

    def f(z):
        return phi(z) @ mat(z)

    return f


@dataclass(frozen=True)
class EllipticStep:
    """One modification: the point and the direction in the standard
    trivialization of the bundle being modified."""

    point: CurvePoint
    direction: ProjPoint


@dataclass(frozen=True)
class MorphismRep:
    """Matrix representative alpha: F -> E of a Hecke modification.

    ``evaluator`` maps arrays of z to (..., 2, 2) matrices in the stored
    trivializations of ``upstream`` (E) and ``result`` (F); equivariance
    intertwines result-side and upstream-side automorphy factors.
    """

    evaluator: MatFn
    row: str
    upstream: EllipticBundle
    result: EllipticBundle
    point: CurvePoint


def check_equivariance(rep: MorphismRep, samples: int = 20, seed: int = 5) -> float:
    """Max relative residual of the two automorphy intertwining laws.

    Checks alpha(z + tau) f_F(z) = f_E(z) alpha(z) and plain 1-periodicity
    over seeded random z in a doubled fundamental box.
    """
    lat = rep.upstream.lattice
    rng = np.random.default_rng(seed)
    z = (2 * rng.random(samples) - 0.5) + (2 * rng.random(samples) - 0.5) * lat.tau
    a_z = rep.evaluator(z)
    a_tau = rep.evaluator(z + lat.tau)
    a_one = rep.evaluator(z + 1.0)
    f_e = rep.upstream.factor()(z)
    f_f = rep.result.factor()(z)
    lhs = a_tau @ f_f
    rhs = f_e @ a_z
    scale = max(float(np.abs(rhs).max()), float(np.abs(a_z).max()), 1e-30)
    r1 = float(np.abs(lhs - rhs).max()) / scale
    r2 = float(np.abs(a_one - a_z).max()) / max(float(np.abs(a_z).max()), 1e-30)
    return max(r1, r2)


def _theta_const(lattice: Lattice) -> complex:
    """-(i/2pi) theta'^{(0)}(0): the direction constant of the F2 row."""
    return complex(-th.g_theta_w(0.0, 0.0, lattice))


def _transport(phi_at_p: np.ndarray | None, a: ProjPoint) -> ProjPoint:
    if phi_at_p is None:
        return a
    return transport_direction(phi_at_p, a)


def _scalar_shift(n: int) -> MatFn | None:
    """diag(exp(2 pi i n z), 1): frame change absorbing a lattice shift
    n*tau of the first summand's trivializing lift."""
    if n == 0:
        return None

    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = np.exp(TWO_PI_I * n * z)
        out[..., 1, 1] = 1.0
        return out

    return f


def _swap_then(phi: MatFn | None) -> MatFn:
    swap = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

    def f(z):
        z = np.asarray(z, dtype=complex)
        base = np.broadcast_to(swap, z.shape + (2, 2)).copy()
        if phi is None:
            return base
        return base @ phi(z)

    return f


def morphism_rep(e: EllipticBundle, p: CurvePoint, a: ProjPoint) -> MorphismRep:
    """Table representative of the modification of ``e`` at ``p`` toward ``a``.

    The bundle is rewritten as (table form) tensor M; matrices are
    twist-invariant, so only the frame change between the stored and table
    presentations (a swap, a scalar exponential, or a constant diagonal
    for moving the G2 point) dresses the table matrix.  The direction is
    transported through the same frame change before dispatch.
    """
    if isinstance(e, Decomposable):
        return _morphism_dec(e, p, a)
    if isinstance(e, F2Twist):
        return _morphism_f2(e, p, a)
    return _morphism_g2(e, p, a)


def _morphism_dec(e: Decomposable, p: CurvePoint, a: ProjPoint) -> MorphismRep:
    lat = e.lattice
    pt = p.lift
    swap = e.l1.degree < e.l2.degree
    u1, u2 = (e.l2, e.l1) if swap else (e.l1, e.l2)
    m = u2
    lp = u1.tensor(u2.inverse())  # degree k >= 0, exact lift
    k, t = lp.degree, lp.lift

    def make_frame(lift_shift: complex | None) -> tuple[MatFn | None, np.ndarray | None]:
        """Frame change table -> stored: a scalar-exponential lift fix on
        the first summand followed by the order swap, as needed."""
        phi = None
        if lift_shift is not None:
            n = round(lift_shift.imag / lat.tau.imag)
            phi = _scalar_shift(n)
        if swap:
            phi = _swap_then(phi)
        return phi, (None if phi is None else phi(np.asarray(pt)))

    phi, phi_at_p = make_frame(None)

    def finish(row, mat, target):
        return MorphismRep(_compose(phi, mat), row, e, target, p)

    a_t = _transport(phi_at_p, a)

    if k == 0 and lat.distance(t, 0.0) < CLASS_TOL:
        phi, phi_at_p = make_frame(t)
        a_t = _transport(phi_at_p, a)
        # O + O: every direction is bad; two matrix shapes.
        if a_t.is_zero_dir():
            mat = _matfn(_const(1.0), _const(0.0), _const(0.0),
                         lambda z: th.theta_w(z, pt, lat))
            row = "OO:[1:0]"
        else:
            lam = a_t.a / a_t.c
            mat = _matfn(_const(lam), lambda z: th.theta_w(z, pt, lat),
                         _const(1.0), _const(0.0))
            row = "OO:[lam:1]"
        target = Decomposable(LineBundleClass(0, 0.0, lat).tensor(m),
                              LineBundleClass(-1, -pt, lat).tensor(m))
        return finish(row, mat, target)

    if k == 0:
        # O(p - q) + O with q = p - t; strictly semistable, t nontrivial.
        w = t
        q_lift = pt - w
        if a_t.is_zero_dir():
            mat = _matfn(_const(1.0), _const(0.0), _const(0.0),
                         lambda z: th.theta_w(z, pt, lat))
            target = Decomposable(u1, LineBundleClass(-1, -pt, lat).tensor(m))
            return finish("ss:[1:0]", mat, target)
        if a_t.is_infinity_dir():
            mat = _matfn(lambda z: th.theta_w(z, pt, lat), _const(0.0),
                         _const(0.0), _const(1.0))
            target = Decomposable(LineBundleClass(-1, -q_lift, lat).tensor(m), m)
            return finish("ss:[0:1]", mat, target)
        sa = a_t.a / complex(th.theta_tilde_w(q_lift - pt, 0.5 - lat.tau, lat))
        sb = a_t.c / complex(th.theta_tilde_w(pt - q_lift, 0.5 - lat.tau, lat))
        e2w = np.exp(TWO_PI_I * w)
        mat = _matfn(
            lambda z: sa * th.theta_tilde_w(z, pt + w + 0.5 - lat.tau, lat),
            lambda z: -sa * e2w * th.theta_tilde_w(z, pt + w + 0.5, lat),
            lambda z: sb * th.theta_tilde_w(z, pt - w + 0.5 - lat.tau, lat),
            lambda z: -sb * th.theta_tilde_w(z, pt - w + 0.5, lat),
        )
        target = G2Twist(q_lift, LineBundleClass(-1, -q_lift, lat).tensor(m))
        return finish("ss:[x:y]", mat, target)

    if k == 1 and lat.distance(t, pt) < CLASS_TOL:
        phi, phi_at_p = make_frame(t - pt)
        a_t = _transport(phi_at_p, a)
        # O(p) + O at its own point.
        if a_t.is_zero_dir():
            mat = _matfn(_const(1.0), _const(0.0), _const(0.0),
                         lambda z: th.theta_w(z, pt, lat))
            target = Decomposable(LineBundleClass(1, pt, lat).tensor(m),
                                  LineBundleClass(-1, -pt, lat).tensor(m))
            return finish("Op:[1:0]", mat, target)
        if a_t.is_infinity_dir():
            mat = _matfn(lambda z: th.theta_w(z, pt, lat), _const(0.0),
                         _const(0.0), _const(1.0))
            target = Decomposable(LineBundleClass(0, 0.0, lat).tensor(m), m)
            return finish("Op:[0:1]", mat, target)
        kappa = _theta_const(lat)
        scale = a_t.c * kappa / a_t.a
        mat = _matfn(
            lambda z: th.theta_w(z, pt, lat),
            lambda z: -th.g_theta_w(z, pt, lat),
            _const(0.0),
            _const(scale),
        )
        return finish("Op:[x:y]", mat, F2Twist(m))

    # O(D) + O for deg D = k >= 1 with D's point distinct from p (k = 1)
    # or arbitrary (k >= 2; the theta product uses (k-1) [0] + the twist).
    if a_t.is_zero_dir():
        mat = _matfn(_const(1.0), _const(0.0), _const(0.0),
                     lambda z: th.theta_w(z, pt, lat))
        target = Decomposable(u1, LineBundleClass(-1, -pt, lat).tensor(m))
        row = "OD:[1:0]" if k > 1 else "Oq:[1:0]"
        return finish(row, mat, target)
    # The table family is lambda * (theta product); its direction at p is
    # [lambda * product(p) : 1], so hitting the requested direction means
    # dividing out the product's value at p.
    denom = complex(th.theta_w(pt, t, lat))
    if k > 1:
        denom *= complex(th.theta_w(pt, 0.0, lat)) ** (k - 1)
    lam = (a_t.a / a_t.c) / denom

    def theta_product(z):
        acc = th.theta_w(z, t, lat)
        if k > 1:
            acc = acc * th.theta_w(z, 0.0, lat) ** (k - 1)
        return lam * acc

    mat = _matfn(lambda z: th.theta_w(z, pt, lat), theta_product,
                 _const(0.0), _const(1.0))
    target = Decomposable(LineBundleClass(k - 1, t - pt, lat).tensor(m), m)
    row = "OD:[lam:1]" if k > 1 else "Oq:[lam:1]"
    return finish(row, mat, target)


def _morphism_f2(e: F2Twist, p: CurvePoint, a: ProjPoint) -> MorphismRep:
    lat = e.lattice
    pt = p.lift
    m = e.l
    if a.is_zero_dir():
        mat = _matfn(_const(1.0), lambda z: th.g_theta_w(z, pt, lat),
                     _const(0.0), lambda z: th.theta_w(z, pt, lat))
        target = Decomposable(m, LineBundleClass(-1, -pt, lat).tensor(m))
        return MorphismRep(mat, "F2:[1:0]", e, target, p)
    lam = a.a / a.c
    lam_p = lam - 2 * complex(th.g_tilde_w(0.0, 0.5, lat))
    c = pt - 0.5
    ct = c - lat.tau
    i_pi = 1j / np.pi
    mat = _matfn(
        lambda z: (1 - lam_p) * th.theta_tilde_w(z, ct, lat)
        - i_pi * th.theta_tilde_w_deriv(z, ct, lat),
        lambda z: lam_p * th.theta_tilde_w(z, c, lat)
        + i_pi * th.theta_tilde_w_deriv(z, c, lat),
        lambda z: -th.theta_tilde_w(z, ct, lat),
        lambda z: th.theta_tilde_w(z, c, lat),
    )
    target = G2Twist(pt, LineBundleClass(-1, -pt, lat).tensor(m))
    return MorphismRep(mat, "F2:[lam:1]", e, target, p)


def _morphism_g2(e: G2Twist, p: CurvePoint, a: ProjPoint) -> MorphismRep:
    lat = e.lattice
    pt = p.lift
    # Rewrite G2(p') tensor N as G2(p) tensor M; the exact half-difference
    # lift makes the frame change a constant diagonal.
    m = LineBundleClass(e.l.degree, e.l.lift + (e.point_lift - pt) / 2, lat)
    d2 = np.exp(1j * np.pi * (e.point_lift - pt))
    phi_const = np.array([[1.0, 0.0], [0.0, d2]], dtype=complex)
    moved = abs(e.point_lift - pt) > 1e-14

    def phi(z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(phi_const, z.shape + (2, 2)).copy()

    phi_fn: MatFn | None = phi if moved else None
    a_t = _transport(phi_const if moved else None, a)

    idx = th.branch_index(a_t, lat)
    if idx is not None:
        zi = lat.torsion_lifts()[idx - 1]
        c = pt - 2 * zi + 0.5
        ct = c - lat.tau
        ei = np.exp(TWO_PI_I * zi)
        i_pi = 1j / np.pi
        mat = _matfn(
            lambda z: th.theta_tilde_w(z, c, lat),
            lambda z: -i_pi * th.theta_tilde_w_deriv(z, c, lat),
            lambda z: ei * th.theta_tilde_w(z, ct, lat),
            lambda z: ei * (th.theta_tilde_w(z, ct, lat)
                            - i_pi * th.theta_tilde_w_deriv(z, ct, lat)),
        )
        target = F2Twist(torsion_line(lat, idx).tensor(m))
        return MorphismRep(_compose(phi_fn, mat), f"G2:a{idx}", e, target, p)

    root, _ = th.invert_cover(a_t, lat)
    # Any exact lift of the root works if used consistently in the
    # characters, the exponentials, and the target twists; the centered
    # lift keeps the doubled arguments +-2w numerically balanced.
    w = lat.reduce_centered(root.lift)
    e2w = np.exp(TWO_PI_I * w)
    mat = _matfn(
        lambda z: th.theta_tilde_w(z, pt - 2 * w + 0.5, lat),
        lambda z: th.theta_tilde_w(z, pt + 2 * w + 0.5, lat),
        lambda z: e2w * th.theta_tilde_w(z, pt - 2 * w + 0.5 - lat.tau, lat),
        lambda z: th.theta_tilde_w(z, pt + 2 * w + 0.5 - lat.tau, lat) / e2w,
    )
    target = Decomposable(LineBundleClass(0, w, lat).tensor(m),
                          LineBundleClass(0, -w, lat).tensor(m))
    return MorphismRep(_compose(phi_fn, mat), "G2:good", e, target, p)


def single_hecke(e: EllipticBundle, p: CurvePoint, a: ProjPoint) -> EllipticBundle:
    """Class of the modified bundle: the table transition.

    Delegates to the morphism constructor so the class-level table and the
    matrix-level table cannot drift apart.
    """
    return morphism_rep(e, p, a).result


# ---------------------------------------------------------------------------
# Two-step classification, moduli coordinates, and the total direction map.


def l_of_direction(a: ProjPoint, lattice: Lattice) -> LineBundleClass:
    """L(a): a degree-0 class with cover coordinate ``a``.

    The two fiber points give inverse classes; the lexicographically
    smaller canonical lift is chosen (class-level consumers must not
    depend on the choice) and recorded with its centered lift, which
    keeps downstream theta arguments balanced.
    """
    root, _ = th.invert_cover(a, lattice)
    return LineBundleClass(0, lattice.reduce_centered(root.lift), lattice)


def mss_coordinate(e: EllipticBundle) -> ProjPoint:
    """Coordinate of the S-equivalence class in the semistable moduli line.

    [L + L^{-1}] maps to the cover image of the twist of L; an F2 twist
    maps like its S-equivalent L + L.
    """
    if not is_even_semistable(e) or not has_trivial_det(e):
        raise NotSemistable(f"{e} is not semistable with trivial determinant")
    if isinstance(e, Decomposable):
        return th.pi_cover(e.l1.twist_point())
    if isinstance(e, F2Twist):
        return th.pi_cover(e.l.twist_point())
    raise NotSemistable("G2 twists have Hecke length 1")


def _stable_first_class(
    e: EllipticBundle, p1: CurvePoint, p2: CurvePoint, a: ProjPoint, b: ProjPoint
) -> EllipticBundle:
    """E2 tensor O(e) when the first modification is in a good direction.

    The intermediate bundle is stable, so the composite coordinate b must
    be transported back through the first-step representative before the
    single-modification table can classify the second step; the composite
    and intrinsic coordinates differ by the Moebius action of the
    first-step matrix at p2 (they agree only along unstable intermediates,
    where repeated subbundle modifications keep the coordinate constant).
    """
    lat = e.lattice
    rep1 = morphism_rep(e, p1, a)
    aval = rep1.evaluator(np.asarray(p2.lift))
    second = single_hecke(rep1.result, p2, transport_direction(aval, b))
    out = second.tensor(LineBundleClass(1, halve_sum(p1, p2).lift, lat))
    if not is_even_semistable(out):
        raise AssertionError("modification of a stable bundle must be semistable")
    return out


def double_hecke(
    e: EllipticBundle,
    p1: CurvePoint,
    p2: CurvePoint,
    a: ProjPoint,
    b: ProjPoint,
) -> EllipticBundle | None:
    """Classify a two-step modification of a semistable trivial-determinant
    bundle by its composite direction pair in the trivialization of ``e``.

    Returns the class of E2 tensor O(e) for e with 2e = p1 + p2 (the
    canonical-lift average), or None when E2 is unstable.  The dispatch
    includes the 2-torsion subcases where the twist point collides with a
    half-lattice translate of p1 or p2.
    """
    lat = e.lattice
    if not is_even_semistable(e) or not has_trivial_det(e):
        raise NotSemistable(f"{e} is not semistable with trivial determinant")
    if p1 == p2:
        raise ValueError("modification points must be distinct")
    ept = halve_sum(p1, p2)
    e1 = LineBundleClass(1, ept.lift, lat)

    if isinstance(e, F2Twist):
        li = e.l
        if a.is_zero_dir():
            # Bad first direction: unstable intermediate.
            if b.is_zero_dir():
                return None
            return Decomposable(
                e1.tensor(point_line(p1).inverse()).tensor(li),
                e1.tensor(point_line(p2).inverse()).tensor(li),
            )
        return _stable_first_class(e, p1, p2, a, b)

    delta = e.l1  # degree 0 with l2 the inverse class, by the precondition
    ti = delta.twist_point().torsion_index()
    if ti is not None:
        # (O + O) tensor L_i: every direction is bad; a = b is terminal-unstable.
        li = torsion_line(lat, ti)
        if chordal(a, b) < PROJ_TOL:
            return None
        return Decomposable(
            e1.tensor(point_line(p1).inverse()).tensor(li),
            e1.tensor(point_line(p2).inverse()).tensor(li),
        )

    # O(p - e') + O(e' - p) block with p = e' + delta.
    p = ept + delta.twist_point()
    j = (p - p1).torsion_index()
    k = (p - p2).torsion_index()

    def dec_pair(q: CurvePoint) -> Decomposable:
        d = p - q
        return Decomposable(LineBundleClass(0, d.lift, lat),
                            LineBundleClass(0, -d.lift, lat))

    if a.is_infinity_dir():
        if j is not None:
            if b.is_infinity_dir():
                return None
            if b.is_zero_dir():
                lj = torsion_line(lat, j)
                return Decomposable(lj, lj)
            return F2Twist(torsion_line(lat, j))
        if b.is_infinity_dir():
            return None
        return dec_pair(p1)
    if a.is_zero_dir():
        if k is not None:
            if b.is_zero_dir():
                return None
            if b.is_infinity_dir():
                lk = torsion_line(lat, k)
                return Decomposable(lk, lk)
            return F2Twist(torsion_line(lat, k))
        if b.is_zero_dir():
            return None
        return dec_pair(p2)
    return _stable_first_class(e, p1, p2, a, b)


@dataclass(frozen=True)
class MarkedBundle:
    """A parabolically stable pair (E, line at q), trivial determinant."""

    bundle: EllipticBundle
    q: CurvePoint
    line: ProjPoint

    def __post_init__(self):
        if not is_even_semistable(self.bundle) or not has_trivial_det(self.bundle):
            raise NotSemistable(f"{self.bundle} cannot carry a stable mark")
        if bad_group_key(self.bundle, self.line) is not None:
            raise ValueError(f"line {self.line} is a bad direction of {self.bundle}")


def bad_group_key(e: EllipticBundle, direction: ProjPoint):
    """Grouping key when the direction is bad for ``e``, else None.

    Directions bad in the same direction (witnessed by one maximal-slope
    subbundle) share a key.
    """
    if isinstance(e, G2Twist):
        return None
    if isinstance(e, F2Twist):
        return "sub" if direction.is_zero_dir() else None
    if e.l1.degree != e.l2.degree:
        raise NotSemistable(f"{e} is unstable")
    if e.l1.same_class(e.l2):
        # Every direction is the fiber of a constant subbundle; two marks
        # share a subbundle exactly when the directions are equal.
        return ("dir", direction)
    if direction.is_zero_dir():
        return "sub1"
    if direction.is_infinity_dir():
        return "sub2"
    return None


def sequence_evaluators(base: EllipticBundle, steps) -> tuple[list, list[EllipticBundle]]:
    """Chained morphism representatives for stepwise direction data.

    Step directions are in the standard trivialization of the bundle they
    modify; the stored-frame convention makes consecutive evaluators
    directly composable.
    """
    evs = []
    bundles = [base]
    current = base
    for s in steps:
        rep = morphism_rep(current, s.point, s.direction)
        evs.append(rep.evaluator)
        current = rep.result
        bundles.append(current)
    return evs, bundles


def raw_directions(evs, points: list[CurvePoint]) -> list[ProjPoint]:
    """Directions of each step in the base trivialization: eta of the
    composite evaluator at each point.

    The composite is evaluated in factored form: the rank-1 extraction
    happens on the final factor (exactly singular there) and the invertible
    prefix transports the direction vector, which avoids amplifying the
    extraction through ill-conditioned products.
    """
    out = []
    for i, pnt in enumerate(points):
        prefix = np.eye(2, dtype=complex)
        for ev in evs[:i]:
            prefix = prefix @ ev(np.asarray(pnt.lift))
        local = eta_at(evs[i](np.asarray(pnt.lift)), pnt.lift)
        v = prefix @ local.vec
        out.append(ProjPoint(v[0], v[1]))
    return out


def h_total(base: MarkedBundle, steps) -> list[ProjPoint]:
    """The n+1 moduli coordinates of a sequence on a marked bundle.

    Coordinate 0 is the class of the base bundle; coordinate i >= 1 is the
    class (twisted back to trivial determinant) of the two-step
    modification of the base at (p_i, q) in the directions read off the
    composed sequence and the mark.
    """
    steps = list(steps)
    pts = [s.point for s in steps]
    for i, pnt in enumerate(pts):
        if pnt == base.q:
            raise ValueError("modification points must avoid the marked point")
        for other in pts[i + 1:]:
            if pnt == other:
                raise ValueError("modification points must be pairwise distinct")
    out = [mss_coordinate(base.bundle)]
    evs, _ = sequence_evaluators(base.bundle, steps)
    dirs = raw_directions(evs, pts)
    for pnt, d in zip(pts, dirs):
        # Reinterpreted two-step sequence: the mark modification first.
        # Its composite coordinates are (mark line, d_i): line data is
        # order-independent under the canonical parabolic correspondence.
        cls = double_hecke(base.bundle, base.q, pnt, base.line, d)
        if cls is None:
            raise AssertionError("mark direction is good; E2 cannot be unstable")
        out.append(mss_coordinate(cls))
    return out


def f_embedding(
    p: CurvePoint, q: CurvePoint, p1: CurvePoint, p2: CurvePoint
) -> tuple[ProjPoint, ProjPoint, ProjPoint]:
    """The embedded curve of unstable-terminal classes for n = 2.

    Component i is the cover image of p shifted by e_i = (q + p_i)/2 data:
    pi_1 = cover(p - e_1), pi_2 = cover(p - p_1),
    pi_3 = cover(p - p_2 + e_2 - e_1).
    """
    e1 = halve_sum(q, p1)
    e2 = halve_sum(q, p2)
    return (
        th.pi_cover(p - e1),
        th.pi_cover(p - p1),
        th.pi_cover(p - p2 + e2 - e1),
    )


def distance_to_curve(
    triple, q: CurvePoint, p1: CurvePoint, p2: CurvePoint, grid: int = 16
) -> float:
    """Max-chordal distance from a (CP^1)^3 point to the embedded curve.

    Seeded by the best few separated samples of a vectorized grid of
    curve points, then Gauss-Newton on the real curve parameters from
    each seed.
    """
    lat = q.lattice

    def fval(u: float, v: float):
        return f_embedding(CurvePoint(u + v * lat.tau, lat), q, p1, p2)

    def dist(u, v):
        return max(chordal(x, y) for x, y in zip(fval(u, v), triple))

    # Vectorized grid scan: evaluate all three cover components on the
    # whole parameter grid at once.
    uu, vv = np.meshgrid((np.arange(grid) + 0.5) / grid, (np.arange(grid) + 0.5) / grid)
    zs = (uu + vv * lat.tau).ravel()
    e1 = halve_sum(q, p1)
    e2 = halve_sum(q, p2)
    shifts = (e1.lift, p1.lift, p2.lift - e2.lift + e1.lift)
    worst = np.zeros(zs.shape)
    for shift, target in zip(shifts, triple):
        den, num = th._cover_homogeneous(zs - shift, lat)
        cross = np.abs(den * target.c - num * target.a)
        cross /= np.hypot(np.abs(den), np.abs(num)) * np.hypot(
            abs(target.a), abs(target.c)
        )
        worst = np.maximum(worst, cross)
    order = np.argsort(worst)
    seeds = []
    for idx in order:
        z0 = zs[int(idx)]
        if all(lat.distance(z0, s) > 0.2 for s in seeds):
            seeds.append(z0)
        if len(seeds) == 3:
            break

    def residual(u, v):
        out = []
        for x, y in zip(fval(u, v), triple):
            c = (x.a * y.c - x.c * y.a) / (
                np.hypot(abs(x.a), abs(x.c)) * np.hypot(abs(y.a), abs(y.c))
            )
            out.extend([c.real, c.imag])
        return np.array(out)

    best = float(worst[order[0]])
    for z0 in seeds:
        x = np.array(lat.coords(z0))
        r = residual(*x)
        for _ in range(40):
            eps = 1e-6
            j0 = (residual(x[0] + eps, x[1]) - residual(x[0] - eps, x[1])) / (2 * eps)
            j1 = (residual(x[0], x[1] + eps) - residual(x[0], x[1] - eps)) / (2 * eps)
            jac = np.stack([j0, j1], axis=1)
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
            if not np.all(np.isfinite(step)):
                break
            # Backtracking keeps the iteration inside the right basin.
            scale = 1.0
            for _ in range(8):
                xn = x + scale * step
                rn = residual(*xn)
                if np.linalg.norm(rn) <= np.linalg.norm(r):
                    break
                scale *= 0.5
            else:
                break
            x, r = xn, rn
            if np.linalg.norm(scale * step) < 1e-12:
                break
        best = min(best, dist(*x))
    return best


def membership_Hp(base: MarkedBundle, steps) -> bool:
    """Exact membership for n <= 2: n <= 1 is all of the total space; for
    n = 2 the complement is the embedded curve."""
    steps = list(steps)
    n = len(steps)
    if n <= 1:
        return True
    if n > 2:
        raise Unsupported("exact membership is computed for n <= 2 only")
    h = h_total(base, steps)
    d = distance_to_curve(h, base.q, steps[0].point, steps[1].point)
    return d >= CURVE_TOL


# ---------------------------------------------------------------------------
# Constructive inverse of the total direction map.


def base_from_coordinate(
    tau0: ProjPoint, q: CurvePoint, line: ProjPoint | None = None
) -> MarkedBundle:
    """A marked bundle whose moduli coordinate is ``tau0``.

    Branch-point coordinates give the F2 twist by the matching torsion
    bundle (the split form L_i + L_i carries no good line); otherwise the
    dual pair of cover preimages.
    """
    lat = q.lattice
    idx = th.branch_index(tau0, lat)
    if idx is not None:
        bundle: EllipticBundle = F2Twist(torsion_line(lat, idx))
    else:
        # Centered lift: the strictly semistable rows see the doubled
        # twist 2*delta, so the balanced representative matters.
        delta = lat.reduce_centered(th.invert_cover(tau0, lat)[0].lift)
        bundle = Decomposable(
            LineBundleClass(0, delta, lat), LineBundleClass(0, -delta, lat)
        )
    mark = line if line is not None else ProjPoint(1.0, 1.0)
    return MarkedBundle(bundle, q, mark)


def second_direction_for_class(
    h1: G2Twist, q: CurvePoint, p: CurvePoint, tau: ProjPoint
) -> ProjPoint:
    """Direction (in the stored frame of ``h1``) whose modification at p
    lands on the moduli coordinate ``tau`` after the O(e) twist.

    Inverts the good-direction row: the class pair is {w, -w} + kappa with
    kappa the combined twist of the point-moving normalization and the
    e-twist, so w is the cover preimage of tau shifted by kappa.
    """
    lat = h1.lattice
    t_m = h1.l.lift + (h1.point_lift - p.lift) / 2
    kappa = t_m + (q.lift + p.lift) / 2
    root, _ = th.invert_cover(tau, lat)
    w = CurvePoint(root.lift - kappa, lat)
    delta_table = th.pi_cover(w)
    d2 = np.exp(1j * np.pi * (h1.point_lift - p.lift))
    v = delta_table.vec
    return ProjPoint(v[0], d2 * v[1])


def sequence_from_coordinates(
    base: MarkedBundle, points: list[CurvePoint], taus: list[ProjPoint]
) -> list[EllipticStep]:
    """Steps realizing prescribed moduli coordinates (tau_1 .. tau_n).

    For each point the reinterpreted two-step sequence through the mark
    pins the parabolic line at that point; the lines convert to stepwise
    directions by transport through the growing composite.
    """
    lat = base.q.lattice
    rep_q = morphism_rep(base.bundle, base.q, base.line)
    h1 = rep_q.result
    base_dirs = []
    for pnt, tau in zip(points, taus):
        delta = second_direction_for_class(h1, base.q, pnt, tau)
        rep2 = morphism_rep(h1, pnt, delta)
        local = eta_at(rep2.evaluator(np.asarray(pnt.lift)), pnt.lift)
        v = rep_q.evaluator(np.asarray(pnt.lift)) @ local.vec
        base_dirs.append(ProjPoint(v[0], v[1]))
    # Convert base-frame lines to stepwise directions along the chain.
    steps: list[EllipticStep] = []
    evs: list[MatFn] = []
    current = base.bundle
    for pnt, d in zip(points, base_dirs):
        val = np.eye(2, dtype=complex)
        for ev in evs:
            val = val @ ev(np.asarray(pnt.lift))
        step = EllipticStep(pnt, transport_direction(val, d))
        rep = morphism_rep(current, step.point, step.direction)
        evs.append(rep.evaluator)
        current = rep.result
        steps.append(step)
    return steps
