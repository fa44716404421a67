import numpy as np
import pytest

from heckelab import elliptic as ell
from heckelab import theta as th
from heckelab.elliptic import (
    Decomposable,
    EllipticStep,
    F2Twist,
    G2Twist,
    LineBundleClass,
    MarkedBundle,
    NotSemistable,
    Unsupported,
    point_line,
    torsion_line,
    trivial_line,
)
from heckelab.grassmannian import eta_at
from heckelab.projective import ProjPoint, chordal, random_point
from heckelab.torus import CurvePoint, Lattice, halve_sum

LAT = Lattice()
RNG = np.random.default_rng(77)


def rpt(rng=RNG):
    return CurvePoint(rng.random() + rng.random() * LAT.tau, LAT)


def rpt_away(*others):
    while True:
        p = rpt()
        if all(LAT.distance(p.lift, o.lift) > 0.05 for o in others):
            return p


O = trivial_line(LAT)


class TestLineBundles:
    def test_tensor_adds(self):
        p, q = rpt(), rpt()
        l = point_line(p).tensor(point_line(q).inverse())
        assert l.degree == 0
        assert LAT.distance(l.lift, p.lift - q.lift) < 1e-12

    def test_torsion_squares_trivial(self):
        for i in range(1, 5):
            li = torsion_line(LAT, i)
            assert li.tensor(li).is_trivial()

    def test_factor_matches_shifted_exponential(self):
        p = rpt()
        f = point_line(p).factor()
        g = th.automorphy_factor(p.lift)
        z = 0.3 - 0.8j
        assert abs(f(z) - g(z)) < 1e-12


class TestAutomorphy:
    def test_trivial_bundle_identity_factor(self):
        f = ell.automorphy(Decomposable(O, O))
        assert np.allclose(f(np.asarray(0.3 + 0.1j)), np.eye(2))

    def test_f2_det_trivial(self):
        f = ell.automorphy(F2Twist(O))
        val = f(np.asarray(0.2 - 0.4j))
        assert abs(np.linalg.det(val) - 1) < 1e-12

    def test_g2_det_is_point_factor(self):
        p = rpt()
        f = ell.automorphy(G2Twist(p.lift, O))
        z = 0.7 + 0.2j
        want = th.automorphy_factor(p.lift)(z)
        assert abs(np.linalg.det(f(np.asarray(z))) - want) < 1e-12

    def test_cocycle_consistency(self):
        # f(z + 1) must be the identity-factor branch: full 1-periodicity.
        p = rpt()
        for bundle in (Decomposable(point_line(p), O), F2Twist(O), G2Twist(p.lift, O)):
            f = ell.automorphy(bundle)
            z = np.asarray(0.1 + 0.5j)
            assert np.allclose(f(z + 1), f(z))


def all_row_fixtures():
    rng = np.random.default_rng(5)
    p = CurvePoint(0.393 + 0.544 * LAT.tau, LAT)
    q = CurvePoint(0.811 + 0.156 * LAT.tau, LAT)
    q2 = CurvePoint(0.175 + 0.822 * LAT.tau, LAT)
    gen = ProjPoint(0.62 - 0.35j, 1.0 + 0.21j)
    lam = ProjPoint(0.9 + 0.4j, 1)
    bp = th.branch_points(LAT)
    return [
        ("Oq:[1:0]", Decomposable(point_line(q), O), p, ProjPoint(1, 0)),
        ("Oq:[lam:1]", Decomposable(point_line(q), O), p, lam),
        ("OD:[1:0]", Decomposable(point_line(q).tensor(point_line(q2)), O), p, ProjPoint(1, 0)),
        ("OD:[lam:1]", Decomposable(point_line(q).tensor(point_line(q2)), O), p, lam),
        ("Op:[1:0]", Decomposable(point_line(p), O), p, ProjPoint(1, 0)),
        ("Op:[0:1]", Decomposable(point_line(p), O), p, ProjPoint(0, 1)),
        ("Op:[x:y]", Decomposable(point_line(p), O), p, gen),
        ("OO:[1:0]", Decomposable(O, O), p, ProjPoint(1, 0)),
        ("OO:[lam:1]", Decomposable(O, O), p, lam),
        ("ss:[1:0]", Decomposable(point_line(p).tensor(point_line(q).inverse()), O), p,
         ProjPoint(1, 0)),
        ("ss:[0:1]", Decomposable(point_line(p).tensor(point_line(q).inverse()), O), p,
         ProjPoint(0, 1)),
        ("ss:[x:y]", Decomposable(point_line(p).tensor(point_line(q).inverse()), O), p, gen),
        ("F2:[1:0]", F2Twist(O), p, ProjPoint(1, 0)),
        ("F2:[lam:1]", F2Twist(O), p, lam),
        ("G2:good", G2Twist(p.lift, O), p, gen),
        ("G2:a2", G2Twist(p.lift, O), p, bp[1]),
        ("G2:moved", G2Twist(q.lift, point_line(q).inverse()), p, gen),
    ]


class TestMorphismRows:
    @pytest.mark.parametrize("name,bundle,p,a", all_row_fixtures(),
                             ids=[r[0] for r in all_row_fixtures()])
    def test_equivariance_direction_length(self, name, bundle, p, a):
        rep = ell.morphism_rep(bundle, p, a)
        assert ell.check_equivariance(rep) < 1e-10
        assert chordal(eta_at(rep.evaluator(np.asarray(p.lift)), p.lift), a) < 1e-9
        assert abs(rep.result.hecke_length - bundle.hecke_length) == 1

    def test_corrupted_row_fails_equivariance(self):
        p = rpt()
        rep = ell.morphism_rep(Decomposable(point_line(p), O), p, ProjPoint(1, 0))
        swapped = ell.MorphismRep(
            lambda z: rep.evaluator(z)[..., ::-1, :], rep.row,
            rep.upstream, rep.result, rep.point,
        )
        assert ell.check_equivariance(swapped) > 1e-2

    def test_specific_targets(self):
        p, q = rpt(), rpt()
        rep = ell.morphism_rep(Decomposable(point_line(q), O), p, ProjPoint(1, 0))
        assert isinstance(rep.result, Decomposable)
        assert rep.result.l1.same_class(point_line(q))
        assert rep.result.l2.same_class(point_line(p).inverse())
        rep = ell.morphism_rep(Decomposable(O, O), p, ProjPoint(0.5, 1))
        assert rep.result.l1.same_class(O)
        assert rep.result.l2.same_class(point_line(p).inverse())
        rep = ell.morphism_rep(F2Twist(O), p, ProjPoint(0.5, 1))
        assert isinstance(rep.result, G2Twist)

    def test_row_not_found_never_fires_on_cp1(self):
        # The table is total over directions; sweep a grid on each bundle.
        from heckelab.projective import sphere_grid

        p = rpt()
        for bundle in (Decomposable(O, O), F2Twist(O), G2Twist(p.lift, O)):
            for d in sphere_grid(16):
                ell.morphism_rep(bundle, p, d)


class TestSingleHecke:
    def test_op_counter_direction_trivializes(self):
        p = rpt()
        out = ell.single_hecke(Decomposable(point_line(p), O), p, ProjPoint(0, 1))
        assert ell.s_equivalent(out, Decomposable(O, O))

    def test_f2_good_gives_g2(self):
        p = rpt()
        out = ell.single_hecke(F2Twist(O), p, ProjPoint(0.3 - 0.2j, 1))
        assert isinstance(out, G2Twist)
        assert out.det_class().same_class(point_line(p).inverse())

    def test_g2_good_pair_consistent_with_cover(self):
        p = rpt()
        a = th.pi_cover(rpt())
        out = ell.single_hecke(G2Twist(p.lift, O), p, a)
        assert isinstance(out, Decomposable)
        assert chordal(th.pi_cover(out.l1.twist_point()), a) < 1e-7
        # The pair is inverse-symmetric: independent of the root choice.
        assert out.l1.tensor(out.l2).is_trivial()

    def test_length_pm_one_sampled(self):
        rng = np.random.default_rng(8)
        p = rpt(rng)
        bundles = [Decomposable(O, O), F2Twist(O), G2Twist(p.lift, O),
                   Decomposable(point_line(rpt(rng)), O)]
        for b in bundles:
            for _ in range(5):
                d = random_point(rng)
                assert abs(ell.single_hecke(b, p, d).hecke_length - b.hecke_length) == 1


class TestMss:
    def test_trivial_is_first_branch_point(self):
        assert chordal(ell.mss_coordinate(Decomposable(O, O)), th.branch_points(LAT)[0]) < 1e-10

    def test_order_independent(self):
        d = rpt()
        l = LineBundleClass(0, d.lift, LAT)
        a1 = ell.mss_coordinate(Decomposable(l, l.inverse()))
        a2 = ell.mss_coordinate(Decomposable(l.inverse(), l))
        assert chordal(a1, a2) < 1e-10

    def test_f2_twist_matches_split_class(self):
        for i in range(1, 5):
            li = torsion_line(LAT, i)
            a1 = ell.mss_coordinate(F2Twist(li))
            a2 = ell.mss_coordinate(Decomposable(li, li))
            assert chordal(a1, a2) < 1e-10

    def test_rejects_unstable_and_g2(self):
        p = rpt()
        with pytest.raises(NotSemistable):
            ell.mss_coordinate(Decomposable(point_line(p), O))
        with pytest.raises(NotSemistable):
            ell.mss_coordinate(G2Twist(p.lift, O))


class TestDoubleHecke:
    def test_trivial_bundle_rows(self):
        p1, p2 = rpt(), rpt_away(rpt())
        e = halve_sum(p1, p2)
        a, b = random_point(RNG), random_point(RNG)
        out = ell.double_hecke(Decomposable(O, O), p1, p2, a, b)
        want = Decomposable(
            LineBundleClass(1, e.lift, LAT).tensor(point_line(p1).inverse()),
            LineBundleClass(1, e.lift, LAT).tensor(point_line(p2).inverse()),
        )
        assert out is not None and ell.s_equivalent(out, want)
        assert ell.double_hecke(Decomposable(O, O), p1, p2, a, a) is None

    def test_two_route_consistency(self):
        from heckelab.suites import _double_sample, _two_route_agree

        rng = np.random.default_rng(10)
        for k in range(40):
            bundle, p1, p2, d1, d2 = _double_sample(LAT, rng, k)
            assert _two_route_agree(bundle, p1, p2, d1, d2, LAT)

    def test_rejects_nontrivial_det(self):
        p1, p2 = rpt(), rpt()
        with pytest.raises(NotSemistable):
            ell.double_hecke(Decomposable(point_line(p1), O), p1, p2,
                             random_point(RNG), random_point(RNG))


class TestHTotal:
    def test_empty_sequence_single_coordinate(self):
        q = rpt()
        tau0 = th.pi_cover(rpt())
        base = ell.base_from_coordinate(tau0, q)
        h = ell.h_total(base, [])
        assert len(h) == 1 and chordal(h[0], tau0) < 1e-9

    def test_roundtrip_n1_n2(self):
        rng = np.random.default_rng(14)
        for n in (1, 2):
            for _ in range(5):
                q = rpt(rng)
                pts = [rpt(rng) for _ in range(n)]
                taus = [th.pi_cover(rpt(rng)) for _ in range(n)]
                tau0 = th.pi_cover(rpt(rng))
                base = ell.base_from_coordinate(tau0, q)
                steps = ell.sequence_from_coordinates(base, pts, taus)
                h = ell.h_total(base, steps)
                assert chordal(h[0], tau0) < 1e-9
                assert max(chordal(x, y) for x, y in zip(h[1:], taus)) < 1e-8

    def test_first_coordinate_constant(self):
        rng = np.random.default_rng(15)
        q = rpt(rng)
        tau0 = th.pi_cover(rpt(rng))
        base = ell.base_from_coordinate(tau0, q)
        for _ in range(3):
            steps = ell.sequence_from_coordinates(
                base, [rpt(rng)], [th.pi_cover(rpt(rng))])
            assert chordal(ell.h_total(base, steps)[0], tau0) < 1e-9

    def test_bad_mark_rejected(self):
        q = rpt()
        d = rpt()
        bundle = Decomposable(LineBundleClass(0, d.lift, LAT),
                              LineBundleClass(0, -d.lift, LAT))
        with pytest.raises(ValueError):
            MarkedBundle(bundle, q, ProjPoint(1, 0))


class TestMembership:
    def test_low_n_always_member(self):
        q = rpt()
        base = ell.base_from_coordinate(th.pi_cover(rpt()), q)
        assert ell.membership_Hp(base, [])
        steps = ell.sequence_from_coordinates(base, [rpt()], [th.pi_cover(rpt())])
        assert ell.membership_Hp(base, steps)

    def test_unsupported_above_two(self):
        q = rpt()
        base = ell.base_from_coordinate(th.pi_cover(rpt()), q)
        pts = [rpt(), rpt(), rpt()]
        taus = [th.pi_cover(rpt()) for _ in range(3)]
        steps = ell.sequence_from_coordinates(base, pts, taus)
        with pytest.raises(Unsupported):
            ell.membership_Hp(base, steps)

    def test_curve_excluded_far_included(self):
        rng = np.random.default_rng(16)
        q, p1, p2 = rpt(rng), rpt(rng), rpt(rng)
        p = rpt(rng)
        tri = ell.f_embedding(p, q, p1, p2)
        base = ell.base_from_coordinate(tri[0], q)
        steps = ell.sequence_from_coordinates(base, [p1, p2], [tri[1], tri[2]])
        assert not ell.membership_Hp(base, steps)
        while True:
            taus = [th.pi_cover(rpt(rng)) for _ in range(3)]
            if ell.distance_to_curve(taus, q, p1, p2) > 0.1:
                break
        base = ell.base_from_coordinate(taus[0], q)
        steps = ell.sequence_from_coordinates(base, [p1, p2], [taus[1], taus[2]])
        assert ell.membership_Hp(base, steps)


class TestFEmbedding:
    def test_preimage_symmetry(self):
        q, p1, p2 = rpt(), rpt(), rpt()
        e1 = halve_sum(q, p1)
        p = rpt()
        f1 = ell.f_embedding(p, q, p1, p2)
        f2 = ell.f_embedding(e1.double() - p, q, p1, p2)
        assert chordal(f1[0], f2[0]) < 1e-9

    def test_shift_identity(self):
        q, p1, p2 = rpt(), rpt(), rpt()
        e1 = halve_sum(q, p1)
        for _ in range(20):
            p = rpt()
            f1 = ell.f_embedding(p, q, p1, p2)
            f3 = ell.f_embedding(p + e1 - p1, q, p1, p2)
            assert chordal(f1[1], f3[0]) < 1e-9

    def test_sampled_injectivity(self):
        import itertools

        q, p1, p2 = rpt(), rpt(), rpt()
        pts = [CurvePoint((i + 0.5) / 20 + ((i * 7) % 20 + 0.5) / 20 * LAT.tau, LAT)
               for i in range(20)]
        vals = [ell.f_embedding(p, q, p1, p2) for p in pts]
        mind = min(max(chordal(a, b) for a, b in zip(x, y))
                   for x, y in itertools.combinations(vals, 2))
        assert mind > 0


def test_s_equivalence_f2_vs_split():
    for i in range(1, 5):
        li = torsion_line(LAT, i)
        assert ell.s_equivalent(F2Twist(li), Decomposable(li, li))
    assert not ell.s_equivalent(F2Twist(torsion_line(LAT, 1)),
                                Decomposable(torsion_line(LAT, 2), torsion_line(LAT, 2)))


def test_g2_twist_identification():
    p = rpt()
    g = G2Twist(p.lift, O)
    for i in range(1, 5):
        assert ell.g2_isomorphic(g, g.tensor(torsion_line(LAT, i)))
    d = rpt()
    generic = LineBundleClass(0, d.lift, LAT)
    if not d.is_two_torsion():
        assert not ell.g2_isomorphic(g, g.tensor(generic))


def test_h_total_rejects_coincident_points():
    q = rpt()
    base = ell.base_from_coordinate(th.pi_cover(rpt()), q)
    p = rpt()
    steps = [EllipticStep(p, random_point(RNG)), EllipticStep(p, random_point(RNG))]
    with pytest.raises(ValueError):
        ell.h_total(base, steps)


class TestUnstableBranchImage:
    """Printed closed forms of the length-one coordinates along the
    unstable branch: a bad first direction lands on the curve points
    cover(p - p1) / cover(p - q) for the split base at p = e + delta."""

    def test_bad_directions_hit_image_points(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            q = rpt(rng)
            p1 = rpt(rng)
            if LAT.distance(q.lift, p1.lift) < 0.1:
                continue
            e = halve_sum(p1, q)
            delta = rpt(rng)
            if delta.is_two_torsion() or (delta + e - p1).is_two_torsion():
                continue
            p = e + delta
            bundle = Decomposable(
                LineBundleClass(0, LAT.reduce_centered(delta.lift), LAT),
                LineBundleClass(0, -LAT.reduce_centered(delta.lift), LAT),
            )
            base = MarkedBundle(bundle, q, ProjPoint(1.0, 1.0))
            # First modification toward [0:1] (bad): coordinate
            # cover(p - p1); toward [1:0] (bad): coordinate cover(p - q).
            for d1, shift in ((ProjPoint(0, 1), p - p1), (ProjPoint(1, 0), p - q)):
                h = ell.h_total(base, [EllipticStep(p1, d1)])
                assert chordal(h[0], th.pi_cover(p - e)) < 1e-8
                assert chordal(h[1], th.pi_cover(shift)) < 1e-7


class TestOrderIndependence:
    """The terminal class of a two-step sequence depends only on the
    line data, not the order the points are visited."""

    def test_reversed_sequences_share_terminal_class(self):
        from heckelab.projective import transport_direction

        rng = np.random.default_rng(37)
        for trial in range(12):
            q = rpt(rng)
            p1, p2 = rpt(rng), rpt(rng)
            if LAT.distance(p1.lift, p2.lift) < 0.1:
                continue
            base = ell.base_from_coordinate(th.pi_cover(rpt(rng)), q)
            if trial % 3 == 0:
                lines = [ProjPoint(1, 0), random_point(rng)]  # a bad start
            else:
                lines = [random_point(rng), random_point(rng)]

            def terminal(points, dirs):
                evs = []
                current = base.bundle
                for pnt, d in zip(points, dirs):
                    val = np.eye(2, dtype=complex)
                    for ev in evs:
                        val = val @ ev(np.asarray(pnt.lift))
                    rep = ell.morphism_rep(current, pnt, transport_direction(val, d))
                    evs.append(rep.evaluator)
                    current = rep.result
                return current

            ta = terminal([p1, p2], lines)
            tb = terminal([p2, p1], lines[::-1])
            e = halve_sum(p1, p2)
            oe = LineBundleClass(1, e.lift, LAT)
            ta, tb = ta.tensor(oe), tb.tensor(oe)
            if ell.is_even_semistable(ta) or ell.is_even_semistable(tb):
                assert ell.is_even_semistable(ta) and ell.is_even_semistable(tb)
                assert ell.s_equivalent(ta, tb)
            else:
                assert ta.hecke_length == tb.hecke_length
