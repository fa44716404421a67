import itertools

import numpy as np
import pytest

from heckelab import elliptic as ell
from heckelab import parabolic as par
from heckelab import rational as rat
from heckelab import theta as th
from heckelab.elliptic import (
    Decomposable,
    F2Twist,
    G2Twist,
    LineBundleClass,
    torsion_line,
    trivial_line,
)
from heckelab.parabolic import (
    Mark,
    ParabolicBundle,
    TerminalNotMinimal,
    Verdict,
    classify_lines,
    hecke_embedding_elliptic,
    hecke_embedding_rational,
    pdeg,
    pdeg_line,
    rational_terminal_class,
    stability,
)
from heckelab.projective import ProjPoint, chordal, random_point
from heckelab.rational import RationalBundle
from heckelab.torus import CurvePoint, Lattice

LAT = Lattice()
RNG = np.random.default_rng(20)
A, B, C = ProjPoint(1, 0), ProjPoint(0, 1), ProjPoint(1, 1)
O00 = RationalBundle(0, 0)


def rpt(rng=RNG):
    return CurvePoint(rng.random() + rng.random() * LAT.tau, LAT)


class TestParabolicDegree:
    def test_rank2_weights_cancel(self):
        pb = ParabolicBundle(O00, (Mark(0.1, A), Mark(0.2, B)))
        assert pdeg(pb) == 0.0

    def test_line_all_positive(self):
        assert abs(pdeg_line(2, [1, 1, 1], 1e-3) - (2 + 3e-3)) < 1e-15

    def test_line_mixed_signs(self):
        assert abs(pdeg_line(1, [1, -1], 1e-3) - 1.0) < 1e-15


class TestClassifyLines:
    def test_rational_all_bad_grouped_by_equality(self):
        pb = ParabolicBundle(O00, (Mark(0.1, A), Mark(0.2, A), Mark(0.3, B)))
        flags = classify_lines(pb)
        assert [f["bad"] for f in flags] == [True, True, True]
        assert [f["group_size"] for f in flags] == [2, 2, 1]

    def test_elliptic_semistable_pair(self):
        d = rpt()
        e = Decomposable(LineBundleClass(0, d.lift, LAT), LineBundleClass(0, -d.lift, LAT))
        marks = (Mark(rpt(), ProjPoint(1, 0)), Mark(rpt(), ProjPoint(0, 1)),
                 Mark(rpt(), ProjPoint(0.4, 1)))
        flags = classify_lines(ParabolicBundle(e, marks))
        assert [f["bad"] for f in flags] == [True, True, False]

    def test_f2_single_bad_direction(self):
        e = F2Twist(trivial_line(LAT))
        flags = classify_lines(ParabolicBundle(e, (Mark(rpt(), ProjPoint(1, 0)),
                                                   Mark(rpt(), ProjPoint(0, 1)))))
        assert [f["bad"] for f in flags] == [True, False]

    def test_g2_no_bad_directions(self):
        e = G2Twist(rpt().lift, trivial_line(LAT))
        flags = classify_lines(ParabolicBundle(e, (Mark(rpt(), random_point(RNG)),)))
        assert flags[0]["bad"] is False

    def test_torsion_split_all_bad(self):
        e = Decomposable(torsion_line(LAT, 2), torsion_line(LAT, 2))
        flags = classify_lines(ParabolicBundle(e, (Mark(rpt(), random_point(RNG)),
                                                   Mark(rpt(), random_point(RNG)))))
        assert all(f["bad"] for f in flags)

    def test_unstable_underlying_rejected(self):
        with pytest.raises(par.UnderlyingUnstable):
            classify_lines(ParabolicBundle(RationalBundle(1, 0), (Mark(0.1, A),)))


class TestStability:
    @pytest.mark.parametrize("marks,want", [
        ((Mark(0.1, A), Mark(0.2, B), Mark(0.3, C)), Verdict.STABLE),
        ((Mark(0.1, A),), Verdict.UNSTABLE),
        ((Mark(0.1, A), Mark(0.2, A)), Verdict.UNSTABLE),
        ((Mark(0.1, A), Mark(0.2, B)), Verdict.STRICTLY_SEMISTABLE),
    ])
    def test_split_fixtures(self, marks, want):
        assert stability(ParabolicBundle(O00, marks)).verdict is want

    def test_weight_independent(self):
        marks = (Mark(0.1, A), Mark(0.2, B), Mark(0.3, C), Mark(0.4, C))
        verdicts = {stability(ParabolicBundle(O00, marks, w)).verdict
                    for w in (1e-3, 1e-4)}
        assert len(verdicts) == 1

    def test_unstable_underlying(self):
        v = stability(ParabolicBundle(RationalBundle(2, 0), (Mark(0.1, A),)))
        assert v.verdict is Verdict.UNSTABLE

    def test_g2_always_stable(self):
        e = G2Twist(rpt().lift, trivial_line(LAT))
        marks = tuple(Mark(rpt(), random_point(RNG)) for _ in range(3))
        assert stability(ParabolicBundle(e, marks)).verdict is Verdict.STABLE


class TestCorrespondence:
    def test_roundtrip_identity(self):
        seq = rat.random_minimal_sequence(3, np.random.default_rng(1))
        marks = par.lines_from_sequence(seq)
        points, dirs = par.tuple_from_lines(marks)
        assert points == seq.points
        back = rat.h_values(rat.matrices_from_tuple(points, dirs), points)
        assert max(chordal(x, y) for x, y in zip(back, dirs)) < 1e-9

    def test_permutation_invariance_of_terminal(self):
        rng = np.random.default_rng(2)
        pts = rat.default_points(3)
        for _ in range(10):
            if rng.random() < 0.5:
                a = random_point(rng)
                dirs = [a, a, random_point(rng)]
            else:
                dirs = [random_point(rng) for _ in range(3)]
            classes = set()
            for perm in itertools.permutations(range(3)):
                marks = [Mark(pts[i], dirs[i]) for i in perm]
                classes.add(str(rational_terminal_class(marks)))
            assert len(classes) == 1

    def test_equal_first_lines_terminal_type(self):
        a = random_point(np.random.default_rng(3))
        for r in (1, 2, 3):
            marks = [Mark(p, a) for p in rat.default_points(r)]
            assert rational_terminal_class(marks) == RationalBundle(0, -r)


class TestLemmaDirection:
    def test_rational(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            n = int(rng.integers(2, 5))
            pts = rat.default_points(n)
            a = random_point(rng)
            r = n // 2 + 1
            dirs = [a] * r + [random_point(rng) for _ in range(n - r)]
            marks = [Mark(p, d) for p, d in zip(pts, dirs)]
            assert stability(ParabolicBundle(O00, tuple(marks))).verdict is Verdict.UNSTABLE
            assert not rational_terminal_class(marks).is_semistable()

    def test_elliptic_two_step(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            q, p1, p2 = (rpt(rng) for _ in range(3))
            base = ell.base_from_coordinate(th.pi_cover(rpt(rng)), q)
            bad = ProjPoint(1, 0)
            steps = []
            evs = []
            current = base.bundle
            for pnt in (p1, p2):
                val = np.eye(2, dtype=complex)
                for ev in evs:
                    val = val @ ev(np.asarray(pnt.lift))
                v = np.linalg.solve(val, bad.vec)
                step = ell.EllipticStep(pnt, ProjPoint(v[0], v[1]))
                rep = ell.morphism_rep(current, step.point, step.direction)
                evs.append(rep.evaluator)
                current = rep.result
                steps.append(step)
            marks = par.lines_from_elliptic_sequence(base, steps)
            pb = ParabolicBundle(base.bundle, tuple(marks))
            assert stability(pb).verdict is Verdict.UNSTABLE
            assert not ell.is_semistable(current)


class TestEmbedding:
    AUX = [Mark(10.0 + 1j, A), Mark(11.0 + 1j, B), Mark(12.0 + 1j, C)]

    def test_rational_zero_steps(self):
        seq = rat.RationalSequence(())
        pb = hecke_embedding_rational(seq, self.AUX)
        assert stability(pb).verdict is Verdict.STABLE
        assert len(pb.marks) == 3

    def test_rational_two_distinct(self):
        seq = rat.RationalSequence((
            rat.RationalHeckeStep(0.1, ProjPoint(0.5, 1)),
            rat.RationalHeckeStep(0.9, ProjPoint(-0.8 + 0.3j, 1)),
        ))
        pb = hecke_embedding_rational(seq, self.AUX)
        assert stability(pb).verdict is Verdict.STABLE
        assert len(pb.marks) == 5

    def test_rational_rejects_nonminimal(self):
        a = ProjPoint(0.5, 1)
        # Directions are read from the composite; realize an equal pair.
        pts = rat.default_points(2)
        mats = rat.matrices_from_tuple(pts, [a, a])
        dirs = rat.h_values(mats, pts)
        seq_steps = []
        prefix = np.eye(2, dtype=complex)
        current = RationalBundle(0, 0)
        built = []
        for mu, d in zip(pts, dirs):
            v = np.linalg.solve(prefix, d.vec)
            step = rat.RationalHeckeStep(mu, ProjPoint(v[0], v[1]))
            built.append(step)
            m = rat.morphism_matrix(current, step)
            prefix = prefix @ m(pts[1])
            current = rat.single_hecke(current, step.direction)
        seq = rat.RationalSequence(tuple(built))
        with pytest.raises(TerminalNotMinimal):
            hecke_embedding_rational(seq, self.AUX)

    def test_elliptic_members_embed_stably(self):
        rng = np.random.default_rng(6)
        q, p1, p2 = (rpt(rng) for _ in range(3))
        base = ell.base_from_coordinate(th.pi_cover(rpt(rng)), q)
        while True:
            taus = [th.pi_cover(rpt(rng)) for _ in range(2)]
            steps = ell.sequence_from_coordinates(base, [p1, p2], taus)
            if ell.membership_Hp(base, steps):
                break
        pb = hecke_embedding_elliptic(base, steps)
        assert stability(pb).verdict is Verdict.STABLE
        assert len(pb.marks) == 3
