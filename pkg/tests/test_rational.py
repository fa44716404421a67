import numpy as np
import pytest

from heckelab import rational as rat
from heckelab.grassmannian import eta_at
from heckelab.projective import ProjPoint, chordal, random_point, sphere_grid
from heckelab.rational import (
    NotGlobal,
    PolyMat2,
    RationalBundle,
    RationalHeckeStep,
    RationalSequence,
)


class TestSingleHecke:
    def test_unstable_pivot(self):
        assert rat.single_hecke(RationalBundle(3, 0), ProjPoint(1, 0)) == RationalBundle(3, -1)

    def test_trivial_any_direction(self):
        for d in (ProjPoint(1, 0), ProjPoint(0, 1), ProjPoint(2, 1)):
            assert rat.single_hecke(RationalBundle(0, 0), d) == RationalBundle(0, -1)

    def test_twisted_semistable(self):
        assert rat.single_hecke(RationalBundle(3, 3), ProjPoint(2, 1)) == RationalBundle(3, 2)

    def test_length_changes_by_one_on_grid(self):
        for k in range(6):
            b = RationalBundle(k, 0)
            for d in sphere_grid(64):
                assert abs(rat.single_hecke(b, d).hecke_length - b.hecke_length) == 1

    def test_branch_transition_rows(self):
        assert rat.branch_transition(RationalBundle(2, 0), ProjPoint(1, 0)) == "unstable:[1:0]"
        assert rat.branch_transition(RationalBundle(2, 0), ProjPoint(1, 1)) == "unstable:[lambda:1]"
        assert rat.branch_transition(RationalBundle(0, 0), ProjPoint(1, 0)).startswith("semistable")


class TestMorphismMatrix:
    MU = 0.42 - 0.13j

    def rows(self):
        return [
            (RationalBundle(2, 0), ProjPoint(1, 0)),
            (RationalBundle(2, 0), ProjPoint(0.7 + 0.2j, 1)),
            (RationalBundle(0, 0), ProjPoint(0.7 + 0.2j, 1)),
            (RationalBundle(0, 0), ProjPoint(1, 0)),
        ]

    def test_table_shapes(self):
        m = rat.morphism_matrix(RationalBundle(2, 0), RationalHeckeStep(self.MU, ProjPoint(1, 0)))
        assert np.allclose(m(1.0), [[1, 0], [0, 1 - self.MU]])
        m = rat.morphism_matrix(RationalBundle(2, 0), RationalHeckeStep(self.MU, ProjPoint(0.5, 1)))
        assert np.allclose(m(1.0), [[1 - self.MU, 0.5], [0, 1]])
        m = rat.morphism_matrix(RationalBundle(0, 0), RationalHeckeStep(self.MU, ProjPoint(0.5, 1)))
        assert np.allclose(m(1.0), [[0.5, 1 - self.MU], [1, 0]])

    def test_det_is_linear_with_root_at_point(self):
        for b, d in self.rows():
            m = rat.morphism_matrix(b, RationalHeckeStep(self.MU, d))
            det = m.det()
            assert det.size == 2
            assert abs(det[0] / det[1] + self.MU) < 1e-14

    def test_direction_roundtrip(self):
        for b, d in self.rows():
            m = rat.morphism_matrix(b, RationalHeckeStep(self.MU, d))
            assert chordal(eta_at(m, self.MU), d) < 1e-10


class TestChartConvert:
    def test_pivot_row_is_identity_at_origin(self):
        m = rat.morphism_matrix(RationalBundle(3, 0), RationalHeckeStep(0.0, ProjPoint(1, 0)))
        w = rat.chart_convert(m, RationalBundle(3, -1), RationalBundle(3, 0))
        assert np.allclose(w(0.77), np.eye(2))

    def test_generic_row_by_closed_form(self):
        lam = 0.5 - 1.1j
        m = rat.morphism_matrix(RationalBundle(3, 0), RationalHeckeStep(0.0, ProjPoint(lam, 1)))
        w = rat.chart_convert(m, RationalBundle(2, 0), RationalBundle(3, 0))
        z = 0.9 + 0.4j
        assert np.allclose(w(z), [[1, lam * z ** 3], [0, 1]])

    def test_all_rows_glue(self):
        mu = 0.3 + 0.6j
        for b, d in TestMorphismMatrix().rows():
            m = rat.morphism_matrix(b, RationalHeckeStep(mu, d))
            rat.chart_convert(m, rat.single_hecke(b, d), b)

    def test_corrupted_matrix_rejected(self):
        bad = PolyMat2([[[0.0, 1.0, 1.0], [0.5]], [[0.0], [1.0]]])
        with pytest.raises(NotGlobal):
            rat.chart_convert(bad, RationalBundle(2, 0), RationalBundle(3, 0))


class TestHMap:
    def test_two_step_closed_forms(self):
        l1, l2 = 0.7 - 0.3j, 1.1 + 0.2j
        mu1, mu2 = 0.2 + 0.1j, 0.9 - 0.4j
        lb2 = l2 / (mu2 - mu1)
        seq = RationalSequence((
            RationalHeckeStep(mu1, ProjPoint(l1, 1)),
            RationalHeckeStep(mu2, ProjPoint(l2, 1)),
        ))
        h = seq.h_map()
        assert chordal(h[0], ProjPoint(l1, 1)) < 1e-12
        assert chordal(h[1], ProjPoint(l1 * lb2 + 1, lb2)) < 1e-12
        seqb = RationalSequence((
            RationalHeckeStep(mu1, ProjPoint(1, 0)),
            RationalHeckeStep(mu2, ProjPoint(l2, 1)),
        ))
        hb = seqb.h_map()
        assert hb[0] == ProjPoint(1, 0)
        assert chordal(hb[1], ProjPoint(lb2, 1)) < 1e-12

    def test_empty_sequence(self):
        assert RationalSequence(()).h_map() == []

    def test_tuple_roundtrip(self):
        rng = np.random.default_rng(3)
        for n in (1, 2, 3, 4, 5):
            pts = rat.default_points(n)
            dirs = [random_point(rng) for _ in range(n)]
            mats = rat.matrices_from_tuple(pts, dirs)
            back = rat.h_values(mats, pts)
            assert max(chordal(x, y) for x, y in zip(back, dirs)) < 1e-10

    def test_coincident_points_rejected(self):
        with pytest.raises(ValueError):
            RationalSequence((
                RationalHeckeStep(0.5, ProjPoint(1, 0)),
                RationalHeckeStep(0.5, ProjPoint(0, 1)),
            ))


class TestMembership:
    A = ProjPoint(0.3, 1)
    B = ProjPoint(-1.2 + 0.5j, 1)

    def test_small_spaces(self):
        assert rat.membership_H(0, [])
        assert rat.membership_H(1, [self.A])
        assert not rat.membership_H(2, [self.A, self.A])
        assert rat.membership_H(2, [self.A, self.B])
        assert not rat.membership_H(3, [self.A, self.A, self.A])
        assert rat.membership_H(3, [self.A, self.A, self.B])
        assert rat.membership_H(3, [self.A, self.B, self.A])

    def test_closed_form_matches_transition(self):
        rng = np.random.default_rng(7)
        for n in (2, 3):
            pts = rat.default_points(n)
            for _ in range(60):
                if rng.random() < 0.3:
                    a = random_point(rng)
                    dirs = [a] * n
                elif rng.random() < 0.5:
                    a = random_point(rng)
                    dirs = [a] * (n - 1) + [random_point(rng)]
                else:
                    dirs = [random_point(rng) for _ in range(n)]
                assert rat.membership_H(n, dirs, pts) == rat.membership_H_closed_form(n, dirs)

    def test_subbundle_chain_terminal_type(self):
        # Equal first r directions leave the terminal at split type (0, -r).
        a = self.A
        pts = rat.default_points(3)
        p = rat.composite_from_tuple(pts, [a, a, a])
        assert rat.min_column_degree(p) == 0

    def test_n4_lengths(self):
        pts = rat.default_points(4)
        a, b, c = self.A, self.B, ProjPoint(2.0, 1)
        assert rat.terminal_hecke_length(pts, [a, a, b, b]) == 0
        assert rat.terminal_hecke_length(pts, [a, a, b, c]) == 0
        assert rat.terminal_hecke_length(pts, [a, a, a, b]) == 2
        assert rat.terminal_hecke_length(pts, [a, a, a, a]) == 4


def test_random_minimal_sequences_are_minimal():
    rng = np.random.default_rng(9)
    for n in (2, 3, 4, 6):
        for _ in range(10):
            seq = rat.random_minimal_sequence(n, rng)
            assert seq.terminal().hecke_length == n % 2
            assert rat.membership_H(n, seq.h_map(), seq.points)
