from dataclasses import replace
from fractions import Fraction
import unittest

from toric_probes.affine import Vector
from toric_probes.polygons import HalfSpace, PolygonError
from toric_probes.potentials import (
    PotentialPresentation, QwCertificateError, QwKind, certify_nondisplaceable, default_ghost_height,
    enumerate_ghosts, geometric_nondisp_test, is_smooth_compact, is_valid_ghost, solve_leading_order,
    verify_qw_certificate,
)
from toric_probes.resolutions import finite_volume_a2, hirzebruch, p135_resolved_at_30, projective_plane, sector


def ghosts_of(certificate):
    return {(g.eta, g.kappa) for g in certificate.ghosts}


class Presentation_Tests(unittest.TestCase):
    def test_open_facets_have_no_term(self):
        polygon = finite_volume_a2()
        terms = PotentialPresentation(polygon, Vector(Fraction(9, 5), Fraction(8, 5))).terms
        self.assertEqual([0, 1, 3, 4], [t.facet for t in terms])
        self.assertEqual([Fraction(9, 5), Fraction(6, 5), Fraction(17, 20), Fraction(9, 10)], [t.level for t in terms])
        self.assertFalse(any(t.free for t in terms))

    def test_labels_scale_weights_and_levels(self):
        polygon = projective_plane()
        ghost = HalfSpace(Vector(-2, 0), 12, ghost=True)
        terms = PotentialPresentation(polygon, Vector(1, 1), (ghost,)).terms
        self.assertEqual(Vector(-2, 0), terms[-1].weight)
        self.assertEqual(Fraction(10), terms[-1].level)
        self.assertTrue(terms[-1].free)


class Geometric_Test_Tests(unittest.TestCase):
    def test_clifford_torus(self):
        certificate = geometric_nondisp_test(projective_plane(), Vector(2, 2))
        self.assertEqual(QwKind.GEOMETRIC_CANDIDATE, certificate.kind)
        self.assertEqual((0, 1, 2), certificate.tied)
        self.assertFalse(certificate.heuristic)
        verify_qw_certificate(projective_plane(), certificate)

    def test_hirzebruch_parallel_facets(self):
        # closest facets x2 >= 0 and x2 <= 2, then x1 >= 0 and the slanted facet at level 7/4
        polygon = hirzebruch()
        u0 = Vector(Fraction(7, 4), 1)
        certificate = geometric_nondisp_test(polygon, u0)
        self.assertEqual((1, 2), certificate.tied)
        self.assertEqual((0, 3), certificate.second_tied)
        self.assertEqual(Fraction(7, 4), certificate.second_level)

    def test_no_match(self):
        for u in (Vector(1, 2), Vector(1, 1), Vector(3, 2)):
            with self.subTest(u=u):
                self.assertIsNone(geometric_nondisp_test(projective_plane(), u))

    def test_non_smooth_polygon_is_heuristic(self):
        polygon = p135_resolved_at_30()
        self.assertFalse(is_smooth_compact(polygon))
        with self.assertLogs("toric_probes.potentials", level="WARNING"):
            certificate = geometric_nondisp_test(polygon, Vector(Fraction(27, 20), Fraction(31, 20)))
        self.assertTrue(certificate.heuristic)
        self.assertEqual((0, 4), certificate.tied)
        self.assertTrue(is_smooth_compact(projective_plane()))

    def test_boundary_point_rejected(self):
        with self.assertRaises(PolygonError):
            geometric_nondisp_test(projective_plane(), Vector(0, 2))


class Ghost_Tests(unittest.TestCase):
    def test_valid_ghosts(self):
        polygon = sector(3, 7)
        cases = [
            (HalfSpace(Vector(0, 1), Fraction(3, 5), ghost=True), True),
            (HalfSpace(Vector(-1, 3), Fraction(1, 5), ghost=True), True),
            (HalfSpace(Vector(-1, 1), Fraction(3), ghost=True), False),
            (HalfSpace(Vector(1, 1), Fraction(-1), ghost=True), False),
            (HalfSpace(Vector(1, 0), Fraction(0), ghost=True), False),
        ]
        for ghost, expected in cases:
            with self.subTest(ghost=str(ghost)):
                self.assertEqual(expected, is_valid_ghost(polygon, ghost))

    def test_enumeration(self):
        ghosts = enumerate_ghosts(sector(3, 7), Vector(Fraction(8, 5), 1), 4, Fraction(8, 5))
        self.assertEqual([(Vector(0, 1), Fraction(3, 5)), (Vector(-1, 3), Fraction(1, 5))],
                         [(g.eta, g.kappa) for g in ghosts])
        self.assertTrue(all(g.ghost for g in ghosts))

    def test_default_height(self):
        self.assertEqual(4, default_ghost_height(projective_plane()))
        self.assertEqual(4, default_ghost_height(sector(3, 7)))
        self.assertEqual(9, default_ghost_height(sector(1, 9)))


class Certification_Tests(unittest.TestCase):
    def test_sector_3_7(self):
        polygon = sector(3, 7)
        cases = [
            (Vector(Fraction(8, 5), 1), {(Vector(0, 1), Fraction(3, 5)): -3, (Vector(-1, 3), Fraction(1, 5)): 1}),
            (Vector(Fraction(19, 10), 1), {(Vector(0, 1), Fraction(3, 10)): 2, (Vector(-1, 3), Fraction(1, 5)): -3}),
        ]
        for x, expected in cases:
            with self.subTest(x=x):
                certificate = certify_nondisplaceable(polygon, x)
                self.assertEqual(QwKind.UNIT_POINT_SOLVED, certificate.kind)
                self.assertEqual(2, certificate.rank)
                terms = certificate.presentation.terms
                solved = {(terms[i].halfspace.eta, terms[i].halfspace.kappa): lead
                          for i, lead in certificate.unit_solution.items()}
                self.assertEqual(expected, solved)
                verify_qw_certificate(polygon, certificate)

        self.assertIsNone(certify_nondisplaceable(polygon, Vector(Fraction(7, 5), 1)))

    def test_sector_1_3(self):
        polygon = sector(1, 3)
        certificate = certify_nondisplaceable(polygon, Vector(Fraction(3, 2), 1))
        self.assertEqual({(Vector(0, 1), Fraction(1, 2))}, ghosts_of(certificate))
        self.assertEqual([Fraction(-3)], list(certificate.unit_solution.values()))

    def test_rank_one_without_ghosts(self):
        polygon = p135_resolved_at_30()
        certificate = certify_nondisplaceable(polygon, Vector(Fraction(27, 20), Fraction(31, 20)))
        self.assertEqual(1, certificate.rank)
        self.assertFalse(certificate.ghosts)
        self.assertEqual(Fraction(27, 20), certificate.level)
        self.assertEqual((0, 4), certificate.tied)
        self.assertEqual(Fraction(31, 20), certificate.second_level)
        self.assertEqual((1, 3), certificate.second_tied)
        self.assertEqual(certificate, solve_leading_order(certificate.presentation))
        verify_qw_certificate(polygon, certificate)

    def test_segment_needs_two_ghosts(self):
        polygon = p135_resolved_at_30()
        for t in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            with self.subTest(t=t):
                certificate = certify_nondisplaceable(polygon, Vector(t, 5 - 2 * t))
                self.assertEqual({(Vector(-1, -1), Fraction(5)), (Vector(-3, -2), Fraction(10))}, ghosts_of(certificate))
                self.assertEqual([Fraction(-1), Fraction(-1)], list(certificate.unit_solution.values()))

    def test_finite_volume_rank_one(self):
        polygon = finite_volume_a2()
        certificate = certify_nondisplaceable(polygon, Vector(Fraction(9, 5), Fraction(8, 5)))
        self.assertEqual(1, certificate.rank)
        self.assertEqual({(Vector(0, -1), Fraction(49, 20)), (Vector(-1, 1), Fraction(11, 10))}, ghosts_of(certificate))
        self.assertEqual(Fraction(9, 10), certificate.second_level)
        verify_qw_certificate(polygon, certificate)

    def test_smooth_compact_only_gets_candidates(self):
        certificate = certify_nondisplaceable(projective_plane(), Vector(2, 2))
        self.assertEqual(QwKind.GEOMETRIC_CANDIDATE, certificate.kind)
        self.assertIsNone(certify_nondisplaceable(projective_plane(), Vector(1, 2)))


class Verification_Tests(unittest.TestCase):
    def test_tampered_certificates(self):
        polygon = sector(3, 7)
        certificate = certify_nondisplaceable(polygon, Vector(Fraction(8, 5), 1))
        leads = list(certificate.leads)
        leads[-1] = Fraction(2)
        fixed = list(certificate.leads)
        fixed[0] = Fraction(3)
        ghost = HalfSpace(Vector(-1, 1), Fraction(3), ghost=True)
        cases = [
            replace(certificate, leads=tuple(leads)),
            replace(certificate, leads=tuple(fixed)),
            replace(certificate, leads=certificate.leads[:-1]),
            replace(certificate, level=Fraction(1)),
            replace(certificate, rank=3),
            replace(certificate, presentation=PotentialPresentation(polygon, certificate.point, (ghost,))),
            replace(certificate, presentation=PotentialPresentation(polygon, Vector(0, 0), certificate.ghosts)),
        ]
        for tampered in cases:
            with self.subTest(tampered=tampered):
                with self.assertRaises(QwCertificateError):
                    verify_qw_certificate(polygon, tampered)

    def test_candidate_must_match_profile(self):
        certificate = geometric_nondisp_test(projective_plane(), Vector(2, 2))
        with self.assertRaises(QwCertificateError):
            verify_qw_certificate(projective_plane(), replace(certificate, tied=(0, 1)))
        moved = replace(certificate, presentation=PotentialPresentation(projective_plane(), Vector(1, 2)))
        with self.assertRaises(QwCertificateError):
            verify_qw_certificate(projective_plane(), moved)


if __name__ == "__main__":
    unittest.main()
