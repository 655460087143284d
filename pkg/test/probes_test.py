from dataclasses import replace
from fractions import Fraction
import unittest

from toric_probes.affine import INF, Vector
from toric_probes.polygons import HalfSpace, build_polygon
from toric_probes.probes import (
    FlagKind, FlagRejectedError, InvalidProbeError, ProbeError, build_flagged, build_symmetric_extension,
    check_certificate, check_flagged, check_probe, check_symmetric_extension, displaces, flag_directions,
    flag_length_bound, flagged_displaces, is_symmetric, make_probe, maximize_flag, probe_displaces,
    reverse_symmetric_extension, sep_displaces, truncate_probe,
)
from toric_probes.resolutions import finite_volume_a2, hirzebruch, projective_plane, sector, sector_open


def hirzebruch_extension():
    """The extended probe of the Hirzebruch trapezoid deflected at (3/4, 3/2)."""
    polygon = hirzebruch(3, Fraction(7, 2))
    probe = make_probe(polygon, 3, Vector(2, Fraction(3, 2)), Vector(-1, 0), Fraction(5, 4))
    deflector = make_probe(polygon, 2, Vector(Fraction(1, 4), 2), Vector(1, -1))
    return polygon, build_symmetric_extension(polygon, probe, deflector)


def open_sector_flag_setup():
    polygon = sector_open(2, 3, Fraction(2))
    probe = make_probe(polygon, 0, Vector(0, 2), Vector(1, 0), Fraction(5, 2))
    deflector = make_probe(polygon, 1, Vector(Fraction(1, 2), 0), Vector(1, 1))
    return polygon, probe, deflector


def clifford_flag_setup():
    polygon = projective_plane(Fraction(6))
    probe = make_probe(polygon, 0, Vector(0, 2), Vector(1, 0), Fraction(3))
    deflector = make_probe(polygon, 2, Vector(3, 3), Vector(0, -1))
    return polygon, probe, deflector


class Probe_Tests(unittest.TestCase):
    def test_full_probe(self):
        probe = make_probe(projective_plane(), 0, Vector(0, 2), Vector(1, 0))
        self.assertEqual(Fraction(4), probe.length)
        self.assertEqual(Vector(4, 2), probe.endpoint)
        self.assertEqual((2,), probe.exit_facets)
        self.assertTrue(probe.is_full)
        check_probe(projective_plane(), probe)

    def test_truncate_probe(self):
        probe = make_probe(projective_plane(), 0, Vector(0, 2), Vector(1, 0))
        truncated = make_probe(projective_plane(), 0, Vector(0, 2), Vector(1, 0), Fraction(3))
        self.assertEqual(truncated, truncate_probe(probe, 3))
        for length in (Fraction(0), Fraction(4), Fraction(5)):
            with self.subTest(length=length):
                with self.assertRaises(InvalidProbeError):
                    truncate_probe(probe, length)

    def test_halfway_criterion(self):
        probe = make_probe(projective_plane(), 0, Vector(0, 2), Vector(1, 0))
        cases = [
            (Vector(1, 2), True),
            (Vector(Fraction(19, 10), 2), True),
            (Vector(2, 2), False),
            (Vector(3, 2), False),
        ]
        for u, expected in cases:
            with self.subTest(u=u):
                self.assertEqual(expected, probe_displaces(probe, u))
        for off_probe in (Vector(1, 1), Vector(0, 2), Vector(4, 2)):
            with self.subTest(u=off_probe):
                with self.assertRaises(ProbeError):
                    probe_displaces(probe, off_probe)
                self.assertFalse(displaces(probe, off_probe))

    def test_longer_probes_displace_more(self):
        full = make_probe(projective_plane(), 0, Vector(0, 2), Vector(1, 0))
        probes = [truncate_probe(full, length) for length in (Fraction(3, 2), Fraction(5, 2), Fraction(3))] + [full]
        for t in (Fraction(k, 4) for k in range(1, 6)):
            u = full.point_at(t)
            displaced = [probe_displaces(probe, u) for probe in probes if t < probe.length]
            with self.subTest(u=u):
                self.assertEqual(sorted(displaced), displaced)
                self.assertTrue(displaced[-1])

    def test_infinite_probe(self):
        probe = make_probe(sector(3, 7), 0, Vector(0, 1), Vector(1, 1))
        self.assertIs(INF, probe.length)
        self.assertIsNone(probe.endpoint)
        self.assertTrue(probe_displaces(probe, Vector(100, 101)))

    def test_truncated_probe(self):
        polygon = projective_plane()
        probe = make_probe(polygon, 0, Vector(0, 2), Vector(1, 0), Fraction(3))
        self.assertEqual(Vector(3, 2), probe.endpoint)
        self.assertFalse(probe.is_full)
        check_probe(polygon, probe)
        with self.assertRaises(ProbeError):
            check_probe(polygon, replace(probe, endpoint=Vector(2, 2)))

    def test_invalid_probes(self):
        labelled = build_polygon([HalfSpace(Vector(2, 0), 0), HalfSpace(Vector(0, 1), 0), HalfSpace(Vector(-1, -1), 6)])
        cases = [
            (projective_plane(), 0, Vector(0, 2), Vector(2, 0), None),
            (projective_plane(), 0, Vector(0, 2), Vector(-1, 0), None),
            (projective_plane(), 0, Vector(0, 0), Vector(1, 0), None),
            (projective_plane(), 0, Vector(0, 7), Vector(1, 0), None),
            (projective_plane(), 0, Vector(0, 2), Vector(1, 0), Fraction(5)),
            (projective_plane(), 3, Vector(0, 2), Vector(1, 0), None),
            (sector_open(2, 3, Fraction(2)), 2, Vector(4, 2), Vector(-1, -1), None),
            (labelled, 0, Vector(0, 2), Vector(1, 0), None),
        ]
        for polygon, facet, base, direction, length in cases:
            with self.subTest(polygon=polygon.name, facet=facet, base=base, direction=direction):
                with self.assertRaises(InvalidProbeError):
                    make_probe(polygon, facet, base, direction, length)

    def test_symmetry(self):
        polygon = hirzebruch()
        self.assertEqual(1, is_symmetric(polygon, make_probe(polygon, 2, Vector(Fraction(1, 4), 2), Vector(1, -1))))
        cp2 = projective_plane()
        self.assertIsNone(is_symmetric(cp2, make_probe(cp2, 0, Vector(0, 1), Vector(1, 1))))
        self.assertEqual(2, is_symmetric(cp2, make_probe(cp2, 0, Vector(0, 2), Vector(1, 0))))
        self.assertIsNone(is_symmetric(sector(3, 7), make_probe(sector(3, 7), 0, Vector(0, 1), Vector(1, 1))))


class Symmetric_Extension_Tests(unittest.TestCase):
    def test_hirzebruch_extension(self):
        polygon, sp = hirzebruch_extension()
        self.assertEqual(Vector(Fraction(3, 4), Fraction(3, 2)), sp.x_pq)
        self.assertEqual(Vector(Fraction(7, 4), Fraction(1, 2)), sp.x_pq_prime)
        self.assertEqual(Vector(-1, 0), sp.v_p_prime)
        self.assertEqual(Fraction(7, 4), sp.extension_length)
        self.assertEqual(Vector(0, Fraction(1, 2)), sp.extension_end)
        self.assertEqual(Fraction(3), sp.total_length)
        check_symmetric_extension(polygon, sp)

    def test_displacement(self):
        _, sp = hirzebruch_extension()
        cases = [
            (Vector(1, Fraction(3, 2)), True),
            (Vector(Fraction(1, 2), Fraction(3, 2)), False),
            (Vector(Fraction(13, 8), Fraction(1, 2)), True),
            (Vector(1, Fraction(1, 2)), False),
        ]
        for u, expected in cases:
            with self.subTest(u=u):
                self.assertEqual(expected, sep_displaces(sp, u))
        with self.assertRaises(ProbeError):
            sep_displaces(sp, Vector(1, 1))
        self.assertFalse(displaces(sp, Vector(1, 1)))

    def test_reversal(self):
        polygon, sp = hirzebruch_extension()
        reversed_sp = reverse_symmetric_extension(polygon, sp)
        self.assertEqual(sp.total_length, reversed_sp.total_length)
        self.assertEqual(Vector(0, Fraction(1, 2)), reversed_sp.probe.base)
        self.assertEqual(Vector(Fraction(3, 4), Fraction(3, 2)), reversed_sp.x_pq_prime)
        self.assertEqual(Vector(2, Fraction(3, 2)), reversed_sp.extension_end)
        self.assertTrue(sep_displaces(reversed_sp, Vector(1, Fraction(1, 2))))
        check_symmetric_extension(polygon, reversed_sp)

    def test_rejects_non_symmetric_deflector(self):
        polygon = projective_plane()
        probe = make_probe(polygon, 1, Vector(1, 0), Vector(0, 1), Fraction(2))
        deflector = make_probe(polygon, 0, Vector(0, 1), Vector(1, 1))
        with self.assertRaises(InvalidProbeError):
            build_symmetric_extension(polygon, probe, deflector)

    def test_tampered_extension(self):
        polygon, sp = hirzebruch_extension()
        with self.assertRaises(ProbeError):
            check_symmetric_extension(polygon, replace(sp, total_length=Fraction(4)))


class Flag_Tests(unittest.TestCase):
    def test_parallel_flag(self):
        polygon, probe, deflector = open_sector_flag_setup()
        fp = build_flagged(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(1, 2),
                           Vector(Fraction(7, 2), 3), Vector(Fraction(13, 2), 6), Fraction(7, 4))
        self.assertEqual(Fraction(0), fp.mu)
        self.assertEqual((Fraction(3), Fraction(6)), (fp.alpha, fp.alpha_prime))
        self.assertEqual(Vector(1, 0), fp.v_f)
        self.assertEqual(fp.v_f, fp.v_f_prime)
        self.assertEqual(Fraction(17, 4), fp.total_length)
        self.assertTrue(flagged_displaces(fp, Vector(2, 2)))
        check_flagged(polygon, fp)

    def test_zero_length_flag(self):
        polygon, probe, deflector = open_sector_flag_setup()
        fp = build_flagged(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(0),
                           Vector(Fraction(7, 2), 3), Vector(Fraction(13, 2), 6), Fraction(0))
        self.assertEqual(probe.length, fp.total_length)
        self.assertFalse(flagged_displaces(fp, Vector(2, 2)))

    def test_rejections(self):
        polygon, probe, deflector = open_sector_flag_setup()
        cases = [
            (Vector(Fraction(7, 2), 3), Vector(Fraction(9, 2), 4), Fraction(1), "first-inequality"),
            (Vector(Fraction(7, 2), 3), Vector(Fraction(13, 2), 6), Fraction(2), "containment"),
        ]
        for x_f, x_f_prime, length, condition in cases:
            with self.subTest(condition=condition):
                with self.assertRaises(FlagRejectedError) as context:
                    build_flagged(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(0), x_f, x_f_prime, length)
                self.assertEqual(condition, context.exception.condition)

    def test_clifford_torus_counterexample_is_rejected(self):
        polygon, probe, deflector = clifford_flag_setup()
        with self.assertRaises(FlagRejectedError) as context:
            build_flagged(polygon, probe, deflector, FlagKind.GENERAL, Fraction(0),
                          Vector(3, Fraction(3, 2)), Vector(3, 0), Fraction(3, 2))
        self.assertEqual("second-inequality", context.exception.condition)

    def test_kind_must_match(self):
        polygon, probe, deflector = clifford_flag_setup()
        with self.assertRaises(InvalidProbeError):
            build_flagged(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(0),
                          Vector(3, Fraction(5, 2)), Vector(3, 0), Fraction(1, 2))
        with self.assertRaises(InvalidProbeError):
            build_flagged(polygon, probe, deflector, FlagKind.GENERAL, Fraction(3, 2),
                          Vector(3, Fraction(5, 2)), Vector(3, 0), Fraction(1, 2))

    def test_general_flag(self):
        polygon, probe, deflector = clifford_flag_setup()
        self.assertEqual((Vector(1, -1), Vector(1, 0)), flag_directions(probe, deflector, polygon, Fraction(0)))
        fp = build_flagged(polygon, probe, deflector, FlagKind.GENERAL, Fraction(0),
                           Vector(3, Fraction(5, 2)), Vector(3, 0), Fraction(1, 2))
        self.assertEqual(Vector(Fraction(7, 2), 2), fp.e_f)
        self.assertEqual(Vector(Fraction(7, 2), 0), fp.e_f_prime)
        self.assertEqual(Fraction(7, 2), fp.total_length)
        self.assertTrue(flagged_displaces(fp, Vector(1, 2)))
        self.assertFalse(flagged_displaces(fp, Vector(2, 2)))

    def test_maximized_flag_cannot_displace_the_clifford_torus(self):
        polygon, probe, deflector = clifford_flag_setup()
        fp = maximize_flag(polygon, probe, deflector, FlagKind.GENERAL, Fraction(0))
        self.assertIsNotNone(fp)
        self.assertEqual(Fraction(997, 1000), fp.flag_length)
        self.assertFalse(flagged_displaces(fp, Vector(2, 2)))
        check_flagged(polygon, fp)

    def test_maximized_parallel_flag_is_capped(self):
        polygon, probe, deflector = open_sector_flag_setup()
        fp = maximize_flag(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(0), cap=Fraction(64))
        self.assertEqual(Fraction(64), fp.flag_length)
        self.assertTrue(flagged_displaces(fp, Vector(2, 2)))
        check_flagged(polygon, fp)
        self.assertEqual(fp, maximize_flag(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(1, 2), cap=Fraction(64)))
        self.assertIsNone(maximize_flag(polygon, probe, deflector, FlagKind.GENERAL, Fraction(0)))

    def test_finite_volume_flag(self):
        polygon = finite_volume_a2()
        probe = make_probe(polygon, 0, Vector(0, Fraction(5, 4)), Vector(1, 0), Fraction(87, 50))
        deflector = make_probe(polygon, 4, Vector(Fraction(37, 25), Fraction(99, 100)), Vector(1, 1))
        self.assertEqual(Fraction(101, 100), deflector.length)
        fp = maximize_flag(polygon, probe, deflector, FlagKind.GENERAL, Fraction(0))
        self.assertEqual(Fraction(25899, 100000), fp.flag_length)
        self.assertTrue(flagged_displaces(fp, Vector(Fraction(3, 4), Fraction(5, 4))))
        check_certificate(polygon, fp)

    def test_tampered_flag(self):
        polygon, probe, deflector = clifford_flag_setup()
        fp = build_flagged(polygon, probe, deflector, FlagKind.GENERAL, Fraction(0),
                           Vector(3, Fraction(5, 2)), Vector(3, 0), Fraction(1, 2))
        with self.assertRaises(ProbeError):
            check_certificate(polygon, replace(fp, total_length=Fraction(4)))


class Flag_Length_Bound_Tests(unittest.TestCase):
    def test_bounds_the_maximized_flag(self):
        cases = [(clifford_flag_setup(), FlagKind.GENERAL), (open_sector_flag_setup(), FlagKind.PARALLEL)]
        for (polygon, probe, deflector), kind in cases:
            for mu in (Fraction(0), Fraction(1, 2), Fraction(1)):
                with self.subTest(kind=kind, mu=mu):
                    fp = maximize_flag(polygon, probe, deflector, kind, mu)
                    if fp is not None:
                        self.assertLessEqual(fp.flag_length, flag_length_bound(polygon, probe, deflector, mu))

    def test_clifford_torus_deflections(self):
        polygon, probe, deflector = clifford_flag_setup()
        self.assertEqual(Fraction(1), flag_length_bound(polygon, probe, deflector, Fraction(0)))

        polygon = projective_plane()
        deflector = make_probe(polygon, 1, Vector(3, 0), Vector(0, 1))
        self.assertEqual(Fraction(1), flag_length_bound(polygon, probe, deflector, Fraction(0)))
        fp = maximize_flag(polygon, probe, deflector, FlagKind.PARALLEL, Fraction(0))
        self.assertIsNotNone(fp)
        self.assertLess(fp.flag_length, 1)
        self.assertFalse(flagged_displaces(fp, Vector(2, 2)))

    def test_unbounded_deflector_keeps_the_cap(self):
        polygon, probe, deflector = open_sector_flag_setup()
        self.assertEqual(Fraction(64), flag_length_bound(polygon, probe, deflector, Fraction(0)))
        self.assertEqual(Fraction(8), flag_length_bound(polygon, probe, deflector, Fraction(0), cap=Fraction(8)))


if __name__ == "__main__":
    unittest.main()
