from dataclasses import replace
from fractions import Fraction
import random
import unittest

from toric_probes.affine import IntegralAffineMap, Vector
from toric_probes.polygons import (
    Closure, DuplicateFacetError, EmptyPolygonError, HalfSpace, Membership, PolygonError, build_polygon,
    closest_facet_profile, closure_ray_exit, contains, facet_profile, is_smooth, ray_exit, transform_polygon, vertex_orders,
)
from toric_probes.resolutions import finite_volume_a2, hirzebruch, projective_plane, sector, sector_open


UNIMODULAR_GENERATORS = [((1, 1), (0, 1)), ((1, 0), (1, 1)), ((0, 1), (1, 0))]


def random_unimodular(rng: random.Random, steps: int = 5) -> IntegralAffineMap:
    linear = ((1, 0), (0, 1))
    for _ in range(steps):
        (a, b), (c, d) = linear
        (e, f), (g, h) = rng.choice(UNIMODULAR_GENERATORS)
        linear = ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))
    return IntegralAffineMap(linear, Vector(Fraction(rng.randint(-5, 5), 2), Fraction(rng.randint(-5, 5), 3)))


class HalfSpace_Tests(unittest.TestCase):
    def test_normalizes_conormal(self):
        h = HalfSpace(Vector(4, -6), Fraction(3))
        self.assertEqual(Vector(2, -3), h.eta)
        self.assertEqual(Fraction(3, 2), h.kappa)
        self.assertEqual(2, h.label)
        self.assertEqual(h.level(Vector(1, 1)) * 2, 4 * 1 - 6 * 1 + 3)

    def test_invalid(self):
        with self.assertRaises(PolygonError):
            HalfSpace(Vector(0, 0), Fraction(1))
        with self.assertRaises(PolygonError):
            HalfSpace(Vector(1, 0), Fraction(1), label=0)

    def test_edge_direction_keeps_polygon_on_the_left(self):
        for eta in (Vector(1, 0), Vector(-3, 7), Vector(-1, -1)):
            direction = HalfSpace(eta, 0).edge_direction
            with self.subTest(eta=eta):
                self.assertEqual(0, eta.dot(direction))
                self.assertGreater(direction.det(eta), 0)

    def test_str(self):
        self.assertEqual("<(-1,-1), x> + 6 >= 0", str(HalfSpace(Vector(-1, -1), 6)))
        self.assertEqual("<(0,-1), x> + 2 > 0", str(HalfSpace(Vector(0, -1), 2, Closure.OPEN)))


class Polygon_Build_Tests(unittest.TestCase):
    def test_projective_plane(self):
        polygon = projective_plane()
        self.assertEqual([Vector(0, 0), Vector(0, 6), Vector(6, 0)], [v.point for v in polygon.vertices])
        self.assertEqual([(0, 1), (0, 2), (1, 2)], [v.facets for v in polygon.vertices])
        self.assertTrue(polygon.is_bounded)
        self.assertTrue(polygon.is_closed)
        self.assertTrue(is_smooth(polygon))
        self.assertFalse(polygon.ghost_facets)

    def test_hirzebruch(self):
        polygon = hirzebruch()
        expected = {Vector(0, 0), Vector(0, 2), Vector(Fraction(1, 2), 2), Vector(Fraction(13, 2), 0)}
        self.assertSetEqual(expected, {v.point for v in polygon.vertices})
        self.assertTrue(is_smooth(polygon))

    def test_sector_orders(self):
        polygon = sector(3, 7)
        self.assertFalse(polygon.is_bounded)
        self.assertEqual({Vector(0, 0): 7}, dict(vertex_orders(polygon)))
        self.assertFalse(is_smooth(polygon))

    def test_ghost_constraint_is_marked(self):
        polygon = build_polygon([
            HalfSpace(Vector(1, 0), 0),
            HalfSpace(Vector(0, 1), 0),
            HalfSpace(Vector(-1, -1), 6),
            HalfSpace(Vector(-1, 0), 10),
            HalfSpace(Vector(-1, 1), 6),
        ])
        self.assertEqual({3, 4}, set(polygon.ghost_facets))
        self.assertEqual([0, 1, 2], list(polygon.geometric_facets))
        self.assertTrue(polygon.halfspaces[3].ghost)
        self.assertTrue(polygon.halfspaces[4].ghost)
        self.assertFalse(polygon.halfspaces[0].ghost)

    def test_halfspace_order_does_not_matter(self):
        rng = random.Random(5)
        ghosted = build_polygon(list(projective_plane().halfspaces) + [HalfSpace(Vector(-1, 0), 10)])
        samples = [Vector(Fraction(a, 2), Fraction(b, 2)) for a in range(-2, 15) for b in range(-2, 15)]
        for polygon in (hirzebruch(), sector_open(2, 3, Fraction(2)), finite_volume_a2(), ghosted):
            halfspaces = [replace(h, ghost=False) for h in polygon.halfspaces]
            shuffled = list(halfspaces)
            rng.shuffle(shuffled)
            for order in (list(reversed(halfspaces)), shuffled):
                with self.subTest(polygon=polygon.name, order=[str(h) for h in order]):
                    rebuilt = build_polygon(order)
                    self.assertSetEqual({v.point for v in polygon.vertices}, {v.point for v in rebuilt.vertices})
                    for p in (polygon, rebuilt):
                        self.assertEqual(len(p.halfspaces), len(p.geometric_facets) + len(p.ghost_facets))
                    self.assertSetEqual(
                        {polygon.halfspaces[i] for i in polygon.geometric_facets},
                        {rebuilt.halfspaces[i] for i in rebuilt.geometric_facets})
                    self.assertSetEqual(
                        {polygon.halfspaces[i] for i in polygon.ghost_facets},
                        {rebuilt.halfspaces[i] for i in rebuilt.ghost_facets})
                    for mode in Membership:
                        for x in samples:
                            self.assertEqual(contains(polygon, x, mode), contains(rebuilt, x, mode))

    def test_invalid_polygons(self):
        cases = [
            ([HalfSpace(Vector(1, 0), 0)], PolygonError),
            ([HalfSpace(Vector(1, 0), 0), HalfSpace(Vector(-1, 0), -1)], EmptyPolygonError),
            ([HalfSpace(Vector(1, 0), 0), HalfSpace(Vector(0, 1), 0), HalfSpace(Vector(1, 0), 2)], DuplicateFacetError),
            ([HalfSpace(Vector(1, 0), 0), HalfSpace(Vector(-1, 0), 1)], PolygonError),
            ([HalfSpace(Vector(1, 0), 0), HalfSpace(Vector(0, 1), 0), HalfSpace(Vector(-1, -1), 0)], EmptyPolygonError),
        ]
        for halfspaces, error in cases:
            with self.subTest(halfspaces=halfspaces):
                with self.assertRaises(error):
                    build_polygon(halfspaces)


class Membership_Tests(unittest.TestCase):
    def test_open_facet(self):
        polygon = sector_open(2, 3, Fraction(2))
        boundary_point = Vector(Fraction(1, 2), 0)
        self.assertTrue(contains(polygon, boundary_point))
        self.assertFalse(contains(polygon, boundary_point, Membership.INTERIOR))
        self.assertTrue(contains(polygon, boundary_point, Membership.AS_DECLARED))

        open_point = Vector(Fraction(5, 2), 1)
        self.assertEqual(0, polygon.level(2, open_point))
        self.assertTrue(contains(polygon, open_point))
        self.assertFalse(contains(polygon, open_point, Membership.AS_DECLARED))

    def test_outside(self):
        polygon = projective_plane()
        for point in (Vector(-1, 1), Vector(4, 4), Vector(1, Fraction(-1, 100))):
            with self.subTest(point=point):
                self.assertFalse(contains(polygon, point))


class Ray_Exit_Tests(unittest.TestCase):
    def test_exit_through_edge(self):
        exit_ = ray_exit(projective_plane(), Vector(1, 2), Vector(1, 0))
        self.assertEqual(Vector(4, 2), exit_.point)
        self.assertEqual((2,), exit_.facets)
        self.assertEqual(Fraction(3), exit_.t)
        self.assertFalse(exit_.at_vertex)

    def test_exit_through_vertex(self):
        exit_ = ray_exit(projective_plane(), Vector(1, 1), Vector(-1, 1))
        self.assertEqual(Vector(0, 2), exit_.point)
        self.assertEqual((0,), exit_.facets)

        corner = ray_exit(projective_plane(), Vector(1, 1), Vector(-1, -1))
        self.assertTrue(corner.at_vertex)
        self.assertEqual((0, 1), corner.facets)

    def test_unbounded_ray(self):
        self.assertIsNone(ray_exit(sector(3, 7), Vector(1, 1), Vector(1, 1)))

    def test_rejected_rays(self):
        cases = [
            (Vector(-1, 0), Vector(1, 0)),
            (Vector(0, 2), Vector(1, 0)),
            (Vector(2, 0), Vector(0, 1)),
            (Vector(1, 1), Vector(2, 0)),
            (Vector(1, 1), Vector(Fraction(1, 2), 0)),
        ]
        for x, v in cases:
            with self.subTest(x=x, v=v):
                with self.assertRaises(PolygonError):
                    ray_exit(projective_plane(), x, v)

    def test_rays_from_the_boundary(self):
        exit_ = closure_ray_exit(projective_plane(), Vector(0, 2), Vector(1, 0))
        self.assertEqual(Vector(4, 2), exit_.point)
        self.assertEqual(Fraction(4), exit_.t)
        for x, v in ((Vector(-1, 0), Vector(1, 0)), (Vector(0, 2), Vector(-1, 0))):
            with self.subTest(x=x, v=v):
                with self.assertRaises(PolygonError):
                    closure_ray_exit(projective_plane(), x, v)


class Facet_Profile_Tests(unittest.TestCase):
    def test_profile(self):
        profile = facet_profile({0: Fraction(1), 1: Fraction(1, 2), 2: Fraction(1, 2), 3: Fraction(3)})
        self.assertEqual(Fraction(1, 2), profile.level)
        self.assertEqual((1, 2), profile.closest)
        self.assertEqual((0,), profile.second)
        self.assertEqual(Fraction(1), profile.second_level)

    def test_single_level(self):
        profile = closest_facet_profile(projective_plane(), Vector(2, 2))
        self.assertEqual(Fraction(2), profile.level)
        self.assertEqual((0, 1, 2), profile.closest)
        self.assertIsNone(profile.second_level)

    def test_open_facets_are_included(self):
        profile = closest_facet_profile(finite_volume_a2(), Vector(Fraction(9, 5), Fraction(8, 5)))
        self.assertEqual(Fraction(2, 5), profile.level)
        self.assertEqual((2,), profile.closest)
        self.assertEqual((3,), profile.second)
        self.assertEqual(Fraction(17, 20), profile.second_level)

    def test_boundary_point_rejected(self):
        with self.assertRaises(PolygonError):
            closest_facet_profile(projective_plane(), Vector(0, 1))


class Transform_Tests(unittest.TestCase):
    def test_combinatorics_are_invariant(self):
        rng = random.Random(2024)
        for polygon in (projective_plane(), hirzebruch(), sector(3, 7), finite_volume_a2()):
            phi = random_unimodular(rng)
            image = transform_polygon(polygon, phi)
            with self.subTest(polygon=polygon.name):
                self.assertEqual(sorted(vertex_orders(polygon).values()), sorted(vertex_orders(image).values()))
                self.assertSetEqual({phi.apply(v.point) for v in polygon.vertices}, {v.point for v in image.vertices})
                self.assertEqual(set(polygon.ghost_facets), set(image.ghost_facets))

    def test_translation(self):
        shift = IntegralAffineMap(((1, 0), (0, 1)), Vector(1, 2))
        image = transform_polygon(projective_plane(), shift)
        self.assertEqual([Vector(1, 2), Vector(1, 8), Vector(7, 2)], [v.point for v in image.vertices])


if __name__ == "__main__":
    unittest.main()
