from fractions import Fraction
import unittest

from toric_probes.inequalities import Interval, LinearConstraint, eliminate, maximize, solve_interval


def at_least(coefficients, constant, strict=False):
    return LinearConstraint(tuple(Fraction(c) for c in coefficients), Fraction(constant), strict)


class Interval_Tests(unittest.TestCase):
    def test_solve_interval(self):
        cases = [
            ([at_least([1], -1), at_least([-1], 3)], Interval(Fraction(1), Fraction(3))),
            ([at_least([1], -1, strict=True), at_least([-2], 6)], Interval(Fraction(1), Fraction(3), lower_open=True)),
            ([at_least([1], 0), at_least([0], 5)], Interval(Fraction(0), None)),
            ([at_least([1], -2), at_least([1], -1, strict=True)], Interval(Fraction(2), None)),
            ([at_least([1], -2), at_least([1], -2, strict=True)], Interval(Fraction(2), None, lower_open=True)),
        ]
        for constraints, expected in cases:
            with self.subTest(constraints=[str(c) for c in constraints]):
                self.assertEqual(expected, solve_interval(constraints))

    def test_infeasible(self):
        cases = [
            [at_least([1], -3), at_least([-1], 1)],
            [at_least([1], -1, strict=True), at_least([-1], 1)],
            [at_least([0], 0, strict=True)],
            [at_least([0], -1)],
        ]
        for constraints in cases:
            with self.subTest(constraints=[str(c) for c in constraints]):
                self.assertIsNone(solve_interval(constraints))

    def test_points(self):
        interval = Interval(Fraction(2), Fraction(3), lower_open=True, upper_open=True)
        self.assertFalse(interval.contains(Fraction(2)))
        self.assertTrue(interval.contains(Fraction(5, 2)))
        self.assertEqual(Fraction(5, 2), interval.interior_point())
        self.assertEqual([Fraction(9, 4), Fraction(5, 2), Fraction(11, 4)], interval.samples(3))
        self.assertEqual(Fraction(3), Interval(Fraction(2), None).interior_point())
        with self.assertRaises(ValueError):
            Interval(Fraction(2), None).samples(3)

    def test_tightened(self):
        constraint = at_least([1, -1], 0, strict=True)
        tightened = constraint.tightened(Fraction(1, 10))
        self.assertFalse(tightened.strict)
        self.assertEqual(Fraction(-1, 10), tightened.constant)
        self.assertIs(tightened, tightened.tightened(Fraction(1)))


class Elimination_Tests(unittest.TestCase):
    def test_eliminate_keeps_slots(self):
        # x >= 0, y >= x, 4 - x - y >= 0  ->  projection onto y: 0 <= y <= 4
        constraints = [at_least([1, 0], 0), at_least([-1, 1], 0), at_least([-1, -1], 4)]
        projected = eliminate(constraints, 0)
        self.assertTrue(all(c.coefficients[0] == 0 for c in projected))
        self.assertEqual(Interval(Fraction(0), Fraction(4)),
                         solve_interval([LinearConstraint((c.coefficients[1],), c.constant) for c in projected]))

    def test_maximize(self):
        # maximize y subject to x >= 0, y <= 2x, x + y <= 3  ->  x = 1, y = 2
        constraints = [at_least([1, 0], 0), at_least([2, -1], 0), at_least([-1, -1], 3)]
        self.assertEqual([Fraction(1), Fraction(2)],
                         maximize(constraints, objective=1, order=(0,), prefer_upper=(False, True), cap=Fraction(64)))

    def test_maximize_unbounded_is_capped(self):
        constraints = [at_least([1, 0], 0), at_least([1, -1], 0)]
        result = maximize(constraints, objective=1, order=(0,), prefer_upper=(False, True), cap=Fraction(10))
        self.assertEqual(Fraction(10), result[1])
        self.assertTrue(all(c.holds(result) for c in constraints))

    def test_maximize_infeasible(self):
        constraints = [at_least([1, 0], -1), at_least([-1, 0], 0), at_least([0, 1], 0)]
        self.assertIsNone(maximize(constraints, objective=1, order=(0,), prefer_upper=(False, True), cap=Fraction(10)))

    def test_maximize_rejects_strict(self):
        with self.assertRaises(ValueError):
            maximize([at_least([1], 0, strict=True)], objective=0, order=(), prefer_upper=(True,), cap=Fraction(1))


if __name__ == "__main__":
    unittest.main()
