"""
Small exact linear inequality systems.

Constraints are kept in the form sum(coefficients[i] * x[i]) + constant >= 0 (or > 0 when strict).
Systems here have at most a handful of variables, so variables are eliminated by Fourier-Motzkin
and the remaining one-dimensional system is solved directly.
"""
from dataclasses import dataclass
from fractions import Fraction
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

from .utils import format_rational


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: Tuple[Fraction, ...]
    constant: Fraction
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in self.coefficients))
        object.__setattr__(self, "constant", Fraction(self.constant))

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * xi for c, xi in zip(self.coefficients, x)), self.constant)

    def holds(self, x: Sequence[Fraction]) -> bool:
        value = self.value(x)
        return value > 0 if self.strict else value >= 0

    def tightened(self, margin: Fraction) -> "LinearConstraint":
        """The non-strict constraint asking for at least `margin` where this one asks for > 0."""
        if not self.strict:
            return self
        return LinearConstraint(self.coefficients, self.constant - margin, strict=False)

    def __str__(self):
        terms = " + ".join(f"{format_rational(c)}*x{i}" for i, c in enumerate(self.coefficients) if c != 0)
        relation = ">" if self.strict else ">="
        return f"{terms or '0'} + {format_rational(self.constant)} {relation} 0"


@dataclass(frozen=True)
class Interval:
    """An interval of the real line; a missing bound is infinite."""
    lower: Optional[Fraction]
    upper: Optional[Fraction]
    lower_open: bool = False
    upper_open: bool = False

    @property
    def is_empty(self) -> bool:
        if self.lower is None or self.upper is None:
            return False
        if self.lower == self.upper:
            return self.lower_open or self.upper_open
        return self.lower > self.upper

    def contains(self, t: Fraction) -> bool:
        if self.lower is not None and (t < self.lower or (self.lower_open and t == self.lower)):
            return False
        if self.upper is not None and (t > self.upper or (self.upper_open and t == self.upper)):
            return False
        return True

    def interior_point(self, span: Fraction = Fraction(1)) -> Fraction:
        """A deterministic point of the interval: the midpoint, or `span` away from the only bound."""
        if self.lower is not None and self.upper is not None:
            return (self.lower + self.upper) / 2
        if self.lower is not None:
            return self.lower + span
        if self.upper is not None:
            return self.upper - span
        return Fraction(0)

    def samples(self, count: int) -> List[Fraction]:
        """`count` evenly spaced points strictly inside a bounded interval."""
        if self.lower is None or self.upper is None:
            raise ValueError("Only bounded intervals can be sampled")
        step = (self.upper - self.lower) / (count + 1)
        return [self.lower + i * step for i in range(1, count + 1)]


def solve_interval(constraints: Iterable[LinearConstraint]) -> Optional[Interval]:
    """
    Solves a system of constraints in a single variable.

    Returns:
        The feasible interval, or None if the system is infeasible.
    """
    lower, upper = None, None
    lower_open, upper_open = False, False
    for constraint in constraints:
        (a,) = constraint.coefficients
        b = constraint.constant
        if a == 0:
            if b < 0 or (constraint.strict and b == 0):
                return None
            continue
        bound = -b / a
        if a > 0:
            if lower is None or bound > lower or (bound == lower and constraint.strict):
                lower, lower_open = bound, constraint.strict
        else:
            if upper is None or bound < upper or (bound == upper and constraint.strict):
                upper, upper_open = bound, constraint.strict
    interval = Interval(lower, upper, lower_open, upper_open)
    return None if interval.is_empty else interval


def eliminate(constraints: Sequence[LinearConstraint], index: int) -> List[LinearConstraint]:
    """
    Projects a non-strict system along one variable (Fourier-Motzkin).

    The eliminated variable keeps its slot with a zero coefficient, so indices stay valid.
    """
    positive, negative, rest = [], [], []
    for constraint in constraints:
        coefficient = constraint.coefficients[index]
        if coefficient > 0:
            positive.append(constraint)
        elif coefficient < 0:
            negative.append(constraint)
        else:
            rest.append(constraint)

    combined = list(rest)
    for p in positive:
        for n in negative:
            a, b = p.coefficients[index], -n.coefficients[index]
            coefficients = tuple(b * pc + a * nc for pc, nc in zip(p.coefficients, n.coefficients))
            combined.append(LinearConstraint(coefficients, b * p.constant + a * n.constant,
                                             strict=p.strict or n.strict))
    return _deduplicate(combined)


def _deduplicate(constraints: Iterable[LinearConstraint]) -> List[LinearConstraint]:
    seen = {}
    for constraint in constraints:
        scale = max((abs(c) for c in constraint.coefficients), default=0)
        if scale == 0:
            seen[("trivial", constraint.constant, constraint.strict)] = constraint
            continue
        key = (tuple(c / scale for c in constraint.coefficients), constraint.strict)
        normalized = constraint.constant / scale
        if key not in seen or normalized < seen[key][0]:
            seen[key] = (normalized, constraint)
    result = []
    for key, entry in seen.items():
        result.append(entry if key[0] == "trivial" else entry[1])
    return result


def _bounds(constraints: Sequence[LinearConstraint], index: int,
            assignment: Sequence[Optional[Fraction]]) -> Optional[Interval]:
    reduced = []
    for constraint in constraints:
        constant = constraint.constant
        for i, c in enumerate(constraint.coefficients):
            if i != index and c != 0:
                constant += c * assignment[i]
        reduced.append(LinearConstraint((constraint.coefficients[index],), constant, constraint.strict))
    return solve_interval(reduced)


def maximize(constraints: Sequence[LinearConstraint], objective: int, order: Sequence[int],
             prefer_upper: Sequence[bool], cap: Fraction) -> Optional[List[Fraction]]:
    """
    Maximizes one variable of a non-strict system.

    Args:
        constraints: Non-strict constraints over n variables.
        objective: Index of the variable to maximize; an unbounded maximum is clipped at `cap`.
        order: Indices of the other variables in elimination order.
        prefer_upper: For each variable, whether back-substitution picks its upper bound
            (when finite) rather than its lower bound.
        cap: Value used when the objective is unbounded above.

    Returns:
        A feasible assignment with the objective maximal (or capped), or None if infeasible.
    """
    if any(c.strict for c in constraints):
        raise ValueError("Strict constraints must be tightened before maximizing")
    stages = [list(constraints)]
    for index in order:
        stages.append(eliminate(stages[-1], index))

    size = len(constraints[0].coefficients) if constraints else 0
    assignment: List[Optional[Fraction]] = [Fraction(0)] * size
    interval = _bounds(stages[-1], objective, assignment)
    if interval is None:
        return None
    value = interval.upper
    if value is None or value > cap:
        value = cap
    if interval.lower is not None and interval.lower > value:
        return None
    assignment[objective] = value

    for stage, index in zip(reversed(stages[:-1]), reversed(order)):
        interval = _bounds(stage, index, assignment)
        if interval is None:
            logger.debug("Back-substitution failed on variable %d", index)
            return None
        if prefer_upper[index] and interval.upper is not None:
            assignment[index] = interval.upper
        elif interval.lower is not None:
            assignment[index] = interval.lower
        else:
            assignment[index] = interval.interior_point()
    return assignment
