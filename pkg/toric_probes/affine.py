"""
Exact planar linear algebra and the integral affine primitives everything else is built on.

Points and vectors are pairs of Fractions. Distances may be infinite; the singleton ``INF``
orders above every rational so comparisons between distances stay total.
"""
from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Iterator, List, Tuple, TypeAlias, Union

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # sympy < 1.13
    from sympy.core.numbers import igcdex

from .utils import format_rational, parse_rational


T_Matrix: TypeAlias = Tuple[Tuple[int, int], Tuple[int, int]]


class AffineError(ValueError):
    """Base class for errors raised by the affine primitives."""


class ReflectionError(AffineError):
    """The data given does not define an integral affine reflection."""


class Infinity:
    """Positive infinity as a distance value."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("inf")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __truediv__(self, other):
        if other <= 0:
            raise AffineError("Infinity can only be divided by a positive number")
        return self

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()

Distance: TypeAlias = Union[Fraction, Infinity]


def format_distance(value: Distance) -> str:
    """Formats a distance as "p/q", or "inf"."""
    return "inf" if value is INF else format_rational(value)


def parse_distance(value: Union[str, int]) -> Distance:
    """Parses a distance written as "p/q", "p", or "inf"."""
    if isinstance(value, str) and value.strip() == "inf":
        return INF
    return parse_rational(value)


@dataclass(frozen=True)
class Vector:
    """
    An exact rational 2-vector, used both for points of the moment plane and for (integral) directions
    and conormals.
    """
    x1: Fraction
    x2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x1", Fraction(self.x1))
        object.__setattr__(self, "x2", Fraction(self.x2))

    @classmethod
    def parse(cls, values) -> "Vector":
        """Builds a vector from a pair of exact rationals (ints, Fractions, or "p/q" strings)."""
        x1, x2 = values
        return cls(parse_rational(x1), parse_rational(x2))

    def __iter__(self) -> Iterator[Fraction]:
        yield self.x1
        yield self.x2

    def __add__(self, other: "Vector") -> "Vector":
        return Vector(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: "Vector") -> "Vector":
        return Vector(self.x1 - other.x1, self.x2 - other.x2)

    def __neg__(self) -> "Vector":
        return Vector(-self.x1, -self.x2)

    def __mul__(self, scalar) -> "Vector":
        return Vector(self.x1 * scalar, self.x2 * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Vector":
        return Vector(self.x1 / scalar, self.x2 / scalar)

    def dot(self, other: "Vector") -> Fraction:
        return self.x1 * other.x1 + self.x2 * other.x2

    def det(self, other: "Vector") -> Fraction:
        """The determinant of the matrix with columns self and other."""
        return self.x1 * other.x2 - self.x2 * other.x1

    @property
    def is_zero(self) -> bool:
        return self.x1 == 0 and self.x2 == 0

    @property
    def integral(self) -> bool:
        return self.x1.denominator == 1 and self.x2.denominator == 1

    @property
    def is_primitive(self) -> bool:
        return self.integral and math.gcd(int(self.x1), int(self.x2)) == 1

    @property
    def height(self) -> int:
        """Max-norm of an integral vector."""
        return int(max(abs(self.x1), abs(self.x2)))

    def as_tuple(self) -> Tuple[Fraction, Fraction]:
        return (self.x1, self.x2)

    def __str__(self):
        return f"({format_rational(self.x1)},{format_rational(self.x2)})"


def make_primitive(v: Vector) -> Tuple[Vector, int]:
    """
    Factors an integral vector into a primitive vector and a positive multiplier.

    Args:
        v: A nonzero integral vector.

    Returns:
        The pair (primitive, multiplier) with multiplier * primitive == v.
        Applied to a conormal, the multiplier is the orbifold label of the facet.

    Raises:
        AffineError: If the vector is zero or not integral.
    """
    if not v.integral:
        raise AffineError(f"Vector {v} is not integral")
    if v.is_zero:
        raise AffineError("The zero vector has no primitive direction")
    multiplier = math.gcd(int(v.x1), int(v.x2))
    return Vector(v.x1 / multiplier, v.x2 / multiplier), multiplier


def primitive_direction(v: Vector) -> Tuple[Vector, Fraction]:
    """
    Writes a nonzero rational vector as t * w with w primitive and t > 0.

    Returns:
        The pair (w, t).
    """
    if v.is_zero:
        raise AffineError("The zero vector has no primitive direction")
    scale = math.lcm(v.x1.denominator, v.x2.denominator)
    primitive, multiplier = make_primitive(v * scale)
    return primitive, Fraction(multiplier, scale)


def is_integrally_transverse(eta: Vector, v: Vector) -> bool:
    """Whether the primitive direction v is integrally transverse to the primitive conormal eta."""
    return abs(eta.dot(v)) == 1


def _require_primitive(v: Vector, name: str):
    if not v.is_primitive:
        raise AffineError(f"{name} {v} is not a primitive integral vector")


def affine_distance_to_hyperplane(x: Vector, eta: Vector, kappa: Fraction) -> Fraction:
    """The affine distance |<eta, x> + kappa| from x to the rational line with primitive conormal eta."""
    _require_primitive(eta, "Conormal")
    return abs(eta.dot(x) + kappa)


def affine_distance_along_line(x: Vector, y: Vector) -> Fraction:
    """The affine distance |t| between two rational points, where x - y = t * v with v primitive."""
    if x == y:
        return Fraction(0)
    _, t = primitive_direction(x - y)
    return t


def directed_distance(x: Vector, eta: Vector, kappa: Fraction, v: Vector) -> Distance:
    """
    The affine distance along v from x to the line {<eta, .> + kappa = 0}.

    Returns:
        The parameter t >= 0 with x + t * v on the line, or INF if the ray never meets it.
    """
    _require_primitive(eta, "Conormal")
    _require_primitive(v, "Direction")
    slope = eta.dot(v)
    level = eta.dot(x) + kappa
    if slope == 0:
        return Fraction(0) if level == 0 else INF
    t = -level / slope
    return INF if t < 0 else t


def primitive_vectors(height: int) -> List[Vector]:
    """
    All primitive integral vectors (a, b) with max(|a|, |b|) <= height, ordered by height and then
    lexicographically.
    """
    if height < 1:
        raise AffineError(f"Height bound must be positive, got {height}")
    vectors = [Vector(a, b)
               for a in range(-height, height + 1)
               for b in range(-height, height + 1)
               if math.gcd(a, b) == 1]
    vectors.sort(key=lambda v: (v.height, v.x1, v.x2))
    return vectors


def complete_basis(eta: Vector) -> Vector:
    """
    A vector w with det(eta, w) == 1, completing the primitive vector eta to an oriented lattice basis.
    """
    _require_primitive(eta, "Vector")
    x, y, _ = igcdex(int(eta.x1), int(eta.x2))
    # x * a + y * b == 1, so det((a, b), (-y, x)) == 1
    return Vector(-y, x)


def transverse_directions(eta: Vector, height: int) -> List[Vector]:
    """
    The primitive directions v with <eta, v> == 1 and max-norm at most height, ordered by height.

    These are exactly the inward directions of probes based on a facet with conormal eta.
    """
    _require_primitive(eta, "Conormal")
    along = Vector(-eta.x2, eta.x1)
    particular = _dual_solution(eta)
    reach = height + particular.height
    directions = []
    for k in range(-reach, reach + 1):
        v = particular + k * along
        if v.height <= height:
            directions.append(v)
    directions.sort(key=lambda v: (v.height, v.x1, v.x2))
    return directions


def _dual_solution(eta: Vector) -> Vector:
    x, y, _ = igcdex(int(eta.x1), int(eta.x2))
    return Vector(x, y)


def _matmul(a: T_Matrix, b: T_Matrix) -> T_Matrix:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


IDENTITY: T_Matrix = ((1, 0), (0, 1))


@dataclass(frozen=True)
class IntegralAffineMap:
    """
    An element of R^2 x| GL(2, Z) acting on the moment plane as x -> linear * x + translation.
    """
    linear: T_Matrix
    translation: Vector

    def __post_init__(self):
        linear = tuple(tuple(int(entry) for entry in row) for row in self.linear)
        object.__setattr__(self, "linear", linear)
        if abs(self.determinant) != 1:
            raise AffineError(f"Linear part {linear} is not unimodular")

    @property
    def determinant(self) -> int:
        (a, b), (c, d) = self.linear
        return a * d - b * c

    def apply(self, x: Vector) -> Vector:
        return self.apply_linear(x) + self.translation

    def apply_linear(self, v: Vector) -> Vector:
        (a, b), (c, d) = self.linear
        return Vector(a * v.x1 + b * v.x2, c * v.x1 + d * v.x2)

    def apply_dual(self, eta: Vector) -> Vector:
        """The transpose action on conormals: <apply_dual(eta), v> == <eta, apply_linear(v)>."""
        (a, b), (c, d) = self.linear
        return Vector(a * eta.x1 + c * eta.x2, b * eta.x1 + d * eta.x2)

    def inverse(self) -> "IntegralAffineMap":
        (a, b), (c, d) = self.linear
        det = self.determinant
        linear = ((d * det, -b * det), (-c * det, a * det))
        inverse_linear = IntegralAffineMap(linear, Vector(0, 0))
        return IntegralAffineMap(linear, -inverse_linear.apply_linear(self.translation))

    def transform_halfspace(self, eta: Vector, kappa: Fraction) -> Tuple[Vector, Fraction]:
        """
        Pushes the constraint <eta, x> + kappa >= 0 forward along this map.

        Returns:
            The conormal and support constant of the image constraint.
        """
        inverse = self.inverse()
        image_eta = inverse.apply_dual(eta)
        return image_eta, kappa - image_eta.dot(self.translation)


@dataclass(frozen=True)
class AffineReflection(IntegralAffineMap):
    """
    An integral affine involution with determinant -1, as used to reflect a probe through a
    symmetric deflecting probe.
    """
    def __post_init__(self):
        super().__post_init__()
        if _matmul(self.linear, self.linear) != IDENTITY:
            raise ReflectionError(f"Linear part {self.linear} is not an involution")
        if self.determinant != -1:
            raise ReflectionError(f"Linear part {self.linear} does not reverse orientation")


def reflection_from_facets(eta: Vector, kappa: Fraction, eta_prime: Vector, kappa_prime: Fraction,
                           v: Vector) -> AffineReflection:
    """
    Builds the reflection swapping the facet {<eta, .> + kappa = 0} with {<eta_prime, .> + kappa_prime = 0}
    along the direction v.

    Args:
        eta, kappa: Conormal and support constant of the base facet, with <eta, v> == 1.
        eta_prime, kappa_prime: Conormal and support constant of the exit facet, with <eta_prime, v> == -1.
        v: The primitive direction of the symmetric probe.

    Returns:
        The reflection x -> x + <eta_prime - eta, x> v + (kappa_prime - kappa) v.

    Raises:
        ReflectionError: If v is not transverse to the facets with the required signs.
    """
    _require_primitive(v, "Direction")
    if eta.dot(v) != 1 or eta_prime.dot(v) != -1:
        raise ReflectionError(
            f"Direction {v} must satisfy <eta, v> = 1 and <eta', v> = -1, "
            f"got {format_rational(eta.dot(v))} and {format_rational(eta_prime.dot(v))}")
    difference = eta_prime - eta
    linear = tuple(
        tuple(int((1 if i == j else 0) + (v.x1, v.x2)[i] * (difference.x1, difference.x2)[j]) for j in range(2))
        for i in range(2)
    )
    reflection = AffineReflection(linear, v * (Fraction(kappa_prime) - Fraction(kappa)))
    if reflection.apply_linear(v) != -v or reflection.apply_dual(eta) != eta_prime:
        raise ReflectionError("Reflection does not swap the two facets")
    return reflection
