"""
Hirzebruch-Jung continued fractions, cyclic quotient sectors, and the named scenario polygons.

The continued fraction convention is n/m = 1 / (E_1 - 1 / (E_2 - ... - 1 / E_k)) with every E_j >= 2.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .affine import IntegralAffineMap, Vector, complete_basis
from .polygons import Closure, HalfSpace, Polygon, PolygonError, build_polygon, is_smooth
from .utils import format_rational, parse_rational


logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Parameters outside the validity window of a scenario."""
    def __init__(self, scenario: str, condition: str):
        self.scenario = scenario
        self.condition = condition
        super().__init__(f"{scenario}: condition violated: {condition}")


@dataclass(frozen=True)
class ContinuedFraction:
    n: int
    m: int
    terms: Tuple[int, ...]
    remainders: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class SectorDuality:
    n: int
    m: int
    n_tilde: int
    q: int
    matrix: Tuple[Tuple[int, int], Tuple[int, int]]

    @property
    def transform(self) -> IntegralAffineMap:
        return IntegralAffineMap(self.matrix, Vector(0, 0))


@dataclass(frozen=True)
class SectorRegion:
    """The closed cone {lower * x2 <= x1 <= upper * x2} of a sector."""
    lower: Fraction
    upper: Fraction

    def contains(self, x: Vector) -> bool:
        return self.lower * x.x2 <= x.x1 <= self.upper * x.x2

    def strictly_contains(self, x: Vector) -> bool:
        return self.lower * x.x2 < x.x1 < self.upper * x.x2


def _check_sector(n: int, m: int, minimal_n: int = 1):
    if not (isinstance(n, int) and isinstance(m, int)):
        raise ValueError(f"Sector parameters must be integers, got ({n!r}, {m!r})")
    if not (m > n >= minimal_n):
        raise ValueError(f"Sector parameters must satisfy m > n >= {minimal_n}, got ({n}, {m})")
    if math.gcd(n, m) != 1:
        raise ValueError(f"Sector parameters must be coprime, got ({n}, {m})")


def hj_expand(n: int, m: int) -> ContinuedFraction:
    """
    Expands n/m into its Hirzebruch-Jung continued fraction by the ceiling Euclidean algorithm.

    Args:
        n: Positive integer coprime to m.
        m: Integer greater than n.

    Returns:
        The terms E_1..E_k and the remainders r_{-1} = m, r_0 = n, ..., r_k = 0.
    """
    _check_sector(n, m)
    remainders = [m, n]
    terms = []
    while remainders[-1] != 0:
        previous, current = remainders[-2], remainders[-1]
        term = -(-previous // current)
        terms.append(term)
        remainders.append(term * current - previous)
    return ContinuedFraction(n, m, tuple(terms), tuple(remainders))


def hj_evaluate(terms: Sequence[int]) -> Fraction:
    """Evaluates 1 / (E_1 - 1 / (E_2 - ...)) exactly."""
    if not terms:
        raise ValueError("A continued fraction needs at least one term")
    if any(term < 2 for term in terms):
        raise ValueError(f"Continued fraction terms must be at least 2, got {list(terms)}")
    value = Fraction(terms[-1])
    for term in reversed(terms[:-1]):
        value = term - 1 / value
    return 1 / value


def conormal_chain(cf: ContinuedFraction) -> List[Vector]:
    """The conormals eta_0 = (1,0), eta_1 = (0,1), eta_{j+1} = E_j eta_j - eta_{j-1}, ending at (-n, m)."""
    chain = [Vector(1, 0), Vector(0, 1)]
    for term in cf.terms:
        chain.append(term * chain[-1] - chain[-2])
    return chain


def dual_pair(n: int, m: int) -> SectorDuality:
    """
    The dual sector data: the minimal positive n_tilde with m*q - n*n_tilde == -1, and the
    orientation-reversing matrix S exchanging the sectors of (n_tilde, m) and (n, m).
    """
    _check_sector(n, m, minimal_n=2)
    n_tilde = pow(n, -1, m)
    q = (n * n_tilde - 1) // m
    matrix = ((-n_tilde, m), (-q, n))
    duality = SectorDuality(n, m, n_tilde, q, matrix)
    if hj_expand(n_tilde, m).terms != tuple(reversed(hj_expand(n, m).terms)):
        raise ArithmeticError(f"Dual continued fraction of ({n}, {m}) is not reversed")
    return duality


def cone_normal_form(eta_a: Vector, eta_b: Vector) -> Tuple[int, int]:
    """
    The sector type (n, m) of the cone cut out by two primitive conormals meeting at a vertex,
    i.e. the pair with an integral change of basis sending the conormals to (1,0) and (-n, m).
    A smooth vertex gives (0, 1).
    """
    m = eta_a.det(eta_b)
    if m == 0:
        raise ValueError(f"Conormals {eta_a} and {eta_b} are parallel")
    if m < 0:
        eta_a, eta_b = eta_b, eta_a
        m = -m
    w = complete_basis(eta_a)
    offset = eta_b.det(w)
    n = int(-offset) % int(m)
    return n, int(m)


def sector_nondisp_region(n: int, m: int) -> SectorRegion:
    """
    The cone {(E/2) x2 <= x1 <= ((2m - E~ n~) / (2n - E~ q)) x2} of sector points with a
    leading-order critical point, E and E~ being the first terms of the expansions of n/m and n~/m.
    """
    duality = dual_pair(n, m)
    first = hj_expand(n, m).terms[0]
    dual_first = hj_expand(duality.n_tilde, m).terms[0]
    lower = Fraction(first, 2)
    upper = Fraction(2 * m - dual_first * duality.n_tilde, 2 * n - dual_first * duality.q)
    return SectorRegion(lower, upper)


def sector(n: int = 3, m: int = 7) -> Polygon:
    """The closed sector {x1 >= 0, -n x1 + m x2 >= 0}."""
    _check_sector(n, m)
    return build_polygon([
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(-n, m), 0),
    ], name=f"sector({n},{m})")


def sector_open(n: int = 2, m: int = 3, kappa: Fraction = Fraction(2)) -> Polygon:
    """The open sector {x1 >= 0, x2 >= 0, -n x1 + m x2 + kappa > 0}."""
    _check_sector(n, m)
    if kappa <= 0:
        raise ScenarioError("sector_open", "kappa > 0")
    return build_polygon([
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(0, 1), 0),
        HalfSpace(Vector(-n, m), kappa, Closure.OPEN),
    ], name=f"sector_open({n},{m},{format_rational(kappa)})")


def hirzebruch(m: int = 3, kappa: Fraction = Fraction(7, 2)) -> Polygon:
    """The Hirzebruch trapezoid {x1 >= 0, 0 <= x2 <= 2, -x1 - m x2 + kappa + m >= 0}."""
    if m < 1:
        raise ScenarioError("hirzebruch", "m >= 1")
    if kappa <= m:
        raise ScenarioError("hirzebruch", "kappa > m")
    return build_polygon([
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(0, 1), 0),
        HalfSpace(Vector(0, -1), 2),
        HalfSpace(Vector(-1, -m), kappa + m),
    ], name=f"hirzebruch({m},{format_rational(kappa)})")


def projective_plane(kappa: Fraction = Fraction(6)) -> Polygon:
    """The triangle {x1 >= 0, x2 >= 0, -x1 - x2 + kappa >= 0}."""
    if kappa <= 0:
        raise ScenarioError("projective_plane", "kappa > 0")
    return build_polygon([
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(0, 1), 0),
        HalfSpace(Vector(-1, -1), kappa),
    ], name=f"projective_plane({format_rational(kappa)})")


def resolve_sector(n: int = 3, m: int = 5, kappas: Sequence[Fraction] = (Fraction(-1), Fraction(-1))) -> Polygon:
    """
    The minimal resolution of the sector (n, m): facets x1, <eta_j, x> + kappa_j (j = 1..k), -n x1 + m x2,
    along the conormal chain of n/m.

    Raises:
        ScenarioError: If a support constant is not negative or the constants do not produce all
            k new edges.
    """
    cf = hj_expand(n, m)
    chain = conormal_chain(cf)
    name = f"resolve_sector({n},{m})"
    if len(kappas) != cf.length:
        raise ScenarioError(name, f"exactly {cf.length} support constants")
    if any(kappa >= 0 for kappa in kappas):
        raise ScenarioError(name, "kappa_j < 0")

    halfspaces = [HalfSpace(chain[0], 0)]
    halfspaces += [HalfSpace(eta, kappa) for eta, kappa in zip(chain[1:-1], kappas)]
    halfspaces.append(HalfSpace(chain[-1], 0))
    try:
        polygon = build_polygon(halfspaces, name=name)
    except PolygonError as e:
        raise ScenarioError(name, str(e)) from e
    if polygon.ghost_facets or len(polygon.vertices) != cf.length + 1:
        raise ScenarioError(name, f"{cf.length + 2} edges and {cf.length + 1} vertices")
    if not is_smooth(polygon):
        raise ScenarioError(name, "smooth vertices")
    return polygon


def weighted_projective(p: int = 3, q: int = 5) -> Polygon:
    """The triangle of P(1, p, q): {x1 >= 0, x2 >= 0, -q x1 - p x2 + p q >= 0}."""
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise ScenarioError("weighted_projective", "coprime positive weights")
    return build_polygon([
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(0, 1), 0),
        HalfSpace(Vector(-q, -p), p * q),
    ], name=f"weighted_projective({p},{q})")


def p135_resolved_at_30(kappa6: Fraction = Fraction(29, 5), kappa7: Fraction = Fraction(27, 10)) -> Polygon:
    """
    P(1,3,5) with its vertex (3,0) resolved by the facets -2 x1 - x2 + kappa6 and -x1 + kappa7.

    Facets are listed as l1 = x1, l2 = x2, l3 = -5 x1 - 3 x2 + 15, l6, l7.
    """
    name = "p135_resolved_at_30"
    if not 5 < kappa6 < 6:
        raise ScenarioError(name, "5 < kappa6 < 6")
    if not 3 * kappa6 - 15 < kappa7 < kappa6 / 2:
        raise ScenarioError(name, "3 kappa6 - 15 < kappa7 < kappa6 / 2")
    polygon = build_polygon(_p135_base() + [
        HalfSpace(Vector(-2, -1), kappa6),
        HalfSpace(Vector(-1, 0), kappa7),
    ], name=f"{name}({format_rational(kappa6)},{format_rational(kappa7)})")
    if polygon.ghost_facets:
        raise ScenarioError(name, "every facet supports an edge")
    return polygon


def p135_full_resolution(kappa4: Fraction = Fraction(9, 2), kappa5: Fraction = Fraction(19, 2),
                         kappa6: Fraction = Fraction(29, 5), kappa7: Fraction = Fraction(27, 10)) -> Polygon:
    """
    P(1,3,5) with both singular vertices resolved: l4 = -x1 - x2 + kappa4 and l5 = -3 x1 - 2 x2 + kappa5
    at (0,5), l6 and l7 at (3,0). Facets with kappa4 >= 5, kappa5 >= 10, kappa6 >= 6 or kappa7 >= 3
    do not cut the triangle and become ghosts.
    """
    name = "p135_full_resolution"
    polygon = build_polygon(_p135_base() + [
        HalfSpace(Vector(-1, -1), kappa4),
        HalfSpace(Vector(-3, -2), kappa5),
        HalfSpace(Vector(-2, -1), kappa6),
        HalfSpace(Vector(-1, 0), kappa7),
    ], name=f"{name}({','.join(format_rational(k) for k in (kappa4, kappa5, kappa6, kappa7))})")
    if any(i < 3 for i in polygon.ghost_facets):
        raise ScenarioError(name, "the resolving facets leave every facet of the triangle")
    return polygon


def _p135_base() -> List[HalfSpace]:
    return [
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(0, 1), 0),
        HalfSpace(Vector(-5, -3), 15),
    ]


def finite_volume_a2(kappa1: Fraction = Fraction(3, 4), kappa2: Fraction = Fraction(1, 2)) -> Polygon:
    """
    The resolved A_2 sector cut off by an open facet: l^v = x1, l^s = -2 x1 + 3 x2, l_inf = -x2 + 2 (open),
    l1 = x2 - kappa1, l2 = -x1 + 2 x2 - kappa2.
    """
    name = "finite_volume_a2"
    for condition, holds in (("0 < kappa1 < 2", 0 < kappa1 < 2),
                             ("0 < kappa2 < 1", 0 < kappa2 < 1),
                             ("kappa2 < 2 kappa1", kappa2 < 2 * kappa1),
                             ("kappa1 < 2 kappa2", kappa1 < 2 * kappa2)):
        if not holds:
            raise ScenarioError(name, condition)
    return build_polygon([
        HalfSpace(Vector(1, 0), 0),
        HalfSpace(Vector(-2, 3), 0),
        HalfSpace(Vector(0, -1), 2, Closure.OPEN),
        HalfSpace(Vector(0, 1), -kappa1),
        HalfSpace(Vector(-1, 2), -kappa2),
    ], name=f"{name}({format_rational(kappa1)},{format_rational(kappa2)})")


@dataclass(frozen=True)
class Scenario:
    name: str
    builder: Callable[..., Polygon]
    parameters: Mapping[str, object] = field(default_factory=dict)
    description: str = ""

    def build(self, overrides: Optional[Mapping[str, str]] = None) -> Polygon:
        """Builds the scenario polygon, with string overrides parsed after the type of each default."""
        arguments = dict(self.parameters)
        for key, text in (overrides or {}).items():
            if key not in arguments:
                raise ValueError(f"Scenario {self.name} has no parameter {key!r}")
            arguments[key] = _parse_parameter(arguments[key], text)
        logger.info("Building scenario %s with %s", self.name, arguments)
        return self.builder(**arguments)


def _parse_parameter(default, text: str):
    if isinstance(default, bool):
        raise TypeError("Boolean scenario parameters are not supported")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, Fraction):
        return parse_rational(text)
    if isinstance(default, tuple):
        return tuple(parse_rational(part) for part in text.split(","))
    raise TypeError(f"Unsupported parameter type {type(default).__name__}")


SCENARIOS: Dict[str, Scenario] = {scenario.name: scenario for scenario in (
    Scenario("sector", sector, {"n": 3, "m": 7}, "closed cyclic quotient sector"),
    Scenario("sector_open", sector_open, {"n": 2, "m": 3, "kappa": Fraction(2)}, "sector cut by an open facet"),
    Scenario("hirzebruch", hirzebruch, {"m": 3, "kappa": Fraction(7, 2)}, "Hirzebruch surface"),
    Scenario("projective_plane", projective_plane, {"kappa": Fraction(6)}, "complex projective plane"),
    Scenario("resolve_sector", resolve_sector, {"n": 3, "m": 5, "kappas": (Fraction(-1), Fraction(-1))},
             "minimal resolution of a sector"),
    Scenario("weighted_projective", weighted_projective, {"p": 3, "q": 5}, "weighted projective plane P(1,p,q)"),
    Scenario("p135_resolved_at_30", p135_resolved_at_30, {"kappa6": Fraction(29, 5), "kappa7": Fraction(27, 10)},
             "P(1,3,5) resolved at (3,0)"),
    Scenario("p135_full_resolution", p135_full_resolution,
             {"kappa4": Fraction(9, 2), "kappa5": Fraction(19, 2), "kappa6": Fraction(29, 5), "kappa7": Fraction(27, 10)},
             "P(1,3,5) with both singular vertices resolved"),
    Scenario("finite_volume_a2", finite_volume_a2, {"kappa1": Fraction(3, 4), "kappa2": Fraction(1, 2)},
             "finite-volume resolved A_2 sector"),
)}


def build_scenario(name: str, overrides: Optional[Mapping[str, str]] = None) -> Polygon:
    """Builds a registered scenario by name."""
    try:
        scenario = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"Unknown scenario {name!r}, expected one of: {', '.join(sorted(SCENARIOS))}") from None
    return scenario.build(overrides)
