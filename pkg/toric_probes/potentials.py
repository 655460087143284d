"""
Nondisplaceability certificates from the bulk-deformed potential at the unit point.

Every closed half-plane of a presentation (geometric facets and ghosts) contributes one term with
weight label * eta and q-exponent label * l(x). Geometric terms have leading coefficient 1; ghost
terms carry a free nonzero leading coefficient. A certificate solves the lowest-order critical
equations at y = (1, 1) exactly; every term above the solved levels is absorbed into corrections
of positive q-order.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix, Rational

from .affine import Vector, primitive_direction, primitive_vectors
from .polygons import HalfSpace, Membership, Polygon, PolygonError, contains, facet_profile, is_smooth
from .resolutions import cone_normal_form, hj_expand
from .utils import format_rational


logger = logging.getLogger(__name__)

MAX_GHOSTS = 2

# values tried for the free parameters of an underdetermined leading-order system
_PARAMETER_VALUES = (0, 1, -1, 2, -2, 3, -3)


class QwCertificateError(ValueError):
    """A nondisplaceability certificate does not re-verify."""


class QwKind(str, Enum):
    UNIT_POINT_SOLVED = "unit-point-solved"
    GEOMETRIC_CANDIDATE = "geometric-candidate"


@dataclass(frozen=True)
class PotentialTerm:
    halfspace: HalfSpace
    facet: Optional[int]
    weight: Vector
    level: Fraction

    @property
    def free(self) -> bool:
        return self.halfspace.ghost


@dataclass(frozen=True)
class PotentialPresentation:
    """A polygon at a point together with extra ghost half-planes."""
    polygon: Polygon = field(compare=False)
    point: Vector
    ghosts: Tuple[HalfSpace, ...] = ()

    @property
    def terms(self) -> Tuple[PotentialTerm, ...]:
        terms = []
        for i, h in enumerate(self.polygon.halfspaces):
            if h.is_open:
                continue
            terms.append(PotentialTerm(h, i, h.label * h.eta, h.label * h.level(self.point)))
        for ghost in self.ghosts:
            terms.append(PotentialTerm(ghost, None, ghost.label * ghost.eta, ghost.label * ghost.level(self.point)))
        return tuple(terms)


@dataclass(frozen=True)
class QwCertificate:
    """
    Either a solved unit-point system (tied / second_tied index presentation terms, leads hold one
    leading coefficient per term) or a closest-facet profile (tied / second_tied index polygon facets).
    """
    kind: QwKind
    presentation: PotentialPresentation
    level: Fraction
    tied: Tuple[int, ...]
    leads: Tuple[Fraction, ...] = ()
    rank: int = 0
    second_level: Optional[Fraction] = None
    second_tied: Tuple[int, ...] = ()
    residual_orders: Tuple[Tuple[int, Fraction], ...] = ()
    heuristic: bool = False

    @property
    def point(self) -> Vector:
        return self.presentation.point

    @property
    def ghosts(self) -> Tuple[HalfSpace, ...]:
        return self.presentation.ghosts

    @property
    def unit_solution(self) -> Dict[int, Fraction]:
        """Solved leading coefficients of the ghost terms, by term index."""
        terms = self.presentation.terms
        return {i: lead for i, lead in enumerate(self.leads) if terms[i].free}


def is_smooth_compact(polygon: Polygon) -> bool:
    """Whether the polygon is bounded, has only closed facets and only smooth vertices."""
    return polygon.is_bounded and polygon.is_closed and is_smooth(polygon)


def _require_interior(polygon: Polygon, x: Vector):
    if not contains(polygon, x, Membership.INTERIOR):
        raise PolygonError(f"Point {x} is not in the interior of the polygon")


def geometric_nondisp_test(polygon: Polygon, x: Vector) -> Optional[QwCertificate]:
    """
    The closest-facet criterion: at least three closest facets, or two parallel closest facets
    with at least two facets at the next level.

    The criterion is only a theorem for smooth compact polygons; on other polygons the returned
    candidate is marked heuristic.
    """
    _require_interior(polygon, x)
    heuristic = not is_smooth_compact(polygon)
    levels = {i: polygon.halfspaces[i].label * polygon.level(i, x) for i in polygon.geometric_facets}
    profile = facet_profile(levels)
    closest = profile.closest

    matches = len(closest) >= 3
    if len(closest) == 2:
        a, b = (polygon.halfspaces[i].eta for i in closest)
        matches = a == -b and len(profile.second) >= 2
    if not matches:
        return None
    if heuristic:
        logger.warning("Closest-facet candidate at %s in non smooth compact polygon %r is heuristic", x, polygon.name)
    return QwCertificate(QwKind.GEOMETRIC_CANDIDATE, PotentialPresentation(polygon, x), profile.level, closest,
                         second_level=profile.second_level, second_tied=profile.second, heuristic=heuristic)


def is_valid_ghost(polygon: Polygon, ghost: HalfSpace) -> bool:
    """Whether a half-plane is nonnegative on the polygon and vanishes along no closed edge."""
    for vertex in polygon.vertices:
        if ghost.level(vertex.point) < 0:
            return False
    for i, edge in polygon.edges.items():
        slope = ghost.eta.dot(edge.direction)
        if (edge.t_max is None and slope < 0) or (edge.t_min is None and slope > 0):
            return False
        if slope == 0 and not polygon.halfspaces[i].is_open:
            point = edge.start or edge.end or edge.base
            if ghost.level(point) == 0:
                return False
    return True


def enumerate_ghosts(polygon: Polygon, x: Vector, height: int, level: Fraction) -> List[HalfSpace]:
    """
    All ghost half-planes through the level set {l = level} at x with primitive conormal of height
    at most `height`, ordered by height and then lexicographically.

    Conormals of the closed half-planes of the polygon are skipped.
    """
    _require_interior(polygon, x)
    taken = {h.eta for h in polygon.halfspaces if not h.is_open}
    ghosts = []
    for eta in primitive_vectors(height):
        if eta in taken:
            continue
        ghost = HalfSpace(eta, level - eta.dot(x), ghost=True)
        if is_valid_ghost(polygon, ghost):
            ghosts.append(ghost)
    logger.debug("%d ghosts at level %s for %s", len(ghosts), format_rational(level), x)
    return ghosts


def default_ghost_height(polygon: Polygon) -> int:
    """At least 4, and at least the first and last continued fraction terms of every singular vertex."""
    height = 4
    for vertex in polygon.vertices:
        a, b = (polygon.halfspaces[i].eta for i in vertex.facets)
        n, m = cone_normal_form(a, b)
        if m > 1 and n >= 1:
            terms = hj_expand(n, m).terms
            height = max(height, terms[0], terms[-1])
    return height


def _to_sympy(value: Fraction) -> Rational:
    return Rational(value.numerator, value.denominator)


def _solve_leads(rows: Sequence[Sequence[Fraction]], free: Sequence[bool]) -> Optional[List[Fraction]]:
    """
    Solves sum_i rows[r][i] * lead_i == 0 for every row, with fixed leads equal to 1 and
    free leads nonzero.
    """
    free_columns = [i for i, f in enumerate(free) if f]
    rhs = [-sum((row[i] for i, f in enumerate(free) if not f), Fraction(0)) for row in rows]
    leads = [Fraction(1)] * len(free)
    if not free_columns:
        return leads if all(value == 0 for value in rhs) else None

    a = Matrix([[_to_sympy(row[i]) for i in free_columns] for row in rows])
    b = Matrix([_to_sympy(value) for value in rhs])
    try:
        solution, parameters = a.gauss_jordan_solve(b)
    except ValueError:
        return None

    symbols = list(parameters)
    for values in itertools.product(_PARAMETER_VALUES, repeat=len(symbols)):
        substituted = solution.subs(dict(zip(symbols, values))) if symbols else solution
        solved = [Fraction(int(v.p), int(v.q)) for v in substituted]
        if all(value != 0 for value in solved):
            for i, value in zip(free_columns, solved):
                leads[i] = value
            return leads
    return None


def solve_leading_order(presentation: PotentialPresentation) -> Optional[QwCertificate]:
    """
    Solves the lowest-order critical equations of the potential at y = (1, 1).

    When the lowest-level weights span the plane, both equations are solved at that level. When they
    are all parallel to a conormal eta, the equation along eta is solved at the lowest level and the
    transverse equation at the lowest level of terms with det(eta, w) != 0.

    Returns:
        The unit-point certificate, or None if this presentation does not certify.
    """
    terms = presentation.terms
    if not terms:
        return None
    level = min(t.level for t in terms)
    tied = tuple(i for i, t in enumerate(terms) if t.level == level)
    weights = [terms[i].weight for i in tied]
    rank = 2 if any(a.det(b) != 0 for a, b in itertools.combinations(weights, 2)) else 1

    if rank == 2:
        rows = [[t.weight.x1 for t in (terms[i] for i in tied)], [t.weight.x2 for t in (terms[i] for i in tied)]]
        solved = _solve_leads(rows, [terms[i].free for i in tied])
        if solved is None:
            return None
        leads = [Fraction(1)] * len(terms)
        for i, lead in zip(tied, solved):
            leads[i] = lead
        residual = tuple((i, t.level - level) for i, t in enumerate(terms) if i not in tied)
        return QwCertificate(QwKind.UNIT_POINT_SOLVED, presentation, level, tied, tuple(leads), rank,
                             residual_orders=residual)

    eta, _ = primitive_direction(weights[0])
    along = [terms[i].weight.dot(eta) for i in tied]
    solved = _solve_leads([along], [terms[i].free for i in tied])
    if solved is None:
        return None

    transverse = {i: eta.det(t.weight) for i, t in enumerate(terms) if eta.det(t.weight) != 0}
    if not transverse:
        return None
    second_level = min(terms[i].level for i in transverse)
    second_tied = tuple(i for i in sorted(transverse) if terms[i].level == second_level)
    second_solved = _solve_leads([[transverse[i] for i in second_tied]], [terms[i].free for i in second_tied])
    if second_solved is None:
        return None

    leads = [Fraction(1)] * len(terms)
    for i, lead in itertools.chain(zip(tied, solved), zip(second_tied, second_solved)):
        leads[i] = lead
    residual = tuple((i, t.level - level) for i, t in enumerate(terms) if i not in tied and i not in second_tied)
    return QwCertificate(QwKind.UNIT_POINT_SOLVED, presentation, level, tied, tuple(leads), rank,
                         second_level=second_level, second_tied=second_tied, residual_orders=residual)


def certify_nondisplaceable(polygon: Polygon, x: Vector, ghost_height: Optional[int] = None,
                            max_ghosts: int = MAX_GHOSTS) -> Optional[QwCertificate]:
    """
    Looks for a nondisplaceability certificate at an interior point.

    Smooth compact polygons only get the closest-facet criterion. Otherwise ghosts through the two
    lowest term levels at x are tried in subsets of at most `max_ghosts`, smallest subsets first.

    Args:
        polygon: The polygon.
        x: An interior point.
        ghost_height: Bound on ghost conormals; default_ghost_height by default.
        max_ghosts: Largest ghost subset tried.

    Returns:
        The first certificate found, or None.
    """
    _require_interior(polygon, x)
    if is_smooth_compact(polygon):
        return geometric_nondisp_test(polygon, x)

    height = ghost_height or default_ghost_height(polygon)
    base = PotentialPresentation(polygon, x)
    levels = sorted({t.level for t in base.terms})
    lowest = levels[0]
    lowest_weights = [t.weight for t in base.terms if t.level == lowest]

    candidates = []
    for level in levels[:2]:
        candidates += enumerate_ghosts(polygon, x, height, level)

    for size in range(max_ghosts + 1):
        for subset in itertools.combinations(candidates, size):
            if len({g.eta for g in subset}) < size:
                continue
            if not _may_matter(subset, lowest, lowest_weights, x):
                continue
            certificate = solve_leading_order(PotentialPresentation(polygon, x, subset))
            if certificate is not None:
                logger.debug("Certified %s with ghosts %s", x, [str(g) for g in subset])
                return certificate
    return None


def _may_matter(subset: Sequence[HalfSpace], lowest: Fraction, lowest_weights: Sequence[Vector], x: Vector) -> bool:
    """Ghosts above the lowest level only enter the transverse equation of a rank one system."""
    weights = list(lowest_weights) + [g.eta for g in subset if g.level(x) == lowest]
    spans = any(a.det(b) != 0 for a, b in itertools.combinations(weights, 2))
    return not (spans and any(g.level(x) != lowest for g in subset))


def verify_qw_certificate(polygon: Polygon, certificate: QwCertificate):
    """
    Re-verifies a certificate against a polygon in exact arithmetic.

    Raises:
        QwCertificateError: If the certificate does not re-verify.
    """
    x = certificate.point
    if not contains(polygon, x, Membership.INTERIOR):
        raise QwCertificateError(f"Point {x} is not in the interior of the polygon")

    if certificate.kind == QwKind.GEOMETRIC_CANDIDATE:
        rebuilt = geometric_nondisp_test(polygon, x)
        if rebuilt is None or (rebuilt.tied, rebuilt.second_tied) != (certificate.tied, certificate.second_tied):
            raise QwCertificateError(f"The closest-facet profile at {x} does not match the certificate")
        return

    for ghost in certificate.ghosts:
        if not is_valid_ghost(polygon, ghost):
            raise QwCertificateError(f"{ghost} is not a ghost of the polygon")
    terms = PotentialPresentation(polygon, x, certificate.ghosts).terms
    leads = certificate.leads
    if len(leads) != len(terms):
        raise QwCertificateError(f"Expected {len(terms)} leading coefficients, got {len(leads)}")
    for i, (term, lead) in enumerate(zip(terms, leads)):
        if lead == 0 or (not term.free and lead != 1):
            raise QwCertificateError(f"Invalid leading coefficient {format_rational(lead)} of term {i}")

    level = min(t.level for t in terms)
    tied = tuple(i for i, t in enumerate(terms) if t.level == level)
    if (level, tied) != (certificate.level, certificate.tied):
        raise QwCertificateError("Lowest level terms do not match the certificate")
    total = sum((leads[i] * terms[i].weight for i in tied), Vector(0, 0))

    if certificate.rank == 2:
        if not total.is_zero:
            raise QwCertificateError(f"Lowest-order equations leave the residual {total}")
    elif certificate.rank == 1:
        eta, _ = primitive_direction(terms[tied[0]].weight)
        if any(eta.det(terms[i].weight) != 0 for i in tied):
            raise QwCertificateError("Lowest level weights are not parallel")
        if total.dot(eta) != 0:
            raise QwCertificateError(f"Equation along {eta} leaves the residual {format_rational(total.dot(eta))}")
        transverse = [i for i, t in enumerate(terms) if eta.det(t.weight) != 0]
        if not transverse:
            raise QwCertificateError("No term is transverse to the lowest level weights")
        second_level = min(terms[i].level for i in transverse)
        second_tied = tuple(i for i in transverse if terms[i].level == second_level)
        if (second_level, second_tied) != (certificate.second_level, certificate.second_tied):
            raise QwCertificateError("Second level terms do not match the certificate")
        residual = sum((leads[i] * eta.det(terms[i].weight) for i in second_tied), Fraction(0))
        if residual != 0:
            raise QwCertificateError(f"Transverse equation leaves the residual {format_rational(residual)}")
    else:
        raise QwCertificateError(f"Invalid rank {certificate.rank}")

    if any(order <= 0 for _, order in certificate.residual_orders):
        raise QwCertificateError("Absorbed corrections must have positive order")
