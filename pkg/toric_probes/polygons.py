"""
Rational moment polygons given as intersections of half-planes.

A polygon is validated and its combinatorics (vertices, edges, ghost constraints) are computed
exactly the first time they are needed.
"""
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
import logging
from typing import Collection, Mapping, Optional, Sequence, Tuple, Union

from .affine import AffineError, Vector, make_primitive
from .utils import format_rational, hidden_field


logger = logging.getLogger(__name__)

T_FacetIndex = int


class PolygonError(ValueError):
    """Base class for invalid polygon data."""


class EmptyPolygonError(PolygonError):
    """The half-planes do not bound a two-dimensional region."""


class DuplicateFacetError(PolygonError):
    """Two half-planes share the same conormal."""


class Closure(str, Enum):
    CLOSED = "closed"
    OPEN = "open"


class Membership(Enum):
    CLOSURE = "closure"
    INTERIOR = "interior"
    AS_DECLARED = "as-declared"


@dataclass(frozen=True)
class HalfSpace:
    """
    The constraint <eta, x> + kappa >= 0 (or > 0 when open).

    A non-primitive conormal is normalized on construction: its gcd is moved into the label and
    the support constant is divided accordingly.
    """
    eta: Vector
    kappa: Fraction
    closure: Closure = Closure.CLOSED
    label: int = 1
    ghost: bool = False

    def __post_init__(self):
        eta = self.eta if isinstance(self.eta, Vector) else Vector(*self.eta)
        kappa = Fraction(self.kappa)
        try:
            primitive, multiplier = make_primitive(eta)
        except AffineError as e:
            raise PolygonError(f"Invalid conormal {eta}: {e}") from e
        if self.label < 1:
            raise PolygonError(f"Facet label must be positive, got {self.label}")
        object.__setattr__(self, "eta", primitive)
        object.__setattr__(self, "kappa", kappa / multiplier)
        object.__setattr__(self, "label", self.label * multiplier)
        object.__setattr__(self, "closure", Closure(self.closure))

    def level(self, x: Vector) -> Fraction:
        """The value of <eta, x> + kappa."""
        return self.eta.dot(x) + self.kappa

    @property
    def is_open(self) -> bool:
        return self.closure == Closure.OPEN

    @property
    def edge_direction(self) -> Vector:
        """The primitive direction of the boundary line, oriented with the polygon on its left."""
        return Vector(self.eta.x2, -self.eta.x1)

    def __str__(self):
        relation = ">" if self.is_open else ">="
        return f"<{self.eta}, x> + {format_rational(self.kappa)} {relation} 0"


@dataclass(frozen=True)
class Vertex:
    point: Vector
    facets: Tuple[T_FacetIndex, T_FacetIndex]


@dataclass(frozen=True)
class Edge:
    """
    The part of a facet line lying in the polygon, parametrized as base + t * direction with
    t_min <= t <= t_max; a missing bound means the edge is unbounded on that side.
    """
    facet: T_FacetIndex
    base: Vector
    direction: Vector
    t_min: Optional[Fraction]
    t_max: Optional[Fraction]

    @property
    def start(self) -> Optional[Vector]:
        return None if self.t_min is None else self.base + self.t_min * self.direction

    @property
    def end(self) -> Optional[Vector]:
        return None if self.t_max is None else self.base + self.t_max * self.direction

    @property
    def bounded(self) -> bool:
        return self.t_min is not None and self.t_max is not None

    def parameter_of(self, x: Vector) -> Optional[Fraction]:
        """The parameter t with x == base + t * direction, or None when x is off the line."""
        offset = x - self.base
        if offset.det(self.direction) != 0:
            return None
        return offset.dot(self.direction) / self.direction.dot(self.direction)

    def relint_contains(self, x: Vector) -> bool:
        t = self.parameter_of(x)
        if t is None:
            return False
        return (self.t_min is None or self.t_min < t) and (self.t_max is None or t < self.t_max)

    def point_at(self, t: Fraction) -> Vector:
        return self.base + t * self.direction


@dataclass(frozen=True)
class RayExit:
    """Where the ray x + t * v leaves the closure of a polygon."""
    point: Vector
    facets: Tuple[T_FacetIndex, ...]
    t: Fraction

    @property
    def at_vertex(self) -> bool:
        return len(self.facets) > 1

    @property
    def facet(self) -> T_FacetIndex:
        return self.facets[0]


@dataclass(frozen=True)
class FacetProfile:
    """The smallest level s of a point and the facet sets attaining the two smallest levels."""
    level: Fraction
    closest: Tuple[T_FacetIndex, ...]
    second: Tuple[T_FacetIndex, ...]
    second_level: Optional[Fraction]


@dataclass
class Polygon:
    halfspaces: Sequence[HalfSpace]
    name: str

    _data_built: bool = hidden_field(default=False)
    _vertices: Sequence[Vertex] = hidden_field()
    _edges: Mapping[T_FacetIndex, Edge] = hidden_field()
    _ghost_facets: Collection[T_FacetIndex] = hidden_field()

    def __init__(self, halfspaces: Sequence[HalfSpace], name: str = "", build_data: bool = False):
        self.halfspaces = tuple(halfspaces)
        self.name = name

        if build_data:
            self._build_data_if_needed()

    @property
    def vertices(self) -> Sequence[Vertex]:
        self._build_data_if_needed()
        return self._vertices

    @property
    def edges(self) -> Mapping[T_FacetIndex, Edge]:
        """Edges of the geometric facets, by facet index."""
        self._build_data_if_needed()
        return self._edges

    @property
    def ghost_facets(self) -> Collection[T_FacetIndex]:
        """Indices of constraints that do not support an edge."""
        self._build_data_if_needed()
        return self._ghost_facets

    @property
    def geometric_facets(self) -> Sequence[T_FacetIndex]:
        return sorted(self.edges)

    @property
    def is_bounded(self) -> bool:
        return all(edge.bounded for edge in self.edges.values())

    @property
    def is_closed(self) -> bool:
        """Whether every geometric facet is closed."""
        return all(not self.halfspaces[i].is_open for i in self.geometric_facets)

    def level(self, facet: T_FacetIndex, x: Vector) -> Fraction:
        return self.halfspaces[facet].level(x)

    def _build_data_if_needed(self):
        if self._data_built:
            return

        edges, vertices = _realize(self.halfspaces)
        self._edges = edges
        self._vertices = vertices
        self._ghost_facets = frozenset(i for i in range(len(self.halfspaces)) if i not in edges)
        logger.debug("Polygon %r: %d vertices, %d edges, ghosts %s",
                     self.name, len(vertices), len(edges), sorted(self._ghost_facets))

        self._data_built = True


def build_polygon(halfspaces: Sequence[HalfSpace], name: str = "") -> Polygon:
    """
    Validates a list of half-planes and builds the polygon they bound.

    Constraints that do not support an edge of positive length (slack everywhere, or touching the
    polygon in a single point) are marked as ghosts.

    Args:
        halfspaces: At least two half-planes.
        name: Optional name of the polygon.

    Returns:
        The validated polygon with ghost flags set and vertices computed.

    Raises:
        PolygonError: If the region is empty, not two-dimensional, has no vertex,
            or two constraints share a conormal.
    """
    edges, _ = _realize(halfspaces)
    marked = [replace(h, ghost=(i not in edges)) for i, h in enumerate(halfspaces)]
    return Polygon(marked, name=name, build_data=True)


def _line_intersection(a: HalfSpace, b: HalfSpace) -> Optional[Vector]:
    det = a.eta.det(b.eta)
    if det == 0:
        return None
    x1 = (-a.kappa * b.eta.x2 + a.eta.x2 * b.kappa) / det
    x2 = (-a.eta.x1 * b.kappa + b.eta.x1 * a.kappa) / det
    return Vector(x1, x2)


def _edge_interval(i: int, halfspaces: Sequence[HalfSpace]) -> Optional[Edge]:
    """The feasible part of the i-th constraint line, or None if it is empty."""
    h = halfspaces[i]
    base = h.eta * (-h.kappa / h.eta.dot(h.eta))
    direction = h.edge_direction
    t_min: Optional[Fraction] = None
    t_max: Optional[Fraction] = None
    for j, other in enumerate(halfspaces):
        if j == i:
            continue
        slope = other.eta.dot(direction)
        level = other.level(base)
        if slope == 0:
            if level < 0:
                return None
            continue
        bound = -level / slope
        if slope > 0:
            t_min = bound if t_min is None else max(t_min, bound)
        else:
            t_max = bound if t_max is None else min(t_max, bound)
    if t_min is not None and t_max is not None and t_min > t_max:
        return None
    return Edge(i, base, direction, t_min, t_max)


def _realize(halfspaces: Sequence[HalfSpace]) -> Tuple[Mapping[T_FacetIndex, Edge], Sequence[Vertex]]:
    if len(halfspaces) < 2:
        raise PolygonError("A polygon needs at least two half-planes")
    seen = {}
    for i, h in enumerate(halfspaces):
        if h.eta in seen:
            raise DuplicateFacetError(f"Half-planes {seen[h.eta]} and {i} share the conormal {h.eta}")
        seen[h.eta] = i

    edges = {}
    for i in range(len(halfspaces)):
        edge = _edge_interval(i, halfspaces)
        if edge is None:
            continue
        if edge.bounded and edge.t_min == edge.t_max:
            continue
        edges[i] = edge
    if not edges:
        raise EmptyPolygonError("The half-planes have an empty intersection")

    points = {}
    for i in edges:
        for j in edges:
            if j <= i:
                continue
            x = _line_intersection(halfspaces[i], halfspaces[j])
            if x is None or any(h.level(x) < 0 for h in halfspaces):
                continue
            points.setdefault(x, set()).update((i, j))
    if not points:
        raise PolygonError("The polygon has no vertex; only pointed polygons are supported")

    samples = []
    for edge in edges.values():
        if edge.bounded:
            samples.append(edge.point_at((edge.t_min + edge.t_max) / 2))
        elif edge.t_min is not None:
            samples.append(edge.point_at(edge.t_min + 1))
        elif edge.t_max is not None:
            samples.append(edge.point_at(edge.t_max - 1))
        else:
            samples.append(edge.base)
    centroid = sum(samples[1:], samples[0]) / len(samples)
    if any(h.level(centroid) <= 0 for h in halfspaces):
        raise EmptyPolygonError("The half-planes do not bound a two-dimensional region")

    vertices = []
    for x in sorted(points, key=lambda p: (p.x1, p.x2)):
        incident = tuple(sorted(i for i in edges if halfspaces[i].level(x) == 0))
        if len(incident) != 2:
            raise PolygonError(f"Vertex {x} lies on {len(incident)} edges")
        vertices.append(Vertex(x, incident))
    return edges, tuple(vertices)


def contains(polygon: Polygon, x: Vector, mode: Union[Membership, str] = Membership.CLOSURE) -> bool:
    """
    Tests membership of a point.

    Args:
        polygon: The polygon.
        x: The point.
        mode: CLOSURE (all constraints non-strict), INTERIOR (all strict),
            or AS_DECLARED (strict exactly on open facets).
    """
    mode = Membership(mode)
    for i in polygon.geometric_facets:
        h = polygon.halfspaces[i]
        level = h.level(x)
        strict = mode == Membership.INTERIOR or (mode == Membership.AS_DECLARED and h.is_open)
        if level < 0 or (strict and level == 0):
            return False
    return True


def vertex_orders(polygon: Polygon) -> Mapping[Vector, int]:
    """The orbifold order |det| of the two (labelled) conormals meeting at each vertex."""
    orders = {}
    for vertex in polygon.vertices:
        a, b = (polygon.halfspaces[i] for i in vertex.facets)
        orders[vertex.point] = int(abs((a.eta * a.label).det(b.eta * b.label)))
    return orders


def is_smooth(polygon: Polygon) -> bool:
    """Whether every vertex is smooth, i.e. has order 1."""
    return all(order == 1 for order in vertex_orders(polygon).values())


def ray_exit(polygon: Polygon, x: Vector, v: Vector) -> Optional[RayExit]:
    """
    Shoots the ray x + t * v (t > 0) from an interior point to the boundary of the polygon's closure.

    Args:
        polygon: The polygon.
        x: A point of the interior.
        v: A primitive integral direction.

    Returns:
        The exit point with the facets attaining it, or None if the ray stays in the polygon.

    Raises:
        PolygonError: If x is not in the interior or v is not primitive.
    """
    if not contains(polygon, x, Membership.INTERIOR):
        raise PolygonError(f"Point {x} is not in the interior of the polygon")
    if not v.is_primitive:
        raise PolygonError(f"Direction {v} is not a primitive integral vector")
    return closure_ray_exit(polygon, x, v)


def closure_ray_exit(polygon: Polygon, x: Vector, v: Vector) -> Optional[RayExit]:
    """
    Like `ray_exit`, for rays starting anywhere in the closure, such as probes based on a facet.

    Raises:
        PolygonError: If x is outside the closure, or the ray leaves the closure immediately.
    """
    if not contains(polygon, x, Membership.CLOSURE):
        raise PolygonError(f"Point {x} is not in the polygon")
    best: Optional[Fraction] = None
    facets = []
    for i in polygon.geometric_facets:
        h = polygon.halfspaces[i]
        slope = h.eta.dot(v)
        if slope >= 0:
            continue
        t = h.level(x) / -slope
        if best is None or t < best:
            best, facets = t, [i]
        elif t == best:
            facets.append(i)
    if best is None:
        return None
    if best == 0:
        raise PolygonError(f"Ray from {x} along {v} leaves the polygon immediately")
    return RayExit(x + best * v, tuple(facets), best)


def facet_profile(levels: Mapping[T_FacetIndex, Fraction]) -> FacetProfile:
    """Groups facet levels into the closest and second-closest sets."""
    distinct = sorted(set(levels.values()))
    lowest = distinct[0]
    closest = tuple(sorted(i for i, level in levels.items() if level == lowest))
    if len(distinct) == 1:
        return FacetProfile(lowest, closest, (), None)
    second_level = distinct[1]
    second = tuple(sorted(i for i, level in levels.items() if level == second_level))
    return FacetProfile(lowest, closest, second, second_level)


def closest_facet_profile(polygon: Polygon, x: Vector) -> FacetProfile:
    """
    The smallest level s(x) over all listed half-planes (ghosts included), with the facets
    attaining it (E1) and the facets attaining the next level (E2).
    """
    if not contains(polygon, x, Membership.INTERIOR):
        raise PolygonError(f"Point {x} is not in the interior of the polygon")
    return facet_profile({i: h.level(x) for i, h in enumerate(polygon.halfspaces)})


def transform_polygon(polygon: Polygon, transform) -> Polygon:
    """Pushes every half-plane of a polygon forward along an integral affine map."""
    halfspaces = []
    for h in polygon.halfspaces:
        eta, kappa = transform.transform_halfspace(h.eta, h.kappa)
        halfspaces.append(HalfSpace(eta, kappa, h.closure, h.label))
    return build_polygon(halfspaces, name=polygon.name)
