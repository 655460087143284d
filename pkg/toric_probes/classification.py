"""
Certificate-carrying classification of toric fibers, point by point and on rational grids.

The search tries standard probes, symmetric extended probes, flagged extended probes and finally
nondisplaceability certificates. Every certificate is re-verified in exact arithmetic before it is
attached to a verdict; UNKNOWN only means that no certificate was found under the search config.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from fractions import Fraction
import itertools
import logging
import math
import os
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .affine import (
    INF, AffineError, AffineReflection, Distance, Vector, directed_distance, reflection_from_facets,
    transverse_directions,
)
from .inequalities import Interval, LinearConstraint, solve_interval
from .polygons import (
    HalfSpace, Membership, Polygon, PolygonError, T_FacetIndex, closure_ray_exit, contains, ray_exit,
)
from .potentials import QwCertificate, QwCertificateError, QwKind, certify_nondisplaceable, verify_qw_certificate
from .probes import (
    Certificate, FlagKind, FlaggedExtendedProbe, Probe, ProbeError, SymmetricExtendedProbe,
    check_certificate, displaces, make_probe, maximize_flag, probe_displaces, reverse_symmetric_extension,
    sep_displaces, build_symmetric_extension, flag_length_bound, truncate_probe,
)
from .utils import format_rational


logger = logging.getLogger(__name__)

THREADS_VARIABLE = "TORIC_PROBE_THREADS"

# points sampled per refinement round around the best flag found so far
REFINEMENT_SAMPLES = 7

T_BoundingBox = Tuple[Fraction, Fraction, Fraction, Fraction]


class AuditError(ValueError):
    """A grid violates soundness: a certificate fails or two verdicts contradict each other."""
    def __init__(self, cell: "Verdict", message: str):
        self.cell = cell
        super().__init__(f"Cell at {cell.point} ({cell.classification.value}): {message}")


class VerdictClass(str, Enum):
    DISPLACEABLE_PROBE = "DISPLACEABLE_PROBE"
    DISPLACEABLE_SYMMETRIC_EXT = "DISPLACEABLE_SYMMETRIC_EXT"
    DISPLACEABLE_FLAGGED_EXT = "DISPLACEABLE_FLAGGED_EXT"
    NONDISP_CERTIFIED = "NONDISP_CERTIFIED"
    NONDISP_CANDIDATE = "NONDISP_CANDIDATE"
    UNKNOWN = "UNKNOWN"
    EXTERIOR = "EXTERIOR"

    @property
    def is_displaceable(self) -> bool:
        return self in (VerdictClass.DISPLACEABLE_PROBE, VerdictClass.DISPLACEABLE_SYMMETRIC_EXT,
                        VerdictClass.DISPLACEABLE_FLAGGED_EXT)

    @property
    def is_nondisplaceable(self) -> bool:
        return self in (VerdictClass.NONDISP_CERTIFIED, VerdictClass.NONDISP_CANDIDATE)


_CERTIFICATE_TYPES = {
    VerdictClass.DISPLACEABLE_PROBE: Probe,
    VerdictClass.DISPLACEABLE_SYMMETRIC_EXT: SymmetricExtendedProbe,
    VerdictClass.DISPLACEABLE_FLAGGED_EXT: FlaggedExtendedProbe,
    VerdictClass.NONDISP_CERTIFIED: QwCertificate,
    VerdictClass.NONDISP_CANDIDATE: QwCertificate,
}


@dataclass(frozen=True)
class SearchConfig:
    direction_height: int = 10
    mu_samples: Tuple[Fraction, ...] = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
    epsilon: Fraction = Fraction(1, 1000)
    x_pq_samples: int = 64
    ghost_height: Optional[int] = None
    max_flag_cap: Fraction = Fraction(64)
    deflector_height: int = 3
    refinement_rounds: int = 2

    def __post_init__(self):
        object.__setattr__(self, "mu_samples", tuple(Fraction(mu) for mu in self.mu_samples))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "max_flag_cap", Fraction(self.max_flag_cap))
        for name in ("direction_height", "x_pq_samples", "deflector_height"):
            if getattr(self, name) < 1:
                raise ValueError(f"Search config field {name} must be positive, got {getattr(self, name)}")
        if self.ghost_height is not None and self.ghost_height < 1:
            raise ValueError(f"Search config field ghost_height must be positive, got {self.ghost_height}")
        if self.refinement_rounds < 0:
            raise ValueError(f"Search config field refinement_rounds must be nonnegative, got {self.refinement_rounds}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"Search config epsilon must be in (0, 1), got {format_rational(self.epsilon)}")
        if self.max_flag_cap <= 0:
            raise ValueError("Search config max_flag_cap must be positive")
        if not self.mu_samples or any(not 0 <= mu <= 1 for mu in self.mu_samples):
            raise ValueError("Search config mu_samples must be a nonempty subset of [0, 1]")

    @staticmethod
    def from_json(source) -> "SearchConfig":
        """Reads a search config from a JSON file, path, or stream."""
        from .parsing import parse_search_config
        return parse_search_config(source)


AnyCertificate = Union[Certificate, QwCertificate]


@dataclass(frozen=True)
class Verdict:
    point: Vector
    classification: VerdictClass
    certificate: Optional[AnyCertificate] = None


@dataclass(frozen=True)
class ClassificationGrid:
    """Verdicts of the points (x0 + i * resolution, y0 + j * resolution), row by row from the bottom."""
    polygon: Polygon = field(compare=False)
    bbox: T_BoundingBox
    resolution: Fraction
    cells: Tuple[Verdict, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        """The number of columns and rows."""
        return grid_shape(self.bbox, self.resolution)

    def cell(self, i: int, j: int) -> Verdict:
        columns, _ = self.shape
        return self.cells[j * columns + i]

    def find(self, point: Vector) -> Optional[Verdict]:
        for cell in self.cells:
            if cell.point == point:
                return cell
        return None


@dataclass(frozen=True)
class AuditReport:
    counts: Dict[VerdictClass, int]
    areas: Dict[VerdictClass, Fraction]
    verified: int


@dataclass(frozen=True)
class _Line:
    """The affine path t -> origin + t * direction."""
    origin: Vector
    direction: Vector

    def at(self, t: Fraction) -> Vector:
        return self.origin + t * self.direction

    def level(self, h: HalfSpace) -> Tuple[Fraction, Fraction]:
        return h.level(self.origin), h.eta.dot(self.direction)

    def positive(self, h: HalfSpace) -> LinearConstraint:
        constant, slope = self.level(h)
        return LinearConstraint((slope,), constant, strict=True)

    def along(self, h: HalfSpace, v: Vector, sign: int) -> "_Line":
        """The path moved by sign * l_h(path) along v."""
        constant, slope = self.level(h)
        return _Line(self.origin + sign * constant * v, self.direction + sign * slope * v)


@dataclass(frozen=True)
class _Deflector:
    base_facet: T_FacetIndex
    exit_facet: T_FacetIndex
    direction: Vector
    reflection: AffineReflection


@dataclass(frozen=True)
class _Candidate:
    """A probe through u: base facet, direction, base point, position of u and full length."""
    facet: T_FacetIndex
    direction: Vector
    base: Vector
    t_u: Fraction
    length: Distance
    exit_facets: Tuple[T_FacetIndex, ...]

    @cached_property
    def probe(self) -> Probe:
        endpoint = None if self.length is INF else self.base + self.length * self.direction
        return Probe(self.facet, self.base, self.direction, self.length, endpoint, self.exit_facets)


def base_facets(polygon: Polygon) -> List[T_FacetIndex]:
    """Geometric facets probes can be based on: closed, with label 1."""
    return [i for i in polygon.geometric_facets
            if not polygon.halfspaces[i].is_open and polygon.halfspaces[i].label == 1]


def _probe_candidates(polygon: Polygon, u: Vector, height: int) -> Iterator[_Candidate]:
    for facet in base_facets(polygon):
        h = polygon.halfspaces[facet]
        t_u = h.level(u)
        edge = polygon.edges[facet]
        for v in transverse_directions(h.eta, height):
            base = u - t_u * v
            if not edge.relint_contains(base):
                continue
            exit_ = closure_ray_exit(polygon, base, v)
            if exit_ is None:
                yield _Candidate(facet, v, base, t_u, INF, ())
            else:
                yield _Candidate(facet, v, base, t_u, exit_.t, exit_.facets)


def find_probe(polygon: Polygon, u: Vector, config: SearchConfig) -> Optional[Probe]:
    """The first standard probe through u, by facet and direction height, that displaces u."""
    for candidate in _probe_candidates(polygon, u, config.direction_height):
        if candidate.t_u < candidate.length / 2:
            probe = make_probe(polygon, candidate.facet, candidate.base, candidate.direction)
            if probe_displaces(probe, u):
                return probe
    return None


def _deflectors(polygon: Polygon, height: int) -> List[_Deflector]:
    """Directions of symmetric probes between pairs of closed facets, with their reflections."""
    facets = base_facets(polygon)
    deflectors = []
    for base_facet, exit_facet in itertools.permutations(facets, 2):
        h, h_exit = polygon.halfspaces[base_facet], polygon.halfspaces[exit_facet]
        det = h.eta.det(h_exit.eta)
        if det == 0:
            directions = transverse_directions(h.eta, height) if h_exit.eta == -h.eta else []
        else:
            v = Vector((h_exit.eta.x2 + h.eta.x2) / det, (-h.eta.x1 - h_exit.eta.x1) / det)
            directions = [v] if v.integral else []
        for v in directions:
            try:
                reflection = reflection_from_facets(h.eta, h.kappa, h_exit.eta, h_exit.kappa, v)
            except AffineError:
                continue
            deflectors.append(_Deflector(base_facet, exit_facet, v, reflection))
    return deflectors


def _symmetric_probe_constraints(polygon: Polygon, x: _Line,
                                 deflector: _Deflector) -> Tuple[_Line, List[LinearConstraint]]:
    """
    Constraints on the path parameter for the probe through x(t) along the deflector direction to be
    symmetric with x(t) in its interior. Returns the path of its base point as well.
    """
    h_q = polygon.halfspaces[deflector.base_facet]
    h_exit = polygon.halfspaces[deflector.exit_facet]
    v_q = deflector.direction
    base_q = x.along(h_q, v_q, -1)
    end_q = base_q.along(h_exit, v_q, 1)
    constraints = [x.positive(h_q), x.positive(h_exit)]
    for k in polygon.geometric_facets:
        h = polygon.halfspaces[k]
        if k != deflector.base_facet:
            constraints.append(base_q.positive(h))
        if k not in (deflector.base_facet, deflector.exit_facet):
            constraints.append(end_q.positive(h))
    return base_q, constraints


def _sep_on_probe(polygon: Polygon, u: Vector, candidate: _Candidate,
                  deflector: _Deflector) -> Optional[SymmetricExtendedProbe]:
    h_q = polygon.halfspaces[deflector.base_facet]
    if candidate.direction.det(deflector.direction) == 0:
        return None
    bound = directed_distance(candidate.base, h_q.eta, h_q.kappa, candidate.direction)
    if bound / 2 <= candidate.t_u:
        return None

    x = _Line(candidate.base, candidate.direction)
    base_q, constraints = _symmetric_probe_constraints(polygon, x, deflector)
    constraints.append(LinearConstraint((1,), -candidate.t_u, strict=True))
    if candidate.length is not INF:
        constraints.append(LinearConstraint((-1,), candidate.length, strict=True))
    reflection = deflector.reflection
    reflected = _Line(reflection.apply(candidate.base), reflection.apply_linear(candidate.direction))
    v_prime = reflected.direction
    for k in polygon.geometric_facets:
        h = polygon.halfspaces[k]
        slope = h.eta.dot(v_prime)
        if slope < 0:
            # 2 t_u < t + l_k(A x(t)) / -slope
            constant, coefficient = reflected.level(h)
            constraints.append(LinearConstraint((1 + coefficient / -slope,), constant / -slope - 2 * candidate.t_u,
                                                strict=True))
    window = solve_interval(constraints)
    if window is None:
        return None
    for t in _window_points(window):
        sp = _build_sep(polygon, candidate, deflector, base_q, t)
        if sp is None:
            continue
        if sep_displaces(sp, u):
            return sp
        try:
            reverse = reverse_symmetric_extension(polygon, sp)
        except ProbeError:
            continue
        if _sep_displaces_safely(reverse, u):
            return reverse
    return None


def _window_points(window: Interval) -> List[Fraction]:
    points = [window.interior_point()]
    if window.lower is not None and window.upper is not None:
        points += [p for p in window.samples(3) if p != points[0]]
    return points


def _sep_displaces_safely(sp: SymmetricExtendedProbe, u: Vector) -> bool:
    try:
        return sep_displaces(sp, u)
    except ProbeError:
        return False


def _build_sep(polygon: Polygon, candidate: _Candidate, deflector: _Deflector, base_q: _Line,
               t: Fraction) -> Optional[SymmetricExtendedProbe]:
    try:
        probe = make_probe(polygon, candidate.facet, candidate.base, candidate.direction, t)
        q = make_probe(polygon, deflector.base_facet, base_q.at(t), deflector.direction)
        return build_symmetric_extension(polygon, probe, q)
    except ProbeError as e:
        logger.debug("Symmetric extension at t = %s rejected: %s", format_rational(t), e)
        return None


def _sep_on_extension(polygon: Polygon, u: Vector, deflector: _Deflector,
                      height: int) -> Optional[SymmetricExtendedProbe]:
    """Extended probes whose reflected part passes through u."""
    reflection = deflector.reflection
    h_q = polygon.halfspaces[deflector.base_facet]
    image = reflection.apply(u)
    for facet in base_facets(polygon):
        if facet == deflector.base_facet:
            continue
        h_p = polygon.halfspaces[facet]
        reach = h_p.level(image)
        if reach <= 0:
            continue
        for v_prime in transverse_directions(reflection.apply_dual(h_p.eta), height):
            v_p = reflection.apply_linear(v_prime)
            if v_p.det(deflector.direction) == 0:
                continue
            base_p = image - reach * v_p
            if not polygon.edges[facet].relint_contains(base_p):
                continue
            exit_ = ray_exit(polygon, u, v_prime)
            if exit_ is not None and not reach < exit_.t:
                continue
            total = reach if exit_ is None else reach + exit_.t
            if total > directed_distance(base_p, h_q.eta, h_q.kappa, v_p):
                continue

            # x_PQ(s) = A(u) - s v_P, with len(P) = reach - s
            x = _Line(image, -v_p)
            base_q, constraints = _symmetric_probe_constraints(polygon, x, deflector)
            constraints += [LinearConstraint((1,), 0, strict=True), LinearConstraint((-1,), reach, strict=True)]
            window = solve_interval(constraints)
            if window is None:
                continue
            for s in _window_points(window):
                try:
                    probe = make_probe(polygon, facet, base_p, v_p, reach - s)
                    q = make_probe(polygon, deflector.base_facet, base_q.at(s), deflector.direction)
                    sp = build_symmetric_extension(polygon, probe, q)
                except ProbeError as e:
                    logger.debug("Extension through %s rejected: %s", u, e)
                    continue
                if _sep_displaces_safely(sp, u):
                    return sp
    return None


def find_symmetric_extension(polygon: Polygon, u: Vector, config: SearchConfig) -> Optional[SymmetricExtendedProbe]:
    """A symmetric extended probe displacing u through its first or its reflected part."""
    deflectors = _deflectors(polygon, config.deflector_height)
    if not deflectors:
        return None
    for candidate in _probe_candidates(polygon, u, config.direction_height):
        for deflector in deflectors:
            sp = _sep_on_probe(polygon, u, candidate, deflector)
            if sp is not None:
                return sp
    for deflector in deflectors:
        sp = _sep_on_extension(polygon, u, deflector, config.direction_height)
        if sp is not None:
            return sp
    return None


def _flag_window(polygon: Polygon, candidate: _Candidate, facet_q: T_FacetIndex, base_q: _Line,
                 cap: Fraction) -> Optional[Interval]:
    """Deflection parameters t past u with the deflector base on F_Q and a capped flag able to reach 2 t_u."""
    x = _Line(candidate.base, candidate.direction)
    constraints = [
        LinearConstraint((1,), -candidate.t_u, strict=True),
        LinearConstraint((1,), cap - 2 * candidate.t_u, strict=True),
        x.positive(polygon.halfspaces[facet_q]),
    ]
    upper = candidate.t_u + cap if candidate.length is INF else candidate.length
    constraints.append(LinearConstraint((-1,), upper, strict=True))
    for k in polygon.geometric_facets:
        if k != facet_q:
            constraints.append(base_q.positive(polygon.halfspaces[k]))
    return solve_interval(constraints)


def _try_flags(polygon: Polygon, u: Vector, candidate: _Candidate, facet_q: T_FacetIndex, v_q: Vector,
               base_q: _Line, t: Fraction,
               config: SearchConfig) -> Tuple[Optional[FlaggedExtendedProbe], Optional[Fraction]]:
    """The first displacing flag at the deflection parameter t, or the best total length reached."""
    try:
        probe = truncate_probe(candidate.probe, t)
        deflector = make_probe(polygon, facet_q, base_q.at(t), v_q)
    except ProbeError as e:
        logger.debug("Flag deflection at t = %s rejected: %s", format_rational(t), e)
        return None, None
    c = polygon.halfspaces[facet_q].eta.dot(candidate.direction)
    kind, mus = (FlagKind.PARALLEL, (Fraction(0),)) if c == 0 else (FlagKind.GENERAL, config.mu_samples)
    best = None
    for mu in mus:
        # u is displaced only if t + len_F > 2 t_u
        if t + flag_length_bound(polygon, probe, deflector, mu, config.max_flag_cap) <= 2 * candidate.t_u:
            continue
        flag = maximize_flag(polygon, probe, deflector, kind, mu, config.epsilon, config.max_flag_cap)
        if flag is None:
            continue
        if displaces(flag, u):
            return flag, flag.total_length
        best = flag.total_length if best is None else max(best, flag.total_length)
    return None, best


def find_flagged_extension(polygon: Polygon, u: Vector, config: SearchConfig) -> Optional[FlaggedExtendedProbe]:
    """
    A flagged extended probe displacing u: deflection points are sampled along each probe through u,
    then refined around the sample reaching the longest flag.
    """
    for candidate in _probe_candidates(polygon, u, config.direction_height):
        x = _Line(candidate.base, candidate.direction)
        for facet_q in base_facets(polygon):
            if facet_q in candidate.exit_facets:
                continue
            h_q = polygon.halfspaces[facet_q]
            c = h_q.eta.dot(candidate.direction)
            if c < 0:
                bound = directed_distance(candidate.base, h_q.eta, h_q.kappa, candidate.direction)
                if bound / 2 <= candidate.t_u:
                    continue
            for v_q in transverse_directions(h_q.eta, config.deflector_height):
                if v_q.det(candidate.direction) == 0:
                    continue
                base_q = x.along(h_q, v_q, -1)
                window = _flag_window(polygon, candidate, facet_q, base_q, config.max_flag_cap)
                if window is None:
                    continue
                flag = _search_window(polygon, u, candidate, facet_q, v_q, base_q, window, config)
                if flag is not None:
                    return flag
    return None


def _search_window(polygon: Polygon, u: Vector, candidate: _Candidate, facet_q: T_FacetIndex, v_q: Vector,
                   base_q: _Line, window: Interval, config: SearchConfig) -> Optional[FlaggedExtendedProbe]:
    samples = window.samples(config.x_pq_samples)
    step = (window.upper - window.lower) / (config.x_pq_samples + 1)
    best_t, best_length = None, None
    for _ in range(config.refinement_rounds + 1):
        for t in samples:
            flag, length = _try_flags(polygon, u, candidate, facet_q, v_q, base_q, t, config)
            if flag is not None:
                return flag
            if length is not None and (best_length is None or length > best_length):
                best_t, best_length = t, length
        if best_t is None:
            return None
        # refine around the best deflection point
        local = Interval(best_t - step, best_t + step, True, True)
        step = step * 2 / (REFINEMENT_SAMPLES + 1)
        samples = [t for t in local.samples(REFINEMENT_SAMPLES) if window.contains(t) and t != best_t]
        logger.debug("Refining flags around t = %s", format_rational(best_t))
    return None


def _verified(polygon: Polygon, u: Vector, certificate: Certificate) -> bool:
    try:
        check_certificate(polygon, certificate)
    except ProbeError as e:
        logger.warning("Discarding a certificate that does not re-verify: %s", e)
        return False
    return displaces(certificate, u)


def verify_certificate(polygon: Polygon, certificate: AnyCertificate):
    """
    Re-verifies any certificate against a polygon.

    Raises:
        ProbeError: If a probe certificate fails.
        QwCertificateError: If a nondisplaceability certificate fails.
    """
    if isinstance(certificate, QwCertificate):
        verify_qw_certificate(polygon, certificate)
    else:
        check_certificate(polygon, certificate)


def classify_point(polygon: Polygon, u: Vector, config: SearchConfig = SearchConfig()) -> Verdict:
    """
    Classifies the fiber over an interior point.

    Args:
        polygon: The polygon.
        u: An interior point.
        config: Search bounds.

    Returns:
        The verdict, with its re-verified certificate.

    Raises:
        PolygonError: If u is not an interior point.
    """
    if not contains(polygon, u, Membership.INTERIOR):
        raise PolygonError(f"Point {u} is not in the interior of the polygon")

    searches = (
        (find_probe, VerdictClass.DISPLACEABLE_PROBE),
        (find_symmetric_extension, VerdictClass.DISPLACEABLE_SYMMETRIC_EXT),
        (find_flagged_extension, VerdictClass.DISPLACEABLE_FLAGGED_EXT),
    )
    for search, classification in searches:
        certificate = search(polygon, u, config)
        if certificate is not None and _verified(polygon, u, certificate):
            logger.info("%s: %s", u, classification.value)
            return Verdict(u, classification, certificate)

    certificate = certify_nondisplaceable(polygon, u, config.ghost_height)
    if certificate is not None:
        try:
            verify_qw_certificate(polygon, certificate)
        except QwCertificateError as e:
            logger.warning("Discarding a nondisplaceability certificate at %s: %s", u, e)
        else:
            classification = (VerdictClass.NONDISP_CERTIFIED if certificate.kind == QwKind.UNIT_POINT_SOLVED
                              else VerdictClass.NONDISP_CANDIDATE)
            logger.info("%s: %s", u, classification.value)
            return Verdict(u, classification, certificate)

    logger.info("%s: %s", u, VerdictClass.UNKNOWN.value)
    return Verdict(u, VerdictClass.UNKNOWN)


def grid_shape(bbox: T_BoundingBox, resolution: Fraction) -> Tuple[int, int]:
    x0, y0, x1, y1 = bbox
    return math.floor((x1 - x0) / resolution) + 1, math.floor((y1 - y0) / resolution) + 1


def grid_points(bbox: T_BoundingBox, resolution: Fraction) -> List[Vector]:
    """The grid points of a bounding box, row by row from the bottom."""
    if resolution <= 0:
        raise ValueError(f"Resolution must be positive, got {format_rational(resolution)}")
    x0, y0, x1, y1 = bbox
    if x1 < x0 or y1 < y0:
        raise ValueError("Bounding box corners must satisfy x0 <= x1 and y0 <= y1")
    columns, rows = grid_shape(bbox, resolution)
    return [Vector(x0 + i * resolution, y0 + j * resolution) for j in range(rows) for i in range(columns)]


def _classify_cell(polygon: Polygon, point: Vector, config: SearchConfig) -> Verdict:
    if not contains(polygon, point, Membership.INTERIOR):
        return Verdict(point, VerdictClass.EXTERIOR)
    return classify_point(polygon, point, config)


def _classify_chunk(polygon: Polygon, points: Sequence[Vector], config: SearchConfig) -> List[Verdict]:
    return [_classify_cell(polygon, point, config) for point in points]


def worker_count() -> int:
    """Worker processes for grid classification, from TORIC_PROBE_THREADS (0 or unset: one per CPU)."""
    value = os.environ.get(THREADS_VARIABLE, "0").strip() or "0"
    try:
        count = int(value)
    except ValueError:
        raise ValueError(f"{THREADS_VARIABLE} must be a nonnegative integer, got {value!r}") from None
    if count < 0:
        raise ValueError(f"{THREADS_VARIABLE} must be a nonnegative integer, got {count}")
    return count or os.cpu_count() or 1


def classify_grid(polygon: Polygon, bbox: T_BoundingBox, resolution: Fraction,
                  config: SearchConfig = SearchConfig(), workers: Optional[int] = None) -> ClassificationGrid:
    """
    Classifies every grid point of a bounding box; points outside the polygon's interior are EXTERIOR.

    Args:
        polygon: The polygon.
        bbox: The box (x0, y0, x1, y1).
        resolution: The grid step.
        config: Search bounds.
        workers: Worker processes; by default taken from TORIC_PROBE_THREADS. 1 classifies in-process.

    Returns:
        The grid, independent of the number of workers.
    """
    bbox = tuple(Fraction(value) for value in bbox)
    resolution = Fraction(resolution)
    points = grid_points(bbox, resolution)
    workers = workers or worker_count()
    logger.info("Classifying %d grid points of %r with %d worker(s)", len(points), polygon.name, workers)

    if workers == 1 or len(points) <= 1:
        cells = _classify_chunk(polygon, points, config)
    else:
        size = max(1, math.ceil(len(points) / (4 * workers)))
        chunks = [points[i:i + size] for i in range(0, len(points), size)]
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = executor.map(_classify_chunk, itertools.repeat(polygon), chunks, itertools.repeat(config))
            cells = [verdict for chunk in results for verdict in chunk]

    grid = ClassificationGrid(polygon, bbox, resolution, tuple(cells))
    logger.info("Grid of %r: %s", polygon.name,
                ", ".join(f"{c.value}={n}" for c, n in _count(grid.cells).items() if n))
    return grid


def _count(cells: Iterable[Verdict]) -> Dict[VerdictClass, int]:
    counts = {classification: 0 for classification in VerdictClass}
    for cell in cells:
        counts[cell.classification] += 1
    return counts


def _verify_cell(polygon: Polygon, cell: Verdict):
    expected = _CERTIFICATE_TYPES.get(cell.classification)
    if expected is None:
        if cell.certificate is not None:
            raise AuditError(cell, "unexpected certificate")
        return
    if not isinstance(cell.certificate, expected):
        raise AuditError(cell, f"expected a {expected.__name__} certificate")
    if cell.classification.is_displaceable:
        try:
            check_certificate(polygon, cell.certificate)
        except ProbeError as e:
            raise AuditError(cell, f"certificate does not re-verify: {e}") from e
        if not displaces(cell.certificate, cell.point):
            raise AuditError(cell, "certificate does not displace the cell point")
        return
    expected_kind = (QwKind.UNIT_POINT_SOLVED if cell.classification == VerdictClass.NONDISP_CERTIFIED
                     else QwKind.GEOMETRIC_CANDIDATE)
    if cell.certificate.kind != expected_kind or cell.certificate.point != cell.point:
        raise AuditError(cell, "certificate kind or point does not match the cell")
    try:
        verify_qw_certificate(polygon, cell.certificate)
    except QwCertificateError as e:
        raise AuditError(cell, f"certificate does not re-verify: {e}") from e


def consistency_audit(grid: ClassificationGrid) -> AuditReport:
    """
    Re-verifies every certificate of a grid and checks that no displacement certificate displaces
    a point classified as nondisplaceable.

    Returns:
        Counts and areas (count times resolution squared) per class.

    Raises:
        AuditError: Naming the first offending cell.
    """
    verified = 0
    for cell in grid.cells:
        _verify_cell(grid.polygon, cell)
        verified += cell.certificate is not None

    nondisplaceable = [cell for cell in grid.cells if cell.classification.is_nondisplaceable]
    for cell in grid.cells:
        if not cell.classification.is_displaceable:
            continue
        for other in nondisplaceable:
            if displaces(cell.certificate, other.point):
                raise AuditError(other, f"displaced by the certificate of the cell at {cell.point}")

    counts = _count(grid.cells)
    area = grid.resolution ** 2
    report = AuditReport(counts, {c: n * area for c, n in counts.items()}, verified)
    logger.info("Audit passed: %d certificates verified", verified)
    return report
