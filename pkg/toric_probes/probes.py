"""
Probes and extended probes: construction, exact validation, and the halfway displacement criteria.

Every constructor verifies the defining conditions of its certificate in exact arithmetic and raises
a ProbeError naming the violated condition; the ``check_*`` functions re-derive a certificate from its
defining data and compare it to the stored derived data.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
import logging
from typing import Optional, Tuple, Union

from .affine import (
    INF, AffineError, AffineReflection, Distance, Vector, directed_distance, reflection_from_facets,
)
from .inequalities import LinearConstraint, maximize
from .polygons import (
    Membership, Polygon, PolygonError, T_FacetIndex, closure_ray_exit, contains,
)
from .utils import format_rational


logger = logging.getLogger(__name__)


class ProbeError(ValueError):
    """Base class for invalid probe certificates."""


class InvalidProbeError(ProbeError):
    """The data do not define a probe (or an extension) in the polygon."""


class FlagRejectedError(ProbeError):
    """A flagged extended probe violates one of its defining conditions."""
    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"Flag rejected ({condition}): {message}")


class FlagKind(str, Enum):
    PARALLEL = "parallel"
    GENERAL = "general"


@dataclass(frozen=True)
class Probe:
    base_facet: T_FacetIndex
    base: Vector
    direction: Vector
    length: Distance
    endpoint: Optional[Vector]
    exit_facets: Tuple[T_FacetIndex, ...]

    @property
    def is_full(self) -> bool:
        """Whether the probe runs up to the boundary of the polygon's closure."""
        return self.length is INF or bool(self.exit_facets)

    def point_at(self, t: Fraction) -> Vector:
        return self.base + t * self.direction

    def parameter_of(self, u: Vector) -> Optional[Fraction]:
        """The affine parameter t with u == base + t * direction, or None when u is off the probe line."""
        offset = u - self.base
        if offset.det(self.direction) != 0:
            return None
        return offset.dot(self.direction) / self.direction.dot(self.direction)

    def interior_parameter(self, u: Vector) -> Optional[Fraction]:
        """Like parameter_of, but None unless u lies in the open segment."""
        t = self.parameter_of(u)
        if t is None or t <= 0 or not t < self.length:
            return None
        return t


@dataclass(frozen=True)
class SymmetricExtendedProbe:
    probe: Probe
    deflector: Probe
    exit_facet: T_FacetIndex
    x_pq: Vector
    reflection: AffineReflection
    x_pq_prime: Vector
    v_p_prime: Vector
    extension_length: Distance
    extension_end: Optional[Vector]
    total_length: Distance

    def extension_parameter(self, u: Vector) -> Optional[Fraction]:
        """The parameter of u along the extension P' (from x'_PQ), or None if u is not in its interior."""
        offset = u - self.x_pq_prime
        if offset.det(self.v_p_prime) != 0:
            return None
        t = offset.dot(self.v_p_prime) / self.v_p_prime.dot(self.v_p_prime)
        if t <= 0 or not t < self.extension_length:
            return None
        return t


@dataclass(frozen=True)
class FlaggedExtendedProbe:
    probe: Probe
    deflector: Probe
    x_pq: Vector
    kind: FlagKind
    mu: Fraction
    x_f: Vector
    x_f_prime: Vector
    flag_length: Fraction
    e_f: Vector
    e_f_prime: Vector
    v_f: Vector
    v_f_prime: Vector
    total_length: Fraction

    @property
    def alpha(self) -> Fraction:
        return self.deflector.parameter_of(self.x_f)

    @property
    def alpha_prime(self) -> Fraction:
        return self.deflector.parameter_of(self.x_f_prime)


Certificate = Union[Probe, SymmetricExtendedProbe, FlaggedExtendedProbe]


def make_probe(polygon: Polygon, facet: T_FacetIndex, base: Vector, direction: Vector,
               length: Optional[Fraction] = None) -> Probe:
    """
    Builds a probe based on a facet.

    Args:
        polygon: The polygon.
        facet: Index of the base facet; it must be a closed, label-1 geometric facet.
        base: A point in the relative interior of the base facet's edge.
        direction: A primitive direction with <eta, direction> == 1.
        length: Optional explicit (truncated) length; by default the probe runs to the boundary of the closure.

    Returns:
        The probe.

    Raises:
        InvalidProbeError: If any of the conditions above is violated.
    """
    if facet not in polygon.edges:
        raise InvalidProbeError(f"Facet {facet} is not an edge of the polygon")
    halfspace = polygon.halfspaces[facet]
    if halfspace.is_open:
        raise InvalidProbeError(f"Probes cannot be based on the open facet {facet}")
    if halfspace.label != 1:
        raise InvalidProbeError(f"Probes cannot be based on facet {facet} with label {halfspace.label}")
    if not direction.is_primitive:
        raise InvalidProbeError(f"Direction {direction} is not primitive")
    if halfspace.eta.dot(direction) != 1:
        raise InvalidProbeError(
            f"Direction {direction} is not inward transverse to facet {facet} "
            f"(<eta, v> = {format_rational(halfspace.eta.dot(direction))})")
    if not polygon.edges[facet].relint_contains(base):
        raise InvalidProbeError(f"Base {base} is not in the relative interior of facet {facet}")

    try:
        exit_ = closure_ray_exit(polygon, base, direction)
    except PolygonError as e:
        raise InvalidProbeError(str(e)) from e
    full_length = INF if exit_ is None else exit_.t

    if length is None or length == full_length:
        if exit_ is None:
            return Probe(facet, base, direction, INF, None, ())
        return Probe(facet, base, direction, exit_.t, exit_.point, exit_.facets)

    length = Fraction(length)
    if not 0 < length < full_length:
        raise InvalidProbeError(
            f"Length {format_rational(length)} must be positive and at most the exit distance {full_length}")
    return Probe(facet, base, direction, length, base + length * direction, ())


def truncate_probe(probe: Probe, length: Fraction) -> Probe:
    """The probe cut at a length inside its open segment, without recomputing the exit."""
    length = Fraction(length)
    if not 0 < length < probe.length:
        raise InvalidProbeError(
            f"Length {format_rational(length)} must be positive and below the probe length {probe.length}")
    return Probe(probe.base_facet, probe.base, probe.direction, length, probe.point_at(length), ())


def check_probe(polygon: Polygon, probe: Probe):
    """Re-derives a probe from its base data and compares the stored length and endpoint."""
    truncated = None if probe.is_full else probe.length
    rebuilt = make_probe(polygon, probe.base_facet, probe.base, probe.direction, truncated)
    if rebuilt != probe:
        raise ProbeError(f"Stored probe data do not match the polygon: {probe} != {rebuilt}")


def probe_displaces(probe: Probe, u: Vector) -> bool:
    """
    Whether a point of the open probe segment lies less than halfway along the probe.

    Raises:
        ProbeError: If u does not lie in the interior of the probe.
    """
    t = probe.interior_parameter(u)
    if t is None:
        raise ProbeError(f"Point {u} is not in the interior of the probe")
    return t < probe.length / 2


def is_symmetric(polygon: Polygon, probe: Probe) -> Optional[T_FacetIndex]:
    """
    The exit facet of a full probe leaving through the relative interior of a closed facet F'
    with <eta_F', v> == -1, or None when the probe is not symmetric.
    """
    if probe.length is INF or len(probe.exit_facets) != 1:
        return None
    (exit_facet,) = probe.exit_facets
    halfspace = polygon.halfspaces[exit_facet]
    if halfspace.is_open or halfspace.label != 1 or exit_facet not in polygon.edges:
        return None
    if halfspace.eta.dot(probe.direction) != -1:
        return None
    return exit_facet


def build_symmetric_extension(polygon: Polygon, probe: Probe, deflector: Probe) -> SymmetricExtendedProbe:
    """
    Deflects a probe truncated on a symmetric probe through the reflection swapping the
    deflector's facets, and extends the reflected direction to the boundary.

    Args:
        polygon: The polygon.
        probe: The probe P, truncated at the deflection point x_PQ.
        deflector: A full symmetric probe Q whose open segment contains x_PQ.

    Returns:
        The symmetric extended probe P u Q u P'.

    Raises:
        InvalidProbeError: If Q is not symmetric or x_PQ is not in the interior of Q.
        ProbeError: If the length bound d_{v_P}(b_P, F_Q) is violated.
    """
    exit_facet = is_symmetric(polygon, deflector)
    if exit_facet is None:
        raise InvalidProbeError("The deflecting probe is not symmetric")
    if probe.endpoint is None:
        raise InvalidProbeError("The deflected probe must have finite length")
    x_pq = probe.endpoint
    if deflector.interior_parameter(x_pq) is None:
        raise InvalidProbeError(f"Deflection point {x_pq} is not in the interior of the deflecting probe")

    base_q = polygon.halfspaces[deflector.base_facet]
    exit_q = polygon.halfspaces[exit_facet]
    try:
        reflection = reflection_from_facets(base_q.eta, base_q.kappa, exit_q.eta, exit_q.kappa, deflector.direction)
    except AffineError as e:
        raise InvalidProbeError(str(e)) from e
    x_pq_prime = reflection.apply(x_pq)
    v_p_prime = reflection.apply_linear(probe.direction)

    try:
        exit_ = closure_ray_exit(polygon, x_pq_prime, v_p_prime)
    except PolygonError as e:
        raise InvalidProbeError(f"Extension leaves the polygon immediately: {e}") from e
    if exit_ is None:
        extension_length, extension_end = INF, None
    else:
        extension_length, extension_end = exit_.t, exit_.point
    total_length = probe.length + extension_length

    bound = directed_distance(probe.base, base_q.eta, base_q.kappa, probe.direction)
    if total_length > bound:
        raise ProbeError(f"Extended length {total_length} exceeds the bound {bound} along the probe direction")

    return SymmetricExtendedProbe(probe, deflector, exit_facet, x_pq, reflection, x_pq_prime, v_p_prime,
                                  extension_length, extension_end, total_length)


def check_symmetric_extension(polygon: Polygon, sp: SymmetricExtendedProbe):
    """Rebuilds a symmetric extended probe from its probes and compares every derived field."""
    check_probe(polygon, sp.probe)
    check_probe(polygon, sp.deflector)
    rebuilt = build_symmetric_extension(polygon, sp.probe, sp.deflector)
    if rebuilt != sp:
        raise ProbeError("Stored symmetric extension does not match its rebuilt counterpart")


def sep_displaces(sp: SymmetricExtendedProbe, u: Vector) -> bool:
    """
    Whether a symmetric extended probe displaces a point of P or of P'.

    On P the point must be less than halfway along the whole extended probe; on P' the length of P plus
    the distance from x'_PQ must be less than half the total length.

    Raises:
        ProbeError: If u lies in neither open segment.
    """
    t = sp.probe.interior_parameter(u)
    if t is not None:
        return t < sp.total_length / 2
    t_prime = sp.extension_parameter(u)
    if t_prime is not None:
        return sp.probe.length + t_prime < sp.total_length / 2
    raise ProbeError(f"Point {u} is on neither segment of the extended probe")


def reverse_symmetric_extension(polygon: Polygon, sp: SymmetricExtendedProbe) -> SymmetricExtendedProbe:
    """
    The extended probe traversed backwards: based at the end of P', deflected by Q reversed at x'_PQ.

    Raises:
        InvalidProbeError: If P' does not end transversally in the relative interior of a closed facet.
    """
    if sp.extension_end is None:
        raise InvalidProbeError("The extension is unbounded and cannot be reversed")
    facets = [i for i in polygon.geometric_facets if polygon.level(i, sp.extension_end) == 0]
    if len(facets) != 1:
        raise InvalidProbeError(f"The extension ends at {sp.extension_end}, not in the interior of a facet")
    (end_facet,) = facets
    reversed_probe = make_probe(polygon, end_facet, sp.extension_end, -sp.v_p_prime, sp.extension_length)
    deflector = sp.deflector
    reversed_deflector = make_probe(polygon, sp.exit_facet, deflector.endpoint, -deflector.direction)
    return build_symmetric_extension(polygon, reversed_probe, reversed_deflector)


def flag_directions(probe: Probe, deflector: Probe, polygon: Polygon, mu: Fraction) -> Tuple[Vector, Vector]:
    """The flag edge directions v_F = v_P - (1 + mu) c v_Q and v'_F = v_P - mu c v_Q, with c = <eta_Q, v_P>."""
    c = polygon.halfspaces[deflector.base_facet].eta.dot(probe.direction)
    v_f = probe.direction - (1 + mu) * c * deflector.direction
    v_f_prime = probe.direction - mu * c * deflector.direction
    return v_f, v_f_prime


def _check_flag_setup(polygon: Polygon, probe: Probe, deflector: Probe, kind: FlagKind, mu: Fraction) -> Fraction:
    if probe.endpoint is None:
        raise InvalidProbeError("The deflected probe must have finite length")
    if deflector.interior_parameter(probe.endpoint) is None:
        raise InvalidProbeError(f"Deflection point {probe.endpoint} is not in the interior of the deflecting probe")
    if probe.direction.det(deflector.direction) == 0:
        raise InvalidProbeError("The probe and the deflecting probe are parallel")
    if not 0 <= mu <= 1:
        raise InvalidProbeError(f"Flag parameter {format_rational(mu)} is outside [0, 1]")
    c = polygon.halfspaces[deflector.base_facet].eta.dot(probe.direction)
    if (kind == FlagKind.PARALLEL) != (c == 0):
        raise InvalidProbeError(
            f"A {kind.value} flag needs <eta_Q, v_P> {'=' if kind == FlagKind.PARALLEL else '!='} 0, "
            f"got {format_rational(c)}")
    return c


def _second_bound(s: Fraction, c: Fraction) -> Distance:
    return s / -c if c < 0 else INF


def build_flagged(polygon: Polygon, probe: Probe, deflector: Probe, kind: FlagKind, mu: Fraction,
                  x_f: Vector, x_f_prime: Vector, flag_length: Fraction) -> FlaggedExtendedProbe:
    """
    Builds an extended probe with a flag attached to the deflecting probe Q.

    The flag is the quadrilateral with corners x_F, x'_F on Q and e_F = x_F + len_F v_F,
    e'_F = x'_F + len_F v'_F.

    Args:
        polygon: The polygon.
        probe: The probe P, truncated at the deflection point x_PQ.
        deflector: The probe Q whose open segment contains x_PQ.
        kind: PARALLEL when <eta_Q, v_P> == 0, GENERAL otherwise.
        mu: The shape parameter in [0, 1] (ignored by parallel flags).
        x_f, x_f_prime: The flag base points b_Q + alpha v_Q and b_Q + alpha' v_Q, 0 < alpha < alpha' <= len(Q).
        flag_length: The flag length len_F >= 0.

    Returns:
        The verified flagged extended probe.

    Raises:
        InvalidProbeError: If the probes or the flag base points are not positioned as required.
        FlagRejectedError: If a defining inequality fails; `condition` names it.
    """
    mu = Fraction(mu)
    flag_length = Fraction(flag_length)
    c = _check_flag_setup(polygon, probe, deflector, kind, mu)
    if kind == FlagKind.PARALLEL:
        mu = Fraction(0)
    alpha = deflector.parameter_of(x_f)
    alpha_prime = deflector.parameter_of(x_f_prime)
    if alpha is None or alpha_prime is None or not 0 < alpha < alpha_prime or alpha_prime > deflector.length:
        raise InvalidProbeError("Flag base points must satisfy 0 < alpha < alpha' <= len(Q) on the deflecting probe")
    if flag_length < 0:
        raise InvalidProbeError("Flag length must be nonnegative")

    x_pq = probe.endpoint
    s = polygon.level(deflector.base_facet, x_pq)
    if not alpha_prime - alpha > s:
        raise FlagRejectedError(
            "first-inequality",
            f"d_aff(x_F, x'_F) = {format_rational(alpha_prime - alpha)} is not greater than "
            f"d_aff(x_PQ, F_Q) = {format_rational(s)}")
    if kind == FlagKind.GENERAL:
        bound = _second_bound(s, c)
        if not flag_length < bound:
            raise FlagRejectedError(
                "second-inequality",
                f"len(F) = {format_rational(flag_length)} is not less than d_v(x_PQ, F_Q) = {bound}")

    v_f, v_f_prime = flag_directions(probe, deflector, polygon, mu)
    e_f = x_f + flag_length * v_f
    e_f_prime = x_f_prime + flag_length * v_f_prime
    for corner in (x_f, x_f_prime, e_f, e_f_prime):
        if not contains(polygon, corner, Membership.AS_DECLARED):
            raise FlagRejectedError("containment", f"Flag corner {corner} is not in the polygon")
    if alpha_prime - alpha + c * flag_length < 0:
        raise FlagRejectedError("crossing", "The flag boundaries cross")

    return FlaggedExtendedProbe(probe, deflector, x_pq, kind, mu, x_f, x_f_prime, flag_length,
                                e_f, e_f_prime, v_f, v_f_prime, probe.length + flag_length)


def check_flagged(polygon: Polygon, fp: FlaggedExtendedProbe):
    """Rebuilds a flagged extended probe from its defining data and compares every derived field."""
    check_probe(polygon, fp.probe)
    check_probe(polygon, fp.deflector)
    rebuilt = build_flagged(polygon, fp.probe, fp.deflector, fp.kind, fp.mu, fp.x_f, fp.x_f_prime, fp.flag_length)
    if rebuilt != fp:
        raise ProbeError("Stored flag does not match its rebuilt counterpart")


def flagged_displaces(fp: FlaggedExtendedProbe, u: Vector) -> bool:
    """
    Whether a point of P lies less than halfway along the flagged extended probe.

    Raises:
        ProbeError: If u is not in the open segment of P.
    """
    t = fp.probe.interior_parameter(u)
    if t is None:
        raise ProbeError(f"Point {u} is not in the interior of the deflected probe")
    return t < fp.total_length / 2


def flag_length_bound(polygon: Polygon, probe: Probe, deflector: Probe, mu: Fraction,
                      cap: Fraction = Fraction(64)) -> Fraction:
    """
    An upper bound on the flag length that `maximize_flag` can reach, from single constraints only.

    The first inequality puts alpha in [0, len(Q) - s] and alpha' in [s, len(Q)], with s the level of
    x_PQ over F_Q; each flag corner must stay in the polygon over its range. For c = <eta_Q, v_P> < 0
    the flag is also shorter than s / -c and than len(Q) / -c.
    """
    c = polygon.halfspaces[deflector.base_facet].eta.dot(probe.direction)
    s = polygon.level(deflector.base_facet, probe.endpoint)
    bound = Fraction(cap)
    if c < 0:
        bound = min(bound, s / -c)
        if deflector.length is not INF:
            bound = min(bound, deflector.length / -c)
    v_f, v_f_prime = flag_directions(probe, deflector, polygon, Fraction(mu))
    alpha_upper = INF if deflector.length is INF else deflector.length - s
    for i in polygon.geometric_facets:
        h = polygon.halfspaces[i]
        level = h.level(deflector.base)
        along_q = h.eta.dot(deflector.direction)
        for (lower, upper), v in (((Fraction(0), alpha_upper), v_f), ((s, deflector.length), v_f_prime)):
            rate = h.eta.dot(v)
            if rate >= 0:
                continue
            if upper is INF:
                if along_q > 0:
                    continue
                reach = level + lower * along_q
            else:
                reach = level + max(lower * along_q, upper * along_q)
            bound = min(bound, max(reach, Fraction(0)) / -rate)
    return bound


def maximize_flag(polygon: Polygon, probe: Probe, deflector: Probe, kind: FlagKind, mu: Fraction,
                  epsilon: Fraction = Fraction(1, 1000),
                  cap: Fraction = Fraction(64)) -> Optional[FlaggedExtendedProbe]:
    """
    Finds the longest flag for a fixed probe, deflector, kind and mu.

    The flag offsets alpha, alpha' and the length len_F are the variables of an exact linear program.
    Strict conditions are tightened to a margin of epsilon times the deflector length (epsilon itself
    for unbounded deflectors), and an unbounded flag length is capped.

    Returns:
        The verified flag of maximal length, or None if no flag satisfies the conditions.
    """
    try:
        c = _check_flag_setup(polygon, probe, deflector, kind, Fraction(mu))
    except InvalidProbeError as e:
        logger.debug("Flag setup rejected: %s", e)
        return None
    mu = Fraction(0) if kind == FlagKind.PARALLEL else Fraction(mu)
    margin = epsilon * (1 if deflector.length is INF else deflector.length)

    s = polygon.level(deflector.base_facet, probe.endpoint)
    v_q = deflector.direction
    v_f, v_f_prime = flag_directions(probe, deflector, polygon, mu)

    # variables: (alpha, alpha', len_F)
    constraints = [
        LinearConstraint((1, 0, 0), 0, strict=True),
        LinearConstraint((-1, 1, 0), -s, strict=True),
        LinearConstraint((0, 0, 1), 0),
        LinearConstraint((-1, 1, c), 0),
    ]
    if deflector.length is not INF:
        constraints.append(LinearConstraint((0, -1, 0), deflector.length))
    if kind == FlagKind.GENERAL and c < 0:
        constraints.append(LinearConstraint((0, 0, -1), s / -c, strict=True))
    for i in polygon.geometric_facets:
        h = polygon.halfspaces[i]
        level = h.level(deflector.base)
        along_q = h.eta.dot(v_q)
        for on_prime, v in ((False, v_f), (True, v_f_prime)):
            offsets = (0, along_q, 0) if on_prime else (along_q, 0, 0)
            constraints.append(LinearConstraint(offsets, level, strict=h.is_open))
            constraints.append(LinearConstraint(
                (offsets[0], offsets[1], h.eta.dot(v)), level, strict=h.is_open))

    tightened = [constraint.tightened(margin) for constraint in constraints]
    solution = maximize(tightened, objective=2, order=(1, 0), prefer_upper=(False, True, True), cap=cap)
    if solution is None:
        logger.debug("No flag for deflector at %s along %s", deflector.base, v_q)
        return None
    alpha, alpha_prime, flag_length = solution
    try:
        return build_flagged(polygon, probe, deflector, kind, mu,
                             deflector.point_at(alpha), deflector.point_at(alpha_prime), flag_length)
    except ProbeError as e:
        logger.debug("Optimized flag failed verification: %s", e)
        return None


def displaces(certificate: Certificate, u: Vector) -> bool:
    """Dispatches the displacement criterion of any probe certificate; points off the certificate give False."""
    try:
        if isinstance(certificate, Probe):
            return probe_displaces(certificate, u)
        if isinstance(certificate, SymmetricExtendedProbe):
            return sep_displaces(certificate, u)
        if isinstance(certificate, FlaggedExtendedProbe):
            return flagged_displaces(certificate, u)
    except ProbeError:
        return False
    raise TypeError(f"Not a probe certificate: {type(certificate).__name__}")


def check_certificate(polygon: Polygon, certificate: Certificate):
    """Re-verifies any probe certificate against a polygon."""
    if isinstance(certificate, Probe):
        check_probe(polygon, certificate)
    elif isinstance(certificate, SymmetricExtendedProbe):
        check_symmetric_extension(polygon, certificate)
    elif isinstance(certificate, FlaggedExtendedProbe):
        check_flagged(polygon, certificate)
    else:
        raise TypeError(f"Not a probe certificate: {type(certificate).__name__}")
