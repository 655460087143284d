from fractions import Fraction
from typing import List, Sequence, Tuple

import networkx as nx

from .affine import Vector
from .polygons import Polygon, PolygonError, T_FacetIndex


def build_facet_graph(polygon: Polygon) -> nx.Graph:
    """
    Build an undirected graph of the geometric facets of a polygon.
    Nodes are facet indices; two facets are adjacent when they meet at a vertex,
    and the edge carries the vertex point under the "vertex" attribute.

    Args:
        polygon: The polygon.

    Returns:
        nx.Graph: The facet adjacency graph, a cycle for bounded polygons and a path otherwise.
    """
    graph = nx.Graph()
    graph.add_nodes_from(polygon.geometric_facets)
    for vertex in polygon.vertices:
        a, b = vertex.facets
        graph.add_edge(a, b, vertex=vertex.point)
    return graph


def polygon_boundary(polygon: Polygon) -> List[T_FacetIndex]:
    """
    Orders the geometric facets counterclockwise along the boundary.
    Unbounded polygons start with the facet whose edge comes in from infinity.

    Raises:
        PolygonError: If the facets do not form a single cycle or path.
    """
    graph = build_facet_graph(polygon)
    if not nx.is_connected(graph):
        raise PolygonError(f"Facets of polygon {polygon.name!r} do not form a connected boundary")

    if polygon.is_bounded:
        if any(degree != 2 for _, degree in graph.degree()):
            raise PolygonError(f"Facets of polygon {polygon.name!r} do not form a cycle")
        start = min(graph.nodes)
    else:
        starts = [i for i, edge in polygon.edges.items() if edge.t_min is None]
        if len(starts) != 1 or not nx.is_tree(graph):
            raise PolygonError(f"Facets of polygon {polygon.name!r} do not form a path")
        start = starts[0]

    order = [start]
    while len(order) <= graph.number_of_nodes():
        current = order[-1]
        end = polygon.edges[current].end
        if end is None:
            break
        following = [n for n in graph.neighbors(current) if graph.edges[current, n]["vertex"] == end]
        if len(following) != 1:
            raise PolygonError(f"Vertex {end} of polygon {polygon.name!r} is not shared by exactly two facets")
        if following[0] == start:
            break
        order.append(following[0])
    return order


def boundary_outline(polygon: Polygon, bbox: Tuple[Fraction, Fraction, Fraction, Fraction]) -> List[Vector]:
    """
    The boundary as a list of points: the vertices in counterclockwise order, extended by one far point
    on each unbounded edge so that the outline leaves the bounding box.
    """
    order = polygon_boundary(polygon)
    x0, y0, x1, y1 = bbox
    points: List[Vector] = []

    def far_point(origin: Vector, direction: Vector) -> Vector:
        reach = (x1 - x0) + (y1 - y0) + abs(origin.x1 - x0) + abs(origin.x2 - y0) + 1
        return origin + reach * direction

    first = polygon.edges[order[0]]
    if first.t_min is None:
        points.append(far_point(first.end, -first.direction))
    for facet in order:
        end = polygon.edges[facet].end
        if end is not None:
            points.append(end)
    last = polygon.edges[order[-1]]
    if last.t_max is None:
        points.append(far_point(last.start, last.direction))
    return points


def facet_sequence(polygon: Polygon) -> Sequence[str]:
    """Facet constraints in boundary order, as printed by the command line."""
    return [str(polygon.halfspaces[i]) for i in polygon_boundary(polygon)]
