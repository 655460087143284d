from importlib import resources
import io
import json
from typing import Any, Mapping, Optional, Union

import jsonschema

from .affine import AffineReflection, Vector, parse_distance
from .classification import ClassificationGrid, SearchConfig, Verdict, VerdictClass, grid_points
from .polygons import Closure, HalfSpace, Polygon, build_polygon
from .potentials import PotentialPresentation, QwCertificate, QwKind
from .probes import Certificate, FlagKind, FlaggedExtendedProbe, Probe, SymmetricExtendedProbe
from .resources import schemas
from .utils import T_Stream, parse_rational, use_read_file


POLYGON_SCHEMA = "polygon.schema.json"
CERTIFICATE_SCHEMA = "certificate.schema.json"
GRID_SCHEMA = "grid.schema.json"
SEARCH_CONFIG_SCHEMA = "search_config.schema.json"


def parse_polygon(source: T_Stream, schema_file: str = None) -> Polygon:
    """
    Parses a polygon JSON file under the given source.

    Args:
        source: The source from which to parse the polygon.
            Can either be a name of the file, file path,
            or an open file-like object to read directly from.
        schema_file: Optional path to a custom schema file. If None, the default schema is used.

    Returns:
        The validated polygon, with ghost constraints marked.
    """
    return use_read_file(source, _parse_polygon, schema_file)


def parse_certificate(source: T_Stream, polygon: Polygon) -> Union[Certificate, QwCertificate]:
    """
    Parses a serialized certificate.

    The certificate is only decoded here; `verify_certificate` re-checks it against the polygon.

    Args:
        source: The source from which to parse the certificate.
        polygon: The polygon the certificate refers to.
    """
    return use_read_file(source, _parse_certificate, polygon)


def parse_grid(source: T_Stream) -> ClassificationGrid:
    """Parses a classification grid, including its polygon and the certificates of its cells."""
    return use_read_file(source, _parse_grid)


def parse_search_config(source: T_Stream) -> SearchConfig:
    """Parses a search config; missing fields take their default values."""
    return use_read_file(source, _parse_search_config)


def _parse_polygon(source: io.TextIOBase, schema_file: str = None) -> Polygon:
    return polygon_from_object(json.load(source), schema_file)


def _parse_certificate(source: io.TextIOBase, polygon: Polygon):
    return certificate_from_object(json.load(source), polygon)


def _parse_grid(source: io.TextIOBase) -> ClassificationGrid:
    return grid_from_object(json.load(source))


def _parse_search_config(source: io.TextIOBase) -> SearchConfig:
    config_object = json.load(source)
    validate(config_object, SEARCH_CONFIG_SCHEMA)

    fields = dict(config_object)
    for key in ("epsilon", "max_flag_cap"):
        if key in fields:
            fields[key] = parse_rational(fields[key])
    if "mu_samples" in fields:
        fields["mu_samples"] = tuple(parse_rational(mu) for mu in fields["mu_samples"])
    return SearchConfig(**fields)


def validate(obj: Any, schema_name: str, schema_file: str = None):
    """
    Validates a decoded JSON object against one of the package schemas.

    Raises:
        ValueError: If the object does not conform to the schema.
    """
    schema = read_schema(schema_name, schema_file)
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as e:
        raise ValueError(f"Given JSON does not conform to the expected schema: {e.message}") from e


def polygon_from_object(polygon_object: Any, schema_file: str = None) -> Polygon:
    validate(polygon_object, POLYGON_SCHEMA, schema_file)
    halfspaces = [
        HalfSpace(Vector(*h["eta"]), parse_rational(h["kappa"]), Closure(h.get("closure", "closed")), h.get("label", 1))
        for h in polygon_object["halfspaces"]
    ]
    return build_polygon(halfspaces, name=polygon_object["name"])


def _point(values) -> Vector:
    return Vector.parse(values)


def _optional_point(values) -> Optional[Vector]:
    return None if values is None else Vector.parse(values)


def _probe(probe_object: Mapping[str, Any]) -> Probe:
    return Probe(
        base_facet=probe_object["base_facet"],
        base=_point(probe_object["base"]),
        direction=Vector(*probe_object["direction"]),
        length=parse_distance(probe_object["length"]),
        endpoint=_optional_point(probe_object["endpoint"]),
        exit_facets=tuple(probe_object["exit_facets"]),
    )


def _symmetric_extension(sp_object: Mapping[str, Any]) -> SymmetricExtendedProbe:
    reflection = sp_object["reflection"]
    return SymmetricExtendedProbe(
        probe=_probe(sp_object["probe"]),
        deflector=_probe(sp_object["deflector"]),
        exit_facet=sp_object["exit_facet"],
        x_pq=_point(sp_object["x_pq"]),
        reflection=AffineReflection(tuple(tuple(row) for row in reflection["linear"]),
                                    _point(reflection["translation"])),
        x_pq_prime=_point(sp_object["x_pq_prime"]),
        v_p_prime=Vector(*sp_object["v_p_prime"]),
        extension_length=parse_distance(sp_object["extension_length"]),
        extension_end=_optional_point(sp_object["extension_end"]),
        total_length=parse_distance(sp_object["total_length"]),
    )


def _flagged_extension(fp_object: Mapping[str, Any]) -> FlaggedExtendedProbe:
    return FlaggedExtendedProbe(
        probe=_probe(fp_object["probe"]),
        deflector=_probe(fp_object["deflector"]),
        x_pq=_point(fp_object["x_pq"]),
        kind=FlagKind(fp_object["kind"]),
        mu=parse_rational(fp_object["mu"]),
        x_f=_point(fp_object["x_f"]),
        x_f_prime=_point(fp_object["x_f_prime"]),
        flag_length=parse_rational(fp_object["flag_length"]),
        e_f=_point(fp_object["e_f"]),
        e_f_prime=_point(fp_object["e_f_prime"]),
        v_f=_point(fp_object["v_f"]),
        v_f_prime=_point(fp_object["v_f_prime"]),
        total_length=parse_rational(fp_object["total_length"]),
    )


def _qw_certificate(qw_object: Mapping[str, Any], polygon: Polygon) -> QwCertificate:
    ghosts = tuple(HalfSpace(Vector(*g["eta"]), parse_rational(g["kappa"]), ghost=True) for g in qw_object["ghosts"])
    second_level = qw_object["second_level"]
    return QwCertificate(
        kind=QwKind(qw_object["kind"]),
        presentation=PotentialPresentation(polygon, _point(qw_object["point"]), ghosts),
        level=parse_rational(qw_object["level"]),
        tied=tuple(qw_object["tied"]),
        leads=tuple(parse_rational(lead) for lead in qw_object["leads"]),
        rank=qw_object["rank"],
        second_level=None if second_level is None else parse_rational(second_level),
        second_tied=tuple(qw_object["second_tied"]),
        residual_orders=tuple((i, parse_rational(order)) for i, order in qw_object["residual_orders"]),
        heuristic=qw_object["heuristic"],
    )


def certificate_from_object(certificate_object: Any, polygon: Polygon) -> Union[Certificate, QwCertificate]:
    validate(certificate_object, CERTIFICATE_SCHEMA)
    kind = certificate_object["type"]
    if kind == "probe":
        return _probe(certificate_object)
    elif kind == "symmetric-extended-probe":
        return _symmetric_extension(certificate_object)
    elif kind == "flagged-extended-probe":
        return _flagged_extension(certificate_object)
    elif kind == "qw":
        return _qw_certificate(certificate_object, polygon)
    else:
        # Should be covered by schema validation, but lets not leave an unhandled case
        raise ValueError(f"Unrecognized certificate type: {kind}")


def grid_from_object(grid_object: Any) -> ClassificationGrid:
    validate(grid_object, GRID_SCHEMA)
    polygon = polygon_from_object(grid_object["polygon"])
    bbox = tuple(parse_rational(value) for value in grid_object["bbox"])
    resolution = parse_rational(grid_object["resolution"])

    cells = []
    for cell in grid_object["cells"]:
        certificate = cell["certificate"]
        cells.append(Verdict(
            point=_point(cell["point"]),
            classification=VerdictClass(cell["class"]),
            certificate=None if certificate is None else certificate_from_object(certificate, polygon),
        ))
    if [cell.point for cell in cells] != grid_points(bbox, resolution):
        raise ValueError("Grid cells do not match the grid points of the bounding box")
    return ClassificationGrid(polygon, bbox, resolution, tuple(cells))


def read_schema(schema_name: str = POLYGON_SCHEMA, schema_file: str = None) -> dict:
    """
    Reads one of the JSON schemas.

    Args:
        schema_name: The name of a package schema.
        schema_file: Optional path to a custom schema file. If None, the package schema is used.

    Returns:
        The JSON schema as a dictionary.
    """
    if schema_file is None:
        schema_text = resources.read_text(schemas, schema_name)
    else:
        with open(schema_file, "r", encoding="utf-8") as f:
            schema_text = f.read()

    schema = json.loads(schema_text)
    return schema
