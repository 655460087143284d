import io
import json
from pathlib import Path
from typing import Any, Optional, Union

from .affine import Distance, Vector, format_distance
from .classification import ClassificationGrid, Verdict
from .polygons import HalfSpace, Polygon
from .potentials import QwCertificate
from .probes import FlaggedExtendedProbe, Probe, SymmetricExtendedProbe
from .utils import format_rational, use_write_file


def _rational_vector(v: Vector) -> list[str]:
    return [format_rational(v.x1), format_rational(v.x2)]


def _optional_vector(v: Optional[Vector]) -> Optional[list[str]]:
    return None if v is None else _rational_vector(v)


def _integral_vector(v: Vector) -> list[int]:
    return [int(v.x1), int(v.x2)]


def _distance(value: Distance) -> str:
    return format_distance(value)


class PolygonJSONEncoder(json.JSONEncoder):
    """
    JSON encoder for Polygon objects. Ghost flags are not written, they are recomputed on parsing.
    """
    def default(self, obj: Any) -> Any:
        if not isinstance(obj, Polygon):
            return super().default(obj)
        return self._encode_polygon(obj)

    def _encode_polygon(self, polygon: Polygon) -> dict[str, Any]:
        polygon_object = {
            "name": polygon.name,
            "halfspaces": [self._encode_halfspace(h) for h in polygon.halfspaces],
        }
        return polygon_object

    def _encode_halfspace(self, h: HalfSpace) -> dict[str, Any]:
        halfspace_object = {
            "eta": _integral_vector(h.eta),
            "kappa": format_rational(h.kappa),
            "closure": h.closure.value,
            "label": h.label,
        }
        return halfspace_object


class CertificateJSONEncoder(PolygonJSONEncoder):
    """
    JSON encoder for probe certificates and nondisplaceability certificates.
    """
    def default(self, obj: Any) -> Any:
        if isinstance(obj, (Probe, SymmetricExtendedProbe, FlaggedExtendedProbe, QwCertificate)):
            return self._encode_certificate(obj)
        return super().default(obj)

    def _encode_certificate(self, certificate) -> dict[str, Any]:
        if isinstance(certificate, Probe):
            return self._encode_probe(certificate)
        elif isinstance(certificate, SymmetricExtendedProbe):
            return self._encode_symmetric_extension(certificate)
        elif isinstance(certificate, FlaggedExtendedProbe):
            return self._encode_flagged_extension(certificate)
        elif isinstance(certificate, QwCertificate):
            return self._encode_qw(certificate)
        else:
            raise ValueError(f"Unknown certificate type: {type(certificate)}")

    def _encode_probe(self, probe: Probe) -> dict[str, Any]:
        probe_object = {
            "type": "probe",
            "base_facet": probe.base_facet,
            "base": _rational_vector(probe.base),
            "direction": _integral_vector(probe.direction),
            "length": _distance(probe.length),
            "endpoint": _optional_vector(probe.endpoint),
            "exit_facets": list(probe.exit_facets),
        }
        return probe_object

    def _encode_symmetric_extension(self, sp: SymmetricExtendedProbe) -> dict[str, Any]:
        sp_object = {
            "type": "symmetric-extended-probe",
            "probe": self._encode_probe(sp.probe),
            "deflector": self._encode_probe(sp.deflector),
            "exit_facet": sp.exit_facet,
            "x_pq": _rational_vector(sp.x_pq),
            "reflection": {
                "linear": [list(row) for row in sp.reflection.linear],
                "translation": _rational_vector(sp.reflection.translation),
            },
            "x_pq_prime": _rational_vector(sp.x_pq_prime),
            "v_p_prime": _integral_vector(sp.v_p_prime),
            "extension_length": _distance(sp.extension_length),
            "extension_end": _optional_vector(sp.extension_end),
            "total_length": _distance(sp.total_length),
        }
        return sp_object

    def _encode_flagged_extension(self, fp: FlaggedExtendedProbe) -> dict[str, Any]:
        fp_object = {
            "type": "flagged-extended-probe",
            "probe": self._encode_probe(fp.probe),
            "deflector": self._encode_probe(fp.deflector),
            "x_pq": _rational_vector(fp.x_pq),
            "kind": fp.kind.value,
            "mu": format_rational(fp.mu),
            "x_f": _rational_vector(fp.x_f),
            "x_f_prime": _rational_vector(fp.x_f_prime),
            "flag_length": format_rational(fp.flag_length),
            "e_f": _rational_vector(fp.e_f),
            "e_f_prime": _rational_vector(fp.e_f_prime),
            "v_f": _rational_vector(fp.v_f),
            "v_f_prime": _rational_vector(fp.v_f_prime),
            "total_length": format_rational(fp.total_length),
        }
        return fp_object

    def _encode_qw(self, certificate: QwCertificate) -> dict[str, Any]:
        qw_object = {
            "type": "qw",
            "kind": certificate.kind.value,
            "point": _rational_vector(certificate.point),
            "ghosts": [{"eta": _integral_vector(g.eta), "kappa": format_rational(g.kappa)} for g in certificate.ghosts],
            "level": format_rational(certificate.level),
            "tied": list(certificate.tied),
            "leads": [format_rational(lead) for lead in certificate.leads],
            "rank": certificate.rank,
            "second_level": None if certificate.second_level is None else format_rational(certificate.second_level),
            "second_tied": list(certificate.second_tied),
            "residual_orders": [[i, format_rational(order)] for i, order in certificate.residual_orders],
            "heuristic": certificate.heuristic,
        }
        return qw_object


class GridJSONEncoder(CertificateJSONEncoder):
    """
    JSON encoder for classification grids and single verdicts.
    """
    def default(self, obj: Any) -> Any:
        if isinstance(obj, ClassificationGrid):
            return self._encode_grid(obj)
        if isinstance(obj, Verdict):
            return self._encode_verdict(obj)
        return super().default(obj)

    def _encode_grid(self, grid: ClassificationGrid) -> dict[str, Any]:
        grid_object = {
            "polygon": self._encode_polygon(grid.polygon),
            "bbox": [format_rational(value) for value in grid.bbox],
            "resolution": format_rational(grid.resolution),
            "cells": [self._encode_verdict(cell) for cell in grid.cells],
        }
        return grid_object

    def _encode_verdict(self, verdict: Verdict) -> dict[str, Any]:
        verdict_object = {
            "point": _rational_vector(verdict.point),
            "class": verdict.classification.value,
            "certificate": None if verdict.certificate is None else self._encode_certificate(verdict.certificate),
        }
        return verdict_object


def write_json(obj: Any, target: Union[str, Path, io.TextIOBase], indent: int = 4):
    """
    Writes a polygon, certificate, verdict, or grid to the given target in JSON format.
    Keys are sorted, so equal objects are written byte-identically.

    Args:
        obj: The object to write.
        target: The target to write to.
    """
    use_write_file(target, _write_json, obj, indent)


def dumps(obj: Any, indent: int = 4) -> str:
    """The JSON text write_json would write."""
    return json.dumps(obj, cls=GridJSONEncoder, indent=indent, sort_keys=True)


def _write_json(f: io.TextIOBase, obj: Any, indent: int):
    json.dump(obj, f, cls=GridJSONEncoder, indent=indent, sort_keys=True)
    f.write("\n")
