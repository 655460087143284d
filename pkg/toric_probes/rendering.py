from dataclasses import dataclass, field
from fractions import Fraction
import io
import logging
from pathlib import Path
from typing import Dict, FrozenSet, Mapping, Union
from xml.etree import ElementTree

from .affine import Vector
from .classification import ClassificationGrid, VerdictClass
from .graphs import boundary_outline
from .utils import use_write_file


logger = logging.getLogger(__name__)

SVG_NAMESPACE = "http://www.w3.org/2000/svg"

HATCH_PATTERN_ID = "hatch"
CLIP_PATH_ID = "bbox"

DEFAULT_FILLS = {
    VerdictClass.DISPLACEABLE_PROBE: "#D9D9D9",
    VerdictClass.DISPLACEABLE_SYMMETRIC_EXT: "#A6A6A6",
    VerdictClass.DISPLACEABLE_FLAGGED_EXT: "#A6A6A6",
    VerdictClass.NONDISP_CERTIFIED: "#595959",
    VerdictClass.NONDISP_CANDIDATE: "#595959",
    VerdictClass.UNKNOWN: "#FFFFFF",
    VerdictClass.EXTERIOR: "none",
}

LEGEND_LABELS = {
    VerdictClass.DISPLACEABLE_PROBE: "displaceable (probe)",
    VerdictClass.DISPLACEABLE_SYMMETRIC_EXT: "displaceable (symmetric extended probe)",
    VerdictClass.DISPLACEABLE_FLAGGED_EXT: "displaceable (flagged extended probe)",
    VerdictClass.NONDISP_CERTIFIED: "nondisplaceable (certified)",
    VerdictClass.NONDISP_CANDIDATE: "nondisplaceable (candidate)",
    VerdictClass.UNKNOWN: "unknown",
    VerdictClass.EXTERIOR: "outside the polygon",
}

LEGEND_WIDTH = 300
LEGEND_ROW = 20


@dataclass(frozen=True)
class RenderStyle:
    """
    Fill colors per verdict class. Hatched classes are drawn as diagonal lines of their fill color
    on a white background.
    """
    fills: Mapping[VerdictClass, str] = field(default_factory=lambda: dict(DEFAULT_FILLS))
    hatched: FrozenSet[VerdictClass] = frozenset({VerdictClass.NONDISP_CANDIDATE})
    scale: int = 40
    legend: bool = True
    outline_color: str = "#000000"
    outline_width: float = 2

    def __post_init__(self):
        missing = [c.value for c in VerdictClass if c not in self.fills]
        if missing:
            raise ValueError(f"Render style has no fill for {', '.join(missing)}")
        if self.scale <= 0:
            raise ValueError(f"Render scale must be positive, got {self.scale}")

    def fill(self, classification: VerdictClass) -> str:
        if classification in self.hatched:
            return f"url(#{HATCH_PATTERN_ID})"
        return self.fills[classification]


def _number(value) -> str:
    text = f"{float(value):.3f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


class _Canvas:
    """Maps plane coordinates to pixels: x grows to the right, x2 grows upwards."""
    def __init__(self, grid: ClassificationGrid, scale: int):
        x0, y0, x1, y1 = grid.bbox
        self.pad = grid.resolution / 2
        self.left = x0 - self.pad
        self.top = y1 + self.pad
        self.scale = scale
        self.width = (x1 - x0 + grid.resolution) * scale
        self.height = (y1 - y0 + grid.resolution) * scale

    def x(self, value: Fraction) -> str:
        return _number((value - self.left) * self.scale)

    def y(self, value: Fraction) -> str:
        return _number((self.top - value) * self.scale)

    def point(self, p: Vector) -> str:
        return f"{self.x(p.x1)},{self.y(p.x2)}"


def emit_svg(grid: ClassificationGrid, style: RenderStyle = RenderStyle()) -> str:
    """
    Renders a classification grid as an SVG document.

    Every cell becomes one square centered at its grid point. The polygon boundary is drawn on top,
    clipped to the bounding box.

    Args:
        grid: The classified grid.
        style: Colors, scale, and whether to draw a legend.

    Returns:
        The SVG document. Equal inputs give byte-identical output.
    """
    canvas = _Canvas(grid, style.scale)
    width = canvas.width + (LEGEND_WIDTH if style.legend else 0)
    height = canvas.height
    if style.legend:
        height = max(height, LEGEND_ROW * (len(VerdictClass) + 1))

    root = ElementTree.Element("svg", {
        "xmlns": SVG_NAMESPACE,
        "width": _number(width),
        "height": _number(height),
        "viewBox": f"0 0 {_number(width)} {_number(height)}",
    })
    _add_definitions(root, canvas, style)

    cells = ElementTree.SubElement(root, "g", {"id": "cells", "stroke": "none"})
    side = _number(grid.resolution * style.scale)
    for cell in grid.cells:
        ElementTree.SubElement(cells, "rect", {
            "x": canvas.x(cell.point.x1 - canvas.pad),
            "y": canvas.y(cell.point.x2 + canvas.pad),
            "width": side,
            "height": side,
            "fill": style.fill(cell.classification),
            "class": cell.classification.value,
        })

    _add_outline(root, grid, canvas, style)
    if style.legend:
        _add_legend(root, canvas, style)

    logger.debug("Rendered %d cells of %r", len(grid.cells), grid.polygon.name)
    return ElementTree.tostring(root, encoding="unicode") + "\n"


def _add_definitions(root: ElementTree.Element, canvas: _Canvas, style: RenderStyle):
    defs = ElementTree.SubElement(root, "defs")
    clip = ElementTree.SubElement(defs, "clipPath", {"id": CLIP_PATH_ID})
    ElementTree.SubElement(clip, "rect", {
        "x": "0", "y": "0", "width": _number(canvas.width), "height": _number(canvas.height),
    })

    colors = sorted({style.fills[c] for c in style.hatched})
    hatch_color = colors[0] if colors else style.outline_color
    pattern = ElementTree.SubElement(defs, "pattern", {
        "id": HATCH_PATTERN_ID, "patternUnits": "userSpaceOnUse", "width": "6", "height": "6",
    })
    ElementTree.SubElement(pattern, "rect", {"width": "6", "height": "6", "fill": "#FFFFFF"})
    ElementTree.SubElement(pattern, "path", {"d": "M0,6 L6,0", "stroke": hatch_color, "stroke-width": "1.5"})


def _add_outline(root: ElementTree.Element, grid: ClassificationGrid, canvas: _Canvas, style: RenderStyle):
    points = boundary_outline(grid.polygon, grid.bbox)
    attributes = {
        "points": " ".join(canvas.point(p) for p in points),
        "fill": "none",
        "stroke": style.outline_color,
        "stroke-width": _number(style.outline_width),
        "clip-path": f"url(#{CLIP_PATH_ID})",
    }
    tag = "polygon" if grid.polygon.is_bounded else "polyline"
    ElementTree.SubElement(root, tag, attributes)


def _add_legend(root: ElementTree.Element, canvas: _Canvas, style: RenderStyle):
    legend = ElementTree.SubElement(root, "g", {"id": "legend", "font-family": "sans-serif", "font-size": "12"})
    left = canvas.width + 10
    for row, classification in enumerate(VerdictClass):
        top = LEGEND_ROW * (row + 1) - 14
        ElementTree.SubElement(legend, "rect", {
            "x": _number(left), "y": _number(top), "width": "14", "height": "14",
            "fill": style.fill(classification), "stroke": "#000000", "stroke-width": "0.5",
        })
        label = ElementTree.SubElement(legend, "text", {"x": _number(left + 20), "y": _number(top + 12)})
        label.text = LEGEND_LABELS[classification]


def class_counts(svg: str) -> Dict[str, int]:
    """Number of cell squares per class in an emitted document."""
    root = ElementTree.fromstring(svg)
    counts: Dict[str, int] = {}
    for rect in root.iter(f"{{{SVG_NAMESPACE}}}rect"):
        classification = rect.get("class")
        if classification is not None:
            counts[classification] = counts.get(classification, 0) + 1
    return counts


def write_svg(grid: ClassificationGrid, target: Union[str, Path, io.TextIOBase], style: RenderStyle = RenderStyle()):
    """Writes the SVG document of a grid to a file, path, or stream."""
    use_write_file(target, _write_svg, grid, style)


def _write_svg(f: io.TextIOBase, grid: ClassificationGrid, style: RenderStyle):
    f.write(emit_svg(grid, style))
