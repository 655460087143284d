from typing import Optional

import matplotlib.pyplot as plt
from matplotlib.axes import Axes
from matplotlib.patches import Patch, Rectangle

from .classification import ClassificationGrid, VerdictClass
from .graphs import boundary_outline
from .rendering import LEGEND_LABELS, RenderStyle


def plot_grid(
    grid: ClassificationGrid,
    style: RenderStyle = RenderStyle(),
    ax: Optional[Axes] = None,
    ) -> Axes:
    """
    Plots a classification grid with the colors of the SVG emitter.

    Args:
        grid: The classified grid.
        style: Fill colors; hatched classes are drawn with a "///" hatch.
        ax: Axes to draw into. A new figure is created if None.

    Returns:
        The axes drawn into.
    """
    if ax is None:
        plt.figure()
        ax = plt.gca()

    half = float(grid.resolution) / 2
    for cell in grid.cells:
        fill = style.fills[cell.classification]
        hatched = cell.classification in style.hatched
        ax.add_patch(Rectangle(
            (float(cell.point.x1) - half, float(cell.point.x2) - half), 2 * half, 2 * half,
            facecolor="white" if hatched or fill == "none" else fill,
            edgecolor=fill if hatched else "none",
            hatch="///" if hatched else None,
            linewidth=0,
        ))

    # Outline
    points = boundary_outline(grid.polygon, grid.bbox)
    xs = [float(p.x1) for p in points]
    ys = [float(p.x2) for p in points]
    if grid.polygon.is_bounded:
        xs.append(xs[0])
        ys.append(ys[0])
    ax.plot(xs, ys, color=style.outline_color, linewidth=style.outline_width)

    x0, y0, x1, y1 = (float(v) for v in grid.bbox)
    ax.set_xlim(x0 - half, x1 + half)
    ax.set_ylim(y0 - half, y1 + half)
    ax.set_aspect("equal")
    ax.set_title(grid.polygon.name)

    if style.legend:
        present = [c for c in VerdictClass if any(cell.classification == c for cell in grid.cells)]
        handles = [
            Patch(facecolor="white" if c in style.hatched or style.fills[c] == "none" else style.fills[c],
                  edgecolor=style.fills[c] if c in style.hatched else "black",
                  hatch="///" if c in style.hatched else None,
                  label=LEGEND_LABELS[c])
            for c in present
        ]
        if handles:
            ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1.02, 1), fontsize="small")
    return ax
