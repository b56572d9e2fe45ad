"""Render text reports, run manifests and plot descriptions."""
import os
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from . import __version__

templates_dir = os.path.join(os.path.dirname(__file__), "templates")

Items = Iterable[Tuple[str, Any]]


def format_value(value: Any) -> str:
    """Return a stable text form of a report value."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.ndarray):
        return ", ".join(format_value(item) for item in value.tolist())
    if value is None:
        return "none"
    return str(value)


environment = Environment(
    loader=FileSystemLoader(templates_dir),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)
environment.filters["fmt"] = format_value


@dataclass(frozen=True)
class Series:
    """Represent one plotted series of a figure bundle."""

    label: str
    file: str
    x: str
    y: str


@dataclass(frozen=True)
class FigureDescription:
    """Represent how to plot one figure bundle."""

    name: str
    title: str
    x_label: str
    y_label: str
    series: Sequence[Series]
    checks: List[Tuple[str, Any]] = field(default_factory=list)


def render_items(title: str, items: Items) -> str:
    """Return key: value lines under a title."""
    return environment.get_template("report.txt.jinja2").render(
        title=title, items=list(items)
    )


def render_manifest(
    command: str,
    parameters: Items,
    tolerances: Items,
    diagnostics: Items,
    files: Iterable[str],
) -> str:
    """Return the run manifest of a command."""
    return environment.get_template("manifest.txt.jinja2").render(
        command=command,
        version=__version__,
        parameters=list(parameters),
        tolerances=list(tolerances),
        diagnostics=list(diagnostics),
        files=sorted(files),
    )


def render_plot_description(figure: FigureDescription) -> str:
    """Return the plot description of a figure bundle."""
    return environment.get_template("plot.txt.jinja2").render(figure=figure)
