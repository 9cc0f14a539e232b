"""
CSV and SVG writers for sweep output.

CSV files start with a ``# schema=1`` line followed by the header row; numbers
are written with 12 significant digits and ``\\n`` line endings so that equal
inputs give byte-identical files.
"""

import csv
import io
import logging
import sys
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_LINE = f"# schema={SCHEMA_VERSION}"


def format_value(x: float | int | str | bool) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return f"{x:.12g}"


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[float | int | str | bool]]) -> str:
    buffer = io.StringIO()
    buffer.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def write_csv(
    path: Path | None,
    columns: Sequence[str],
    rows: Iterable[Sequence[float | int | str | bool]],
) -> None:
    """Write to ``path``, or to stdout when no path is given."""
    text = render_csv(columns, rows)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    logger.info("Wrote %s", path)


def write_svg(
    path: Path,
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str = "kappa / h",
    title: str | None = None,
) -> None:
    """Line chart of every series against ``x``."""
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot()
    for label, values in series.items():
        ax.plot(x, values, marker="o", markersize=2.5, linewidth=1.2, label=label)
    ax.axhline(0.0, color="0.6", linewidth=0.6)
    ax.set_xlabel(xlabel)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    with rc_context({"svg.hashsalt": "qetlab", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info("Wrote %s", path)
