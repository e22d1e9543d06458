"""Static SVG line plots of result tables."""

from __future__ import annotations

import hashlib
import io
import json
import re
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .tables import ResultTable  # noqa: E402


def table_digest(table: ResultTable) -> str:
    """Config hash stored in the table metadata, or a hash of the metadata."""
    d = table.meta.get("config_digest")
    if d:
        return str(d)
    blob = json.dumps(table.meta, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _gid(label: str) -> str:
    return "series-" + re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def _series(table: ResultTable, x: str, y: str, group_by: Sequence[str]):
    """Yield ``(label, xs, ys)``; one series per distinct group value."""
    xs_all, ys_all = table.column(x), table.column(y)
    if not group_by:
        yield y, xs_all, ys_all
        return
    keys = [table.column(g) for g in group_by]
    seen = []
    for row in zip(*keys):
        if row not in seen:
            seen.append(row)
    for row in seen:
        mask = np.ones(len(table), dtype=bool)
        for col, val in zip(keys, row):
            mask &= col == val
        label = y + " (" + ", ".join(f"{g}={v:g}" if not isinstance(v, str) else f"{g}={v}"
                                     for g, v in zip(group_by, row)) + ")"
        yield label, xs_all[mask], ys_all[mask]


def emit_plot(
    table: ResultTable,
    x: str,
    y: Sequence[str] | None = None,
    out=None,
    panels: Optional[Sequence[Sequence[str]]] = None,
    group_by: Sequence[str] = (),
    markers: Sequence[float] = (),
    title: Optional[str] = None,
) -> str:
    """Render columns of ``table`` against ``x`` and return the SVG text.

    ``panels`` stacks several axes vertically, each listing its y columns;
    otherwise ``y`` goes on a single axis. ``markers`` draws dashed vertical
    lines at the given x positions on every panel. NaN values leave gaps.
    Raises ColumnMissing for unknown columns.
    """
    if panels is None:
        if not y:
            raise ValueError("give y columns or panels")
        panels = [list(y)]
    table.index(x)
    for cols in panels:
        for c in cols:
            table.index(c)
    for g in group_by:
        table.index(g)

    digest = table_digest(table)
    with plt.rc_context({"svg.hashsalt": digest, "svg.fonttype": "none"}):
        fig, axes = plt.subplots(
            len(panels), 1, sharex=True, squeeze=False, figsize=(6.4, 2.6 * len(panels) + 0.6)
        )
        for ax, cols in zip(axes[:, 0], panels):
            for c in cols:
                for label, xs, ys in _series(table, x, c, group_by):
                    (line,) = ax.plot(xs, ys, label=label, lw=1.2)
                    line.set_gid(_gid(label))
            for m in markers:
                ax.axvline(m, color="0.5", ls="--", lw=0.8)
            ax.legend(fontsize="small", frameon=False)
            ax.grid(alpha=0.3)
        axes[-1, 0].set_xlabel(x)
        if title:
            axes[0, 0].set_title(title)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    svg = buf.getvalue()
    comment = f"<!-- config-sha256: {digest} -->\n"
    # the comment goes right after the XML declaration
    head, sep, rest = svg.partition("?>\n")
    svg = head + sep + comment + rest if sep else comment + svg
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(svg)
    return svg


def period_markers(period: float, x_max: float) -> list[float]:
    """Multiples of ``period`` inside ``(0, x_max]``."""
    if period <= 0 or not np.isfinite(period):
        return []
    n = int(np.floor(x_max / period + 1e-12))
    return [k * period for k in range(1, n + 1)]
