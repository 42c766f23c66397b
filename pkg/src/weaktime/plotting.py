"""Static line plots of result tables (Agg backend, no display needed)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .table import ResultTable  # noqa: E402

__all__ = ["plot_table"]


def plot_table(table: ResultTable, path, columns=None, title: str | None = None,
               logx: bool = False) -> None:
    """Plot ``columns`` (default: all but the first) against the first column."""
    x = table.rows[:, 0]
    names = columns or table.columns[1:]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    try:
        for name in names:
            y = table.column(name)
            if np.all(np.isnan(y)):
                continue
            ax.plot(x, y, label=name, lw=1.2)
        ax.set_xlabel(f"{table.columns[0]} [{table.units[0]}]")
        if logx:
            ax.set_xscale("log")
        if title:
            ax.set_title(title)
        ax.axhline(0.0, color="0.7", lw=0.6, zorder=0)
        ax.legend(frameon=False, fontsize="small")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
    finally:
        plt.close(fig)
