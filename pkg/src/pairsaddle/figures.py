"""Headless figure rendering for harness reports.

Figures are built on :class:`matplotlib.figure.Figure` with the Agg canvas
so rendering works without a display; nothing here touches pyplot or global
state.  Each renderer returns the figure it saved so tests can inspect it.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

__all__ = [
    "render_coverage",
    "render_qq",
    "render_size",
    "render_region",
]

_DPI = 150


def _new_figure(width, height):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig


def render_coverage(report, path):
    """Dot chart of empirical coverage per statistic, one panel per level."""
    levels = sorted({row.level for row in report.rows})
    labels = []
    for row in report.rows:
        if row.statistic not in labels:
            labels.append(row.statistic)
    fig = _new_figure(3.2 * len(levels) + 1.0, 0.45 * len(labels) + 1.6)
    axes = fig.subplots(1, len(levels), sharey=True)
    axes = np.atleast_1d(axes)
    y = np.arange(len(labels))
    for ax, level in zip(axes, levels):
        cov = {row.statistic: row for row in report.rows if row.level == level}
        values = np.array([cov[s].coverage for s in labels])
        errors = np.array([cov[s].mc_se for s in labels])
        ax.errorbar(values, y, xerr=2 * errors, fmt="o", ms=4, capsize=2)
        ax.axvline(level, color="0.4", lw=1, ls="--")
        ax.set_title(f"nominal {level:g}")
        ax.set_xlabel("coverage")
        ax.grid(axis="x", lw=0.3, alpha=0.5)
    axes[0].set_yticks(y)
    axes[0].set_yticklabels(labels)
    axes[0].invert_yaxis()
    fig.suptitle(f"coverage over {report.replications} replications")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    return fig


def render_qq(table, path):
    """Statistic quantiles against the chi-square reference."""
    fig = _new_figure(4.2, 4.2)
    ax = fig.subplots()
    ax.plot(table.theoretical, table.empirical, "o", ms=2.5, alpha=0.7)
    lim = max(float(table.theoretical[-1]), float(table.empirical[-1]))
    ax.plot([0, lim], [0, lim], color="0.4", lw=1)
    ax.set_xlabel(f"chi-square({table.df}) quantile")
    ax.set_ylabel(f"{table.statistic} quantile")
    ax.set_title(f"{table.statistic}, {table.n_effective} replications")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    return fig


def render_size(table, path):
    """Actual size against nominal plus the relative error curve."""
    fig = _new_figure(8.0, 3.6)
    ax_size, ax_rel = fig.subplots(1, 2)
    ax_size.plot(table.alphas, table.actual, "o-", ms=4)
    lim = max(float(table.alphas[-1]), float(table.actual.max())) * 1.1
    ax_size.plot([0, lim], [0, lim], color="0.4", lw=1, ls="--")
    ax_size.set_xlabel("nominal size")
    ax_size.set_ylabel("actual size")
    ax_size.set_title(table.statistic)
    ax_rel.plot(table.alphas, table.relative_error, "o-", ms=4)
    ax_rel.axhline(0.0, color="0.4", lw=1, ls="--")
    ax_rel.set_xlabel("nominal size")
    ax_rel.set_ylabel("relative size error")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    return fig


def render_region(table, path, level=0.95):
    """P-value maps over the null grid, one panel per statistic.

    Each panel shades the p-value surface and draws the boundary of the
    ``level`` confidence region.  Grid nodes without a value (outside the
    domain, or where the statistic failed) are left blank.
    """
    xs = np.array(sorted({row[0] for row in table.rows}))
    ys = np.array(sorted({row[1] for row in table.rows}))
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}
    names = list(table.statistics)
    fig = _new_figure(3.6 * len(names) + 0.8, 3.8)
    axes = np.atleast_1d(fig.subplots(1, len(names)))
    for ax, name in zip(axes, names):
        surface = np.full((ys.size, xs.size), np.nan)
        for x, y, statistic, _value, p_value in table.rows:
            if statistic == name:
                surface[y_index[y], x_index[x]] = p_value
        mesh = ax.pcolormesh(xs, ys, surface, shading="nearest", vmin=0.0, vmax=1.0)
        if np.isfinite(surface).sum() >= 4 and xs.size > 1 and ys.size > 1:
            ax.contour(xs, ys, surface, levels=[1.0 - level], colors="k", linewidths=1.2)
        ax.set_title(name)
        ax.set_xlabel(table.param_x)
        ax.set_ylabel(table.param_y)
        fig.colorbar(mesh, ax=ax, shrink=0.85)
    fig.suptitle(f"p-value over the null grid, {level:g} region outlined")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    return fig
