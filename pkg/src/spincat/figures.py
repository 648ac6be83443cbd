"""Figure rendering for the report bundle.

Forces the headless Agg backend so the renderers work in CI and containers;
every function writes a PNG and returns the path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .ite import SurfaceResult, SweepResult
from .observables import CANONICAL_LABELS

_POSITIONS = CANONICAL_LABELS[:4]
_PATH_SPINS = CANONICAL_LABELS[4:]


def _plot_sweep(ax, sw: SweepResult, label: str) -> None:
    if sw.n_stderr is None:
        line = ax.plot(sw.t, sw.n, "o", markersize=3.5, label=label)[0]
    else:
        line = ax.errorbar(
            sw.t, sw.n, yerr=sw.n_stderr, fmt="o", markersize=3.5,
            capsize=2, label=label,
        ).lines[0]
    ax.plot(sw.t, sw.intercept + sw.slope * sw.t, "--", lw=1,
            color=line.get_color())


def _finish(ax, title: str) -> None:
    ax.set_xlabel("t")
    ax.set_ylabel("N(t)")
    ax.set_title(title)
    ax.legend(fontsize=8)


def render_sweeps(sweeps: dict[str, SweepResult], path, title: str) -> Path:
    """Two panels, path projectors and path-spin composites, with fits."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for label in _POSITIONS:
        _plot_sweep(axes[0], sweeps[label], label)
    for label in _PATH_SPINS:
        _plot_sweep(axes[1], sweeps[label], label)
    _finish(axes[0], "path projectors")
    _finish(axes[1], "path-spin composites")
    fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_surfaces(surfaces: list[SurfaceResult], path) -> Path:
    """2x4 grid of N(alpha, t) maps, one per canonical observable."""
    fig, axes = plt.subplots(2, 4, figsize=(16, 7))
    for ax, s in zip(axes.flat, surfaces):
        mesh = ax.pcolormesh(
            s.t_grid.points, s.alpha_grid, s.n, shading="auto", cmap="viridis"
        )
        fig.colorbar(mesh, ax=ax, shrink=0.9)
        ax.set_title(s.observable_label, fontsize=10)
        ax.set_xlabel("t")
        ax.set_ylabel("alpha")
    fig.suptitle("normalized coincidence rate over (alpha, t), exchange post-state")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_delayed(
    sweeps: dict[str, tuple[SweepResult, SweepResult]], path
) -> Path:
    """Per-branch Monte-Carlo sweeps with binomial error bars and fits."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for label in CANONICAL_LABELS:
        ex_sw, id_sw = sweeps[label]
        _plot_sweep(axes[0], ex_sw, label)
        _plot_sweep(axes[1], id_sw, label)
    _finish(axes[0], "exchange branch")
    _finish(axes[1], "identity branch")
    fig.suptitle("delayed-choice Monte-Carlo sweeps")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
