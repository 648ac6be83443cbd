"""Imaginary-time-evolution perturbation and slope-based weak-value extraction.

The absorptive perturbation ``exp(-O t)`` suppresses the post-selection
success probability; the normalized coincidence rate is

    N(t) = |<f| exp(-O t) |i>|^2 / |<f|i>|^2,   N(0) = 1,

and its initial slope encodes the real part of the weak value:
``-(1/2) dN/dt at t->0 = Re <O>_w``. A linear fit of N over a finite window
therefore estimates the weak value as ``-slope/2``, with a systematic bias
that shrinks proportionally to the window length.

The physical absorber is parameterized by its transmissivity T = exp(-2t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateFit, DomainError
from .hilbert import Operator, SpectralDecomposition, StateVector, spectral
from .tsvf import EPS_OVERLAP, Selection, preselect

if TYPE_CHECKING:
    from .delayed import BranchStats


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, finite imaginary-time points, t >= 0.

    At least three points are required so a two-parameter line fit is
    overdetermined. The t=0 reference for N0 is implied by the normalization
    in the coincidence rate whether or not 0 is on the grid.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1)
        if len(pts) < 3:
            raise ValueError(f"need at least 3 grid points, got {len(pts)}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if pts[0] < 0:
            raise ValueError(f"grid points must be >= 0, got {pts[0]}")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, t_min: float, t_max: float, n: int) -> "TimeGrid":
        return cls(np.linspace(t_min, t_max, n))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


#: Extraction window used throughout the reports: it reproduces the published
#: fitted values from exact rates, while [0, 1] is kept only for surfaces.
DEFAULT_GRID = TimeGrid.uniform(0.0, 0.2, 11)


class OLSFit(NamedTuple):
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float


@dataclass(frozen=True)
class SweepResult:
    """Sampled (t, N(t)) points with the line fit and the derived estimate.

    ``weak_value_estimate`` is exactly ``-slope/2``. ``n_stderr`` is present
    for Monte-Carlo sweeps and None for deterministic ones; ``branch_stats``
    carries the per-point tallies of a Monte-Carlo branch sweep.
    """

    observable_label: str
    t: np.ndarray
    n: np.ndarray
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float
    weak_value_estimate: float
    n_stderr: np.ndarray | None = None
    n0: float | None = None
    branch_stats: tuple["BranchStats", ...] | None = None
    weighting: str | None = None

    def __post_init__(self):
        for name in ("t", "n", "n_stderr"):
            arr = getattr(self, name)
            if arr is not None:
                a = np.asarray(arr, dtype=float)
                a.setflags(write=False)
                object.__setattr__(self, name, a)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.n.tolist()))


@dataclass(frozen=True)
class SurfaceResult:
    """Coincidence rate over an (alpha, t) grid; NaN marks undefined cells."""

    observable_label: str
    alpha_grid: np.ndarray
    t_grid: TimeGrid
    n: np.ndarray  # shape (len(alpha_grid), len(t_grid))

    def __post_init__(self):
        for name in ("alpha_grid", "n"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def _rate_from_spectral(dec: SpectralDecomposition, t: float, sel: Selection) -> float:
    # amplitude <f| V e^{-lambda t} V^dag |i> without rebuilding the matrix
    f_proj = dec.vectors.conj().T @ sel.post.amps
    i_proj = dec.vectors.conj().T @ sel.pre.amps
    amp = np.vdot(f_proj, np.exp(-dec.eigenvalues * t) * i_proj)
    return float(abs(amp) ** 2 / sel.n0)


def coincidence_rate(op: Operator, t: float, sel: Selection) -> float:
    """Normalized coincidence rate N(t) after the absorptive perturbation."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    sel.require_valid()
    return _rate_from_spectral(spectral(op), t, sel)


def fit_ols(samples: Sequence[tuple[float, float]]) -> OLSFit:
    """Ordinary least squares of n against t for (t, n) samples, with intercept.

    ``slope_stderr`` comes from the residual variance with m-2 degrees of
    freedom. Raises :class:`DegenerateFit` for fewer than 3 samples or when
    all t coincide.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"expected (t, n) pairs, got shape {data.shape}")
    x, y = data[:, 0], data[:, 1]
    m = len(x)
    if m < 3:
        raise DegenerateFit(f"need at least 3 samples, got {m}")
    # mean() roundoff keeps sxx slightly above zero for identical t values,
    # so test the degenerate case directly
    if np.all(x == x[0]):
        raise DegenerateFit("all t values identical; slope undefined")
    sxx = float(np.sum((x - x.mean()) ** 2))
    sxy = float(np.sum((x - x.mean()) * (y - y.mean())))
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    sse = float(np.sum(residuals**2))
    slope_stderr = math.sqrt(sse / (m - 2) / sxx)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst > 0.0:
        r_squared = 1.0 - sse / sst
    else:
        r_squared = 1.0 if sse <= 1e-24 else 0.0
    return OLSFit(slope, intercept, slope_stderr, r_squared)


def sweep(op: Operator, grid: TimeGrid, sel: Selection) -> SweepResult:
    """Deterministic N(t) samples over the grid plus the line-fit estimate."""
    sel.require_valid()
    dec = spectral(op)
    n = np.array([_rate_from_spectral(dec, t, sel) for t in grid.points])
    fit = fit_ols(np.column_stack([grid.points, n]))
    return SweepResult(
        observable_label=op.label,
        t=grid.points,
        n=n,
        slope=fit.slope,
        intercept=fit.intercept,
        slope_stderr=fit.slope_stderr,
        r_squared=fit.r_squared,
        weak_value_estimate=-fit.slope / 2.0,
        n0=sel.n0,
    )


def surface(
    op: Operator,
    alpha_grid: Sequence[float],
    t_grid: TimeGrid,
    post: StateVector,
) -> SurfaceResult:
    """Coincidence rate over an (alpha, t) grid with pre-state preselect(alpha).

    Rows whose post-selection probability falls below the overlap threshold
    are emitted as NaN rather than fabricated.
    """
    alphas = np.asarray(alpha_grid, dtype=float).reshape(-1)
    dec = spectral(op)
    n = np.full((len(alphas), len(t_grid)), np.nan)
    for row, alpha in enumerate(alphas):
        sel = Selection(preselect(alpha), post)
        if sel.n0 < EPS_OVERLAP:
            continue
        n[row] = [_rate_from_spectral(dec, t, sel) for t in t_grid.points]
    return SurfaceResult(op.label, alphas, t_grid, n)


def transmissivity(t: float) -> float:
    """Absorber transmissivity realizing imaginary time t: T = exp(-2t)."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return math.exp(-2.0 * t)


def t_of_transmissivity(T: float) -> float:
    """Inverse of :func:`transmissivity`; defined for T in (0, 1]."""
    if not 0.0 < T <= 1.0:
        raise DomainError(f"transmissivity must be in (0, 1], got {T}")
    return -0.5 * math.log(T)
