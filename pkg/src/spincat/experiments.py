"""Canned, named reproductions of the headline quantities.

Each function returns structured rows comparing three kinds of numbers:

* analytic    -- closed-form weak value for the configured selection,
* numerical   -- what this package computes (exact table, slope fit, or
                 Monte-Carlo estimate),
* reference   -- previously reported value for the same quantity, kept for
                 display with a source tag.

A row is scored against its target column (analytic or reference) at a fixed
tolerance; unscored rows are informational. The pooled delayed-choice table
is never scored: no tested pooling weights reproduce the reported pooled
spin values (see POOLED_NOTE), so per-branch results are the ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .delayed import branch_sweep, default_selections, pooled_estimate
from .errors import DomainError
from .ite import DEFAULT_GRID, SurfaceResult, SweepResult, TimeGrid, surface, sweep
from .observables import CANONICAL_LABELS, canonical_observables
from .tsvf import Selection, post_state, preselect, weak_value

POSITION_LABELS = CANONICAL_LABELS[:4]
PATH_SPIN_LABELS = CANONICAL_LABELS[4:]

#: Rows whose reference magnitude is well away from zero; everything else is
#: scored as a near-zero, |estimate| <= tolerance.
STRONG_LABELS = ("Pi_u2", "Pi_d1", "Pi_u1_S1", "Pi_d2_S2")

# Reported values, kept verbatim for the reference column.
REPORTED_EXACT_EXCHANGE = {
    "Pi_u1": 0.0, "Pi_u2": 1.0, "Pi_d1": 1.0, "Pi_d2": 0.0,
    "Pi_u1_S1": 0.5, "Pi_u2_S2": 0.0, "Pi_d1_S1": 0.0, "Pi_d2_S2": -0.5,
}
# The reported identity-post table carries the path-spin pair with signs
# opposite to the direct evaluation; see SIGN_NOTE.
REPORTED_EXACT_IDENTITY = {
    "Pi_u1": 0.0, "Pi_u2": 1.0, "Pi_d1": 1.0, "Pi_d2": 0.0,
    "Pi_u1_S1": 0.0, "Pi_u2_S2": 0.5, "Pi_d1_S1": -0.5, "Pi_d2_S2": 0.0,
}
REPORTED_FIT_EXCHANGE = {
    "Pi_u1": 0.00, "Pi_u2": 0.84, "Pi_d1": 0.82, "Pi_d2": 0.00,
    "Pi_u1_S1": 0.48, "Pi_u2_S2": -0.03, "Pi_d1_S1": -0.05, "Pi_d2_S2": -0.53,
}
REPORTED_DELAYED_POSITIONS = {
    "Pi_u1": 0.00, "Pi_u2": 0.83, "Pi_d1": 0.83, "Pi_d2": 0.01,
}
REPORTED_POOLED_SPINS = {
    "Pi_u1_S1": 0.22, "Pi_u2_S2": 0.18, "Pi_d1_S1": 0.17, "Pi_d2_S2": -0.35,
}

DEFAULT_TRIALS = 1_000_000
DEFAULT_SEED = 42

SIGN_NOTE = (
    "identity post-state: the reference table lists the path-spin pair as "
    "(+0.5, -0.5) for (Pi_u2_S2, Pi_d1_S1); direct evaluation of "
    "<f|O|i>/<f|i> gives (-0.5, +0.5). The analytic column carries the "
    "direct evaluation and is the scored target."
)
BIAS_NOTE = (
    "slope fits over a finite window are biased relative to the exact t->0 "
    "derivative; reference values here are themselves finite-window fits, "
    "so estimates are scored against them, not against the analytic column."
)
POOLED_NOTE = (
    "pooled rows are unscored: neither equal nor success-probability "
    "weights reproduce the reported pooled path-spin values, and the "
    "reported 0.17 entry conflicts in sign with both per-branch routes. "
    "Per-branch tables are authoritative."
)


def analytic_weak_value(label: str, alpha: float, post_name: str) -> float:
    """Closed-form real weak value for a canonical observable.

    Path projectors give (0, 1, 1, 0) under both post-selections. Path-spin
    composites give (tan(alpha)/2, 0, 0, -tan(alpha)/2) under the exchange
    post-state and the alpha-independent (0, -1/2, +1/2, 0) under identity.
    """
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError(f"alpha must lie in (0, pi/2), got {alpha}")
    if label not in CANONICAL_LABELS:
        raise ValueError(f"unknown observable label {label!r}")
    if post_name not in ("exchange", "identity"):
        raise ValueError(f"unknown post-selection {post_name!r}")
    positions = {"Pi_u1": 0.0, "Pi_u2": 1.0, "Pi_d1": 1.0, "Pi_d2": 0.0}
    if label in positions:
        return positions[label]
    if post_name == "exchange":
        half_tan = 0.5 * math.tan(alpha)
        return {
            "Pi_u1_S1": half_tan, "Pi_u2_S2": 0.0,
            "Pi_d1_S1": 0.0, "Pi_d2_S2": -half_tan,
        }[label]
    return {
        "Pi_u1_S1": 0.0, "Pi_u2_S2": -0.5,
        "Pi_d1_S1": 0.5, "Pi_d2_S2": 0.0,
    }[label]


@dataclass(frozen=True)
class ReportRow:
    """One compared quantity; ``target`` names the column the tolerance
    applies to ("analytic" or "reference")."""

    observable_label: str
    post_state: str
    analytic: float
    numerical: float
    tolerance: float
    target: str = "analytic"
    reference: float | None = None
    source: str = "closed-form"
    scored: bool = True
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.target == "analytic":
            base = self.analytic
        elif self.target == "reference":
            if self.reference is None:
                raise ValueError("reference-targeted row without a reference")
            base = self.reference
        else:
            raise ValueError(f"unknown target {self.target!r}")
        object.__setattr__(
            self, "passed", bool(abs(self.numerical - base) <= self.tolerance)
        )


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    parameters: dict
    rows: tuple[ReportRow, ...]
    notes: tuple[str, ...] = ()

    @property
    def scored_rows(self) -> tuple[ReportRow, ...]:
        return tuple(r for r in self.rows if r.scored)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.scored_rows)

    def summary_lines(self) -> list[str]:
        scored = self.scored_rows
        n_pass = sum(r.passed for r in scored)
        lines = [f"{self.name}: {n_pass}/{len(scored)} scored rows pass"]
        for r in self.rows:
            ref = "" if r.reference is None else f"  ref {r.reference:+.4f} ({r.source})"
            flag = "pass" if r.passed else "FAIL"
            if not r.scored:
                flag = "info"
            lines.append(
                f"  {r.observable_label:<9} {r.post_state:<9} "
                f"analytic {r.analytic:+.6f}  est {r.numerical:+.6f}"
                f"{ref}  [{flag}]"
            )
        lines.extend(f"  note: {n}" for n in self.notes)
        return lines


def _grid_params(grid: TimeGrid) -> dict:
    return {
        "t_min": float(grid.points[0]),
        "t_max": float(grid.points[-1]),
        "points": len(grid),
    }


def exp_analytic_tables(alpha: float = math.pi / 4) -> ExperimentReport:
    """All sixteen exact weak values (eight observables, two post-states)."""
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError(f"alpha must lie in (0, pi/2), got {alpha}")
    quarter = abs(alpha - math.pi / 4) <= 1e-12
    pre = preselect(alpha)
    rows = []
    for post_name, reported in (
        ("exchange", REPORTED_EXACT_EXCHANGE),
        ("identity", REPORTED_EXACT_IDENTITY),
    ):
        sel = Selection(pre, post_state(post_name))
        for label, op in canonical_observables().items():
            # reported exchange path-spin entries only hold at alpha = pi/4
            alpha_bound = post_name == "exchange" and label in PATH_SPIN_LABELS
            reference = None if (alpha_bound and not quarter) else reported[label]
            rows.append(ReportRow(
                observable_label=label,
                post_state=post_name,
                analytic=analytic_weak_value(label, alpha, post_name),
                numerical=weak_value(op, sel).real,
                tolerance=1e-12,
                reference=reference,
                source="reported-exact" if reference is not None else "closed-form",
            ))
    return ExperimentReport(
        name="analytic-weak-values",
        parameters={"alpha": alpha},
        rows=tuple(rows),
        notes=(SIGN_NOTE,),
    )


#: Interior alpha grid for surfaces; the endpoints are degenerate (the
#: pre-state loses its path superposition at 0, the exchange overlap
#: vanishes at pi/2) and excluded by default.
SURFACE_ALPHA_GRID = np.linspace(0.0, math.pi / 2, 33)[1:-1]
SURFACE_TIME_GRID = TimeGrid.uniform(0.0, 1.0, 21)


def exp_rate_surfaces(
    alpha_grid=None, t_grid: TimeGrid = SURFACE_TIME_GRID
) -> list[SurfaceResult]:
    """Coincidence-rate surfaces over (alpha, t) for all eight observables,
    exchange post-state."""
    alphas = SURFACE_ALPHA_GRID if alpha_grid is None else alpha_grid
    post = post_state("exchange")
    return [
        surface(op, alphas, t_grid, post)
        for op in canonical_observables().values()
    ]


def sweep_set(
    grid: TimeGrid = DEFAULT_GRID,
    post_name: str = "exchange",
    alpha: float = math.pi / 4,
) -> dict[str, SweepResult]:
    """Deterministic slope-fit sweeps for all eight observables."""
    sel = Selection(preselect(alpha), post_state(post_name))
    return {
        label: sweep(op, grid, sel)
        for label, op in canonical_observables().items()
    }


def exp_deterministic_sweeps(grid: TimeGrid = DEFAULT_GRID) -> ExperimentReport:
    """Slope-fitted weak values on the default window, exchange post-state.

    Strong rows are scored against the reported fitted values at +/-0.03
    (the window reproduces them from exact rates); near-zero rows are scored
    as |estimate| <= 0.05 against the analytic zeros.
    """
    alpha = math.pi / 4
    sweeps = sweep_set(grid, "exchange", alpha)
    rows = []
    for label in CANONICAL_LABELS:
        est = sweeps[label].weak_value_estimate
        analytic = analytic_weak_value(label, alpha, "exchange")
        if label in STRONG_LABELS:
            row = ReportRow(
                label, "exchange", analytic, est, 0.03,
                target="reference",
                reference=REPORTED_FIT_EXCHANGE[label],
                source="reported-fit",
            )
        else:
            row = ReportRow(
                label, "exchange", analytic, est, 0.05,
                reference=REPORTED_FIT_EXCHANGE[label],
                source="reported-fit",
            )
        rows.append(row)
    return ExperimentReport(
        name="deterministic-sweeps",
        parameters={"alpha": alpha, "post": "exchange", **_grid_params(grid)},
        rows=tuple(rows),
        notes=(BIAS_NOTE,),
    )


@dataclass(frozen=True)
class DelayedSuite:
    """Everything the delayed-choice reproduction produces in one pass."""

    exchange: ExperimentReport
    identity: ExperimentReport
    pooled: dict[str, ExperimentReport]
    sweeps: dict[str, tuple[SweepResult, SweepResult]]
    pooled_sweeps: dict[str, dict[str, SweepResult]]


def delayed_suite(
    grid: TimeGrid = DEFAULT_GRID,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    alpha: float = math.pi / 4,
) -> DelayedSuite:
    """Monte-Carlo delayed-choice run plus per-branch and pooled reports."""
    selections = default_selections(alpha)
    sweeps = {
        label: branch_sweep(op, grid, trials, seed, selections)
        for label, op in canonical_observables().items()
    }
    det_identity = sweep_set(grid, "identity", alpha)

    params = {"alpha": alpha, "trials": trials, "seed": seed, **_grid_params(grid)}
    ex_rows, id_rows = [], []
    for label in CANONICAL_LABELS:
        ex_sw, id_sw = sweeps[label]
        analytic_ex = analytic_weak_value(label, alpha, "exchange")
        if label in STRONG_LABELS:
            if label in REPORTED_DELAYED_POSITIONS:
                ref, src = REPORTED_DELAYED_POSITIONS[label], "reported-delayed"
            else:
                ref, src = REPORTED_FIT_EXCHANGE[label], "reported-fit"
            ex_rows.append(ReportRow(
                label, "exchange", analytic_ex, ex_sw.weak_value_estimate, 0.05,
                target="reference", reference=ref, source=src,
            ))
        else:
            ref = REPORTED_DELAYED_POSITIONS.get(label, REPORTED_FIT_EXCHANGE[label])
            src = "reported-delayed" if label in REPORTED_DELAYED_POSITIONS else "reported-fit"
            ex_rows.append(ReportRow(
                label, "exchange", analytic_ex, ex_sw.weak_value_estimate, 0.05,
                reference=ref, source=src,
            ))
        # identity branch: targets are this package's own deterministic fits
        id_rows.append(ReportRow(
            label, "identity",
            analytic_weak_value(label, alpha, "identity"),
            id_sw.weak_value_estimate, 0.05,
            target="reference",
            reference=det_identity[label].weak_value_estimate,
            source="deterministic-fit",
        ))

    pooled_reports: dict[str, ExperimentReport] = {}
    pooled_sweeps: dict[str, dict[str, SweepResult]] = {}
    for weights in ("equal", "by_success_probability"):
        p_rows = []
        p_sweeps = {}
        for label in CANONICAL_LABELS:
            ex_sw, id_sw = sweeps[label]
            pooled_sw = pooled_estimate(ex_sw, id_sw, weights)
            p_sweeps[label] = pooled_sw
            analytic_mix = 0.5 * (
                analytic_weak_value(label, alpha, "exchange")
                + analytic_weak_value(label, alpha, "identity")
            )
            if label in REPORTED_POOLED_SPINS:
                ref, src = REPORTED_POOLED_SPINS[label], "reported-pooled"
            else:
                ref, src = REPORTED_DELAYED_POSITIONS[label], "reported-delayed"
            p_rows.append(ReportRow(
                label, "pooled", analytic_mix, pooled_sw.weak_value_estimate,
                0.05, target="reference", reference=ref, source=src,
                scored=False,
            ))
        pooled_reports[weights] = ExperimentReport(
            name=f"delayed-pooled-{weights}",
            parameters={**params, "weights": weights},
            rows=tuple(p_rows),
            notes=(POOLED_NOTE,),
        )
        pooled_sweeps[weights] = p_sweeps

    return DelayedSuite(
        exchange=ExperimentReport(
            name="delayed-exchange-branch", parameters=params, rows=tuple(ex_rows)
        ),
        identity=ExperimentReport(
            name="delayed-identity-branch", parameters=params, rows=tuple(id_rows)
        ),
        pooled=pooled_reports,
        sweeps=sweeps,
        pooled_sweeps=pooled_sweeps,
    )


def exp_delayed_sweeps(
    grid: TimeGrid = DEFAULT_GRID,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
) -> tuple[ExperimentReport, ExperimentReport]:
    """Per-branch delayed-choice reports (exchange, identity)."""
    suite = delayed_suite(grid, trials, seed)
    return suite.exchange, suite.identity
