"""Monte-Carlo simulation of delayed-choice post-selection.

Each trial sends the pre-selected pair through the absorptive element for a
fixed imaginary time t; only afterwards does a random 1/0 switch decide which
post-selection (spin-exchange or identity) the trial is measured against.
Success tallies per branch recover the same coincidence-rate curves as the
deterministic engine, so the slope-extracted weak values are unchanged by
the late choice.

The evolved amplitude is turned into a per-trial Bernoulli probability by
rescaling ``exp(-O t)`` with the contraction factor ``c(t) = exp(-lam_min t)``
when the smallest eigenvalue ``lam_min`` is negative; the known factor is
divided back out of the observed frequency, so the estimator of N(t) stays
unbiased. For nonnegative spectra (path projectors) c(t) = 1 and raw
frequencies are already probabilities.

Seed handling: per-point seeds spawn from the master seed and the grid index,
and each point owns three child streams (switch, exchange tally, identity
tally), so any subset of points reruns identically in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, ProbabilityOverflow
from .hilbert import Operator, SpectralDecomposition, StateVector, spectral
from .ite import SweepResult, TimeGrid, fit_ols
from .observables import CANONICAL_LABELS, canonical_observables
from .tsvf import Selection, post_exchange, post_identity, preselect

BRANCHES = ("exchange", "identity")

_STREAM_SWITCH = 0
_STREAM = {"exchange": 1, "identity": 2}

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class SwitchPolicy:
    """Branch routing of the late switch; default is a fair coin.

    ``p_exchange`` is the probability the switch emits 1, selecting the
    spin-exchange post-state.
    """

    p_exchange: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p_exchange <= 1.0:
            raise ValueError(f"p_exchange must be in [0, 1], got {self.p_exchange}")


@dataclass(frozen=True)
class TrialBatchConfig:
    """One grid point's worth of trials: observable, time, count, seed."""

    observable_label: str
    t: float
    trials: int
    seed: int
    policy: SwitchPolicy = SwitchPolicy()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")


@dataclass(frozen=True)
class BranchStats:
    """Tallies for one (grid point, branch) cell.

    ``q`` is the per-trial success probability actually sampled, after the
    contraction rescaling; ``n_hat`` and ``stderr`` are in coincidence-rate
    units (rescaling undone, normalized by the branch's N0). ``stderr`` is
    the binomial standard error propagated through the same scaling.
    """

    branch: str
    t: float
    trials: int
    coincidences: int
    q: float
    contraction: float
    n_hat: float
    stderr: float

    def __post_init__(self):
        if not 0 <= self.coincidences <= self.trials:
            raise ValueError("coincidences must lie in [0, trials]")


def split_seed(master: int, *key: int) -> np.random.Generator:
    """Independent generator for a (master seed, index path) pair."""
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=key))


def point_seed(master: int, *path: int) -> int:
    """Deterministic child seed for an index path under the master seed."""
    ss = np.random.SeedSequence(master, spawn_key=path)
    return int(ss.generate_state(1, np.uint64)[0])


def _contraction_rate(dec: SpectralDecomposition) -> float:
    return max(0.0, -float(dec.eigenvalues[0]))


def _success_probability(
    dec: SpectralDecomposition, rate: float, t: float, sel: Selection
) -> tuple[float, float]:
    f_proj = dec.vectors.conj().T @ sel.post.amps
    i_proj = dec.vectors.conj().T @ sel.pre.amps
    amp = np.vdot(f_proj, np.exp(-dec.eigenvalues * t) * i_proj)
    c = math.exp(rate * t)
    q = float(abs(amp) ** 2) / c**2
    if q > 1.0 + _PROB_TOL:
        raise ProbabilityOverflow(f"per-trial probability {q} exceeds 1")
    return min(q, 1.0), c


def trial_probability(op: Operator, t: float, sel: Selection) -> tuple[float, float]:
    """Per-trial success probability and contraction factor for one branch."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    sel.require_valid()
    dec = spectral(op)
    return _success_probability(dec, _contraction_rate(dec), t, sel)


def _tally(
    branch: str,
    t: float,
    trials: int,
    q: float,
    c: float,
    n0: float,
    rng: np.random.Generator,
) -> BranchStats:
    if trials == 0:
        return BranchStats(branch, t, 0, 0, q, c, math.nan, math.nan)
    coincidences = int(rng.binomial(trials, q))
    freq = coincidences / trials
    scale = c**2 / n0
    n_hat = freq * scale
    stderr = math.sqrt(freq * (1.0 - freq) / trials) * scale
    return BranchStats(branch, t, trials, coincidences, q, c, n_hat, stderr)


def default_selections(
    alpha: float = math.pi / 4,
) -> tuple[StateVector, StateVector, StateVector]:
    """(pre, exchange post, identity post) triple fed to the switch."""
    return preselect(alpha), post_exchange(), post_identity()


def run_batch(
    cfg: TrialBatchConfig,
    sel_pair: tuple[StateVector, StateVector, StateVector],
) -> tuple[BranchStats, BranchStats]:
    """One grid point: route trials through the late switch, tally per branch.

    Returns (exchange, identity) stats. Pure function of cfg: the switch
    stream and the two tally streams all spawn from cfg.seed.
    """
    pre, post_ex, post_id = sel_pair
    selections = {
        "exchange": Selection(pre, post_ex),
        "identity": Selection(pre, post_id),
    }
    op = canonical_observables().get(cfg.observable_label)
    if op is None:
        raise ValueError(f"unknown observable label {cfg.observable_label!r}")
    dec = spectral(op)
    rate = _contraction_rate(dec)
    switch_rng = split_seed(cfg.seed, _STREAM_SWITCH)
    to_exchange = int(switch_rng.binomial(cfg.trials, cfg.policy.p_exchange))
    counts = {"exchange": to_exchange, "identity": cfg.trials - to_exchange}
    out = []
    for branch in BRANCHES:
        sel = selections[branch]
        sel.require_valid()
        q, c = _success_probability(dec, rate, cfg.t, sel)
        rng = split_seed(cfg.seed, _STREAM[branch])
        out.append(_tally(branch, cfg.t, counts[branch], q, c, sel.n0, rng))
    return tuple(out)


def _fit_branch(
    label: str, grid: TimeGrid, rows: list[BranchStats], n0: float
) -> SweepResult:
    n = np.array([r.n_hat for r in rows])
    fit = fit_ols(np.column_stack([grid.points, n]))
    return SweepResult(
        observable_label=label,
        t=grid.points,
        n=n,
        slope=fit.slope,
        intercept=fit.intercept,
        slope_stderr=fit.slope_stderr,
        r_squared=fit.r_squared,
        weak_value_estimate=-fit.slope / 2.0,
        n_stderr=np.array([r.stderr for r in rows]),
        n0=n0,
        branch_stats=tuple(rows),
    )


def branch_sweep(
    op: Operator,
    grid: TimeGrid,
    trials_per_point: int,
    seed: int,
    selections: tuple[StateVector, StateVector, StateVector],
    policy: SwitchPolicy = SwitchPolicy(),
) -> tuple[SweepResult, SweepResult]:
    """Monte-Carlo N(t) sweep per branch, fitted like the deterministic one."""
    try:
        obs_index = CANONICAL_LABELS.index(op.label)
    except ValueError:
        raise ValueError(f"unknown observable label {op.label!r}") from None
    stats: dict[str, list[BranchStats]] = {b: [] for b in BRANCHES}
    for k, t in enumerate(grid.points):
        # decorrelate draws across observables, not just across points
        cfg = TrialBatchConfig(
            observable_label=op.label,
            t=float(t),
            trials=trials_per_point,
            seed=point_seed(seed, obs_index, k),
            policy=policy,
        )
        ex_stats, id_stats = run_batch(cfg, selections)
        stats["exchange"].append(ex_stats)
        stats["identity"].append(id_stats)
    pre, post_ex, post_id = selections
    n0 = {
        "exchange": Selection(pre, post_ex).n0,
        "identity": Selection(pre, post_id).n0,
    }
    return tuple(
        _fit_branch(op.label, grid, stats[b], n0[b]) for b in BRANCHES
    )


def pooled_estimate(
    a: SweepResult, b: SweepResult, weights: str = "equal"
) -> SweepResult:
    """Single fit over both branches' samples, combined point by point.

    "equal" averages the branch rates; "by_success_probability" weights each
    branch at each point by its per-trial success probability (requires the
    tallies from branch_sweep). Either way the pooled curve mixes two
    post-selections with different slopes, so the result summarizes the
    apparatus rather than estimating either selection's weak value.
    """
    if a.t.shape != b.t.shape or not np.allclose(a.t, b.t):
        raise GridMismatch("branch sweeps were taken on different grids")
    if weights == "equal":
        w_a = np.full(len(a.t), 0.5)
    elif weights == "by_success_probability":
        if a.branch_stats is None or b.branch_stats is None:
            raise ValueError("success-probability weights need branch tallies")
        q_a = np.array([r.q for r in a.branch_stats])
        q_b = np.array([r.q for r in b.branch_stats])
        w_a = q_a / (q_a + q_b)
    else:
        raise ValueError(f"unknown weights {weights!r}")
    n = w_a * a.n + (1.0 - w_a) * b.n
    stderr = None
    if a.n_stderr is not None and b.n_stderr is not None:
        stderr = np.sqrt((w_a * a.n_stderr) ** 2 + ((1.0 - w_a) * b.n_stderr) ** 2)
    fit = fit_ols(np.column_stack([a.t, n]))
    return SweepResult(
        observable_label=a.observable_label,
        t=a.t,
        n=n,
        slope=fit.slope,
        intercept=fit.intercept,
        slope_stderr=fit.slope_stderr,
        r_squared=fit.r_squared,
        weak_value_estimate=-fit.slope / 2.0,
        n_stderr=stderr,
        weighting=weights,
    )
