"""Command-line front end.

Subcommands: weak-value, sweep, surface, delayed, reproduce. Options come
from flags or from a flat key=value config file (--config); flags override
the file. Numeric CSV cells carry 9 significant digits so repeated runs
diff cleanly. reproduce writes its bundle to --output, else to
$SPINCAT_OUTPUT_DIR, else ./spincat-report.

Exit codes: 0 success, 1 scored failure or degenerate physics, 2 usage/IO.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import figures
from .delayed import branch_sweep, default_selections
from .errors import DomainError, OrthogonalSelection
from .experiments import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    ExperimentReport,
    analytic_weak_value,
    delayed_suite,
    exp_analytic_tables,
    exp_deterministic_sweeps,
    exp_rate_surfaces,
    sweep_set,
)
from .ite import SweepResult, TimeGrid, surface, sweep, transmissivity
from .observables import CANONICAL_LABELS, canonical_observables
from .tsvf import Selection, post_state, preselect, weak_value

ENV_OUTPUT_DIR = "SPINCAT_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "spincat-report"

SWEEP_HEADER = ("t", "transmissivity", "n", "n_stderr")
SURFACE_HEADER = ("alpha", "t", "n")
TABLE_HEADER = ("observable", "post_state", "re", "im", "analytic_re", "source")

_ALPHA_EDGE_TOL = 1e-9


class ConfigError(Exception):
    """Bad configuration value; the message starts with the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float = math.pi / 4
    post: str = "exchange"
    observable: str | None = None
    grid: tuple[float, float, int] | None = None
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    output_format: str = "csv"
    output_path: str | None = None
    alpha_points: int = 31
    include_alpha_endpoints: bool = False

    def time_grid(self, default: tuple[float, float, int]) -> TimeGrid:
        t_min, t_max, points = self.grid if self.grid is not None else default
        try:
            return TimeGrid.uniform(t_min, t_max, points)
        except ValueError as e:
            raise ConfigError("grid", str(e)) from e


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("grid", f"expected t_min:t_max:points, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise ConfigError("grid", str(e)) from e


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config-file key -> (RunConfig field, parser); keys match the flag names
_CONFIG_KEYS = {
    "alpha": ("alpha", float),
    "post": ("post", str),
    "observable": ("observable", str),
    "grid": ("grid", _parse_grid),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "output-format": ("output_format", str),
    "output": ("output_path", str),
    "alpha-points": ("alpha_points", int),
    "include-alpha-endpoints": ("include_alpha_endpoints", _parse_bool),
}


def read_config_file(path: str) -> dict[str, object]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(key, f"unknown configuration key ({path}:{lineno})")
        field_name, parse = _CONFIG_KEYS[key]
        try:
            values[field_name] = parse(value.strip())
        except (ValueError, ConfigError) as e:
            raise ConfigError(key, f"{path}:{lineno}: {e}") from e
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    defaults = RunConfig(command=args.command)

    def pick(field_name: str):
        flag = getattr(args, field_name, None)
        if flag is not None:
            return flag
        if field_name in file_values:
            return file_values[field_name]
        return getattr(defaults, field_name)

    grid = getattr(args, "grid", None)
    if isinstance(grid, str):
        grid = _parse_grid(grid)
    elif grid is None:
        grid = file_values.get("grid")

    cfg = RunConfig(
        command=args.command,
        alpha=pick("alpha"),
        post=pick("post"),
        observable=pick("observable"),
        grid=grid,
        trials=pick("trials"),
        seed=pick("seed"),
        output_format=pick("output_format"),
        output_path=pick("output_path"),
        alpha_points=pick("alpha_points"),
        include_alpha_endpoints=pick("include_alpha_endpoints"),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.post not in ("exchange", "identity"):
        raise ConfigError("post", f"must be exchange or identity, got {cfg.post!r}")
    if cfg.observable is not None and cfg.observable not in CANONICAL_LABELS:
        raise ConfigError(
            "observable",
            f"unknown label {cfg.observable!r}; choose from {', '.join(CANONICAL_LABELS)}",
        )
    if cfg.output_format not in ("csv", "json"):
        raise ConfigError("output-format", f"must be csv or json, got {cfg.output_format!r}")
    if cfg.trials < 1:
        raise ConfigError("trials", f"must be >= 1, got {cfg.trials}")
    if not math.isfinite(cfg.alpha):
        raise ConfigError("alpha", f"must be finite, got {cfg.alpha}")
    if cfg.alpha_points < 1:
        raise ConfigError("alpha-points", f"must be >= 1, got {cfg.alpha_points}")


def _check_alpha_range(alpha: float) -> None:
    if not 0.0 <= alpha <= math.pi / 2:
        raise ConfigError("alpha", f"out of range [0, pi/2]: {alpha}")


def _degenerate_alpha(alpha: float) -> bool:
    return min(alpha, math.pi / 2 - alpha) <= _ALPHA_EDGE_TOL


def _reject_degenerate(alpha: float) -> int | None:
    if _degenerate_alpha(alpha):
        print(
            f"degenerate pre-selection: alpha={alpha:g} collapses the path "
            "superposition (weak-value extraction needs alpha inside (0, pi/2))",
            file=sys.stderr,
        )
        return 1
    return None


def _fmt(value) -> str:
    x = float(value)
    if math.isnan(x):
        return ""
    return f"{x:.9g}"


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _deliver(cfg: RunConfig, text: str, default_name: str | None = None) -> None:
    """Write to cfg.output_path if set, else stdout. default_name is used
    when output_path is an existing directory."""
    if cfg.output_path is None:
        sys.stdout.write(text)
        return
    path = Path(cfg.output_path)
    if path.is_dir():
        if default_name is None:
            raise ConfigError("output", f"{path} is a directory")
        path = path / default_name
    path.write_text(text)
    print(f"wrote {path}")


def _sweep_rows(sw: SweepResult):
    rows = []
    for k, t in enumerate(sw.t):
        stderr = "" if sw.n_stderr is None else _fmt(sw.n_stderr[k])
        rows.append((_fmt(t), _fmt(transmissivity(float(t))), _fmt(sw.n[k]), stderr))
    return rows


def _sweep_payload(sw: SweepResult, post_name: str, alpha: float) -> dict:
    samples = []
    for k, t in enumerate(sw.t):
        samples.append({
            "t": float(t),
            "transmissivity": transmissivity(float(t)),
            "n": float(sw.n[k]),
            "n_stderr": None if sw.n_stderr is None else float(sw.n_stderr[k]),
        })
    return {
        "observable": sw.observable_label,
        "post": post_name,
        "alpha": alpha,
        "slope": sw.slope,
        "intercept": sw.intercept,
        "slope_stderr": sw.slope_stderr,
        "r_squared": sw.r_squared,
        "weak_value_estimate": sw.weak_value_estimate,
        "weighting": sw.weighting,
        "samples": samples,
    }


def _require_observable(cfg: RunConfig):
    if cfg.observable is None:
        raise ConfigError("observable", "required for this command")
    return canonical_observables()[cfg.observable]


def cmd_weak_value(cfg: RunConfig) -> int:
    """Sixteen-entry exact weak-value table for the configured alpha."""
    _check_alpha_range(cfg.alpha)
    failed = _reject_degenerate(cfg.alpha)
    if failed is not None:
        return failed
    pre = preselect(cfg.alpha)
    rows = []
    payload = []
    for post_name in ("exchange", "identity"):
        sel = Selection(pre, post_state(post_name))
        for label, op in canonical_observables().items():
            wv = weak_value(op, sel)
            analytic = analytic_weak_value(label, cfg.alpha, post_name)
            rows.append((
                label, post_name, _fmt(wv.value.real), _fmt(wv.value.imag),
                _fmt(analytic), "closed-form",
            ))
            payload.append({
                "observable": label, "post_state": post_name,
                "re": wv.value.real, "im": wv.value.imag,
                "analytic_re": analytic, "source": "closed-form",
            })
    if cfg.output_format == "csv":
        text = _csv_text(TABLE_HEADER, rows)
    else:
        text = _json_text({"alpha": cfg.alpha, "rows": payload})
    _deliver(cfg, text, f"weak_values.{cfg.output_format}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    """Deterministic N(t) sweep and slope fit for one observable."""
    op = _require_observable(cfg)
    _check_alpha_range(cfg.alpha)
    failed = _reject_degenerate(cfg.alpha)
    if failed is not None:
        return failed
    grid = cfg.time_grid((0.0, 0.2, 11))
    sel = Selection(preselect(cfg.alpha), post_state(cfg.post))
    sw = sweep(op, grid, sel)
    print(
        f"# {cfg.observable} post={cfg.post} alpha={cfg.alpha:.9g} "
        f"slope={sw.slope:.9g} estimate={sw.weak_value_estimate:.9g} "
        f"r_squared={sw.r_squared:.9g}",
        file=sys.stderr,
    )
    if cfg.output_format == "csv":
        text = _csv_text(SWEEP_HEADER, _sweep_rows(sw))
    else:
        text = _json_text(_sweep_payload(sw, cfg.post, cfg.alpha))
    _deliver(cfg, text, f"sweep_{cfg.observable}.{cfg.output_format}")
    return 0


def _surface_alpha_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.include_alpha_endpoints:
        return np.linspace(0.0, math.pi / 2, cfg.alpha_points)
    return np.linspace(0.0, math.pi / 2, cfg.alpha_points + 2)[1:-1]


def cmd_surface(cfg: RunConfig) -> int:
    """N over an (alpha, t) grid for one observable."""
    op = _require_observable(cfg)
    grid = cfg.time_grid((0.0, 1.0, 21))
    alphas = _surface_alpha_grid(cfg)
    res = surface(op, alphas, grid, post_state(cfg.post))
    if cfg.output_format == "csv":
        rows = []
        for i, alpha in enumerate(res.alpha_grid):
            for j, t in enumerate(res.t_grid.points):
                n = res.n[i, j]
                rows.append((_fmt(alpha), _fmt(t), "" if math.isnan(n) else _fmt(n)))
        text = _csv_text(SURFACE_HEADER, rows)
    else:
        matrix = [
            [None if math.isnan(x) else float(x) for x in row] for row in res.n
        ]
        text = _json_text({
            "observable": res.observable_label,
            "post": cfg.post,
            "alpha_grid": [float(a) for a in res.alpha_grid],
            "t_grid": [float(t) for t in res.t_grid.points],
            "n": matrix,
        })
    _deliver(cfg, text, f"surface_{cfg.observable}.{cfg.output_format}")
    return 0


def _branch_paths(base: Path) -> tuple[Path, Path]:
    if base.suffix:
        return (
            base.with_name(f"{base.stem}_exchange{base.suffix}"),
            base.with_name(f"{base.stem}_identity{base.suffix}"),
        )
    return base.with_name(base.name + "_exchange"), base.with_name(base.name + "_identity")


def cmd_delayed(cfg: RunConfig) -> int:
    """Monte-Carlo delayed-choice sweep (both branches) for one observable."""
    op = _require_observable(cfg)
    _check_alpha_range(cfg.alpha)
    failed = _reject_degenerate(cfg.alpha)
    if failed is not None:
        return failed
    grid = cfg.time_grid((0.0, 0.2, 11))
    ex_sw, id_sw = branch_sweep(
        op, grid, cfg.trials, cfg.seed, default_selections(cfg.alpha)
    )
    for branch, sw in (("exchange", ex_sw), ("identity", id_sw)):
        print(
            f"# {cfg.observable} branch={branch} trials={cfg.trials} "
            f"seed={cfg.seed} estimate={sw.weak_value_estimate:.9g} "
            f"slope_stderr={sw.slope_stderr:.9g}",
            file=sys.stderr,
        )
    if cfg.output_format == "json":
        text = _json_text({
            "exchange": _sweep_payload(ex_sw, "exchange", cfg.alpha),
            "identity": _sweep_payload(id_sw, "identity", cfg.alpha),
            "trials": cfg.trials,
            "seed": cfg.seed,
        })
        _deliver(cfg, text, f"delayed_{cfg.observable}.json")
        return 0
    ex_text = _csv_text(SWEEP_HEADER, _sweep_rows(ex_sw))
    id_text = _csv_text(SWEEP_HEADER, _sweep_rows(id_sw))
    if cfg.output_path is None:
        sys.stdout.write(f"# branch=exchange\n{ex_text}# branch=identity\n{id_text}")
        return 0
    base = Path(cfg.output_path)
    if base.is_dir():
        base = base / f"delayed_{cfg.observable}.csv"
    ex_path, id_path = _branch_paths(base)
    ex_path.write_text(ex_text)
    id_path.write_text(id_text)
    print(f"wrote {ex_path}")
    print(f"wrote {id_path}")
    return 0


def _write_data(outdir: Path, stem: str, cfg: RunConfig, header, rows, payload) -> None:
    if cfg.output_format == "csv":
        (outdir / f"{stem}.csv").write_text(_csv_text(header, rows))
    else:
        (outdir / f"{stem}.json").write_text(_json_text(payload))


def _report_payload(report: ExperimentReport) -> dict:
    return {
        "name": report.name,
        "parameters": {k: (v if not isinstance(v, float) else float(v))
                       for k, v in report.parameters.items()},
        "rows": [
            {
                "observable": r.observable_label,
                "post_state": r.post_state,
                "analytic": r.analytic,
                "numerical": r.numerical,
                "reference": r.reference,
                "source": r.source,
                "tolerance": r.tolerance,
                "target": r.target,
                "scored": r.scored,
                "passed": r.passed,
            }
            for r in report.rows
        ],
        "notes": list(report.notes),
    }


def cmd_reproduce(cfg: RunConfig) -> int:
    """Full report bundle: tables, surfaces, sweeps, delayed-choice runs,
    figures, and a pass/fail summary."""
    outdir = Path(
        cfg.output_path
        or os.environ.get(ENV_OUTPUT_DIR)
        or DEFAULT_OUTPUT_DIR
    )
    outdir.mkdir(parents=True, exist_ok=True)
    grid = cfg.time_grid((0.0, 0.2, 11))
    alpha = math.pi / 4

    summary: list[str] = []
    reports: list[ExperimentReport] = []

    table_report = exp_analytic_tables(alpha)
    reports.append(table_report)
    table_rows = []
    table_payload = []
    pre = preselect(alpha)
    for post_name in ("exchange", "identity"):
        sel = Selection(pre, post_state(post_name))
        for label, op in canonical_observables().items():
            wv = weak_value(op, sel)
            analytic = analytic_weak_value(label, alpha, post_name)
            table_rows.append((
                label, post_name, _fmt(wv.value.real), _fmt(wv.value.imag),
                _fmt(analytic), "closed-form",
            ))
            table_payload.append({
                "observable": label, "post_state": post_name,
                "re": wv.value.real, "im": wv.value.imag,
                "analytic_re": analytic, "source": "closed-form",
            })
    _write_data(outdir, "weak_values", cfg, TABLE_HEADER, table_rows,
                {"alpha": alpha, "rows": table_payload})

    surfaces = exp_rate_surfaces()
    for res in surfaces:
        rows = []
        for i, a in enumerate(res.alpha_grid):
            for j, t in enumerate(res.t_grid.points):
                n = res.n[i, j]
                rows.append((_fmt(a), _fmt(t), "" if math.isnan(n) else _fmt(n)))
        payload = {
            "observable": res.observable_label,
            "alpha_grid": [float(a) for a in res.alpha_grid],
            "t_grid": [float(t) for t in res.t_grid.points],
            "n": [[None if math.isnan(x) else float(x) for x in row] for row in res.n],
        }
        _write_data(outdir, f"surface_{res.observable_label}", cfg,
                    SURFACE_HEADER, rows, payload)
    figures.render_surfaces(surfaces, outdir / "surfaces.png")

    det_sweeps = sweep_set(grid, "exchange", alpha)
    det_report = exp_deterministic_sweeps(grid)
    reports.append(det_report)
    for label, sw in det_sweeps.items():
        _write_data(outdir, f"sweep_{label}", cfg, SWEEP_HEADER,
                    _sweep_rows(sw), _sweep_payload(sw, "exchange", alpha))
    figures.render_sweeps(det_sweeps, outdir / "sweeps.png",
                          "deterministic sweeps, exchange post-state")

    suite = delayed_suite(grid, cfg.trials, cfg.seed, alpha)
    reports.extend([suite.exchange, suite.identity])
    for label, (ex_sw, id_sw) in suite.sweeps.items():
        _write_data(outdir, f"delayed_{label}_exchange", cfg, SWEEP_HEADER,
                    _sweep_rows(ex_sw), _sweep_payload(ex_sw, "exchange", alpha))
        _write_data(outdir, f"delayed_{label}_identity", cfg, SWEEP_HEADER,
                    _sweep_rows(id_sw), _sweep_payload(id_sw, "identity", alpha))
    for weights, pooled in suite.pooled_sweeps.items():
        for label, sw in pooled.items():
            _write_data(outdir, f"pooled_{weights}_{label}", cfg, SWEEP_HEADER,
                        _sweep_rows(sw), _sweep_payload(sw, "pooled", alpha))
    figures.render_delayed(suite.sweeps, outdir / "delayed.png")

    unscored = list(suite.pooled.values())
    for report in reports + unscored:
        summary.extend(report.summary_lines())
        summary.append("")
        (outdir / f"report_{report.name}.json").write_text(
            _json_text(_report_payload(report))
        )

    scored = [r for rep in reports for r in rep.scored_rows]
    n_pass = sum(r.passed for r in scored)
    summary.append(f"scored: {n_pass}/{len(scored)} rows pass")
    text = "\n".join(summary) + "\n"
    (outdir / "summary.txt").write_text(text)
    sys.stdout.write(text)
    print(f"report bundle in {outdir}")
    return 0 if n_pass == len(scored) else 1


_COMMANDS = {
    "weak-value": cmd_weak_value,
    "sweep": cmd_sweep,
    "surface": cmd_surface,
    "delayed": cmd_delayed,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spincat",
        description="weak values, slope-fit extraction, and delayed-choice "
                    "Monte Carlo for the two-particle spin-exchange setup",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value config file; flags override")
        sp.add_argument("--output", dest="output_path",
                        help="output file (or directory for reproduce)")
        sp.add_argument("--output-format", dest="output_format",
                        choices=("csv", "json"))

    sp = sub.add_parser("weak-value", help="exact weak-value table")
    common(sp)
    sp.add_argument("--alpha", type=float, help="pre-selection mixing angle, radians")

    sp = sub.add_parser("sweep", help="deterministic N(t) sweep and slope fit")
    common(sp)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--post", choices=("exchange", "identity"))
    sp.add_argument("--observable", choices=CANONICAL_LABELS)
    sp.add_argument("--grid", help="t_min:t_max:points (default 0:0.2:11)")

    sp = sub.add_parser("surface", help="N over an (alpha, t) grid")
    common(sp)
    sp.add_argument("--post", choices=("exchange", "identity"))
    sp.add_argument("--observable", choices=CANONICAL_LABELS)
    sp.add_argument("--grid", help="t_min:t_max:points (default 0:1:21)")
    sp.add_argument("--alpha-points", dest="alpha_points", type=int)
    sp.add_argument("--include-alpha-endpoints", dest="include_alpha_endpoints",
                    action="store_const", const=True,
                    help="keep alpha=0 and alpha=pi/2 rows (undefined cells stay blank)")

    sp = sub.add_parser("delayed", help="Monte-Carlo delayed-choice sweep")
    common(sp)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--observable", choices=CANONICAL_LABELS)
    sp.add_argument("--grid", help="t_min:t_max:points (default 0:0.2:11)")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("reproduce", help="write the full report bundle")
    common(sp)
    sp.add_argument("--grid", help="t_min:t_max:points (default 0:0.2:11)")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[cfg.command](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OrthogonalSelection as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
