"""Command-line front end: single runs, run matrices, machine-readable traces.

Single runs select one scenario/configuration/error combination and emit
``trace.csv``/``trace.json``, ``metrics.json`` and optional per-replan
estimate dumps; ``--matrix`` executes every selected combination
concurrently and aggregates one ``summary.csv`` row per run. Outputs are
byte-identical for identical inputs.
"""

import argparse
import concurrent.futures
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimators import Configuration, resolve_error
from .fusion import SGrid
from .gp import GpPrior, SquaredExponentialKernel
from .simulator import collision_scenario, run, turn_scenario

SCENARIO_NAMES = ("turn", "collision")
CONFIG_NAMES = ("gt", "l", "p", "f")
DEFAULT_ERRORS = ("worst-over", "worst-under")


class UsageError(ValueError):
    """Invalid command line; message names the offending flag and constraint."""


@dataclass
class RunConfig:
    """Validated run request: selection, overrides, output options."""

    scenario: str = "turn"
    config: str = "gt"
    error: str = "worst-over"
    out: str = None
    format: str = "both"
    dump_estimates: bool = False
    ds: float = 1.0
    s_f: float = 50.0
    l: float = 10.0
    sigma_f: float = 0.45 / 1.96
    eta: float = 0.55
    s_l: float = 5.0
    replan_dt: float = 0.1
    sim_dt: float = 0.01
    lane_half_width: float = 1.75
    turn_radius: float = 20.0

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def grid(self):
        return SGrid(ds=self.ds, s_f=self.s_f)

    def prior(self):
        return GpPrior(mean=self.eta, kernel=SquaredExponentialKernel(self.sigma_f, self.l))

    def configuration(self):
        return Configuration(kind=self.config, local_reach=self.s_l, prior=self.prior())

    def scenario_instance(self):
        if self.scenario == "turn":
            return turn_scenario(turn_radius=self.turn_radius,
                                 lane_half_width=self.lane_half_width)
        return collision_scenario(lane_half_width=self.lane_half_width)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    p = _Parser(prog="frictionfusion", description=__doc__)
    p.add_argument("--scenario", choices=SCENARIO_NAMES, default="turn")
    p.add_argument("--config", choices=CONFIG_NAMES, default="gt")
    p.add_argument("--error", default="worst-over",
                   help="worst-over, worst-under, or fixed=<v>")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--dump-estimates", action="store_true",
                   help="write one estimate_<t>.csv per replan")
    p.add_argument("--ds", type=float, default=1.0, help="grid spacing (m)")
    p.add_argument("--s-f", type=float, default=50.0, help="horizon length (m)")
    p.add_argument("--l", type=float, default=10.0, help="kernel length scale (m)")
    p.add_argument("--sigma-f", type=float, default=0.45 / 1.96,
                   help="prior signal standard deviation")
    p.add_argument("--eta", type=float, default=0.55, help="prior mean")
    p.add_argument("--s-l", type=float, default=5.0,
                   help="local estimate influence threshold (m)")
    p.add_argument("--replan-dt", type=float, default=0.1)
    p.add_argument("--sim-dt", type=float, default=0.01)
    p.add_argument("--lane-half-width", type=float, default=1.75)
    p.add_argument("--turn-radius", type=float, default=20.0)
    p.add_argument("--matrix", action="store_true",
                   help="run every selected combination and write summary.csv")
    p.add_argument("--scenarios", nargs="+", choices=SCENARIO_NAMES,
                   default=list(SCENARIO_NAMES), help="matrix scenario selection")
    p.add_argument("--configs", nargs="+", choices=CONFIG_NAMES,
                   default=list(CONFIG_NAMES), help="matrix configuration selection")
    p.add_argument("--errors", nargs="+", default=list(DEFAULT_ERRORS),
                   help="matrix error-mode selection")
    return p


def _validate(rc):
    if rc.ds <= 0.0:
        raise UsageError("--ds must be > 0")
    if rc.s_f <= 0.0:
        raise UsageError("--s-f must be > 0")
    ratio = rc.s_f / rc.ds
    if abs(ratio - round(ratio)) > 1e-9:
        raise UsageError("--s-f must be an exact multiple of --ds")
    if rc.l <= 0.0:
        raise UsageError("--l must be > 0")
    if rc.sigma_f <= 0.0:
        raise UsageError("--sigma-f must be > 0")
    if not 0.0 < rc.eta < 2.0:
        raise UsageError("--eta must lie in (0, 2)")
    if rc.s_l < 0.0:
        raise UsageError("--s-l must be >= 0")
    if rc.sim_dt <= 0.0 or rc.sim_dt > 0.05:
        raise UsageError("--sim-dt must lie in (0, 0.05]")
    if rc.replan_dt <= 0.0:
        raise UsageError("--replan-dt must be > 0")
    steps = rc.replan_dt / rc.sim_dt
    if abs(steps - round(steps)) > 1e-9:
        raise UsageError("--replan-dt must be a multiple of --sim-dt")
    if rc.lane_half_width <= 0.0:
        raise UsageError("--lane-half-width must be > 0")
    if rc.turn_radius <= 0.0:
        raise UsageError("--turn-radius must be > 0")
    try:
        resolve_error(rc.error)
    except ValueError as exc:
        raise UsageError(f"--error: {exc}") from None
    return rc


def parse_args(argv):
    """Parse and validate a command line into a RunConfig."""
    ns = _build_parser().parse_args(argv)
    rc = RunConfig(
        scenario=ns.scenario, config=ns.config, error=ns.error, out=ns.out,
        format=ns.format, dump_estimates=ns.dump_estimates, ds=ns.ds, s_f=ns.s_f,
        l=ns.l, sigma_f=ns.sigma_f, eta=ns.eta, s_l=ns.s_l,
        replan_dt=ns.replan_dt, sim_dt=ns.sim_dt,
        lane_half_width=ns.lane_half_width, turn_radius=ns.turn_radius,
    )
    return _validate(rc)


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return ""
        return f"{x:.9g}"
    return str(x)


def _write_text(path, text):
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        return None if np.isnan(x) else float(x)
    return x


def execute(rc):
    """Run the configured scenario once."""
    return run(
        rc.scenario_instance(),
        rc.configuration(),
        local_error=resolve_error(rc.error),
        replan_dt=rc.replan_dt,
        sim_dt=rc.sim_dt,
        grid=rc.grid(),
    )


def emit_traces(result, rc):
    """Write trace, metrics and optional per-replan estimate files.

    Returns the list of written paths. Files are deterministic: fixed column
    order, 9-significant-digit decimal formatting, LF newlines.
    """
    out_dir = Path(rc.out if rc.out is not None else ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    tr = result.trace
    n = len(tr["t"])

    if rc.format in ("csv", "both"):
        lines = ["t,s,d,v,lambda,outcome_so_far"]
        for i in range(n):
            lines.append(",".join([
                _fmt(tr["t"][i]), _fmt(tr["s"][i]), _fmt(tr["d"][i]),
                _fmt(tr["v"][i]), _fmt(tr["lambda"][i]), tr["outcome"][i],
            ]))
        path = out_dir / "trace.csv"
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)

    if rc.format in ("json", "both"):
        payload = {
            "t": [_json_value(x) for x in tr["t"]],
            "s": [_json_value(x) for x in tr["s"]],
            "d": [_json_value(x) for x in tr["d"]],
            "v": [_json_value(x) for x in tr["v"]],
            "lambda": [_json_value(x) for x in tr["lambda"]],
            "outcome_so_far": list(tr["outcome"]),
        }
        path = out_dir / "trace.json"
        _write_text(path, json.dumps(payload, sort_keys=True) + "\n")
        written.append(path)

    m = result.metrics
    metrics_payload = {
        "scenario": result.scenario_name,
        "config": result.config_kind,
        "error": rc.error,
        "outcome": m.outcome,
        "max_abs_d": _json_value(m.max_abs_d),
        "min_clearance": _json_value(m.min_clearance),
        "impact_velocity": _json_value(m.impact_velocity),
        "mean_utilization": _json_value(m.mean_utilization),
        "v_at_window_entry": _json_value(m.v_at_window_entry),
        "duration": _json_value(m.duration),
        "final_speed": _json_value(m.final_speed),
    }
    path = out_dir / "metrics.json"
    _write_text(path, json.dumps(metrics_payload, sort_keys=True, indent=2) + "\n")
    written.append(path)

    if rc.dump_estimates:
        grid_pts = rc.grid().points
        for rec in result.replans:
            if rec.series is not None:
                mu_prime = rec.series.mu_prime
                margin = rec.series.margin
                post_mean = rec.posterior.mean
                post_std = rec.posterior.std
            else:
                mu_prime = rec.mu_hat
                margin = np.zeros_like(rec.mu_hat)
                post_mean = rec.mu_hat
                post_std = np.zeros_like(rec.mu_hat)
            lines = ["s,mu_prime,margin,post_mean,post_std,mu_hat,mu_gt"]
            for i, s in enumerate(grid_pts):
                lines.append(",".join([
                    _fmt(s), _fmt(mu_prime[i]), _fmt(margin[i]), _fmt(post_mean[i]),
                    _fmt(post_std[i]), _fmt(rec.mu_hat[i]), _fmt(rec.mu_gt[i]),
                ]))
            path = out_dir / f"estimate_{rec.t:.2f}.csv"
            _write_text(path, "\n".join(lines) + "\n")
            written.append(path)
    return written


SUMMARY_HEADER = ("scenario,config,error_mode,outcome,max_abs_d,min_clearance,"
                  "impact_velocity,mean_utilization")


def _matrix_cell(rc):
    try:
        result = execute(rc)
        if rc.out is not None:
            emit_traces(result, rc)
        m = result.metrics
        return ",".join([
            rc.scenario, rc.config, rc.error, m.outcome, _fmt(m.max_abs_d),
            _fmt(m.min_clearance), _fmt(m.impact_velocity), _fmt(m.mean_utilization),
        ])
    except Exception as exc:  # single-run failure must not sink the matrix
        return ",".join([rc.scenario, rc.config, rc.error,
                         f"failed: {type(exc).__name__}", "", "", "", ""])


def run_matrix(scenarios, configs, error_modes, base=None):
    """Run every combination (concurrently) and return summary.csv text.

    Per-run outputs land in ``<out>/<scenario>_<config>_<error>/`` when the
    base config has an output directory; rows keep the selection order
    regardless of completion order.
    """
    if not scenarios or not configs or not error_modes:
        raise ValueError("scenario, configuration and error selections must be non-empty")
    base = base if base is not None else RunConfig()
    cells = []
    for scenario in scenarios:
        for config in configs:
            for error in error_modes:
                rc = dataclasses.replace(base, scenario=scenario, config=config,
                                         error=error)
                if base.out is not None:
                    sub = Path(base.out) / f"{scenario}_{config}_{error.replace('=', '_')}"
                    rc = dataclasses.replace(rc, out=str(sub))
                cells.append(rc)
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(8, len(cells))) as pool:
        rows = list(pool.map(_matrix_cell, cells))
    text = SUMMARY_HEADER + "\n" + "\n".join(rows) + "\n"
    if base.out is not None:
        out_dir = Path(base.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_text(out_dir / "summary.csv", text)
    return text


def main(argv=None):
    argv = argv if argv is not None else sys.argv[1:]
    try:
        ns = _build_parser().parse_args(argv)
        if ns.matrix:
            base = _validate(RunConfig(
                out=ns.out, format=ns.format, dump_estimates=ns.dump_estimates,
                ds=ns.ds, s_f=ns.s_f, l=ns.l, sigma_f=ns.sigma_f, eta=ns.eta,
                s_l=ns.s_l, replan_dt=ns.replan_dt, sim_dt=ns.sim_dt,
                lane_half_width=ns.lane_half_width, turn_radius=ns.turn_radius,
            ))
            for error in ns.errors:
                resolve_error(error)
            text = run_matrix(ns.scenarios, ns.configs, ns.errors, base=base)
            sys.stdout.write(text)
            if any(",failed:" in row for row in text.splitlines()):
                return 2
            return 0
        rc = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        result = execute(rc)
        if rc.out is not None:
            emit_traces(result, rc)
        m = result.metrics
        clearance = "" if np.isnan(m.min_clearance) else f" min_clearance={m.min_clearance:.3f}"
        print(f"{rc.scenario} {rc.config} {rc.error}: outcome={m.outcome} "
              f"max|d|={m.max_abs_d:.3f}{clearance} "
              f"impact_velocity={m.impact_velocity:.3f}")
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
