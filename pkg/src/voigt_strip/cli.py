"""Command-line entry point.

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
4 verification verdict FAIL.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (DEFAULT_SWEEP, ErrorBoundParams, crossover_time, error_record, fit_envelope_constants,
                     geometric_constants, horizon_check, run_sweep, uniform_within)
from .errors import StripError, ValidationError
from .fields import decompose
from .green import DEFAULT_TOL, MODE_CAP, green_grid
from .io import config_hash, file_hash, write_field_csv, write_json, write_rows
from .model import Grid, Problem, StripConfig, problem_from_dict
from .oracle import FdScheme, solve_fd
from .fields import assemble_field, solve_full

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_FAIL = 0, 2, 3, 4

# f0 = 0 keeps r = O(t^2) at t = 0, so k_const does not depend on the time step
DEFAULT_PROBLEM = {"epsilon": 0.1, "c": 1.0, "l": math.pi, "t_max": 1.0, "f1": [[1, 1.0]]}

# option name -> default; None means "derived from the problem"
DEFAULTS = {
    "epsilon": None,
    "t_max": None,
    "nx": 33,
    "nt": 101,
    "tol": DEFAULT_TOL,
    "mode_cap": MODE_CAP,
    "alpha": 0.9,
    "gamma": 0.95,
    "epsilons": list(DEFAULT_SWEEP),
    "initial_velocity": "consistent",
    "k_const": None,
    "green_nx": 17,
    "green_nt": 64,
    "green_mode_cap": MODE_CAP,
    "x": None,
    "xi": None,
    "t": None,
    "levels": 4,
    "courant": 0.5,
}


@dataclass
class RunSpec:
    subcommand: str
    problem_path: str | None
    output_dir: str
    overrides: dict = field(default_factory=dict)

    def option(self, name):
        return self.overrides.get(name, DEFAULTS[name])

    def options(self) -> dict:
        return {k: self.option(k) for k in DEFAULTS}


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="voigt-strip", description="Damped strip problem: solver and bound checks.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", nargs="?", help="problem JSON file (built-in single-mode problem if omitted)")
    common.add_argument("-o", "--output-dir", default="out")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--t-max", type=float)
    common.add_argument("--nx", type=int)
    common.add_argument("--nt", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--mode-cap", type=int)

    s = sub.add_parser("simulate", parents=[common], help="u, w, r, F fields")
    s.add_argument("--initial-velocity", choices=["consistent", "zero"])
    for name, helptext in (("green", "G samples with tail certificates"), ("split", "G1 and G2 samples")):
        g = sub.add_parser(name, parents=[common], help=helptext)
        g.add_argument("--x", type=_floats, help="comma-separated x values")
        g.add_argument("--xi", type=_floats, help="comma-separated xi values")
        g.add_argument("--t", type=_floats, help="comma-separated times")
    for name, helptext in (("verify-g", "fit Green's function envelope constants"),
                           ("sweep", "remainder sweep plus envelope fits")):
        g = sub.add_parser(name, parents=[common], help=helptext)
        g.add_argument("--alpha", type=float)
        g.add_argument("--epsilons", type=_floats)
        g.add_argument("--green-nx", type=int)
        g.add_argument("--green-nt", type=int)
        g.add_argument("--green-mode-cap", type=int)
        if name == "sweep":
            g.add_argument("--gamma", type=float)
    r = sub.add_parser("verify-r", parents=[common], help="remainder estimate at one eps")
    r.add_argument("--alpha", type=float)
    r.add_argument("--gamma", type=float)
    r.add_argument("--k-const", type=float)
    o = sub.add_parser("oracle-compare", parents=[common], help="finite-difference refinement table")
    o.add_argument("--levels", type=int)
    o.add_argument("--courant", type=float)
    return p


def spec_from_args(argv=None) -> RunSpec:
    ns = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(ns).items()
                 if k in DEFAULTS and v is not None}
    return RunSpec(ns.subcommand, ns.problem, ns.output_dir, overrides)


def resolve_problem(spec: RunSpec) -> Problem:
    if spec.problem_path is None:
        doc = dict(DEFAULT_PROBLEM)
    else:
        import json
        try:
            doc = json.loads(Path(spec.problem_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read problem file: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValidationError("problem document must be a JSON object")
    for key in ("epsilon", "t_max"):
        if spec.overrides.get(key) is not None:
            doc[key] = spec.overrides[key]
    return problem_from_dict(doc)


def _check_ranges(spec: RunSpec) -> None:
    for name in ("nx", "nt", "green_nx", "green_nt", "levels"):
        if spec.option(name) < 2:
            raise ValidationError(f"--{name.replace('_', '-')} must be >= 2", field=name)
    for name in ("tol", "courant"):
        if not spec.option(name) > 0:
            raise ValidationError(f"--{name} must be positive", field=name)
    if spec.option("mode_cap") < 1 or spec.option("green_mode_cap") < 1:
        raise ValidationError("mode caps must be >= 1", field="mode_cap")


class Runner:
    def __init__(self, spec: RunSpec):
        self.spec = spec
        self.out = Path(spec.output_dir)
        self.artifacts: list[Path] = []
        self.extra: dict = {}
        self.verdict_ok = True

    def emit(self, path: Path) -> None:
        self.artifacts.append(path)

    def manifest(self, problem: Problem) -> dict:
        config = problem.to_json()
        return {
            "package_version": __version__,
            "subcommand": self.spec.subcommand,
            "config": config,
            "config_sha256": config_hash({"config": config, "options": self.spec.options()}),
            "options": self.spec.options(),
            "overrides": dict(sorted(self.spec.overrides.items())),
            "artifacts": {p.name: file_hash(p) for p in self.artifacts},
            **self.extra,
        }

    # subcommands ----------------------------------------------------------------

    def simulate(self, problem: Problem) -> None:
        grid = Grid(self.spec.option("nx"), self.spec.option("nt"), problem.cfg.l, problem.cfg.t_max)
        d = decompose(problem, grid, initial_velocity=self.spec.option("initial_velocity"))
        for name in ("u", "w", "r", "F"):
            self.emit(write_field_csv(self.out / f"{name}.csv", d.field(name)))
        self.extra["quadrature"] = {
            "w": d.w.error_estimate, "F": d.F.error_estimate, "r": d.r.error_estimate, "u": d.u.error_estimate,
            "max": d.quadrature_error,
        }
        self.extra["modes"] = list(problem.modes)
        self.extra["k"] = {"value": problem.k, "is_integer": problem.k_is_integer}
        # modal fields are exact in space: no series truncation is involved
        self.extra["truncation"] = {"kind": "exact finite sine series", "modes": list(problem.modes)}

    def _points(self, cfg: StripConfig):
        xs = self.spec.option("x") or np.linspace(0.0, cfg.l, 9).tolist()
        xis = self.spec.option("xi") or [cfg.l / 2]
        ts = self.spec.option("t") or [cfg.t_max]
        if any(t < 0 for t in ts):
            raise ValidationError("times must be >= 0", field="t")
        return xs, xis, sorted(ts)

    def _green_grids(self, cfg: StripConfig):
        xs, xis, ts = self._points(cfg)
        grids = [green_grid(cfg, xs, xis, t, self.spec.option("tol"), mode_cap=self.spec.option("mode_cap"))
                 for t in ts]
        self.extra["truncation"] = [gg.truncation.to_json() for gg in grids]
        return xs, xis, grids

    def green(self, problem: Problem) -> None:
        xs, xis, grids = self._green_grids(problem.cfg)
        rows = [(x, xi, gg.t, gg.g1[i, j] + gg.g2[i, j], gg.tail_bound, str(gg.truncation.n_max))
                for gg in grids for i, x in enumerate(xs) for j, xi in enumerate(xis)]
        self.emit(write_rows(self.out / "green.csv", ("x", "xi", "t", "value", "tail_bound", "n_max"), rows))

    def split(self, problem: Problem) -> None:
        xs, xis, grids = self._green_grids(problem.cfg)
        for name, attr in (("G1", "g1"), ("G2", "g2")):
            rows = [(x, xi, gg.t, getattr(gg, attr)[i, j])
                    for gg in grids for i, x in enumerate(xs) for j, xi in enumerate(xis)]
            self.emit(write_rows(self.out / f"{name}.csv", ("x", "xi", "t", "value"), rows))

    def verify_g(self, problem: Problem) -> None:
        cfg = problem.cfg
        alpha = self.spec.option("alpha")
        fit = fit_envelope_constants(cfg, self.spec.option("epsilons"), alpha, nx=self.spec.option("green_nx"),
                                     nt=self.spec.option("green_nt"), mode_cap=self.spec.option("green_mode_cap"))
        env = fit.envelope
        verdicts = {
            "green_constants_uniform": uniform_within(fit.trace("a0")) and uniform_within(fit.trace("m0")),
            "c1_uniform": uniform_within(fit.trace("c1")),
            "envelope_dominates": all(max(tr.max_ratio_g, tr.max_ratio_g2) <= 1.0 for tr in fit.traces),
        }
        verdicts = {k: "PASS" if v else "FAIL" for k, v in verdicts.items()}
        self.verdict_ok = all(v == "PASS" for v in verdicts.values())
        report = {
            "envelope": asdict(env),
            "traces": [asdict(tr) for tr in fit.traces],
            "crossover": [{"epsilon": tr.epsilon, "t_star": crossover_time(env, cfg.with_epsilon(tr.epsilon))}
                          for tr in fit.traces],
            "geometry": [dict(epsilon=e, **geometric_constants(cfg.with_epsilon(e)))
                         for e in self.spec.option("epsilons")],
            "verdicts": verdicts,
        }
        self.emit(write_json(self.out / "verify_g.json", report))

    def verify_r(self, problem: Problem) -> None:
        params = ErrorBoundParams(self.spec.option("alpha"), self.spec.option("gamma"), self.spec.option("k_const"))
        eta = params.eta
        rec = error_record(problem, eta, self.spec.option("nx"), self.spec.option("nt"))
        k_ref = params.k_const if params.k_const is not None else rec.k_const
        horizon = horizon_check(problem, params, k_ref, nx=self.spec.option("nx"))
        verdicts = {"extended_horizon": "PASS" if horizon["holds"] else "FAIL"}
        if params.k_const is not None:
            verdicts["k_const"] = "PASS" if rec.k_const <= params.k_const else "FAIL"
        self.verdict_ok = all(v == "PASS" for v in verdicts.values())
        report = {"eta": eta, "record": asdict(rec), "horizon": horizon, "verdicts": verdicts}
        self.emit(write_json(self.out / "verify_r.json", report))

    def sweep(self, problem: Problem) -> None:
        params = ErrorBoundParams(self.spec.option("alpha"), self.spec.option("gamma"))
        _ = params.eta  # validates exponents before any work
        report = run_sweep(problem, params, self.spec.option("epsilons"), nx=self.spec.option("nx"),
                           nt=self.spec.option("nt"), green_nx=self.spec.option("green_nx"),
                           green_nt=self.spec.option("green_nt"), mode_cap=self.spec.option("green_mode_cap"))
        self.verdict_ok = report.passed
        doc = report.to_json()
        self.emit(write_json(self.out / "sweep.json", doc))
        keys = ("epsilon", "sup_r", "norm_F", "k_const", "a0", "m0", "c1")
        self.emit(write_rows(self.out / "sweep.csv", keys, [[r[k] for k in keys] for r in doc["records"]]))

    def oracle_compare(self, problem: Problem) -> None:
        cfg = problem.cfg
        nx = self.spec.option("nx")
        rows = []
        errs = []
        for level in range(self.spec.option("levels")):
            scheme = FdScheme.with_courant(cfg, (nx - 1) * 2**level + 1, self.spec.option("courant"))
            grid = scheme.grid(cfg)
            fd = solve_fd(problem, scheme).values
            exact = assemble_field(solve_full(problem, grid), grid, "u").values
            err = float(np.max(np.abs(fd - exact)))
            order = math.log2(errs[-1] / err) if errs and err > 0 and errs[-1] > 0 else float("nan")
            errs.append(err)
            rows.append((str(grid.nx), str(grid.nt), grid.dx, grid.dt, err, order))
        self.emit(write_rows(self.out / "oracle_compare.csv", ("nx", "nt", "dx", "dt", "sup_error", "order"), rows))

    def run(self) -> int:
        _check_ranges(self.spec)
        problem = resolve_problem(self.spec)
        handler = getattr(self, self.spec.subcommand.replace("-", "_"))
        handler(problem)
        write_json(self.out / "manifest.json", self.manifest(problem))
        return EXIT_OK if self.verdict_ok else EXIT_FAIL


def run(spec: RunSpec) -> int:
    try:
        return Runner(spec).run()
    except StripError as exc:
        field_note = f" [{exc.field}]" if getattr(exc, "field", None) else ""
        print(f"error ({type(exc).__name__}){field_note}: {exc}", file=sys.stderr)
        return exc.exit_code


def main(argv=None) -> int:
    return run(spec_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())
