"""Command-line front end.

``fracdual COMMAND [--config PATH] [overrides]`` validates the config, runs
the pipeline and writes everything under ``OUTPUT/COMMAND/``: CSV tables,
two-column plot-data files (``*.dat``), ``reports.json`` and a ``MANIFEST``.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 verdict (or
``--check``) mismatch, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import math
import os
import sys
import tempfile
import threading
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from ._accel import backend_name
from .config import Command, ConfigError, RunConfig, build_config, load_config_dict, set_path
from .core import Conclusion, ExperimentReport, FunctionDescriptor, HistoryField, Hypothesis
from .frac_space import verify_ball_constancy
from .principles import (
    antisym_averaging_experiment,
    appendix_tables,
    averaging_effect_experiment,
    check_max_principle,
    counterexample_experiment,
    moving_plane_scan,
    narrow_region_experiment,
    planted_dip_profile,
    random_antisymmetric_problem,
    random_max_principle_problem,
    static_history,
)
from .solver import run_antisymmetric, run_ivp
from .verify import eigenfunction_rows, sine_symbol_errors

__all__ = ["main", "run", "RunWriter", "worker_count", "compare_runs"]

OK, PARSE, VALIDATION, MISMATCH, NUMERICAL = 0, 2, 3, 4, 5

# flag -> (dotted config path, type)
OVERRIDES: dict[str, tuple[str, Callable]] = {
    "alpha": ("problem.frac_params.alpha", float),
    "s": ("problem.frac_params.s", float),
    "R": ("experiment.R", float),
    "lambda_max": ("experiment.lambda_max", float),
    "l": ("experiment.l", float),
    "dt": ("problem.solve.dt", float),
    "nx": ("problem.grid.n", int),
}


def worker_count() -> int:
    """Worker pool size: ``FRACDUAL_THREADS`` when set to a positive integer, else the CPU count."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get("FRACDUAL_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            return cpus
        if n >= 1:
            return min(n, cpus)
    return cpus


# ---------------------------------------------------------------------------
# output


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


class RunWriter:
    """Single writer for one run directory; records every file for the MANIFEST."""

    def __init__(self, root: Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self._lock = threading.Lock()

    def _record(self, name: str) -> Path:
        with self._lock:
            if name not in self.files:
                self.files.append(name)
        return self.root / name

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self._record(name)
        with self._lock, open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        return path

    def json(self, name: str, obj: Any) -> Path:
        path = self._record(name)
        with self._lock:
            path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        return path

    def series(self, name: str, xs: Iterable[Any], ys: Iterable[Any], labels: tuple[str, str] = ("t", "value")) -> Path:
        """Two-column whitespace-separated plot data."""
        path = self._record(name)
        lines = [f"# {labels[0]} {labels[1]}"]
        lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in zip(xs, ys)]
        with self._lock:
            path.write_text("\n".join(lines) + "\n")
        return path

    def trajectory(self, name: str, hist: HistoryField, stride: int | None, meta: dict) -> Path:
        """``level,t,node,x,u`` rows plus a ``.meta.json`` sidecar."""
        n = hist.n_levels
        k = stride or max(1, math.ceil((n - 1) / 500))
        keep = list(range(0, n, k))
        if keep[-1] != n - 1:
            keep.append(n - 1)
        x = hist.grid.nodes

        def rows():
            for j in keep:
                t = hist.t_start + j * hist.dt
                for i, u in enumerate(hist.levels[j]):
                    yield (j, float(t), i, float(x[i]), float(u))

        path = self.csv(f"{name}.csv", ("level", "t", "node", "x", "u"), rows())
        self.json(f"{name}.meta.json", {**meta, "level_stride": k, "levels_written": len(keep)})
        return path

    def manifest(self, complete: bool, error: str | None = None) -> Path:
        entries = []
        for name in self.files:
            p = self.root / name
            if p.exists():
                data = p.read_bytes()
                entries.append({"path": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})
            else:
                entries.append({"path": name, "bytes": None, "sha256": None})
        body = {"complete": complete, "error": error, "files": entries}
        path = self.root / "MANIFEST"
        path.write_text(json.dumps(body, indent=2) + "\n")
        return path


def _meta(cfg: RunConfig, **extra: Any) -> dict:
    """Run metadata; the only place timestamps are written."""
    return {
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "version": __version__,
        "backend": backend_name(),
        "config": cfg.echo(),
        **extra,
    }


# ---------------------------------------------------------------------------
# pipelines


def _simple_report(name: str, description: str, extremal: float, ok: bool, tol: float, data: dict) -> ExperimentReport:
    return ExperimentReport(
        name, (), Conclusion(description, extremal, "holds" if ok else "violated"), tolerance=tol, data=data
    )


def _cmd_operators(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    ex = cfg.experiment
    params = cfg.problem.frac_params.build()
    eig_f = pool.submit(eigenfunction_rows, ex.alphas, ex.rates)
    ball_f = pool.submit(verify_ball_constancy, 1.0, params, None, 0.005, (1.0, 2.0))
    sine_f = pool.submit(sine_symbol_errors, params.s)
    eig, ball, sine = eig_f.result(), ball_f.result(), sine_f.result()

    out.csv(
        "eigenfunction.csv",
        ("alpha", "rate", "t", "value", "exact", "rel_error"),
        ((r.alpha, r.rate, r.t, r.value, r.exact, r.rel_error) for r in eig),
    )
    worst = float(max(r.rel_error for r in eig))
    reports = [_simple_report("eigenfunction", "relative error of d^alpha e^(rate t)", worst, worst < 1e-3, 1e-3, {"max_rel_error": worst})]

    out.series("ball_barrier.dat", ball.probes, ball.values, ("x", "value"))
    ratio = (ball.scaled_means[2.0] / 2.0 ** (2 * params.s)) / ball.scaled_means[1.0]
    ratio_err = abs(ratio / 2.0 ** (-2 * params.s) - 1.0)
    reports.append(
        _simple_report(
            "ball_constancy",
            "relative spread of (-Delta)^s phi inside the ball",
            ball.rel_spread,
            ball.rel_spread < 0.02 and ratio_err < 0.02,
            0.02,
            {"mean": ball.mean, "rel_spread": ball.rel_spread, "radius_ratio": ratio, "radius_ratio_error": ratio_err},
        )
    )

    out.csv("sine_symbol.csv", ("x", "value", "exact"), sine)
    serr = max(abs(v - e) / max(abs(e), 1e-300) for _, v, e in sine)
    reports.append(_simple_report("sine_symbol", "relative error of (-Delta)^s sin against sin", serr, serr < 0.01, 0.01, {"max_rel_error": serr}))
    return reports


def _random_suite(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    n = cfg.experiment.random_runs
    rng = np.random.default_rng(cfg.seed)
    # draw every instance up front so results do not depend on scheduling
    plain = [random_max_principle_problem(rng) for _ in range(n)]
    anti = [random_antisymmetric_problem(rng) for _ in range(n)]

    def one_plain(pr):
        res = run_ivp(pr)
        rep = check_max_principle(res.history, (pr.t_start, float(res.history.times[-1])), params=pr.params)
        return pr, rep.verdict, float(rep.data["min_u"])

    def one_anti(pr):
        w, _ = run_antisymmetric(pr)
        g = pr.grid
        inside = g.interior_mask
        return pr, "holds" if w.levels[:, inside].min() >= -1e-10 else "violated", float(w.levels[:, inside].min())

    rows, worst, bad = [], math.inf, 0
    for kind, fn, probs in (("plain", one_plain, plain), ("antisymmetric", one_anti, anti)):
        for k, (pr, verdict, mn) in enumerate(pool.map(fn, probs)):
            rows.append((kind, k, pr.params.alpha, pr.params.s, pr.grid.n, pr.solve.n_steps, mn, verdict))
            worst = min(worst, mn)
            bad += verdict != "holds"
    out.csv("random_runs.csv", ("kind", "run", "alpha", "s", "nodes", "n_steps", "min_u", "verdict"), rows)
    hyps = (Hypothesis("f = 0 with nonnegative past and exterior data (by construction)", 0.0, True),)
    verdict = "holds" if bad == 0 and worst >= -1e-10 else "violated"
    return [
        ExperimentReport(
            "random_max_principle",
            hyps,
            Conclusion("min u >= -1e-10 over all randomized runs", worst, verdict),
            tolerance=1e-10,
            data={"runs": 2 * n, "failures": bad, "seed": cfg.seed},
        )
    ]


def _cmd_simulate(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    if cfg.experiment.random_runs:
        return _random_suite(cfg, out, pool)
    problem = cfg.problem.build()
    res = run_ivp(problem)
    hist = res.history
    out.trajectory("trajectory", hist, cfg.experiment.csv_stride, _meta(cfg, diagnostics=res.diagnostics))
    out.series("final_profile.dat", hist.grid.nodes, hist.levels[-1], ("x", "u"))
    out.series("min_over_time.dat", hist.times, hist.levels.min(axis=1), ("t", "min_u"))
    mn = float(hist.levels.min())
    finite = bool(np.all(np.isfinite(hist.levels)))
    return [
        _simple_report(
            "simulate",
            "trajectory is finite",
            mn,
            finite,
            0.0,
            {"final_increment": res.diagnostics["final_increment"], "min_u": mn, "max_u": float(hist.levels.max())},
        )
    ]


def _cmd_counterexample(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    ex = cfg.experiment
    params = cfg.problem.frac_params.build()
    tq = cfg.problem.solve.time_quadrature.build()
    rep = counterexample_experiment(params, ex.R, ex.n_grid, R_sweep=ex.R_sweep, time_cfg=tq)
    d = rep.data
    out.series("counterexample_dalpha.dat", d["series_t"], d["series_dalpha"], ("t", "dalpha_u"))
    out.series("counterexample_u.dat", d["series_t"], d["series_u"], ("t", "u"))
    out.csv("counterexample_by_R.csv", ("R", "min_dalpha"), sorted(d["min_dalpha_by_R"].items()))
    print(f"min d^alpha u over (0, 2pi]: {d['min_dalpha']!r}")
    print(f"min u: {d['min_u']!r} at t = {d['min_u_time']!r}")
    return [rep]


def _cmd_averaging(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    ex = cfg.experiment
    params = cfg.problem.frac_params.build()
    rep = averaging_effect_experiment(
        ex.D, ex.x0, ex.r, ex.C0, ex.eps, params, t0=ex.t0, nodes_per_r=ex.nodes_per_r, n_steps=ex.n_steps, distances=ex.distances
    )
    reports = [rep]
    sweep = rep.data.get("sweep") or []
    if sweep:
        out.series("averaging_sweep.dat", [r["distance"] for r in sweep], [r["C1"] for r in sweep], ("distance", "C1"))
        mono = rep.data.get("sweep_monotone")
        reports.append(
            _simple_report(
                "averaging_sweep",
                "C1 nonincreasing in the distance of D",
                min(r["C1"] for r in sweep),
                bool(mono),
                0.0,
                {"sweep": sweep},
            )
        )
    if ex.lam is not None:
        reports.append(
            antisym_averaging_experiment(
                ex.D, ex.x0, ex.r, ex.C0, ex.eps, ex.lam, params, t0=ex.t0, nodes_per_r=ex.nodes_per_r, n_steps=ex.n_steps
            )
        )
    print(f"delta = {rep.data['C1']!r}, u(x0, t0) = {rep.data['u_center']!r}")
    return reports


def _cmd_narrow(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    ex = cfg.experiment
    params = cfg.problem.frac_params.build()
    lam = 0.0 if ex.lam is None else ex.lam
    rep = narrow_region_experiment(ex.l, lam, FunctionDescriptor.constant(ex.c), params=params, l_sweep=ex.l_sweep)
    rows = sorted(rep.data["rows"], key=lambda r: r["l"])
    out.csv(
        "narrow_region.csv",
        ("l", "min_w", "sup_c", "lowest_eigenvalue", "narrow", "holds"),
        ((r["l"], r["min_w"], r["sup_c"], r["lowest_eigenvalue"], r["narrow"], r["holds"]) for r in rows),
    )
    out.series("narrow_region.dat", [r["l"] for r in rows], [r["min_w"] for r in rows], ("l", "min_w"))
    print(f"empirical l* = {rep.data['l_star']!r}")
    return [rep]


def _cmd_moving_plane(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    ex = cfg.experiment
    problem = cfg.problem.build()
    g = problem.grid
    if g.domain_kind != "half_space_truncation":
        raise ValueError("moving-plane needs a half_space_truncation grid")
    res = run_ivp(problem)
    hist = res.history
    out.trajectory("trajectory", hist, ex.csv_stride, _meta(cfg, diagnostics={"final_increment": res.diagnostics["final_increment"]}))
    out.series("final_profile.dat", g.nodes, hist.levels[-1], ("x", "u"))
    lam_max = ex.lambda_max if ex.lambda_max is not None else 0.5 * (g.x_min + g.x_max)
    half = 0.5 * g.h
    lams = [g.x_min + k * half for k in range(1, int(math.floor((lam_max - g.x_min) / half + 1e-9)) + 1)]
    rep = moving_plane_scan(hist, lams)
    rows = rep.data["rows"]
    out.csv("scan.csv", ("lambda", "min_w", "argmin_x", "argmin_t"), ((r["lambda"], r["min_w"], r["argmin_x"], r["argmin_t"]) for r in rows))
    out.series("scan.dat", [r["lambda"] for r in rows], [r["min_w"] for r in rows], ("lambda", "min_w"))
    reports = [rep]
    print(f"lambda0 = {rep.data['lambda0']!r}, min forward difference = {rep.data['min_forward_difference']!r}")
    if ex.negative_control:
        ctrl = static_history(g, planted_dip_profile(g.nodes))
        neg = moving_plane_scan(ctrl, lams)
        out.csv(
            "scan_negative_control.csv",
            ("lambda", "min_w", "argmin_x", "argmin_t"),
            ((r["lambda"], r["min_w"], r["argmin_x"], r["argmin_t"]) for r in neg.data["rows"]),
        )
        reports.append(_renamed(neg, "moving_plane_negative_control"))
        print(f"negative control: lambda0 = {neg.data['lambda0']!r}, dip at {neg.data['dip_location']!r}")
    return reports


def _renamed(rep: ExperimentReport, name: str) -> ExperimentReport:
    return dataclasses.replace(rep, name=name)


def _cmd_appendix(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    ex = cfg.experiment
    s = cfg.problem.frac_params.s
    tq = cfg.problem.solve.time_quadrature.build()
    tables = appendix_tables(ex.alphas, ex.r, s, tq)
    b, sc = tables["cutoff_bounds"], tables["scaling_errors"]
    out.csv("cutoff_bounds.csv", ("alpha", "sup_abs", "bound", "strict"), ((r["alpha"], r["sup_abs"], r["bound"], r["strict"]) for r in b))
    out.csv("scaling_errors.csv", ("alpha", "lambda", "error"), ((r["alpha"], r["lambda"], r["error"]) for r in sc))
    worst_gap = min(r["bound"] - r["sup_abs"] for r in b)
    worst_err = max(r["error"] for r in sc)
    for r in b:
        print(f"alpha={r['alpha']!r}: sup|d^alpha eta| = {r['sup_abs']!r} < bound {r['bound']!r}")
    return [
        _simple_report("cutoff_bound", "sup |d^alpha eta| strictly below the bound", worst_gap, all(r["strict"] for r in b), 0.0, tables),
        _simple_report("scaling_identity", "max relative error of the rescaling identity", worst_err, worst_err < 1e-4, 1e-4, {}),
    ]


def _cmd_report(cfg: RunConfig, out: RunWriter, pool: ThreadPoolExecutor) -> list[ExperimentReport]:
    base = Path(cfg.output_dir)
    rows = []
    for path in sorted(base.glob("*/reports.json")):
        if path.parent == out.root:
            continue
        for rep in json.loads(path.read_text()):
            c = rep["conclusion"]
            rows.append((path.parent.name, rep["name"], c["verdict"], c["extremal_value"]))
    out.csv("summary.csv", ("command", "experiment", "verdict", "extremal_value"), rows)
    for r in rows:
        print(f"{r[0]:>16}  {r[1]:<32} {r[2]:<13} {r[3]}")
    if not rows:
        print(f"no reports found under {base}")
    return []


PIPELINES: dict[str, Callable[[RunConfig, RunWriter, ThreadPoolExecutor], list[ExperimentReport]]] = {
    "operators": _cmd_operators,
    "simulate": _cmd_simulate,
    "counterexample": _cmd_counterexample,
    "averaging": _cmd_averaging,
    "narrow-region": _cmd_narrow,
    "moving-plane": _cmd_moving_plane,
    "verify-appendix": _cmd_appendix,
    "report": _cmd_report,
}


# ---------------------------------------------------------------------------
# orchestration


def _qualified(exc: BaseException) -> str:
    """``fracdual.<module>: <Type>: message`` using the deepest package frame."""
    where = "fracdual"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("fracdual"):
            where = mod
    return f"{where}: {type(exc).__name__}: {exc}"


def _verdict_ok(rep: ExperimentReport, expectations: dict[str, str]) -> tuple[bool, str]:
    want = expectations.get(rep.name, "holds")
    return rep.verdict == want, want


def run(cfg: RunConfig, root: Path | None = None) -> int:
    """Execute ``cfg`` and write its outputs; returns the exit code."""
    command = cfg.command.value if isinstance(cfg.command, Command) else str(cfg.command)
    out = RunWriter(Path(root) if root is not None else Path(cfg.output_dir) / command)
    t0 = time.perf_counter()
    try:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            reports = PIPELINES[command](cfg, out, pool)
    except Exception as exc:  # surfaced with the failing module
        msg = _qualified(exc)
        print(f"error: {msg}", file=sys.stderr)
        out.json("run.meta.json", _meta(cfg, error=msg, seconds=time.perf_counter() - t0))
        out.manifest(False, msg)
        return NUMERICAL

    out.json("reports.json", [r.to_dict() for r in reports])
    code = OK
    for rep in reports:
        ok, want = _verdict_ok(rep, cfg.expectations)
        mark = "ok" if ok else "MISMATCH"
        print(f"[{mark}] {rep.name}: {rep.verdict} (expected {want}), extremal value {float(rep.conclusion.extremal_value)!r}")
        if not ok:
            code = MISMATCH
    out.json("run.meta.json", _meta(cfg, seconds=time.perf_counter() - t0, exit_code=code))
    out.manifest(True)
    return code


# ---------------------------------------------------------------------------
# --check


def _numeric(v: Any) -> float | None:
    if isinstance(v, bool):
        return None
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            return None
    return None


def _close(a: Any, b: Any, rtol: float, atol: float) -> bool:
    x, y = _numeric(a), _numeric(b)
    if x is None or y is None:
        return a == b
    if math.isnan(x) or math.isnan(y):
        return math.isnan(x) and math.isnan(y)
    if math.isinf(x) or math.isinf(y):
        return x == y
    return abs(x - y) <= atol + rtol * abs(y)


def _diff_json(a: Any, b: Any, rtol: float, atol: float, path: str = "") -> list[str]:
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a) != set(b):
            return [f"{path or '<root>'}: keys differ"]
        return [m for k in a for m in _diff_json(a[k], b[k], rtol, atol, f"{path}.{k}" if path else str(k))]
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{path}: length {len(a)} != {len(b)}"]
        return [m for i, (x, y) in enumerate(zip(a, b)) for m in _diff_json(x, y, rtol, atol, f"{path}[{i}]")]
    return [] if _close(a, b, rtol, atol) else [f"{path}: {a!r} != {b!r}"]


def _table(path: Path) -> list[list[str]]:
    if path.suffix == ".dat":
        return [ln.split() for ln in path.read_text().splitlines()]
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def compare_runs(stored: Path, fresh: Path, rtol: float, atol: float) -> list[str]:
    """Differences between two run directories (metadata sidecars are skipped)."""
    man = json.loads((stored / "MANIFEST").read_text())
    problems = []
    for entry in man["files"]:
        name = entry["path"]
        if name.endswith(".meta.json"):
            continue
        a, b = fresh / name, stored / name
        if not a.exists():
            problems.append(f"{name}: missing from the fresh run")
            continue
        if not b.exists():
            problems.append(f"{name}: missing from the stored run")
            continue
        if name.endswith(".json"):
            diffs = _diff_json(json.loads(a.read_text()), json.loads(b.read_text()), rtol, atol)
        else:
            ta, tb = _table(a), _table(b)
            if len(ta) != len(tb):
                diffs = [f"{len(ta)} rows != {len(tb)} rows"]
            else:
                diffs = [
                    f"row {i}: {ra} != {rb}"
                    for i, (ra, rb) in enumerate(zip(ta, tb))
                    if len(ra) != len(rb) or not all(_close(x, y, rtol, atol) for x, y in zip(ra, rb))
                ]
        problems += [f"{name}: {d}" for d in diffs[:5]]
    return problems


def _check(cfg: RunConfig) -> int:
    command = cfg.command.value
    stored = Path(cfg.output_dir) / command
    if not (stored / "MANIFEST").exists():
        print(f"error: no stored run at {stored} (MANIFEST missing)", file=sys.stderr)
        return PARSE
    with tempfile.TemporaryDirectory(prefix="fracdual-check-") as tmp:
        code = run(cfg, Path(tmp))
        if code == NUMERICAL:
            return code
        problems = compare_runs(stored, Path(tmp), cfg.check.rtol, cfg.check.atol)
    for p in problems:
        print(f"[check] {p}")
    print(f"check against {stored}: {'ok' if not problems else f'{len(problems)} difference(s)'}")
    return MISMATCH if problems or code else OK


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracdual", description="Dual fractional operator solver and verification runs.")
    p.add_argument("command", nargs="?", choices=[c.value for c in Command], help="pipeline to run (overrides the config)")
    p.add_argument("--config", type=Path, help="YAML or JSON run config")
    p.add_argument("--output", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="seed for randomized suites")
    p.add_argument("--check", action="store_true", help="compare a fresh run with the stored outputs")
    p.add_argument("--alpha", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--lambda-max", dest="lambda_max", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--nx", type=int)
    return p


def _raw_config(args: argparse.Namespace) -> dict[str, Any]:
    data = load_config_dict(args.config) if args.config else {}
    if args.command:
        data["command"] = args.command
    if "command" not in data:
        raise ConfigError("no command given (positional COMMAND or 'command' in the config)", 3, ("command: missing",))
    if args.output is not None:
        data["output_dir"] = str(args.output)
    if args.seed is not None:
        data["seed"] = args.seed
    for flag, (path, _) in OVERRIDES.items():
        v = getattr(args, flag)
        if v is not None:
            set_path(data, path, v)
    return data


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(_raw_config(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.check:
        return _check(cfg)
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
