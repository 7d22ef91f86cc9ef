"""Experiment configs, report rows and the batch runners behind the CLI.

A config file is YAML holding either one experiment or a list under
``experiments:``; see ``configs/`` for complete examples::

    seed: 0
    tolerance: 1.0e-3
    experiments:
      - id: sphere-laplacian
        manifold: {name: sphere2}
        operator: {name: laplace_beltrami}
        section: {name: cos_theta}
        base_points: [[0.5, 1.0], [1.5, 1.0]]
        plan: {N: 64, steps: 256, epsilon_cap: 0.6}

Reports are CSV with one row per (experiment, base point, N, steps).  Wall
times live in a separate timings file so that reports are byte-for-byte
reproducible.
"""
from __future__ import annotations

import csv
import inspect
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, ReportIntegrityError, RiemFourierError
from .geodesics import MIN_STEPS, PROFILES, make_window
from .geometry import zoo
from .inversion import _invert, invert, make_plan
from .operators import OPERATORS, build_operator, direct_apply
from .properties import CHECKS, corrupt_christoffel
from .sections import SECTIONS, build_section

__all__ = [
    "PlanConfig",
    "ExperimentConfig",
    "Suite",
    "ReportRow",
    "Report",
    "load_suite",
    "parse_suite",
    "run_verify",
    "run_convergence",
    "run_breakdown_demo",
    "run_property_suite",
    "write_report",
    "read_report",
    "write_timings",
    "write_summary",
    "worker_count",
    "WORKERS_ENV",
]

WORKERS_ENV = "RIEMFOURIER_WORKERS"
SPHERE_THETA_MARGIN = 0.2
DEFAULT_TOLERANCE = 1e-3
DEFAULT_MANIFOLDS = (
    {"name": "euclidean", "params": {"n": 2}},
    {"name": "flat_torus", "params": {}},
    {"name": "sphere2", "params": {}},
    {"name": "poincare_disk", "params": {}},
    {"name": "surface_of_revolution", "params": {"profile": "catenoid"}},
)


# ---------------------------------------------------------------------------
# config

@dataclass(frozen=True)
class PlanConfig:
    N: int = 64
    steps: int = 256
    epsilon_cap: float = 1.0
    h_fd: float = 1e-5
    stencil: int = 2
    profile: str = "standard"
    within_chart: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    manifold: dict
    operator: dict
    section: dict
    base_points: tuple
    plan: PlanConfig = PlanConfig()
    sweeps: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE
    min_discrepancy: float | None = None
    expect: dict = field(default_factory=dict)
    seed: int = 0

    def build(self):
        """``(chart, operator, section)`` described by this experiment."""
        chart = zoo(self.manifold["name"], **self.manifold.get("params", {}))
        params = dict(self.section.get("params", {}))
        builder = SECTIONS[self.section["name"]]
        if "seed" in inspect.signature(builder).parameters and "seed" not in params:
            params["seed"] = self.seed
        u = build_section(chart, self.section["name"], **params)
        A = build_operator(chart, self.operator["name"], u.ttype, **self.operator.get("params", {}))
        return chart, A, u


@dataclass(frozen=True)
class Suite:
    experiments: tuple
    seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE
    props: dict = field(default_factory=dict)


def _mapping(value, path):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _number(value, path, kind=float):
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number, got a boolean")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected {kind.__name__}, got {value!r}") from None
    if kind is int and isinstance(value, float) and value != out:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return out


def _builder_spec(raw, path, registry):
    raw = _mapping(raw, path)
    if "name" not in raw:
        raise ConfigError(f"{path}.name", "missing")
    name = raw["name"]
    if registry is not None and name not in registry:
        raise ConfigError(f"{path}.name", f"unknown builder {name!r}; known: {sorted(registry)}")
    params = _mapping(raw.get("params"), f"{path}.params")
    return {"name": name, "params": params}


def _plan(raw, path):
    raw = _mapping(raw, path)
    known = PlanConfig.__dataclass_fields__
    for key in raw:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown plan field")
    plan = PlanConfig()
    values = {}
    for key in ("N", "steps", "stencil"):
        if key in raw:
            values[key] = _number(raw[key], f"{path}.{key}", int)
    for key in ("epsilon_cap", "h_fd"):
        if key in raw:
            values[key] = _number(raw[key], f"{path}.{key}")
    if "profile" in raw:
        values["profile"] = str(raw["profile"])
    if "within_chart" in raw:
        values["within_chart"] = bool(raw["within_chart"])
    plan = replace(plan, **values)
    _check_N(plan.N, f"{path}.N")
    _check_steps(plan.steps, f"{path}.steps")
    if not plan.epsilon_cap > 0:
        raise ConfigError(f"{path}.epsilon_cap", "must be positive")
    if not plan.h_fd > 0:
        raise ConfigError(f"{path}.h_fd", "must be positive")
    if plan.stencil not in (2, 4):
        raise ConfigError(f"{path}.stencil", "must be 2 or 4")
    if plan.profile not in PROFILES:
        raise ConfigError(f"{path}.profile", f"unknown profile; known: {sorted(PROFILES)}")
    return plan


def _check_N(N, path):
    if N < 2 or N % 2:
        raise ConfigError(path, f"must be even and >= 2, got {N}")


def _check_steps(steps, path):
    if steps < MIN_STEPS:
        raise ConfigError(path, f"must be >= {MIN_STEPS}, got {steps}")


def _sweeps(raw, path):
    raw = _mapping(raw, path)
    out = {}
    for key in ("N", "steps"):
        if key in raw:
            vals = raw[key]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{path}.{key}", "expected a non-empty list")
            check = _check_N if key == "N" else _check_steps
            vals = [_number(v, f"{path}.{key}[{i}]", int) for i, v in enumerate(vals)]
            for i, v in enumerate(vals):
                check(v, f"{path}.{key}[{i}]")
            out[key] = tuple(vals)
    for key, check in (("fixed_N", _check_N), ("fixed_steps", _check_steps)):
        if key in raw:
            out[key] = _number(raw[key], f"{path}.{key}", int)
            check(out[key], f"{path}.{key}")
    return out


def _experiment(raw, path, defaults):
    raw = _mapping(raw, path)
    exp_id = str(raw.get("id", path))
    manifold = _builder_spec(raw.get("manifold"), f"{path}.manifold", None)
    operator = _builder_spec(raw.get("operator"), f"{path}.operator", OPERATORS)
    section = _builder_spec(raw.get("section"), f"{path}.section", SECTIONS)
    plan = _plan(raw.get("plan"), f"{path}.plan")
    sweeps = _sweeps(raw.get("sweeps"), f"{path}.sweeps")
    tolerance = _number(raw.get("tolerance", defaults["tolerance"]), f"{path}.tolerance")
    min_disc = raw.get("min_discrepancy")
    if min_disc is not None:
        min_disc = _number(min_disc, f"{path}.min_discrepancy")
    expect = {k: _number(v, f"{path}.expect.{k}") for k, v in _mapping(raw.get("expect"), f"{path}.expect").items()}
    pts = raw.get("base_points")
    if not isinstance(pts, list) or not pts:
        raise ConfigError(f"{path}.base_points", "expected a non-empty list of points")
    exp = ExperimentConfig(
        id=exp_id, manifold=manifold, operator=operator, section=section, base_points=(),
        plan=plan, sweeps=sweeps, tolerance=tolerance, min_discrepancy=min_disc, expect=expect,
        seed=defaults["seed"],
    )
    try:
        chart = zoo(manifold["name"], **manifold["params"])
    except (RiemFourierError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.manifold", str(exc)) from None
    try:
        exp.build()
    except (RiemFourierError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{path}.operator/section", str(exc)) from None
    points = []
    for i, p in enumerate(pts):
        ppath = f"{path}.base_points[{i}]"
        if not isinstance(p, list) or len(p) != chart.dim:
            raise ConfigError(ppath, f"expected a list of {chart.dim} coordinates")
        p = tuple(_number(c, f"{ppath}[{j}]") for j, c in enumerate(p))
        if not chart.contains(np.array(p)):
            raise ConfigError(ppath, f"outside the {chart.name} chart")
        if manifold["name"] == "sphere2" and not (
            SPHERE_THETA_MARGIN <= p[0] <= np.pi - SPHERE_THETA_MARGIN
        ):
            raise ConfigError(ppath, f"sphere base points need theta in [{SPHERE_THETA_MARGIN}, "
                                     f"pi - {SPHERE_THETA_MARGIN}]")
        points.append(p)
    return replace(exp, base_points=tuple(points))


def parse_suite(raw, seed=None, tolerance=None):
    """Validate a parsed YAML document; ``seed``/``tolerance`` override it."""
    raw = _mapping(raw, "<root>")
    suite_seed = _number(raw.get("seed", 0), "seed", int) if seed is None else int(seed)
    suite_tol = _number(raw.get("tolerance", DEFAULT_TOLERANCE), "tolerance")
    defaults = {"seed": suite_seed, "tolerance": suite_tol}
    if "experiments" in raw:
        items = raw["experiments"]
        if not isinstance(items, list):
            raise ConfigError("experiments", "expected a list")
        exps = [_experiment(e, f"experiments[{i}]", defaults) for i, e in enumerate(items)]
    elif "manifold" in raw:
        exps = [_experiment(raw, "<root>", defaults)]
    else:
        exps = []
    ids = [e.id for e in exps]
    if len(set(ids)) != len(ids):
        raise ConfigError("experiments", "experiment ids must be unique")
    if tolerance is not None:
        exps = [replace(e, tolerance=float(tolerance)) for e in exps]
        suite_tol = float(tolerance)
    props = _props(raw.get("props"), "props")
    return Suite(tuple(exps), suite_seed, suite_tol, props)


def _props(raw, path):
    raw = _mapping(raw, path)
    manifolds = raw.get("manifolds", list(DEFAULT_MANIFOLDS))
    if not isinstance(manifolds, list) or not manifolds:
        raise ConfigError(f"{path}.manifolds", "expected a non-empty list")
    specs = []
    for i, m in enumerate(manifolds):
        spec = _builder_spec(m, f"{path}.manifolds[{i}]", None)
        try:
            zoo(spec["name"], **spec["params"])
        except (RiemFourierError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.manifolds[{i}]", str(exc)) from None
        specs.append(spec)
    samples = _mapping(raw.get("samples"), f"{path}.samples")
    for key in samples:
        if key not in CHECKS:
            raise ConfigError(f"{path}.samples.{key}", f"unknown check; known: {sorted(CHECKS)}")
    samples = {k: _number(v, f"{path}.samples.{k}", int) for k, v in samples.items()}
    fault = raw.get("fault")
    if fault not in (None, "corrupt_christoffel"):
        raise ConfigError(f"{path}.fault", "only 'corrupt_christoffel' is supported")
    return {"manifolds": specs, "samples": samples, "fault": fault}


def load_suite(path, seed=None, tolerance=None):
    """Read and validate a YAML config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from None
    return parse_suite(raw, seed=seed, tolerance=tolerance)


# ---------------------------------------------------------------------------
# report rows

@dataclass(frozen=True)
class ReportRow:
    experiment: str
    x_index: int
    x: tuple
    N: int
    steps: int
    value_inverted: np.ndarray
    value_direct: np.ndarray
    abs_error: float
    rel_error: float
    error: str = ""
    wall_time_ms: float = float("nan")

    @property
    def key(self):
        return (self.experiment, self.x_index, self.N, self.steps)

    @property
    def ok(self):
        return not self.error and math.isfinite(self.rel_error)


def _errors(inv, direct):
    if inv.size == 0:
        return float("nan"), float("nan")
    abs_error = float(np.max(np.abs(inv - direct)))
    scale = float(np.max(np.abs(direct)))
    return abs_error, abs_error / scale if scale > 0 else abs_error


@dataclass
class Report:
    kind: str
    rows: list
    violations: list
    summary: dict

    @property
    def exit_code(self):
        return 1 if self.violations else 0


def worker_count():
    """Worker processes from ``RIEMFOURIER_WORKERS`` (default: all CPUs)."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(WORKERS_ENV, f"expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(WORKERS_ENV, f"expected a positive integer, got {raw!r}")
    return n


def _map(fn, tasks, workers=None):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _evaluate(task):
    exp, x_index, N, steps, checked = task
    x = np.array(exp.base_points[x_index])
    start = time.perf_counter()
    inv = direct = np.zeros(0, dtype=complex)
    error = ""
    try:
        chart, A, u = exp.build()
        plan = exp.plan
        x = chart.check(x)
        window = make_window(chart, x, plan.epsilon_cap, within_chart=plan.within_chart, profile=plan.profile)
        qplan = make_plan(chart, x, window, N)
        if checked:
            value = invert(chart, A, u, x, window, qplan, steps)
        else:
            value = _invert(chart, A, u, x, window, qplan, steps)
        inv = value.comps.ravel()
        direct = direct_apply(chart, A, u, x, h=plan.h_fd, stencil=plan.stencil).comps.ravel()
    except (RiemFourierError, FloatingPointError, np.linalg.LinAlgError) as exc:
        inv = direct = np.zeros(0, dtype=complex)
        error = f"{type(exc).__name__}: {exc}"
    abs_error, rel_error = _errors(inv, direct)
    return ReportRow(
        experiment=exp.id, x_index=x_index, x=tuple(float(c) for c in exp.base_points[x_index]),
        N=N, steps=steps, value_inverted=inv, value_direct=direct,
        abs_error=abs_error, rel_error=rel_error, error=error,
        wall_time_ms=1e3 * (time.perf_counter() - start),
    )


def _run_tasks(suite, tasks, workers):
    order = {e.id: i for i, e in enumerate(suite.experiments)}
    rows = _map(_evaluate, tasks, workers)
    return sorted(rows, key=lambda r: (order[r.experiment], r.x_index, r.N, r.steps))


def _tolerance_violations(suite, rows):
    tol = {e.id: e.tolerance for e in suite.experiments}
    out = []
    for r in rows:
        where = f"{r.experiment} x[{r.x_index}] N={r.N} steps={r.steps}"
        if r.error:
            out.append(f"{where}: {r.error}")
        elif not r.rel_error <= tol[r.experiment]:
            out.append(f"{where}: rel_error {r.rel_error:.3e} > {tol[r.experiment]:.3e}")
    return out


def _max_errors(suite, rows):
    summary = {}
    for e in suite.experiments:
        mine = [r for r in rows if r.experiment == e.id]
        good = [r.rel_error for r in mine if r.ok]
        summary[e.id] = {
            "rows": len(mine),
            "failed_rows": len(mine) - len(good),
            "max_rel_error": max(good) if good else None,
            "tolerance": e.tolerance,
        }
    return summary


def run_verify(suite, workers=None):
    """Inversion against direct application at every base point."""
    tasks = [(e, i, e.plan.N, e.plan.steps, True) for e in suite.experiments for i in range(len(e.base_points))]
    rows = _run_tasks(suite, tasks, workers)
    return Report("verify", rows, _tolerance_violations(suite, rows), _max_errors(suite, rows))


def _orders(values, errors):
    """Observed orders ``log(e_k / e_k+1) / log(v_k+1 / v_k)``."""
    out = []
    for (v0, e0), (v1, e1) in zip(zip(values, errors), zip(values[1:], errors[1:])):
        if e1 == 0:
            out.append(float("inf"))
        elif e0 == 0:
            out.append(float("-inf"))
        else:
            out.append(math.log(e0 / e1) / math.log(v1 / v0))
    return out


def run_convergence(suite, workers=None):
    """N sweep at fixed steps, then steps sweep at fixed N.

    Per experiment ``expect`` may hold ``min_N_ratio`` (every consecutive
    error ratio of the N sweep, unless the finer error is below ``floor``)
    and ``min_steps_order`` (every observed order of the steps sweep).
    """
    tasks, plan_of = [], {}
    for e in suite.experiments:
        n_steps = e.sweeps.get("fixed_steps", e.plan.steps)
        s_N = e.sweeps.get("fixed_N", e.plan.N)
        pairs = {(N, n_steps) for N in e.sweeps.get("N", ())} | {(s_N, s) for s in e.sweeps.get("steps", ())}
        plan_of[e.id] = (n_steps, s_N)
        for i in range(len(e.base_points)):
            tasks += [(e, i, N, s, True) for N, s in sorted(pairs)]
    rows = _run_tasks(suite, tasks, workers)
    violations, summary = [], {}
    for e in suite.experiments:
        n_steps, s_N = plan_of[e.id]
        per_point = []
        for i in range(len(e.base_points)):
            mine = {(r.N, r.steps): r for r in rows if r.experiment == e.id and r.x_index == i}
            where = f"{e.id} x[{i}]"
            for r in mine.values():
                if r.error:
                    violations.append(f"{where} N={r.N} steps={r.steps}: {r.error}")
            Ns = list(e.sweeps.get("N", ()))
            n_err = [mine[(N, n_steps)].abs_error for N in Ns]
            ratios = [a / b if b > 0 else float("inf") for a, b in zip(n_err, n_err[1:])]
            ss = list(e.sweeps.get("steps", ()))
            s_err = [mine[(s_N, s)].abs_error for s in ss]
            orders = _orders(ss, s_err)
            per_point.append({
                "x_index": i,
                "N_sweep": {"steps": n_steps, "N": Ns, "abs_error": n_err, "ratios": ratios},
                "steps_sweep": {"N": s_N, "steps": ss, "abs_error": s_err, "orders": orders},
            })
            floor = e.expect.get("floor", 0.0)
            if "min_N_ratio" in e.expect:
                for k, ratio in enumerate(ratios):
                    if n_err[k + 1] > floor and not ratio >= e.expect["min_N_ratio"]:
                        violations.append(f"{where}: error ratio N={Ns[k]}->{Ns[k + 1]} is {ratio:.3g} "
                                          f"< {e.expect['min_N_ratio']:g}")
            if "min_steps_order" in e.expect:
                for k, order in enumerate(orders):
                    if not order >= e.expect["min_steps_order"]:
                        violations.append(f"{where}: observed order steps={ss[k]}->{ss[k + 1]} is {order:.3g} "
                                          f"< {e.expect['min_steps_order']:g}")
        summary[e.id] = per_point
    return Report("converge", rows, violations, summary)


def run_breakdown_demo(suite, workers=None):
    """Apply the inversion formula beyond order 2 and record the discrepancy.

    Rows use the unguarded inversion.  An experiment passes when every
    row's relative discrepancy is within ``tolerance`` or, when
    ``min_discrepancy`` is set, at least that large.
    """
    tasks = []
    for e in suite.experiments:
        for i in range(len(e.base_points)):
            tasks += [(e, i, N, e.plan.steps, False) for N in e.sweeps.get("N", (e.plan.N,))]
    rows = _run_tasks(suite, tasks, workers)
    violations, summary = [], {}
    for e in suite.experiments:
        mine = [r for r in rows if r.experiment == e.id]
        for r in mine:
            where = f"{e.id} x[{r.x_index}] N={r.N}"
            if r.error:
                violations.append(f"{where}: {r.error}")
            elif e.min_discrepancy is not None:
                if not r.rel_error >= e.min_discrepancy:
                    violations.append(f"{where}: discrepancy {r.rel_error:.3e} < {e.min_discrepancy:.3e}")
            elif not r.rel_error <= e.tolerance:
                violations.append(f"{where}: discrepancy {r.rel_error:.3e} > {e.tolerance:.3e}")
        summary[e.id] = {
            "expect": "gap" if e.min_discrepancy is not None else "exact",
            "threshold": e.min_discrepancy if e.min_discrepancy is not None else e.tolerance,
            "discrepancy": {f"x[{r.x_index}] N={r.N}": r.rel_error for r in mine},
        }
    return Report("breakdown", rows, violations, summary)


def _property_task(task):
    name, m_index, spec, samples, seed, fault = task
    chart = zoo(spec["name"], **spec["params"])
    if fault == "corrupt_christoffel":
        chart = corrupt_christoffel(chart)
    fn, tol, _ = CHECKS[name]
    rng = np.random.default_rng([seed, list(CHECKS).index(name), m_index])
    try:
        residuals, error = fn(chart, rng, samples=samples), ""
    except (RiemFourierError, FloatingPointError, np.linalg.LinAlgError, RuntimeError) as exc:
        residuals, error = [], f"{type(exc).__name__}: {exc}"
    failures = sum(1 for r in residuals if not r < tol) + (1 if error else 0)
    return {
        "check": name,
        "manifold": chart.name,
        "samples": len(residuals),
        "failures": failures,
        "worst_residual": max(residuals) if residuals else None,
        "tolerance": tol,
        "error": error,
    }


def run_property_suite(suite, workers=None, fault=None):
    """Seeded checks of every invariant on every configured manifold."""
    props = suite.props or _props(None, "props")
    fault = fault or props.get("fault")
    tasks = []
    for name, (_, _, default_samples) in CHECKS.items():
        n = props["samples"].get(name, default_samples)
        tasks += [(name, i, spec, n, suite.seed, fault) for i, spec in enumerate(props["manifolds"])]
    results = _map(_property_task, tasks, workers)
    failures = sum(r["failures"] for r in results)
    summary = {
        "seed": suite.seed,
        "fault": fault,
        "checks": len(results),
        "samples": sum(r["samples"] for r in results),
        "failures": failures,
        "results": results,
    }
    violations = [f"{r['check']} on {r['manifold']}: {r['failures']} failure(s), worst {r['worst_residual']}"
                  + (f" ({r['error']})" if r["error"] else "")
                  for r in results if r["failures"]]
    return Report("props", [], violations, summary)


# ---------------------------------------------------------------------------
# CSV

BASE_COLUMNS = ["experiment", "x_index", "x", "N", "steps", "error", "abs_error", "rel_error"]


def _fmt(v):
    return repr(float(v))


def write_report(rows, path):
    """Write rows as CSV; complex fibers become ``re``/``im`` column pairs."""
    width = max((max(r.value_inverted.size, r.value_direct.size) for r in rows), default=0)
    header = list(BASE_COLUMNS)
    for prefix in ("inverted", "direct"):
        for k in range(width):
            header += [f"{prefix}_re_{k}", f"{prefix}_im_{k}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            line = [r.experiment, r.x_index, " ".join(_fmt(c) for c in r.x), r.N, r.steps, r.error,
                    _fmt(r.abs_error), _fmt(r.rel_error)]
            for values in (r.value_inverted, r.value_direct):
                for k in range(width):
                    line += [_fmt(values[k].real), _fmt(values[k].imag)] if k < values.size else ["", ""]
            writer.writerow(line)


def write_timings(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["experiment", "x_index", "N", "steps", "wall_time_ms"])
        for r in rows:
            writer.writerow([r.experiment, r.x_index, r.N, r.steps, f"{r.wall_time_ms:.3f}"])


def _fiber(record, prefix):
    values, k = [], 0
    while f"{prefix}_re_{k}" in record and record[f"{prefix}_re_{k}"] != "":
        values.append(complex(float(record[f"{prefix}_re_{k}"]), float(record[f"{prefix}_im_{k}"])))
        k += 1
    return np.array(values, dtype=complex)


def read_report(path):
    """Load a report and recompute every ``abs_error`` from its value columns.

    Raises :class:`ReportIntegrityError` when a stored error disagrees.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, record in enumerate(csv.DictReader(fh), start=2):
            inv, direct = _fiber(record, "inverted"), _fiber(record, "direct")
            abs_error, rel_error = _errors(inv, direct)
            stored = float(record["abs_error"])
            if not (stored == abs_error or (math.isnan(stored) and math.isnan(abs_error))):
                raise ReportIntegrityError(f"{path}:{line_no}: abs_error {stored!r} does not match "
                                           f"the value columns ({abs_error!r})")
            rows.append(ReportRow(
                experiment=record["experiment"], x_index=int(record["x_index"]),
                x=tuple(float(c) for c in record["x"].split()), N=int(record["N"]),
                steps=int(record["steps"]), value_inverted=inv, value_direct=direct,
                abs_error=stored, rel_error=float(record["rel_error"]), error=record["error"],
            ))
    return rows


def write_summary(summary, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(summary, fh, sort_keys=False, default_flow_style=None)
