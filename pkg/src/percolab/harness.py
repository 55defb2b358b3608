"""Seeded, replicated experiments tying simulation to theory.

Each experiment runs deterministic replicates (run i draws its own
generator from seed XOR global-run-index), compares observables with
ODE, fixed-point or closed-form predictions, and writes one flat CSV.
Reruns with the same config are byte-identical; timestamps live in a
separate .meta.json sidecar.
"""
from __future__ import annotations

import datetime as _dt
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import InvalidConfigError, NumericalFailureError
from .giant import bf_growth_prediction, solve_rho, supercritical_bounds
from .ledger import SizeDistribution
from .ode import critical_trajectory, find_tc, sbar_k
from .processes import (
    InitialGraphSpec,
    ProcessKind,
    Simulation,
    poisson_edge_count,
    run_process,
)

__all__ = [
    "CSV_COLUMNS",
    "ResultRow",
    "CheckResult",
    "ExperimentConfig",
    "ExperimentOutcome",
    "run_experiment",
    "write_csv",
    "write_meta",
    "run_config",
]

CSV_COLUMNS = [
    "experiment", "run_id", "seed", "n", "process", "t", "delta",
    "observable", "value", "prediction", "pred_source",
    "abs_err", "rel_err", "stderr",
]

EXPERIMENT_NAMES = ("moments", "constants", "giant", "growth", "two_phase",
                    "variant_agreement")

SRC_ODE = "ode"
SRC_FIXED_POINT = "fixed_point"
SRC_CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    run_id: str
    seed: int | None
    n: int | None
    process: str
    t: float | None
    delta: float | None
    observable: str
    value: float | None
    prediction: float | None = None
    pred_source: str = ""
    stderr: float | None = None

    def csv_cells(self) -> list[str]:
        abs_err = rel_err = None
        if self.value is not None and self.prediction is not None:
            abs_err = abs(self.value - self.prediction)
            rel_err = abs_err / abs(self.prediction) if self.prediction != 0 else None
        cells = [
            self.experiment, self.run_id, _fmt(self.seed), _fmt(self.n),
            self.process, _fmt(self.t), _fmt(self.delta), self.observable,
            _fmt(self.value), _fmt(self.prediction), self.pred_source,
            _fmt(abs_err), _fmt(rel_err), _fmt(self.stderr),
        ]
        return cells


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".10g")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run."""

    experiment: str
    n: int
    replicates: int = 10
    seed: int = 42
    t_grid: list[float] = field(default_factory=list)
    delta_grid: list[float] = field(default_factory=list)
    loops: bool = True
    process: str = ""
    initial: str = ""
    out: str = "results.csv"
    tol: float = 1.0e-8
    workers: int = 1
    band_coeff: float = 1.0
    engine: str = "auto"
    slope_max_delta: float = 0.15
    notes: str = ""  # free text, e.g. tolerance rationale; never read by logic

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"experiment", "n"} - set(data)
        if missing:
            raise InvalidConfigError(f"missing config keys: {sorted(missing)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfigError(f"config {path} must be a JSON object")
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENT_NAMES:
            raise InvalidConfigError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENT_NAMES}"
            )
        if self.n < 10:
            raise InvalidConfigError("n must be >= 10")
        if self.replicates < 1:
            raise InvalidConfigError("replicates must be >= 1")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")
        needs_t = self.experiment in ("moments", "giant", "variant_agreement")
        if needs_t and not self.t_grid:
            raise InvalidConfigError(f"{self.experiment} needs a nonempty t_grid")
        if self.experiment in ("growth", "two_phase") and not self.delta_grid:
            raise InvalidConfigError(f"{self.experiment} needs a nonempty delta_grid")
        if self.t_grid != sorted(self.t_grid):
            raise InvalidConfigError("t_grid must be sorted ascending")
        if any(t < 0 for t in self.t_grid):
            raise InvalidConfigError("t_grid entries must be >= 0")
        if self.experiment == "growth":
            if any(d < 0 or d > 0.3 for d in self.delta_grid):
                raise InvalidConfigError("growth deltas must lie in [0, 0.3]")
        if self.experiment == "two_phase":
            if any(d <= 0 or d >= 1 for d in self.delta_grid):
                raise InvalidConfigError("two_phase deltas must lie in (0, 1)")
        if self.process:
            ProcessKind.from_token(self.process)
        if self.experiment == "moments" and self.process not in ("", "bf"):
            raise InvalidConfigError("moment convergence is defined for the bf process")
        InitialGraphSpec.parse(self.initial)
        if self.engine not in ("auto", "numba", "python"):
            raise InvalidConfigError(f"unknown engine {self.engine!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentOutcome:
    rows: list[ResultRow]
    checks: list[CheckResult]


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, math.sqrt(var / len(values))


def _run_ordered(fn, count: int, workers: int) -> list:
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(workers, count)) as pool:
        return list(pool.map(fn, range(count)))


def _within(name: str, value: float, target: float, rel_tol: float) -> CheckResult:
    rel = abs(value - target) / abs(target)
    return CheckResult(
        name, rel <= rel_tol, f"value={value:.6g} target={target:.6g} rel={rel:.4f} tol={rel_tol}"
    )


# -- experiments -----------------------------------------------------------


def exp_moments(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Subcritical moment convergence of the bounded-size process."""
    constants = find_tc(cfg.tol)
    traj = critical_trajectory()
    if any(t >= constants.tc - 0.05 for t in cfg.t_grid):
        raise InvalidConfigError(
            f"t_grid must stay below tc - 0.05 = {constants.tc - 0.05:.4f}"
        )
    t_end = cfg.t_grid[-1]

    def one_run(i: int):
        return run_process(
            ProcessKind.BOUNDED_SIZE, cfg.n, initial=cfg.initial, t_end=t_end,
            record_at=tuple(cfg.t_grid), seed=cfg.seed ^ i, loops=cfg.loops,
            engine=cfg.engine,
        )

    traces = _run_ordered(one_run, cfg.replicates, cfg.workers)
    rows: list[ResultRow] = []
    checks: list[CheckResult] = []
    for j, t in enumerate(cfg.t_grid):
        t_rec = traces[0][j].t
        s2p, s3p, s4p = sbar_k(traj, t_rec)
        preds = {"x1": traj.xbar(t_rec), "s2": s2p, "s3": s3p, "s4": s4p}
        for obs, pred in preds.items():
            vals = [getattr(traces[i][j], obs) for i in range(cfg.replicates)]
            for i, v in enumerate(vals):
                rows.append(ResultRow(
                    cfg.experiment, str(i), cfg.seed ^ i, cfg.n, "bf", t_rec, None,
                    obs, v, pred, SRC_ODE,
                ))
            mean, se = _mean_stderr(vals)
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, "bf", t_rec, None,
                obs, mean, pred, SRC_ODE, stderr=se,
            ))
            checks.append(_within(f"moments t={t:g} mean {obs} vs ode", mean, pred, 0.02))
    return ExperimentOutcome(rows, checks)


def exp_constants(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Critical constants at two tolerances, with stability deltas."""
    fine = find_tc(cfg.tol)
    coarse = find_tc(cfg.tol * 2.0, ode_tol=1.0e-9)
    rows: list[ResultRow] = []
    checks: list[CheckResult] = []
    for name in fine.FIELDS:
        v, p = getattr(fine, name), getattr(coarse, name)
        err = getattr(fine, name + "_err")
        rows.append(ResultRow(
            cfg.experiment, "0", None, None, "", None, None, name, v, p, SRC_ODE,
        ))
        rows.append(ResultRow(
            cfg.experiment, "0", None, None, "", None, None, name + "_err", err,
        ))
        checks.append(CheckResult(
            f"constants {name} stable across tolerances",
            abs(v - p) < err,
            f"value={v:.10g} other_tol={p:.10g} err={err:.2e}",
        ))
    ident = fine.gamma * fine.alpha * fine.beta
    rows.append(ResultRow(
        cfg.experiment, "0", None, None, "", None, None,
        "gamma_alpha_beta", ident, 2.0, SRC_CLOSED_FORM,
    ))
    checks.append(CheckResult(
        "constants gamma*alpha*beta identity", abs(ident - 2.0) <= 1.0e-12,
        f"value={ident:.15f}",
    ))
    return ExperimentOutcome(rows, checks)


def exp_giant(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Giant component after adding uniform edges to an initial graph."""
    process = cfg.process or ProcessKind.ER_POISSON_TIME.value
    spec = InitialGraphSpec.parse(cfg.initial)
    dist0 = spec.to_distribution(cfg.n)
    s2, s3, s4 = (dist0.s(k) for k in (2, 3, 4))
    t_end = cfg.t_grid[-1]

    def one_run(i: int):
        return run_process(
            process, cfg.n, initial=spec, t_end=t_end, record_at=tuple(cfg.t_grid),
            seed=cfg.seed ^ i, loops=cfg.loops, engine=cfg.engine,
        )

    traces = _run_ordered(one_run, cfg.replicates, cfg.workers)
    rows: list[ResultRow] = []
    checks: list[CheckResult] = []
    for j, t in enumerate(cfg.t_grid):
        fp = solve_rho(dist0, t)
        vals = [traces[i][j].c1_frac for i in range(cfg.replicates)]
        for i, v in enumerate(vals):
            rows.append(ResultRow(
                cfg.experiment, str(i), cfg.seed ^ i, cfg.n, process, t, None,
                "c1_frac", v, fp.rho, SRC_FIXED_POINT,
            ))
        mean, se = _mean_stderr(vals)
        rows.append(ResultRow(
            cfg.experiment, "mean", cfg.seed, cfg.n, process, t, None,
            "c1_frac", mean, fp.rho, SRC_FIXED_POINT, stderr=se,
        ))
        if fp.rho > 0.0:
            bounds = supercritical_bounds(s2, s3, s4, t)
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, process, t, None,
                "c1_frac_lower_bound", None, bounds.lower, SRC_CLOSED_FORM,
            ))
            lo_ok = mean >= bounds.lower - 0.01
            hi_ok = True
            detail = f"mean={mean:.5f} lower={bounds.lower:.5f}"
            if bounds.upper_valid:
                rows.append(ResultRow(
                    cfg.experiment, "mean", cfg.seed, cfg.n, process, t, None,
                    "c1_frac_upper_bound", None, bounds.upper, SRC_CLOSED_FORM,
                ))
                hi_ok = mean <= bounds.upper + 0.01
                detail += f" upper={bounds.upper:.5f}"
            checks.append(CheckResult(
                f"giant t={t:g} mean c1_frac within closed-form bounds (+-0.01)",
                lo_ok and hi_ok, detail,
            ))
            checks.append(CheckResult(
                f"giant t={t:g} mean c1_frac vs fixed point (0.01 absolute)",
                abs(mean - fp.rho) <= 0.01, f"mean={mean:.5f} rho={fp.rho:.5f}",
            ))
        else:
            checks.append(CheckResult(
                f"giant t={t:g} subcritical c1_frac small",
                mean < 0.01, f"mean={mean:.5f}",
            ))
    return ExperimentOutcome(rows, checks)


def _fit_slopes(deltas: list[float], means: list[float], gamma: float):
    """(through-origin slope, local OLS slope, excess exponent or None)."""
    origin = sum(d * y for d, y in zip(deltas, means)) / sum(d * d for d in deltas)
    local = None
    if len(deltas) >= 2:
        dbar = sum(deltas) / len(deltas)
        ybar = sum(means) / len(means)
        var = sum((d - dbar) ** 2 for d in deltas)
        local = sum((d - dbar) * (y - ybar) for d, y in zip(deltas, means)) / var
    pts = [(math.log(d), math.log(abs(y - gamma * d)))
           for d, y in zip(deltas, means) if abs(y - gamma * d) > 0]
    exponent = None
    if len(pts) >= 2:
        xb = sum(p[0] for p in pts) / len(pts)
        yb = sum(p[1] for p in pts) / len(pts)
        var = sum((p[0] - xb) ** 2 for p in pts)
        if var > 0:
            exponent = sum((p[0] - xb) * (p[1] - yb) for p in pts) / var
    return origin, local, exponent


def exp_growth(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Largest-component growth just past the critical time.

    The slope observable estimates the limiting growth rate by a
    least-squares line through the origin, anchored by continuity of
    the transition (the giant fraction vanishes at the critical time);
    the with-intercept local_slope is reported alongside for the
    window's local derivative.
    """
    constants = find_tc(cfg.tol)
    rows: list[ResultRow] = []
    checks: list[CheckResult] = []
    run_counter = 0
    means: dict[float, float] = {}
    for delta in cfg.delta_grid:
        t = constants.tc + delta

        def one_run(i: int, _t=t, _base=run_counter):
            trace = run_process(
                ProcessKind.BOUNDED_SIZE, cfg.n, initial=cfg.initial, t_end=_t,
                record_at=(_t,), seed=cfg.seed ^ (_base + i), loops=cfg.loops,
                engine=cfg.engine,
            )
            return trace[-1].c1_frac

        vals = _run_ordered(one_run, cfg.replicates, cfg.workers)
        if 0 < delta <= cfg.slope_max_delta + 1e-12:
            center, halfwidth = bf_growth_prediction(constants, delta, cfg.band_coeff)
        else:
            # far from the transition the linear law is conjecture only,
            # so those rows carry raw values without a prediction
            center = halfwidth = None
        for i, v in enumerate(vals):
            rows.append(ResultRow(
                cfg.experiment, str(i), cfg.seed ^ (run_counter + i), cfg.n, "bf",
                t, delta, "c1_frac", v, center, SRC_ODE if center is not None else "",
            ))
        mean, se = _mean_stderr(vals)
        means[delta] = mean
        rows.append(ResultRow(
            cfg.experiment, "mean", cfg.seed, cfg.n, "bf", t, delta,
            "c1_frac", mean, center, SRC_ODE if center is not None else "",
            stderr=se,
        ))
        if halfwidth is not None:
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, "bf", t, delta,
                "band_halfwidth", None, halfwidth, SRC_CLOSED_FORM,
            ))
        run_counter += cfg.replicates
        if delta == 0.1 and center is not None:
            checks.append(_within(
                "growth delta=0.1 mean c1_frac vs gamma*delta", mean, center, 0.15
            ))
        if delta == 0:
            checks.append(CheckResult(
                "growth at the critical time stays small",
                mean < 0.05, f"mean={mean:.5f}",
            ))
    fit_ds = [d for d in cfg.delta_grid if 0 < d <= cfg.slope_max_delta + 1e-12]
    if len(fit_ds) >= 2:
        origin, local, exponent = _fit_slopes(
            fit_ds, [means[d] for d in fit_ds], constants.gamma
        )
        rows.append(ResultRow(
            cfg.experiment, "mean", cfg.seed, cfg.n, "bf", None, None,
            "slope", origin, constants.gamma, SRC_ODE,
        ))
        checks.append(_within(
            "growth fitted slope vs gamma", origin, constants.gamma, 0.20
        ))
        if local is not None:
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, "bf", None, None,
                "local_slope", local,
            ))
        if exponent is not None:
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, "bf", None, None,
                "excess_exponent", exponent,
            ))
    return ExperimentOutcome(rows, checks)


def exp_two_phase(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Stop-restart construction: halt before criticality, continue with
    thinned Poisson uniform edges, compare with the direct run."""
    constants = find_tc(cfg.tol)
    traj = critical_trajectory()
    rows: list[ResultRow] = []
    checks: list[CheckResult] = []
    run_counter = 0
    for delta in cfg.delta_grid:
        eps = delta ** (2.0 / 3.0)
        t_stop = constants.tc - eps
        t_final = constants.tc + delta
        if t_stop < 0.1:
            raise InvalidConfigError(
                f"delta={delta:g} stops at t={t_stop:.3f}; too close to the start"
            )

        def direct_run(i: int, _base=run_counter):
            trace = run_process(
                ProcessKind.BOUNDED_SIZE, cfg.n, t_end=t_final, record_at=(t_final,),
                seed=cfg.seed ^ (_base + i), loops=cfg.loops, engine=cfg.engine,
            )
            return trace[-1].c1_frac

        direct_vals = _run_ordered(direct_run, cfg.replicates, cfg.workers)
        run_counter += cfg.replicates

        def stopped_run(i: int, _base=run_counter):
            sim = Simulation(
                ProcessKind.BOUNDED_SIZE, cfg.n, seed=cfg.seed ^ (_base + i),
                loops=cfg.loops, engine=cfg.engine,
            )
            sim.advance_to(int(math.floor(cfg.n * t_stop / 2)))
            snap = sim.snapshot()
            x1 = snap.x1
            extra = poisson_edge_count((1.0 - x1 * x1) * (eps + delta), cfg.n, sim.rng)
            sim.add_er_edges(extra)
            final = sim.snapshot()
            return snap, final.c1 / cfg.n

        stopped = _run_ordered(stopped_run, cfg.replicates, cfg.workers)
        run_counter += cfg.replicates

        alpha, beta = constants.alpha, constants.beta
        stopped_preds = {
            "x1_stopped": traj.xbar(t_stop),
            "s2_stopped": alpha / eps,
            "s3_stopped": beta * alpha**3 / eps**3,
            "s4_stopped": 3.0 * beta**2 * alpha**5 / eps**5,
            "s3_ratio": beta,
            "s4_ratio": 3.0 * beta**2,
        }

        def observe(snap) -> dict[str, float]:
            return {
                "x1_stopped": snap.x1,
                "s2_stopped": snap.s(2),
                "s3_stopped": snap.s(3),
                "s4_stopped": snap.s(4),
                "s3_ratio": snap.s(3) / snap.s(2) ** 3,
                "s4_ratio": snap.s(4) / snap.s(2) ** 5,
            }

        observed = [observe(s) for s, _ in stopped]
        base = run_counter - cfg.replicates
        for obs, pred in stopped_preds.items():
            vals = [o[obs] for o in observed]
            for i, v in enumerate(vals):
                rows.append(ResultRow(
                    cfg.experiment, str(i), cfg.seed ^ (base + i), cfg.n, "bf",
                    t_stop, delta, obs, v, pred, SRC_ODE,
                ))
            mean, se = _mean_stderr(vals)
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, "bf", t_stop, delta,
                obs, mean, pred, SRC_ODE, stderr=se,
            ))
            if obs == "s2_stopped":
                checks.append(_within(
                    f"two_phase delta={delta:g} stopped s2 vs alpha/eps", mean, pred, 0.15
                ))
            if obs == "s3_ratio":
                checks.append(_within(
                    f"two_phase delta={delta:g} stopped s3/s2^3 vs beta", mean, pred, 0.15
                ))
        center, _ = bf_growth_prediction(constants, delta, cfg.band_coeff)
        tp_vals = [c for _, c in stopped]
        for i, v in enumerate(direct_vals):
            rows.append(ResultRow(
                cfg.experiment, str(i), cfg.seed ^ (base - cfg.replicates + i), cfg.n,
                "bf", t_final, delta, "c1_frac_direct", v, center, SRC_ODE,
            ))
        dmean, dse = _mean_stderr(direct_vals)
        rows.append(ResultRow(
            cfg.experiment, "mean", cfg.seed, cfg.n, "bf", t_final, delta,
            "c1_frac_direct", dmean, center, SRC_ODE, stderr=dse,
        ))
        for i, v in enumerate(tp_vals):
            rows.append(ResultRow(
                cfg.experiment, str(i), cfg.seed ^ (base + i), cfg.n, "bf",
                t_final, delta, "c1_frac_two_phase", v, center, SRC_ODE,
            ))
        tmean, tse = _mean_stderr(tp_vals)
        rows.append(ResultRow(
            cfg.experiment, "mean", cfg.seed, cfg.n, "bf", t_final, delta,
            "c1_frac_two_phase", tmean, center, SRC_ODE, stderr=tse,
        ))
        allow = 3.0 * math.sqrt(dse * dse + tse * tse) + 0.02
        checks.append(CheckResult(
            f"two_phase delta={delta:g} construction agrees with direct run",
            abs(tmean - dmean) <= allow,
            f"two_phase={tmean:.5f} direct={dmean:.5f} |diff|={abs(tmean - dmean):.5f} "
            f"allow={allow:.5f}",
        ))
    return ExperimentOutcome(rows, checks)


def exp_variant_agreement(cfg: ExperimentConfig) -> ExperimentOutcome:
    """The three uniform-edge variants agree on the susceptibility."""
    variants = (
        ProcessKind.ER_WITHOUT_REPLACEMENT,
        ProcessKind.ER_WITH_REPLACEMENT,
        ProcessKind.ER_POISSON_TIME,
    )
    spec = InitialGraphSpec.parse(cfg.initial)
    t_end = cfg.t_grid[-1]
    rows: list[ResultRow] = []
    checks: list[CheckResult] = []
    per_variant: dict[str, list[list[float]]] = {}
    for vi, kind in enumerate(variants):
        base = vi * cfg.replicates

        def one_run(i: int, _kind=kind, _base=base):
            return run_process(
                _kind, cfg.n, initial=spec, t_end=t_end, record_at=tuple(cfg.t_grid),
                seed=cfg.seed ^ (_base + i), loops=cfg.loops, engine=cfg.engine,
            )

        traces = _run_ordered(one_run, cfg.replicates, cfg.workers)
        stats = []
        for j, t in enumerate(cfg.t_grid):
            pred = None
            src = ""
            if not spec.parts and t < 1.0:
                pred = 1.0 / (1.0 - t)  # subcritical uniform-edge susceptibility
                src = SRC_CLOSED_FORM
            vals = [traces[i][j].s2 for i in range(cfg.replicates)]
            for i, v in enumerate(vals):
                rows.append(ResultRow(
                    cfg.experiment, str(i), cfg.seed ^ (base + i), cfg.n, kind.value,
                    t, None, "s2", v, pred, src,
                ))
            mean, se = _mean_stderr(vals)
            stats.append((mean, se))
            rows.append(ResultRow(
                cfg.experiment, "mean", cfg.seed, cfg.n, kind.value, t, None,
                "s2", mean, pred, src, stderr=se,
            ))
        per_variant[kind.value] = stats
    tokens = [k.value for k in variants]
    for j, t in enumerate(cfg.t_grid):
        for a in range(len(tokens)):
            for b in range(a + 1, len(tokens)):
                ma, sa = per_variant[tokens[a]][j]
                mb, sb = per_variant[tokens[b]][j]
                allow = 3.0 * math.sqrt(sa * sa + sb * sb)
                checks.append(CheckResult(
                    f"variants {tokens[a]} vs {tokens[b]} mean s2 at t={t:g}",
                    abs(ma - mb) <= allow,
                    f"|diff|={abs(ma - mb):.5g} allow={allow:.5g}",
                ))
    return ExperimentOutcome(rows, checks)


_EXPERIMENTS = {
    "moments": exp_moments,
    "constants": exp_constants,
    "giant": exp_giant,
    "growth": exp_growth,
    "two_phase": exp_two_phase,
    "variant_agreement": exp_variant_agreement,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
    cfg.validate()
    return _EXPERIMENTS[cfg.experiment](cfg)


def write_csv(rows: list[ResultRow], path: str) -> None:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(row.csv_cells()) for row in rows)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("\n".join(lines) + "\n")


def write_meta(csv_path: str, cfg: ExperimentConfig, elapsed: float,
               checks: list[CheckResult]) -> None:
    import numpy
    import scipy

    try:
        import numba
        numba_version = numba.__version__
    except ImportError:  # pragma: no cover
        numba_version = None
    meta = {
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "elapsed_seconds": round(elapsed, 3),
        "versions": {
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "numba": numba_version,
        },
        "config": cfg.to_dict(),
        "checks": [
            {"name": c.name, "passed": bool(c.passed), "detail": c.detail}
            for c in checks
        ],
    }
    Path(csv_path + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def run_config(cfg: ExperimentConfig, check: bool = False, quiet: bool = False) -> int:
    """Run, persist and (optionally) enforce an experiment; returns an exit code."""
    start = time.perf_counter()
    try:
        outcome = run_experiment(cfg)
    except InvalidConfigError as exc:
        if not quiet:
            print(f"invalid config: {exc}")
        return 2
    except NumericalFailureError as exc:
        if not quiet:
            print(f"numerical failure: {exc}")
        return 3
    write_csv(outcome.rows, cfg.out)
    write_meta(cfg.out, cfg, time.perf_counter() - start, outcome.checks)
    if not quiet:
        for c in outcome.checks:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        print(f"wrote {cfg.out} ({len(outcome.rows)} rows)")
    if check and any(not c.passed for c in outcome.checks):
        return 4
    return 0
