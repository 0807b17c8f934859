"""Reproduction harnesses for the robustness experiments.

Each runner takes an :class:`ExperimentSpec`, performs ``replications``
independent repetitions (replication ``r`` uses the seed
``derive_seed(base_seed, r)`` so results do not depend on execution order)
and returns an :class:`ExperimentResult` holding one record per
replication and estimator plus summary rows computed from those records.
``write_result`` stores them as ``<name>_records.csv`` and
``<name>_summary.csv``.

Available experiments:

=====================  ======================================================
corruption_curve       logistic ERM vs MOM test error as outliers are added
block_compare          fixed vs resampled blocks on clean logistic data
timing                 per-iteration wall clock of ERM and MOM
prop1                  L1 regression with one contaminated input
prop2                  1-d L1 regression under a heavy-tailed design
complexity_check       Monte Carlo fixed point vs its closed-form bound
outlier_detect         median-block scores of planted outliers
=====================  ======================================================
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from ._seeding import derive_seed, make_rng
from .complexity import fixed_point_linear
from .datagen import (corrupt_figure1, gen_logistic_student, gen_prop1, gen_prop2, l1_erm_1d,
                      plant_constant_outliers)
from .diagnostics import outlier_scores
from .exceptions import DomainError, SolverError
from .losses import LossSpec
from .model_select import robust_cv_select_k
from .solver import SolverConfig, erm_fit, mom_fit

RECORD_COLUMNS = ["replication", "seed", "condition", "estimator", "k", "error_l2", "test_error",
                  "runtime_ms"]


class ExperimentName(str, Enum):
    CORRUPTION_CURVE = "corruption_curve"
    BLOCK_COMPARE = "block_compare"
    TIMING = "timing"
    PROP1 = "prop1"
    PROP2 = "prop2"
    COMPLEXITY_CHECK = "complexity_check"
    OUTLIER_DETECT = "outlier_detect"


DEFAULT_PARAMS: Dict[ExperimentName, dict] = {
    ExperimentName.CORRUPTION_CURVE: dict(
        n=1000, d=50, t_norm=100.0, levels=[0, 1, 50], n_test=10_000, k=117, max_iter=3000,
        eps=1e-7, noise_sd=1.0, df=5.0, scale="sd", k_grid=[1, 10, 30, 60, 117], v_folds=4,
    ),
    ExperimentName.BLOCK_COMPARE: dict(
        n=1000, d=100, t_norm=10.0, k=10, max_iter=2000, eps=1e-7, noise_sd=1.0, df=5.0,
    ),
    ExperimentName.TIMING: dict(n=10_000, d=100, t_norm=1.0, ks=[10, 50], iterations=50),
    ExperimentName.PROP1: dict(
        n=200, d=10, v_scale=10.0, k=None, erm_max_iter=3000, mom_max_iter=3000,
        erm_step=0.01, mom_step=0.01, eps=1e-7, k_grid=[1, 3, 5, 11, 21], v_folds=4,
    ),
    ExperimentName.PROP2: dict(
        n=8000, x_level=10.0, t_star=0.0, k=10, mom_step=0.01, mom_max_iter=500, eps=1e-9,
        blocks="fixed",
    ),
    ExperimentName.COMPLEXITY_CHECK: dict(
        cases=[[5, 500, 5], [5, 2000, 5], [10, 500, 10], [10, 2000, 10], [10, 500, 3],
               [10, 2000, 3]],
        gamma=0.5, n_mc=2000,
    ),
    ExperimentName.OUTLIER_DETECT: dict(
        n=100, d=10, t_norm=30.0, k=10, iterations=5000, burn_in=1000,
        positions=[41, 61, 65], level=10.0, median_criterion="plain",
    ),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run.

    ``params`` overrides the entries of ``DEFAULT_PARAMS[name]``; ``solver``
    is the base solver configuration (its seed is replaced per replication).
    ``k_policy`` is ``"fixed"`` (use ``params["k"]``) or ``"cv"`` (robust
    cross-validation over ``params["k_grid"]`` on every replication).
    """

    name: ExperimentName
    replications: int = 20
    base_seed: int = 0
    params: dict = field(default_factory=dict)
    solver: SolverConfig = field(default_factory=SolverConfig)
    k_policy: str = "fixed"
    output: Optional[str] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "name", ExperimentName(self.name))
        except ValueError:
            raise DomainError(f"unknown experiment {self.name!r}") from None
        if int(self.replications) < 1:
            raise DomainError("replications must be >= 1")
        if self.k_policy not in ("fixed", "cv"):
            raise DomainError(f"k_policy must be 'fixed' or 'cv', got {self.k_policy!r}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.name])
        if unknown:
            raise DomainError(f"unknown parameters for {self.name.value}: {sorted(unknown)}")

    @property
    def p(self) -> dict:
        return {**DEFAULT_PARAMS[self.name], **self.params}

    def rep_seed(self, r: int) -> int:
        return derive_seed(self.base_seed, r)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    records: List[dict]
    summary: List[dict]

    def column(self, key, **where) -> np.ndarray:
        rows = [r for r in self.records if all(r.get(k) == v for k, v in where.items())]
        return np.array([r[key] for r in rows], dtype=float)

    def summary_row(self, **where) -> dict:
        for row in self.summary:
            if all(row.get(k) == v for k, v in where.items()):
                return row
        raise KeyError(where)


# ---------------------------------------------------------------- helpers

def _record(r, seed, condition, estimator, k, error_l2=math.nan, test_error=math.nan,
            runtime_ms=math.nan, **extra) -> dict:
    row = dict(replication=r, seed=seed, condition=condition, estimator=estimator, k=k,
               error_l2=error_l2, test_error=test_error, runtime_ms=runtime_ms)
    row.update(extra)
    return row


def _timed(fn, *args):
    start = time.perf_counter()
    try:
        out = fn(*args)
    except SolverError as exc:
        return None, 1e3 * (time.perf_counter() - start), str(exc)
    return out, 1e3 * (time.perf_counter() - start), ""


def _direction(seed, d, norm):
    g = make_rng(seed, 0).standard_normal(d)
    return norm * g / np.linalg.norm(g)


def _misclassification(x, y, t) -> float:
    pred = np.where(x @ t >= 0.0, 1.0, -1.0)
    return float(np.mean(pred != y))


def _quantiles(v) -> dict:
    v = np.asarray(v, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return dict(median=math.nan, q1=math.nan, q3=math.nan)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return dict(median=float(med), q1=float(q1), q3=float(q3))


def _choose_k(spec, data, loss, cfg, default_k):
    if spec.k_policy == "cv":
        p = spec.p
        return robust_cv_select_k(data, loss, p["k_grid"], p["v_folds"], cfg)
    return int(default_k)


def _groups(records, keys):
    out = {}
    for rec in records:
        out.setdefault(tuple(rec[k] for k in keys), []).append(rec)
    return out


def _basic_summary(records, keys=("condition", "estimator")) -> List[dict]:
    rows = []
    for key, recs in _groups(records, keys).items():
        row = dict(zip(keys, key))
        row["count"] = len(recs)
        row["failures"] = sum(1 for r in recs if r.get("status"))
        for col in ("error_l2", "test_error", "runtime_ms"):
            for stat, val in _quantiles([r[col] for r in recs]).items():
                row[f"{col}_{stat}"] = val
        rows.append(row)
    return rows


def _chunk_records(args):
    records_fn, spec, reps = args
    return records_fn(spec, reps)


def _execute(spec, records_fn, summary_fn, jobs) -> ExperimentResult:
    reps = list(range(spec.replications))
    jobs = max(1, min(int(jobs), len(reps)))
    if jobs == 1:
        records = records_fn(spec, reps)
    else:
        chunks = [c.tolist() for c in np.array_split(np.array(reps), jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_chunk_records, [(records_fn, spec, c) for c in chunks])
            records = [rec for part in parts for rec in part]
    return ExperimentResult(spec, records, summary_fn(spec, records))


# ---------------------------------------------------------------- runners

def _records_corruption_curve(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    loss = LossSpec.logistic()
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        t_star = _direction(seed, p["d"], p["t_norm"])
        clean = gen_logistic_student(p["n"], p["d"], t_star, p["noise_sd"], derive_seed(seed, 1),
                                     p["df"])
        test = gen_logistic_student(p["n_test"], p["d"], t_star, p["noise_sd"],
                                    derive_seed(seed, 2), p["df"])
        cfg = spec.solver.replace(seed=seed, max_iter=p["max_iter"], eps=p["eps"])
        for level in p["levels"]:
            data = corrupt_figure1(clean, level, t_star, derive_seed(seed, 3), p["scale"])
            cond = f"n_out={level}"
            k = _choose_k(spec, data, loss, cfg, p["k"])
            for est, fn, c in (("erm", erm_fit, cfg), ("mom", mom_fit, cfg.replace(k=k))):
                fit, ms, err = _timed(fn, data, loss, c)
                if fit is None:
                    records.append(_record(r, seed, cond, est, c.k, runtime_ms=ms, status=err))
                    continue
                records.append(_record(
                    r, seed, cond, est, 1 if est == "erm" else k,
                    error_l2=float(np.linalg.norm(fit.t_hat - t_star)),
                    test_error=_misclassification(test.x, test.y, fit.t_hat),
                    runtime_ms=ms, iterations=fit.iterations, status="",
                ))
    return records


def _summary_corruption_curve(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    p = spec.p
    summary = _basic_summary(records)
    clean_median = {row["estimator"]: row["test_error_median"] for row in summary
                    if row["condition"] == f"n_out={p['levels'][0]}"}
    for row in summary:
        base = clean_median.get(row["estimator"], math.nan)
        row["ratio_to_clean"] = row["test_error_median"] / base if base else math.nan
    return summary


def run_corruption_curve(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Logistic ERM and MOM on data with an increasing number of outliers.

    The same clean sample and test set are reused across corruption levels
    within a replication, so level-to-level differences are matched.
    """
    return _execute(spec, _records_corruption_curve, _summary_corruption_curve, jobs)


def _records_block_compare(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    loss = LossSpec.logistic()
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        t_star = _direction(seed, p["d"], p["t_norm"])
        data = gen_logistic_student(p["n"], p["d"], t_star, p["noise_sd"], derive_seed(seed, 1),
                                    p["df"])
        cfg = spec.solver.replace(seed=seed, k=p["k"], max_iter=p["max_iter"], eps=p["eps"])
        for strategy in ("fixed", "resample"):
            fit, ms, err = _timed(mom_fit, data, loss, cfg.replace(block_strategy=strategy))
            err_l2 = math.nan if fit is None else float(np.linalg.norm(fit.t_hat - t_star))
            records.append(_record(r, seed, "clean", f"mom_{strategy}", p["k"], error_l2=err_l2,
                                   runtime_ms=ms, status=err))
    return records


def _summary_block_compare(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    summary = _basic_summary(records)
    fixed = {rec["replication"]: rec["error_l2"] for rec in records if rec["estimator"] == "mom_fixed"}
    wins = [rec["error_l2"] < fixed[rec["replication"]] for rec in records
            if rec["estimator"] == "mom_resample"]
    for row in summary:
        row["resample_better_fraction"] = float(np.mean(wins))
    return summary


def run_block_compare(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Fixed against resampled blocks on clean logistic data, matched seeds."""
    return _execute(spec, _records_block_compare, _summary_block_compare, jobs)


def _records_timing(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    loss = LossSpec.logistic()
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        t_star = _direction(seed, p["d"], p["t_norm"])
        data = gen_logistic_student(p["n"], p["d"], t_star, 1.0, derive_seed(seed, 1))
        cfg = spec.solver.replace(seed=seed, max_iter=p["iterations"], stop_early=False,
                                  record_timing=True)
        runs = [("erm", 1, erm_fit, cfg)]
        runs += [(f"mom_k{k}", k, mom_fit, cfg.replace(k=k)) for k in p["ks"]]
        for est, k, fn, c in runs:
            fit, ms, err = _timed(fn, data, loss, c)
            per_iter = math.nan if fit is None else 1e3 * float(np.median(fit.iteration_times))
            records.append(_record(r, seed, c.block_strategy.value, est, k, runtime_ms=per_iter,
                                   total_ms=ms, status=err))
    return records


def _summary_timing(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    summary = _basic_summary(records)
    erm = {row["condition"]: row["runtime_ms_median"] for row in summary if row["estimator"] == "erm"}
    for row in summary:
        row["ratio_to_erm"] = row["runtime_ms_median"] / erm[row["condition"]]
    return summary


def run_timing(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Median per-iteration wall clock of ``erm_fit`` and ``mom_fit``.

    Every fit runs exactly ``iterations`` steps. ``runtime_ms`` is the median
    duration of one iteration.
    """
    return _execute(spec, _records_timing, _summary_timing, jobs)


def _records_prop1(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    loss = LossSpec.quantile(0.5)
    k_default = p["k"] or 2 * math.ceil(p["d"] / 2) + 1
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        t_star = make_rng(seed, 0).standard_normal(p["d"])
        data = gen_prop1(p["n"], p["d"], t_star, p["v_scale"], derive_seed(seed, 1))
        erm_cfg = spec.solver.replace(seed=seed, max_iter=p["erm_max_iter"], eps=p["eps"])
        if p["erm_step"] is not None:
            erm_cfg = erm_cfg.replace(step_rule="constant", step_size=p["erm_step"])
        mom_cfg = spec.solver.replace(seed=seed, max_iter=p["mom_max_iter"], eps=p["eps"],
                                      step_rule="constant", step_size=p["mom_step"])
        k = _choose_k(spec, data, loss, mom_cfg, k_default)
        scale = float(np.linalg.norm(t_star))
        for est, fn, c in (("erm", erm_fit, erm_cfg), ("mom", mom_fit, mom_cfg.replace(k=k))):
            fit, ms, err = _timed(fn, data, loss, c)
            rel = math.nan if fit is None else float(np.linalg.norm(fit.t_hat - t_star)) / scale
            records.append(_record(r, seed, f"v_scale={p['v_scale']}", est, c.k, error_l2=rel,
                                   runtime_ms=ms, status=err))
    return records


def _summary_prop1(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    summary = _basic_summary(records)
    for row in summary:
        errs = np.array([rec["error_l2"] for rec in records if rec["estimator"] == row["estimator"]])
        row["freq_ge_quarter"] = float(np.mean(errs >= 0.25))
        row["freq_le_tenth"] = float(np.mean(errs <= 0.1))
    return summary


def run_prop1(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """L1 regression with one input shifted far along ``t*``.

    ``error_l2`` is the relative error ``||t_hat - t*|| / ||t*||``. Both fits
    use constant steps (``params["erm_step"]``, ``params["mom_step"]``) so
    that the comparison is not driven by subgradient oscillation; set
    ``erm_step`` to ``None`` for the solver's step rule.
    """
    return _execute(spec, _records_prop1, _summary_prop1, jobs)


def _records_prop2(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    loss = LossSpec.quantile(0.5)
    threshold = math.sqrt(p["x_level"] / p["n"]) / 5.0
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        data = gen_prop2(p["n"], p["x_level"], p["t_star"], derive_seed(seed, 1))
        scale = math.sqrt(data.params["second_moment"])
        start = time.perf_counter()
        t_erm = l1_erm_1d(data)
        erm_ms = 1e3 * (time.perf_counter() - start)
        err = scale * abs(t_erm - p["t_star"])
        records.append(_record(r, seed, f"x={p['x_level']}", "erm", 1, error_l2=err,
                               runtime_ms=erm_ms, exceeds=int(err >= threshold), status=""))
        cfg = spec.solver.replace(seed=seed, k=p["k"], step_rule="constant",
                                  step_size=p["mom_step"], max_iter=p["mom_max_iter"],
                                  eps=p["eps"], block_strategy=p["blocks"])
        fit, ms, msg = _timed(mom_fit, data, loss, cfg)
        err = math.nan if fit is None else scale * abs(float(fit.t_hat[0]) - p["t_star"])
        records.append(_record(r, seed, f"x={p['x_level']}", "mom", p["k"], error_l2=err,
                               runtime_ms=ms, exceeds=int(err >= threshold), status=msg))
    return records


def _summary_prop2(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    p = spec.p
    threshold = math.sqrt(p["x_level"] / p["n"]) / 5.0
    summary = _basic_summary(records)
    for row in summary:
        flags = [rec["exceeds"] for rec in records if rec["estimator"] == row["estimator"]]
        row["threshold"] = threshold
        row["exceedance_frequency"] = float(np.mean(flags))
    return summary


def run_prop2(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Exact 1-d L1 ERM against MOM under the heavy-tailed design.

    ``error_l2`` is ``sqrt(E X^2) |t_hat - t*|`` and ``exceeds`` flags
    values at or above ``sqrt(x / n) / 5``.
    """
    return _execute(spec, _records_prop2, _summary_prop2, jobs)


def _design_rows(rng, n, d, rank):
    if rank == d:
        return rng.standard_normal((n, d)), np.eye(d)
    basis, _ = np.linalg.qr(rng.standard_normal((d, rank)))
    return rng.standard_normal((n, rank)) @ basis.T, basis @ basis.T


def _records_complexity_check(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    gamma = float(p["gamma"])
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        for j, (d, n, rank) in enumerate(p["cases"]):
            d, n, rank = int(d), int(n), int(rank)
            x, sigma = _design_rows(make_rng(seed, 10 + j), n, d, rank)
            start = time.perf_counter()
            est = fixed_point_linear(x, sigma, gamma, int(p["n_mc"]), derive_seed(seed, 20 + j))
            ms = 1e3 * (time.perf_counter() - start)
            corrected = math.sqrt(2.0 * rank / (gamma * gamma * n))
            slack = 3.0 * est.std_error
            records.append(_record(
                r, seed, f"d={d},n={n},rank={rank}", "monte_carlo", 0, runtime_ms=ms,
                r_fixed=est.r_fixed, std_error=est.std_error, lemma1_bound=est.lemma1_bound,
                corrected_bound=corrected, reference=math.sqrt(rank / (gamma * gamma * n)),
                bound_ok=int(est.r_fixed <= est.lemma1_bound + slack),
                corrected_ok=int(est.r_fixed <= corrected + slack), status="",
            ))
    return records


def _summary_complexity_check(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    summary = []
    for (cond,), recs in _groups(records, ("condition",)).items():
        summary.append(dict(
            condition=cond, count=len(recs),
            r_fixed_median=float(np.median([x["r_fixed"] for x in recs])),
            lemma1_bound=recs[0]["lemma1_bound"], corrected_bound=recs[0]["corrected_bound"],
            bound_ok_fraction=float(np.mean([x["bound_ok"] for x in recs])),
            corrected_ok_fraction=float(np.mean([x["corrected_ok"] for x in recs])),
        ))
    return summary


def run_complexity_check(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Monte Carlo fixed point of Gaussian designs against the rank bound.

    Each case ``[d, n, rank]`` draws ``n`` rows from ``N(0, Sigma)`` with a
    rank-``rank`` projection ``Sigma`` (the identity when ``rank = d``).
    ``bound_ok`` compares with the stated bound ``sqrt(rank / (2 gamma^2 n))``
    and ``corrected_ok`` with ``sqrt(2 rank / (gamma^2 n))``.
    """
    return _execute(spec, _records_complexity_check, _summary_complexity_check, jobs)


def _records_outlier_detect(spec: ExperimentSpec, reps) -> List[dict]:
    p = spec.p
    loss = LossSpec.logistic()
    positions = np.asarray(p["positions"], dtype=np.intp)
    records = []
    for r in reps:
        seed = spec.rep_seed(r)
        t_star = _direction(seed, p["d"], p["t_norm"])
        clean = gen_logistic_student(p["n"], p["d"], t_star, 1.0, derive_seed(seed, 1))
        data = plant_constant_outliers(clean, positions, p["level"], t_star)
        cfg = spec.solver.replace(seed=seed, k=p["k"], max_iter=p["iterations"], stop_early=False,
                                  record_trace=True, block_strategy="resample",
                                  median_criterion=p["median_criterion"])
        fit, ms, err = _timed(mom_fit, data, loss, cfg)
        if fit is None:
            records.append(_record(r, seed, "planted", "mom", p["k"], runtime_ms=ms, status=err))
            continue
        scores = outlier_scores(fit, p["burn_in"])
        planted = scores.counts[positions]
        records.append(_record(
            r, seed, "planted", "mom", p["k"], error_l2=float(np.linalg.norm(fit.t_hat - t_star)),
            runtime_ms=ms, planted_scores=" ".join(str(int(c)) for c in planted),
            all_zero=int(np.all(planted == 0)), median_score=float(np.median(scores.counts)),
            status="",
        ))
    return records


def _summary_outlier_detect(spec: ExperimentSpec, records: List[dict]) -> List[dict]:
    flags = [rec.get("all_zero", 0) for rec in records]
    summary = [dict(condition="planted", estimator="mom", count=len(records),
                    all_zero_runs=int(np.sum(flags)), all_zero_fraction=float(np.mean(flags)))]
    return summary


def run_outlier_detect(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Plant identical high-leverage outliers and score median-block membership.

    Runs exactly ``iterations`` resampled-block steps with a trace and counts
    selections after ``burn_in``.
    """
    return _execute(spec, _records_outlier_detect, _summary_outlier_detect, jobs)


RUNNERS: Dict[ExperimentName, Callable[[ExperimentSpec], ExperimentResult]] = {
    ExperimentName.CORRUPTION_CURVE: run_corruption_curve,
    ExperimentName.BLOCK_COMPARE: run_block_compare,
    ExperimentName.TIMING: run_timing,
    ExperimentName.PROP1: run_prop1,
    ExperimentName.PROP2: run_prop2,
    ExperimentName.COMPLEXITY_CHECK: run_complexity_check,
    ExperimentName.OUTLIER_DETECT: run_outlier_detect,
}


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Run ``spec`` with up to ``jobs`` worker processes and write its CSVs
    when ``spec.output`` is set."""
    result = RUNNERS[spec.name](spec, jobs)
    if spec.output is not None:
        write_result(result, spec.output)
    return result


# ---------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return "" if v is None else str(v)


def _write_rows(rows, path, leading=()):
    columns = list(leading)
    for row in rows:
        columns += [c for c in row if c not in columns]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])


def write_result(result: ExperimentResult, out_dir) -> tuple:
    """Write ``<name>_records.csv`` and ``<name>_summary.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.spec.name.value
    rec_path = out / f"{name}_records.csv"
    sum_path = out / f"{name}_summary.csv"
    _write_rows(result.records, rec_path, RECORD_COLUMNS)
    _write_rows(result.summary, sum_path)
    return rec_path, sum_path
