import csv
import math

import numpy as np
import pytest

from minmax_mom._seeding import derive_seed
from minmax_mom.exceptions import DomainError, SolverError
from minmax_mom.experiments import (RECORD_COLUMNS, ExperimentSpec, _records_corruption_curve,
                                    _records_prop1, run_block_compare, run_complexity_check,
                                    run_corruption_curve, run_experiment, run_outlier_detect,
                                    run_prop1, run_prop2, run_timing)
from minmax_mom.solver import SolverConfig

SMALL_CURVE = dict(n=200, d=5, t_norm=3.0, levels=[0, 4], n_test=500, k=15, max_iter=300, eps=1e-5)
SMALL_PROP1 = dict(n=100, d=4, erm_max_iter=500, mom_max_iter=800)


def _drop_timing(records):
    return [{k: v for k, v in r.items() if k not in ("runtime_ms", "total_ms")} for r in records]


def _same_records(a, b):
    a, b = _drop_timing(a), _drop_timing(b)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.keys() == y.keys()
        for key in x:
            if isinstance(x[key], float) and math.isnan(x[key]):
                assert math.isnan(y[key])
            else:
                assert x[key] == y[key], key


# ---------------------------------------------------------------- spec

def test_spec_validation():
    with pytest.raises(DomainError):
        ExperimentSpec("corruption_curve", replications=0)
    with pytest.raises(DomainError):
        ExperimentSpec("figure_7")
    with pytest.raises(DomainError):
        ExperimentSpec("prop1", params=dict(bogus=1))
    with pytest.raises(DomainError):
        ExperimentSpec("prop1", k_policy="oracle")
    spec = ExperimentSpec("prop1", params=dict(n=50))
    assert spec.p["n"] == 50 and spec.p["d"] == 10


def test_replication_seeds_are_derived():
    spec = ExperimentSpec("prop1", base_seed=9)
    assert [spec.rep_seed(r) for r in range(3)] == [derive_seed(9, r) for r in range(3)]
    assert len({spec.rep_seed(r) for r in range(50)}) == 50


# ---------------------------------------------------------------- records

def test_record_count_is_replications_times_estimators():
    cases = [
        (run_corruption_curve, ExperimentSpec("corruption_curve", replications=2, params=SMALL_CURVE), 4),
        (run_prop1, ExperimentSpec("prop1", replications=3, params=SMALL_PROP1), 2),
        (run_prop2, ExperimentSpec("prop2", replications=3, params=dict(mom_max_iter=50)), 2),
        (run_block_compare, ExperimentSpec("block_compare", replications=2,
                                           params=dict(n=200, d=5, max_iter=100)), 2),
        (run_timing, ExperimentSpec("timing", replications=2,
                                    params=dict(n=300, d=5, ks=[5, 10], iterations=5)), 3),
    ]
    for runner, spec, per_rep in cases:
        res = runner(spec)
        assert len(res.records) == spec.replications * per_rep, spec.name
        assert all(set(RECORD_COLUMNS) <= set(r) for r in res.records)


def test_replication_order_does_not_matter():
    spec = ExperimentSpec("corruption_curve", replications=3, params=SMALL_CURVE)
    forward = _records_corruption_curve(spec, [0, 1, 2])
    backward = _records_corruption_curve(spec, [2, 1, 0])
    backward.sort(key=lambda r: r["replication"])
    _same_records(forward, backward)

    spec = ExperimentSpec("prop1", replications=3, params=SMALL_PROP1)
    single = _records_prop1(spec, [1])
    _same_records(single, [r for r in _records_prop1(spec, [0, 1, 2]) if r["replication"] == 1])


def test_parallel_jobs_match_serial():
    spec = ExperimentSpec("prop1", replications=4, params=SMALL_PROP1)
    _same_records(run_prop1(spec, jobs=1).records, run_prop1(spec, jobs=2).records)


def test_summary_recomputable_from_records_csv(tmp_path):
    spec = ExperimentSpec("corruption_curve", replications=3, params=SMALL_CURVE,
                          output=str(tmp_path))
    res = run_experiment(spec)
    with (tmp_path / "corruption_curve_records.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0])[: len(RECORD_COLUMNS)] == RECORD_COLUMNS
    assert len(rows) == len(res.records)
    with (tmp_path / "corruption_curve_summary.csv").open() as fh:
        summary = list(csv.DictReader(fh))
    clean = {}
    for srow in summary:
        sel = [r for r in rows if r["condition"] == srow["condition"]
               and r["estimator"] == srow["estimator"]]
        assert int(srow["count"]) == len(sel)
        for col in ("error_l2", "test_error"):
            vals = np.array([float(r[col]) for r in sel])
            q1, med, q3 = np.percentile(vals, [25, 50, 75])
            assert float(srow[f"{col}_median"]) == med
            assert float(srow[f"{col}_q1"]) == q1
            assert float(srow[f"{col}_q3"]) == q3
        if srow["condition"] == "n_out=0":
            clean[srow["estimator"]] = float(srow["test_error_median"])
    for srow in summary:
        base = clean[srow["estimator"]]
        expected = float(srow["test_error_median"]) / base if base else math.nan
        got = float(srow["ratio_to_clean"])
        assert (math.isnan(got) and math.isnan(expected)) or got == expected


def test_cv_policy_selects_from_grid():
    params = dict(SMALL_CURVE, k_grid=[1, 5, 15], v_folds=3, levels=[4], max_iter=150)
    res = run_corruption_curve(ExperimentSpec("corruption_curve", replications=1, params=params,
                                              k_policy="cv"))
    mom = [r for r in res.records if r["estimator"] == "mom"]
    assert mom and mom[0]["k"] in (1, 5, 15)


def test_solver_failure_is_recorded_not_raised(monkeypatch):
    import minmax_mom.experiments as ex

    def boom(data, loss, cfg):
        raise SolverError("diverged", 3)

    monkeypatch.setattr(ex, "mom_fit", boom)
    res = run_prop1(ExperimentSpec("prop1", replications=2, params=SMALL_PROP1))
    mom = [r for r in res.records if r["estimator"] == "mom"]
    assert len(mom) == 2 and all(r["status"] for r in mom)
    assert all(math.isnan(r["error_l2"]) for r in mom)
    assert res.summary_row(estimator="mom")["failures"] == 2
    assert res.summary_row(estimator="erm")["failures"] == 0


# ---------------------------------------------------------------- examples

def test_prop1_clean_noiseless_erm_is_accurate():
    res = run_prop1(ExperimentSpec("prop1", replications=5, params=dict(v_scale=0.0)))
    assert np.all(res.column("error_l2", estimator="erm") <= 0.1)


def test_prop2_shift_invariance():
    base = run_prop2(ExperimentSpec("prop2", replications=5, params=dict(mom_max_iter=20)))
    shifted = run_prop2(ExperimentSpec("prop2", replications=5,
                                       params=dict(mom_max_iter=20, t_star=3.75)))
    a = base.column("error_l2", estimator="erm")
    b = shifted.column("error_l2", estimator="erm")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
    assert base.summary_row(estimator="erm")["threshold"] == pytest.approx(math.sqrt(10 / 8000) / 5)


def test_complexity_check_records():
    params = dict(cases=[[5, 500, 5], [10, 500, 3]], n_mc=300)
    res = run_complexity_check(ExperimentSpec("complexity_check", replications=2, params=params))
    assert len(res.records) == 4
    for rec in res.records:
        assert rec["r_fixed"] > 0 and rec["std_error"] > 0
        assert rec["corrected_bound"] == pytest.approx(2 * rec["lemma1_bound"])
    assert {row["condition"] for row in res.summary} == {"d=5,n=500,rank=5", "d=10,n=500,rank=3"}


def test_outlier_detect_small():
    params = dict(iterations=600, burn_in=100)
    res = run_outlier_detect(ExperimentSpec("outlier_detect", replications=2, params=params))
    assert len(res.records) == 2
    for rec in res.records:
        assert len(rec["planted_scores"].split()) == 3
    assert res.summary[0]["count"] == 2


@pytest.mark.slow
def test_block_compare_resampling_beats_fixed_blocks():
    res = run_block_compare(ExperimentSpec("block_compare", replications=20))
    fixed = res.summary_row(estimator="mom_fixed")["error_l2_median"]
    resample = res.summary_row(estimator="mom_resample")["error_l2_median"]
    assert resample < fixed


# ---------------------------------------------------------------- timing

@pytest.fixture(scope="module")
def timing_1000():
    spec = ExperimentSpec("timing", replications=5, params=dict(n=1000, ks=[1, 10, 50, 100]))
    res = run_timing(spec)
    return {row["estimator"]: row for row in res.summary}


def test_timing_k1_matches_erm(timing_1000):
    assert 0.5 <= timing_1000["mom_k1"]["ratio_to_erm"] <= 2.0


def test_timing_decreases_with_k(timing_1000):
    costs = [timing_1000[f"mom_k{k}"]["runtime_ms_median"] for k in (10, 50, 100)]
    # monotone up to 25% timing noise; K=50 and K=100 differ by about 10%
    assert costs[1] <= 1.25 * costs[0] and costs[2] <= 1.25 * costs[1]


@pytest.mark.xfail(reason="each resampled step needs a fresh operator norm of the median block; "
                          "at N=1000 this eigen-solve costs more than a full-data gradient",
                   strict=False)
def test_timing_mom_not_slower_than_erm_at_n1000(timing_1000):
    for k in (10, 50, 100):
        assert timing_1000[f"mom_k{k}"]["ratio_to_erm"] <= 1.0


def test_timing_fixed_blocks_near_erm_at_n1000():
    spec = ExperimentSpec("timing", replications=3, params=dict(n=1000, ks=[10, 50, 100]),
                          solver=SolverConfig(block_strategy="fixed"))
    rows = {row["estimator"]: row for row in run_timing(spec).summary}
    # both are dominated by the two full-data passes; allow scheduling noise
    for k in (10, 50, 100):
        assert rows[f"mom_k{k}"]["ratio_to_erm"] <= 1.25


# ---------------------------------------------------------------- full corruption curve

@pytest.fixture(scope="module")
def full_curve():
    res = run_corruption_curve(ExperimentSpec("corruption_curve", replications=20))
    return {(r["condition"], r["estimator"]): r for r in res.summary}


def _within_half(a, b):
    return max(a, b) <= 1.5 * min(a, b)


@pytest.mark.slow
def test_clean_parameter_errors_within_half(full_curve):
    erm = full_curve[("n_out=0", "erm")]["error_l2_median"]
    mom = full_curve[("n_out=0", "mom")]["error_l2_median"]
    assert _within_half(erm, mom)


@pytest.mark.slow
@pytest.mark.xfail(reason="with K=117 blocks of 8 points MOM misclassifies about twice as often "
                          "as ERM on clean data, although parameter errors are close",
                   strict=True)
def test_clean_test_errors_within_half(full_curve):
    erm = full_curve[("n_out=0", "erm")]["test_error_median"]
    mom = full_curve[("n_out=0", "mom")]["test_error_median"]
    assert _within_half(erm, mom)


@pytest.mark.slow
def test_single_outlier_and_five_percent(full_curve):
    assert full_curve[("n_out=1", "erm")]["ratio_to_clean"] >= 1.5
    assert full_curve[("n_out=1", "mom")]["ratio_to_clean"] <= 1.2
    assert full_curve[("n_out=50", "mom")]["ratio_to_clean"] <= 1.5
