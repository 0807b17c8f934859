import numpy as np
import pytest

from minmax_mom._seeding import make_rng
from minmax_mom.datagen import corrupt_figure1, gen_logistic_student
from minmax_mom.dataset import Dataset
from minmax_mom.exceptions import DomainError, SelectionError
from minmax_mom.losses import LossSpec
from minmax_mom.model_select import (LepskiConfig, _tk_all, cv_folds, geometric_grid, lepski_select,
                                     lepski_tk, robust_cv_scores, robust_cv_select_k)
from minmax_mom.mom import partition
from minmax_mom.solver import SolverConfig

LOGISTIC = LossSpec.logistic()
L1 = LossSpec.quantile(0.5)
GRID = [1, 2, 4, 8, 16, 32, 64]
V = 4


def small_logistic(seed, n=120, d=3, n_out=0):
    g = make_rng(seed, 0).standard_normal(d)
    t = 3 * g / np.linalg.norm(g)
    data = gen_logistic_student(n, d, t, 1.0, seed + 1)
    return corrupt_figure1(data, n_out, t, seed + 2) if n_out else data


def l1_toy(n=300, seed=0, t_star=1.5):
    rng = np.random.default_rng(seed)
    return Dataset(np.ones((n, 1)), t_star + rng.standard_normal(n))


# ---------------------------------------------------------------- cross-validation

def test_grid_and_folds():
    assert geometric_grid(64) == GRID
    folds = cv_folds(10, 3, seed=1)
    assert sorted(np.concatenate(folds).tolist()) == list(range(10))
    assert [f.size for f in folds] == [4, 3, 3]
    with pytest.raises(DomainError):
        cv_folds(10, 1, 0)


def test_single_candidate():
    assert robust_cv_select_k(small_logistic(0), LOGISTIC, [1], 3,
                              SolverConfig(max_iter=50)) == 1


def test_cv_deterministic_and_grid_order_free():
    data = small_logistic(1)
    cfg = SolverConfig(max_iter=100, seed=3)
    a = robust_cv_select_k(data, LOGISTIC, [1, 4, 16], 3, cfg)
    b = robust_cv_select_k(data, LOGISTIC, [16, 1, 4], 3, cfg)
    assert a == b == robust_cv_select_k(data, LOGISTIC, [1, 4, 16], 3, cfg)


def test_validation_block_rule():
    data = small_logistic(2, n=120)
    cfg = SolverConfig(max_iter=30)
    # K = 90 on 80-point training folds is infeasible
    with pytest.raises(DomainError):
        robust_cv_scores(data, LOGISTIC, [90], 3, cfg)
    with pytest.raises(DomainError):
        robust_cv_scores(data, LOGISTIC, [], 3, cfg)
    with pytest.raises(DomainError):
        robust_cv_scores(data, LOGISTIC, [2], 3, cfg, val_blocks=41)
    # one validation block makes the score a plain held-out mean
    scores = robust_cv_scores(data, LOGISTIC, [1], 3, cfg, val_blocks=1)
    assert scores[1] > 0


def _selections(n_out):
    out = []
    for s in range(20):
        data = small_logistic(100 + s, n=400, d=5, n_out=n_out)
        cfg = SolverConfig(max_iter=500, eps=1e-5, seed=s)
        out.append(robust_cv_select_k(data, LOGISTIC, GRID, V, cfg))
    return np.array(out)


@pytest.fixture(scope="module")
def clean_selections():
    return _selections(0)


@pytest.fixture(scope="module")
def corrupted_selections():
    return _selections(20)


@pytest.mark.xfail(strict=True, reason="the lower-median validation score rewards overconfident "
                   "large-K fits on clean data; the largest K wins in about half of the runs")
def test_clean_data_does_not_oversplit(clean_selections):
    assert np.mean(clean_selections != GRID[-1]) >= 0.8


def test_corrupted_data_selects_twice_the_outliers(corrupted_selections):
    assert np.mean(corrupted_selections >= 2 * 20) >= 0.8


def test_corrupted_data_selects_twice_the_training_outliers(corrupted_selections):
    # K is chosen for training folds, which hold (V-1)/V of the outliers
    assert np.mean(corrupted_selections >= 2 * 20 * (V - 1) / V) >= 0.8


# ---------------------------------------------------------------- Lepski

def test_tk_basic_properties():
    data = l1_toy()
    p = partition(data.n, 5)
    g = np.array([1.0])
    assert lepski_tk(g, data, L1, p, [g]) == 0.0
    few = [[0.5], [1.0]]
    more = few + [[3.0], [-2.0]]
    assert lepski_tk(g, data, L1, p, more) >= lepski_tk(g, data, L1, p, few)
    grid = np.linspace(1.0, 2.0, 21)[:, None]
    assert lepski_tk([1.5], data, L1, p, grid) < lepski_tk([1.5 + 10.0], data, L1, p, grid)


def test_vectorised_tk_is_bitwise_consistent():
    data = l1_toy(n=97, seed=3)
    cands = np.linspace(-1, 4, 26)[:, None]
    values = L1.value(data.x @ cands.T, data.y[:, None]).T
    for k in (1, 2, 7, 97):
        p = partition(data.n, k, seed=k, strategy="shuffled")
        fast = _tk_all(values, p)
        slow = np.array([lepski_tk(c, data, L1, p, cands) for c in cands])
        np.testing.assert_array_equal(fast, slow)


def test_lepski_trivial_thresholds():
    data = l1_toy()
    cands = np.linspace(0, 3, 31)[:, None]
    k_hat, g = lepski_select(data, L1, LepskiConfig([1, 2, 4], {1: np.inf, 2: np.inf, 4: np.inf},
                                                    cands))
    assert k_hat == 1 and g[0] == cands[0, 0]
    with pytest.raises(SelectionError):
        lepski_select(data, L1, LepskiConfig([1, 2], {1: -1.0, 2: -1.0}, cands))


def test_lepski_selection_satisfies_tail_thresholds():
    data = l1_toy(seed=4)
    cands = np.linspace(0, 3, 61)[:, None]
    grid = [1, 2, 4, 8, 16, 32]
    th = {k: 0.01 * (1 + k / 8) for k in grid}
    cfg = LepskiConfig(grid, th, cands, seed=9)
    k_hat, g = lepski_select(data, L1, cfg)
    for j in grid:
        p = partition(data.n, j, seed=9, strategy="shuffled")
        tk = lepski_tk(g, data, L1, p, cands)
        if j >= k_hat:
            assert tk <= th[j]
    # brute force: every member of the tail intersection, and the radius it implies
    members = np.ones(len(cands), dtype=bool)
    for j in grid:
        if j >= k_hat:
            p = partition(data.n, j, seed=9, strategy="shuffled")
            members &= np.array([lepski_tk(c, data, L1, p, cands) <= th[j] for c in cands])
    radius = np.max(np.abs(cands[members, 0] - 1.5))
    assert abs(g[0] - 1.5) <= radius < 0.5


def test_lepski_config_validation():
    with pytest.raises(DomainError):
        LepskiConfig([1, 2], {1: 0.1}, [[0.0]])
    with pytest.raises(DomainError):
        LepskiConfig([], {}, [[0.0]])
    with pytest.raises(DomainError):
        LepskiConfig([1], {1: 0.1}, [])
    with pytest.raises(DomainError):
        lepski_select(l1_toy(n=10), L1, LepskiConfig([20], {20: 1.0}, [[0.0]]))
