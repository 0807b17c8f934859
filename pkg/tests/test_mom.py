import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from minmax_mom.dataset import Dataset
from minmax_mom.exceptions import DomainError
from minmax_mom.losses import LossSpec
from minmax_mom.mom import (BlockPartition, block_mean, block_means, mom, mom_increment,
                            partition)


def ref_mom(values, blocks):
    """Sort the block means and take rank ceil(K/2); first block attaining it."""
    means = [sum(values[i] for i in b) / len(b) for b in blocks]
    k = len(means)
    target = sorted(means)[math.ceil(k / 2) - 1]
    return target, means.index(target)


finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_partition_examples():
    assert partition(4, 2).blocks.tolist() == [[0, 1], [2, 3]]
    p = partition(5, 2)
    assert p.blocks.tolist() == [[0, 1], [2, 3]]
    assert p.labels[4] == -1
    for strategy in ("contiguous", "shuffled"):
        q = partition(4, 4, seed=3, strategy=strategy)
        assert sorted(q.blocks.ravel().tolist()) == [0, 1, 2, 3]
        assert q.blocks.shape == (4, 1)


@pytest.mark.parametrize("n, k", [(0, 1), (3, 0), (3, 4)])
def test_partition_rejects_bad_counts(n, k):
    with pytest.raises(DomainError):
        partition(n, k)


@given(n=st.integers(1, 300), data=st.data())
def test_partition_invariants(n, data):
    k = data.draw(st.integers(1, n))
    seed = data.draw(st.integers(0, 2**63))
    p = partition(n, k, seed=seed, strategy="shuffled")
    blocks = p.blocks
    assert blocks.shape == (k, n // k)
    flat = blocks.ravel()
    assert np.unique(flat).size == flat.size == k * (n // k)
    assert flat.min() >= 0 and flat.max() < n
    again = partition(n, k, seed=seed, strategy="shuffled")
    np.testing.assert_array_equal(p.labels, again.labels)


def test_shuffled_depends_on_seed():
    a = partition(100, 10, seed=1, strategy="shuffled").labels
    b = partition(100, 10, seed=2, strategy="shuffled").labels
    assert not np.array_equal(a, b)


def test_from_blocks_validation():
    p = BlockPartition.from_blocks([[0, 1], [2, 3]], 4)
    assert p.k == 2
    with pytest.raises(DomainError):
        BlockPartition.from_blocks([[0, 1], [1, 2]], 4)
    with pytest.raises(DomainError):
        BlockPartition.from_blocks([[0, 1], [2]], 4)
    with pytest.raises(DomainError):
        BlockPartition.from_blocks([[0, 5]], 4)


def test_mom_examples():
    v = [1.0, 2.0, 3.0, 100.0]
    r = mom(v, partition(4, 2))
    assert (r.value, r.median_block) == (1.5, 0)
    assert mom(v, partition(4, 1)).value == 26.5
    r = mom(v, partition(4, 4))
    assert (r.value, r.median_block) == (2.0, 1)


def test_mom_ties_lowest_block():
    r = mom([5.0, 5.0, 5.0, 5.0], partition(4, 4))
    assert r.median_block == 0
    r = mom([9.0, 1.0, 1.0, 9.0, 1.0, 1.0], partition(6, 3))
    assert r.value == 5.0 and r.median_block == 0


def test_mom_rejects_non_finite():
    with pytest.raises(DomainError):
        mom([1.0, np.nan], partition(2, 1))
    with pytest.raises(DomainError):
        mom([1.0, 2.0, 3.0], partition(2, 1))


def test_exhaustive_small_against_reference():
    rng = np.random.default_rng(0)
    for n in range(1, 13):
        for k in range(1, n + 1):
            for trial in range(3):
                values = rng.integers(-3, 4, n).astype(float)
                p = partition(n, k, seed=trial, strategy="shuffled")
                got = mom(values, p)
                want = ref_mom(values, p.blocks.tolist())
                assert (got.value, got.median_block) == pytest.approx(want)


@given(values=hnp.arrays(float, st.integers(1, 200), elements=finite), data=st.data())
def test_k1_mean_and_kn_lower_median(values, data):
    n = values.size
    assert mom(values, partition(n, 1)).value == block_mean(values)
    np.testing.assert_allclose(mom(values, partition(n, 1)).value, values.mean(), rtol=1e-9,
                               atol=1e-6)
    low = np.sort(values)[(n + 1) // 2 - 1]
    assert mom(values, partition(n, n)).value == low


@given(values=hnp.arrays(float, st.integers(1, 120), elements=st.floats(-1e3, 1e3)),
       c=st.integers(-1000, 1000), data=st.data())
def test_translation_equivariance(values, c, data):
    n = values.size
    k = data.draw(st.integers(1, n))
    p = partition(n, k, seed=7, strategy="shuffled")
    # integer shifts of values on a 1/1024 grid keep every block sum exact
    values = np.round(values * 1024) / 1024
    base = mom(values, p)
    shifted = mom(values + c, p)
    assert shifted.median_block == base.median_block
    assert shifted.value == pytest.approx(base.value + c, abs=1e-9)


@given(values=hnp.arrays(float, st.integers(1, 200), elements=finite), data=st.data())
def test_value_is_bitwise_block_mean(values, data):
    n = values.size
    k = data.draw(st.integers(1, n))
    p = partition(n, k, seed=data.draw(st.integers(0, 1000)), strategy="shuffled")
    r = mom(values, p)
    assert r.value == block_mean(values[p.blocks[r.median_block]])
    assert r.value == block_means(values, p)[r.median_block]


@given(data=st.data())
def test_robust_to_corrupted_blocks(data):
    k = data.draw(st.integers(1, 15))
    m = data.draw(st.integers(1, 8))
    n = k * m
    values = np.array(data.draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n)))
    p = partition(n, k, seed=data.draw(st.integers(0, 99)), strategy="shuffled")
    clean = block_means(values, p)
    n_bad = math.ceil(k / 2) - 1
    bad = data.draw(st.lists(st.integers(0, k - 1), min_size=n_bad, max_size=n_bad, unique=True))
    corrupted = values.copy()
    for j in bad:
        corrupted[p.blocks[j]] = data.draw(st.sampled_from([1e9, -1e9, 0.0]))
    good = np.delete(clean, bad)
    v = mom(corrupted, p).value
    assert good.min() <= v <= good.max()


def test_randomised_large_against_reference():
    rng = np.random.default_rng(1)
    for n in (97, 1000, 10_000):
        values = rng.standard_t(2, n)
        for k in sorted({1, 2, 7, min(100, n), n // 3, n}):
            p = partition(n, k, seed=k, strategy="shuffled")
            means = np.array([values[b].sum() / p.block_size for b in p.blocks])
            low = np.sort(means)[(k + 1) // 2 - 1]
            r = mom(values, p)
            assert r.value == pytest.approx(low, rel=1e-12, abs=1e-12)


def _toy(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 2))
    return Dataset(x, x @ np.array([1.0, -1.0]) + rng.standard_normal(n))


def test_increment_identity_and_dimension_check():
    data = _toy(12, 0)
    loss = LossSpec.huber(1.0)
    t = np.array([0.3, 0.2])
    for k in (1, 3, 12):
        assert mom_increment(data, t, t, loss, partition(12, k)).value == 0.0
    with pytest.raises(DomainError):
        mom_increment(data, t, np.zeros(3), loss, partition(12, 2))


def test_increment_antisymmetry():
    data = _toy(6, 1)
    loss = LossSpec.quantile(0.5)
    t, t2 = np.array([0.5, 0.1]), np.array([-0.4, 1.0])
    p = partition(6, 3)
    a = mom_increment(data, t, t2, loss, p).value
    b = mom_increment(data, t2, t, loss, p).value
    assert a == -b
    p2 = partition(6, 2)
    lower = mom_increment(data, t, t2, loss, p2).value
    upper = mom_increment(data, t2, t, loss, p2, upper=True).value
    assert lower == -upper


def test_single_corrupted_point_bounded_by_spread():
    # brute force over every position and several magnitudes, N=9, K=3
    rng = np.random.default_rng(2)
    values = rng.standard_normal(9)
    p = partition(9, 3)
    base = mom(values, p).value
    for pos, mag in itertools.product(range(9), (-1e6, -3.0, 3.0, 1e6)):
        corrupted = values.copy()
        corrupted[pos] = mag
        j = p.labels[pos]
        others = np.delete(block_means(values, p), j)
        assert abs(mom(corrupted, p).value - base) <= others.max() - others.min() + 1e-12
