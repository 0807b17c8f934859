import math

import numpy as np
import pytest
from scipy.stats import norm

from minmax_mom import bernstein as bern
from minmax_mom.exceptions import DomainError
from minmax_mom.losses import LossSpec

L1 = LossSpec.quantile(0.5)


def gaussian_abs_excess(h, sigma=1.0):
    """E|Z - h| - E|Z| for Z ~ N(0, sigma^2), closed form."""
    a = h / sigma
    return sigma * (a * (2 * norm.cdf(a) - 1) + 2 * norm.pdf(a)) - 2 * sigma * norm.pdf(0)


def model(noise, design=None, t=(0.0,)):
    return bern.ConditionalModel(design or bern.constant_design(len(t)), np.array(t), noise)


def test_theorem_constant_examples():
    assert bern.theorem_constant("quantile", {"alpha": 0.5}) == 8.0
    assert bern.theorem_constant("hinge", {"alpha": 0.25}) == 8.0
    assert bern.theorem_constant("logistic", {"c0": 0.0, "r": 0.0}) == 8.0
    assert bern.theorem_constant("huber", {"alpha": 0.5}) == 8.0
    with pytest.raises(DomainError):
        bern.theorem_constant("quantile", {"alpha": 0.0})


def test_theorem_constant_decreasing_in_alpha():
    for kind in ("quantile", "huber", "hinge"):
        vals = [bern.theorem_constant(kind, {"alpha": a}) for a in (0.1, 0.2, 0.5, 0.9)]
        assert np.all(np.diff(vals) < 0)


def test_logistic_constant_formula():
    m = 0.3 + 0.1 * (2 * 1.5) ** 2
    want = 2 * (1 + math.exp(m)) ** 2 * math.exp(m)
    got = bern.theorem_constant("logistic", {"c0": 0.3, "r": 0.1, "c_prime": 1.5, "eps": 2.0})
    assert got == pytest.approx(want, rel=1e-14)


def test_densities_integrate_to_one():
    with pytest.raises(DomainError):
        bern.UniformNoise(1.0, 1.0)
    with pytest.raises(DomainError):
        bern.ConditionalModel(bern.constant_design(1), np.array([np.inf]), bern.GaussianNoise())


@pytest.mark.parametrize("h", [0.0, 0.1, 0.5, 1.0, -2.0])
def test_excess_matches_gaussian_closed_form(h):
    m = model(bern.GaussianNoise(1.0))
    got = bern.excess_risk_numeric(m, L1, np.array([h]), n_x=4, seed=0)
    # the quantile loss at tau = 1/2 is half the absolute loss
    assert got == pytest.approx(0.5 * gaussian_abs_excess(h), abs=1e-8)


def test_reference_value_for_unit_shift():
    # [1 (2 Phi(1) - 1) + 2 phi(1)] - 2 phi(0), frozen from the closed form above
    frozen = 0.3687464
    assert gaussian_abs_excess(1.0) == pytest.approx(frozen, abs=1e-7)
    assert abs(frozen - 0.36864) < 2e-4
    m = model(bern.GaussianNoise(1.0))
    got = bern.excess_risk_numeric(m, L1, np.array([1.0]), n_x=4)
    assert got == pytest.approx(frozen / 2, abs=1e-8)


def test_excess_zero_at_truth_and_nonnegative():
    cases = [
        (model(bern.GaussianNoise(1.0)), L1),
        (model(bern.UniformNoise(-1.0, 1.0)), LossSpec.huber(0.5)),
        (model(bern.LogisticLabel(), bern.gaussian_design(2), (1.0, -0.5)), LossSpec.logistic()),
        (model(bern.MarginLabel(0.8), bern.rademacher_design(1), (1.0,)), LossSpec.hinge()),
    ]
    rng = np.random.default_rng(0)
    for mdl, loss in cases:
        assert abs(bern.excess_risk_numeric(mdl, loss, mdl.f_star, n_x=200)) <= 1e-8
        for _ in range(5):
            t = mdl.f_star + rng.normal(0, 0.7, mdl.d)
            assert bern.excess_risk_numeric(mdl, loss, t, n_x=200, seed=1) >= -1e-6


def test_logistic_label_excess_is_exact_two_point_sum():
    mdl = model(bern.LogisticLabel(), bern.constant_design(1), (0.4,))
    loss = LossSpec.logistic()
    eta = 1 / (1 + math.exp(-0.4))

    def risk(u):
        return eta * math.log1p(math.exp(-u)) + (1 - eta) * math.log1p(math.exp(u))

    got = bern.excess_risk_numeric(mdl, loss, np.array([1.1]), n_x=3)
    assert got == pytest.approx(risk(1.1) - risk(0.4), rel=1e-12)


def test_l1_gaussian_certificate_uses_density_minimum():
    rep = bern.check_local_bernstein(model(bern.GaussianNoise(1.0)), L1, 0.1, n_dirs=16,
                                     n_x=200, seed=0)
    assert rep.c_prime == pytest.approx(1.0, abs=1e-9)
    assert rep.alpha == pytest.approx(norm.pdf(0.2), rel=1e-9)
    assert rep.theorem_A == pytest.approx(4 / norm.pdf(0.2), rel=1e-9)
    assert rep.min_ratio >= rep.alpha / 4 and rep.passed


def test_huber_certificate_uses_cdf_window():
    rep = bern.check_local_bernstein(model(bern.GaussianNoise(1.0)), LossSpec.huber(1.0), 0.1,
                                     n_x=200)
    z = np.linspace(-0.2, 0.2, 2001)
    oracle = np.min(norm.cdf(z + 1) - norm.cdf(z - 1))
    assert rep.alpha == pytest.approx(oracle, rel=1e-6)
    assert rep.passed


def test_ratio_shrinks_with_radius():
    m = model(bern.GaussianNoise(1.0))
    near = bern.check_local_bernstein(m, L1, 0.1, n_x=100)
    far = bern.check_local_bernstein(m, L1, 1.0, n_x=100)
    assert near.min_ratio >= far.min_ratio


def test_report_determinism_and_shape():
    m = model(bern.LogisticLabel(), bern.gaussian_design(1), (1.0,))
    a = bern.check_local_bernstein(m, LossSpec.logistic(), 0.1, n_dirs=4, n_x=300, seed=3)
    b = bern.check_local_bernstein(m, LossSpec.logistic(), 0.1, n_dirs=4, n_x=300, seed=3)
    assert a == b
    assert a.directions_tested == len(a.ratios) == 4
    assert a.theorem_A > 0 and math.isfinite(a.min_ratio)


def test_mismatched_models_rejected():
    with pytest.raises(DomainError):
        bern.check_local_bernstein(model(bern.GaussianNoise()), LossSpec.hinge(), 0.1, n_x=10)
    with pytest.raises(DomainError):
        bern.check_local_bernstein(model(bern.GaussianNoise()), L1, 0.0)
    with pytest.raises(DomainError):
        bern.excess_risk_numeric(model(bern.LogisticLabel()), L1, np.array([0.0]), n_x=5)
