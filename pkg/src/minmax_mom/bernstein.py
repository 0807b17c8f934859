"""Numerical checks of the local Bernstein condition.

For a synthetic model with a known conditional law of ``Y`` given ``X`` the
excess risk ``P L_f = E[l(f(X), Y) - l(f*(X), Y)]`` is computed by Monte Carlo
over ``X`` and exact integration over ``Y | X`` (adaptive quadrature for
continuous additive noise, a two-point sum for binary labels). Sampling
``f = f* + r u`` on the ``L2(mu)`` sphere of radius ``r`` and comparing
``P L_f / ||f - f*||^2`` with ``1 / A`` certifies the condition
``||f - f*||^2 <= A P L_f`` at that radius.

Bernstein constants ``A``:

==========  ==============================================================
quantile    ``4 / alpha``, alpha = min conditional density near ``f*``
huber       ``4 / alpha``, alpha = min of ``F(z + delta) - F(z - delta)``
hinge       ``2 / alpha``, alpha = min of ``eta, 1 - eta, |1 - 2 eta|``
logistic    ``2 (1 + e^m)^2 e^m`` with ``m = c0 + r (2 C')^{(2+eps)/eps}``
==========  ==============================================================

The neighbourhood in which ``alpha`` is taken has half-width
``r (sqrt(2) C')^{(2+eps)/eps}``, where ``C'`` bounds the
``L_{2+eps} / L_2`` norm ratio over the class.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate
from scipy.special import expit
from scipy.stats import norm as _normal

from ._seeding import make_rng
from .exceptions import DomainError, NumericError
from .losses import LossFamily, LossSpec

QUAD_ABS_TOL = 1e-8
GAUSS_TRUNCATION = 12.0
RATIO_REL_TOL = 0.05


# ---------------------------------------------------------------- noise laws

@dataclass(frozen=True)
class GaussianNoise:
    sigma: float = 1.0

    def pdf(self, s):
        return _normal.pdf(s, scale=self.sigma)

    def cdf(self, s):
        return _normal.cdf(s, scale=self.sigma)

    @property
    def support(self):
        return (-GAUSS_TRUNCATION * self.sigma, GAUSS_TRUNCATION * self.sigma)


@dataclass(frozen=True)
class UniformNoise:
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("uniform noise needs a < b")

    def pdf(self, s):
        s = np.asarray(s, dtype=float)
        return np.where((s >= self.a) & (s <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, s):
        return np.clip((np.asarray(s, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    @property
    def support(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class LogisticLabel:
    """``Y`` in {-1, +1} with ``P(Y = 1 | X) = sigmoid(f*(X))``."""

    def eta(self, fstar):
        return expit(np.asarray(fstar, dtype=float))


@dataclass(frozen=True)
class MarginLabel:
    """``P(Y = 1 | X) = eta_pos`` where ``f*(X) > 0`` and ``1 - eta_pos`` elsewhere."""

    eta_pos: float = 0.8

    def __post_init__(self):
        if not 0.5 < self.eta_pos < 1.0:
            raise DomainError("eta_pos must lie in (1/2, 1)")

    def eta(self, fstar):
        return np.where(np.asarray(fstar, dtype=float) > 0, self.eta_pos, 1.0 - self.eta_pos)


Noise = Union[GaussianNoise, UniformNoise, LogisticLabel, MarginLabel]


# ---------------------------------------------------------------- designs

def constant_design(d: int = 1, value: float = 1.0) -> Callable:
    return lambda rng, n: np.full((n, d), value)


def gaussian_design(d: int = 1) -> Callable:
    return lambda rng, n: rng.standard_normal((n, d))


def rademacher_design(d: int = 1) -> Callable:
    return lambda rng, n: np.where(rng.random((n, d)) < 0.5, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class ConditionalModel:
    """Design sampler, oracle parameter ``f_star`` and conditional law of ``Y``.

    For ``GaussianNoise`` and ``UniformNoise`` the output is
    ``Y = <X, f_star> + noise``; label laws produce ``Y`` in {-1, +1}.
    """

    design_sampler: Callable
    f_star: np.ndarray
    noise: Noise = field(default_factory=GaussianNoise)

    def __post_init__(self):
        t = np.asarray(self.f_star, dtype=float).reshape(-1)
        if not np.all(np.isfinite(t)):
            raise DomainError("f_star must be finite")
        object.__setattr__(self, "f_star", t)
        if self.is_additive:
            lo, hi = self.noise.support
            mass, _ = integrate.quad(self.noise.pdf, lo, hi, epsabs=1e-10, limit=200)
            if abs(mass - 1.0) > 1e-6:
                raise DomainError(f"noise density integrates to {mass}, not 1")

    @property
    def d(self) -> int:
        return self.f_star.size

    @property
    def is_additive(self) -> bool:
        return isinstance(self.noise, (GaussianNoise, UniformNoise))

    def sample_x(self, n: int, seed: int) -> np.ndarray:
        x = np.asarray(self.design_sampler(make_rng(seed), n), dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape != (n, self.d):
            raise DomainError(f"design sampler returned shape {x.shape}, expected {(n, self.d)}")
        return x


# ---------------------------------------------------------------- constants

def theorem_constant(loss_kind, params: dict) -> float:
    """Bernstein constant ``A`` for a loss family.

    ``params`` holds ``alpha`` for quantile, huber and hinge, and
    ``c0``, ``c_prime``, ``eps``, ``r`` for logistic.

    >>> theorem_constant("quantile", {"alpha": 0.5})
    8.0
    >>> theorem_constant("logistic", {"c0": 0.0, "r": 0.0, "c_prime": 1.0, "eps": 2.0})
    8.0
    """
    kind = LossFamily(loss_kind.family if isinstance(loss_kind, LossSpec) else loss_kind)
    if kind is LossFamily.LOGISTIC:
        c0 = float(params.get("c0", 0.0))
        r = float(params.get("r", 0.0))
        c_prime = float(params.get("c_prime", 1.0))
        eps = float(params.get("eps", 2.0))
        if c0 < 0 or r < 0 or c_prime <= 0 or eps <= 0:
            raise DomainError("logistic constant needs c0, r >= 0 and c_prime, eps > 0")
        m = c0 + r * (2.0 * c_prime) ** ((2.0 + eps) / eps)
        return 2.0 * (1.0 + math.exp(m)) ** 2 * math.exp(m)
    alpha = float(params.get("alpha", 0.0))
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if kind is LossFamily.HINGE:
        return 2.0 / alpha
    return 4.0 / alpha


def norm_equivalence_constant(x: np.ndarray, eps: float = 2.0, n_dirs: int = 64,
                              seed: int = 0) -> float:
    """Empirical ``max_u ||<u, X>||_{2+eps} / ||<u, X>||_2`` over random and
    coordinate directions."""
    x = np.asarray(x, dtype=float)
    d = x.shape[1]
    dirs = np.vstack([np.eye(d), make_rng(seed).standard_normal((n_dirs, d))])
    proj = np.abs(x @ dirs.T)
    l2 = np.sqrt(np.mean(proj**2, axis=0))
    ok = l2 > 0
    if not np.any(ok):
        raise DomainError("design is identically zero")
    lp = np.mean(proj[:, ok] ** (2.0 + eps), axis=0) ** (1.0 / (2.0 + eps))
    return float(np.max(lp / l2[ok]))


def neighbourhood_halfwidth(r: float, c_prime: float, eps: float) -> float:
    return r * (math.sqrt(2.0) * c_prime) ** ((2.0 + eps) / eps)


def model_alpha(model: ConditionalModel, loss: LossSpec, r: float, c_prime: float = 1.0,
                eps: float = 2.0, n_grid: int = 2001) -> float:
    """Margin parameter ``alpha`` of ``model`` over the neighbourhood of ``f*``."""
    noise = model.noise
    if loss.family is LossFamily.HINGE:
        if not isinstance(noise, (LogisticLabel, MarginLabel)):
            raise DomainError("hinge loss needs a binary label model")
        fs = model.sample_x(4096, 0) @ model.f_star
        eta = noise.eta(fs)
        return float(np.min(np.minimum(np.minimum(eta, 1 - eta), np.abs(1 - 2 * eta))))
    if not model.is_additive:
        raise DomainError(f"{loss.family.value} loss needs an additive noise model")
    w = neighbourhood_halfwidth(r, c_prime, eps)
    s = np.linspace(-w, w, n_grid)
    if loss.family is LossFamily.QUANTILE:
        return float(np.min(noise.pdf(s)))
    if loss.family is LossFamily.HUBER:
        return float(np.min(noise.cdf(s + loss.delta) - noise.cdf(s - loss.delta)))
    raise DomainError("alpha is not defined for the logistic loss; use c0 and C'")


def logistic_c0(model: ConditionalModel, c_prime: float, eps: float = 2.0, n_x: int = 100_000,
                seed: int = 0) -> float:
    """Empirical ``(1 - (2 C')^{-(4+2eps)/eps})``-quantile of ``|f*(X)|``."""
    level = 1.0 - (2.0 * c_prime) ** (-(4.0 + 2.0 * eps) / eps)
    fs = np.abs(model.sample_x(n_x, seed) @ model.f_star)
    return float(np.quantile(fs, level))


# ---------------------------------------------------------------- excess risk

def _additive_excess(loss: LossSpec, noise, h: float) -> float:
    """``E[l(f* + h, f* + Z) - l(f*, f* + Z)]`` for additive noise ``Z``."""
    if h == 0.0:
        return 0.0
    lo, hi = noise.support
    if loss.family is LossFamily.QUANTILE:
        kinks = [0.0, h]
    elif loss.family is LossFamily.HUBER:
        dl = loss.delta
        kinks = [-dl, dl, h - dl, h + dl]
    else:
        raise DomainError(f"{loss.family.value} loss needs binary labels")
    if isinstance(noise, UniformNoise):
        kinks += [noise.a, noise.b]
    pts = sorted({p for p in kinks if lo < p < hi})

    def integrand(z):
        return (loss.value(h, z, check=False) - loss.value(0.0, z, check=False)) * noise.pdf(z)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(integrand, lo, hi, points=pts or None,
                                        epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=400,
                                        full_output=True)[:3]
    if not np.isfinite(val) or err > 10 * QUAD_ABS_TOL:
        raise NumericError(f"quadrature failed to converge (h={h}, error estimate {err:.2e})")
    return float(val)


def conditional_excess(model: ConditionalModel, loss: LossSpec, f, fstar) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    fstar = np.asarray(fstar, dtype=float)
    if model.is_additive:
        if loss.is_classification:
            raise DomainError("classification loss with a real-valued noise model")
        h = f - fstar
        cache = {}
        out = np.empty_like(h)
        for i, hi in enumerate(h):
            key = float(hi)
            if key not in cache:
                cache[key] = _additive_excess(loss, model.noise, key)
            out[i] = cache[key]
        return out
    if not loss.is_classification:
        raise DomainError("label model needs a classification loss")
    eta = model.noise.eta(fstar)

    def risk(u):
        return eta * loss.value(u, 1.0, check=False) + (1 - eta) * loss.value(u, -1.0, check=False)

    return risk(f) - risk(fstar)


def excess_risk_numeric(model: ConditionalModel, loss: LossSpec, t, n_x: int = 2000,
                        seed: int = 0, x: Optional[np.ndarray] = None) -> float:
    """Monte Carlo estimate of ``P L_f`` for ``f = <t, .>``."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape != model.f_star.shape:
        raise DomainError("parameter dimension does not match the model")
    if x is None:
        x = model.sample_x(n_x, seed)
    return float(np.mean(conditional_excess(model, loss, x @ t, x @ model.f_star)))


# ---------------------------------------------------------------- certificate

@dataclass(frozen=True)
class BernsteinReport:
    loss: LossSpec
    r: float
    directions_tested: int
    min_ratio: float
    theorem_A: float
    passed: bool
    ratios: tuple = ()
    alpha: Optional[float] = None
    c_prime: Optional[float] = None


def check_local_bernstein(model: ConditionalModel, loss: LossSpec, r: float, n_dirs: int = 16,
                          n_x: int = 2000, seed: int = 0, theorem_A: Optional[float] = None,
                          c_prime: Optional[float] = None, eps: float = 2.0,
                          c0: Optional[float] = None) -> BernsteinReport:
    """Check ``P L_f >= ||f - f*||^2 / A`` on ``n_dirs`` points of the sphere.

    Each direction ``u`` is Gaussian, rescaled so that the empirical
    ``L2(mu)`` norm of ``<u, X>`` over the ``n_x`` design draws is 1, and
    ``f = <f* + r u, .>``. Unless given, ``A`` comes from
    :func:`theorem_constant` with ``alpha`` (or ``c0``) read off the model
    and ``C'`` estimated from the design draws.
    """
    if not r > 0:
        raise DomainError("radius must be positive")
    if n_dirs < 1:
        raise DomainError("n_dirs must be >= 1")
    x = model.sample_x(n_x, seed)
    if c_prime is None:
        c_prime = norm_equivalence_constant(x, eps=eps, seed=seed)
    alpha = None
    if theorem_A is None:
        if loss.family is LossFamily.LOGISTIC:
            if c0 is None:
                c0 = logistic_c0(model, c_prime, eps, seed=seed)
            theorem_A = theorem_constant(loss, {"c0": c0, "r": r, "c_prime": c_prime, "eps": eps})
        else:
            alpha = model_alpha(model, loss, r, c_prime, eps)
            theorem_A = theorem_constant(loss, {"alpha": alpha})

    rng = make_rng(seed, 17)
    fstar = x @ model.f_star
    ratios = []
    for _ in range(n_dirs):
        for _attempt in range(100):
            u = rng.standard_normal(model.d)
            l2 = math.sqrt(float(np.mean((x @ u) ** 2)))
            if l2 > 0:
                break
        else:
            raise DomainError("could not draw a direction with nonzero L2 norm")
        u /= l2
        t = model.f_star + r * u
        dist2 = float(np.mean((x @ t - fstar) ** 2))
        excess = float(np.mean(conditional_excess(model, loss, x @ t, fstar)))
        ratios.append(excess / dist2)
    min_ratio = float(min(ratios))
    return BernsteinReport(
        loss=loss,
        r=r,
        directions_tested=n_dirs,
        min_ratio=min_ratio,
        theorem_A=float(theorem_A),
        passed=bool(min_ratio >= (1.0 - RATIO_REL_TOL) / theorem_A),
        ratios=tuple(ratios),
        alpha=alpha,
        c_prime=c_prime,
    )
