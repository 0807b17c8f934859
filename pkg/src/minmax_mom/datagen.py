"""Seeded synthetic data for the robustness experiments.

Every generator is a pure function of its arguments: the same seed gives the
same dataset, and corruption steps record which rows they replaced in
``Dataset.outlier_indices``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import expit

from ._seeding import make_rng
from .dataset import Dataset
from .exceptions import DomainError


def _signs(z):
    # sign with sign(0) = +1 so labels stay in {-1, +1}
    return np.where(z >= 0.0, 1.0, -1.0)


def _as_vector(t_star, d=None):
    t = np.asarray(t_star, dtype=float).reshape(-1)
    if d is not None and t.shape != (d,):
        raise DomainError(f"t_star must have length {d}, got {t.size}")
    return t


def gen_logistic_student(n: int, d: int, t_star, noise_sd: float = 1.0, seed: int = 0,
                         df: float = 5.0) -> Dataset:
    """Logistic labels on a Student-t design.

    ``X`` has i.i.d. Student t(``df``) coordinates and
    ``log P(Y=1|X)/P(Y=-1|X) = <X, t_star> + e`` with ``e ~ N(0, noise_sd^2)``
    drawn once per row.
    """
    if n < 1 or d < 1:
        raise DomainError("n and d must be >= 1")
    t_star = _as_vector(t_star, d)
    rng = make_rng(seed)
    x = rng.standard_t(df, size=(n, d))
    logit = x @ t_star + noise_sd * rng.standard_normal(n)
    y = np.where(rng.random(n) < expit(logit), 1.0, -1.0)
    return Dataset(x, y, t_star=t_star, outlier_indices=np.array([], dtype=np.intp), seed=seed,
                   generator="logistic_student",
                   params={"n": n, "d": d, "noise_sd": noise_sd, "df": df})


def corrupt_figure1(data: Dataset, n_out: int, t_star=None, seed: int = 0,
                    scale: str = "sd") -> Dataset:
    """Replace the first ``n_out`` rows by label-flipped Gaussian outliers.

    Outlier coordinates are i.i.d. ``N(0, 25)`` when ``scale="sd"`` (the 5 is
    read as a standard deviation) or ``N(0, 5)`` when ``scale="var"``. Labels
    are ``-sign(<X_i, t_star> + e_i)`` with ``e_i ~ N(0, 1)``.
    """
    n_out = int(n_out)
    if n_out < 0 or n_out > data.n:
        raise DomainError(f"n_out={n_out} must lie in [0, {data.n}]")
    if scale not in ("sd", "var"):
        raise DomainError("scale must be 'sd' or 'var'")
    t_star = data.t_star if t_star is None else _as_vector(t_star, data.d)
    if t_star is None:
        raise DomainError("corrupt_figure1 needs t_star")
    sd = 5.0 if scale == "sd" else math.sqrt(5.0)
    rng = make_rng(seed)
    xo = sd * rng.standard_normal((n_out, data.d))
    yo = -_signs(xo @ t_star + rng.standard_normal(n_out))
    x = data.x.copy()
    y = data.y.copy()
    x[:n_out] = xo
    y[:n_out] = yo
    params = dict(data.params, n_out=n_out, corruption="figure1", scale=scale, corruption_seed=seed)
    return data.replace(x=x, y=y, outlier_indices=np.arange(n_out), params=params)


def plant_constant_outliers(data: Dataset, positions, level: float = 10.0, t_star=None) -> Dataset:
    """Overwrite rows ``positions`` with ``X_i = (level, ..., level)`` and
    ``Y_i = -sign(<X_i, t_star>)``."""
    positions = np.asarray(positions, dtype=np.intp)
    t_star = data.t_star if t_star is None else _as_vector(t_star, data.d)
    if t_star is None:
        raise DomainError("plant_constant_outliers needs t_star")
    x = data.x.copy()
    y = data.y.copy()
    x[positions] = level
    y[positions] = -_signs(x[positions] @ t_star)
    params = dict(data.params, planted=positions.tolist(), level=level)
    return data.replace(x=x, y=y, outlier_indices=positions, params=params)


def gen_prop1(n: int, d: int, t_star, v_scale: float = 10.0, seed: int = 0) -> Dataset:
    """Noiseless Gaussian linear data with one contaminated input.

    ``Y_i = <X_i, t_star>`` for standard Gaussian ``X_i``; afterwards
    ``X_0 += v`` with ``v = v_scale * n * t_star / ||t_star||``.
    """
    t_star = _as_vector(t_star, d)
    norm = np.linalg.norm(t_star)
    if norm == 0.0:
        raise DomainError("gen_prop1 needs a nonzero t_star")
    rng = make_rng(seed)
    x = rng.standard_normal((n, d))
    y = x @ t_star
    v = (v_scale * n / norm) * t_star
    x[0] += v
    outliers = np.array([0]) if v_scale != 0 else np.array([], dtype=np.intp)
    return Dataset(x, y, t_star=t_star, outlier_indices=outliers, seed=seed, generator="prop1",
                   params={"n": n, "d": d, "v_scale": v_scale, "v": v.tolist()})


def prop2_constants(n: int, x_level: float) -> dict:
    """Constants of the heavy-tailed design: half-width ``delta_prime``,
    spike probability ``delta``, spike size ``R`` and ``E X^2``."""
    delta_prime = math.sqrt(x_level / (2.0 * n)) / 8.0
    delta = 1.0 / (x_level * n)
    r = 4.0 * math.sqrt(x_level * n)
    return {
        "delta_prime": delta_prime,
        "delta": delta,
        "R": r,
        "second_moment": 1.0 + 2.0 * r * delta + r * r * delta,
    }


def gen_prop2(n: int, x_level: float, t_star: float = 0.0, seed: int = 0,
              relax: bool = False) -> Dataset:
    """One-dimensional heavy-tailed design with a sparse-centre noise.

    ``zeta`` is uniform on ``[-x-1/2+dp, -x] U [-dp, dp] U [x, x+1/2-dp]``,
    ``X = e (1 + R b)`` with ``e`` Rademacher and ``b ~ Bernoulli(1/(x n))``,
    and ``Y = X t_star + zeta``. The constants come from
    :func:`prop2_constants`. Requires ``n >= 8000`` and
    ``10 <= x <= n/800`` unless ``relax`` is set.
    """
    n = int(n)
    ok = n >= 8000 and 10 <= x_level <= n / 800
    if not ok:
        if not relax:
            raise DomainError(f"gen_prop2 needs n >= 8000 and 10 <= x <= n/800 (n={n}, x={x_level})")
        warnings.warn("gen_prop2 hypotheses relaxed", stacklevel=2)
    c = prop2_constants(n, x_level)
    dp = c["delta_prime"]
    if not dp < x_level or dp >= 0.5:
        raise DomainError("noise pieces overlap for these (n, x)")
    rng = make_rng(seed)
    # one uniform on [0, 1) mapped onto the three pieces, whose lengths sum to 1
    u = rng.random(n)
    left, mid = 0.5 - dp, 2.0 * dp
    zeta = np.where(
        u < left,
        -x_level - 0.5 + dp + u,
        np.where(u < left + mid, -dp + (u - left), x_level + (u - left - mid)),
    )
    eps = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    spike = rng.random(n) < c["delta"]
    x = eps * (1.0 + c["R"] * spike)
    y = x * float(t_star) + zeta
    return Dataset(x[:, None], y, t_star=np.array([float(t_star)]),
                   outlier_indices=np.array([], dtype=np.intp), seed=seed, generator="prop2",
                   params={"n": n, "x_level": x_level, **c, "n_spikes": int(spike.sum())})


def weighted_median(values, weights) -> float:
    """Smallest ``v`` among ``values`` whose cumulative weight reaches half.

    This is the left end of the minimiser set of ``t -> sum w_i |v_i - t|``.

    >>> weighted_median([1.0, 2.0, 3.0], [1.0, 1.0, 3.0])
    3.0
    >>> weighted_median([1.0, 2.0], [1.0, 1.0])
    1.0
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if values.shape != weights.shape or values.size == 0:
        raise DomainError("values and weights must be nonempty and of equal length")
    if not np.all(weights > 0) or not np.all(np.isfinite(weights)):
        raise DomainError("weights must be positive and finite")
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    i = int(np.searchsorted(cum, 0.5 * cum[-1], side="left"))
    return float(values[order[min(i, values.size - 1)]])


def l1_erm_1d(data: Dataset) -> float:
    """Exact minimiser of ``sum |Y_i - X_i t|`` for one-dimensional ``X``.

    Rows with ``X_i = 0`` do not depend on ``t`` and are ignored.
    """
    if data.d != 1:
        raise DomainError("l1_erm_1d needs a one-dimensional design")
    x = data.x[:, 0]
    keep = x != 0.0
    if not np.any(keep):
        raise DomainError("design is identically zero")
    return weighted_median(data.y[keep] / x[keep], np.abs(x[keep]))
