"""Convex Lipschitz losses ``l(u, y)`` evaluated at a prediction ``u``.

All functions are vectorised over ``u`` and ``y`` (numpy broadcasting) and
return a Python float when both arguments are scalars.

Families
--------
logistic  ``log(1 + exp(-y u))``, ``y`` in {-1, +1}, Lipschitz constant 1
hinge     ``max(1 - y u, 0)``, ``y`` in {-1, +1}, Lipschitz constant 1
huber     ``rho_H(y - u)`` with threshold ``delta``, Lipschitz constant ``delta``
quantile  ``rho_tau(y - u)`` with ``rho_tau(z) = z (tau - 1{z <= 0})``,
          Lipschitz constant 1 (``tau = 0.5`` gives half the absolute loss)

Subgradients are taken with respect to ``u``; at kinks the element of
smallest absolute value is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import expit

from .exceptions import DomainError


class LossFamily(str, Enum):
    LOGISTIC = "logistic"
    HINGE = "hinge"
    HUBER = "huber"
    QUANTILE = "quantile"


CLASSIFICATION_FAMILIES = frozenset({LossFamily.LOGISTIC, LossFamily.HINGE})


@dataclass(frozen=True)
class LossSpec:
    """A loss family together with its parameters.

    Parameters
    ----------
    family : LossFamily or str
        One of ``"logistic"``, ``"hinge"``, ``"huber"``, ``"quantile"``.
    delta : float, optional
        Huber threshold; required (and only allowed) for ``huber``.
    tau : float, optional
        Quantile level in (0, 1); required (and only allowed) for ``quantile``.
    """

    family: LossFamily
    delta: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        try:
            family = LossFamily(self.family)
        except ValueError:
            raise DomainError(f"unknown loss family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        if family is LossFamily.HUBER:
            if self.delta is None or not np.isfinite(self.delta) or self.delta <= 0:
                raise DomainError("huber loss requires delta > 0")
        elif self.delta is not None:
            raise DomainError(f"{family.value} loss takes no delta")
        if family is LossFamily.QUANTILE:
            if self.tau is None or not 0.0 < self.tau < 1.0:
                raise DomainError("quantile loss requires 0 < tau < 1")
        elif self.tau is not None:
            raise DomainError(f"{family.value} loss takes no tau")

    @classmethod
    def logistic(cls) -> "LossSpec":
        return cls(LossFamily.LOGISTIC)

    @classmethod
    def hinge(cls) -> "LossSpec":
        return cls(LossFamily.HINGE)

    @classmethod
    def huber(cls, delta: float) -> "LossSpec":
        return cls(LossFamily.HUBER, delta=float(delta))

    @classmethod
    def quantile(cls, tau: float) -> "LossSpec":
        return cls(LossFamily.QUANTILE, tau=float(tau))

    @property
    def is_classification(self) -> bool:
        return self.family in CLASSIFICATION_FAMILIES

    @property
    def lipschitz(self) -> float:
        return lipschitz(self)

    def value(self, u, y, check: bool = True):
        return loss_value(self, u, y, check=check)

    def subgrad(self, u, y, check: bool = True):
        return loss_subgrad(self, u, y, check=check)


def lipschitz(loss: LossSpec) -> float:
    """Lipschitz constant of ``u -> l(u, y)``.

    The quantile loss reports 1 even though ``max(tau, 1 - tau)`` is tighter.
    """
    if loss.family is LossFamily.HUBER:
        return float(loss.delta)
    return 1.0


def check_labels(loss: LossSpec, y) -> None:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("labels must be finite")
    if loss.is_classification and not np.all(np.abs(y) == 1.0):
        raise DomainError(f"{loss.family.value} loss requires labels in {{-1, +1}}")


def _prepare(loss, u, y, check):
    if (not check and type(u) is np.ndarray and type(y) is np.ndarray
            and u.dtype == np.float64 and y.dtype == np.float64 and u.ndim):
        return u, y, False
    scalar = np.ndim(u) == 0 and np.ndim(y) == 0
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if check:
        if not np.all(np.isfinite(u)):
            raise DomainError("predictions must be finite")
        check_labels(loss, y)
    return u, y, scalar


def _out(arr, scalar):
    return float(arr) if scalar else arr


def loss_value(loss: LossSpec, u, y, check: bool = True):
    """Evaluate ``l(u, y)``.

    Examples
    --------
    >>> round(loss_value(LossSpec.logistic(), 0.0, 1.0), 6)
    0.693147
    >>> loss_value(LossSpec.huber(1.0), 0.0, 2.0)
    1.5
    """
    u, y, scalar = _prepare(loss, u, y, check)
    fam = loss.family
    if fam is LossFamily.LOGISTIC:
        z = -y * u
        out = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    elif fam is LossFamily.HINGE:
        out = np.maximum(1.0 - y * u, 0.0)
    elif fam is LossFamily.HUBER:
        r = np.abs(y - u)
        d = loss.delta
        out = np.where(r <= d, 0.5 * r * r, d * r - 0.5 * d * d)
    else:
        z = y - u
        out = z * (loss.tau - (z <= 0.0))
    return _out(out, scalar)


def loss_subgrad(loss: LossSpec, u, y, check: bool = True):
    """Minimum-norm element of the subdifferential of ``u -> l(u, y)``."""
    u, y, scalar = _prepare(loss, u, y, check)
    fam = loss.family
    if fam is LossFamily.LOGISTIC:
        out = -y * expit(-y * u)
    elif fam is LossFamily.HINGE:
        # kink at y u = 1: subdifferential conv{-y, 0}, min-norm element 0
        out = np.where(y * u < 1.0, -y, 0.0)
    elif fam is LossFamily.HUBER:
        out = -np.clip(y - u, -loss.delta, loss.delta)
    else:
        z = y - u
        tau = loss.tau
        out = np.where(z > 0.0, -tau, np.where(z < 0.0, 1.0 - tau, 0.0))
    return _out(out, scalar)


def parse_loss(name: str, delta: Optional[float] = None, tau: Optional[float] = None) -> LossSpec:
    """Build a :class:`LossSpec` from a command-line style name.

    ``"l1"`` is accepted as the quantile loss at ``tau = 0.5``; its minimisers
    coincide with those of the absolute loss.
    """
    key = name.strip().lower()
    if key in ("l1", "absolute", "median"):
        if tau not in (None, 0.5):
            raise DomainError("l1 loss is the quantile loss at tau=0.5")
        return LossSpec.quantile(0.5)
    if key == "huber":
        return LossSpec(LossFamily.HUBER, delta=1.0 if delta is None else float(delta))
    if key == "quantile":
        return LossSpec(LossFamily.QUANTILE, tau=0.5 if tau is None else float(tau))
    return LossSpec(key)
