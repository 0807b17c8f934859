"""Outlier scores from the median-block history of a traced fit.

A point's score is the number of post burn-in iterations in which it sat in
the median block. Points that corrupt their block push its mean into the tails
and are rarely (often never) selected, so low scores flag suspects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError


@dataclass(frozen=True, eq=False)
class OutlierScores:
    counts: np.ndarray
    iterations_counted: int
    burn_in: int

    def flagged(self, fraction: float = 0.05) -> np.ndarray:
        """Indices in the lowest ``fraction`` of scores (at least one index)."""
        if not 0 < fraction <= 1:
            raise DomainError("fraction must lie in (0, 1]")
        m = max(1, int(np.floor(fraction * self.counts.size)))
        order = np.argsort(self.counts, kind="stable")
        return np.sort(order[:m])


def default_burn_in(iterations: int) -> int:
    return int(0.2 * iterations)


def outlier_scores(result, burn_in: int, n: int = None) -> OutlierScores:
    """Tally median-block membership over iterations ``>= burn_in``.

    >>> from minmax_mom.solver import FitResult
    >>> hist = [(i, np.array(b)) for i, b in enumerate([[0, 1], [2, 3], [0, 1], [0, 1]])]
    >>> res = FitResult(np.zeros(1), np.zeros(1), 4, False, hist, n=4)
    >>> outlier_scores(res, 1).counts.tolist()
    [2, 2, 1, 1]
    """
    history = result.median_block_history
    if not history:
        raise DomainError("fit has no median-block trace; rerun with record_trace=True")
    iterations = int(result.iterations)
    burn_in = int(burn_in)
    if burn_in < 0:
        raise DomainError("burn_in must be nonnegative")
    if burn_in >= iterations:
        raise DomainError(f"burn_in={burn_in} must be smaller than the iteration count {iterations}")
    n = n if n is not None else result.n
    if n is None:
        n = 1 + max(int(np.max(m)) for _, m in history)
    counts = np.zeros(n, dtype=np.int64)
    counted = 0
    for it, members in history:
        if it >= burn_in:
            np.add.at(counts, np.asarray(members, dtype=np.intp), 1)
            counted += 1
    return OutlierScores(counts=counts, iterations_counted=counted, burn_in=burn_in)
