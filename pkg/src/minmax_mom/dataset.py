"""Dataset container and its CSV representation.

On disk a dataset is a CSV file with header ``y,x1,...,xd`` and one row per
observation, every number printed with 17 significant digits so that a
write/read round trip is exact. Ground-truth metadata lives in an optional
JSON sidecar next to it (``<file>.meta.json``)::

    {"generator": "logistic_student", "params": {...}, "seed": 7,
     "t_star": [...], "outlier_indices": [...]}
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import DomainError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix ``x`` (n, d), outputs ``y`` (n,) and optional ground truth."""

    x: np.ndarray
    y: np.ndarray
    t_star: Optional[np.ndarray] = None
    outlier_indices: Optional[np.ndarray] = None
    seed: Optional[int] = None
    generator: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or y.shape != (x.shape[0],):
            raise DomainError(f"incompatible shapes x{x.shape} y{y.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.t_star is not None:
            t = np.asarray(self.t_star, dtype=float).reshape(-1)
            if t.shape != (x.shape[1],):
                raise DomainError("t_star dimension does not match x")
            object.__setattr__(self, "t_star", t)
        if self.outlier_indices is not None:
            o = np.unique(np.asarray(self.outlier_indices, dtype=np.intp))
            if o.size and (o[0] < 0 or o[-1] >= x.shape[0]):
                raise DomainError("outlier index out of range")
            object.__setattr__(self, "outlier_indices", o)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def replace(self, **changes) -> "Dataset":
        fields = dict(
            x=self.x, y=self.y, t_star=self.t_star, outlier_indices=self.outlier_indices,
            seed=self.seed, generator=self.generator, params=dict(self.params),
        )
        fields.update(changes)
        return Dataset(**fields)

    def subset(self, idx) -> "Dataset":
        """Rows ``idx``; outlier indices are remapped to the new positions."""
        idx = np.asarray(idx, dtype=np.intp)
        outliers = None
        if self.outlier_indices is not None:
            outliers = np.flatnonzero(np.isin(idx, self.outlier_indices))
        return self.replace(x=self.x[idx], y=self.y[idx], outlier_indices=outliers)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_csv(data: Dataset, path, metadata: bool = True) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"] + [f"x{j + 1}" for j in range(data.d)])
        for yi, row in zip(data.y, data.x):
            w.writerow([_fmt(yi)] + [_fmt(v) for v in row])
    if metadata:
        meta = {
            "generator": data.generator,
            "params": data.params,
            "seed": data.seed,
            "t_star": None if data.t_star is None else [float(v) for v in data.t_star],
            "outlier_indices": None
            if data.outlier_indices is None
            else [int(i) for i in data.outlier_indices],
        }
        meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_csv(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "y" or len(header) < 2:
            raise DomainError(f"{path}: header must be 'y,x1,...,xd'")
        rows = [r for r in reader if r]
    if not rows:
        raise DomainError(f"{path}: no data rows")
    try:
        arr = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    if arr.shape[1] != len(header):
        raise DomainError(f"{path}: ragged rows")
    kw = {}
    mp = meta_path(path)
    if mp.exists():
        meta = json.loads(mp.read_text())
        kw = dict(
            t_star=meta.get("t_star"),
            outlier_indices=meta.get("outlier_indices"),
            seed=meta.get("seed"),
            generator=meta.get("generator"),
            params=meta.get("params") or {},
        )
    return Dataset(arr[:, 1:], arr[:, 0], **kw)
