"""Out-of-bag tuning of the stopping iteration.

Boosting paths are prefix-nested, so a single fit to the largest grid point
yields the out-of-bag risk at every smaller point.  Noncyclical fitting needs
one path per fold.  For cyclical fitting a grid tuple ``t`` is a prefix of
the fit whose budget keeps every component of ``t`` that is below ``max(t)``
and raises the others to the grid maximum; tuples sharing that extension
share one fit.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import engine
from .baselearner import Dataset
from .engine import BoostConfig

log = logging.getLogger(__name__)


class PlanKind(str, Enum):
    SUBSAMPLE = "subsample"
    BOOTSTRAP = "bootstrap"


@dataclass(frozen=True)
class ResamplingPlan:
    kind: PlanKind = PlanKind.SUBSAMPLE
    folds: int = 25
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PlanKind(self.kind))
        if self.folds < 2:
            raise ValueError("need at least two folds")

    def draw(self, n: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """(in-bag, out-of-bag) index arrays for every fold."""
        out = []
        for child in np.random.SeedSequence(self.seed).spawn(self.folds):
            rng = np.random.default_rng(child)
            if self.kind is PlanKind.SUBSAMPLE:
                perm = rng.permutation(n)
                inbag = np.sort(perm[: n // 2])
                oob = np.sort(perm[n // 2:])
            else:
                inbag = np.sort(rng.integers(0, n, size=n))
                oob = np.setdiff1d(np.arange(n), inbag)
            out.append((inbag, oob))
        return out


@dataclass(frozen=True)
class MstopGrid:
    points: tuple
    max_per_param: int

    @property
    def length(self) -> int:
        return len(self.points)

    @property
    def is_scalar(self) -> bool:
        return not isinstance(self.points[0], tuple)

    @classmethod
    def scalar(cls, points) -> "MstopGrid":
        pts = tuple(sorted({int(p) for p in points}))
        return cls(pts, max(pts))


def log_axis(max_per_param: int, length: int) -> list[int]:
    """Log-spaced integers from 1 to ``max_per_param``, endpoints included."""
    if length < 1 or max_per_param < 1:
        raise ValueError("grid length and maximum must be positive")
    raw = np.exp(np.linspace(0.0, np.log(max_per_param), length))
    return sorted({int(v) for v in np.rint(raw)})


def make_grid(max_per_param: int, length: int, n_params: int = 1) -> MstopGrid:
    axis = log_axis(max_per_param, length)
    if n_params == 1:
        return MstopGrid(tuple(axis), max(axis))
    pts = tuple(itertools.product(axis, repeat=n_params))
    return MstopGrid(pts, max(axis))


@dataclass
class CVResult:
    points: tuple
    fold_risk: np.ndarray  # folds x points, summed out-of-bag loss
    fold_sizes: np.ndarray
    path_fits: int
    evaluations: int
    dropped_folds: list[int] = field(default_factory=list)

    @property
    def mean_risk(self) -> np.ndarray:
        """Average over folds of the per-observation out-of-bag risk."""
        return np.mean(self.fold_risk / self.fold_sizes[:, None], axis=0)

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.mean_risk))

    @property
    def best(self):
        return self.points[self.best_index]


def _canonical_extension(point: tuple, grid_max: int) -> tuple:
    g = max(point)
    return tuple(t if t < g else grid_max for t in point)


def _fold_risks(config: BoostConfig, train: Dataset, test: Dataset, grid: MstopGrid):
    """Out-of-bag risk at every grid point plus the number of fits it took."""
    if config.method.noncyclical:
        state = engine.fit(config.with_mstop(grid.max_per_param), train)
        risks = engine.path_risks(state, test)
        return np.array([risks[m] for m in grid.points]), 1

    groups: dict[tuple, list[int]] = {}
    for i, pt in enumerate(grid.points):
        groups.setdefault(_canonical_extension(pt, grid.max_per_param), []).append(i)
    out = np.empty(len(grid.points))
    for ext, members in groups.items():
        state = engine.fit(config.with_mstop(ext), train)
        risks = engine.path_risks(state, test)
        ends = engine.iteration_ends(state)
        for i in members:
            out[i] = risks[ends[max(grid.points[i])]]
    return out, len(groups)


def cv_risk(config: BoostConfig, data: Dataset, plan: ResamplingPlan, grid: MstopGrid, n_jobs: int = 1) -> CVResult:
    """Out-of-bag risk per grid point, averaged over the resampling folds."""
    k = config.family.n_params
    if config.method.noncyclical != grid.is_scalar:
        raise ValueError("noncyclical methods take a scalar grid, cyclical a tuple grid")
    if not grid.is_scalar and any(len(p) != k for p in grid.points):
        raise ValueError(f"grid tuples must have {k} components")

    folds = plan.draw(data.n)
    keep, dropped = [], []
    for b, (inbag, oob) in enumerate(folds):
        if config.family.is_degenerate(data.y[inbag]) or oob.size == 0:
            warnings.warn(f"fold {b} has a degenerate response and is dropped", RuntimeWarning)
            dropped.append(b)
        else:
            keep.append((inbag, oob))
    if not keep:
        raise ValueError("every fold was degenerate")

    jobs = [(config, data.subset(i), data.subset(o), grid) for i, o in keep]
    if n_jobs == 1:
        results = [_fold_risks(*job) for job in jobs]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(_fold_risks)(*job) for job in jobs)
    fold_risk = np.vstack([r for r, _ in results])
    fits = sum(c for _, c in results)
    log.debug("cv_risk: %d folds, %d path fits", len(keep), fits)
    return CVResult(
        points=grid.points,
        fold_risk=fold_risk,
        fold_sizes=np.array([o.size for _, o in keep], dtype=float),
        path_fits=fits,
        evaluations=len(keep) * grid.length,
        dropped_folds=dropped,
    )
