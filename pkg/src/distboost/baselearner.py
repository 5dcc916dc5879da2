"""One-covariate least-squares base-learners.

Every learner carries its own intercept and regresses the negative gradient
on a single uncentered covariate.  The ridge variant penalizes the slope
only; the fit is computed on the centered covariate and mapped back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np


class LearnerKind(str, Enum):
    LINEAR = "linear"
    RIDGE = "ridge"


@dataclass(frozen=True)
class BaseLearnerSpec:
    covariate_index: int
    kind: LearnerKind = LearnerKind.LINEAR
    penalty: float = 0.0
    include_intercept: bool = True

    def __post_init__(self):
        kind = LearnerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.penalty < 0:
            raise ValueError("penalty must be non-negative")
        if (self.penalty == 0) != (kind is LearnerKind.LINEAR):
            raise ValueError("penalty must be 0 for linear learners and positive for ridge")
        if self.covariate_index < 0:
            raise ValueError("covariate_index must be non-negative")


@dataclass(frozen=True)
class FittedBaseLearner:
    spec: BaseLearnerSpec
    intercept: float
    slope: float
    rss: float


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    column_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        self.y = np.asarray(self.y, dtype=float)
        n, p = self.X.shape
        if n < 2:
            raise ValueError("a dataset needs at least two observations")
        if self.y.shape != (n,):
            raise ValueError(f"y has shape {self.y.shape}, expected ({n},)")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite entries")
        if not self.column_names:
            self.column_names = [f"x{j + 1}" for j in range(p)]
        self.column_names = list(self.column_names)
        if len(self.column_names) != p:
            raise ValueError("column_names length does not match the number of columns")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.column_names)


def _column(spec, X):
    if spec.covariate_index >= X.shape[1]:
        raise IndexError(f"covariate index {spec.covariate_index} outside {X.shape[1]} columns")
    return X[:, spec.covariate_index]


def fit(spec: BaseLearnerSpec, data: Dataset, u) -> FittedBaseLearner:
    """Least-squares (or slope-penalized) fit of ``u`` on one covariate.

    A constant covariate with zero penalty yields slope 0 and the mean of
    ``u`` as intercept.
    """
    x = _column(spec, data.X)
    u = np.asarray(u, dtype=float)
    if u.shape != x.shape:
        raise ValueError("gradient length does not match the dataset")
    if not spec.include_intercept:
        sxx = float(x @ x)
        slope = float(x @ u) / (sxx + spec.penalty) if sxx + spec.penalty > 0 else 0.0
        intercept = 0.0
    else:
        xm, um = x.mean(), u.mean()
        xc = x - xm
        sxx = float(xc @ xc)
        denom = sxx + spec.penalty
        slope = float(xc @ (u - um)) / denom if denom > 0 else 0.0
        intercept = float(um - slope * xm)
    resid = u - intercept - slope * x
    return FittedBaseLearner(spec, intercept, slope, float(resid @ resid))


def predict(fitted: FittedBaseLearner, data: Dataset | np.ndarray) -> np.ndarray:
    X = data.X if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=float))
    return fitted.intercept + fitted.slope * _column(fitted.spec, X)


class LearnerBlock:
    """All learners of one distribution parameter, fitted in one pass.

    Precomputes the centered design so that every iteration needs a single
    matrix-vector product.  Results agree with :func:`fit` up to rounding.
    """

    def __init__(self, specs: Sequence[BaseLearnerSpec], X: np.ndarray):
        if not specs:
            raise ValueError("each distribution parameter needs at least one base-learner")
        self.specs = list(specs)
        self.cols = np.array([s.covariate_index for s in specs], dtype=int)
        if self.cols.max() >= X.shape[1]:
            raise IndexError("base-learner covariate index outside the design matrix")
        self.penalty = np.array([s.penalty for s in specs], dtype=float)
        self.has_icpt = np.array([s.include_intercept for s in specs], dtype=bool)
        Xs = X[:, self.cols]
        self.X = Xs
        self.xbar = np.where(self.has_icpt, Xs.mean(axis=0), 0.0)
        self.Xc = Xs - self.xbar
        self.sxx = np.einsum("ij,ij->j", self.Xc, self.Xc)
        denom = self.sxx + self.penalty
        self._inv = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 0)

    def __len__(self):
        return len(self.specs)

    def fit(self, u: np.ndarray):
        """Return (intercepts, slopes, rss) arrays for every learner."""
        um = u.mean()
        uc = u - um
        sxu = self.Xc.T @ uc
        # learners without intercept regress on raw u
        if not self.has_icpt.all():
            sxu = np.where(self.has_icpt, sxu, self.X.T @ u)
        slopes = sxu * self._inv
        intercepts = np.where(self.has_icpt, um - slopes * self.xbar, 0.0)
        suu = np.where(self.has_icpt, uc @ uc, u @ u)
        rss = suu - 2.0 * slopes * sxu + slopes**2 * self.sxx
        return intercepts, slopes, np.maximum(rss, 0.0)

    def predictions(self, intercepts, slopes, X=None):
        """n x J matrix of learner predictions."""
        Xs = self.X if X is None else X[:, self.cols]
        return intercepts + slopes * Xs


def linear_learners(p: int, kind="linear", penalty: float = 0.0) -> list[BaseLearnerSpec]:
    kind = LearnerKind(kind)
    return [BaseLearnerSpec(j, kind, penalty if kind is LearnerKind.RIDGE else 0.0) for j in range(p)]
