"""Component-wise gradient boosting for multi-parameter distributions.

Two fitting schemes are provided:

* cyclical -- every distribution parameter whose own iteration budget is not
  exhausted receives one update per iteration, in parameter order, with each
  gradient evaluated at the freshest predictors;
* noncyclical -- per iteration, each parameter nominates a champion learner
  (by residual sum of squares for ``inner``, by post-update risk for
  ``outer``), and only the parameter whose champion yields the lowest
  post-update risk is updated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .baselearner import BaseLearnerSpec, Dataset, LearnerBlock, linear_learners
from .dist import DistributionFamily, InvalidInputError, get_family


class Method(str, Enum):
    CYCLICAL = "cyclical"
    INNER = "inner"
    OUTER = "outer"

    @property
    def noncyclical(self) -> bool:
        return self is not Method.CYCLICAL


class BoostingError(RuntimeError):
    """Raised when an update drives the empirical risk to a non-finite value."""


@dataclass
class BoostConfig:
    family: DistributionFamily
    method: Method = Method.INNER
    mstop: int | Sequence[int] = 100
    step_length: float = 0.1
    learners: list[list[BaseLearnerSpec]] | None = None

    def __post_init__(self):
        self.family = get_family(self.family)
        self.method = Method(self.method)
        if not 0.0 < self.step_length < 1.0:
            raise ValueError("step_length must lie in (0, 1)")
        k = self.family.n_params
        if self.method.noncyclical:
            if np.ndim(self.mstop) != 0:
                raise ValueError("noncyclical fitting takes a scalar mstop")
            self.mstop = int(self.mstop)
            if self.mstop < 0:
                raise ValueError("mstop must be non-negative")
        else:
            ms = [int(self.mstop)] * k if np.ndim(self.mstop) == 0 else [int(m) for m in self.mstop]
            if len(ms) != k:
                raise ValueError(f"cyclical fitting needs {k} mstop values, got {len(ms)}")
            if min(ms) < 0:
                raise ValueError("mstop entries must be non-negative")
            self.mstop = tuple(ms)
        if self.learners is not None:
            if len(self.learners) != k:
                raise ValueError(f"expected learner lists for {k} parameters")
            if any(len(lst) == 0 for lst in self.learners):
                raise ValueError("each distribution parameter needs at least one base-learner")

    def with_mstop(self, mstop) -> "BoostConfig":
        return BoostConfig(self.family, self.method, mstop, self.step_length, self.learners)

    def resolve_learners(self, p: int) -> list[list[BaseLearnerSpec]]:
        if self.learners is None:
            return [linear_learners(p) for _ in range(self.family.n_params)]
        return [list(lst) for lst in self.learners]

    @property
    def total_mstop(self) -> int:
        return self.mstop if self.method.noncyclical else sum(self.mstop)


@dataclass(frozen=True)
class Update:
    iteration: int
    param: int
    learner: int
    covariate: int
    intercept: float
    slope: float
    risk: float


@dataclass
class UpdateCandidate:
    param: int
    learner: int
    intercept: float
    slope: float
    delta_rho: float


@dataclass
class FitState:
    family: DistributionFamily
    method: Method
    step_length: float
    offsets: list[float]
    etas: list[np.ndarray]
    learners: list[list[BaseLearnerSpec]]
    column_names: list[str]
    risk_trace: list[float] = field(default_factory=list)
    path: list[Update] = field(default_factory=list)
    iterations: int = 0
    halted_early: bool = False

    @property
    def selection_log(self) -> list[tuple[int, int, int]]:
        return [(u.iteration, u.param, u.covariate) for u in self.path]

    @property
    def coefficients(self) -> dict[tuple[int, int], tuple[float, float]]:
        """(param, covariate) -> step-length scaled (intercept, slope) sums."""
        out: dict[tuple[int, int], list[float]] = {}
        for u in self.path:
            acc = out.setdefault((u.param, u.covariate), [0.0, 0.0])
            acc[0] += self.step_length * u.intercept
            acc[1] += self.step_length * u.slope
        return {key: (a, b) for key, (a, b) in out.items()}

    def selected_pairs(self) -> list[tuple[int, int]]:
        """Distinct (param, covariate) pairs in order of first selection."""
        return list(dict.fromkeys((u.param, u.covariate) for u in self.path))

    def slopes(self) -> np.ndarray:
        """k x p matrix of accumulated slopes."""
        out = np.zeros((self.family.n_params, len(self.column_names)))
        for (k, j), (_, b) in self.coefficients.items():
            out[k, j] += b
        return out

    def intercepts(self) -> np.ndarray:
        """Offsets plus every accumulated learner intercept, per parameter."""
        out = np.asarray(self.offsets, dtype=float).copy()
        for (k, _), (a, _) in self.coefficients.items():
            out[k] += a
        return out

    def update_counts(self) -> list[int]:
        counts = [0] * self.family.n_params
        for u in self.path:
            counts[u.param] += 1
        return counts


def _blocks(config: BoostConfig, data: Dataset):
    learners = config.resolve_learners(data.p)
    return learners, [LearnerBlock(lst, data.X) for lst in learners]


def _initial_state(config: BoostConfig, data: Dataset):
    family = config.family
    y = family.validate_response(data.y)
    offs = family.offsets(y)
    learners, blocks = _blocks(config, data)
    etas = [np.full(data.n, o) for o in offs]
    state = FitState(
        family=family,
        method=config.method,
        step_length=config.step_length,
        offsets=offs,
        etas=etas,
        learners=learners,
        column_names=list(data.column_names),
    )
    state.risk_trace.append(_risk(family, y, etas, 0, None))
    return state, blocks, y


def _risk(family, y, etas, iteration, param) -> float:
    try:
        value = float(np.sum(family.loss(y, etas)))
    except InvalidInputError as exc:
        raise BoostingError(
            f"non-finite predictor after iteration {iteration} (parameter {param}): {exc}"
        ) from exc
    if not math.isfinite(value):
        name = family.param_names[param] if param is not None else "offset"
        raise BoostingError(f"non-finite risk at iteration {iteration}, parameter {name}")
    return value


def fit_cyclical(config: BoostConfig, data: Dataset, max_distinct: int | None = None) -> FitState:
    """Cyclical multi-parameter boosting.

    ``max_distinct`` halts the fit as soon as that many distinct
    (parameter, covariate) pairs have been selected.
    """
    if config.method is not Method.CYCLICAL:
        raise ValueError("fit_cyclical requires method='cyclical'")
    state, blocks, y = _initial_state(config, data)
    family, nu = config.family, config.step_length
    etas = state.etas
    seen: set[tuple[int, int]] = set()
    for m in range(1, max(config.mstop, default=0) + 1):
        for k, block in enumerate(blocks):
            if m > config.mstop[k]:
                continue
            u = family.negative_gradient(y, etas, k)
            a, b, rss = block.fit(u)
            j = int(np.argmin(rss))
            etas[k] = etas[k] + nu * (a[j] + b[j] * block.X[:, j])
            risk = _risk(family, y, etas, m, k)
            cov = int(block.cols[j])
            state.path.append(Update(m, k, j, cov, float(a[j]), float(b[j]), risk))
            seen.add((k, cov))
            if max_distinct is not None and len(seen) >= max_distinct:
                state.iterations = m
                state.risk_trace.append(risk)
                state.halted_early = True
                return state
        state.iterations = m
        state.risk_trace.append(state.path[-1].risk)
    return state


def candidates(config: BoostConfig, blocks, y, etas) -> list[UpdateCandidate]:
    """Champion learner and its post-update risk for every parameter."""
    family, nu = config.family, config.step_length
    out = []
    for k, block in enumerate(blocks):
        u = family.negative_gradient(y, etas, k)
        a, b, rss = block.fit(u)
        if config.method is Method.INNER:
            j = int(np.argmin(rss))
            trial = list(etas)
            trial[k] = etas[k] + nu * (a[j] + b[j] * block.X[:, j])
            risk = float(np.sum(family.loss(y, trial)))
        else:
            trial = [e[:, None] for e in etas]
            trial[k] = trial[k] + nu * block.predictions(a, b)
            risks = np.sum(family.loss(y[:, None], trial), axis=0)
            risks = np.where(np.isfinite(risks), risks, np.inf)
            j = int(np.argmin(risks))
            risk = float(risks[j])
        out.append(UpdateCandidate(k, j, float(a[j]), float(b[j]), risk))
    return out


def fit_noncyclical(config: BoostConfig, data: Dataset, max_distinct: int | None = None) -> FitState:
    """Noncyclical boosting: one parameter updated per iteration."""
    if not config.method.noncyclical:
        raise ValueError("fit_noncyclical requires method 'inner' or 'outer'")
    state, blocks, y = _initial_state(config, data)
    nu = config.step_length
    etas = state.etas
    seen: set[tuple[int, int]] = set()
    for m in range(1, config.mstop + 1):
        cands = candidates(config, blocks, y, etas)
        best = min(cands, key=lambda c: c.delta_rho)
        k, j = best.param, best.learner
        block = blocks[k]
        etas[k] = etas[k] + nu * (best.intercept + best.slope * block.X[:, j])
        risk = _risk(config.family, y, etas, m, k)
        cov = int(block.cols[j])
        state.path.append(Update(m, k, j, cov, best.intercept, best.slope, risk))
        state.risk_trace.append(risk)
        state.iterations = m
        seen.add((k, cov))
        if max_distinct is not None and len(seen) >= max_distinct:
            state.halted_early = True
            break
    return state


def fit(config: BoostConfig, data: Dataset, max_distinct: int | None = None) -> FitState:
    if config.method.noncyclical:
        return fit_noncyclical(config, data, max_distinct)
    return fit_cyclical(config, data, max_distinct)


def risk(state: FitState) -> float:
    return state.risk_trace[-1]


def _aligned_X(state: FitState, newdata: Dataset | np.ndarray) -> np.ndarray:
    if not isinstance(newdata, Dataset):
        X = np.atleast_2d(np.asarray(newdata, dtype=float))
        if X.shape[1] != len(state.column_names):
            raise ValueError(
                f"expected {len(state.column_names)} columns, got {X.shape[1]}"
            )
        return X
    if newdata.column_names == state.column_names:
        return newdata.X
    missing = set(state.column_names) - set(newdata.column_names)
    if missing:
        raise ValueError(f"newdata lacks columns {sorted(missing)}")
    order = [newdata.column_names.index(c) for c in state.column_names]
    return newdata.X[:, order]


def predict_etas(state: FitState, newdata: Dataset | np.ndarray) -> list[np.ndarray]:
    X = _aligned_X(state, newdata)
    return list(state.intercepts()[:, None] + state.slopes() @ X.T)


def predict_params(state: FitState, newdata: Dataset | np.ndarray) -> list[np.ndarray]:
    """Distribution parameters (inverse-link scale) for new observations."""
    return state.family.params(predict_etas(state, newdata))


def path_risks(state: FitState, data: Dataset) -> np.ndarray:
    """Risk on ``data`` after each update along the fitted path.

    Entry 0 is the offset risk; entry ``t`` follows the ``t``-th update.
    """
    X = _aligned_X(state, data)
    family, nu = state.family, state.step_length
    y = family.validate_response(data.y)
    etas = [np.full(len(y), o) for o in state.offsets]
    out = np.empty(len(state.path) + 1)
    out[0] = np.sum(family.loss(y, etas))
    for t, u in enumerate(state.path, start=1):
        etas[u.param] = etas[u.param] + nu * (u.intercept + u.slope * X[:, u.covariate])
        out[t] = np.sum(family.loss(y, etas))
    return out


def iteration_ends(state: FitState) -> np.ndarray:
    """Number of path updates completed at the end of each iteration 0..m."""
    its = np.array([u.iteration for u in state.path], dtype=int)
    return np.searchsorted(its, np.arange(state.iterations + 1), side="right")
