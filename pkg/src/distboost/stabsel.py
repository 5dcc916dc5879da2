"""Stability selection over (distribution parameter, covariate) pairs.

A covariate selected for two distribution parameters counts as two
base-learners, so frequencies are keyed by pairs and the effective number of
candidates is the total number of learners across parameters.

The per-family error rate is bounded by ``q**2 / ((2 * pi_thr - 1) * p)``.
Any two of ``q``, ``pi_thr`` and ``pfer`` determine the third.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .baselearner import Dataset
from .engine import BoostConfig, Method


class InfeasibleConfigError(ValueError):
    pass


def pfer_bound(q: int, pi_thr: float, effective_p: int) -> float:
    if not 0.5 < pi_thr <= 1.0:
        raise InfeasibleConfigError(f"pi_thr={pi_thr} must lie in (0.5, 1]")
    return q**2 / ((2.0 * pi_thr - 1.0) * effective_p)


@dataclass(frozen=True)
class StabSelConfig:
    q: int
    pi_thr: float
    pfer: float
    effective_p: int
    B: int = 50
    mstop_cap: int = 1000
    seed: int = 0
    given: frozenset[str] = frozenset({"q", "pi_thr"})

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if not 0.5 < self.pi_thr <= 1.0:
            raise InfeasibleConfigError(f"pi_thr={self.pi_thr} must lie in (0.5, 1]")
        if self.pfer <= 0:
            raise ValueError("pfer must be positive")
        if self.B < 2:
            raise ValueError("B must be at least 2")
        if self.mstop_cap < 1:
            raise ValueError("mstop_cap must be positive")
        if self.q > self.effective_p:
            raise InfeasibleConfigError(f"q={self.q} exceeds the {self.effective_p} candidate base-learners")

    def with_threshold(self, pi_thr: float) -> "StabSelConfig":
        return StabSelConfig(
            self.q, pi_thr, pfer_bound(self.q, pi_thr, self.effective_p), self.effective_p,
            self.B, self.mstop_cap, self.seed, frozenset({"q", "pi_thr"}),
        )


def resolve_triple(
    effective_p: int,
    q: int | None = None,
    pi_thr: float | None = None,
    pfer: float | None = None,
    *,
    B: int = 50,
    mstop_cap: int = 1000,
    seed: int = 0,
    bound: str = "MB",
) -> StabSelConfig:
    """Complete (q, pi_thr, pfer) from exactly two supplied values.

    Only the Meinshausen-Buehlmann bound (``bound="MB"``) is available; the
    unimodal and r-concave refinements are not implemented.
    """
    if bound.upper() != "MB":
        raise NotImplementedError(f"error bound {bound!r} is not supported; only 'MB' is")
    given = frozenset(k for k, v in (("q", q), ("pi_thr", pi_thr), ("pfer", pfer)) if v is not None)
    if len(given) != 2:
        raise ValueError("supply exactly two of q, pi_thr and pfer")
    if effective_p < 1:
        raise ValueError("effective_p must be positive")
    if pfer is not None and pfer <= 0:
        raise InfeasibleConfigError("pfer must be positive")

    if pfer is None:
        pfer = pfer_bound(int(q), pi_thr, effective_p)
    elif pi_thr is None:
        pi_thr = (q**2 / (pfer * effective_p) + 1.0) / 2.0
        if pi_thr > 1.0:
            raise InfeasibleConfigError(
                f"q={q}, pfer={pfer} need pi_thr={pi_thr:.4f} > 1; raise pfer or lower q"
            )
    else:
        if not 0.5 < pi_thr <= 1.0:
            raise InfeasibleConfigError(f"pi_thr={pi_thr} must lie in (0.5, 1]")
        q = math.floor(math.sqrt(pfer * (2.0 * pi_thr - 1.0) * effective_p) + 1e-12)
        if q < 1:
            raise InfeasibleConfigError(f"pfer={pfer} with pi_thr={pi_thr} allows q < 1")
    q = int(q)
    if q > effective_p:
        raise InfeasibleConfigError(f"q={q} exceeds effective_p={effective_p}")
    return StabSelConfig(q, float(pi_thr), float(pfer), effective_p, B, mstop_cap, seed, given)


@dataclass
class StabSelResult:
    frequencies: dict[tuple[int, int], float]
    per_subsample_sets: list[frozenset[tuple[int, int]]]
    pi_thr: float
    effective_p: int
    capped: list[int] = field(default_factory=list)

    @property
    def B(self) -> int:
        return len(self.per_subsample_sets)

    def stable_set(self, pi_thr: float | None = None) -> frozenset[tuple[int, int]]:
        thr = self.pi_thr if pi_thr is None else pi_thr
        # frequencies are multiples of 1/B; tolerate rounding at the boundary
        return frozenset(pair for pair, f in self.frequencies.items() if f >= thr - 1e-12)

    def ranked(self) -> list[tuple[tuple[int, int], float]]:
        """Pairs by decreasing frequency, ties in (param, covariate) order."""
        return sorted(self.frequencies.items(), key=lambda kv: (-kv[1], kv[0]))


def selection_frequencies(sets, candidates) -> dict[tuple[int, int], float]:
    B = len(sets)
    counts = dict.fromkeys(candidates, 0)
    for s in sets:
        for pair in s:
            counts[pair] = counts.get(pair, 0) + 1
    return {pair: c / B for pair, c in counts.items()}


def candidate_pairs(boost_config: BoostConfig, p: int) -> list[tuple[int, int]]:
    learners = boost_config.resolve_learners(p)
    return list(dict.fromkeys((k, s.covariate_index) for k, lst in enumerate(learners) for s in lst))


def _subsample_fit(boost_config: BoostConfig, data: Dataset, q: int, seed_seq) -> tuple[frozenset, bool]:
    rng = np.random.default_rng(seed_seq)
    for attempt in range(2):
        idx = np.sort(rng.choice(data.n, size=data.n // 2, replace=False))
        if not boost_config.family.is_degenerate(data.y[idx]):
            break
    else:
        raise ValueError("subsample response degenerate twice in a row")
    state = engine.fit(boost_config, data.subset(idx), max_distinct=q)
    return frozenset(state.selected_pairs()), not state.halted_early


def run_stabsel(config: StabSelConfig, boost_config: BoostConfig, data: Dataset, n_jobs: int = 1) -> StabSelResult:
    """Fit ``B`` half-size subsamples, each until ``q`` distinct pairs enter."""
    if boost_config.method is Method.CYCLICAL:
        boost_config = boost_config.with_mstop([config.mstop_cap] * boost_config.family.n_params)
    else:
        boost_config = boost_config.with_mstop(config.mstop_cap)
    cands = candidate_pairs(boost_config, data.p)
    if len(cands) != config.effective_p:
        raise ValueError(
            f"effective_p={config.effective_p} but the learner set has {len(cands)} pairs"
        )
    seeds = np.random.SeedSequence(config.seed).spawn(config.B)
    if n_jobs == 1:
        results = [_subsample_fit(boost_config, data, config.q, s) for s in seeds]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(
            delayed(_subsample_fit)(boost_config, data, config.q, s) for s in seeds
        )
    sets = [s for s, _ in results]
    capped = [b for b, (_, hit_cap) in enumerate(results) if hit_cap]
    if capped:
        warnings.warn(
            f"{len(capped)} of {config.B} subsample fits reached mstop_cap={config.mstop_cap} "
            f"before selecting q={config.q} base-learners",
            RuntimeWarning,
        )
    return StabSelResult(
        frequencies=selection_frequencies(sets, cands),
        per_subsample_sets=sets,
        pi_thr=config.pi_thr,
        effective_p=config.effective_p,
        capped=capped,
    )


def tp_fp(stable, truth) -> tuple[int, int]:
    """True and false positives of a stable set against a true support.

    ``stable`` may be a :class:`StabSelResult` (its own threshold is used)
    and ``truth`` anything with a ``support`` attribute or a set of pairs.
    """
    if isinstance(stable, StabSelResult):
        stable = stable.stable_set()
    truth = getattr(truth, "support", truth)
    stable, truth = set(stable), set(truth)
    return len(stable & truth), len(stable - truth)
