"""Response distributions for boosted GAMLSS.

Each family maps ``k`` additive predictors to distribution parameters through
link functions and exposes the per-observation negative log-likelihood and
the negative partial derivatives with respect to every predictor.

Negative binomial uses mean ``mu`` and dispersion ``sigma`` with
``Var(Y) = mu + sigma * mu**2``.  The zero-inflated variant adds a
zero-inflation probability ``nu`` on the logit scale:
``P(Y=0) = nu + (1 - nu) * P_NB(0)`` and ``P(Y=y) = (1 - nu) * P_NB(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import digamma, expit, gammaln, logit

LOG_FLOOR = 1e-10
PROB_FLOOR = 1e-10
LOG_2PI = np.log(2.0 * np.pi)


class InvalidInputError(ValueError):
    """Non-finite predictors or malformed argument shapes."""


class DomainError(ValueError):
    """Response outside the support of the family."""


class Link(str, Enum):
    IDENTITY = "identity"
    LOG = "log"
    LOGIT = "logit"

    def link(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self is Link.IDENTITY:
            return theta
        if self is Link.LOG:
            return np.log(theta)
        return logit(theta)

    def inverse(self, eta, clamp=True):
        eta = np.asarray(eta, dtype=float)
        if self is Link.IDENTITY:
            return eta
        if self is Link.LOG:
            out = np.exp(eta)
            return np.maximum(out, LOG_FLOOR) if clamp else out
        out = expit(eta)
        return np.clip(out, PROB_FLOOR, 1.0 - PROB_FLOOR) if clamp else out


class FamilyName(str, Enum):
    NORMAL = "normal"
    NEGBIN = "negbin"
    ZINB = "zinb"


@dataclass(frozen=True)
class DistributionFamily:
    """A k-parameter response distribution.

    Use the module-level constructors :func:`Normal`, :func:`NegBin` and
    :func:`ZINB` rather than building instances by hand.
    """

    name: FamilyName
    links: tuple[Link, ...]
    param_names: tuple[str, ...]

    def __post_init__(self):
        if len(self.links) != len(self.param_names):
            raise ValueError("links and param_names must have equal length")

    @property
    def n_params(self) -> int:
        return len(self.links)

    @property
    def is_count(self) -> bool:
        return self.name in (FamilyName.NEGBIN, FamilyName.ZINB)

    def param_index(self, key) -> int:
        if isinstance(key, str):
            return self.param_names.index(key)
        key = int(key)
        if not 0 <= key < self.n_params:
            raise IndexError(f"parameter index {key} out of range for {self.name.value}")
        return key

    def params(self, etas: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Inverse-link every predictor, with the documented clamps."""
        return [link.inverse(eta) for link, eta in zip(self.links, etas)]

    def validate_response(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise InvalidInputError("response must be a non-empty 1-d vector")
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("response contains non-finite values")
        if self.is_count and (np.any(y < 0) or np.any(y != np.round(y))):
            raise DomainError(f"{self.name.value} requires non-negative integer counts")
        return y

    def is_degenerate(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        if self.is_count:
            return bool(np.all(y == 0))
        return bool(np.ptp(y) == 0)

    def _check(self, y, etas):
        if len(etas) != self.n_params:
            raise InvalidInputError(
                f"{self.name.value} needs {self.n_params} predictors, got {len(etas)}"
            )
        etas = [np.asarray(e, dtype=float) for e in etas]
        for k, e in enumerate(etas):
            if not np.all(np.isfinite(e)):
                raise InvalidInputError(f"non-finite entries in predictor {self.param_names[k]}")
        return etas

    # pointwise quantities; y and etas broadcast against each other

    def loss(self, y, etas) -> np.ndarray:
        """Negative log-likelihood per observation."""
        etas = self._check(y, etas)
        y = np.asarray(y, dtype=float)
        if self.name is FamilyName.NORMAL:
            return _normal_loss(y, *etas)
        if self.name is FamilyName.NEGBIN:
            mu, sigma = self.params(etas)
            return -_nb_logpmf(y, mu, sigma)
        return _zinb_loss(y, *self.params(etas))

    def negative_gradient(self, y, etas, k) -> np.ndarray:
        """``-d loss / d eta_k`` per observation."""
        etas = self._check(y, etas)
        y = np.asarray(y, dtype=float)
        k = self.param_index(k)
        if self.name is FamilyName.NORMAL:
            mu, log_sigma = etas
            s2 = np.exp(2.0 * log_sigma)
            if k == 0:
                return (y - mu) / s2
            return (y - mu) ** 2 / s2 - 1.0
        mu, sigma = self.params(etas[:2])
        if self.name is FamilyName.NEGBIN:
            return _nb_score(y, mu, sigma, k)
        nu = self.params(etas)[2]
        return _zinb_score(y, mu, sigma, nu, k)

    def offsets(self, y) -> list[float]:
        """Constant starting predictors from moment matching."""
        y = self.validate_response(y)
        if self.name is FamilyName.NORMAL:
            sd = float(np.std(y))
            return [float(np.mean(y)), float(np.log(sd)) if sd > 0 else 0.0]
        if self.name is FamilyName.NEGBIN:
            return _nb_offsets(y)
        pos = y[y > 0]
        base = _nb_offsets(pos if pos.size else y)
        zero_frac = float(np.clip(np.mean(y == 0), 0.01, 0.99))
        return base + [float(logit(zero_frac))]


def _normal_loss(y, mu, log_sigma):
    return 0.5 * LOG_2PI + log_sigma + 0.5 * (y - mu) ** 2 * np.exp(-2.0 * log_sigma)


def _nb_logpmf(y, mu, sigma):
    r = 1.0 / sigma
    log1p_sm = np.log1p(sigma * mu)
    return (
        gammaln(y + r) - gammaln(r) - gammaln(y + 1.0)
        - r * log1p_sm
        + y * (np.log(sigma * mu) - log1p_sm)
    )


def _nb_score(y, mu, sigma, k):
    r = 1.0 / sigma
    if k == 0:
        return (y - mu) / (1.0 + sigma * mu)
    return -r * (
        digamma(y + r) - digamma(r) - np.log1p(sigma * mu) + (mu - y) / (r + mu)
    )


def _zinb_loss(y, mu, sigma, nu):
    log_nb = _nb_logpmf(y, mu, sigma)
    log_p0 = -np.log1p(sigma * mu) / sigma
    # log(nu + (1 - nu) * f0) evaluated stably in log space
    zero = np.logaddexp(np.log(nu), np.log1p(-nu) + log_p0)
    return -np.where(y == 0, zero, np.log1p(-nu) + log_nb)


def _zinb_score(y, mu, sigma, nu, k):
    log_p0 = -np.log1p(sigma * mu) / sigma
    log_l0 = np.logaddexp(np.log(nu), np.log1p(-nu) + log_p0)
    # posterior weight of the count component for a zero observation
    w = np.exp(np.log1p(-nu) + log_p0 - log_l0)
    is_zero = y == 0
    if k == 2:
        # nu (1 - nu)(1 - f0) / L0 simplifies to (1 - w) - nu
        return np.where(is_zero, (1.0 - w) - nu, -nu)
    score = _nb_score(y, mu, sigma, k)
    return np.where(is_zero, w * score, score)


def _nb_offsets(y):
    m = float(np.mean(y))
    v = float(np.var(y))
    disp = (v - m) / m**2 if m > 0 else 0.0
    return [float(np.log(m + 1e-10)), float(np.log(max(disp, 0.01)))]


def Normal() -> DistributionFamily:
    return DistributionFamily(FamilyName.NORMAL, (Link.IDENTITY, Link.LOG), ("mu", "sigma"))


def NegBin() -> DistributionFamily:
    return DistributionFamily(FamilyName.NEGBIN, (Link.LOG, Link.LOG), ("mu", "sigma"))


def ZINB() -> DistributionFamily:
    return DistributionFamily(
        FamilyName.ZINB, (Link.LOG, Link.LOG, Link.LOGIT), ("mu", "sigma", "nu")
    )


FAMILIES = {"normal": Normal, "negbin": NegBin, "zinb": ZINB}


def get_family(name: str | DistributionFamily) -> DistributionFamily:
    if isinstance(name, DistributionFamily):
        return name
    try:
        return FAMILIES[str(name).lower()]()
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


def _as_etas(family, y, etas):
    n = np.shape(y)[0]
    out = []
    for e in etas:
        e = np.asarray(e, dtype=float)
        out.append(np.full(n, float(e)) if e.ndim == 0 else e)
    return out


def nll(family: DistributionFamily, y, etas) -> float:
    """Empirical risk: summed negative log-likelihood."""
    y = family.validate_response(y)
    return float(np.sum(family.loss(y, _as_etas(family, y, etas))))


def negative_gradient(family: DistributionFamily, y, etas, param) -> np.ndarray:
    y = family.validate_response(y)
    return family.negative_gradient(y, _as_etas(family, y, etas), param)


def offsets(family: DistributionFamily, y) -> list[float]:
    return family.offsets(y)
