import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distboost.dist import (
    DomainError,
    InvalidInputError,
    Link,
    NegBin,
    Normal,
    ZINB,
    get_family,
    negative_gradient,
    nll,
    offsets,
)

FD_STEP = 1e-6


def nb_logpmf_oracle(y, mu, sigma):
    # direct log-gamma evaluation of the NB(size=1/sigma, mean=mu) pmf
    r = 1.0 / sigma
    p = r / (r + mu)
    return (math.lgamma(y + r) - math.lgamma(r) - math.lgamma(y + 1)
            + r * math.log(p) + y * math.log(1.0 - p))


def random_point(family, rng, n):
    if family.name.value == "normal":
        y = rng.normal(0.0, 2.0, n)
        etas = [rng.uniform(-2, 2, n), rng.uniform(-1, 1, n)]
    else:
        y = rng.integers(0, 25, n).astype(float)
        y[: n // 4] = 0.0
        etas = [rng.uniform(-1, 3, n), rng.uniform(-2, 1, n)]
        if family.n_params == 3:
            etas.append(rng.uniform(-3, 3, n))
    return y, etas


def fd_gradient(family, y, etas, k):
    up = [e.copy() for e in etas]
    dn = [e.copy() for e in etas]
    up[k] += FD_STEP
    dn[k] -= FD_STEP
    # loss is separable, so this is the derivative of each one-observation nll
    return -(family.loss(y, up) - family.loss(y, dn)) / (2 * FD_STEP)


class TestFamilies:
    @pytest.mark.parametrize("factory,links", [
        (Normal, ("identity", "log")),
        (NegBin, ("log", "log")),
        (ZINB, ("log", "log", "logit")),
    ])
    def test_links(self, factory, links):
        fam = factory()
        assert fam.n_params == len(fam.links) == len(fam.param_names)
        assert tuple(link.value for link in fam.links) == links

    def test_get_family(self):
        assert get_family("ZINB").param_names == ("mu", "sigma", "nu")
        with pytest.raises(ValueError, match="unknown family"):
            get_family("gamma")


class TestNll:
    def test_standard_normal_at_mode(self):
        assert nll(Normal(), [0.0], [[0.0], [0.0]]) == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-12)
        assert nll(Normal(), [0.0], [[0.0], [0.0]]) == pytest.approx(0.9189385332, abs=1e-9)

    def test_negbin_matches_pmf_oracle(self):
        value = nll(NegBin(), [3.0], [[math.log(2.0)], [math.log(0.5)]])
        expected = -nb_logpmf_oracle(3, 2.0, 0.5)
        assert expected == pytest.approx(math.log(8.0), abs=1e-12)  # pmf = 0.125
        assert value == pytest.approx(expected, abs=1e-12)

    def test_negbin_pmf_sums_to_one(self):
        ys = np.arange(0, 400, dtype=float)
        probs = np.exp(-NegBin().loss(ys, [np.full_like(ys, math.log(4.0)), np.full_like(ys, math.log(0.7))]))
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)
        assert (ys * probs).sum() == pytest.approx(4.0, abs=1e-8)
        var = ((ys - 4.0) ** 2 * probs).sum()
        assert var == pytest.approx(4.0 + 0.7 * 16.0, abs=1e-7)

    def test_zinb_without_inflation_is_negbin(self, rng):
        y = rng.integers(0, 10, 40).astype(float)
        mu, sg = rng.normal(1, 0.3, 40), rng.normal(-0.5, 0.3, 40)
        zinb = nll(ZINB(), y, [mu, sg, np.full(40, -30.0)])
        nb = nll(NegBin(), y, [mu, sg])
        assert abs(zinb - nb) <= 1e-6

    def test_zinb_pmf_sums_to_one(self):
        ys = np.arange(0, 400, dtype=float)
        etas = [np.full_like(ys, math.log(3.0)), np.full_like(ys, math.log(0.5)), np.full_like(ys, 0.4)]
        assert np.exp(-ZINB().loss(ys, etas)).sum() == pytest.approx(1.0, abs=1e-10)

    def test_nonfinite_predictor_rejected(self):
        with pytest.raises(InvalidInputError):
            nll(Normal(), [1.0, 2.0], [[0.0, np.nan], [0.0, 0.0]])

    def test_wrong_number_of_predictors(self):
        with pytest.raises(InvalidInputError):
            nll(ZINB(), [1.0], [[0.0], [0.0]])

    @pytest.mark.parametrize("y", [[1.5, 2.0], [-1.0, 2.0]])
    def test_count_family_rejects_real_response(self, y):
        with pytest.raises(DomainError):
            nll(NegBin(), y, [[0.0, 0.0], [0.0, 0.0]])

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=30), st.randoms())
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariance(self, ys, rnd):
        y = np.array(ys)
        etas = [np.linspace(-1, 1, len(y)), np.linspace(-0.5, 0.5, len(y))]
        perm = list(range(len(y)))
        rnd.shuffle(perm)
        a = nll(Normal(), y, etas)
        b = nll(Normal(), y[perm], [e[perm] for e in etas])
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


class TestGradient:
    def test_normal_mu_score(self):
        assert negative_gradient(Normal(), [1.0], [[0.0], [0.0]], 0)[0] == pytest.approx(1.0)

    def test_normal_sigma_score_vanishes(self):
        assert negative_gradient(Normal(), [1.0], [[0.0], [0.0]], "sigma")[0] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("factory", [Normal, NegBin, ZINB])
    def test_matches_finite_differences(self, factory, rng):
        fam = factory()
        y, etas = random_point(fam, rng, 200)
        for k in range(fam.n_params):
            analytic = fam.negative_gradient(y, etas, k)
            numeric = fd_gradient(fam, y, etas, k)
            err = np.abs(analytic - numeric)
            ok = (err <= 1e-6 * np.abs(numeric)) | (err <= 1e-8)
            assert ok.all(), (fam.name, k, err.max())

    def test_zinb_gradients_degenerate_to_negbin(self, rng):
        y = rng.integers(0, 12, 50).astype(float)
        mu, sg = rng.normal(1, 0.3, 50), rng.normal(-0.5, 0.3, 50)
        for k in range(2):
            g_z = ZINB().negative_gradient(y, [mu, sg, np.full(50, -30.0)], k)
            g_n = NegBin().negative_gradient(y, [mu, sg], k)
            assert np.max(np.abs(g_z - g_n)) <= 1e-6

    def test_broadcasts_over_candidate_columns(self, rng):
        fam = ZINB()
        y, etas = random_point(fam, rng, 30)
        cand = etas[0][:, None] + np.array([[0.0, 0.1, -0.2]])
        wide = fam.loss(y[:, None], [cand, etas[1][:, None], etas[2][:, None]])
        for j in range(3):
            narrow = fam.loss(y, [cand[:, j], etas[1], etas[2]])
            np.testing.assert_allclose(wide[:, j], narrow, rtol=0, atol=1e-13)


class TestLinks:
    @given(st.floats(-30, 30))
    def test_identity_and_log(self, eta):
        for link in (Link.IDENTITY, Link.LOG):
            assert link.link(link.inverse(eta, clamp=False)) == pytest.approx(eta, abs=1e-12)

    @given(st.floats(-8, 8))
    def test_logit(self, eta):
        assert Link.LOGIT.link(Link.LOGIT.inverse(eta)) == pytest.approx(eta, abs=1e-12)

    @given(st.floats(1e-6, 1 - 1e-6))
    def test_logit_from_probability(self, p):
        assert Link.LOGIT.inverse(Link.LOGIT.link(p)) == pytest.approx(p, abs=1e-12)

    def test_clamps(self):
        assert Link.LOG.inverse(-1000.0) == 1e-10
        assert Link.LOGIT.inverse(-1000.0) == 1e-10
        assert Link.LOGIT.inverse(1000.0) == 1 - 1e-10


class TestOffsets:
    def test_normal(self):
        off = offsets(Normal(), [1, 1, 1, 3, 3, 3])
        assert off == pytest.approx([2.0, math.log(1.0)])

    def test_normal_constant_response_falls_back(self):
        assert offsets(Normal(), [2.0, 2.0, 2.0]) == [2.0, 0.0]

    def test_negbin(self, rng):
        y = rng.negative_binomial(2, 0.3, 300).astype(float)
        m, v = y.mean(), y.var()
        off = offsets(NegBin(), y)
        assert off[0] == pytest.approx(math.log(m), abs=1e-9)
        assert off[1] == pytest.approx(math.log(max((v - m) / m**2, 0.01)))

    def test_negbin_underdispersed_and_all_zero(self):
        assert offsets(NegBin(), [2, 2, 2, 2])[1] == pytest.approx(math.log(0.01))
        off = offsets(NegBin(), [0, 0, 0])
        assert all(np.isfinite(off))
        assert np.isfinite(nll(NegBin(), [0, 0, 0], off))

    def test_zinb_zero_fraction(self):
        y = np.array([0, 0, 0, 1, 2, 5, 0, 3], dtype=float)
        off = offsets(ZINB(), y)
        assert off[2] == pytest.approx(math.log(0.5 / 0.5))
        assert off[0] == pytest.approx(math.log(y[y > 0].mean()))

    @pytest.mark.parametrize("zeros,expected", [(0, 0.01), (10, 0.99)])
    def test_zinb_zero_fraction_is_clamped(self, zeros, expected):
        y = np.array([0.0] * zeros + [1.0] * (10 - zeros))
        assert offsets(ZINB(), y)[2] == pytest.approx(math.log(expected / (1 - expected)))

    @pytest.mark.parametrize("factory", [Normal, NegBin, ZINB])
    def test_offset_risk_finite(self, factory, rng):
        fam = factory()
        y, _ = random_point(fam, rng, 50)
        assert np.isfinite(nll(fam, y, offsets(fam, y)))
