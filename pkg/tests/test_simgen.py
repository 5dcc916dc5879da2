import numpy as np
import pytest

from distboost.simgen import ExperimentSettings, generate, make_scenario, run_experiment

SUPPORT_SIZES = {"1A": 8, "2A": 8, "1B": 6, "2B": 6, "3A": 9, "3B": 8, "Conv": 8}


@pytest.mark.parametrize("sid,size", SUPPORT_SIZES.items())
def test_support_sizes(sid, size):
    assert len(make_scenario(sid).support) == size


def test_conv_design():
    sc = make_scenario("Conv")
    beta = sc.beta()
    np.testing.assert_array_equal(beta[0, :6], [1, 2, 0.5, -1, 0, 0])
    np.testing.assert_array_equal(beta[1, :6], [0, 0, 0.5, 0.25, -0.25, -0.5])
    assert {j for _, j in sc.support} == set(range(6))


def test_3a_support():
    sup = make_scenario("3A").support
    assert {j for k, j in sup if k == 0} == {0, 1, 2}
    assert {j for k, j in sup if k == 1} == {2, 3, 4}
    assert {j for k, j in sup if k == 2} == {0, 4, 5}


def test_unbalanced_supports():
    sup = make_scenario("1B").support
    assert {j for k, j in sup if k == 0} == {0, 1, 2, 3, 4} and {j for k, j in sup if k == 1} == {5}
    sup = make_scenario("3B").support
    assert [len({j for k, j in sup if k == i}) for i in range(3)] == [5, 2, 1]


def test_covariates_uniform_and_noise(rng):
    data, truth = generate(make_scenario("2A", n=400, p_total=30, seed=1))
    assert data.X.shape == (400, 30)
    assert data.X.min() >= -1 and data.X.max() <= 1
    assert all(j < 6 for _, j in truth)
    assert np.all(data.y == np.round(data.y)) and data.y.min() >= 0


def test_reproducible_bytes():
    a, _ = generate(make_scenario("3B", seed=42))
    b, _ = generate(make_scenario("3B", seed=42))
    assert a.X.tobytes() == b.X.tobytes() and a.y.tobytes() == b.y.tobytes()
    c, _ = generate(make_scenario("3B", seed=43))
    assert a.y.tobytes() != c.y.tobytes()


def test_changed_magnitudes_keep_support():
    sc = make_scenario("2B")
    alt = make_scenario("2B", coefficients=({j: 2 * b for j, b in sc.coefficients[0].items()}, sc.coefficients[1]))
    assert alt.support == sc.support
    assert generate(alt)[0].y.tobytes() != generate(sc)[0].y.tobytes()


@pytest.mark.parametrize("sid,mean,var", [
    ("1A", 0.0, 1.0),             # N(0, 1)
    ("2A", 1.0, 1.0 + 1.0),       # NB(mu=1, sigma=1): mu + sigma mu^2
    ("3A", 0.5, 0.5 * 2.0 + 0.25),  # ZINB(nu=0.5): (1-nu)(mu+sigma mu^2) + nu(1-nu) mu^2
])
def test_zero_coefficients_match_closed_form_moments(sid, mean, var):
    sc = make_scenario(sid, n=200_000, p_total=6, seed=3)
    sc = sc.with_(coefficients=tuple({} for _ in sc.coefficients))
    data, truth = generate(sc)
    assert truth == frozenset()
    se = np.sqrt(var / sc.n)
    assert abs(data.y.mean() - mean) < 5 * se
    assert data.y.var() == pytest.approx(var, rel=0.03)


def test_invalid_scenario():
    with pytest.raises(ValueError):
        make_scenario("1A", p_total=4)


class TestRunExperiment:
    def test_convergence_shape(self):
        df = run_experiment("convergence", reps=2, total_iterations=40)
        assert len(df) == 2 * 3 * 12
        per_coef = df.groupby(["param", "covariate"]).size()
        assert (per_coef == 2 * 3).all()

    def test_speed_shape(self):
        df = run_experiment("speed", reps=2, total_iterations=30)
        assert set(df.method) == {"cyclical", "inner", "outer"}
        assert (df.groupby(["replication", "method"]).size() == 31).all()

    def test_runtime_counts(self):
        df = run_experiment("runtime", scenario="1A", reps=1, n=100, folds=2, grid_max=20, grid_length=4,
                            methods=("cyclical", "inner"))
        got = df.set_index(["method", "metric"]).value
        assert got["inner", "path_fits"] == 2
        assert got["cyclical", "evaluations"] == 2 * 16

    def test_stabsweep_rows_and_monotone(self):
        s = ExperimentSettings(scenario="1A", methods=("inner",), reps=2, n=200, q_values=(8, 15),
                               p_values=(10, 20), B=6)
        df = run_experiment("stabsweep", s)
        assert len(df) == 2 * 2 * len(s.pi_grid) * 2
        for _, g in df.groupby(["replication", "method", "p", "q"]):
            g = g.sort_values("pi_thr")
            assert (np.diff(g.tp) <= 0).all() and (np.diff(g.fp) <= 0).all()

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            run_experiment("nope")

    def test_deterministic(self):
        a = run_experiment("speed", reps=2, total_iterations=10, seed=5)
        b = run_experiment("speed", reps=2, total_iterations=10, seed=5)
        assert a.equals(b)
