import numpy as np
import pytest

from laydown import (
    BeltConfig,
    LaydownEstimator,
    ModelParams,
    NotFittedError,
    ObservationSet,
    Rect,
    expected_occupation,
)

REGIONS = (
    Rect(0.0, 1.0, -3.5, 3.5),
    Rect(0.5, 1.5, -2.5, 2.5),
    Rect(1.0, 2.5, -2.0, 2.0),
    Rect(1.5, 3.5, -1.25, 1.25),
)
SPEEDS = (1.0, 2.0)


@pytest.fixture(scope="module")
def perfect_obs():
    truth = ModelParams(1.2, 0.9, 1.1)
    values = np.array(
        [
            [expected_occupation(truth, BeltConfig(s), r, 10.0) for s in SPEEDS]
            for r in REGIONS
        ]
    )
    return truth, ObservationSet(REGIONS, SPEEDS, 10.0, values)


class TestParamsInterface:
    def test_get_params_round_trip(self):
        est = LaydownEstimator(max_evals=123, quad_tol=1e-7)
        params = est.get_params()
        assert params["max_evals"] == 123
        assert params["quad_tol"] == 1e-7
        clone = LaydownEstimator(**params)
        assert clone.get_params() == params

    def test_set_params_returns_self(self):
        est = LaydownEstimator()
        assert est.set_params(multi_start=True) is est
        assert est.multi_start is True

    def test_set_params_rejects_unknown(self):
        with pytest.raises(ValueError, match="invalid parameter"):
            LaydownEstimator().set_params(bogus=1)

    def test_sklearn_clone_compatible(self):
        sklearn_base = pytest.importorskip("sklearn.base")
        est = LaydownEstimator(multi_start=True, x_tol=1e-5)
        cloned = sklearn_base.clone(est)
        assert cloned is not est
        assert cloned.get_params() == est.get_params()

    def test_repr_mentions_params(self):
        text = repr(LaydownEstimator(max_evals=77))
        assert "max_evals=77" in text


class TestFitPredict:
    def test_fit_observation_set(self, perfect_obs):
        truth, obs = perfect_obs
        est = LaydownEstimator().fit(obs)
        assert est.lambda_ == pytest.approx(truth.lam, rel=1e-3)
        assert est.sigma1_ == pytest.approx(truth.sigma1, rel=1e-3)
        assert est.sigma2_ == pytest.approx(truth.sigma2, rel=1e-3)
        assert est.converged_
        assert est.cost_ < 1e-10
        assert est.n_iter_ > 0

    def test_fit_design_matrix_matches(self, perfect_obs):
        truth, obs = perfect_obs
        X, y = obs.to_design_matrix()
        est = LaydownEstimator().fit(X, y)
        assert est.lambda_ == pytest.approx(truth.lam, rel=1e-3)
        assert est.sigma1_ == pytest.approx(truth.sigma1, rel=1e-3)
        assert est.sigma2_ == pytest.approx(truth.sigma2, rel=1e-3)

    def test_fit_rejects_y_with_observation_set(self, perfect_obs):
        _, obs = perfect_obs
        with pytest.raises(ValueError):
            LaydownEstimator().fit(obs, y=np.ones(8))

    def test_fit_validates_design_matrix(self):
        est = LaydownEstimator()
        with pytest.raises(ValueError):
            est.fit(np.ones((4, 5)), np.ones(4))
        with pytest.raises(ValueError):
            est.fit(np.ones((4, 6)), np.ones(5))
        bad = np.ones((3, 6))
        bad[0, 5] = -1.0  # nonpositive horizon
        with pytest.raises(ValueError):
            est.fit(bad, np.ones(3))

    def test_predict_before_fit_raises(self, perfect_obs):
        _, obs = perfect_obs
        est = LaydownEstimator()
        with pytest.raises(NotFittedError):
            est.predict(obs)

    def test_predict_matches_forward_model(self, perfect_obs):
        truth, obs = perfect_obs
        est = LaydownEstimator().fit(obs)
        predicted = est.predict(obs)
        assert predicted.shape == (8,)
        np.testing.assert_allclose(predicted, obs.values.reshape(-1), rtol=1e-3)

    def test_predict_accepts_new_rows(self, perfect_obs):
        _, obs = perfect_obs
        est = LaydownEstimator().fit(obs)
        X = np.array([[0.0, 2.0, -1.0, 1.0, 1.5, 8.0]])
        value = est.predict(X)
        fitted = ModelParams(est.lambda_, est.sigma1_, est.sigma2_)
        want = expected_occupation(fitted, BeltConfig(1.5), Rect(0, 2, -1, 1), 8.0)
        assert value[0] == pytest.approx(want, rel=1e-12)

    def test_score_is_negative_sse(self, perfect_obs):
        _, obs = perfect_obs
        est = LaydownEstimator().fit(obs)
        score = est.score(obs)
        assert -1e-10 < score <= 0.0
        X, y = obs.to_design_matrix()
        assert est.score(X, y) == pytest.approx(score, abs=1e-12)
