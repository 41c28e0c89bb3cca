import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from latwalk import WalkSearch


def test_params_roundtrip():
    est = WalkSearch(n=8, s=0.9, steps=5)
    assert est.get_params() == {"n": 8, "s": 0.9, "steps": 5, "amplify": True}
    assert clone(est).get_params() == est.get_params()
    est.set_params(n=16)
    assert est.n == 16


def test_fit_predict_finds_mark():
    est = WalkSearch(n=16).fit()
    assert est.n_steps_ == int(np.floor(np.pi / est.beta_))
    assert 0 < est.beta_ < est.phi1_
    marks = np.array([[0, 0], [3, 7], [10, 5]])
    np.testing.assert_array_equal(est.predict(marks), marks)
    proba = est.predict_proba(marks)
    assert proba.shape == (3, 257)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-10)
    assert est.score(marks) > 0.95


def test_without_amplification_mass_is_on_selfloop():
    est = WalkSearch(n=16, amplify=False).fit()
    proba = est.predict_proba([[2, 2]])
    assert proba[0, -1] == pytest.approx(0.9723896211309685, abs=1e-9)


def test_not_fitted_and_bad_input():
    with pytest.raises(NotFittedError):
        WalkSearch().predict([[0, 0]])
    est = WalkSearch(n=8).fit()
    with pytest.raises(ValueError):
        est.predict([[0, 0, 0]])
    with pytest.raises(ValueError):
        est.predict([[9, 0]])
