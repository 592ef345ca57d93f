import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from probweb import (DomainError, ForestPruner, InconsistentSystemError, MaxEntExtension,
                     PreconditionError, ProductExtension, load_inconsistent)
from probweb.extension import COUNTEREXAMPLE_MAXENT, COUNTEREXAMPLE_PRODUCT

ALL_STATES = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)])


def test_get_params_and_clone():
    est = MaxEntExtension(tol=1e-10, damping=0.5)
    params = est.get_params()
    assert params["tol"] == 1e-10 and params["damping"] == 0.5
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    assert ProductExtension().set_params(table_tol=1e-6).table_tol == 1e-6


def test_product_fit_predict(counterexample):
    est = ProductExtension().fit(counterexample)
    assert est.predict_proba(ALL_STATES).tolist() == list(COUNTEREXAMPLE_PRODUCT)
    assert est.entropy_ == pytest.approx(1.7329, abs=5e-5)
    assert est.score_samples([[0, 0, 1]])[0] == -math.inf


def test_maxent_fit_score(counterexample):
    est = MaxEntExtension().fit(counterexample)
    assert np.allclose(est.predict_proba(ALL_STATES), COUNTEREXAMPLE_MAXENT, atol=1e-9)
    assert est.score([[0, 0, 0], [1, 1, 1]]) == pytest.approx(math.log(1 / 6), abs=1e-8)
    assert est.max_residual_ <= 1e-8 and est.n_iter_ >= 1


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ProductExtension().predict_proba(ALL_STATES)


@pytest.mark.parametrize("X", [[[0, 0]], [[0, 0, 2]], [[0, -1, 0]], [[0.5, 0, 0]]])
def test_bad_assignments(counterexample, X):
    est = ProductExtension().fit(counterexample)
    with pytest.raises((DomainError, ValueError)):
        est.predict_proba(X)


def test_float_integral_assignments_accepted(counterexample):
    est = ProductExtension().fit(counterexample)
    assert est.predict_proba(np.array([[1.0, 1.0, 1.0]]))[0] == 0.25


def test_errors_propagate(counterexample):
    with pytest.raises(InconsistentSystemError):
        MaxEntExtension().fit(load_inconsistent())
    with pytest.raises(PreconditionError):
        ProductExtension().fit(load_inconsistent())  # overlapping absolutes
    with pytest.raises(DomainError):
        ProductExtension().fit("not a system")


def test_forest_pruner(counterexample):
    pruner = ForestPruner().fit(counterexample)
    assert [str(c) for c in pruner.best_forest_] == ["(X1)", "(X2)"]
    assert pruner.information_loss_ == pytest.approx(math.log(4 / 3), abs=1e-6)
    reduced = pruner.transform(counterexample)
    assert len(reduced) == 2
    assert ProductExtension().fit(reduced).entropy_ == pytest.approx(math.log(8))
    reduced2 = ForestPruner().fit_transform(counterexample)
    assert list(reduced2.structure) == list(reduced.structure)
