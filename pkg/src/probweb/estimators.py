"""scikit-learn style wrappers around the extension routines.

``fit`` takes a :class:`~probweb.system.ProbabilitySystem` in place of a
data matrix.  Fitted estimators expose the joint distribution and can score
joint assignments, given as an integer array with one column per descriptor.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError
from .extension import (SolverConfig, maxent_extension, most_informative_forest,
                        product_extension)
from .system import check_system


def check_assignments(X, space):
    """Validate an ``(n_samples, n_descriptors)`` array of joint states.

    Returns the flat joint-state index of every row.
    """
    X = check_array(X, dtype=None, ensure_2d=True)
    if not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.equal(np.mod(X, 1), 0)):
            raise DomainError("joint assignments must be integer state indices")
        X = X.astype(np.int64)
    if X.shape[1] != len(space):
        raise DomainError(f"expected {len(space)} columns (one per descriptor), got {X.shape[1]}")
    arities = np.array(space.arities)
    if np.any(X < 0) or np.any(X >= arities):
        raise DomainError("state index out of range for its descriptor")
    return np.ravel_multi_index(tuple(X.T), space.arities)


class _ExtensionEstimator(BaseEstimator):

    def _store(self, result, system):
        self.result_ = result
        self.space_ = system.space
        self.distribution_ = result.distribution
        self.entropy_ = result.entropy
        self.n_iter_ = result.iterations
        self.max_residual_ = result.max_residual
        return self

    def predict_proba(self, X):
        """Probability of each joint assignment (row of ``X``)."""
        check_is_fitted(self, ["distribution_"])
        idx = check_assignments(X, self.space_)
        return self.distribution_.probabilities[idx]

    def score_samples(self, X):
        """Natural log-probability of each row; ``-inf`` on zero-probability states."""
        with np.errstate(divide="ignore"):
            return np.log(self.predict_proba(X))

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))


class ProductExtension(_ExtensionEstimator):
    """Product of the component tables of a conditional web.

    Parameters
    ----------
    table_tol : float
        Allowed deviation of each table row sum from 1.

    Attributes
    ----------
    distribution_ : JointDistribution
    entropy_ : float
        In nats.
    """

    def __init__(self, table_tol=1e-9):
        self.table_tol = table_tol

    def fit(self, system, y=None):
        system = check_system(system, self.table_tol)
        return self._store(product_extension(system, self.table_tol), system)


class MaxEntExtension(_ExtensionEstimator):
    """Maximum-entropy joint distribution compatible with a probability system.

    Parameters
    ----------
    tol : float
        Largest constraint residual accepted at convergence.
    entropy_tol : float
        Relative entropy change per sweep accepted at convergence.
    max_iter : int
        Sweep budget.
    damping : float
        Exponent in (0, 1] applied to every scaling factor.
    table_tol : float
        Allowed deviation of each table row sum from 1.
    """

    def __init__(self, tol=1e-8, entropy_tol=1e-9, max_iter=100_000, damping=1.0,
                 table_tol=1e-9):
        self.tol = tol
        self.entropy_tol = entropy_tol
        self.max_iter = max_iter
        self.damping = damping
        self.table_tol = table_tol

    def _config(self):
        return SolverConfig(self.tol, self.entropy_tol, self.max_iter, self.damping)

    def fit(self, system, y=None):
        system = check_system(system, self.table_tol)
        return self._store(maxent_extension(system, self._config()), system)


class ForestPruner(TransformerMixin, BaseEstimator):
    """Keep only the most informative subforest of a probability system.

    ``fit`` searches every subforest; ``transform`` restricts a system with
    the same components to the chosen one.
    """

    def __init__(self, tol=1e-8, entropy_tol=1e-9, max_iter=100_000, tie_tol=1e-7):
        self.tol = tol
        self.entropy_tol = entropy_tol
        self.max_iter = max_iter
        self.tie_tol = tie_tol

    def fit(self, system, y=None):
        system = check_system(system)
        cfg = SolverConfig(self.tol, self.entropy_tol, self.max_iter)
        res = most_informative_forest(system, cfg, self.tie_tol)
        self.result_ = res
        self.best_forest_ = res.best
        self.best_mask_ = res.best_mask
        self.information_ = res.value
        self.information_loss_ = res.loss
        return self

    def transform(self, system):
        check_is_fitted(self, ["best_forest_"])
        return check_system(system).restrict_to(self.best_forest_)
