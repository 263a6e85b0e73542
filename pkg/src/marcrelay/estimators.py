"""Estimator-style wrappers around the two relaying schemes.

``fit`` solves one channel instance and stores the optimal configuration
in trailing-underscore attributes. ``predict`` maps a batch of channel
instances to optimal sum rates; it only depends on the constructor
parameters, so it works without a prior ``fit``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_channel_batch, check_channel_set, check_power_budget
from .channel import derive_gains
from .joint_relaying import joint_sum_rate
from .tdma_relaying import slot_matrices, tdma_sum_rate


class _RelayScheme(BaseEstimator):
    def __init__(self, powers=10.0, relay_power=1.0):
        self.powers = powers
        self.relay_power = relay_power

    def _budget(self, c):
        return check_power_budget(self.powers, self.relay_power, c.K)

    def _solve(self, c):
        raise NotImplementedError

    def predict(self, X):
        """Optimal sum rate (bits per channel use) for each channel instance."""
        out = []
        for c in check_channel_batch(X):
            out.append(self._solve(c).sum_rate)
        return np.array(out)

    def score(self, X, y=None):
        """Mean optimal sum rate over the batch."""
        return float(np.mean(self.predict(X)))


class JointRelaying(_RelayScheme):
    """All users transmit simultaneously through one relay matrix.

    Parameters
    ----------
    powers : float or array-like of shape (K,)
        Average transmit power per user.
    relay_power : float
        Relay power budget (equal to the relay SNR for unit noise).

    Attributes
    ----------
    relay_matrix_ : ndarray of shape (M_r, M_r)
    covariances_ : tuple of ndarray
        Rank-one transmit covariance per user.
    lambda_max_ : float
        Largest eigenvalue of the power-weighted channel Gram sum.
    sum_rate_ : float
    """

    def _solve(self, c):
        return joint_sum_rate(c, self._budget(c))

    def fit(self, X, y=None):
        c = check_channel_set(X)
        sol = self._solve(c)
        self.n_users_ = c.K
        self.relay_matrix_ = sol.F
        self.covariances_ = sol.Q
        self.lambda_max_ = sol.lambda_max_Rtilde
        self.eigenvector_ = sol.v
        self.sum_rate_ = sol.sum_rate
        return self


class TdmaRelaying(_RelayScheme):
    """Each user transmits alone in its own slot with a per-slot relay matrix.

    Set ``expand_matrices=True`` to also store the per-slot covariance and
    relay matrices in ``slot_matrices_`` after ``fit``.
    """

    def __init__(self, powers=10.0, relay_power=1.0, expand_matrices=False):
        super().__init__(powers, relay_power)
        self.expand_matrices = expand_matrices

    def _solve(self, c):
        return tdma_sum_rate(c, self._budget(c))

    def fit(self, X, y=None):
        c = check_channel_set(X)
        sol = self._solve(c)
        self.n_users_ = c.K
        self.tau_ = sol.tau
        self.per_user_rate_ = sol.per_user_rate
        self.sum_rate_ = sol.sum_rate
        if self.expand_matrices:
            self.slot_matrices_ = slot_matrices(c, self._budget(c), sol.tau)
        return self


class RelayRateTransformer(TransformerMixin, BaseEstimator):
    """Map channel instances to rate features.

    Columns of the output: joint sum rate, TDMA sum rate,
    ``lambda_max(R_tilde)``, ``sum_k alpha_k P_k``.
    """

    feature_names = ("joint_rate", "tdma_rate", "lambda_max_rtilde", "sum_alpha_p")

    def __init__(self, powers=10.0, relay_power=1.0):
        self.powers = powers
        self.relay_power = relay_power

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        rows = []
        for c in check_channel_batch(X):
            p = check_power_budget(self.powers, self.relay_power, c.K)
            j = joint_sum_rate(c, p)
            t = tdma_sum_rate(c, p)
            rows.append((j.sum_rate, t.sum_rate, j.lambda_max_Rtilde,
                         float(np.sum(derive_gains(c).alpha1 * p.P))))
        return np.array(rows, dtype=float).reshape(-1, 4)

    def get_feature_names_out(self, input_features=None):
        return np.array(self.feature_names, dtype=object)
