"""Joint relaying: all users transmit at once, the relay forwards the sum.

For a single-antenna receiver the optimal relay matrix beamforms the top
eigenvector of the received covariance ``R`` onto ``h``, and the sum rate
only depends on ``lambda_max(R)``. Over the transmit covariances that
eigenvalue is maximized by rank-one beamformers aligned with the top
eigenvector of ``R_tilde = sum_k P_k H_k H_k^H``.

Rates are in bits per channel use.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, PowerBudget
from .exceptions import InfeasibleCovarianceError, ShapeMismatchError
from .matrix_core import eig_max, gram, is_psd

FEASIBILITY_RTOL = 1e-9
_LN2 = np.log(2.0)


def relay_rate(sigma1_sq, gain, P_r):
    """Rate of the single-stream AF link as a function of the relay input gain.

    Computes ``log2(1 + s*P_r) - log2(1 + s*P_r / (1 + gain))`` with
    ``s = ||h||^2``. Works elementwise on arrays.
    """
    snr = np.multiply(sigma1_sq, P_r)
    out = (np.log1p(snr) - np.log1p(snr / (1.0 + np.asarray(gain)))) / _LN2
    return np.maximum(out, 0.0)


def relay_rate_ratio_form(sigma1_sq, gain, P_r):
    """Same rate written as ``log2(1 + s*g*P_r / (s*P_r + g + 1))``."""
    snr = np.multiply(sigma1_sq, P_r)
    return np.log1p(snr * gain / (snr + gain + 1.0)) / _LN2


def _check_covariances(c, Q):
    Q = tuple(np.asarray(q, dtype=complex) for q in Q)
    if len(Q) != c.K:
        raise ShapeMismatchError(f"{len(Q)} covariances for {c.K} users")
    for k, (q, m) in enumerate(zip(Q, c.M)):
        if q.shape != (m, m):
            raise ShapeMismatchError(f"Q[{k}] has shape {q.shape}, expected ({m}, {m})")
    return Q


def build_r(c: ChannelSet, Q) -> np.ndarray:
    """Relay input covariance ``sum_k H_k Q_k H_k^H`` (noise excluded)."""
    Q = _check_covariances(c, Q)
    R = np.zeros((c.M_r, c.M_r), dtype=complex)
    for H, q in zip(c.H_r, Q):
        R += H @ q @ H.conj().T
    return 0.5 * (R + R.conj().T)


def build_r_tilde(c: ChannelSet, p: PowerBudget) -> np.ndarray:
    """Power-weighted Gram sum ``sum_k P_k H_k H_k^H``."""
    if p.P.size != c.K:
        raise ShapeMismatchError(f"{p.P.size} powers for {c.K} users")
    R = np.zeros((c.M_r, c.M_r), dtype=complex)
    for H, P in zip(c.H_r, p.P):
        R += P * gram(H)
    return R


def optimal_covariances(c: ChannelSet, p: PowerBudget, v=None):
    """Rank-one covariances that make ``lambda_max(R)`` reach ``lambda_max(R_tilde)``.

    User k beamforms along ``H_k^H v`` with its full power, where ``v`` is
    the top eigenvector of ``R_tilde``. A user with ``H_k^H v = 0`` cannot
    contribute along ``v`` and gets ``Q_k = 0``.
    """
    if v is None:
        v = eig_max(build_r_tilde(c, p))[1]
    Q = []
    for H, P in zip(c.H_r, p.P):
        w = H.conj().T @ v
        denom = np.vdot(w, w).real
        if denom <= (1e-12 * np.linalg.norm(H)) ** 2:
            Q.append(np.zeros((H.shape[1], H.shape[1]), dtype=complex))
            continue
        Q.append(P * np.outer(w, w.conj()) / denom)
    return tuple(Q)


def optimal_relay_matrix(c: ChannelSet, R, P_r) -> np.ndarray:
    """Relay matrix ``(h/||h||) sqrt(P_r / (lambda_1 + 1)) u_1^H``.

    ``lambda_1, u_1`` is the top eigenpair of `R`. Only the first relay
    stream reaches a single-antenna receiver, so all power goes there and
    the relay power constraint holds with equality. A zero `h` gives the
    zero matrix.
    """
    norm_h = np.linalg.norm(c.h)
    if norm_h == 0.0:
        return np.zeros((c.M_r, c.M_r), dtype=complex)
    lam, u = eig_max(R)
    f1 = P_r / (lam + 1.0)
    return np.sqrt(f1) * np.outer(c.h / norm_h, u.conj())


def relay_power(F, R) -> float:
    """Average relay transmit power ``tr(F (I + R) F^H)``."""
    F = np.asarray(F, dtype=complex)
    return float(np.trace(F @ (np.eye(F.shape[1]) + R) @ F.conj().T).real)


@dataclass(frozen=True)
class RateEvaluation:
    sum_rate: float
    relay_power: float
    relay_feasible: bool


def evaluate_sum_rate(c: ChannelSet, F, Q, p: PowerBudget) -> RateEvaluation:
    """Sum rate of joint relaying for an arbitrary relay matrix and covariances.

    ``log2(1 + h^H F R F^H h / (h^H F F^H h + 1))``. Each covariance must be
    PSD with trace at most its user's power (``1e-9`` relative slack),
    otherwise :class:`InfeasibleCovarianceError` is raised. The relay power
    constraint is reported, not enforced.
    """
    Q = _check_covariances(c, Q)
    F = np.asarray(F, dtype=complex)
    if F.shape != (c.M_r, c.M_r):
        raise ShapeMismatchError(f"F has shape {F.shape}, expected ({c.M_r}, {c.M_r})")
    for k, (q, P) in enumerate(zip(Q, p.P)):
        scale = max(1.0, P)
        if not is_psd(q, FEASIBILITY_RTOL * scale):
            raise InfeasibleCovarianceError(f"Q[{k}] is not positive semidefinite")
        tr = np.trace(q).real
        if tr > P + FEASIBILITY_RTOL * scale:
            raise InfeasibleCovarianceError(f"tr(Q[{k}]) = {tr:.12g} exceeds P = {P:.12g}")

    R = build_r(c, Q)
    a = F.conj().T @ c.h
    signal = np.vdot(a, R @ a).real
    noise = np.vdot(a, a).real + 1.0
    rate = float(np.log1p(max(signal, 0.0) / noise) / _LN2)
    power = relay_power(F, R)
    feasible = power <= p.P_r * (1.0 + FEASIBILITY_RTOL) + FEASIBILITY_RTOL
    return RateEvaluation(rate, power, bool(feasible))


@dataclass(frozen=True, eq=False)
class JointSolution:
    """Optimal joint-relaying configuration and its sum rate."""

    F: np.ndarray
    Q: tuple
    lambda_max_Rtilde: float
    v: np.ndarray
    sum_rate: float


def joint_sum_rate(c: ChannelSet, p: PowerBudget) -> JointSolution:
    """Optimal covariances, relay matrix and closed-form joint sum rate."""
    lam, v = eig_max(build_r_tilde(c, p))
    Q = optimal_covariances(c, p, v)
    F = optimal_relay_matrix(c, build_r(c, Q), p.P_r)
    sigma1_sq = float(np.vdot(c.h, c.h).real)
    rate = float(relay_rate(sigma1_sq, lam, p.P_r))
    return JointSolution(F, Q, lam, v, rate)
