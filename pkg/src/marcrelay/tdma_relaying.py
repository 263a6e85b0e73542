"""TDMA relaying: each user owns a time slot and the relay adapts per slot.

In slot k the link is a single-user relay channel where user k transmits
with boosted power ``P_k / tau_k``. Its best rate depends only on
``||h||^2`` and ``alpha_k``, the squared top singular value of ``H_k``.
Slot lengths proportional to ``alpha_k P_k`` maximize the sum rate.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, PowerBudget, derive_gains
from .exceptions import InvalidAllocationError, ShapeMismatchError
from .joint_relaying import relay_rate

ALLOCATION_TOL = 1e-12


def single_user_rate(sigma1_sq, alpha1, P, P_r):
    """Best single-user AF rate: full power on the strongest channel mode."""
    return float(relay_rate(sigma1_sq, alpha1 * P, P_r))


def check_allocation(tau, K=None):
    """Validate slot durations: nonnegative and summing to one."""
    tau = np.asarray(tau, dtype=float).ravel()
    if K is not None and tau.size != K:
        raise InvalidAllocationError(f"{tau.size} slots for {K} users")
    if not np.all(np.isfinite(tau)) or np.any(tau < 0):
        raise InvalidAllocationError("slot durations must be finite and nonnegative")
    if abs(tau.sum() - 1.0) > ALLOCATION_TOL:
        raise InvalidAllocationError(f"slot durations sum to {tau.sum():.15g}, not 1")
    return tau


def per_user_rates(sigma1_sq, gains, P_r, tau):
    """``tau_k * relay_rate(gain_k / tau_k)`` with the ``tau_k = 0`` limit set to 0.

    `gains` holds ``alpha_k P_k``. `tau` is not required to sum to one,
    which lets finite-difference checks perturb a single slot.
    """
    gains = np.asarray(gains, dtype=float)
    tau = np.asarray(tau, dtype=float)
    gains, tau = np.broadcast_arrays(gains, tau)
    out = np.zeros(tau.shape)
    live = tau > 0
    out[live] = tau[live] * relay_rate(sigma1_sq, gains[live] / tau[live], P_r)
    return out


@dataclass(frozen=True, eq=False)
class TdmaSolution:
    tau: np.ndarray
    per_user_rate: np.ndarray
    sum_rate: float


def _user_gains(c, p):
    if p.P.size != c.K:
        raise ShapeMismatchError(f"{p.P.size} powers for {c.K} users")
    g = derive_gains(c)
    return g.sigma1_sq, g.alpha1 * p.P


def evaluate_tdma_rate(c: ChannelSet, p: PowerBudget, tau) -> TdmaSolution:
    """Per-user and sum rates for the given slot durations."""
    tau = check_allocation(tau, c.K)
    sigma1_sq, gains = _user_gains(c, p)
    rates = per_user_rates(sigma1_sq, gains, p.P_r, tau)
    return TdmaSolution(tau, rates, float(rates.sum()))


def slots_from_gains(gains):
    gains = np.asarray(gains, dtype=float)
    total = gains.sum()
    if not total > 0:
        return np.full(gains.size, 1.0 / gains.size)
    return gains / total


def optimal_time_slots(c: ChannelSet, p: PowerBudget) -> np.ndarray:
    """Slot durations ``alpha_k P_k / sum_j alpha_j P_j``.

    If every ``alpha_k P_k`` is zero all rates vanish and the uniform
    allocation is returned.
    """
    return slots_from_gains(_user_gains(c, p)[1])


def tdma_closed_form(sigma1_sq, gains, P_r):
    """Sum rate at the optimal slots: the single-user rate with gain ``sum_k alpha_k P_k``."""
    return float(relay_rate(sigma1_sq, np.sum(gains), P_r))


def tdma_sum_rate(c: ChannelSet, p: PowerBudget) -> TdmaSolution:
    """Optimal slots, per-user rates at those slots, and the closed-form sum rate.

    ``sum_rate`` is the closed form; it equals ``per_user_rate.sum()`` up to
    rounding.
    """
    sigma1_sq, gains = _user_gains(c, p)
    tau = slots_from_gains(gains)
    rates = per_user_rates(sigma1_sq, gains, p.P_r, tau)
    return TdmaSolution(tau, rates, tdma_closed_form(sigma1_sq, gains, p.P_r))


def slot_matrices(c: ChannelSet, p: PowerBudget, tau=None):
    """Per-slot transmit covariance and relay matrix, ``[(Q_k, F_k), ...]``.

    User k puts power ``P_k / tau_k`` on the top right-singular vector of
    ``H_k``; the relay matches the top left-singular vector to ``h`` with
    ``f_1 = P_r / (1 + alpha_k P_k / tau_k)``. Users with ``tau_k = 0`` get
    zero matrices. Defaults to the optimal slots.
    """
    if tau is None:
        tau = optimal_time_slots(c, p)
    tau = check_allocation(tau, c.K)
    norm_h = np.linalg.norm(c.h)
    out = []
    for H, P, t in zip(c.H_r, p.P, tau):
        m = H.shape[1]
        if t == 0:
            out.append((np.zeros((m, m), dtype=complex),
                        np.zeros((c.M_r, c.M_r), dtype=complex)))
            continue
        U, s, Vh = np.linalg.svd(H)
        q1 = P / t
        Q = q1 * np.outer(Vh[0].conj(), Vh[0])
        if norm_h == 0.0:
            F = np.zeros((c.M_r, c.M_r), dtype=complex)
        else:
            f1 = p.P_r / (1.0 + s[0] ** 2 * q1)
            F = np.sqrt(f1) * np.outer(c.h / norm_h, U[:, 0].conj())
        out.append((Q, F))
    return out
