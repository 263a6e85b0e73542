"""Brute-force and randomized checks of the optimality and ordering results.

Each check returns an :class:`OracleReport`. A *margin* is how far a trial
stays on the safe side of the inequality being tested (closed form minus
competitor, smallest eigenvalue, ...); a violation is a margin below
``-tol``. Every check is deterministic given its seed.

The random-search paths are vectorized with plain numpy and do not call the
closed-form code they are checking.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel import (ChannelSet, PowerBudget, derive_gains, make_rng, sample_rayleigh,
                      save_channels)
from .exceptions import GridTooLargeError, StepOutOfRangeError
from .joint_relaying import (build_r, evaluate_sum_rate, joint_sum_rate,
                             optimal_relay_matrix)
from .matrix_core import eig_max, gram, is_psd
from .tdma_relaying import check_allocation, per_user_rates, slots_from_gains, tdma_sum_rate

_LN2 = np.log(2.0)
MAX_GRID_USERS = 4


@dataclass
class OracleReport:
    name: str
    trials: int = 0
    violations: int = 0
    worst_gap: float = np.inf
    details: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def record(self, margins, tol, describe=None):
        """Fold an array of margins into the report."""
        margins = np.atleast_1d(np.asarray(margins, dtype=float))
        self.trials += margins.size
        if margins.size:
            self.worst_gap = min(self.worst_gap, float(margins.min()))
        bad = np.flatnonzero(margins < -tol)
        self.violations += bad.size
        for i in bad:
            d = {"index": int(i), "gap": float(margins[i])}
            if describe is not None:
                d.update(describe(int(i)))
            self.details.append(d)

    @property
    def passed(self):
        return self.violations == 0

    def summary(self):
        return (f"{self.name}: trials={self.trials} violations={self.violations} "
                f"worst_gap={self.worst_gap:.3e}")


def dump_violation(c: ChannelSet, path, note=""):
    """Write the offending channel with a ``# violation`` header."""
    comments = ["violation"] + ([note] if note else [])
    save_channels(c, path, comments)


def _cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _random_covariances(rng, n, M, P):
    # Gram of a square Gaussian draw, scaled so the trace meets the budget
    G = _cgauss(rng, (n, M, M))
    Q = G @ G.conj().transpose(0, 2, 1)
    tr = np.trace(Q, axis1=1, axis2=2).real
    return Q * (P / tr)[:, None, None]


def _batch_r(c, Qs):
    R = np.zeros((Qs[0].shape[0], c.M_r, c.M_r), dtype=complex)
    for H, Q in zip(c.H_r, Qs):
        R += H[None] @ Q @ H.conj().T[None]
    return R


def _batch_rate(h, F, R):
    a = F.conj().transpose(0, 2, 1) @ h
    signal = np.einsum("ni,nij,nj->n", a.conj(), R, a).real
    noise = np.einsum("ni,ni->n", a.conj(), a).real + 1.0
    return np.log1p(np.maximum(signal, 0.0) / noise) / _LN2


def _batch_relay_power(F, R):
    eye = np.eye(R.shape[-1])[None]
    return np.trace(F @ (eye + R) @ F.conj().transpose(0, 2, 1), axis1=1, axis2=2).real


def random_feasible_joint_search(c: ChannelSet, p: PowerBudget, n, seed, tol=1e-9):
    """Try to beat the joint-relaying closed form with random feasible choices.

    Two populations of `n` samples each: random trace-tight covariances with
    the best relay matrix for their ``R``, and random covariances with a
    random relay matrix scaled onto the relay power budget. Also checks
    that no sampled ``lambda_max(R)`` exceeds ``lambda_max(R_tilde)``.
    ``info`` holds the margins of two structured competitors: the rank-one
    optimum itself and scaled-identity covariances.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sol = joint_sum_rate(c, p)
    best = sol.sum_rate
    rng = make_rng(seed)
    h = c.h
    norm_h = np.linalg.norm(c.h)
    report = OracleReport("theorem1")
    report.info["closed_form"] = best

    # population 1: random covariances, optimal relay for each
    Qs = [_random_covariances(rng, n, m, P) for m, P in zip(c.M, p.P)]
    R = _batch_r(c, Qs)
    w, V = np.linalg.eigh(R)
    lam, u = w[:, -1], V[:, :, -1]
    scale = max(1.0, sol.lambda_max_Rtilde)
    report.record(sol.lambda_max_Rtilde - lam, tol * scale,
                  lambda i: {"kind": "lambda_max"})
    if norm_h > 0:
        f1 = p.P_r / (np.maximum(lam, 0.0) + 1.0)
        F = np.sqrt(f1)[:, None, None] * (c.h / norm_h)[None, :, None] * u.conj()[:, None, :]
    else:
        F = np.zeros((n, c.M_r, c.M_r), dtype=complex)
    report.record(best - _batch_rate(h, F, R), tol,
                  lambda i: {"kind": "random_Q_optimal_F"})

    # population 2: random covariances and random relay matrices on the power budget
    Qs = [_random_covariances(rng, n, m, P) for m, P in zip(c.M, p.P)]
    R = _batch_r(c, Qs)
    F = _cgauss(rng, (n, c.M_r, c.M_r))
    F *= np.sqrt(p.P_r / _batch_relay_power(F, R))[:, None, None]
    report.record(best - _batch_rate(h, F, R), tol,
                  lambda i: {"kind": "random_Q_random_F"})

    ev = evaluate_sum_rate(c, sol.F, sol.Q, p)
    report.info["rank_one_gap"] = best - ev.sum_rate
    Q_id = tuple(np.eye(m) * (P / m) for m, P in zip(c.M, p.P))
    F_id = optimal_relay_matrix(c, build_r(c, Q_id), p.P_r)
    report.info["scaled_identity_gap"] = best - evaluate_sum_rate(c, F_id, Q_id, p).sum_rate
    report.record([report.info["rank_one_gap"], report.info["scaled_identity_gap"]], tol,
                  lambda i: {"kind": "structured"})
    return report


def simplex_grid(K, resolution):
    """All points ``i / resolution`` of the probability simplex in ``K`` dims."""
    if K == 1:
        return np.ones((1, 1))
    bars = np.array(list(itertools.combinations(range(resolution + K - 1), K - 1)),
                    dtype=np.int64)
    edges = np.column_stack([np.full(len(bars), -1), bars,
                             np.full(len(bars), resolution + K - 1)])
    counts = np.diff(edges, axis=1) - 1
    return counts / resolution


def tau_grid_search(c: ChannelSet, p: PowerBudget, resolution=200, tol=1e-9):
    """Enumerate slot allocations on a simplex grid and compare to the optimum."""
    if c.K > MAX_GRID_USERS:
        raise GridTooLargeError(f"grid search limited to K <= {MAX_GRID_USERS}, got {c.K}")
    if resolution < 10:
        raise ValueError("resolution must be >= 10")
    gains_info = derive_gains(c)
    gains = gains_info.alpha1 * p.P
    tau_opt = slots_from_gains(gains)
    best = float(per_user_rates(gains_info.sigma1_sq, gains, p.P_r, tau_opt).sum())

    grid = simplex_grid(c.K, resolution)
    rates = per_user_rates(gains_info.sigma1_sq, gains[None, :], p.P_r, grid).sum(axis=1)
    report = OracleReport("theorem2_grid")
    report.record(best - rates, tol, lambda i: {"tau": grid[i].tolist()})
    i_best = int(np.argmax(rates))
    report.info.update(
        optimum=best,
        tau_opt=tau_opt.tolist(),
        best_grid_tau=grid[i_best].tolist(),
        best_grid_rate=float(rates[i_best]),
        distance=float(np.max(np.abs(grid[i_best] - tau_opt))),
        interior=bool(np.all(tau_opt > 0)),
    )
    return report


def kkt_residual(c: ChannelSet, p: PowerBudget, tau, step=1e-6):
    """Spread of the slot-wise partial derivatives of the TDMA sum rate.

    Central differences with the given step; at a stationary point on the
    simplex all partials are equal and the residual vanishes.
    """
    tau = check_allocation(tau, c.K)
    if np.any(tau - step < 0) or np.any(tau + step > 1):
        raise StepOutOfRangeError(f"step {step:g} leaves [0, 1] for tau={tau.tolist()}")
    g = derive_gains(c)
    gains = g.alpha1 * p.P
    up = per_user_rates(g.sigma1_sq, gains, p.P_r, tau + step)
    down = per_user_rates(g.sigma1_sq, gains, p.P_r, tau - step)
    d = (up - down) / (2.0 * step)
    return float(d.max() - d.min())


def _random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    return gram(_cgauss(rng, (n, rank)))


def check_lemma1(n_trials, dim, seed, tol=1e-10, vary_dims=False):
    """``A = B + D`` with PSD ``B, D`` must satisfy ``lambda_max(A) >= lambda_max(B)``.

    With `vary_dims` each trial draws its size uniformly from ``1..dim``.
    ``info["shift_gap"]`` records ``lambda_max(B + I) - lambda_max(B) - 1``
    for the first trial.
    """
    rng = make_rng(seed)
    report = OracleReport("lemma1")
    margins = np.empty(n_trials)
    for t in range(n_trials):
        n = int(rng.integers(1, dim + 1)) if vary_dims else dim
        B = _random_psd(rng, n, int(rng.integers(1, n + 1)))
        D = _random_psd(rng, n, int(rng.integers(1, n + 1)))
        margins[t] = eig_max(B + D)[0] - eig_max(B)[0]
        if t == 0:
            report.info["shift_gap"] = eig_max(B + np.eye(n))[0] - eig_max(B)[0] - 1.0
    report.record(margins, tol)
    return report


def check_lemma2(n_trials, dims, seed, tol=1e-9, vary_dims=False):
    """``P_budget A A^H - A P A^H`` is PSD whenever ``P`` is PSD with ``tr(P) <= P_budget``.

    `dims` is ``(m, n)`` for ``A`` of size ``m x n``. Also checks that
    ``P_budget I - P`` is PSD. Margins are smallest eigenvalues.
    """
    m_max, n_max = dims
    rng = make_rng(seed)
    report = OracleReport("lemma2")
    margins = np.empty(2 * n_trials)
    for t in range(n_trials):
        m = int(rng.integers(1, m_max + 1)) if vary_dims else m_max
        n = int(rng.integers(1, n_max + 1)) if vary_dims else n_max
        budget = float(rng.uniform(0.1, 10.0))
        P = _random_psd(rng, n, int(rng.integers(1, n + 1)))
        fill = 1.0 if rng.random() < 0.5 else float(rng.random())
        P *= fill * budget / np.trace(P).real
        A = _cgauss(rng, (m, n))
        diff = budget * gram(A) - A @ P @ A.conj().T
        margins[2 * t] = _min_eig_margin(diff, tol)
        margins[2 * t + 1] = _min_eig_margin(budget * np.eye(n) - P, tol)
    report.record(margins, tol)
    return report


def _min_eig_margin(X, tol):
    # is_psd is the contract; the eigenvalue is kept for worst_gap reporting
    w = float(np.linalg.eigvalsh(0.5 * (X + X.conj().T))[0])
    if not is_psd(X, tol):
        return min(w, -2 * tol)
    return w


def shared_eigenvector_instance(K, M_r, seed, M=1):
    """Channel whose users all share one left-singular vector.

    ``H_k = g w_k^H`` for a common ``g``, so every ``H_k H_k^H`` has top
    eigenvector ``g`` and TDMA brings no gain over joint relaying.
    """
    rng = make_rng(seed)
    g = _cgauss(rng, M_r)
    H_r = tuple(np.outer(g, _cgauss(rng, M).conj()) for _ in range(K))
    return ChannelSet(H_r, _cgauss(rng, M_r))


def theorem3_on(channels, p: PowerBudget, tol=1e-9, strict_gap=1e-6, name="theorem3"):
    """TDMA vs joint ordering on the given channels.

    Per instance the margin is the smaller of ``R_tdma - R_joint`` and
    ``(sum_k alpha_k P_k - lambda_max(R_tilde)) / max(1, lambda_max(R_tilde))``.
    ``info["strict"]`` counts instances whose rate gap exceeds `strict_gap`;
    ``info["max_abs_gap"]`` is the largest ``|R_tdma - R_joint|``.
    """
    channels = list(channels)
    report = OracleReport(name)
    rate_gaps = np.empty(len(channels))
    eig_gaps = np.empty(len(channels))
    for i, c in enumerate(channels):
        j = joint_sum_rate(c, p)
        t = tdma_sum_rate(c, p)
        rate_gaps[i] = t.sum_rate - j.sum_rate
        g = derive_gains(c)
        eig_gaps[i] = (np.sum(g.alpha1 * p.P) - j.lambda_max_Rtilde) / max(1.0, j.lambda_max_Rtilde)

    def describe(i):
        return {"rate_gap": float(rate_gaps[i]), "eig_gap": float(eig_gaps[i]),
                "channels": channels[i]}

    report.record(np.minimum(rate_gaps, eig_gaps), tol, describe)
    report.info["strict"] = int(np.sum(rate_gaps > strict_gap))
    report.info["max_abs_gap"] = float(np.max(np.abs(rate_gaps), initial=0.0))
    report.info["worst_eig_gap"] = float(np.min(eig_gaps, initial=np.inf))
    return report


def check_theorem3(n_instances, dims, p: PowerBudget, seed, tol=1e-9, strict_gap=1e-6):
    """Ordering check over ``n_instances`` Rayleigh channels of size ``dims = (K, M, M_r)``."""
    K, M, M_r = dims
    channels = (sample_rayleigh(K, M, M_r, (seed, i)) for i in range(n_instances))
    return theorem3_on(channels, p, tol, strict_gap)


SUITES = ("lemmas", "theorem1", "theorem2", "theorem3")

# 8 users with 4 antennas each, 4 relay antennas
SCENARIO_DIMS = (8, 4, 4)


def run_suite(suite, trials, seed):
    """Run one named suite (or ``"all"``) and return its reports.

    ``trials`` scales every suite: lemma trials, random-search samples per
    instance, and the number of Rayleigh instances for the ordering check.
    """
    if suite == "all":
        return [r for s in SUITES for r in run_suite(s, trials, seed)]
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    reports = []
    if suite == "lemmas":
        reports.append(check_lemma1(trials, 6, (seed, 1), vary_dims=True))
        reports.append(check_lemma2(trials, (6, 6), (seed, 2), vary_dims=True))
    elif suite == "theorem1":
        p = PowerBudget([1.0, 2.0], 10.0)
        agg = OracleReport("theorem1")
        for i in range(5):
            c = sample_rayleigh(2, 2, 2, (seed, 10, i))
            r = random_feasible_joint_search(c, p, trials, (seed, 11, i))
            _merge(agg, r, c)
        reports.append(agg)
    elif suite == "theorem2":
        grid = OracleReport("theorem2_grid")
        kkt = OracleReport("theorem2_kkt")
        for i in range(6):
            K = 2 + i % 2
            c = sample_rayleigh(K, 2, 2, (seed, 20, i))
            p = PowerBudget(np.linspace(1.0, 3.0, K), 10.0)
            _merge(grid, tau_grid_search(c, p, 200), c)
            tau = slots_from_gains(derive_gains(c).alpha1 * p.P)
            kkt.record([1e-5 - kkt_residual(c, p, tau)], 0.0,
                       lambda _, c=c: {"channels": c})
        reports.extend([grid, kkt])
    else:
        K, M, M_r = SCENARIO_DIMS
        p = PowerBudget.uniform(K, 10.0, 100.0)
        reports.append(check_theorem3(trials, SCENARIO_DIMS, p, (seed, 30)))
        c = shared_eigenvector_instance(K, M_r, (seed, 31))
        witness = theorem3_on([c], p, name="theorem3_witness")
        witness.record([1e-9 - witness.info["max_abs_gap"]], 0.0,
                       lambda _: {"kind": "equality", "channels": c})
        reports.append(witness)
    return reports


def _merge(agg, r, c):
    agg.trials += r.trials
    agg.violations += r.violations
    agg.worst_gap = min(agg.worst_gap, r.worst_gap)
    agg.details.extend(dict(d, channels=c) for d in r.details)
