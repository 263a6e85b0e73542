"""Monte-Carlo comparison of joint and TDMA relaying over a relay-SNR sweep.

Trial ``t`` draws its channel from seed ``(master_seed, t)`` and that same
realization is used at every SNR point and for both schemes. Both optimal
rates only depend on three per-trial numbers (``||h||^2``,
``lambda_max(R_tilde)`` and ``sum_k alpha_k P_k``), so those are computed
once per trial and the SNR sweep is evaluated in closed form.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import PowerBudget, derive_gains, sample_rayleigh, save_channels
from .exceptions import MalformedFileError
from .joint_relaying import build_r_tilde, relay_rate
from .matrix_core import eig_max

CSV_HEADER = ["snr_db", "joint_mean", "tdma_mean", "gain_pct", "joint_se", "tdma_se", "trials"]
DEFAULT_SNR_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


@dataclass(frozen=True)
class SweepConfig:
    """Monte-Carlo scenario. Defaults are the 8-user, 4-antenna setting."""

    K: int = 8
    M: tuple = (4,) * 8
    M_r: int = 4
    P: tuple = (10.0,) * 8
    snr_points_db: tuple = DEFAULT_SNR_DB
    trials: int = 1000
    master_seed: int = 1

    def __post_init__(self):
        M = self.M
        if isinstance(M, (int, np.integer)):
            M = (int(M),) * self.K
        P = self.P
        if isinstance(P, (int, float, np.number)):
            P = (float(P),) * self.K
        object.__setattr__(self, "M", tuple(int(m) for m in M))
        object.__setattr__(self, "P", tuple(float(x) for x in P))
        object.__setattr__(self, "snr_points_db", tuple(float(x) for x in self.snr_points_db))
        if self.K < 1 or self.M_r < 1 or len(self.M) != self.K or min(self.M) < 1:
            raise ValueError(f"invalid dimensions K={self.K} M={self.M} M_r={self.M_r}")
        if len(self.P) != self.K or min(self.P) < 0:
            raise ValueError("need K nonnegative user powers")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not np.all(np.isfinite(self.snr_points_db)):
            raise ValueError("SNR points must be finite")

    @property
    def relay_powers(self):
        return 10.0 ** (np.asarray(self.snr_points_db) / 10.0)


@dataclass(frozen=True, eq=False)
class SweepResult:
    snr_db: np.ndarray
    joint_mean: np.ndarray
    tdma_mean: np.ndarray
    gain_pct: np.ndarray
    joint_se: np.ndarray
    tdma_se: np.ndarray
    trials: np.ndarray = field(default=None)


def trial_statistics(cfg: SweepConfig, t, dump_dir=None):
    """``(||h||^2, lambda_max(R_tilde), sum_k alpha_k P_k)`` for trial `t`."""
    c = sample_rayleigh(cfg.K, cfg.M, cfg.M_r, (cfg.master_seed, t))
    if dump_dir is not None:
        save_channels(c, os.path.join(dump_dir, f"trial_{t:06d}.txt"),
                      [f"trial {t} master_seed {cfg.master_seed}"])
    p = PowerBudget(cfg.P, 0.0)
    g = derive_gains(c)
    lam = eig_max(build_r_tilde(c, p))[0]
    return g.sigma1_sq, lam, float(np.sum(g.alpha1 * p.P))


def _chunk(args):
    cfg, ts, dump_dir = args
    return [trial_statistics(cfg, t, dump_dir) for t in ts]


def collect_statistics(cfg: SweepConfig, workers=1, dump_dir=None):
    """Per-trial statistics as an array of shape ``(trials, 3)`` in trial order."""
    if dump_dir is not None:
        os.makedirs(dump_dir, exist_ok=True)
    ts = np.arange(cfg.trials)
    if workers is None or workers <= 1:
        rows = _chunk((cfg, ts, dump_dir))
    else:
        chunks = [(cfg, part, dump_dir) for part in np.array_split(ts, workers) if part.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_chunk, chunks) for row in part]
    return np.array(rows, dtype=float).reshape(cfg.trials, 3)


def _stderr(x):
    if x.size < 2:
        return np.nan
    return float(np.std(x, ddof=1) / np.sqrt(x.size))


def summarize(cfg: SweepConfig, stats) -> SweepResult:
    sigma1_sq, lam, sum_alpha_p = stats.T
    rows = []
    for P_r in cfg.relay_powers:
        joint = relay_rate(sigma1_sq, lam, P_r)
        tdma = relay_rate(sigma1_sq, sum_alpha_p, P_r)
        jm, tm = float(np.mean(joint)), float(np.mean(tdma))
        gain = 100.0 * (tm / jm - 1.0) if jm > 0 else 0.0
        rows.append((jm, tm, gain, _stderr(joint), _stderr(tdma)))
    cols = np.array(rows, dtype=float).reshape(-1, 5).T
    n = len(cfg.snr_points_db)
    return SweepResult(np.array(cfg.snr_points_db), *cols, np.full(n, cfg.trials))


def run_sweep(cfg: SweepConfig, workers=1, dump_dir=None) -> SweepResult:
    """Average both schemes' optimal sum rates over ``cfg.trials`` channels.

    ``gain_pct`` is the relative gain of the mean TDMA rate over the mean
    joint rate, in percent. Output is identical for any `workers` count.
    """
    return summarize(cfg, collect_statistics(cfg, workers, dump_dir))


def _g(x):
    return f"{x:.12g}"


def write_csv(r: SweepResult, path):
    """Write one row per SNR point; floats carry 12 significant digits."""
    with open(path, "w", newline="", encoding="ascii") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(len(r.snr_db)):
            w.writerow([_g(r.snr_db[i]), _g(r.joint_mean[i]), _g(r.tdma_mean[i]),
                        _g(r.gain_pct[i]), _g(r.joint_se[i]), _g(r.tdma_se[i]),
                        int(r.trials[i])])


def read_csv(path) -> SweepResult:
    with open(path, newline="", encoding="ascii") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != CSV_HEADER:
        raise MalformedFileError(f"unexpected header {rows[0] if rows else None}", 1)
    data = np.empty((len(rows) - 1, 7))
    for i, row in enumerate(rows[1:]):
        try:
            if len(row) != 7:
                raise ValueError(f"expected 7 fields, got {len(row)}")
            data[i] = [float(x) for x in row]
        except ValueError as exc:
            raise MalformedFileError(str(exc), i + 2) from None
    cols = data.T
    return SweepResult(*cols[:6], cols[6].astype(int))
