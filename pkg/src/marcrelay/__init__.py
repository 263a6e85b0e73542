"""Optimal sum rates of the K-user multiple-access channel with a MIMO
amplify-and-forward relay and a single-antenna receiver.

Two schemes are provided: joint relaying, where all users transmit at
once, and TDMA relaying, where each user gets an exclusive time slot.
"""

from .channel import (ChannelSet, DerivedGains, PowerBudget, derive_gains, load_channels,
                      sample_rayleigh, save_channels)
from .estimators import JointRelaying, RelayRateTransformer, TdmaRelaying
from .experiment import SweepConfig, SweepResult, read_csv, run_sweep, write_csv
from .joint_relaying import (JointSolution, build_r, build_r_tilde, evaluate_sum_rate,
                             joint_sum_rate, optimal_covariances, optimal_relay_matrix)
from .tdma_relaying import (TdmaSolution, evaluate_tdma_rate, optimal_time_slots,
                            single_user_rate, tdma_sum_rate)

__all__ = [
    "ChannelSet", "DerivedGains", "PowerBudget", "derive_gains", "load_channels",
    "sample_rayleigh", "save_channels",
    "JointRelaying", "RelayRateTransformer", "TdmaRelaying",
    "SweepConfig", "SweepResult", "read_csv", "run_sweep", "write_csv",
    "JointSolution", "build_r", "build_r_tilde", "evaluate_sum_rate", "joint_sum_rate",
    "optimal_covariances", "optimal_relay_matrix",
    "TdmaSolution", "evaluate_tdma_rate", "optimal_time_slots", "single_user_rate",
    "tdma_sum_rate",
]

__version__ = "0.1.0"
