"""Input coercion helpers shared by the estimators and the CLI."""

import os

import numpy as np

from .channel import ChannelSet, PowerBudget, load_channels
from .exceptions import InvalidDimensionsError


def check_channel_set(X):
    """Coerce `X` to a :class:`ChannelSet`.

    Accepts a ChannelSet, a path to a channel file, or a ``(H_r, h)`` pair.
    """
    if isinstance(X, ChannelSet):
        return X
    if isinstance(X, (str, os.PathLike)):
        return load_channels(X)
    if isinstance(X, tuple) and len(X) == 2:
        return ChannelSet(tuple(X[0]), X[1])
    raise TypeError(f"cannot interpret {type(X).__name__} as a channel set")


def check_channel_batch(X):
    """A list of ChannelSets; a single instance becomes a batch of one."""
    if isinstance(X, (ChannelSet, str, os.PathLike)):
        return [check_channel_set(X)]
    return [check_channel_set(x) for x in X]


def check_power_budget(powers, relay_power, K):
    """Build a PowerBudget for `K` users; a scalar power is shared by all users."""
    P = np.atleast_1d(np.asarray(powers, dtype=float))
    if P.size == 1:
        P = np.full(K, P[0])
    if P.size != K:
        raise InvalidDimensionsError(f"{P.size} powers given for {K} users")
    return PowerBudget(P, relay_power)
