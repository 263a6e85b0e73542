"""Channel instances, power budgets, random Rayleigh fading and persistence.

Random channels use numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence(seed)``. Complex Gaussian entries are produced
by the Box-Muller transform from pairs of uniforms, so every entry consumes
exactly two uniforms and the stream layout is fixed: user 1's matrix in
row-major order, then user 2, ..., then the relay-to-receiver vector.
"""

import os
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import InvalidDimensionsError, MalformedFileError, NotFiniteError
from .matrix_core import eig_max, gram

FILE_MAGIC = "MARC v1"


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of a K-user relay channel.

    ``H_r[k]`` is the ``M_r x M[k]`` channel from user k to the relay and
    ``h`` the length-``M_r`` relay-to-receiver channel; the receiver sees
    ``h^H x_r``.
    """

    H_r: tuple
    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=complex).ravel()
        if len(self.H_r) == 0:
            raise InvalidDimensionsError("need at least one user")
        if h.size < 1:
            raise InvalidDimensionsError("relay needs at least one antenna")
        mats = []
        for k, H in enumerate(self.H_r):
            H = np.array(H, dtype=complex)
            if H.ndim == 1:
                H = H.reshape(-1, 1)
            if H.ndim != 2 or H.shape[0] != h.size or H.shape[1] < 1:
                raise InvalidDimensionsError(
                    f"H_r[{k}] has shape {H.shape}, expected ({h.size}, M_k)")
            if not np.all(np.isfinite(H)):
                raise NotFiniteError(f"H_r[{k}] has non-finite entries")
            H.setflags(write=False)
            mats.append(H)
        mats = tuple(mats)
        if not np.all(np.isfinite(h)):
            raise NotFiniteError("h has non-finite entries")
        h.setflags(write=False)
        object.__setattr__(self, "H_r", mats)
        object.__setattr__(self, "h", h)

    @property
    def K(self):
        return len(self.H_r)

    @property
    def M_r(self):
        return self.h.size

    @property
    def M(self):
        return tuple(H.shape[1] for H in self.H_r)

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return (self.M == other.M and self.M_r == other.M_r
                and np.array_equal(self.h, other.h)
                and all(np.array_equal(a, b) for a, b in zip(self.H_r, other.H_r)))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PowerBudget:
    """Per-user average transmit powers ``P`` and relay power ``P_r``."""

    P: np.ndarray
    P_r: float

    def __post_init__(self):
        P = np.array(self.P, dtype=float).ravel()
        P_r = float(self.P_r)
        if not (np.all(np.isfinite(P)) and np.isfinite(P_r)):
            raise NotFiniteError("powers must be finite")
        if np.any(P < 0) or P_r < 0:
            raise ValueError("powers must be nonnegative")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "P_r", P_r)

    @classmethod
    def uniform(cls, K, P, P_r):
        return cls(np.full(K, float(P)), P_r)

    def with_relay_power(self, P_r):
        return PowerBudget(self.P, P_r)


class DerivedGains(NamedTuple):
    sigma1_sq: float
    alpha1: np.ndarray


def _complex_gaussian(rng, n):
    # Box-Muller with total variance 1: |z|^2 = -ln(u1) ~ Exp(1)
    u = rng.random((n, 2))
    r = np.sqrt(-np.log1p(-u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    return r * np.cos(theta) + 1j * r * np.sin(theta)


def _flatten_seed(seed):
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [s for part in seed for s in _flatten_seed(part)]


def make_rng(seed):
    """PCG64 generator for an integer seed or a (nested) tuple of integers.

    A bare integer ``s`` and the tuple ``(s,)`` give the same stream.
    """
    entropy = _flatten_seed(seed)
    if any(s < 0 for s in entropy):
        raise ValueError(f"seeds must be nonnegative, got {seed!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def sample_rayleigh(K, M, M_r, seed):
    """Draw a channel with i.i.d. CN(0, 1) entries.

    Parameters
    ----------
    K : int
        Number of users.
    M : int or sequence of int
        Antennas per user; a scalar is broadcast to all users.
    M_r : int
        Relay antennas.
    seed : int or sequence of int
        Passed to ``SeedSequence``; equal seeds give bit-identical channels.
    """
    if isinstance(M, (int, np.integer)):
        M = [int(M)] * int(K)
    M = [int(m) for m in M]
    if K < 1 or M_r < 1 or len(M) != K or any(m < 1 for m in M):
        raise InvalidDimensionsError(f"invalid dimensions K={K} M={M} M_r={M_r}")
    rng = make_rng(seed)
    H_r = tuple(_complex_gaussian(rng, M_r * m).reshape(M_r, m) for m in M)
    h = _complex_gaussian(rng, M_r)
    return ChannelSet(H_r, h)


def derive_gains(c: ChannelSet) -> DerivedGains:
    """``||h||^2`` and the top eigenvalue of ``H_r[k] H_r[k]^H`` per user."""
    sigma1_sq = float(np.vdot(c.h, c.h).real)
    alpha1 = np.array([eig_max(gram(H))[0] for H in c.H_r])
    return DerivedGains(sigma1_sq, alpha1)


def _fmt(z):
    return f"{z.real:.17g} {z.imag:.17g}\n"


def format_channels(c: ChannelSet, comments: Sequence[str] = ()) -> str:
    lines = [f"# {line}\n" for line in comments]
    lines.append(f"{FILE_MAGIC} K={c.K} Mr={c.M_r} M={','.join(map(str, c.M))}\n")
    for H in c.H_r:
        lines.extend(_fmt(z) for z in H.ravel())
    lines.extend(_fmt(z) for z in c.h)
    return "".join(lines)


def save_channels(c: ChannelSet, path, comments: Sequence[str] = ()):
    """Write `c` in the line-oriented text format (LF endings).

    Leading ``# ...`` comment lines may be added through `comments`.
    """
    with open(path, "w", newline="\n", encoding="ascii") as f:
        f.write(format_channels(c, comments))


def _parse_header(line, lineno):
    if not line.startswith(FILE_MAGIC):
        raise MalformedFileError(f"expected '{FILE_MAGIC}' header", lineno)
    fields = {}
    for tok in line[len(FILE_MAGIC):].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise MalformedFileError(f"bad header field {tok!r}", lineno)
        fields[key] = val
    try:
        K = int(fields["K"])
        M_r = int(fields["Mr"])
        M = [int(m) for m in fields["M"].split(",")]
    except (KeyError, ValueError) as exc:
        raise MalformedFileError(f"bad header: {exc}", lineno) from None
    if K < 1 or M_r < 1 or any(m < 1 for m in M):
        raise MalformedFileError("dimensions must be positive", lineno)
    if len(M) != K:
        raise MalformedFileError(f"K={K} but {len(M)} antenna counts given", lineno)
    return K, M_r, M


def parse_channels(text: str) -> ChannelSet:
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(text.split("\n"))]
    rows = [(i, ln) for i, ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise MalformedFileError("empty channel file")
    K, M_r, M = _parse_header(*reversed(rows[0]))
    body = rows[1:]
    expected = M_r * sum(M) + M_r
    if len(body) != expected:
        where = body[-1][0] if body else rows[0][0]
        raise MalformedFileError(
            f"expected {expected} entry lines, found {len(body)}", where)
    values = np.empty(expected, dtype=complex)
    for n, (lineno, ln) in enumerate(body):
        parts = ln.split()
        if len(parts) != 2:
            raise MalformedFileError(f"expected 're im', got {ln!r}", lineno)
        try:
            values[n] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise MalformedFileError(f"not a number: {ln!r}", lineno) from None
        if not np.isfinite(values[n]):
            raise MalformedFileError("non-finite entry", lineno)
    H_r = []
    pos = 0
    for m in M:
        H_r.append(values[pos:pos + M_r * m].reshape(M_r, m))
        pos += M_r * m
    return ChannelSet(tuple(H_r), values[pos:])


def load_channels(path) -> ChannelSet:
    """Read a channel file written by :func:`save_channels`."""
    with open(os.fspath(path), encoding="ascii") as f:
        return parse_channels(f.read())
