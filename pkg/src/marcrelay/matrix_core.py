"""Dense complex matrix kernel.

Hermitian eigendecomposition with a deterministic eigenvector convention,
Gram matrices, Rayleigh quotients and a positive-semidefiniteness test.
Matrices are plain 2-D numpy arrays; all functions are pure.

Eigenvector convention
----------------------
Eigenvalues come back in descending order. Every eigenvector is scaled by
a unit-modulus phase so that its first nonzero component is real and
positive. When eigenvalues coincide (relative gap below ``1e-10``) the
eigenspace basis is not unique; it is replaced by a canonical basis built
by Gram-Schmidt on the columns of the eigenspace projector, taken in index
order. The identity therefore yields the standard basis, and identical
inputs always yield bit-identical outputs.
"""

import logging
from typing import NamedTuple

import numpy as np

from .exceptions import NotFiniteError, NotHermitianError, ZeroVectorError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
PSD_FLOOR = 1e-9
_CLUSTER_RTOL = 1e-10
_PHASE_ZERO = 1e-12


class HermitianEig(NamedTuple):
    """Eigenvalues (descending) and matching eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class NotPositiveSemidefiniteError(NotHermitianError):
    pass


def as_matrix(A, name="A"):
    """Return `A` as a finite complex 2-D array."""
    arr = np.array(A, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotFiniteError(f"{name} has non-finite entries")
    return arr


def _scale(A):
    return max(1.0, float(np.max(np.abs(A), initial=0.0)))


def _check_hermitian(A, tol=HERMITIAN_TOL):
    A = as_matrix(A)
    n, m = A.shape
    if n != m:
        raise NotHermitianError(f"matrix is not square: {A.shape}")
    asym = float(np.max(np.abs(A - A.conj().T), initial=0.0))
    # entries of large Gram sums carry rounding proportional to their size
    if asym > tol * _scale(A):
        raise NotHermitianError(f"max |A - A^H| = {asym:.3g} exceeds {tol:g}")
    return 0.5 * (A + A.conj().T)


def normalize_phase(v):
    """Rotate `v` so its first nonzero component is real and positive."""
    v = np.array(v, dtype=complex)
    big = np.flatnonzero(np.abs(v) > _PHASE_ZERO * max(np.linalg.norm(v), 1e-300))
    if big.size == 0:
        return v
    i = big[0]
    c = v[i]
    v = v * (np.conj(c) / abs(c))
    v[i] = abs(c)
    return v


def _canonical_basis(V):
    # projector onto span(V) does not depend on which basis eigh returned
    m = V.shape[1]
    P = V @ V.conj().T
    basis = []
    residual = P.copy()
    for _ in range(m):
        norms = np.linalg.norm(residual, axis=0)
        j = int(np.flatnonzero(norms >= 0.5 * norms.max())[0])
        q = residual[:, j] / norms[j]
        basis.append(q)
        residual = residual - np.outer(q, q.conj() @ residual)
    return np.column_stack(basis)


def eig_hermitian(A):
    """Full eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Hermitian within ``1e-10`` (relative to the largest entry when that
        exceeds one).

    Returns
    -------
    HermitianEig
        Descending eigenvalues and phase-normalized unit eigenvectors.

    Raises
    ------
    NotFiniteError, NotHermitianError
    """
    Ah = _check_hermitian(A)
    w, V = np.linalg.eigh(Ah)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()

    tol = _CLUSTER_RTOL * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and w[stop - 1] - w[stop] <= tol:
            stop += 1
        if stop - start > 1:
            V[:, start:stop] = _canonical_basis(V[:, start:stop])
        start = stop

    for i in range(n):
        V[:, i] = normalize_phase(V[:, i])
    return HermitianEig(w, V)


def eig_max(A):
    """Largest eigenvalue of a Hermitian PSD matrix and its eigenvector.

    A smallest eigenvalue below ``-1e-9`` (scaled by the spectral radius when
    that exceeds one) raises :class:`NotPositiveSemidefiniteError`. Tiny
    negative rounding on the top eigenvalue is clipped to zero.
    """
    w, V = eig_hermitian(A)
    floor = -PSD_FLOOR * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[-1] < floor:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {w[-1]:.3g} below PSD floor")
    return max(float(w[0]), 0.0), V[:, 0]


def gram(A):
    """Return ``A @ A^H``, symmetrized to be exactly Hermitian."""
    A = as_matrix(A)
    G = A @ A.conj().T
    return 0.5 * (G + G.conj().T)


def rayleigh(A, x):
    """Rayleigh quotient ``x^H A x / x^H x`` for Hermitian `A`."""
    Ah = _check_hermitian(A)
    x = np.asarray(x, dtype=complex).ravel()
    if x.size != Ah.shape[0]:
        raise ValueError(f"vector length {x.size} does not match {Ah.shape}")
    nx = np.vdot(x, x).real
    if not nx > 0:
        raise ZeroVectorError("Rayleigh quotient of the zero vector")
    q = np.vdot(x, Ah @ x) / nx
    if abs(q.imag) >= 1e-10 * _scale(Ah):
        raise NotHermitianError(f"Rayleigh quotient has imaginary part {q.imag:.3g}")
    return float(q.real)


def is_psd(A, tol=PSD_FLOOR):
    """True iff `A` is Hermitian within `tol` and its eigenvalues are >= -tol."""
    try:
        arr = np.asarray(A, dtype=complex)
    except (TypeError, ValueError):
        logger.debug("is_psd: input is not numeric")
        return False
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        logger.debug("is_psd: input of shape %s is not square", arr.shape)
        return False
    if not np.all(np.isfinite(arr)):
        logger.debug("is_psd: input has non-finite entries")
        return False
    if np.max(np.abs(arr - arr.conj().T), initial=0.0) > tol:
        return False
    w = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
    return bool(w.size == 0 or w[0] >= -tol)
