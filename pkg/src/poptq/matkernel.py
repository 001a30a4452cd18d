"""Dense complex-matrix kernel.

All transposes and conjugations are taken in the fixed computational basis.
Bipartite operators on ``C^dA (x) C^dB`` use the ``np.kron`` index order,
Alice's factor first.
"""

import numpy as np

from . import _jacobi
from .errors import DimensionMismatch, NotHermitian, NotPSD, SingularM

HERM_ATOL = 1e-12
PSD_TOL = 1e-9


def kron(a, b):
    return np.kron(np.asarray(a), np.asarray(b))


def dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, atol=HERM_ATOL):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return bool(np.abs(a - dag(a)).max(initial=0.0) <= atol * scale)


def hermitize(a, atol=HERM_ATOL):
    """Return ``(a + a^dag)/2`` after checking ``a`` is Hermitian to ``atol``.

    The tolerance is scaled by ``max(1, max|a_ij|)`` so that products of
    normalised operators with round-off are accepted.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a, atol):
        gap = np.abs(a - dag(a)).max()
        raise NotHermitian(f"matrix is not Hermitian (max |A - A^dag| = {gap:.3e})")
    return 0.5 * (a + dag(a))


def eigh(a, backend=None):
    """Eigenvalues (descending) and orthonormal eigenvector columns."""
    h = hermitize(a)
    vals, vecs = _jacobi.eigh_stack(h[None], backend=backend)
    return vals[0], vecs[0]


def eigvalsh(a, backend=None):
    return eigh(a, backend=backend)[0]


def spectral_norm(vals):
    return float(np.max(np.abs(vals), initial=0.0))


def _psd_spectrum(a, psd_tol):
    vals, vecs = eigh(a)
    norm = spectral_norm(vals)
    if vals[-1] < -psd_tol * norm:
        raise NotPSD(f"eigenvalue {vals[-1]:.3e} below -{psd_tol:g}*||A|| = {-psd_tol * norm:.3e}")
    return np.clip(vals, 0.0, None), vecs


def is_psd(a, psd_tol=PSD_TOL):
    vals = eigvalsh(a)
    return bool(vals[-1] >= -psd_tol * spectral_norm(vals))


def psd_sqrt(a, psd_tol=PSD_TOL):
    vals, vecs = _psd_spectrum(a, psd_tol)
    out = (vecs * np.sqrt(vals)) @ dag(vecs)
    return 0.5 * (out + dag(out))


def psd_inv_sqrt(a, cutoff=1e-10, psd_tol=PSD_TOL):
    """Inverse square root of a positive definite matrix.

    Raises ``SingularM`` if any eigenvalue is ``<= cutoff`` (absolute).
    """
    vals, vecs = _psd_spectrum(a, psd_tol)
    if vals[-1] <= cutoff:
        raise SingularM(
            f"smallest eigenvalue {vals[-1]:.3e} <= cutoff {cutoff:g}; "
            "use a positive epsilon regulariser"
        )
    out = (vecs / np.sqrt(vals)) @ dag(vecs)
    return 0.5 * (out + dag(out))


def partial_trace(w, dims, side):
    """Trace out factor ``side`` ('A' or 'B') of an operator on dA*dB."""
    w = np.asarray(w)
    da, db = (int(x) for x in dims)
    if w.shape != (da * db, da * db):
        raise DimensionMismatch(f"shape {w.shape} does not match dims {(da, db)}")
    w4 = w.reshape(da, db, da, db)
    if side == "B":
        return np.einsum("ikjk->ij", w4)
    if side == "A":
        return np.einsum("kikj->ij", w4)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def partial_transpose(w, dims, side="B"):
    w = np.asarray(w)
    da, db = (int(x) for x in dims)
    if w.shape != (da * db, da * db):
        raise DimensionMismatch(f"shape {w.shape} does not match dims {(da, db)}")
    w4 = w.reshape(da, db, da, db)
    if side == "B":
        w4 = w4.transpose(0, 3, 2, 1)
    elif side == "A":
        w4 = w4.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return w4.reshape(da * db, da * db)


def max_entangled(d):
    if d < 1:
        raise ValueError("d must be >= 1")
    phi = np.zeros(d * d, dtype=np.complex128)
    phi[:: d + 1] = 1.0 / np.sqrt(d)
    return phi


def projector(v):
    v = np.asarray(v, dtype=np.complex128)
    return np.outer(v, v.conj())


def swap(d):
    """SWAP operator on C^d (x) C^d."""
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def hermitian_basis(n):
    """Orthonormal basis (Hilbert-Schmidt) of n x n Hermitian matrices, shape (n*n, n, n)."""
    basis = []
    for j in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[j, j] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[j, k] = e[k, j] = s
            basis.append(e)
            e = np.zeros((n, n), dtype=np.complex128)
            e[j, k] = -1j * s
            e[k, j] = 1j * s
            basis.append(e)
    return np.array(basis)
