"""Choi-Jamiolkowski correspondence between POPT operators and matrix maps.

A map is stored as the images of all matrix units: ``units[i, j]`` is
the image of ``|i><j|``.  With ``|Phi> = sum_i |ii>/sqrt(d)`` the Choi
operator is ``(1 (x) Map)(|Phi><Phi|)``.
"""

from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .errors import DimensionMismatch
from .popt import POPTState

INV_CUTOFF = 1e-10
UNITAL_ATOL = 1e-8


@dataclass(frozen=True)
class MatrixMap:
    units: np.ndarray  # (din, din, dout, dout)

    def __post_init__(self):
        u = np.array(self.units, dtype=np.complex128)
        if u.ndim != 4 or u.shape[0] != u.shape[1] or u.shape[2] != u.shape[3]:
            raise DimensionMismatch(f"units must have shape (din, din, dout, dout), got {u.shape}")
        u.setflags(write=False)
        object.__setattr__(self, "units", u)

    @property
    def din(self):
        return self.units.shape[0]

    @property
    def dout(self):
        return self.units.shape[2]

    def __call__(self, x):
        return apply(self, x)

    def hermiticity_residual(self):
        """max |units[j, i] - units[i, j]^dag|."""
        u = self.units
        return float(np.abs(u.transpose(1, 0, 2, 3) - np.conj(u.transpose(0, 1, 3, 2))).max())

    @classmethod
    def from_function(cls, fn, din):
        eye = np.eye(din)
        rows = [
            [np.asarray(fn(np.outer(eye[i], eye[j])), dtype=np.complex128) for j in range(din)]
            for i in range(din)
        ]
        return cls(np.array(rows))


def identity_map(d):
    return MatrixMap.from_function(lambda x: x, d)


def transpose_map(d):
    return MatrixMap.from_function(lambda x: x.T, d)


def map_from_popt(W):
    """Map whose Choi operator is ``W``: units[i, j] = d (<i| (x) 1) W (|j> (x) 1)."""
    if isinstance(W, POPTState):
        d = W.d
        w = W.W
    else:
        w = np.asarray(W, dtype=np.complex128)
        d = int(round(np.sqrt(w.shape[0])))
        if w.shape != (d * d, d * d):
            raise DimensionMismatch(f"W of shape {w.shape} is not on C^d (x) C^d")
    w4 = w.reshape(d, d, d, d)
    return MatrixMap(d * w4.transpose(0, 2, 1, 3))


def popt_from_map(m):
    if m.din != m.dout:
        raise DimensionMismatch(f"din={m.din} != dout={m.dout}")
    d = m.din
    return (m.units.transpose(0, 2, 1, 3) / d).reshape(d * d, d * d)


def apply(m, x):
    x = np.asarray(x)
    if x.shape != (m.din, m.din):
        raise DimensionMismatch(f"input shape {x.shape}, map expects {(m.din, m.din)}")
    return np.einsum("ij,ijkl->kl", x, m.units)


def adjoint_apply(m, y):
    """Adjoint map: tr(Map(X) Y) = tr(X Map*(Y)) for all X."""
    y = np.asarray(y)
    if y.shape != (m.dout, m.dout):
        raise DimensionMismatch(f"input shape {y.shape}, adjoint expects {(m.dout, m.dout)}")
    return np.einsum("ijkl,lk->ji", m.units, y)


def conjugate_map(m, left, right=None):
    """X -> left Map(X) right."""
    right = left if right is None else right
    return MatrixMap(np.einsum("ab,ijbc,cd->ijad", left, m.units, right))


def regularize(m, epsilon):
    """(1 - eps) Map(X) + eps tr(X) I/d."""
    if epsilon == 0:
        return m
    d_in, d_out = m.din, m.dout
    noise = np.einsum("ij,kl->ijkl", np.eye(d_in), np.eye(d_out) / d_out)
    return MatrixMap((1.0 - epsilon) * m.units + epsilon * noise)


@dataclass(frozen=True)
class UnitalDecomposition:
    M: np.ndarray
    Wtilde: MatrixMap
    epsilon: float
    M_sqrt: np.ndarray

    def unitality_residual(self):
        d = self.Wtilde.din
        return float(np.abs(apply(self.Wtilde, np.eye(d)) - np.eye(self.Wtilde.dout)).max())


def unital_decompose(m, epsilon=0.0, inv_cutoff=INV_CUTOFF):
    """Split ``m`` as ``X -> M^{1/2} Wtilde(X) M^{1/2}`` with ``Wtilde`` unital.

    ``M`` is the image of the identity (of the regularised map when
    ``epsilon > 0``).  Raises ``SingularM`` when ``M`` has an eigenvalue at
    or below ``inv_cutoff``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    m_eps = regularize(m, epsilon)
    M = mk.hermitize(apply(m_eps, np.eye(m.din)))
    inv_half = mk.psd_inv_sqrt(M, cutoff=inv_cutoff)
    wt = conjugate_map(m_eps, inv_half)
    return UnitalDecomposition(M=M, Wtilde=wt, epsilon=float(epsilon), M_sqrt=mk.psd_sqrt(M))
