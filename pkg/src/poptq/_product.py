"""Alternating minimisation of <alpha beta|W|alpha beta> over product vectors.

``seesaw`` runs every restart; the numba kernel walks restarts one at a
time, the numpy path advances all restarts together.
"""

import numpy as np

from . import _accel
from ._jacobi import MAX_SWEEPS, TOL, _jacobi_stack_nb, eigh_stack


@_accel.njit
def _seesaw_nb(w4, beta0, iters):
    da, db = w4.shape[0], w4.shape[1]
    nres = beta0.shape[0]
    values = np.empty(nres)
    last_step = np.empty(nres)
    alphas = np.empty((nres, da), dtype=np.complex128)
    betas = np.empty((nres, db), dtype=np.complex128)
    ca = np.empty((1, da, da), dtype=np.complex128)
    cb = np.empty((1, db, db), dtype=np.complex128)
    for r in range(nres):
        beta = beta0[r].copy()
        alpha = np.zeros(da, dtype=np.complex128)
        prev = np.inf
        val = np.inf
        step = np.inf
        for _ in range(iters):
            for i in range(da):
                for j in range(da):
                    acc = 0.0 + 0.0j
                    for k in range(db):
                        bk = beta[k].conjugate()
                        for l in range(db):
                            acc += bk * w4[i, k, j, l] * beta[l]
                    ca[0, i, j] = acc
            for i in range(da):
                for j in range(i + 1, da):
                    h = 0.5 * (ca[0, i, j] + ca[0, j, i].conjugate())
                    ca[0, i, j] = h
                    ca[0, j, i] = h.conjugate()
                ca[0, i, i] = ca[0, i, i].real
            _, va = _jacobi_stack_nb(ca, TOL, MAX_SWEEPS)
            for i in range(da):
                alpha[i] = va[0, i, da - 1]
            for k in range(db):
                for l in range(db):
                    acc = 0.0 + 0.0j
                    for i in range(da):
                        ai = alpha[i].conjugate()
                        for j in range(da):
                            acc += ai * w4[i, k, j, l] * alpha[j]
                    cb[0, k, l] = acc
            for k in range(db):
                for l in range(k + 1, db):
                    h = 0.5 * (cb[0, k, l] + cb[0, l, k].conjugate())
                    cb[0, k, l] = h
                    cb[0, l, k] = h.conjugate()
                cb[0, k, k] = cb[0, k, k].real
            lb, vb = _jacobi_stack_nb(cb, TOL, MAX_SWEEPS)
            for k in range(db):
                beta[k] = vb[0, k, db - 1]
            val = lb[0, db - 1]
            step = prev - val
            prev = val
        values[r] = val
        last_step[r] = step
        alphas[r] = alpha
        betas[r] = beta
    return values, alphas, betas, last_step


def _hermitian_part(x):
    return 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))


def _seesaw_np(w4, beta0, iters):
    beta = np.array(beta0, dtype=np.complex128)
    da = w4.shape[0]
    alpha = np.zeros((beta.shape[0], da), dtype=np.complex128)
    prev = np.full(beta.shape[0], np.inf)
    val = prev.copy()
    step = prev.copy()
    for _ in range(iters):
        ca = _hermitian_part(np.einsum("rk,ikjl,rl->rij", beta.conj(), w4, beta))
        _, va = eigh_stack(ca, backend="numpy")
        alpha = va[:, :, -1]
        cb = _hermitian_part(np.einsum("ri,ikjl,rj->rkl", alpha.conj(), w4, alpha))
        lb, vb = eigh_stack(cb, backend="numpy")
        beta = vb[:, :, -1]
        val = lb[:, -1]
        step = prev - val
        prev = val
    return val, alpha, beta, step


def seesaw(w4, beta0, iters, backend=None):
    """Run the product-vector see-saw from each starting ``beta0[r]``.

    Returns ``(values, alphas, betas, last_step)`` per restart, where
    ``last_step`` is the decrease achieved by the final iteration.
    """
    w4 = np.ascontiguousarray(w4, dtype=np.complex128)
    beta0 = np.ascontiguousarray(beta0, dtype=np.complex128)
    if backend is None:
        backend = _accel.backend()
    if backend == "numba":
        return _seesaw_nb(w4, beta0, int(iters))
    if backend == "numpy":
        return _seesaw_np(w4, beta0, int(iters))
    raise ValueError(f"unknown backend {backend!r}")
