"""Cyclic Jacobi eigensolver for stacks of Hermitian matrices.

Two implementations of the same rotation sequence: a scalar-loop kernel
compiled with numba, and a numpy version that rotates every matrix of the
stack at once.  ``eigh_stack`` dispatches according to ``_accel``.
"""

import numpy as np

from . import _accel

TOL = 1e-14
MAX_SWEEPS = 64


@_accel.njit
def _jacobi_stack_nb(a, tol, max_sweeps):
    nbatch, n, _ = a.shape
    vals = np.empty((nbatch, n))
    vecs = np.empty((nbatch, n, n), dtype=np.complex128)
    for b in range(nbatch):
        A = a[b].copy()
        V = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            V[i, i] = 1.0
        scale = 0.0
        for i in range(n):
            for j in range(n):
                scale += A[i, j].real ** 2 + A[i, j].imag ** 2
        thresh = tol * tol * scale
        for _ in range(max_sweeps):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += A[p, q].real ** 2 + A[p, q].imag ** 2
            if off <= thresh:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    g = abs(apq)
                    if g < 1e-300:
                        continue
                    ph = apq / g
                    em = ph.conjugate()
                    app = A[p, p].real
                    aqq = A[q, q].real
                    tau = (aqq - app) / (2.0 * g)
                    if tau >= 0.0:
                        t = 1.0 / (tau + np.hypot(1.0, tau))
                    else:
                        t = -1.0 / (-tau + np.hypot(1.0, tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for k in range(n):
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * em * akq
                        A[k, q] = s * akp + c * em * akq
                    for k in range(n):
                        apk = A[p, k]
                        aqk = A[q, k]
                        A[p, k] = c * apk - s * ph * aqk
                        A[q, k] = s * apk + c * ph * aqk
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    A[p, p] = app - t * g
                    A[q, q] = aqq + t * g
                    for k in range(n):
                        vkp = V[k, p]
                        vkq = V[k, q]
                        V[k, p] = c * vkp - s * em * vkq
                        V[k, q] = s * vkp + c * em * vkq
        d = np.empty(n)
        for i in range(n):
            d[i] = A[i, i].real
        order = np.argsort(-d)
        for i in range(n):
            vals[b, i] = d[order[i]]
            for k in range(n):
                vecs[b, k, i] = V[k, order[i]]
    return vals, vecs


def _jacobi_stack_np(a, tol, max_sweeps):
    A = np.array(a, dtype=np.complex128, copy=True)
    nbatch, n, _ = A.shape
    V = np.broadcast_to(np.eye(n, dtype=np.complex128), A.shape).copy()
    thresh = tol * tol * np.sum(np.abs(A) ** 2, axis=(1, 2))
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = np.sum(np.abs(A[:, iu[0], iu[1]]) ** 2, axis=1)
        if np.all(off <= thresh):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                g = np.abs(apq)
                live = g >= 1e-300
                if not live.any():
                    continue
                gs = np.where(live, g, 1.0)
                ph = np.where(live, apq / gs, 1.0)
                em = ph.conj()
                app = A[:, p, p].real.copy()
                aqq = A[:, q, q].real.copy()
                tau = (aqq - app) / (2.0 * gs)
                t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                cp, cq = A[:, :, p].copy(), A[:, :, q].copy()
                A[:, :, p] = c[:, None] * cp - (s * em)[:, None] * cq
                A[:, :, q] = s[:, None] * cp + (c * em)[:, None] * cq
                rp, rq = A[:, p, :].copy(), A[:, q, :].copy()
                A[:, p, :] = c[:, None] * rp - (s * ph)[:, None] * rq
                A[:, q, :] = s[:, None] * rp + (c * ph)[:, None] * rq
                A[:, p, q] = np.where(live, 0.0, A[:, p, q])
                A[:, q, p] = np.where(live, 0.0, A[:, q, p])
                A[:, p, p] = app - t * g
                A[:, q, q] = aqq + t * g

                vp, vq = V[:, :, p].copy(), V[:, :, q].copy()
                V[:, :, p] = c[:, None] * vp - (s * em)[:, None] * vq
                V[:, :, q] = s[:, None] * vp + (c * em)[:, None] * vq
    d = np.real(np.diagonal(A, axis1=1, axis2=2))
    order = np.argsort(-d, axis=1, kind="stable")
    vals = np.take_along_axis(d, order, axis=1)
    vecs = np.take_along_axis(V, order[:, None, :], axis=2)
    return vals, vecs


def eigh_stack(a, backend=None):
    """Eigen-decompose a stack ``(B, n, n)`` of Hermitian matrices.

    Returns eigenvalues sorted descending, shape ``(B, n)``, and the
    eigenvectors as columns, shape ``(B, n, n)``.  The input is assumed
    Hermitian; callers symmetrise first.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected a (B, n, n) stack, got shape {a.shape}")
    if backend is None:
        backend = _accel.backend()
    if backend == "numba":
        return _jacobi_stack_nb(a, TOL, MAX_SWEEPS)
    if backend == "numpy":
        return _jacobi_stack_np(a, TOL, MAX_SWEEPS)
    raise ValueError(f"unknown backend {backend!r}")
