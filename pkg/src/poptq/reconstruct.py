"""Recover a POPT operator from a black-box preparation.

A preparation maps a pair of local effects ``(Q, R)`` to a probability.
Tabulating it on informationally complete POVMs and solving the linear
system ``tr((E_a (x) F_b) W) = T[a, b]`` by least squares recovers ``W``.
When the frames are overcomplete, the residual measures how far the data
are from any bilinear (hence POPT) assignment.
"""

from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .errors import BadTrace, DimensionMismatch, FrameSingular, ResidualTooLarge
from .popt import make_popt
from .povm import FRAME_COND_MAX, frame_condition, random_povm
from .quantize import born_table
from .randomx import as_rng, child_seeds

ORACLE_TOL = 1e-9
RESIDUAL_MAX = 1e-6
TRACE_RENORM_TOL = 1e-6


class PreparationOracle:
    """Probability assignment to pairs of local POVM elements.

    Subclasses implement ``eval``.  ``table`` evaluates a whole POVM pair
    and may be overridden by preparations whose output depends on the
    measurement as a whole (such as signalling ones).
    """

    def __init__(self, dims):
        self.dims = tuple(int(x) for x in dims)

    def eval(self, q, r):
        raise NotImplementedError

    def table(self, alice, bob):
        return np.array([[self.eval(q, r) for r in bob] for q in alice], dtype=float)


class MatrixOracle(PreparationOracle):
    """Born-rule preparation backed by an operator ``W``."""

    def __init__(self, W, dims=None):
        w = W.W if hasattr(W, "W") else np.asarray(W, dtype=np.complex128)
        if dims is None:
            dims = W.dims if hasattr(W, "dims") else (int(round(np.sqrt(w.shape[0]))),) * 2
        super().__init__(dims)
        self._w = w

    def eval(self, q, r):
        return float(np.real(np.trace(mk.kron(q, r) @ self._w)))

    def table(self, alice, bob):
        return born_table(self._w, alice, bob)


def _check_frame(p, side):
    cond = frame_condition(p)
    if not cond < FRAME_COND_MAX:
        raise FrameSingular(f"{side} POVM is not informationally complete (condition {cond:.3e})")
    return cond


def tabulate_omega(oracle, ic_a, ic_b, oracle_tol=ORACLE_TOL):
    _check_frame(ic_a, "Alice's")
    _check_frame(ic_b, "Bob's")
    t = np.asarray(oracle.table(ic_a, ic_b), dtype=float)
    if t.shape != (len(ic_a), len(ic_b)):
        raise DimensionMismatch(f"oracle returned table of shape {t.shape}")
    if t.min() < -oracle_tol or t.max() > 1 + oracle_tol:
        raise ValueError(f"oracle values outside [0, 1]: min {t.min():.3e}, max {t.max():.3e}")
    return t


@dataclass(frozen=True)
class SignalingCheck:
    ok: bool
    worst: float
    alice_to_bob: float
    bob_to_alice: float

    def __bool__(self):
        return self.ok


def verify_oracle_no_signaling(oracle, trials=20, seed=0, tol=1e-10):
    """Compare each party's marginals across two different POVMs of the other.

    Each trial draws one POVM for the measuring party and a 2-outcome and a
    3-outcome POVM for the other party.
    """
    da, db = oracle.dims
    worst_ba = worst_ab = 0.0
    for s in child_seeds(seed, trials):
        rng = as_rng(s)
        pa = random_povm(da, 2 + int(rng.integers(0, 3)), rng)
        b2, b3 = random_povm(db, 2, rng), random_povm(db, 3, rng)
        m1 = oracle.table(pa, b2).sum(axis=1)
        m2 = oracle.table(pa, b3).sum(axis=1)
        worst_ba = max(worst_ba, float(np.abs(m1 - m2).max()))

        pb = random_povm(db, 2 + int(rng.integers(0, 3)), rng)
        a2, a3 = random_povm(da, 2, rng), random_povm(da, 3, rng)
        n1 = oracle.table(a2, pb).sum(axis=0)
        n2 = oracle.table(a3, pb).sum(axis=0)
        worst_ab = max(worst_ab, float(np.abs(n1 - n2).max()))
    worst = max(worst_ab, worst_ba)
    return SignalingCheck(worst <= tol, worst, worst_ab, worst_ba)


@dataclass(frozen=True)
class Reconstruction:
    W: np.ndarray
    residual: float
    condition: float


def solve_popt(T, ic_a, ic_b, residual_max=RESIDUAL_MAX):
    """Least-squares Hermitian ``W`` for the tabulated data.

    ``residual`` is the max-abs misfit of the fitted table.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (len(ic_a), len(ic_b)):
        raise DimensionMismatch(f"table shape {T.shape} vs frames {(len(ic_a), len(ic_b))}")
    _check_frame(ic_a, "Alice's")
    _check_frame(ic_b, "Bob's")
    da, db = ic_a.dim, ic_b.dim
    basis = mk.hermitian_basis(da * db).reshape(-1, da, db, da, db)
    # design[(a, b), k] = tr((E_a (x) F_b) H_k)
    design = np.real(np.einsum("aji,blk,nikjl->abn", ic_a.stack(), ic_b.stack(), basis))
    design = design.reshape(len(ic_a) * len(ic_b), -1)
    sv = np.linalg.svd(design, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if not cond < FRAME_COND_MAX:
        raise FrameSingular(f"joint frame is singular (condition {cond:.3e})")
    coef, *_ = np.linalg.lstsq(design, T.ravel(), rcond=None)
    resid = float(np.abs(design @ coef - T.ravel()).max())
    if resid > residual_max:
        raise ResidualTooLarge(
            f"least-squares residual {resid:.3e} > {residual_max:g}: data are not a "
            "bilinear (no-signalling) preparation", resid
        )
    w = np.einsum("n,nij->ij", coef, basis.reshape(-1, da * db, da * db))
    return Reconstruction(0.5 * (w + mk.dag(w)), resid, cond)


def reconstruct_popt(T, ic_a, ic_b, residual_max=RESIDUAL_MAX, **popt_kwargs):
    """Fit ``W`` to the table and wrap it as a POPTState.

    A trace within ``1e-6`` of one is renormalised; anything further off
    raises ``BadTrace``.
    """
    rec = solve_popt(T, ic_a, ic_b, residual_max)
    tr = float(np.trace(rec.W).real)
    if abs(tr - 1.0) > TRACE_RENORM_TOL:
        raise BadTrace(f"reconstructed trace {tr:.9g} is not 1")
    return make_popt(rec.W / tr, (ic_a.dim, ic_b.dim), **popt_kwargs)
