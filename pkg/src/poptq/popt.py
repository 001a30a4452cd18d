"""POPT states: operators whose expectation is non-negative on product vectors.

Positivity on pure tensors is checked by a multi-restart see-saw.  Its
result is evidence, not a certificate; the only rigorous sufficient test
used here is positive semidefiniteness of ``W``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _product
from . import matkernel as mk
from .errors import BadTrace, DimensionMismatch, NotPOPTWitnessed, NotPSD
from .randomx import as_rng, child_seeds, random_vector

TRACE_ATOL = 1e-9
POP_TOL = 1e-8
DEFAULT_RESTARTS = 64
DEFAULT_ITERS = 50
MAX_DIM = 32


@dataclass(frozen=True)
class PositivityEvidence:
    min_product_value: float
    restarts: int
    certified_psd: bool
    witness: tuple = field(default=None, compare=False, repr=False)

    def to_dict(self):
        return {
            "min_product_value": float(self.min_product_value),
            "restarts": int(self.restarts),
            "certified_psd": bool(self.certified_psd),
        }


@dataclass(frozen=True)
class POPTState:
    dims: tuple
    W: np.ndarray
    evidence: PositivityEvidence

    def __post_init__(self):
        w = np.array(self.W, dtype=np.complex128)
        w.setflags(write=False)
        object.__setattr__(self, "W", w)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    @property
    def d(self):
        da, db = self.dims
        if da != db:
            raise DimensionMismatch(f"unequal local dimensions {self.dims}")
        return da

    def prob(self, q, r):
        """tr((q (x) r) W)."""
        return float(np.real(np.trace(mk.kron(q, r) @ self.W)))


@dataclass(frozen=True)
class ProductMinimum:
    value: float
    alpha: np.ndarray
    beta: np.ndarray
    converged: bool
    per_restart: np.ndarray = field(repr=False)


def _check_square(w, dims):
    da, db = (int(x) for x in dims)
    if da < 1 or db < 1 or da > MAX_DIM or db > MAX_DIM:
        raise DimensionMismatch(f"local dimensions {dims} outside 1..{MAX_DIM}")
    w = np.asarray(w)
    if w.shape != (da * db, da * db):
        raise DimensionMismatch(f"shape {w.shape} does not match dims {(da, db)}")
    return da, db


def min_product_overlap(W, dims=None, restarts=DEFAULT_RESTARTS, iters=DEFAULT_ITERS, seed=0,
                        backend=None):
    """Smallest <alpha beta|W|alpha beta> found by alternating minimisation.

    Each restart starts from a random unit ``beta`` drawn from its own
    child seed, so the first ``n`` restarts are shared by any larger run.
    The value is an upper bound on the true minimum over product vectors.
    """
    if isinstance(W, POPTState):
        dims, W = W.dims, W.W
    W = mk.hermitize(W)
    if dims is None:
        d = int(round(np.sqrt(W.shape[0])))
        dims = (d, d)
    da, db = _check_square(W, dims)
    if restarts < 1 or iters < 1:
        raise ValueError("restarts and iters must be >= 1")
    beta0 = np.stack([random_vector(db, as_rng(s)) for s in child_seeds(seed, restarts)])
    vals, alphas, betas, steps = _product.seesaw(W.reshape(da, db, da, db), beta0, iters, backend)
    best = int(np.argmin(vals))
    return ProductMinimum(
        value=float(vals[best]),
        alpha=alphas[best],
        beta=betas[best],
        converged=bool(abs(steps[best]) <= POP_TOL),
        per_restart=np.asarray(vals),
    )


class Classification(enum.Enum):
    QUANTUM = "Quantum"
    POPT_BEYOND_QUANTUM = "POPTBeyondQuantum"
    NOT_POPT_EVIDENCE = "NotPOPTEvidence"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ClassifyResult:
    label: Classification
    min_eigenvalue: float
    min_product_value: float
    witness: tuple = None


def _check_trace(w, atol=TRACE_ATOL):
    tr = np.trace(w)
    if abs(tr - 1.0) > atol:
        raise BadTrace(f"trace {tr.real:.12g} differs from 1 by more than {atol:g}")


def classify(W, dims, restarts=DEFAULT_RESTARTS, iters=DEFAULT_ITERS, seed=0,
             psd_tol=mk.PSD_TOL, pop_tol=POP_TOL):
    """Sort ``W`` into quantum / POPT-beyond-quantum / witnessed non-POPT.

    ``Inconclusive`` is returned when ``W`` is not PSD, no negative product
    expectation was found, but the best see-saw restart had not settled.
    """
    W = mk.hermitize(W)
    _check_square(W, dims)
    _check_trace(W)
    vals = mk.eigvalsh(W)
    lam_min = float(vals[-1])
    if lam_min >= -psd_tol * mk.spectral_norm(vals):
        return ClassifyResult(Classification.QUANTUM, lam_min, max(lam_min, 0.0))
    res = min_product_overlap(W, dims, restarts, iters, seed)
    witness = (res.alpha, res.beta, res.value)
    if res.value < -pop_tol:
        return ClassifyResult(Classification.NOT_POPT_EVIDENCE, lam_min, res.value, witness)
    label = Classification.POPT_BEYOND_QUANTUM if res.converged else Classification.INCONCLUSIVE
    return ClassifyResult(label, lam_min, res.value, witness)


def make_popt(W, dims, restarts=DEFAULT_RESTARTS, iters=DEFAULT_ITERS, seed=0,
              psd_tol=mk.PSD_TOL, pop_tol=POP_TOL):
    """Wrap ``W`` as a POPTState after gathering positivity evidence.

    PSD inputs are certified without a search and record ``restarts=0``
    with ``lambda_min`` as their (lower-bound) product value.  Raises
    ``NotPOPTWitnessed`` if the search finds a negative product value.
    """
    W = mk.hermitize(W)
    _check_square(W, dims)
    _check_trace(W)
    vals = mk.eigvalsh(W)
    lam_min = float(vals[-1])
    if lam_min >= -psd_tol * mk.spectral_norm(vals):
        return POPTState(dims, W, PositivityEvidence(lam_min, 0, True))
    res = min_product_overlap(W, dims, restarts, iters, seed)
    witness = (res.alpha, res.beta, res.value)
    if res.value < -pop_tol:
        raise NotPOPTWitnessed(
            f"product vector with <ab|W|ab> = {res.value:.3e} < -{pop_tol:g}", witness
        )
    return POPTState(dims, W, PositivityEvidence(res.value, restarts, False, witness))


def from_quantum(rho, dims, psd_tol=mk.PSD_TOL):
    rho = mk.hermitize(rho)
    _check_square(rho, dims)
    _check_trace(rho)
    vals = mk.eigvalsh(rho)
    if vals[-1] < -psd_tol * mk.spectral_norm(vals):
        raise NotPSD(f"density matrix has eigenvalue {vals[-1]:.3e}")
    return POPTState(dims, rho, PositivityEvidence(float(vals[-1]), 0, True))


def choi_of_transpose(d, **kwargs):
    """SWAP/d: the Choi operator of the transpose map."""
    if d < 2:
        raise ValueError("choi_of_transpose needs d >= 2")
    return make_popt(mk.swap(d) / d, (d, d), **kwargs)


def partial_transpose_family(rho, dims, **kwargs):
    """Partial transpose on B of a density matrix; always POPT.

    Positivity on product vectors follows from
    tr((Q (x) R) rho^T_B) = tr((Q (x) R^T) rho) >= 0.
    """
    rho = mk.hermitize(rho)
    _check_square(rho, dims)
    _check_trace(rho)
    if not mk.is_psd(rho):
        raise NotPSD("partial_transpose_family needs a density matrix")
    return make_popt(mk.partial_transpose(rho, dims, "B"), dims, **kwargs)


def product_state(rho_a, rho_b):
    return from_quantum(mk.kron(rho_a, rho_b), (len(rho_a), len(rho_b)))


def isotropic_state(d, fidelity_weight):
    """``p |Phi><Phi| + (1 - p) I/d^2``."""
    phi = mk.max_entangled(d)
    return fidelity_weight * mk.projector(phi) + (1 - fidelity_weight) * np.eye(d * d) / (d * d)
