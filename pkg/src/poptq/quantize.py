"""Quantum simulation of POPT correlations.

Given a POPT operator ``W`` with map ``Map`` and ``M = Map(1)``, the pure
state ``|psi> = ((M^{1/2})^T (x) 1)|Phi>`` together with Alice's relabelled
elements ``Q -> Wtilde(Q^T)^T`` reproduces every ``tr((Q (x) R) W)``.
Bob's measurement is left untouched.
"""

from dataclasses import dataclass

import numpy as np

from . import chojam
from . import matkernel as mk
from .errors import DimensionMismatch, InvalidPOVM, NotPOPTWitnessed
from .popt import POP_TOL, POPTState, make_popt
from .povm import POVM, random_povm, validate_povm
from .randomx import as_rng, child_seeds


@dataclass(frozen=True)
class QuantumSimulation:
    d: int
    sigma: np.ndarray
    psi: np.ndarray
    decomposition: chojam.UnitalDecomposition

    @property
    def epsilon(self):
        return self.decomposition.epsilon

    @property
    def M(self):
        return self.decomposition.M

    def relabel(self, q):
        """Alice's relabelled element Wtilde(q^T)^T."""
        return chojam.apply(self.decomposition.Wtilde, np.asarray(q).T).T


def quantize(W, epsilon=0.0, pop_tol=POP_TOL):
    if not isinstance(W, POPTState):
        w = np.asarray(W)
        d = int(round(np.sqrt(w.shape[0])))
        W = make_popt(w, (d, d))
    ev = W.evidence
    if not ev.certified_psd and ev.min_product_value < -pop_tol:
        raise NotPOPTWitnessed(
            f"refusing to quantize: product expectation {ev.min_product_value:.3e}", ev.witness
        )
    d = W.d
    m = chojam.map_from_popt(W)
    dec = chojam.unital_decompose(m, epsilon)
    psi = mk.kron(dec.M_sqrt.T, np.eye(d)) @ mk.max_entangled(d)
    sigma = mk.projector(psi)
    return QuantumSimulation(d=d, sigma=sigma, psi=psi, decomposition=dec)


def transform_povm(sim, p, atol=1e-8):
    if p.dim != sim.d:
        raise DimensionMismatch(f"POVM dim {p.dim} != simulation dim {sim.d}")
    out = POVM(tuple(mk.hermitize(sim.relabel(q), atol=1e-9) for q in p))
    report = validate_povm(out, atol=atol)
    if not report.ok:
        # only reachable if Wtilde lost unitality or positivity
        raise InvalidPOVM(f"transformed POVM failed validation: {report}")
    return out


def born_table(state, alice, bob):
    """p[a, b] = tr((A_a (x) B_b) state) for single POVMs ``alice``, ``bob``."""
    da = alice.dim
    db = bob.dim
    s4 = np.asarray(state).reshape(da, db, da, db)
    # tr((A (x) B) S) = sum A[j,i] B[l,k] S[i,k,j,l]
    return np.real(np.einsum("aji,blk,ikjl->ab", alice.stack(), bob.stack(), s4))


def verify_simulation(W, sim, trials=100, seed=0, outcomes=(2, 4)):
    """Largest |tr((Q_a (x) R_b) W) - tr((f(Q_a) (x) R_b) sigma)| over random POVM pairs.

    Each trial draws Alice and Bob POVMs with an outcome count in the
    inclusive range ``outcomes``.  The transformed Alice POVM is not
    re-validated here so that broken simulations show up as deviation.
    """
    w = W.W if isinstance(W, POPTState) else np.asarray(W)
    d = sim.d
    if w.shape != (d * d, d * d):
        raise DimensionMismatch(f"W shape {w.shape} vs simulation dim {d}")
    worst = 0.0
    lo, hi = outcomes
    for s in child_seeds(seed, trials):
        rng = as_rng(s)
        ka, kb = rng.integers(lo, hi + 1, size=2)
        alice = random_povm(d, int(ka), rng)
        bob = random_povm(d, int(kb), rng)
        relabelled = POVM(tuple(sim.relabel(q) for q in alice))
        lhs = born_table(w, alice, bob)
        rhs = born_table(sim.sigma, relabelled, bob)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst
