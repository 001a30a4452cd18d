"""CHSH game tooling: correlation tables, reference values, see-saw and LP bounds."""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from . import _jacobi
from . import matkernel as mk
from .errors import DimensionMismatch, NotPOPTWitnessed, Unbounded
from .popt import POPTState
from .povm import POVM, qubit_projective
from .quantize import born_table
from .randomx import as_rng, child_seeds, random_hermitian

NEG_TOL = 1e-10
TSIRELSON = float(0.5 + 0.5 / np.sqrt(2.0))


@dataclass(frozen=True)
class CorrelationTable:
    """p[x, y, a, b] = p(a, b | x, y)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 4:
            raise DimensionMismatch(f"table must be 4-d (x, y, a, b), got shape {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def shape(self):
        return self.p.shape

    def check(self, neg_tol=1e-12, norm_tol=1e-9):
        """List of invariant violations; empty when the table is valid."""
        problems = []
        if not np.all(np.isfinite(self.p)):
            problems.append("non-finite entries")
            return problems
        lo = float(self.p.min())
        if lo < -neg_tol:
            problems.append(f"negative probability {lo:.3e}")
        sums = self.p.sum(axis=(2, 3))
        gap = float(np.abs(sums - 1.0).max())
        if gap > norm_tol:
            problems.append(f"normalisation off by {gap:.3e}")
        return problems


def correlations_from_popt(W, alice, bob, neg_tol=NEG_TOL):
    """Table of tr((Q^x_a (x) R^y_b) W) for lists of POVMs ``alice``, ``bob``."""
    w = W.W if isinstance(W, POPTState) else np.asarray(W)
    da, db = alice[0].dim, bob[0].dim
    if w.shape != (da * db, da * db):
        raise DimensionMismatch(f"W shape {w.shape} vs POVM dims {(da, db)}")
    na = max(len(p) for p in alice)
    nb = max(len(p) for p in bob)
    table = np.zeros((len(alice), len(bob), na, nb))
    for x, pa in enumerate(alice):
        for y, pb in enumerate(bob):
            table[x, y, : len(pa), : len(pb)] = born_table(w, pa, pb)
    lo = table.min()
    if lo < -neg_tol:
        x, y, a, b = np.unravel_index(np.argmin(table), table.shape)
        raise NotPOPTWitnessed(
            f"negative probability {lo:.3e} at x={x}, y={y}, a={a}, b={b}",
            (alice[x][a], bob[y][b], float(lo)),
        )
    return CorrelationTable(table)


def _chsh_weights():
    v = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if (a + b) % 2 == x * y:
            v[x, y, a, b] = 0.25
    return v


CHSH_WEIGHTS = _chsh_weights()


def chsh_value(t):
    p = t.p if isinstance(t, CorrelationTable) else np.asarray(t)
    if p.shape != (2, 2, 2, 2):
        raise DimensionMismatch(f"CHSH needs a 2x2x2x2 table, got {p.shape}")
    return float(np.sum(CHSH_WEIGHTS * p))


def deterministic_table(a_of_x, b_of_y):
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            p[x, y, a_of_x[x], b_of_y[y]] = 1.0
    return CorrelationTable(p)


def classical_chsh_max():
    """Exhaustive maximum over the 16 deterministic strategy pairs.

    Returns the value (a float equal to the exact rational) and the list of
    maximising ``((a(0), a(1)), (b(0), b(1)))`` pairs.
    """
    best, winners = Fraction(-1), []
    for fa in itertools.product(range(2), repeat=2):
        for fb in itertools.product(range(2), repeat=2):
            wins = sum((fa[x] + fb[y]) % 2 == x * y for x in range(2) for y in range(2))
            val = Fraction(wins, 4)
            if val > best:
                best, winners = val, [(fa, fb)]
            elif val == best:
                winners.append((fa, fb))
    return float(best), winners


def pr_box():
    p = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if (a + b) % 2 == x * y:
            p[x, y, a, b] = 0.5
    return CorrelationTable(p)


@dataclass(frozen=True)
class SignalingReport:
    ok: bool
    worst: float
    alice_marginal_gap: float
    bob_marginal_gap: float

    def __bool__(self):
        return self.ok


def check_no_signaling(t, tol=1e-10):
    p = t.p if isinstance(t, CorrelationTable) else np.asarray(t)
    pa = p.sum(axis=3)  # (x, y, a): Alice's marginal must not depend on y
    pb = p.sum(axis=2)  # (x, y, b): Bob's marginal must not depend on x
    gap_a = float((pa.max(axis=1) - pa.min(axis=1)).max())
    gap_b = float((pb.max(axis=0) - pb.min(axis=0)).max())
    worst = max(gap_a, gap_b)
    return SignalingReport(worst <= tol, worst, gap_a, gap_b)


def tsirelson_settings():
    """Alice measures Z, X; Bob measures (Z +- X)/sqrt2."""
    alice = [qubit_projective(0.0), qubit_projective(np.pi / 2)]
    bob = [qubit_projective(np.pi / 4), qubit_projective(-np.pi / 4)]
    return alice, bob


@dataclass(frozen=True)
class SeesawResult:
    value: float
    alice: list
    bob: list
    trace: np.ndarray = field(repr=False)


def _positive_projectors(h):
    """Projectors onto the non-negative eigenspace of each matrix in a stack."""
    vals, vecs = _jacobi.eigh_stack(0.5 * (h + mk.dag(h)))
    keep = (vals > 0).astype(float)
    return np.einsum("rik,rk,rjk->rij", vecs, keep, vecs.conj())


def _best_response(cond, n_restarts, d):
    # cond[r, x, a] are the conditional operators; two outcomes per setting
    diff = (cond[:, :, 0] - cond[:, :, 1]).reshape(-1, d, d)
    p0 = _positive_projectors(diff).reshape(n_restarts, 2, d, d)
    p1 = np.eye(d) - p0
    return np.stack([p0, p1], axis=2)


def _win(sigma4, qa, rb):
    # qa[r, x, a], rb[r, y, b] -> winning probability per restart
    probs = np.real(np.einsum("rxaji,ryblk,ikjl->rxyab", qa, rb, sigma4))
    return np.einsum("rxyab,xyab->r", probs, CHSH_WEIGHTS)


def seesaw_max_chsh(sigma, restarts=64, iters=200, seed=0, tol=1e-14):
    """Lower bound on the CHSH value of ``sigma`` by alternating best responses.

    Both parties use two-outcome projective measurements; each half-step
    is an exact maximisation, so the per-restart value never decreases.
    ``trace`` holds the value of the best restart after every half-step.
    """
    sigma = mk.hermitize(sigma)
    d = int(round(np.sqrt(sigma.shape[0])))
    if sigma.shape != (d * d, d * d):
        raise DimensionMismatch(f"sigma of shape {sigma.shape} is not on C^d (x) C^d")
    s4 = sigma.reshape(d, d, d, d)

    starts = []
    for s in child_seeds(seed, restarts):
        rng = as_rng(s)
        starts.append([random_hermitian(d, rng) for _ in range(2)])
    r0 = _positive_projectors(np.array(starts).reshape(-1, d, d)).reshape(restarts, 2, d, d)
    rb = np.stack([r0, np.eye(d) - r0], axis=2)
    qa = None

    history = []
    prev = -np.inf
    for _ in range(iters):
        # Alice: K[r,x,a] = sum_{y,b} V[x,y,a,b] tr_B((1 (x) R^y_b) sigma)
        bob_cond = np.einsum("ryblk,ikjl->rybij", rb, s4)
        ka = np.einsum("xyab,rybij->rxaij", CHSH_WEIGHTS, bob_cond)
        qa = _best_response(ka, restarts, d)
        history.append(_win(s4, qa, rb))
        alice_cond = np.einsum("rxaji,ikjl->rxakl", qa, s4)
        kb = np.einsum("xyab,rxakl->rybkl", CHSH_WEIGHTS, alice_cond)
        rb = _best_response(kb, restarts, d)
        vals = _win(s4, qa, rb)
        history.append(vals)
        cur = float(vals.max())
        if cur - prev <= tol:
            break
        prev = cur

    history = np.array(history)
    best = int(np.argmax(history[-1]))
    alice = [POVM((qa[best, x, 0], qa[best, x, 1])) for x in range(2)]
    bob = [POVM((rb[best, y, 0], rb[best, y, 1])) for y in range(2)]
    return SeesawResult(float(history[-1, best]), alice, bob, history[:, best])


def chsh_operator(alice, bob):
    """F with tr(F W) the CHSH winning probability of W under the given settings."""
    da, db = alice[0].dim, bob[0].dim
    f = np.zeros((da * db, da * db), dtype=np.complex128)
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if CHSH_WEIGHTS[x, y, a, b]:
            f += CHSH_WEIGHTS[x, y, a, b] * mk.kron(alice[x][a], bob[y][b])
    return f


def product_vectors(d, n, seed):
    """``n`` random product unit vectors on C^d (x) C^d; prefixes are nested across ``n``."""
    rng = as_rng(seed)
    raw = rng.normal(size=(n, 2, 2, d))
    vecs = raw[:, :, 0] + 1j * raw[:, :, 1]
    vecs /= np.linalg.norm(vecs, axis=2, keepdims=True)
    return np.einsum("ni,nj->nij", vecs[:, 0], vecs[:, 1]).reshape(n, d * d)


@dataclass(frozen=True)
class LPResult:
    value: float
    W: np.ndarray = field(repr=False)
    n_constraints: int
    status: str


def popt_chsh_lp_bound(alice=None, bob=None, n_constraints=10000, seed=0):
    """Upper bound on max tr(F W) over POPT W for fixed CHSH settings.

    W ranges over trace-one Hermitian matrices with
    <a_i b_i|W|a_i b_i> >= 0 on ``n_constraints`` sampled product vectors.
    The sample is a relaxation of positivity on all product vectors, and
    samples for smaller ``n`` are prefixes of samples for larger ``n``.
    """
    if alice is None or bob is None:
        alice, bob = tsirelson_settings()
    d = alice[0].dim
    if d != 2 or bob[0].dim != 2:
        raise DimensionMismatch("the LP bound is implemented for qubits only")
    basis = mk.hermitian_basis(d * d)
    f = chsh_operator(alice, bob)
    c = -np.real(np.einsum("kij,ji->k", basis, f))
    vecs = product_vectors(d, n_constraints, seed)
    # <v|H_k|v> for every sample and basis element
    a_ub = -np.real(np.einsum("ni,kij,nj->nk", vecs.conj(), basis, vecs))
    b_ub = np.zeros(n_constraints)
    a_eq = np.real(np.einsum("kii->k", basis))[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(None, None)] * len(c), method="highs")
    if res.status == 3:
        raise Unbounded(f"LP unbounded with {n_constraints} constraints; sample more")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    w = np.einsum("k,kij->ij", res.x, basis)
    return LPResult(float(-res.fun), w, n_constraints, res.message)
