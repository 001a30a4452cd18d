"""POVM construction and validation.

Outcome labels are list indices.  Every constructor returns elements that
are Hermitian ``complex128`` arrays.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matkernel as mk
from .errors import FrameSingular, InvalidPOVM
from .randomx import as_rng, ginibre, random_vector

COMPLETENESS_ATOL = 1e-9
FRAME_COND_MAX = 1e10


@dataclass(frozen=True)
class POVM:
    elements: tuple
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        els = tuple(np.array(e, dtype=np.complex128) for e in self.elements)
        if not els:
            raise InvalidPOVM("a POVM needs at least one element")
        d = els[0].shape[0]
        for e in els:
            if e.shape != (d, d):
                raise InvalidPOVM(f"element shape {e.shape} differs from {(d, d)}")
            e.setflags(write=False)
        object.__setattr__(self, "elements", els)

    @property
    def dim(self):
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def stack(self):
        return np.stack(self.elements)

    def transpose(self):
        return POVM(tuple(e.T for e in self.elements))


@dataclass(frozen=True)
class POVMReport:
    ok: bool
    min_eigenvalue: float
    worst_element: int
    completeness_residual: float
    hermiticity_residual: float

    def __bool__(self):
        return self.ok


def validate_povm(p, psd_tol=mk.PSD_TOL, atol=COMPLETENESS_ATOL):
    """Check positivity and completeness; never raises.

    ``completeness_residual`` is the spectral norm of ``sum(E) - I``; the
    PSD check is relative to each element's spectral norm.
    """
    d = p.dim
    herm = max(float(np.abs(e - mk.dag(e)).max()) for e in p)
    worst_val, worst_idx, psd_ok = np.inf, -1, True
    for i, e in enumerate(p):
        vals = mk.eigvalsh(0.5 * (e + mk.dag(e)))
        if vals[-1] < worst_val:
            worst_val, worst_idx = float(vals[-1]), i
        if vals[-1] < -psd_tol * max(mk.spectral_norm(vals), 1e-300):
            psd_ok = False
    total = sum(p.elements) - np.eye(d)
    resid = mk.spectral_norm(mk.eigvalsh(0.5 * (total + mk.dag(total))))
    ok = psd_ok and resid <= atol and herm <= mk.HERM_ATOL
    return POVMReport(ok, worst_val, worst_idx, resid, herm)


def _normalise(blocks):
    s = sum(blocks)
    s_inv_half = mk.psd_inv_sqrt(s, cutoff=1e-12)
    out = []
    for b in blocks:
        e = s_inv_half @ b @ s_inv_half
        out.append(0.5 * (e + mk.dag(e)))
    return out


def random_povm(d, k, seed):
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    rng = as_rng(seed)
    blocks = []
    for _ in range(k):
        g = ginibre(d, d, rng)
        blocks.append(g.conj().T @ g)
    return POVM(tuple(_normalise(blocks)))


def frame_gram(p):
    st = p.stack()
    return np.real(np.einsum("aij,bji->ab", st, st))


def frame_rank(p, rtol=1e-10):
    s = np.linalg.svd(frame_gram(p), compute_uv=False)
    return int(np.sum(s > rtol * s[0]))


def frame_condition(p):
    """Condition number of the frame restricted to Hermitian d x d space.

    Returns ``inf`` when fewer than ``d**2`` directions are spanned.
    """
    d = p.dim
    s = np.linalg.svd(frame_gram(p), compute_uv=False)
    if len(s) < d * d or s[d * d - 1] <= 1e-14 * s[0]:
        return np.inf
    return float(s[0] / s[d * d - 1])


def is_informationally_complete(p, cond_max=FRAME_COND_MAX):
    return frame_condition(p) < cond_max


def tetrahedral_povm():
    s = np.array(
        [
            [0.0, 0.0, 1.0],
            [2 * np.sqrt(2) / 3, 0.0, -1.0 / 3],
            [-np.sqrt(2) / 3, np.sqrt(2.0 / 3), -1.0 / 3],
            [-np.sqrt(2) / 3, -np.sqrt(2.0 / 3), -1.0 / 3],
        ]
    )
    els = []
    for x, y, z in s:
        els.append(0.25 * (np.eye(2) + x * mk.PAULI_X + y * mk.PAULI_Y + z * mk.PAULI_Z))
    return POVM(tuple(els))


def ic_povm(d, seed=0, max_retries=16):
    """Informationally complete POVM with exactly ``d**2`` elements.

    Tetrahedral for ``d == 2``; otherwise rank-one random elements
    renormalised by ``S^{-1/2}``, redrawn until the frame is invertible.
    The frame condition number is stored in ``info["frame_condition"]``.
    """
    if d < 2:
        raise ValueError("ic_povm needs d >= 2")
    if d == 2:
        p = tetrahedral_povm()
        return POVM(p.elements, {"frame_condition": frame_condition(p)})
    rng = as_rng(seed)
    for attempt in range(max_retries):
        blocks = [mk.projector(random_vector(d, rng)) for _ in range(d * d)]
        p = POVM(tuple(_normalise(blocks)))
        cond = frame_condition(p)
        if cond < FRAME_COND_MAX:
            return POVM(p.elements, {"frame_condition": cond, "attempts": attempt + 1})
    raise FrameSingular(f"no invertible frame after {max_retries} draws at d={d}")


def mix_povms(p, q, weight=0.5):
    """Coarse mixture: run ``p`` with probability ``weight``, else ``q``."""
    if p.dim != q.dim:
        raise InvalidPOVM("cannot mix POVMs of different dimension")
    els = [weight * e for e in p] + [(1.0 - weight) * e for e in q]
    return POVM(tuple(els))


def overcomplete_ic_povm(d, seed=0):
    """IC POVM with ``2 d**2`` elements, so linear fits have redundancy."""
    first = ic_povm(d, seed)
    if d == 2:
        rng = as_rng(seed)
        u, _ = np.linalg.qr(ginibre(2, 2, rng))
        second = POVM(tuple(u @ e @ u.conj().T for e in first))
    else:
        second = ic_povm(d, np.random.SeedSequence(seed).spawn(1)[0])
    p = mix_povms(first, second)
    return POVM(p.elements, {"frame_condition": frame_condition(p)})


def qubit_projective(theta, phi=0.0):
    """Projective measurement of the Bloch direction (theta, phi).

    Element 0 projects onto the +1 eigenvector.
    """
    n = (
        np.cos(theta) * mk.PAULI_Z
        + np.sin(theta) * np.cos(phi) * mk.PAULI_X
        + np.sin(theta) * np.sin(phi) * mk.PAULI_Y
    )
    plus = 0.5 * (np.eye(2) + n)
    minus = 0.5 * (np.eye(2) - n)
    return POVM((plus, minus))


def computational_basis(d):
    return POVM(tuple(np.diag(np.eye(d)[i]).astype(np.complex128) for i in range(d)))


def pad_povm(p, d):
    """Embed ``p`` into dimension ``d`` by zero blocks.

    The padding projector is added to element 0 so the result still sums
    to the identity.
    """
    k = p.dim
    if d < k:
        raise InvalidPOVM(f"cannot pad a {k}-dim POVM down to {d}")
    els = []
    for i, e in enumerate(p):
        big = np.zeros((d, d), dtype=np.complex128)
        big[:k, :k] = e
        if i == 0:
            big[k:, k:] = np.eye(d - k)
        els.append(big)
    return POVM(tuple(els))
