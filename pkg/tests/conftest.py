import numpy as np
import pytest

from poptq import matkernel as mk
from poptq import popt
from poptq.randomx import as_rng, random_density, random_pure


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def popt_families(d, seed, n_quantum=6, n_pt=10):
    """Representative POPT states: random quantum, SWAP/d, partial transposes."""
    rng = as_rng(seed)
    states = []
    for k in range(n_quantum):
        rank = 1 + k % (d * d)
        states.append(("quantum", popt.from_quantum(random_density(d * d, rng, rank=rank), (d, d))))
    states.append(("swap", popt.choi_of_transpose(d)))
    for k in range(n_pt):
        if k % 2 == 0:
            rho = random_pure(d * d, rng)
        else:
            rho = 0.8 * random_pure(d * d, rng) + 0.2 * random_density(d * d, rng)
        states.append(("pt", popt.partial_transpose_family(rho, (d, d), seed=k)))
    return states


def phi_projector(d):
    return mk.projector(mk.max_entangled(d))
