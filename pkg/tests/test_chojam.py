import numpy as np
import pytest

from poptq import chojam
from poptq import matkernel as mk
from poptq import popt
from poptq.errors import SingularM
from poptq.randomx import as_rng, ginibre, random_density, random_vector

from conftest import phi_projector, popt_families


def test_phi_gives_identity_map():
    m = chojam.map_from_popt(phi_projector(2))
    assert np.abs(chojam.apply(m, mk.PAULI_X) - mk.PAULI_X).max() < 1e-12


def test_swap_gives_transpose_map():
    m = chojam.map_from_popt(mk.swap(2) / 2)
    unit01 = np.array([[0, 1], [0, 0]])
    assert np.abs(chojam.apply(m, unit01) - unit01.T).max() < 1e-15


def test_product_state_map(rng):
    d = 3
    ra, rb = random_density(d, rng), random_density(d, rng)
    m = chojam.map_from_popt(np.kron(ra, rb))
    for _ in range(10):
        x = ginibre(d, d, rng)
        expected = d * np.trace(x @ ra.T) * rb
        assert np.abs(chojam.apply(m, x) - expected).max() < 1e-12


def test_popt_from_map_examples():
    assert np.abs(chojam.popt_from_map(chojam.identity_map(2)) - phi_projector(2)).max() < 1e-15
    # (1/d) sum_ij |i><j| (x) |j><i|
    d = 2
    brute = np.zeros((4, 4))
    for i in range(d):
        for j in range(d):
            eij = np.zeros((d, d))
            eij[i, j] = 1
            brute += np.kron(eij, eij.T) / d
    assert np.abs(chojam.popt_from_map(chojam.transpose_map(2)) - brute).max() < 1e-15
    assert np.abs(brute - mk.swap(2) / 2).max() == 0


@pytest.mark.parametrize("d", [2, 3, 4])
def test_choi_round_trip(d):
    states = popt_families(d, seed=10 + d, n_quantum=20, n_pt=29)
    assert len(states) >= 50
    for _, s in states:
        m = chojam.map_from_popt(s)
        assert np.abs(s.W - chojam.popt_from_map(m)).max() <= 1e-11
        m2 = chojam.map_from_popt(chojam.popt_from_map(m))
        assert np.abs(m2.units - m.units).max() <= 1e-11
        assert m.hermiticity_residual() <= 1e-10


def test_apply_examples_and_linearity(rng):
    x, y = ginibre(3, 3, rng), ginibre(3, 3, rng)
    assert np.abs(chojam.apply(chojam.identity_map(3), x) - x).max() == 0
    assert np.abs(chojam.apply(chojam.transpose_map(3), x) - x.T).max() == 0
    m = chojam.map_from_popt(popt_families(3, seed=1, n_quantum=0, n_pt=1)[-1][1])
    a, b = 0.3 - 0.2j, -1.7
    lhs = chojam.apply(m, a * x + b * y)
    rhs = a * chojam.apply(m, x) + b * chojam.apply(m, y)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_adjoint_examples(rng):
    y = ginibre(3, 3, rng)
    assert np.abs(chojam.adjoint_apply(chojam.identity_map(3), y) - y).max() == 0
    assert np.abs(chojam.adjoint_apply(chojam.transpose_map(3), y) - y.T).max() == 0


def test_adjoint_duality(rng):
    for k in range(100):
        d = 2 + k % 3
        units = ginibre(d * d * d, d, rng).reshape(d, d, d, d)
        m = chojam.MatrixMap(units)
        x, y = ginibre(d, d, rng), ginibre(d, d, rng)
        lhs = np.trace(chojam.apply(m, x) @ y)
        rhs = np.trace(x @ chojam.adjoint_apply(m, y))
        assert abs(lhs - rhs) <= 1e-11


@pytest.mark.parametrize("d", [2, 3])
def test_positivity_transfer(d):
    rng = as_rng(d)
    for _, s in popt_families(d, seed=d, n_quantum=1, n_pt=3):
        m = chojam.map_from_popt(s)
        for _ in range(500):
            out = chojam.apply(m, mk.projector(random_vector(d, rng)))
            assert np.linalg.eigvalsh(out).min() >= -1e-8


@pytest.mark.parametrize("d", [2, 3, 4])
def test_image_of_identity_is_scaled_bob_marginal(d):
    for _, s in popt_families(d, seed=3 * d, n_quantum=3, n_pt=3):
        m = chojam.apply(chojam.map_from_popt(s), np.eye(d))
        assert np.abs(m - d * mk.partial_trace(s.W, (d, d), "A")).max() <= 1e-11
        assert abs(np.trace(m) / d - 1) < 1e-9


def test_unital_decompose_identity():
    dec = chojam.unital_decompose(chojam.identity_map(3))
    assert np.abs(dec.M - np.eye(3)).max() < 1e-15
    assert np.abs(dec.Wtilde.units - chojam.identity_map(3).units).max() < 1e-14


def test_unital_decompose_product_state(rng):
    d = 3
    ra, rb = random_density(d, rng), random_density(d, rng)
    dec = chojam.unital_decompose(chojam.map_from_popt(np.kron(ra, rb)))
    assert np.abs(dec.M - d * rb).max() < 1e-12
    for _ in range(5):
        x = ginibre(d, d, rng)
        expected = np.trace(x @ ra.T) * np.eye(d)
        assert np.abs(chojam.apply(dec.Wtilde, x) - expected).max() < 1e-11
    assert dec.unitality_residual() < 1e-8


def test_unital_decompose_singular_then_regularised():
    m = chojam.map_from_popt(np.diag([1.0, 0, 0, 0]))
    with pytest.raises(SingularM):
        chojam.unital_decompose(m, 0.0)
    dec = chojam.unital_decompose(m, 1e-4)
    assert dec.unitality_residual() <= 1e-8
    assert abs(np.trace(dec.M) / 2 - 1) < 1e-12


def test_regularised_map_keeps_normalisation():
    m = chojam.map_from_popt(mk.swap(3) / 3)
    for eps in (1e-1, 1e-3):
        m_eps = chojam.regularize(m, eps)
        assert abs(np.trace(chojam.apply(m_eps, np.eye(3))) / 3 - 1) < 1e-14


def test_every_decomposition_is_unital():
    for d in (2, 3, 4):
        for _, s in popt_families(d, seed=d, n_quantum=3, n_pt=3):
            dec = chojam.unital_decompose(chojam.map_from_popt(s))
            assert dec.unitality_residual() <= 1e-8
