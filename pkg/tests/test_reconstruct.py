import numpy as np
import pytest

from poptq import matkernel as mk
from poptq import popt, povm
from poptq import quantize as qz
from poptq import reconstruct as rc
from poptq.errors import BadTrace, FrameSingular, NotPOPTWitnessed, ResidualTooLarge
from poptq.randomx import random_density

from conftest import popt_families


class SignalingOracle(rc.MatrixOracle):
    """Bumps one entry whenever Bob uses more than two outcomes."""

    def __init__(self, W, bump=0.05):
        super().__init__(W)
        self.bump = bump

    def table(self, alice, bob):
        t = super().table(alice, bob)
        if len(bob) > 2:
            t[0, 0] += self.bump
            t /= t.sum()
        return t


class SquaredOracle(rc.PreparationOracle):
    def __init__(self, W):
        super().__init__((2, 2))
        self.inner = rc.MatrixOracle(W)

    def table(self, alice, bob):
        t = self.inner.table(alice, bob) ** 2
        return t / t.sum()


def test_tabulation_is_born_rule(rng):
    rho = random_density(4, rng)
    ic = povm.ic_povm(2)
    t = rc.tabulate_omega(rc.MatrixOracle(rho), ic, ic)
    for a, e in enumerate(ic):
        for b, f in enumerate(ic):
            assert abs(t[a, b] - np.trace(np.kron(e, f) @ rho).real) < 1e-14
    assert abs(t.sum() - 1) < 1e-12
    assert np.abs(rc.tabulate_omega(rc.MatrixOracle(rho), ic, ic) - t).max() == 0


def test_default_table_uses_eval(rng):
    rho = random_density(4, rng)
    ic = povm.ic_povm(2)
    base = rc.MatrixOracle(rho)
    slow = rc.PreparationOracle.table(base, ic, ic)
    assert np.abs(slow - base.table(ic, ic)).max() < 1e-14


def test_matrix_oracle_is_no_signaling(rng):
    for _, s in popt_families(2, seed=2, n_quantum=2, n_pt=2):
        assert rc.verify_oracle_no_signaling(rc.MatrixOracle(s), trials=10).ok


def test_signaling_oracle_is_caught(rng):
    rho = random_density(4, rng)
    gaps = [rc.verify_oracle_no_signaling(SignalingOracle(rho, b), trials=10).worst for b in (0.01, 0.05, 0.2)]
    assert gaps[0] > 1e-4
    assert gaps[0] < gaps[1] < gaps[2]
    assert not rc.verify_oracle_no_signaling(SignalingOracle(rho)).ok


def test_round_trip_quantum(rng):
    for d in (2, 3):
        rho = random_density(d * d, rng)
        ic = povm.ic_povm(d, seed=d)
        t = rc.tabulate_omega(rc.MatrixOracle(rho), ic, ic)
        w = rc.reconstruct_popt(t, ic, ic)
        assert np.abs(w.W - rho).max() < 1e-10


def test_round_trip_swap():
    w = popt.choi_of_transpose(2)
    ic = povm.tetrahedral_povm()
    t = rc.tabulate_omega(rc.MatrixOracle(w), ic, ic)
    back = rc.reconstruct_popt(t, ic, ic, seed=0)
    assert np.linalg.norm(back.W - w.W) < 1e-10
    assert back.evidence.certified_psd is False


def test_duplicate_frame_is_singular():
    e = povm.computational_basis(2)
    dup = povm.POVM(tuple(0.5 * x for x in (e[0], e[0], e[1], e[1])))
    with pytest.raises(FrameSingular):
        rc.tabulate_omega(rc.MatrixOracle(np.eye(4) / 4), dup, dup)
    with pytest.raises(FrameSingular):
        rc.solve_popt(np.full((4, 4), 1 / 16), dup, dup)


def test_bad_trace_rejected():
    ic = povm.tetrahedral_povm()
    t = rc.tabulate_omega(rc.MatrixOracle(np.eye(4) / 4), ic, ic)
    with pytest.raises(BadTrace):
        rc.reconstruct_popt(0.9 * t, ic, ic)


@pytest.mark.parametrize("d", [2, 3])
def test_pipeline(d):
    ic = povm.ic_povm(d, seed=1)
    states = popt_families(d, seed=40 + d, n_quantum=6, n_pt=12)
    assert len(states) >= 19
    for _, s in states[:20]:
        t = rc.tabulate_omega(rc.MatrixOracle(s), ic, ic)
        back = rc.reconstruct_popt(t, ic, ic, restarts=8)
        assert np.linalg.norm(back.W - s.W) <= 1e-8
        sim = qz.quantize(back)
        assert qz.verify_simulation(back, sim, trials=10) <= 1e-8


def test_nonlinear_oracle_rejected():
    rho = random_density(4, np.random.default_rng(9))
    ic = povm.overcomplete_ic_povm(2, seed=0)
    t = rc.tabulate_omega(SquaredOracle(rho), ic, ic)
    with pytest.raises(ResidualTooLarge) as exc:
        rc.reconstruct_popt(t, ic, ic)
    assert exc.value.residual > 1e-4


def test_nonlinear_oracle_with_minimal_frames():
    # a square system always fits, so the failure shows up as positivity instead
    w = np.diag([0.7, 0.1, 0.1, 0.1])
    ic = povm.tetrahedral_povm()
    t = rc.tabulate_omega(SquaredOracle(w), ic, ic)
    assert rc.solve_popt(t, ic, ic).residual < 1e-12
    with pytest.raises(NotPOPTWitnessed):
        rc.reconstruct_popt(t, ic, ic, seed=0)


def test_gleason_marginal(rng):
    for d in (2, 3):
        for _, s in popt_families(d, seed=d, n_quantum=1, n_pt=3):
            rho_a = mk.partial_trace(s.W, (d, d), "B")
            assert mk.is_psd(rho_a)
            assert abs(np.trace(rho_a) - 1) < 1e-10
            q = povm.random_povm(d, 4, rng)
            t = rc.MatrixOracle(s).table(q, povm.random_povm(d, 3, rng))
            born = np.array([np.trace(e @ rho_a).real for e in q])
            assert np.abs(t.sum(axis=1) - born).max() < 1e-10
