import itertools

import numpy as np
import pytest

from poptq import games, popt, povm
from poptq import quantize as qz
from poptq.errors import NotPOPTWitnessed, Unbounded
from poptq.randomx import random_density

from conftest import phi_projector, popt_families


def test_uniform_table_value():
    t = games.CorrelationTable(np.full((2, 2, 2, 2), 0.25))
    assert abs(games.chsh_value(t) - 0.5) < 1e-15
    assert games.check_no_signaling(t).ok


def test_deterministic_zero_strategy():
    assert abs(games.chsh_value(games.deterministic_table((0, 0), (0, 0))) - 0.75) < 1e-15


def test_every_deterministic_strategy_is_classical():
    for fa in itertools.product(range(2), repeat=2):
        for fb in itertools.product(range(2), repeat=2):
            v = games.chsh_value(games.deterministic_table(fa, fb))
            assert v in (0.25, 0.75)


def test_classical_max():
    value, winners = games.classical_chsh_max()
    assert value == 0.75
    assert len(winners) == 8
    for fa, fb in winners:
        assert games.chsh_value(games.deterministic_table(fa, fb)) == 0.75


def test_pr_box():
    t = games.pr_box()
    assert t.check() == []
    assert abs(games.chsh_value(t) - 1.0) < 1e-15
    rep = games.check_no_signaling(t)
    assert rep.ok and rep.worst == 0.0


def test_no_signaling_catches_injected_gap():
    p = np.array(games.pr_box().p)
    p[0, 0, 0, 0] += 0.01
    p[0, 0, 1, 0] -= 0.01
    rep = games.check_no_signaling(p, tol=1e-10)
    assert not rep.ok
    assert abs(rep.worst - 0.01) < 1e-12


def test_tables_from_popt_states_are_no_signaling(rng):
    for _, s in popt_families(2, seed=5, n_quantum=3, n_pt=3):
        alice = [povm.random_povm(2, 2, rng) for _ in range(2)]
        bob = [povm.random_povm(2, 2, rng) for _ in range(2)]
        t = games.correlations_from_popt(s, alice, bob)
        assert t.check() == []
        assert games.check_no_signaling(t, tol=1e-10).ok


def test_negative_entry_raises():
    w = np.diag([-0.1, 0.5, 0.3, 0.3]).astype(complex)
    z = povm.computational_basis(2)
    with pytest.raises(NotPOPTWitnessed):
        games.correlations_from_popt(w, [z, z], [z, z])


def test_tsirelson_settings_on_phi():
    alice, bob = games.tsirelson_settings()
    t = games.correlations_from_popt(phi_projector(2), alice, bob)
    assert abs(games.chsh_value(t) - games.TSIRELSON) < 1e-14


def test_seesaw_on_phi():
    res = games.seesaw_max_chsh(phi_projector(2), restarts=64, seed=0)
    assert abs(res.value - (0.5 + 0.5 / np.sqrt(2))) < 1e-6
    t = games.correlations_from_popt(phi_projector(2), res.alice, res.bob)
    assert abs(games.chsh_value(t) - res.value) < 1e-12


def _grid_max(sigma, n=24):
    """Brute force over real projective qubit measurements on an angle grid."""
    angles = np.linspace(0, np.pi, n, endpoint=False)
    ps = [povm.qubit_projective(a) for a in angles]
    best = 0.0
    for a0, a1 in itertools.combinations(range(n), 2):
        for b0, b1 in itertools.product(range(n), repeat=2):
            t = games.correlations_from_popt(sigma, [ps[a0], ps[a1]], [ps[b0], ps[b1]])
            best = max(best, games.chsh_value(t))
    return best


def test_seesaw_on_product_state():
    sigma = np.diag([1.0, 0, 0, 0]).astype(complex)
    res = games.seesaw_max_chsh(sigma, restarts=16, seed=1)
    assert abs(res.value - 0.75) < 1e-9
    assert res.value >= _grid_max(sigma, n=8) - 1e-12


def test_seesaw_trace_is_monotone(rng):
    sigma = random_density(4, rng)
    res = games.seesaw_max_chsh(sigma, restarts=8, seed=3)
    assert np.all(np.diff(res.trace) >= -1e-12)


def test_chsh_operator_matches_table(rng):
    alice = [povm.random_povm(2, 2, rng) for _ in range(2)]
    bob = [povm.random_povm(2, 2, rng) for _ in range(2)]
    rho = random_density(4, rng)
    f = games.chsh_operator(alice, bob)
    t = games.correlations_from_popt(rho, alice, bob)
    assert abs(np.trace(f @ rho).real - games.chsh_value(t)) < 1e-13


def test_lp_bound_feasibility_and_calibration():
    res = games.popt_chsh_lp_bound(n_constraints=10000, seed=0)
    assert res.value >= 0.8535533 - 1e-7
    assert 0.853553 <= res.value <= 0.87


def test_lp_bound_nested_monotone():
    small = games.popt_chsh_lp_bound(n_constraints=2000, seed=0).value
    large = games.popt_chsh_lp_bound(n_constraints=10000, seed=0).value
    assert small >= large - 1e-9


def test_lp_unbounded_with_tiny_sample():
    with pytest.raises(Unbounded):
        games.popt_chsh_lp_bound(n_constraints=3, seed=0)


def test_chsh_invariant_under_quantization(rng):
    alice, bob = games.tsirelson_settings()
    for _, s in popt_families(2, seed=11, n_quantum=2, n_pt=3):
        sim = qz.quantize(s)
        direct = games.chsh_value(games.correlations_from_popt(s, alice, bob))
        a2 = [qz.transform_povm(sim, p) for p in alice]
        sim_val = games.chsh_value(games.correlations_from_popt(sim.sigma, a2, bob))
        assert abs(direct - sim_val) < 1e-10


def test_swap_chsh_below_tsirelson():
    sim = qz.quantize(popt.choi_of_transpose(2))
    res = games.seesaw_max_chsh(sim.sigma, restarts=16, seed=0)
    assert res.value <= games.TSIRELSON + 1e-6
