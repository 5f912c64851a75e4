import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from instances import instances

from crnlyap import (
    Direction,
    LyapunovCandidate,
    Reaction,
    boundary_residual,
    build_network,
    candidate_gradient,
    candidate_value,
    cbp_generate,
    dissipation_audit,
    hessian_check,
    integrate,
    map_equilibrium,
    pde_residual,
    pde_residual_sweep,
    structure,
)
from crnlyap.errors import DegenerateBasis, InvalidRegion, PathNotInClass
from crnlyap.lyapunov import _terms, approach_path, boundary_record

WEIGHTED = LyapunovCandidate([1 / 3, 1], [6, 1])
WRONG = LyapunovCandidate([1, 1], [6, 1])


def test_candidate_value_hand_evaluation():
    assert candidate_value(WEIGHTED, [3, 4]) == pytest.approx(-2 + 7 * math.log(2), abs=1e-12)
    # the displayed form with its additive constant 3 = sum d_j x*_j
    x1, x2 = 3.0, 4.0
    shown = (1 / 3) * (-x1 - x1 * math.log(6 / x1)) - x2 - x2 * math.log(1 / x2) + 3
    assert candidate_value(WEIGHTED, [3, 4]) == pytest.approx(shown, abs=1e-12)
    assert candidate_value(WEIGHTED, [6, 1]) == 0


def test_unit_weights_give_pseudo_helmholtz():
    c = LyapunovCandidate([1, 1], [2, 1])
    x = np.array([0.7, 3.1])
    g = np.sum([2, 1] - x - x * np.log(np.array([2, 1]) / x))
    assert candidate_value(c, x) == pytest.approx(g, rel=1e-14)


def test_gradient_values():
    assert np.allclose(candidate_gradient(WEIGHTED, [3, 4]), [math.log(0.5) / 3, math.log(4)], rtol=1e-14)
    assert np.all(candidate_gradient(WEIGHTED, [6, 1]) == 0)


def test_active_set():
    assert LyapunovCandidate([0, 2, 1], [1, 1, 1]).active_set == (1, 2)


@settings(max_examples=100)
@given(
    st.lists(st.floats(0.01, 5), min_size=3, max_size=3),
    st.lists(st.floats(0.1, 10), min_size=3, max_size=3),
    st.lists(st.floats(0.1, 10), min_size=3, max_size=3),
)
def test_candidate_calculus(d, ref, x):
    c = LyapunovCandidate(d, ref)
    x = np.array(x)
    assert candidate_value(c, x) >= -1e-12 * (1 + np.sum(np.array(d) * x))
    g = candidate_gradient(c, x)
    H = c.hessian(x)
    for j in range(3):
        h = 1e-5 * x[j]
        e = np.zeros(3)
        e[j] = h
        fd = (c.value(x + e) - c.value(x - e)) / (2 * h)
        assert fd == pytest.approx(g[j], rel=1e-6, abs=1e-8)
        fd2 = (c.gradient(x + e) - c.gradient(x - e)) / (2 * h)
        assert np.allclose(fd2, H[:, j], rtol=1e-5, atol=1e-8)


@settings(max_examples=100)
@given(st.lists(st.floats(0.1, 10), min_size=2, max_size=2))
def test_candidate_positive_away_from_reference(x):
    x = np.array(x)
    if np.max(np.abs(x - [6, 1])) > 1e-3:
        assert candidate_value(WEIGHTED, x) > 0


def test_pde_terms_at_hand_point(cbp_net):
    plain, shifted = _terms(cbp_net, WEIGHTED, np.array([[3.0, 4.0]]))
    assert np.allclose(plain - shifted, [1, -7, 6], rtol=1e-13)
    assert abs(pde_residual(cbp_net, WEIGHTED, [3, 4])) <= 1e-12


def test_pde_residual_vanishes_at_reference(cbp_net):
    assert pde_residual(cbp_net, WRONG, [6, 1]) == 0


def test_wrong_candidate_fixture(cbp_net):
    # exact value: 8 + 1 - 27/2 - 4 + 1 - 16 = -23.25
    assert pde_residual(cbp_net, WRONG, [3, 4]) == pytest.approx(-23.25, rel=1e-12)


def test_sweep_passes_for_weighted_candidate(cbp_net):
    rep = pde_residual_sweep(cbp_net, WEIGHTED, (0.1, 10), 1000, 42)
    assert rep.passed
    assert rep.max_abs_residual <= 1e-9 * rep.scale
    assert rep.sample_points.shape == (1000, 2)
    assert np.all((rep.sample_points >= 0.1) & (rep.sample_points <= 10))


def test_sweep_refutes_unit_weights(cbp_net):
    rep = pde_residual_sweep(cbp_net, WRONG, (0.1, 10), 1000, 42)
    assert not rep.passed
    assert rep.max_abs_residual > 1e-3 * rep.scale


def test_sweep_reproducible(cbp_net):
    a = pde_residual_sweep(cbp_net, WRONG, samples=50, seed=7)
    b = pde_residual_sweep(cbp_net, WRONG, samples=50, seed=7)
    assert np.array_equal(a.residuals, b.residuals)


def test_pseudo_helmholtz_on_balanced_network(original):
    rep = pde_residual_sweep(original, LyapunovCandidate([1, 1], [2, 1]), (0.05, 20), 500, 3)
    assert rep.passed


def test_invalid_region(cbp_net):
    with pytest.raises(InvalidRegion):
        pde_residual_sweep(cbp_net, WEIGHTED, (0, 10))
    with pytest.raises(InvalidRegion):
        pde_residual_sweep(cbp_net, WEIGHTED, (1, 10), samples=0)


@pytest.mark.parametrize("k", range(0, 50, 5))
def test_generated_candidates_solve_pde(k):
    inst = instances(50)[k]
    net = cbp_generate(inst.source, inst.d).network
    xs = map_equilibrium(inst.x_star, inst.d, Direction.TO_CBP)
    rep = pde_residual_sweep(net, LyapunovCandidate(inst.d.as_floats(), xs), samples=300, seed=k)
    assert rep.passed


def test_boundary_full_set(cbp_net):
    rec = boundary_record(cbp_net, WEIGHTED, [0, 1], None, approach_path([0, 1], 20))
    assert rec.passed
    assert abs(rec.residuals[-1]) < 1e-10
    assert len(rec.residuals) == 20


def test_boundary_partial_set_decreasing(cbp_net):
    zs = [(2, 0), (5, 0), (3, 0), (2, 1)]
    path = approach_path([0, 1], 20)
    res = boundary_residual(cbp_net, WEIGHTED, [0, 1], zs, path)
    mags = np.abs(res)
    assert np.all(np.diff(mags) < 0)
    assert mags[-1] < 1e-10
    # at (e, 1): 2/9 e^2 (1 - e/6) + e^3/27 + 2/9 e^2 - 2/9 e^2 = 2/9 e^2
    expected = [2 / 9 * 4.0**-m for m in range(1, 21)]
    assert np.allclose(res, expected, rtol=1e-9, atol=0)


def test_boundary_empty_set(cbp_net):
    res = boundary_residual(cbp_net, WEIGHTED, [0, 1], [], approach_path([0, 1], 5))
    assert np.all(res == 0)


def test_boundary_path_must_stay_in_class():
    net = build_network(["A", "B"], [Reaction.make((1, 0), (0, 1), 1), Reaction.make((0, 1), (1, 0), 1)])
    c = LyapunovCandidate([1, 1], [1, 1])
    with pytest.raises(PathNotInClass):
        boundary_residual(net, c, [0, 2], None, [[0.5, 1.5], [0.25, 2.0]])
    ok = boundary_residual(net, c, [0, 2], None, [[0.5, 1.5], [0.25, 1.75]])
    assert ok.shape == (2,)


def test_hessian_at_equilibrium():
    v = hessian_check(WEIGHTED, [(1, 0), (0, 1)], points=[[6, 1]])
    assert v.passed
    assert v.min_eigenvalue == pytest.approx(1 / 18, rel=1e-12)


def test_hessian_zero_weight_fails():
    c = LyapunovCandidate([0, 1], [1, 1])
    assert not hessian_check(c, [(1, 0)], samples=10).passed


def test_hessian_degenerate_basis():
    with pytest.raises(DegenerateBasis):
        hessian_check(WEIGHTED, [(1, 1), (2, 2)], samples=5)


@settings(max_examples=50)
@given(st.lists(st.floats(0.01, 10), min_size=3, max_size=3), st.integers(0, 1000))
def test_hessian_positive_weights_always_pass(d, seed):
    rng = np.random.default_rng(seed)
    B = rng.integers(-3, 4, size=(2, 3))
    if np.linalg.matrix_rank(B) < 2:
        return
    c = LyapunovCandidate(d, [1, 1, 1])
    assert hessian_check(c, [tuple(int(v) for v in b) for b in B], samples=20, seed=seed).passed


def test_dissipation_example_trajectory(cbp_net):
    traj = integrate(cbp_net, [3, 4], 50.0, sample_every=0.25)
    a = dissipation_audit(cbp_net, WEIGHTED, traj)
    assert a.passed and a.strict_decrease_ok
    assert a.values[0] == pytest.approx(-2 + 7 * math.log(2), abs=1e-12)
    assert a.values[-1] < 1e-10


def test_dissipation_constant_trajectory(cbp_net):
    traj = integrate(cbp_net, [6, 1], 10.0, sample_every=1.0)
    a = dissipation_audit(cbp_net, WEIGHTED, traj)
    assert a.passed
    assert np.max(np.abs(a.derivatives)) < 1e-9
    assert len(a.equilibrium_samples) == len(traj.times)


def test_dissipation_through_conjugacy(original, cbp_net, d_example):
    a = integrate(original, [1, 4], 30.0, sample_every=0.5)
    b = integrate(cbp_net, [3, 4], 30.0, sample_every=0.5)
    via = dissipation_audit(cbp_net, WEIGHTED, a.scaled(1 / d_example.as_floats()))
    direct = dissipation_audit(cbp_net, WEIGHTED, b)
    assert via.passed and direct.passed
    assert np.allclose(via.values, direct.values, atol=1e-6)


def test_dissipation_flags_increase(cbp_net):
    # centred at the start point, the candidate can only grow from 0
    c = LyapunovCandidate([1 / 3, 1], [3, 4])
    traj = integrate(cbp_net, [3, 4], 50.0, sample_every=0.25)
    a = dissipation_audit(cbp_net, c, traj)
    assert not a.derivative_ok
    assert not a.monotone_ok
    assert a.max_uphill > 0


@pytest.mark.parametrize("k", [2, 9, 21, 40])
def test_strict_decrease_on_random_instances(k):
    inst = instances(50)[k]
    net = cbp_generate(inst.source, inst.d).network
    xs = map_equilibrium(inst.x_star, inst.d, Direction.TO_CBP)
    c = LyapunovCandidate(inst.d.as_floats(), xs)
    traj = integrate(net, np.linspace(0.3, 3.0, net.n_species), 40.0, sample_every=0.2)
    a = dissipation_audit(net, c, traj)
    assert a.passed and a.strict_decrease_ok


def test_restricted_hessian_on_generated_subspaces():
    for inst in instances(10):
        net = cbp_generate(inst.source, inst.d).network
        xs = map_equilibrium(inst.x_star, inst.d, Direction.TO_CBP)
        c = LyapunovCandidate(inst.d.as_floats(), xs)
        assert hessian_check(c, structure(net).subspace_basis, samples=50).passed
