import numpy as np
import pytest

from netgames import make_lq_game, make_network
from netgames.game import SmoothGame, uniform_profile
from netgames.potential import (PotentialSpec, alpha_general, alpha_lq,
                                box_quadratic_max, check_alpha_potential,
                                check_derivative_relation, grad_phi_lq,
                                phi_abs_bound, phi_general, phi_lq, phi_max_lq,
                                smoothness_L)
from netgames.welfare import check_contraction, phi_maximizer
from conftest import random_assumption3_game, random_lq_game

ASYM = make_lq_game(make_network([[0.0, 1.0], [0.0, 0.0]]), beta=0.0,
                    gamma=1.0, bounds=(-1.0, 1.0))


def test_phi_lq_examples():
    g = make_lq_game(make_network([[0.0, 1.0], [1.0, 0.0]]), beta=0.0, gamma=1.0)
    assert phi_lq(g, [0.0, 0.0]) == 0.0
    assert phi_lq(g, [1.0, 1.0]) == pytest.approx(0.0)


def test_exact_potential_identity_symmetric(rng):
    g = random_lq_game(rng, symmetric=True)
    worst = 0.0
    for _ in range(2000):
        a = uniform_profile(g, rng)
        i = int(rng.integers(0, g.n))
        ap = a.copy()
        ap[i] = rng.uniform(g.lo[i], g.hi[i])
        du = g.utility(i, a) - g.utility(i, ap)
        dphi = phi_lq(g, a) - phi_lq(g, ap)
        worst = max(worst, abs(du - dphi))
    assert worst <= 1e-12


def test_grad_phi_examples(rng):
    g = random_lq_game(rng, symmetric=True)
    assert np.allclose(grad_phi_lq(g, np.zeros(g.n)), g.beta)
    a = uniform_profile(g, rng)
    own = np.array([g.grad_own(i, a) for i in range(g.n)])
    assert np.allclose(grad_phi_lq(g, a), own, atol=1e-12)


def test_grad_phi_fd_oracle(rng):
    g = random_lq_game(rng)
    h = 1e-6
    for _ in range(50):
        a = uniform_profile(g, rng)
        i = int(rng.integers(0, g.n))
        up, dn = a.copy(), a.copy()
        up[i] += h
        dn[i] -= h
        fd = (phi_lq(g, up) - phi_lq(g, dn)) / (2 * h)
        assert grad_phi_lq(g, a)[i] == pytest.approx(fd, abs=1e-8)


def test_alpha_lq_examples(rng):
    sym = random_lq_game(rng, symmetric=True)
    assert alpha_lq(sym) == 0.0
    assert alpha_lq(ASYM) == pytest.approx(1.0)
    double = make_lq_game(ASYM.net, beta=0.0, gamma=2.0, bounds=(-1.0, 1.0))
    assert alpha_lq(double) == pytest.approx(2.0)


def test_alpha_general_examples(rng):
    sym = random_lq_game(rng, symmetric=True)
    assert alpha_general(sym) == 0.0
    assert alpha_general(ASYM) == pytest.approx(2.0)
    g = random_lq_game(rng)
    assert alpha_general(g) == pytest.approx(g.a_delta / g.a_bar * alpha_lq(g),
                                             rel=1e-12)


def test_alpha_general_grid_matches_constant_cross(rng):
    lq = random_lq_game(rng, n_max=3)
    wrapped = SmoothGame(bounds=lq.bounds, utility=lq.utility,
                         grad_own=lq.grad_own, cross_second=lq.cross_second,
                         concave=True)
    # constant cross derivatives make the grid value exact
    assert alpha_general(wrapped, grid_points=3) == pytest.approx(
        alpha_general(lq), rel=1e-12)


def test_phi_general_zero_path(rng):
    g = random_lq_game(rng)
    z = uniform_profile(g, rng)
    spec = PotentialSpec(z_ref=z, quad_nodes=4)
    assert phi_general(g, spec, z) == pytest.approx(0.0, abs=1e-14)


def test_phi_general_matches_closed_form(rng):
    for _ in range(10):
        g = random_lq_game(rng)
        spec = PotentialSpec(z_ref=np.zeros(g.n), quad_nodes=2)
        for _ in range(20):
            a = uniform_profile(g, rng)
            assert phi_general(g, spec, a) == pytest.approx(phi_lq(g, a), abs=1e-12)


def test_phi_general_single_player_ftc():
    sg = SmoothGame(bounds=[(-1.0, 1.0)],
                    utility=lambda i, a: float(-0.5 * a[0] ** 2 + 0.3 * a[0]),
                    grad_own=lambda i, a: float(-a[0] + 0.3),
                    cross_second=lambda i, j, a: -1.0,
                    concave=True)

    def f(x):
        return -0.5 * x ** 2 + 0.3 * x

    spec = PotentialSpec(z_ref=np.array([-0.4]), quad_nodes=8)
    for x in (-1.0, -0.2, 0.55, 1.0):
        assert phi_general(sg, spec, np.array([x])) == pytest.approx(
            f(x) - f(-0.4), abs=1e-12)


def test_phi_general_rejects_single_node(rng):
    g = random_lq_game(rng)
    with pytest.raises(ValueError):
        phi_general(g, PotentialSpec(z_ref=np.zeros(g.n), quad_nodes=1),
                    np.zeros(g.n))


def test_check_alpha_potential_pass_and_fail(rng):
    sym = random_lq_game(rng, symmetric=True)
    report = check_alpha_potential(sym, None, 0.0, rng=1, count=5000)
    assert report.passed
    assert report.empirical_violation <= 1e-10

    g = random_lq_game(rng)
    alpha = alpha_lq(g)
    report = check_alpha_potential(g, None, alpha, rng=2, count=50_000)
    assert report.passed
    assert report.empirical_violation <= alpha + 1e-9
    assert report.alpha_lq == pytest.approx(alpha)

    bad = check_alpha_potential(g, None, report.empirical_violation / 2,
                                rng=2, count=50_000)
    assert not bad.passed


def test_check_alpha_potential_generic_path_agrees(rng):
    g = random_lq_game(rng, n_max=6)
    fast = check_alpha_potential(g, None, alpha_lq(g), rng=7, count=500)
    slow = check_alpha_potential(g, lambda a: phi_lq(g, a), alpha_lq(g),
                                 rng=7, count=500)
    assert slow.empirical_violation == pytest.approx(fast.empirical_violation,
                                                     abs=1e-12)


def test_derivative_relation_bound(rng):
    sym = random_lq_game(rng, symmetric=True)
    assert check_derivative_relation(sym, None, rng=3, count=2000) <= 1e-12
    for _ in range(10):
        g = random_lq_game(rng)
        gap = check_derivative_relation(g, None, rng=4, count=5000)
        assert gap <= alpha_lq(g) / g.a_delta + 1e-7


def test_derivative_relation_boundary_tight():
    gap = check_derivative_relation(ASYM, None, rng=5, count=20_000)
    bound = alpha_lq(ASYM) / ASYM.a_delta
    assert gap <= bound + 1e-7
    # the gap at profiles with |a_2| = 1 attains the bound
    a = np.array([0.3, 1.0])
    direct = abs(grad_phi_lq(ASYM, a)[0] - ASYM.grad_own(0, a))
    assert direct == pytest.approx(bound)


def test_smoothness_examples():
    flat = make_lq_game(make_network(np.zeros((3, 3))), gamma=0.0)
    assert smoothness_L(flat) == pytest.approx(1.0)
    # Hessian -I + (gamma/2)(G + G^T) = [[-1, 1], [1, -1]]: eigenvalues {0, -2}
    pair = make_lq_game(make_network([[0.0, 1.0], [1.0, 0.0]]), gamma=1.0)
    assert smoothness_L(pair) == pytest.approx(2.0)


def test_smoothness_quadratic_lower_bound(rng):
    g = random_lq_game(rng, n_max=8)
    L = smoothness_L(g)
    for _ in range(2000):
        a = uniform_profile(g, rng)
        b = uniform_profile(g, rng)
        lhs = phi_lq(g, a)
        rhs = (phi_lq(g, b) + grad_phi_lq(g, b) @ (a - b)
               - 0.5 * L * float((a - b) @ (a - b)))
        assert lhs >= rhs - 1e-10


def test_phi_max_flat_game():
    g = make_lq_game(make_network(np.zeros((3, 3))), beta=0.0, gamma=0.0,
                     bounds=(-1.0, 1.0))
    result = phi_max_lq(g)
    assert result.certified
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(result.argmax, 0.0)


def test_phi_max_assumption3_example():
    g = make_lq_game(make_network([[0.0, 0.5], [0.5, 0.0]]), beta=[0.1, 0.1],
                     gamma=0.25, bounds=(-1.0, 1.0))
    result = phi_max_lq(g)
    assert result.certified
    assert np.allclose(result.argmax, 0.8 / 7, atol=1e-10)
    assert result.abs_upper_bound >= abs(result.value)


def test_projected_ascent_matches_certified(rng):
    g = random_assumption3_game(rng, n_max=8)
    assert check_contraction(g).holds
    value, argmax = box_quadratic_max(g.beta, g.msym, g.lo, g.hi, rng=11)
    assert np.allclose(argmax, phi_maximizer(g), atol=1e-8)


def test_phi_abs_bound_sound(rng):
    g = random_lq_game(rng)
    bound = phi_abs_bound(g)
    for _ in range(2000):
        a = uniform_profile(g, rng)
        assert abs(phi_lq(g, a)) <= bound + 1e-12


def test_uncertified_phi_max_below_bound(rng):
    g = random_lq_game(rng, gamma_range=(0.9, 1.0))
    result = phi_max_lq(g, rng=3)
    if not check_contraction(g).holds:
        assert not result.certified
    assert result.value <= result.abs_upper_bound + 1e-9
