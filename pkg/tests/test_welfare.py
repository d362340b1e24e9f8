import numpy as np
import pytest

from netgames import make_lq_game, make_network
from netgames.errors import NumericFailure, PreconditionError
from netgames.game import social_welfare, uniform_profile
from netgames.welfare import (check_contraction, gauss_solve, phi_maximizer,
                              pos_bounds, social_optimum, sym_eigs,
                              welfare_ratio)
from conftest import random_assumption3_game, random_lq_game

EXAMPLE = make_lq_game(make_network([[0.0, 0.5], [0.5, 0.0]]),
                       beta=[0.1, 0.1], gamma=0.25, bounds=(-1.0, 1.0))


def test_gauss_solve_random_systems(rng):
    for _ in range(25):
        n = int(rng.integers(1, 12))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        x = gauss_solve(a, b)
        assert np.allclose(a @ x, b, atol=1e-9)


def test_gauss_solve_singular():
    with pytest.raises(NumericFailure):
        gauss_solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])


def test_contraction_examples():
    assert check_contraction(EXAMPLE).holds
    bad_gamma = make_lq_game(EXAMPLE.net, beta=[0.1, 0.1], gamma=0.6,
                             bounds=(-1.0, 1.0))
    check = check_contraction(bad_gamma)
    assert not check.gamma_ok and not check.holds
    bad_entry = make_lq_game(make_network([[0.0, 0.6], [0.5, 0.0]]),
                             beta=[0.1, 0.1], gamma=0.25, bounds=(-1.0, 1.0))
    check = check_contraction(bad_entry)
    assert not check.entries_ok and not check.holds


def test_contraction_requires_zero_in_box():
    g = make_lq_game(make_network(np.zeros((2, 2))), beta=0.0, gamma=0.1,
                     bounds=(0.5, 1.0))
    check = check_contraction(g)
    assert check.a_tilde is None and not check.holds


def test_social_optimum_examples():
    flat = make_lq_game(make_network(np.zeros((3, 3))), beta=[0.2, -0.1, 0.3],
                        gamma=0.0, bounds=(-1.0, 1.0))
    assert np.allclose(social_optimum(flat), [0.2, -0.1, 0.3])
    assert np.allclose(social_optimum(EXAMPLE), [2 / 15, 2 / 15], atol=1e-12)


def test_social_optimum_stationarity(rng):
    g = random_assumption3_game(rng)
    x = social_optimum(g)
    grad = -x + g.beta + 2.0 * g.msym @ x
    assert np.abs(grad).max() <= 1e-8


def test_social_optimum_requires_contraction():
    g = make_lq_game(make_network([[0.0, 1.0], [0.0, 0.0]]), beta=0.0,
                     gamma=1.0, bounds=(-1.0, 1.0))
    with pytest.raises(PreconditionError):
        social_optimum(g)


def test_phi_maximizer_examples(rng):
    flat = make_lq_game(make_network(np.zeros((2, 2))), beta=[0.3, -0.2],
                        gamma=0.0, bounds=(-1.0, 1.0))
    assert np.allclose(phi_maximizer(flat), [0.3, -0.2])
    assert np.allclose(phi_maximizer(EXAMPLE), [0.8 / 7, 0.8 / 7], atol=1e-12)
    g = random_assumption3_game(rng)
    x = phi_maximizer(g)
    assert np.all(x >= g.lo) and np.all(x <= g.hi)


def test_neumann_series_oracle(rng):
    g = random_assumption3_game(rng, n_max=10)
    p = 2.0 * g.msym
    x = social_optimum(g)
    partial = np.zeros(g.n)
    term = g.beta.copy()
    for _ in range(400):
        partial = partial + term
        term = p @ term
    assert np.allclose(partial, x, atol=1e-10)


def test_sym_eigs_examples():
    lam_min, lam_max, spec = sym_eigs(np.zeros((3, 3)))
    assert lam_min == lam_max == 0.0
    lam_min, lam_max, _ = sym_eigs([[0.0, 0.25], [0.25, 0.0]])
    assert lam_min == pytest.approx(-0.25)
    assert lam_max == pytest.approx(0.25)


def test_sym_eigs_rejects_asymmetric():
    with pytest.raises(PreconditionError):
        sym_eigs([[0.0, 1.0], [0.0, 0.0]])


def test_sym_eigs_gershgorin(rng):
    for _ in range(10):
        n = int(rng.integers(2, 9))
        m = rng.normal(size=(n, n))
        m = 0.5 * (m + m.T)
        _, _, spectrum = sym_eigs(m)
        radii = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
        for lam in spectrum:
            assert np.any(np.abs(lam - np.diag(m)) <= radii + 1e-10)


def test_sym_eigs_char_poly_roots(rng):
    for _ in range(10):
        m = rng.normal(size=(3, 3))
        m = 0.5 * (m + m.T)
        _, _, spectrum = sym_eigs(m)
        # characteristic polynomial coefficients via traces and the Sarrus determinant
        tr = np.trace(m)
        tr2 = np.trace(m @ m)
        det = (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
               - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
               + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))
        roots = np.sort(np.roots([1.0, -tr, 0.5 * (tr * tr - tr2), -det]).real)
        assert np.allclose(spectrum, roots, atol=1e-10)


def test_pos_bounds_examples():
    flat = make_lq_game(make_network(np.zeros((2, 2))), beta=[0.1, 0.1],
                        gamma=0.0, bounds=(-1.0, 1.0))
    assert pos_bounds(flat) == pytest.approx((1.0, 1.0, 1.0))
    pl, pg, pgam = pos_bounds(EXAMPLE)
    assert pl == pytest.approx(2.8125)
    assert pg == pytest.approx(1.25 ** 3 / 0.75 ** 2)
    assert pgam == pytest.approx(13.5)


def test_pos_bounds_ordering(rng):
    for _ in range(30):
        g = random_assumption3_game(rng)
        pl, pg, pgam = pos_bounds(g)
        assert 1.0 - 1e-9 <= pl <= pg + 1e-9 <= pgam + 2e-9


def test_welfare_ratio_example():
    report = welfare_ratio(EXAMPLE)
    assert report.ratio == pytest.approx(1.0208333333, abs=1e-9)
    assert report.ratio <= report.pos_lambda <= report.pos_G <= report.pos_gamma


def test_welfare_ratio_gamma_zero_is_one():
    flat = make_lq_game(make_network(np.zeros((3, 3))), beta=[0.2, 0.1, -0.3],
                        gamma=0.0, bounds=(-1.0, 1.0))
    assert welfare_ratio(flat).ratio == pytest.approx(1.0)


def test_welfare_ratio_rejects_zero_biases():
    g = make_lq_game(make_network(np.zeros((2, 2))), beta=0.0, gamma=0.1,
                     bounds=(-1.0, 1.0))
    with pytest.raises(NumericFailure):
        welfare_ratio(g)


def test_social_optimum_dominates_random_profiles(rng):
    g = random_assumption3_game(rng)
    best = social_welfare(g, social_optimum(g))
    for _ in range(10_000):
        assert best >= social_welfare(g, uniform_profile(g, rng)) - 1e-12
