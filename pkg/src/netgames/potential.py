"""Approximate potential functions for network games.

The quadratic closed form for LQ games, the general line-integral form for
smooth games, the mismatch level alpha each of them certifies, and the
Monte-Carlo / derivative checks that validate the potential property on a
concrete game instance.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from . import welfare
from ._kernels import deviation_scan, jacobi_spectrum
from .errors import PreconditionError
from .game import LQGame, uniform_profile, validate_profile
from .network import asymmetry_inf_norm

PASS_SLACK = 1e-9
DERIV_SLACK = 1e-7


@dataclass(frozen=True)
class PotentialSpec:
    """Which potential to evaluate and how.

    z_ref is the fixed anchor profile of the line-integral form; quad_nodes
    the number of Gauss-Legendre nodes (>= 2; the integrand of an LQ game is
    quadratic in the line parameter, so 2 nodes are already exact).
    """
    kind: str = "general_integral"
    z_ref: np.ndarray | None = None
    quad_nodes: int = 16


@dataclass(frozen=True)
class AlphaReport:
    alpha_checked: float
    empirical_violation: float
    samples: int
    passed: bool
    alpha_lq: float | None = None
    alpha_general: float | None = None


@dataclass(frozen=True)
class PhiMax:
    value: float
    argmax: np.ndarray
    certified: bool
    abs_upper_bound: float


# ---------------------------------------------------------------------------
# Closed forms for LQ games
# ---------------------------------------------------------------------------

def phi_lq(g: LQGame, a) -> float:
    """Quadratic potential: -|a|^2/2 + beta.a + (gamma/2) a.(G a)."""
    a = np.asarray(a, dtype=np.float64)
    w = g.net.weights
    return float(-0.5 * (a @ a) + g.beta @ a + 0.5 * g.gamma * (a @ (w @ a)))


def grad_phi_lq(g: LQGame, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return -a + g.beta + g.msym @ a


def alpha_lq(g: LQGame) -> float:
    """Mismatch level certified by the quadratic potential.

    Scales with the asymmetry of the network: (a_bar a_delta |gamma| / 2)
    times the infinity norm of G - G^T.
    """
    return 0.5 * g.a_bar * g.a_delta * abs(g.gamma) * asymmetry_inf_norm(g.net)


# ---------------------------------------------------------------------------
# General form
# ---------------------------------------------------------------------------

def phi_general(g, spec: PotentialSpec, a) -> float:
    """Line-integral potential from a fixed anchor, by Gauss-Legendre quadrature.

    Integrates sum_j du_j/da_j(z + r (a - z)) (a_j - z_j) over r in [0, 1].
    """
    if spec.quad_nodes < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got {spec.quad_nodes}")
    a = np.asarray(a, dtype=np.float64)
    z = np.zeros(g.n) if spec.z_ref is None else validate_profile(g, spec.z_ref)
    d = a - z
    nodes, weights = np.polynomial.legendre.leggauss(spec.quad_nodes)
    total = 0.0
    for x, w in zip(nodes, weights):
        r = 0.5 * (x + 1.0)
        p = z + r * d
        if isinstance(g, LQGame):
            grads = -p + g.beta + g.mgrad @ p
        else:
            grads = np.array([g.grad_own(j, p) for j in range(g.n)])
        total += 0.5 * w * float(grads @ d)
    return total


def alpha_general(g, grid_points: int = 9, max_evals: int = 10 ** 6) -> float:
    """Mismatch level from the cross-derivative bound.

    Exact for LQ games (constant cross derivatives).  For generic games the
    inner max is taken over a uniform grid, so the result is a grid lower
    bound; the grid is shrunk (with a warning) if it would exceed
    ``max_evals`` points.
    """
    if isinstance(g, LQGame):
        return 0.5 * g.a_delta ** 2 * abs(g.gamma) * asymmetry_inf_norm(g.net)
    n = g.n
    m = grid_points
    if m ** n > max_evals:
        m = max(2, int(max_evals ** (1.0 / n)))
        warnings.warn(f"cross-derivative grid truncated to {m} points per axis; "
                      "result is a lower bound of the max", stacklevel=2)
    axes = [np.linspace(g.lo[i], g.hi[i], m) for i in range(n)]
    best = 0.0
    for point in itertools.product(*axes):
        p = np.array(point)
        for i in range(n):
            s = sum(abs(g.cross_second(i, j, p) - g.cross_second(j, i, p))
                    for j in range(n))
            best = max(best, s)
    return 0.5 * g.a_delta ** 2 * best


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def _sample_deviations(g, rng, count):
    i_idx = rng.integers(0, g.n, size=count)
    profiles = rng.uniform(g.lo, g.hi, size=(count, g.n))
    new_actions = rng.uniform(g.lo[i_idx], g.hi[i_idx])
    return i_idx, profiles, new_actions


def check_alpha_potential(g, phi, alpha: float, rng, count: int = 100_000,
                          chunk: int = 32_768) -> AlphaReport:
    """Monte-Carlo check of the potential property at level ``alpha``.

    Samples (player, profile, deviation) triples uniformly, records the
    largest observed difference between the utility change and the potential
    change, and passes iff it is at most alpha + 1e-9.  ``phi=None`` selects
    the canonical quadratic potential of an LQ game (fast path); any other
    callable is evaluated as phi(profile).
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    fast = isinstance(g, LQGame) and (phi is None or phi is phi_lq)
    if phi is None and not isinstance(g, LQGame):
        raise ValueError("phi=None is only defined for LQ games")
    worst = 0.0
    remaining = count
    while remaining > 0:
        batch = min(chunk, remaining)
        i_idx, profiles, new_actions = _sample_deviations(g, rng, batch)
        if fast:
            worst = max(worst, deviation_scan(g.mgrad, g.msym, g.beta,
                                              i_idx, profiles, new_actions))
        else:
            for k in range(batch):
                i = int(i_idx[k])
                a = profiles[k]
                ap = a.copy()
                ap[i] = new_actions[k]
                du = g.utility(i, a) - g.utility(i, ap)
                dphi = phi(a) - phi(ap)
                worst = max(worst, abs(du - dphi))
        remaining -= batch
    is_lq = isinstance(g, LQGame)
    return AlphaReport(alpha_checked=float(alpha),
                       empirical_violation=worst,
                       samples=count,
                       passed=bool(worst <= alpha + PASS_SLACK),
                       alpha_lq=alpha_lq(g) if is_lq else None,
                       alpha_general=alpha_general(g) if is_lq else None)


def check_derivative_relation(g, spec: PotentialSpec | None, rng,
                              count: int = 10_000) -> float:
    """Max over sampled (player, profile) of |dphi/da_i - du_i/da_i|.

    The potential property bounds this by alpha / a_delta.  Uses the closed
    form gradient for LQ games; central finite differences of the
    line-integral potential otherwise.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if isinstance(g, LQGame) and (spec is None or spec.kind == "lq_closed_form"):
        profiles = rng.uniform(g.lo, g.hi, size=(count, g.n))
        i_idx = rng.integers(0, g.n, size=count)
        gaps = profiles @ (g.msym - g.mgrad).T
        return float(np.abs(gaps[np.arange(count), i_idx]).max())
    if spec is None:
        raise ValueError("a PotentialSpec is required for non-LQ games")
    worst = 0.0
    h = 1e-6
    for _ in range(count):
        a = uniform_profile(g, rng)
        i = int(rng.integers(0, g.n))
        up = a.copy()
        dn = a.copy()
        up[i] = min(up[i] + h, g.hi[i])
        dn[i] = max(dn[i] - h, g.lo[i])
        width = up[i] - dn[i]
        if width == 0.0:
            continue
        dphi = (phi_general(g, spec, up) - phi_general(g, spec, dn)) / width
        worst = max(worst, abs(dphi - g.grad_own(i, a)))
    return worst


# ---------------------------------------------------------------------------
# Smoothness and maxima
# ---------------------------------------------------------------------------

def smoothness_L(g: LQGame) -> float:
    """Spectral norm of the constant Hessian -I + gamma (G + G^T) / 2."""
    hessian = -np.eye(g.n) + g.msym
    spectrum = jacobi_spectrum(hessian)
    return float(np.abs(spectrum).max())


def box_quadratic_max(b, m, lo, hi, rng, starts: int = 20, tol: float = 1e-10,
                      max_iters: int = 100_000):
    """Multi-start projected gradient ascent of -|a|^2/2 + b.a + a.(M a)/2.

    M must be symmetric.  Step 1/L with L the Hessian spectral norm; each
    start stops when the projected-gradient norm drops below ``tol``.
    Returns (value, argmax) of the best run; a local maximum only unless the
    objective is concave.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    b = np.asarray(b, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    n = b.size
    hessian = -np.eye(n) + m
    L = float(np.abs(jacobi_spectrum(hessian)).max())
    step = 1.0 / max(L, 1e-12)

    def value(a):
        return float(-0.5 * (a @ a) + b @ a + 0.5 * (a @ (m @ a)))

    best_val = -np.inf
    best_arg = None
    for _ in range(starts):
        a = rng.uniform(lo, hi)
        for _ in range(max_iters):
            grad = -a + b + m @ a
            a_new = np.clip(a + step * grad, lo, hi)
            if float(np.linalg.norm((a_new - a) / step)) < tol:
                a = a_new
                break
            a = a_new
        v = value(a)
        if v > best_val:
            best_val, best_arg = v, a
    return best_val, best_arg


def phi_abs_bound(g: LQGame) -> float:
    """Interval-arithmetic upper bound on max |phi| over the action box."""
    per = np.maximum(np.abs(g.lo), np.abs(g.hi))
    w = np.abs(g.net.weights)
    return float(np.sum(0.5 * per ** 2 + np.abs(g.beta) * per)
                 + 0.5 * abs(g.gamma) * (per @ (w @ per)))


def phi_max_lq(g: LQGame, rng=0, starts: int = 20) -> PhiMax:
    """Maximum of the quadratic potential over the action box.

    Under the contraction assumption the interior maximizer has a closed
    form and the result is certified; otherwise multi-start projected
    ascent reports the best local maximum found.  ``abs_upper_bound`` is a
    sound interval bound on max |phi| either way.
    """
    bound = phi_abs_bound(g)
    if welfare.check_contraction(g).holds:
        argmax = welfare.phi_maximizer(g)
        return PhiMax(value=phi_lq(g, argmax), argmax=argmax,
                      certified=True, abs_upper_bound=bound)
    val, argmax = box_quadratic_max(g.beta, g.msym, g.lo, g.hi, rng, starts=starts)
    return PhiMax(value=val, argmax=argmax, certified=False, abs_upper_bound=bound)
