"""Linear-quadratic network games and a generic smooth-game interface.

A player's utility is -a_i^2/2 + beta_i a_i + gamma * z_i * a_i where
z_i = sum_j G_ij a_j is the local aggregate of neighbours' actions.
Action profiles are plain float arrays; each game owns per-player interval
bounds.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, UnsupportedOperationError
from .network import Network, _validate_rows, make_network

NEAR_ZERO_UTILITY = 1e-12


@dataclass(frozen=True)
class LQGame:
    net: Network
    beta: np.ndarray
    gamma: float
    bounds: np.ndarray  # shape (n, 2), rows (lo_i, hi_i)

    # derived constants, filled in __post_init__
    lo: np.ndarray = field(init=False, repr=False)
    hi: np.ndarray = field(init=False, repr=False)
    a_bar: float = field(init=False)
    a_delta: float = field(init=False)
    grad_bound: float = field(init=False)
    mgrad: np.ndarray = field(init=False, repr=False)   # gamma * G
    msym: np.ndarray = field(init=False, repr=False)    # gamma * (G + G^T) / 2

    def __post_init__(self):
        n = self.net.n
        beta = np.ascontiguousarray(self.beta, dtype=np.float64)
        bounds = np.ascontiguousarray(self.bounds, dtype=np.float64)
        if beta.shape != (n,):
            raise ValueError(f"beta must have shape ({n},), got {beta.shape}")
        if bounds.shape != (n, 2):
            raise ValueError(f"bounds must have shape ({n}, 2), got {bounds.shape}")
        lo, hi = bounds[:, 0].copy(), bounds[:, 1].copy()
        if not np.all(lo < hi):
            raise ValueError("each action interval needs lo < hi")
        g = self.net.weights
        gamma = float(self.gamma)
        per_bound = np.maximum(np.abs(lo), np.abs(hi))
        # |du_i/da_i| <= |a_i| + |beta_i| + |gamma| sum_j |G_ij| max|a_j|,
        # a sound upper bound by interval arithmetic
        grad_bound = float(np.max(per_bound + np.abs(beta)
                                  + abs(gamma) * (np.abs(g) @ per_bound)))
        for name, val in [("beta", beta), ("bounds", bounds), ("lo", lo), ("hi", hi),
                          ("a_bar", float(per_bound.max())),
                          ("a_delta", float((hi - lo).max())),
                          ("grad_bound", grad_bound),
                          ("gamma", gamma),
                          ("mgrad", np.ascontiguousarray(gamma * g)),
                          ("msym", np.ascontiguousarray(0.5 * gamma * (g + g.T)))]:
            object.__setattr__(self, name, val)
        for arr in (self.beta, self.bounds, self.lo, self.hi, self.mgrad, self.msym):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.net.n

    concave = True  # utility is strictly concave in the own action

    def utility(self, i: int, a) -> float:
        a = np.asarray(a, dtype=np.float64)
        z = float(self.net.weights[i] @ a)
        ai = float(a[i])
        return -0.5 * ai * ai + float(self.beta[i]) * ai + self.gamma * z * ai

    def grad_own(self, i: int, a) -> float:
        a = np.asarray(a, dtype=np.float64)
        return float(-a[i] + self.beta[i] + self.gamma * (self.net.weights[i] @ a))

    def cross_second(self, i: int, j: int, a=None) -> float:
        if i == j:
            return -1.0
        return self.gamma * float(self.net.weights[i, j])


class SmoothGame:
    """Generic smooth game on box action sets with caller-supplied derivatives.

    When ``grad_own`` or ``cross_second`` is omitted, central finite
    differences of the level below are used and ``fd_derivatives`` is set to
    flag the lower accuracy.
    """

    def __init__(self, bounds, utility, grad_own=None, cross_second=None,
                 concave=False, fd_step=1e-6):
        bounds = np.asarray(bounds, dtype=np.float64)
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise ValueError("bounds must have shape (n, 2)")
        if not np.all(bounds[:, 0] < bounds[:, 1]):
            raise ValueError("each action interval needs lo < hi")
        self.bounds = bounds
        self.lo = bounds[:, 0].copy()
        self.hi = bounds[:, 1].copy()
        self.n = bounds.shape[0]
        self.a_bar = float(np.maximum(np.abs(self.lo), np.abs(self.hi)).max())
        self.a_delta = float((self.hi - self.lo).max())
        self.concave = concave
        self.fd_step = float(fd_step)
        self.fd_derivatives = grad_own is None or cross_second is None
        self._utility = utility
        self._grad_own = grad_own
        self._cross_second = cross_second

    def utility(self, i, a):
        return float(self._utility(i, np.asarray(a, dtype=np.float64)))

    def grad_own(self, i, a):
        if self._grad_own is not None:
            return float(self._grad_own(i, np.asarray(a, dtype=np.float64)))
        h = self.fd_step
        up = np.array(a, dtype=np.float64)
        dn = up.copy()
        up[i] += h
        dn[i] -= h
        return (self.utility(i, up) - self.utility(i, dn)) / (2 * h)

    def cross_second(self, i, j, a):
        if self._cross_second is not None:
            return float(self._cross_second(i, j, np.asarray(a, dtype=np.float64)))
        h = self.fd_step
        up = np.array(a, dtype=np.float64)
        dn = up.copy()
        up[j] += h
        dn[j] -= h
        return (self.grad_own(i, up) - self.grad_own(i, dn)) / (2 * h)


def make_lq_game(net: Network, beta=0.0, gamma=0.0, bounds=(-1.0, 1.0)) -> LQGame:
    """Build an LQGame, broadcasting scalar beta and a single (lo, hi) pair."""
    n = net.n
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim == 0:
        beta = np.full(n, float(beta))
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.shape == (2,):
        bounds = np.tile(bounds, (n, 1))
    return LQGame(net=net, beta=beta, gamma=float(gamma), bounds=bounds)


def validate_profile(g, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (g.n,):
        raise ValueError(f"profile must have shape ({g.n},), got {a.shape}")
    if np.any(a < g.lo) or np.any(a > g.hi):
        raise ValueError("profile violates action bounds")
    return a


def uniform_profile(g, rng) -> np.ndarray:
    """Profile with each action uniform in its interval."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.uniform(g.lo, g.hi)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def local_aggregate(g: LQGame, i: int, a) -> float:
    """z_i = sum_j G_ij a_j (the diagonal is zero, so a_i never enters)."""
    a = np.asarray(a, dtype=np.float64)
    if not 0 <= i < g.n:
        raise IndexError(f"player index {i} out of range")
    return float(g.net.weights[i] @ a)


def utility(g, i: int, a) -> float:
    if not 0 <= i < g.n:
        raise IndexError(f"player index {i} out of range")
    return g.utility(i, a)


def grad_own(g, i: int, a) -> float:
    if not 0 <= i < g.n:
        raise IndexError(f"player index {i} out of range")
    return g.grad_own(i, a)


def best_response(g: LQGame, i: int, a) -> float:
    """Unique maximizer of the concave quadratic: beta_i + gamma z_i clipped."""
    target = g.beta[i] + g.gamma * local_aggregate(g, i, a)
    return float(min(max(target, g.lo[i]), g.hi[i]))


def best_response_profile(g: LQGame, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return np.clip(g.beta + g.mgrad @ a, g.lo, g.hi)


def _golden_max(f, lo, hi, tol=1e-10):
    """Golden-section maximization of a concave f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd, f(lo), f(hi))


def ne_gap(g, a):
    """Per-player best possible improvement and its maximum.

    Returns (eps, per_player) with per_player[i] =
    max_{a'_i} u_i(a'_i, a_-i) - u_i(a).
    """
    a = np.asarray(a, dtype=np.float64)
    if isinstance(g, LQGame):
        x = g.beta + g.mgrad @ a
        br = np.clip(x, g.lo, g.hi)
        per = 0.5 * ((a - x) ** 2 - (br - x) ** 2)
        return float(per.max()), per
    if not g.concave:
        raise UnsupportedOperationError(
            "ne_gap for a generic game requires concave utilities")
    per = np.empty(g.n)
    for i in range(g.n):
        def f(x, i=i):
            probe = a.copy()
            probe[i] = x
            return g.utility(i, probe)
        per[i] = _golden_max(f, float(g.lo[i]), float(g.hi[i])) - g.utility(i, a)
    per = np.maximum(per, 0.0)
    return float(per.max()), per


def relative_ne_gap(g, a, return_flags=False):
    """Max over players of the best improvement divided by |u_i(a)|.

    Players with |u_i(a)| below 1e-12 contribute their absolute gap and are
    flagged when ``return_flags`` is set.
    """
    a = np.asarray(a, dtype=np.float64)
    _, per = ne_gap(g, a)
    vals = np.array([abs(utility(g, i, a)) for i in range(g.n)])
    near_zero = vals < NEAR_ZERO_UTILITY
    terms = np.where(near_zero, per, per / np.where(near_zero, 1.0, vals))
    result = float(terms.max())
    if return_flags:
        return result, np.flatnonzero(near_zero)
    return result


def social_welfare(g: LQGame, a) -> float:
    """Total utility: -|a|^2/2 + beta.a + gamma a.(G a)."""
    a = np.asarray(a, dtype=np.float64)
    return float(-0.5 * (a @ a) + g.beta @ a + g.gamma * (a @ (g.net.weights @ a)))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def save_game(g: LQGame, path) -> None:
    payload = {
        "network": {"n": g.n,
                    "weights": [[float(x) for x in row] for row in g.net.weights],
                    "provenance": g.net.provenance},
        "beta": [float(b) for b in g.beta],
        "gamma": float(g.gamma),
        "bounds": [[float(l), float(h)] for l, h in g.bounds],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_game(path) -> LQGame:
    """Load an LQ game from JSON.

    The "network" field may be inline (an object with "weights") or a path,
    resolved relative to the game file.  Scalar "beta" and a single
    [lo, hi] pair broadcast to all players.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
    for key in ("network", "gamma"):
        if key not in payload:
            raise FormatError(f"game file missing '{key}'")
    spec = payload["network"]
    if isinstance(spec, str):
        from .network import load_network
        netpath = spec if os.path.isabs(spec) else os.path.join(
            os.path.dirname(os.path.abspath(path)), spec)
        net = load_network(netpath)
    elif isinstance(spec, dict) and "weights" in spec:
        mat = _validate_rows(spec["weights"])
        net = make_network(mat, provenance=spec.get("provenance"))
    else:
        raise FormatError("'network' must be a path or an object with 'weights'")
    beta = payload.get("beta", 0.0)
    bounds = payload.get("bounds", (-1.0, 1.0))
    try:
        return make_lq_game(net, beta=beta, gamma=payload["gamma"], bounds=bounds)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
