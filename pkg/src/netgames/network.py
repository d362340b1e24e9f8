"""Directed weighted interaction networks.

Construction and I/O of square zero-diagonal weight matrices, the six random
network families used throughout the experiments, and the three matrix
metrics (asymmetry infinity norm, spectral norm, infinity norm).

Convention: ``weights[i, j] != 0`` means player j's action enters player i's
local aggregate, i.e. edges point from j to i.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, NumericFailure


def _as_rng(rng):
    """Accept an integer seed or a numpy Generator; return (generator, seed)."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    seed = int(rng)
    return np.random.default_rng(seed), seed


@dataclass(frozen=True)
class Network:
    """Square weight matrix with exactly-zero diagonal and finite entries."""

    n: int
    weights: np.ndarray
    provenance: dict | None = None

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if w.shape[0] != self.n:
            raise ValueError(f"n={self.n} does not match weights shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite entries")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("diagonal entries must be exactly zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class NetworkMetrics:
    asym_inf: float
    norm2: float
    norm_inf: float


def make_network(weights, provenance=None) -> Network:
    weights = np.asarray(weights, dtype=np.float64)
    return Network(n=weights.shape[0] if weights.ndim == 2 else -1,
                   weights=weights, provenance=provenance)


def _weights(net) -> np.ndarray:
    return net.weights if isinstance(net, Network) else np.asarray(net, dtype=np.float64)


# ---------------------------------------------------------------------------
# Random network families
# ---------------------------------------------------------------------------

def gen_complete_errors(n: int, eps: float, rng) -> Network:
    """Complete network with reciprocity errors.

    Every off-diagonal entry is drawn independently and uniformly from
    [1 - eps, 1 + eps].
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"need 0 <= eps < 1, got {eps}")
    gen, seed = _as_rng(rng)
    mat = gen.uniform(1.0 - eps, 1.0 + eps, size=(n, n))
    np.fill_diagonal(mat, 0.0)
    return make_network(mat, {"generator": "complete_errors",
                              "params": {"n": n, "eps": eps}, "seed": seed})


def gen_influential(n: int, eps: float, w: float, rng) -> Network:
    """Complete network with errors plus one heavily weighted player.

    Entries in the last row and column are drawn from [w - eps, w + eps]
    instead of [1 - eps, 1 + eps].
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"need 0 <= eps < 1, got {eps}")
    if w < 1.0:
        raise ValueError(f"need w >= 1, got {w}")
    gen, seed = _as_rng(rng)
    mat = gen.uniform(1.0 - eps, 1.0 + eps, size=(n, n))
    mat[n - 1, :] = gen.uniform(w - eps, w + eps, size=n)
    mat[:, n - 1] = gen.uniform(w - eps, w + eps, size=n)
    np.fill_diagonal(mat, 0.0)
    return make_network(mat, {"generator": "influential",
                              "params": {"n": n, "eps": eps, "w": w}, "seed": seed})


def gen_random_signs(n: int, eps: float, delta: float, rng) -> Network:
    """Signed complete network with reciprocity and sign errors.

    Per unordered pair a fair coin picks the magnitude interval
    [1 - eps, 1 + eps] or [-1 - eps, -1 + eps]; both directed entries are
    drawn independently from it, then with probability delta the upper
    entry is replaced by the negative of the lower one.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"need 0 <= eps < 1, got {eps}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"need 0 <= delta <= 1, got {delta}")
    gen, seed = _as_rng(rng)
    iu, ju = np.triu_indices(n, k=1)
    m = iu.size
    signs = np.where(gen.random(m) < 0.5, 1.0, -1.0)
    upper = signs + gen.uniform(-eps, eps, size=m)
    lower = signs + gen.uniform(-eps, eps, size=m)
    flip = gen.random(m) < delta
    upper = np.where(flip, -lower, upper)
    mat = np.zeros((n, n))
    mat[iu, ju] = upper
    mat[ju, iu] = lower
    return make_network(mat, {"generator": "random_signs",
                              "params": {"n": n, "eps": eps, "delta": delta},
                              "seed": seed})


def gen_erdos_renyi(n: int, p: float, rng) -> Network:
    """Directed Erdos-Renyi network: each ordered pair gets weight 1 w.p. p."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"need 0 <= p <= 1, got {p}")
    gen, seed = _as_rng(rng)
    mat = (gen.random((n, n)) < p).astype(np.float64)
    np.fill_diagonal(mat, 0.0)
    return make_network(mat, {"generator": "erdos_renyi",
                              "params": {"n": n, "p": p}, "seed": seed})


def gen_small_world(n: int, d: int, p: float, rng) -> Network:
    """Directed small-world network: ring lattice with random rewiring.

    Each node starts with directed edges to its d nearest neighbours on each
    side.  Every edge is independently rewired with probability p: the tail
    is kept and a new head is chosen uniformly among the other n - 1 nodes.
    Parallel edges collapse to a single unit weight.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if not 1 <= d <= (n - 1) // 2:
        raise ValueError(f"need 1 <= d <= (n-1)//2 = {(n - 1) // 2}, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"need 0 <= p <= 1, got {p}")
    gen, seed = _as_rng(rng)
    offsets = np.concatenate([np.arange(1, d + 1), -np.arange(1, d + 1)])
    tails = np.repeat(np.arange(n), offsets.size)
    heads = (np.arange(n)[:, None] + offsets[None, :]).ravel() % n
    rewire = gen.random(tails.size) < p
    new_heads = gen.integers(0, n - 1, size=tails.size)
    new_heads = np.where(new_heads >= tails, new_heads + 1, new_heads)
    heads = np.where(rewire, new_heads, heads)
    mat = np.zeros((n, n))
    mat[heads, tails] = 1.0  # edge tail -> head contributes G[head, tail]
    return make_network(mat, {"generator": "small_world",
                              "params": {"n": n, "d": int(d), "p": p}, "seed": seed})


def gen_star_erased(n: int, p: float, rng) -> Network:
    """Star network with hub node 0; each of the 2(n-1) edges erased w.p. p."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"need 0 <= p <= 1, got {p}")
    gen, seed = _as_rng(rng)
    mat = np.zeros((n, n))
    mat[0, 1:] = 1.0
    mat[1:, 0] = 1.0
    erase = gen.random(2 * (n - 1)) < p
    mat[0, 1:][erase[: n - 1]] = 0.0
    row = mat[1:, 0]
    row[erase[n - 1:]] = 0.0
    mat[1:, 0] = row
    return make_network(mat, {"generator": "star_erased",
                              "params": {"n": n, "p": p}, "seed": seed})


GENERATORS = {
    "complete_errors": gen_complete_errors,
    "influential": gen_influential,
    "random_signs": gen_random_signs,
    "erdos_renyi": gen_erdos_renyi,
    "small_world": gen_small_world,
    "star_erased": gen_star_erased,
}


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def asymmetry_inf_norm(net) -> float:
    """Infinity norm of G - G^T: max over rows of the absolute row sum."""
    w = _weights(net)
    return float(np.abs(w - w.T).sum(axis=1).max()) if w.size else 0.0


def inf_norm(net) -> float:
    """Maximum absolute row sum of G."""
    w = _weights(net)
    return float(np.abs(w).sum(axis=1).max()) if w.size else 0.0


def spectral_norm(net, rel_tol: float = 1e-10, max_iters: int = 100_000) -> float:
    """Largest singular value of G by power iteration on G^T G.

    Starts from the normalized all-ones vector; if the iteration lands on an
    exact null vector it restarts once from a vector orthogonal to the start.
    Raises NumericFailure (with the best estimate attached) if the Rayleigh
    quotient has not stabilized to ``rel_tol`` within ``max_iters``.
    """
    g = _weights(net)
    n = g.shape[0]
    if n == 0 or not np.any(g):
        return 0.0
    v = np.full(n, 1.0 / math.sqrt(n))
    lam = 0.0
    restarted = False
    for _ in range(max_iters):
        w = g.T @ (g @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            if restarted or n < 2:
                return 0.0
            v = np.zeros(n)
            v[0] = 1.0 / math.sqrt(2.0)
            v[1] = -v[0]
            lam = 0.0
            restarted = True
            continue
        lam_new = float(v @ w)  # Rayleigh quotient of G^T G at the unit vector v
        v = w / norm_w
        if lam_new > 0.0 and abs(lam_new - lam) <= rel_tol * lam_new:
            return math.sqrt(lam_new)
        lam = lam_new
    raise NumericFailure("power iteration did not converge",
                         estimate=math.sqrt(max(lam, 0.0)))


def network_metrics(net) -> NetworkMetrics:
    return NetworkMetrics(asym_inf=asymmetry_inf_norm(net),
                          norm2=spectral_norm(net),
                          norm_inf=inf_norm(net))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def save_network(net: Network, path) -> None:
    """Write a network as JSON; weights round-trip bit-exactly."""
    payload = {"n": net.n,
               "weights": [[float(x) for x in row] for row in net.weights],
               "provenance": net.provenance}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def _validate_rows(rows) -> np.ndarray:
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise FormatError(f"row {i} has {len(row)} entries, expected {n}")
    mat = np.asarray(rows, dtype=np.float64)
    for i in range(n):
        if not np.all(np.isfinite(mat[i])):
            raise FormatError(f"row {i} contains a non-finite entry")
        if mat[i, i] != 0.0:
            raise FormatError(f"nonzero diagonal at row {i}")
    return mat


def load_network(path) -> Network:
    """Load a network from JSON (the save format) or dense CSV.

    A ``.csv`` path is parsed as n rows of n comma-separated floats.
    """
    path = str(path)
    if path.endswith(".csv"):
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append([float(tok) for tok in line.split(",")])
                except ValueError as exc:
                    raise FormatError(f"row {len(rows)}: {exc}") from exc
        if not rows:
            raise FormatError("empty CSV network file")
        mat = _validate_rows(rows)
        return make_network(mat, provenance=None)
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "weights" not in payload:
        raise FormatError("expected a JSON object with a 'weights' field")
    weights = payload["weights"]
    if not isinstance(weights, list) or not all(isinstance(r, list) for r in weights):
        raise FormatError("'weights' must be a list of rows")
    mat = _validate_rows(weights)
    if "n" in payload and payload["n"] != mat.shape[0]:
        raise FormatError(f"declared n={payload['n']} but weights are {mat.shape[0]}x{mat.shape[1]}")
    return make_network(mat, provenance=payload.get("provenance"))
