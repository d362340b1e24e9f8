"""Social welfare analysis under the contraction assumption.

Closed-form maximizers of total welfare and of the quadratic potential,
eigenvalue-based suboptimality bounds for recommending the potential
maximizer, and the dense linear algebra supporting them (Gaussian
elimination with partial pivoting, cyclic Jacobi eigensolver).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import jacobi_spectrum
from .errors import NumericFailure, PreconditionError
from .game import LQGame, social_welfare

RESIDUAL_TOL = 1e-9
CHAIN_SLACK = 1e-9


@dataclass(frozen=True)
class ContractionCheck:
    holds: bool
    gamma_ok: bool
    entries_ok: bool
    a_tilde: float | None
    beta_ok: bool


@dataclass(frozen=True)
class WelfareReport:
    a_opt: np.ndarray
    a_alpha: np.ndarray
    sw_opt: float
    sw_alpha: float
    ratio: float
    lam_min: float
    lam_max: float
    pos_lambda: float
    pos_G: float
    pos_gamma: float


def gauss_solve(a, b) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = b.size
    if a.shape != (n, n):
        raise ValueError(f"matrix shape {a.shape} does not match rhs length {n}")
    for k in range(n - 1):
        piv = int(np.argmax(np.abs(a[k:, k]))) + k
        if a[piv, k] == 0.0:
            raise NumericFailure("singular matrix in Gaussian elimination")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]
    if a[n - 1, n - 1] == 0.0:
        raise NumericFailure("singular matrix in Gaussian elimination")
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def check_contraction(g: LQGame) -> ContractionCheck:
    """Verify the contraction assumption: |gamma| < 1/2, |G_ij| <= 1/N,
    symmetric slack [-a~, a~] inside every action set, biases small."""
    gamma_ok = abs(g.gamma) < 0.5
    entries_ok = bool(np.all(np.abs(g.net.weights) <= 1.0 / g.n + 1e-15))
    if np.all(g.lo <= 0.0) and np.all(g.hi >= 0.0):
        a_tilde = float(np.minimum(-g.lo, g.hi).min())
    else:
        a_tilde = None
    beta_ok = (a_tilde is not None
               and float(np.abs(g.beta).max()) <= (1.0 - 2.0 * abs(g.gamma)) * a_tilde + 1e-15)
    return ContractionCheck(holds=bool(gamma_ok and entries_ok and a_tilde is not None and beta_ok),
                            gamma_ok=bool(gamma_ok), entries_ok=entries_ok,
                            a_tilde=a_tilde, beta_ok=bool(beta_ok))


def _require_contraction(g: LQGame) -> None:
    check = check_contraction(g)
    if not check.holds:
        raise PreconditionError(f"contraction assumption fails: {check}")


def _solve_and_verify(g: LQGame, mat: np.ndarray, what: str) -> np.ndarray:
    x = gauss_solve(mat, g.beta)
    residual = float(np.abs(mat @ x - g.beta).max())
    if residual > RESIDUAL_TOL * (1.0 + float(np.abs(g.beta).max(initial=0.0))):
        raise NumericFailure(f"{what}: residual {residual:.3e} too large", estimate=x)
    outside = float(np.maximum(g.lo - x, x - g.hi).max())
    if outside > RESIDUAL_TOL:
        raise NumericFailure(f"{what}: solution leaves the action box by {outside:.3e}",
                             estimate=x)
    return np.clip(x, g.lo, g.hi)


def social_optimum(g: LQGame) -> np.ndarray:
    """Unique welfare maximizer (I - gamma (G + G^T))^-1 beta.

    Requires the contraction assumption, which makes welfare strongly
    concave and places the solution inside the action box.
    """
    _require_contraction(g)
    mat = np.eye(g.n) - 2.0 * g.msym
    return _solve_and_verify(g, mat, "social optimum")


def phi_maximizer(g: LQGame) -> np.ndarray:
    """Unique potential maximizer (I - (gamma/2)(G + G^T))^-1 beta."""
    _require_contraction(g)
    mat = np.eye(g.n) - g.msym
    x = _solve_and_verify(g, mat, "potential maximizer")
    grad = -x + g.beta + g.msym @ x
    if float(np.abs(grad).max()) > 1e-8:
        raise NumericFailure("potential maximizer: gradient not stationary", estimate=x)
    return x


def sym_eigs(mat):
    """Full spectrum of a symmetric matrix via cyclic Jacobi rotations.

    Returns (lam_min, lam_max, sorted spectrum).
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {mat.shape}")
    if mat.size and float(np.abs(mat - mat.T).max()) > 1e-12:
        raise PreconditionError("matrix is not symmetric to 1e-12")
    spectrum = jacobi_spectrum(mat)
    return float(spectrum[0]), float(spectrum[-1]), spectrum


def pos_bounds(g: LQGame):
    """The three suboptimality bounds, sharpest to coarsest.

    pos_lambda uses the eigenvalues of gamma (G + G^T), pos_G only the
    entries of G, pos_gamma only gamma.
    """
    _require_contraction(g)
    lam_min, lam_max, _ = sym_eigs(2.0 * g.msym)
    pos_lambda = ((1.0 - lam_min) * (1.0 - lam_min / 2.0) ** 2
                  / (1.0 - lam_max) ** 2)
    absw = np.abs(g.net.weights)
    m = float((absw.sum(axis=1) + absw.sum(axis=0)).max())
    gm = abs(g.gamma) * m
    pos_G = (1.0 + gm) ** 3 / (1.0 - gm) ** 2
    tg = 2.0 * abs(g.gamma)
    pos_gamma = (1.0 + tg) ** 3 / (1.0 - tg) ** 2
    return pos_lambda, pos_G, pos_gamma


def welfare_ratio(g: LQGame) -> WelfareReport:
    """Assemble optimizers, welfare values, the realized ratio and its bounds.

    Raises NumericFailure if the potential maximizer has non-positive
    welfare (impossible under the contraction assumption with nonzero
    biases; indicates a precondition bug upstream).
    """
    _require_contraction(g)
    a_opt = social_optimum(g)
    a_alpha = phi_maximizer(g)
    sw_opt = social_welfare(g, a_opt)
    sw_alpha = social_welfare(g, a_alpha)
    if sw_alpha <= 0.0:
        raise NumericFailure(f"welfare of the potential maximizer is {sw_alpha:.3e}, "
                             "expected > 0 under the contraction assumption")
    ratio = sw_opt / sw_alpha
    lam_min, lam_max, _ = sym_eigs(2.0 * g.msym)
    pos_lambda, pos_G, pos_gamma = pos_bounds(g)
    chain = (1.0 - CHAIN_SLACK <= ratio
             and ratio <= pos_lambda + CHAIN_SLACK
             and pos_lambda <= pos_G + CHAIN_SLACK
             and pos_G <= pos_gamma + CHAIN_SLACK)
    if not chain:
        raise NumericFailure(
            f"suboptimality chain violated: ratio={ratio!r}, "
            f"bounds=({pos_lambda!r}, {pos_G!r}, {pos_gamma!r})")
    return WelfareReport(a_opt=a_opt, a_alpha=a_alpha, sw_opt=sw_opt,
                         sw_alpha=sw_alpha, ratio=ratio,
                         lam_min=lam_min, lam_max=lam_max,
                         pos_lambda=pos_lambda, pos_G=pos_G, pos_gamma=pos_gamma)
