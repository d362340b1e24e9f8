"""Learning dynamics with mismatch-aware stopping gates.

Four algorithms over LQ games: sequential best response gated on utility
improvement, simultaneous gradient play gated on gradient magnitude, their
exact (ungated) variants, and projected gradient ascent on the quadratic
potential.  Runs produce a RunTrace with per-step potential values,
termination cause and the final equilibrium gap.

Iteration counting follows the algorithms: one loop pass is one iteration,
whether or not anybody moved.  ``first_converged`` additionally records the
first iteration at which the relative step criterion
|a_next - a_prev| <= 1e-8 + 1e-5 |a_prev| held for all players.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, potential
from .game import LQGame, ne_gap, uniform_profile

_TERM_NAMES = {
    _kernels.TERM_GATE_SILENT: "gate_silent",
    _kernels.TERM_MAX_ITERS: "max_iters",
    _kernels.TERM_CONVERGED: "numeric_convergence",
}

CERT_TOL = 1e-12


@dataclass
class LearnerConfig:
    """Parameters shared by the learning algorithms.

    alpha is the gate level, eps the improvement slack of the sequential
    algorithm, etas the per-player gradient steps (scalar broadcasts; None
    selects the certified step from step_bound where one exists).
    selection picks which eligible player moves in the sequential loop.
    """
    alpha: float = 0.0
    eps: float = 0.0
    etas: float | np.ndarray | None = None
    max_iters: int = 10_000
    selection: str = "cyclic"  # or "random" / "round_robin"
    seed: int = 0              # drives random selection only
    record_every: int | None = None
    stop_on_converged: bool = True  # exact variants: halt at the step criterion


@dataclass
class RunTrace:
    iterates: np.ndarray       # thinned profiles, shape (k_rec, n)
    recorded_at: np.ndarray    # iteration index of each recorded profile
    phi_values: np.ndarray     # potential at each recorded profile
    phi_per_step: np.ndarray   # potential at every iteration 0..iters
    final: np.ndarray
    iters: int
    terminated_by: str         # gate_silent | max_iters | numeric_convergence
    ne_gap_final: float
    certified: bool
    first_converged: int       # -1 if the step criterion never held
    last_violation: int        # last iteration whose step broke the criterion
    min_update_phi_gain: float
    max_phi_drop: float

    @property
    def converged_at(self) -> int:
        """First iteration from which the step criterion held to the end."""
        return self.last_violation + 1

    @property
    def converged(self) -> bool:
        if self.terminated_by != "max_iters":
            return True
        return self.last_violation + 1 < self.iters


@dataclass(frozen=True)
class StepBoundReport:
    L: float
    D: float
    xi1: float
    xi2: float
    eta_bar_max: float


def converged(a_prev, a_next) -> bool:
    """Relative step criterion: |a_next - a_prev| <= 1e-8 + 1e-5 |a_prev|."""
    a_prev = np.asarray(a_prev, dtype=np.float64)
    a_next = np.asarray(a_next, dtype=np.float64)
    if a_prev.shape != a_next.shape:
        raise ValueError("profiles must have the same shape")
    return bool(np.all(np.abs(a_next - a_prev) <= 1e-8 + 1e-5 * np.abs(a_prev)))


def step_bound(g: LQGame, alpha: float) -> StepBoundReport:
    """Certified step-size ceiling for gated gradient play."""
    if alpha <= 0.0:
        raise ValueError("the certified step bound needs alpha > 0")
    L = potential.smoothness_L(g)
    D = g.grad_bound
    xi1 = 1.0 / g.a_delta
    xi2 = min(2.0 * xi1 / L, 1.0 / D)
    eta_bar = min(1.0 / L,
                  2.0 * xi1 ** 2 * alpha ** 2 / (L * D ** 2),
                  L * xi2 ** 2 * alpha ** 2
                  / (2.0 * (xi1 * alpha * D + xi1 ** 2 * alpha ** 2)))
    return StepBoundReport(L=L, D=D, xi1=xi1, xi2=xi2, eta_bar_max=eta_bar)


def iteration_bound(g: LQGame, eps: float) -> int:
    """Sound cap on updating steps of the gated sequential loop.

    Uses the interval-arithmetic upper bound on max |phi|, so the cap
    over-estimates the true ceil(2 max|phi| / eps).
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    return int(math.ceil(2.0 * potential.phi_abs_bound(g) / eps))


def _record_every(g: LQGame, cfg: LearnerConfig) -> int:
    if cfg.record_every is not None:
        return max(int(cfg.record_every), 1)
    return 1 if g.n <= 100 else 10


def _etas_array(g: LQGame, etas) -> np.ndarray:
    arr = np.asarray(etas, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(g.n, float(arr))
    if arr.shape != (g.n,):
        raise ValueError(f"etas must be scalar or length {g.n}")
    if np.any(arr <= 0.0):
        raise ValueError("step sizes must be positive")
    return arr


def _wrap(g, kernel_out, certified) -> RunTrace:
    (a, iters, term, rec_idx, rec_profiles, phi_step,
     first_conv, min_gain, max_drop, last_violation) = kernel_out
    gap, _ = ne_gap(g, a)
    return RunTrace(iterates=rec_profiles, recorded_at=rec_idx,
                    phi_values=phi_step[rec_idx],
                    phi_per_step=phi_step, final=a, iters=int(iters),
                    terminated_by=_TERM_NAMES[int(term)],
                    ne_gap_final=float(gap),
                    certified=certified(int(term)),
                    first_converged=int(first_conv),
                    last_violation=int(last_violation),
                    min_update_phi_gain=float(min_gain),
                    max_phi_drop=float(max_drop))


def _prepare(g, cfg, a0, rng):
    if a0 is None:
        a0 = uniform_profile(g, rng if rng is not None else 0)
    a0 = np.ascontiguousarray(a0, dtype=np.float64)
    if a0.shape != (g.n,):
        raise ValueError(f"initial profile must have shape ({g.n},)")
    if np.any(a0 < g.lo) or np.any(a0 > g.hi):
        raise ValueError("initial profile violates action bounds")
    return a0


_SELECTION_MODES = {"cyclic": 0, "random": 1, "round_robin": 2}


def _selection_args(g, cfg):
    try:
        mode = _SELECTION_MODES[cfg.selection]
    except KeyError:
        raise ValueError(f"unknown selection rule {cfg.selection!r}") from None
    if mode == 1:
        gen = np.random.default_rng(cfg.seed)
        return mode, gen.random(cfg.max_iters)
    return mode, np.empty(0)


def run_sequential_br(g: LQGame, cfg: LearnerConfig, a0=None, rng=None) -> RunTrace:
    """Sequential best response gated on improvement > alpha + eps.

    With cyclic selection one eligible player per iteration moves to the
    exact best response; under "random" a uniformly random player wakes up
    each iteration, under "round_robin" player k mod n does, moving only if
    eligible (an ineligible wake-up consumes an iteration).  Terminates
    when nobody clears the gate.  With alpha at least the game's mismatch
    level, silence is guaranteed within iteration_bound updating steps and
    certifies an (alpha + eps) equilibrium.
    """
    if cfg.eps <= 0.0:
        raise ValueError("the gated sequential loop needs eps > 0")
    if cfg.alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    a0 = _prepare(g, cfg, a0, rng)
    sel_mode, rand_u = _selection_args(g, cfg)
    out = _kernels.run_br(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0,
                          cfg.alpha + cfg.eps, sel_mode, rand_u,
                          cfg.max_iters, _record_every(g, cfg), False)
    sound = cfg.alpha >= potential.alpha_lq(g) - CERT_TOL
    return _wrap(g, out, lambda term: term == _kernels.TERM_GATE_SILENT and sound)


def run_exact_br(g: LQGame, cfg: LearnerConfig, a0=None, rng=None) -> RunTrace:
    """Classical sequential best response (strict improvement, no gate).

    No convergence guarantee; terminates on the relative step criterion or
    max_iters.
    """
    a0 = _prepare(g, cfg, a0, rng)
    sel_mode, rand_u = _selection_args(g, cfg)
    out = _kernels.run_br(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0,
                          0.0, sel_mode, rand_u,
                          cfg.max_iters, _record_every(g, cfg),
                          cfg.stop_on_converged)
    return _wrap(g, out, lambda term: False)


def run_gradient_play(g: LQGame, cfg: LearnerConfig, a0=None, rng=None) -> RunTrace:
    """Simultaneous gradient play gated on |gradient| > 2 alpha / a_delta.

    All gradients are evaluated at the current profile before anyone moves.
    Terminates when a full iteration leaves the profile exactly unchanged
    (every player either below the gate or pinned at a boundary), which
    certifies a 2 alpha equilibrium.
    """
    if cfg.alpha <= 0.0:
        raise ValueError("gated gradient play needs alpha > 0; "
                         "use run_exact_gp for the ungated variant")
    bound = step_bound(g, cfg.alpha)
    etas = _etas_array(g, cfg.etas if cfg.etas is not None else bound.eta_bar_max)
    a0 = _prepare(g, cfg, a0, rng)
    gate = 2.0 * cfg.alpha / g.a_delta
    out = _kernels.run_gp(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0,
                          gate, etas, 0, 0.0, cfg.max_iters, _record_every(g, cfg))
    sound = (cfg.alpha >= potential.alpha_lq(g) - CERT_TOL
             and float(etas.max()) <= bound.eta_bar_max * (1.0 + 1e-12))
    return _wrap(g, out, lambda term: term == _kernels.TERM_GATE_SILENT and sound)


def run_exact_gp(g: LQGame, cfg: LearnerConfig, a0=None, rng=None) -> RunTrace:
    """Classical projected gradient play (every nonzero gradient fires).

    Terminates on the relative step criterion or max_iters; may not
    converge.
    """
    if cfg.etas is None:
        raise ValueError("exact gradient play needs explicit step sizes")
    etas = _etas_array(g, cfg.etas)
    a0 = _prepare(g, cfg, a0, rng)
    stop_mode = 1 if cfg.stop_on_converged else 0
    out = _kernels.run_gp(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0,
                          0.0, etas, stop_mode, 0.0,
                          cfg.max_iters, _record_every(g, cfg))
    return _wrap(g, out, lambda term: False)


def run_phi_gradient(g: LQGame, cfg: LearnerConfig, a0=None, rng=None) -> RunTrace:
    """Projected gradient ascent on the quadratic potential.

    Every player follows the potential gradient (no gate).  Stops when the
    step infinity norm falls to 1e-12; under the contraction assumption
    with eta <= 1/L this converges to the potential maximizer.
    """
    if cfg.etas is None:
        etas = _etas_array(g, 1.0 / potential.smoothness_L(g))
    else:
        etas = _etas_array(g, cfg.etas)
    a0 = _prepare(g, cfg, a0, rng)
    out = _kernels.run_gp(g.msym, g.msym, g.beta, g.lo, g.hi, a0,
                          -1.0, etas, 2, 1e-12, cfg.max_iters, _record_every(g, cfg))
    return _wrap(g, out, lambda term: False)


def write_trace_csv(trace: RunTrace, g: LQGame, path) -> None:
    """Trace file: iter, phi, ne_gap, a_1..a_N at each recorded iterate."""
    with open(path, "w", encoding="utf-8") as fh:
        names = ",".join(f"a_{i + 1}" for i in range(g.n))
        fh.write(f"iter,phi,ne_gap,{names}\n")
        for k, idx in enumerate(trace.recorded_at):
            profile = trace.iterates[k]
            gap, _ = ne_gap(g, profile)
            row = ",".join(repr(float(x)) for x in profile)
            fh.write(f"{int(idx)},{trace.phi_values[k]!r},{gap!r},{row}\n")
