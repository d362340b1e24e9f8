"""Command-line interface.

Subcommand groups: ``game`` (utility / equilibrium-gap probes), ``potential``
(mismatch report), ``welfare`` (suboptimality report), ``dynamics`` (run a
learning algorithm), ``bench`` (experiment batches).

Exit codes: 0 success / certified termination; 1 error; 2 a dynamics run hit
max_iters; 3 a bench invariant failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench, dynamics, game, potential, welfare
from .errors import FormatError, NumericFailure, PreconditionError


def _parse_actions(spec: str, g) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in spec.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"bad action list: {exc}") from exc
    if values.size != g.n:
        raise FormatError(f"expected {g.n} actions, got {values.size}")
    return values


def _profile_from_args(args, g):
    if args.actions is not None:
        return _parse_actions(args.actions, g)
    return game.uniform_profile(g, args.seed)


def _emit(payload) -> None:
    json.dump(payload, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")


def _cmd_game_eval(args) -> int:
    g = game.load_game(args.game)
    a = _profile_from_args(args, g)
    utilities = [game.utility(g, i, a) for i in range(g.n)]
    payload = {"actions": list(a), "utilities": utilities,
               "social_welfare": game.social_welfare(g, a)}
    if args.player is not None:
        payload["player"] = args.player
        payload["utility"] = utilities[args.player]
    _emit(payload)
    return 0


def _cmd_game_brgap(args) -> int:
    g = game.load_game(args.game)
    a = _profile_from_args(args, g)
    eps, per = game.ne_gap(g, a)
    _emit({"actions": list(a), "ne_gap": eps, "per_player": list(per),
           "best_responses": list(game.best_response_profile(g, a))})
    return 0


def _cmd_potential_report(args) -> int:
    g = game.load_game(args.game)
    alpha = potential.alpha_lq(g)
    report = potential.check_alpha_potential(g, None, alpha, rng=args.seed,
                                             count=args.samples)
    gap = potential.check_derivative_relation(g, None, rng=args.seed,
                                              count=min(args.samples, 10_000))
    _emit({
        "alpha_lq": report.alpha_lq,
        "alpha_general": report.alpha_general,
        "empirical_violation": report.empirical_violation,
        "samples": report.samples,
        "passed": report.passed,
        "derivative_gap": gap,
        "derivative_bound": alpha / g.a_delta,
        "L": potential.smoothness_L(g),
    })
    return 0


def _cmd_welfare_report(args) -> int:
    g = game.load_game(args.game)
    report = welfare.welfare_ratio(g)
    _emit({
        "a_opt": list(report.a_opt),
        "a_alpha": list(report.a_alpha),
        "sw_opt": report.sw_opt,
        "sw_alpha": report.sw_alpha,
        "ratio": report.ratio,
        "lam_min": report.lam_min,
        "lam_max": report.lam_max,
        "pos_lambda": report.pos_lambda,
        "pos_G": report.pos_G,
        "pos_gamma": report.pos_gamma,
    })
    return 0


_ALGO_RUNNERS = {
    "br": dynamics.run_sequential_br,
    "gp": dynamics.run_gradient_play,
    "exact-br": dynamics.run_exact_br,
    "exact-gp": dynamics.run_exact_gp,
    "phi-gp": dynamics.run_phi_gradient,
}


def _cmd_dynamics_run(args) -> int:
    g = game.load_game(args.game)
    alpha = potential.alpha_lq(g) if args.alpha == "auto" else float(args.alpha)
    if args.eta == "auto":
        if args.algo == "gp":
            etas = dynamics.step_bound(g, alpha).eta_bar_max
        elif args.algo in ("exact-gp", "phi-gp"):
            etas = 1.0 / potential.smoothness_L(g)
        else:
            etas = None
    else:
        etas = float(args.eta)
    cfg = dynamics.LearnerConfig(alpha=alpha, eps=args.eps, etas=etas,
                                 max_iters=args.max_iters,
                                 selection=args.selection, seed=args.seed,
                                 record_every=args.record_every)
    a0 = _parse_actions(args.a0, g) if args.a0 else game.uniform_profile(g, args.seed)
    trace = _ALGO_RUNNERS[args.algo](g, cfg, a0=a0)
    if args.trace:
        dynamics.write_trace_csv(trace, g, args.trace)
    _emit({
        "algo": args.algo,
        "alpha": alpha,
        "eta": etas,
        "iters": trace.iters,
        "terminated_by": trace.terminated_by,
        "ne_gap_final": trace.ne_gap_final,
        "certified": trace.certified,
        "converged_at": trace.converged_at if trace.converged else None,
        "phi_final": float(trace.phi_per_step[-1]),
    })
    return 0 if trace.terminated_by != "max_iters" else 2


def _cmd_bench_run(args) -> int:
    overrides = {"experiment": args.experiment, "out_dir": args.out,
                 "jobs": args.jobs, "base_seed": args.seed}
    if args.config:
        cfg = bench.config_from_json(args.config, **overrides)
    else:
        cfg = bench.ExperimentConfig(**{k: v for k, v in overrides.items()
                                        if v is not None})
    out = bench.run_experiment(cfg)
    _emit(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netgames")
    sub = parser.add_subparsers(dest="group", required=True)

    p_game = sub.add_parser("game", help="utility and equilibrium-gap probes")
    game_sub = p_game.add_subparsers(dest="cmd", required=True)
    for name, fn in [("eval", _cmd_game_eval), ("brgap", _cmd_game_brgap)]:
        p = game_sub.add_parser(name)
        p.add_argument("--game", required=True)
        p.add_argument("--actions", help="comma-separated action profile")
        p.add_argument("--player", type=int)
        p.add_argument("--seed", type=int, default=0,
                       help="seed for a uniform random profile when --actions is absent")
        p.set_defaults(fn=fn)

    p_pot = sub.add_parser("potential", help="mismatch-level report")
    pot_sub = p_pot.add_subparsers(dest="cmd", required=True)
    p = pot_sub.add_parser("report")
    p.add_argument("game")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_potential_report)

    p_wel = sub.add_parser("welfare", help="welfare suboptimality report")
    wel_sub = p_wel.add_subparsers(dest="cmd", required=True)
    p = wel_sub.add_parser("report")
    p.add_argument("game")
    p.set_defaults(fn=_cmd_welfare_report)

    p_dyn = sub.add_parser("dynamics", help="run a learning algorithm")
    dyn_sub = p_dyn.add_subparsers(dest="cmd", required=True)
    p = dyn_sub.add_parser("run")
    p.add_argument("--game", required=True)
    p.add_argument("--algo", required=True, choices=sorted(_ALGO_RUNNERS))
    p.add_argument("--alpha", default="auto")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--eta", default="auto")
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--selection", default="cyclic",
                   choices=["cyclic", "random", "round_robin"])
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--a0", help="comma-separated initial profile")
    p.add_argument("--trace", help="write the recorded trace as CSV")
    p.set_defaults(fn=_cmd_dynamics_run)

    p_bench = sub.add_parser("bench", help="experiment batches")
    bench_sub = p_bench.add_subparsers(dest="cmd", required=True)
    p = bench_sub.add_parser("run")
    p.add_argument("--experiment", required=True, choices=bench.EXPERIMENTS)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=_cmd_bench_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except bench.InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 3
    except (bench.ConfigError, FormatError, PreconditionError, NumericFailure,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
