"""Command-line surface.

Subcommands: theory, simulate, fixation, sweep, oracle, stationary.
Exit codes: 0 success, 1 usage, 2 configuration, 3 runtime failure.
Randomized commands take a seed from the config or --seed, otherwise one
is synthesized and printed so the run can be replayed.
"""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from pathlib import Path

from . import theory
from .config import ConfigError, RunConfig, parse_config
from .dynamics import SelectionParams
from .engine import CompleteInit
from .experiments import (
    SweepSpec,
    estimate_fixation,
    run_sweep,
    stationary_statistics,
    trajectory_series,
)
from .io import (
    EdgeListError,
    FIXATION_SCHEMA,
    SERIES_SCHEMA,
    STATIONARY_SCHEMA,
    emit_csv,
    fixation_row,
    load_edge_list,
)
from .oracle import solve_degree_chain, solve_size_chain, drift_fixation_exact, default_n_max


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="bdnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config,
                       help="config file path or inline JSON object")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--output", help="override the config output path")
        p.add_argument("--replicates", type=int,
                       help="override the config replicate count")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for replicate batches")
        p.add_argument("--plot", action="store_true",
                       help="also render a PNG figure next to the output")

    common(sub.add_parser("theory", help="closed-form quantities for a config"))
    common(sub.add_parser("simulate", help="one trajectory, thinned to CSV"))
    common(sub.add_parser("fixation", help="Monte Carlo fixation estimate"))
    p_sweep = sub.add_parser("sweep", help="fixation estimates over a grid")
    common(p_sweep)
    p_sweep.add_argument(
        "--axis", action="append", default=[], metavar="NAME=V1,V2,...",
        help="swept axis (repeatable); e.g. --axis lambda=2,3,4,5",
    )
    common(sub.add_parser("oracle", help="exact chain solutions as JSON"))
    common(sub.add_parser("stationary", help="stationary histograms to CSV"))
    return parser


def _resolve_seed(cfg: RunConfig, args) -> int:
    if args.seed is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed} (synthesized; pass --seed to replay)")
    return seed


def _resolve_output(cfg: RunConfig, args, default: str) -> Path:
    if args.output:
        return Path(args.output)
    if cfg.output_path:
        return Path(cfg.output_path)
    return Path(default)


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config)
    if args.replicates is not None:
        if args.replicates < 1:
            raise ConfigError("--replicates must be >= 1")
        from dataclasses import replace

        cfg = replace(cfg, replicates=args.replicates)
    return cfg


def _initial_size(cfg: RunConfig) -> int:
    if isinstance(cfg.initial, CompleteInit):
        return cfg.initial.n
    return load_edge_list(cfg.initial.path).graph.num_nodes


def _cmd_theory(args) -> int:
    cfg = _load_config(args)
    n0 = _initial_size(cfg)
    en = theory.expected_size(cfg.lam, cfg.mu)
    print(f"lambda={cfg.lam:g} mu={cfg.mu:g} m={cfg.m} mechanism={cfg.mechanism}")
    print(f"expected size            E[N] = {en:.10g}")
    print(f"expected degree (uniform) E[k] = {theory.expected_degree_uc(cfg.m):.10g}")
    mode_mass = theory.degree_pmf_uc(cfg.m, cfg.m)
    print(f"stationary degree pmf: Poisson({cfg.m}); P(k={cfg.m}) = {mode_mass:.6f}, "
          f"P(k=0) = {theory.degree_pmf_uc(cfg.m, 0):.6f}")
    p0, p1, p2 = (theory.return_probability(n, cfg.m) for n in (0, 1, 2))
    print(f"random-walk return probabilities: p(0)={p0:g} p(1)={p1:g} p(2)={p2:g}")
    try:
        bc = theory.critical_bc(cfg.lam, cfg.mu, cfg.m)
        note = " (extrapolated)" if cfg.mechanism == "preferential" else ""
        print(f"critical benefit-to-cost ratio = {bc:.10g}{note}")
    except theory.ThresholdUndefinedError as exc:
        print(f"critical benefit-to-cost ratio: {exc}")
    inv_en, inv_n0 = theory.neutral_baselines(cfg.lam, cfg.mu, n0)
    print(f"neutral baselines: 1/E[N] = {inv_en:.10g}, 1/N(0) = {inv_n0:.10g}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(cfg, args)
    rows = trajectory_series(cfg.to_sim_params(), cfg.t_max, cfg.sample_dt, seed)
    out = _resolve_output(cfg, args, "series.csv")
    emit_csv(rows, SERIES_SCHEMA, out)
    last = rows[-1]
    print(f"wrote {len(rows)} samples to {out} "
          f"(final t={last[0]:g}, N={last[1]}, count_first={last[2]})")
    if args.plot:
        from .plots import save_series_plot

        png = out.with_suffix(".png")
        expected_k = cfg.m if cfg.mechanism == "uniform" else None
        save_series_plot(rows, png,
                         expected_size=theory.expected_size(cfg.lam, cfg.mu),
                         expected_degree=expected_k)
        print(f"wrote figure {png}")
    return 0


def _cmd_fixation(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(cfg, args)
    params = cfg.to_sim_params()
    est = estimate_fixation(params, cfg.replicates, seed,
                            cfg.event_limit, jobs=args.jobs)
    out = _resolve_output(cfg, args, "fixation.csv")
    emit_csv([fixation_row(params, est)], FIXATION_SCHEMA, out)
    print(f"p_hat = {est.p_hat:.6f} +- {est.se:.6f} over {est.replicates} replicates "
          f"(pure_first={est.pure_first} pure_second={est.pure_second} "
          f"extinct={est.extinct} timeout={est.timeout}) seed={seed}")
    if est.fitness_clamps:
        print(f"fitness floor engaged {est.fitness_clamps} times")
    print(f"wrote {out}")
    if args.plot:
        from .plots import save_fixation_plot

        png = out.with_suffix(".png")
        save_fixation_plot(est, png)
        print(f"wrote figure {png}")
    return 0


def _parse_axes(specs: list[str]) -> dict[str, list]:
    axes: dict[str, list] = {}
    for spec in specs:
        name, eq, values = spec.partition("=")
        name = name.strip()
        if not eq or not values:
            raise ConfigError(f"--axis {spec!r}: expected NAME=V1,V2,...")
        if name in axes:
            raise ConfigError(f"--axis {name!r} given twice")
        parsed: list = []
        for tok in values.split(","):
            tok = tok.strip()
            if name == "mechanism":
                parsed.append(tok)
            else:
                try:
                    parsed.append(float(tok))
                except ValueError:
                    raise ConfigError(f"--axis {name!r}: bad number {tok!r}")
        axes[name] = parsed
    if not axes:
        raise ConfigError("sweep needs at least one --axis")
    return axes


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(cfg, args)
    axes = _parse_axes(args.axis)
    spec = SweepSpec(base=cfg.to_sim_params(), axes=axes,
                     replicates=cfg.replicates, master_seed=seed,
                     event_limit=cfg.event_limit)
    print(f"sweep over {spec.n_cells} cell(s) x {spec.replicates} replicates, "
          f"seed={seed}")

    def progress(done, total, cell, est):
        print(f"  [{done}/{total}] {cell} -> p_hat={est.p_hat:.4f} +- {est.se:.4f}")

    rows = run_sweep(spec, jobs=args.jobs, progress=progress)
    out = _resolve_output(cfg, args, "sweep.csv")
    emit_csv([fixation_row(r.params, r.estimate) for r in rows],
             FIXATION_SCHEMA, out)
    print(f"wrote {out}")
    if args.plot:
        from .plots import save_sweep_plot

        png = out.with_suffix(".png")
        threshold = None
        last_axis = list(axes)[-1]
        if last_axis == "b" and isinstance(spec.base.dynamics, SelectionParams):
            lams = {r.params.lam for r in rows}
            ms = {r.params.m for r in rows}
            if len(lams) == 1 and len(ms) == 1:
                try:
                    threshold = theory.critical_bc(lams.pop(), cfg.mu, ms.pop())
                except theory.ThresholdUndefinedError:
                    threshold = None
        save_sweep_plot(rows, axes, png, threshold=threshold,
                        baseline=cfg.mu / cfg.lam)
        print(f"wrote figure {png}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _load_config(args)
    if cfg.mechanism == "preferential":
        raise ConfigError(
            "oracle: preferential attachment is unsupported (degree-weighted "
            "attachment makes the count pair non-Markov); use mechanism=uniform"
        )
    if cfg.dynamics == "selection":
        raise ConfigError(
            "oracle: exact fixation is only available for drift dynamics"
        )
    n_max = default_n_max(cfg.lam, cfg.mu)
    size_pmf = solve_size_chain(cfg.lam, cfg.mu, n_max)
    k_max = math.ceil(cfg.m + 12.0 * math.sqrt(cfg.m))
    degree_pmf = solve_degree_chain(cfg.lam, cfg.mu, cfg.m, k_max)
    result = {
        "size_chain": {
            "n_max": n_max,
            "mean": float(sum(i * p for i, p in enumerate(size_pmf))),
            "pmf": [float(p) for p in size_pmf],
        },
        "degree_chain": {
            "k_max": k_max,
            "mean": float(sum(i * p for i, p in enumerate(degree_pmf))),
            "pmf": [float(p) for p in degree_pmf],
        },
    }
    if cfg.dynamics == "drift":
        n0 = _initial_size(cfg)
        value = drift_fixation_exact(
            cfg.lam, cfg.mu, cfg.m, cfg.alpha, n0, cfg.initial_invaders,
            n_max=max(n_max, n0),
        )
        result["drift_fixation"] = {
            "alpha": cfg.alpha, "n0": n0, "a0": cfg.initial_invaders,
            "n_max": max(n_max, n0), "probability": value,
        }
    text = json.dumps(result, indent=2)
    if args.output or cfg.output_path:
        out = _resolve_output(cfg, args, "oracle.json")
        out.write_text(text + "\n", encoding="utf-8")
        print(f"wrote {out}")
    else:
        print(text)
    return 0


def _cmd_stationary(args) -> int:
    cfg = _load_config(args)
    seed = _resolve_seed(cfg, args)
    stats = stationary_statistics(cfg.to_sim_params(), cfg.burn_in,
                                  cfg.t_max, seed, cfg.sample_dt)
    rows = [("size", value, count)
            for value, count in sorted(stats.size_histogram.items())]
    rows += [("degree", value, count)
             for value, count in sorted(stats.degree_histogram.items())]
    out = _resolve_output(cfg, args, "stationary.csv")
    emit_csv(rows, STATIONARY_SCHEMA, out)
    print(f"samples={stats.samples} mean_size={stats.mean_size:.4f} "
          f"mean_degree={stats.mean_degree:.4f}")
    print(f"wrote {out}")
    if args.plot:
        from .plots import save_stationary_plot

        png = out.with_suffix(".png")
        save_stationary_plot(stats, cfg.lam, cfg.mu, cfg.m, cfg.mechanism, png)
        print(f"wrote figure {png}")
    return 0


_COMMANDS = {
    "theory": _cmd_theory,
    "simulate": _cmd_simulate,
    "fixation": _cmd_fixation,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "stationary": _cmd_stationary,
}


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, EdgeListError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse -h/--help
        code = exc.code
        return code if isinstance(code, int) else 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
