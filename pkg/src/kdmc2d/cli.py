"""Command-line entry point.

Subcommands: run, sweep kinetic, sweep diffusive, compare. All randomness
flows from --seed (or the config); there is no wall-clock seeding. Exit
codes: 0 success, 1 runtime failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, build_run_config, parse_config_file, \
    _DEFAULTS
from .harness import DIFFUSIVE_SWEEP_EPS, KINETIC_SWEEP_DT, estimate_order, \
    run_simulation_detailed, sweep_diffusive_limit, sweep_kinetic_limit, \
    write_convergence_csv, write_profiles_csv, write_runtime_csv
from .tally import l2_diff, folded_profile, pointwise_diff, read_histogram, \
    write_histogram, write_profile


def _add_common(p):
    p.add_argument("--config", type=Path, help="run configuration file")
    p.add_argument("--out", type=Path, default=Path("."),
                   help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="override the RNG seed")
    p.add_argument("--threads", type=int, help="override the worker count")
    p.add_argument("--particles", type=int,
                   help="override the particle count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdmc2d",
        description="2D neutral-particle Monte Carlo transport: fully "
                    "kinetic and kinetic-diffusion (KDMC) simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation run")
    _add_common(p_run)
    p_run.add_argument("--mode", choices=["kinetic", "kdmc"],
                       help="override the simulation mode")

    p_sweep = sub.add_parser("sweep", help="convergence/runtime sweep")
    p_sweep.add_argument("kind", choices=["kinetic", "diffusive"])
    _add_common(p_sweep)

    p_cmp = sub.add_parser("compare",
                           help="pointwise difference of two histogram files")
    p_cmp.add_argument("hist_a", type=Path, help="kinetic histogram file")
    p_cmp.add_argument("hist_b", type=Path, help="KDMC histogram file")
    p_cmp.add_argument("--out", type=Path, default=Path("."))
    return parser


def _load_config(args):
    if args.config is not None:
        values = parse_config_file(args.config)
    else:
        values = {sec: dict(d) for sec, d in _DEFAULTS.items()}
    overrides = {}
    if args.seed is not None:
        overrides[("simulation", "seed")] = args.seed
    if args.threads is not None:
        overrides[("simulation", "workers")] = args.threads
    if args.particles is not None:
        overrides[("simulation", "particles")] = args.particles
    if getattr(args, "mode", None) is not None:
        overrides[("simulation", "mode")] = args.mode
    return build_run_config(values, overrides)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    res = run_simulation_detailed(cfg)
    hist_path = args.out / "histogram.csv"
    write_histogram(hist_path, res.histogram)
    summary = args.out / "summary.txt"
    with open(summary, "w") as f:
        f.write(f"mode: {cfg.mode}\n"
                f"particles: {cfg.particles}\n"
                f"seed: {cfg.seed}\n"
                f"workers: {cfg.workers}\n"
                f"absorbed_fraction: {res.histogram.absorbed_fraction:.17g}\n"
                f"collisions: {res.collisions}\n"
                f"wall_time_s: {res.wall_time:.6f}\n")
    print(f"wrote {hist_path} and {summary} "
          f"({cfg.particles} particles, "
          f"absorbed fraction {res.histogram.absorbed_fraction:.4g}, "
          f"{res.wall_time:.3f} s)")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.kind == "kinetic":
        rows = sweep_kinetic_limit(cfg, KINETIC_SWEEP_DT)
        write_convergence_csv(args.out / "kinetic_convergence.csv", rows,
                              "delta_t")
        write_runtime_csv(args.out / "kinetic_runtime.csv", rows, "delta_t")
        coarse = rows[:3]
        order = estimate_order([r.parameter for r in coarse],
                               [r.error for r in coarse])
        print(f"kinetic-limit sweep: fitted order over the three coarsest "
              f"delta_t = {order:.3f}")
    else:
        rows, profiles = sweep_diffusive_limit(cfg, DIFFUSIVE_SWEEP_EPS)
        write_convergence_csv(args.out / "diffusive_convergence.csv", rows,
                              "Rcx")
        write_runtime_csv(args.out / "diffusive_runtime.csv", rows, "Rcx")
        write_profiles_csv(args.out / "diffusive_profiles.csv", profiles)
        branch = [r for r in rows if 16.0 <= r.parameter <= 256.0]
        order = estimate_order([r.parameter for r in branch],
                               [r.error for r in branch])
        print(f"diffusive-limit sweep: fitted order over "
              f"Rcx in [16, 256] = {order:.3f}")
    return 0


def cmd_compare(args) -> int:
    a = read_histogram(args.hist_a)
    b = read_histogram(args.hist_b)
    if (a.nx, a.ny) != (b.nx, b.ny):
        print(f"error: histogram shapes differ: {a.nx}x{a.ny} vs "
              f"{b.nx}x{b.ny}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    diff = pointwise_diff(a, b)
    write_histogram(args.out / "difference.csv", diff)
    prof = pointwise_diff(folded_profile(a), folded_profile(b))
    write_profile(args.out / "difference_profile.csv", prof)
    norm = l2_diff(folded_profile(a), folded_profile(b))
    print(f"folded-profile 2-norm: {norm:.17g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_compare(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
