"""Compare the numba-compiled kernels against the pure-Python fallback.

The fallback is selected by the KDMC2D_DISABLE_NUMBA environment variable,
which must be set before the package is imported, so the fallback timings are
collected in a subprocess.

Usage: python3 benchmarks/bench_kernels.py [--particles N]
"""

import argparse
import json
import os
import subprocess
import sys

CASES = [
    # (name, mode, rate, background mean speed, dt, t_end)
    ("kinetic-regime/kinetic", "kinetic", 0.78125, 0.013847, 0.25, 1.0),
    ("kinetic-regime/kdmc", "kdmc", 0.78125, 0.013847, 0.25, 1.0),
    ("diffusive-regime/kinetic", "kinetic", 256.0, 0.19817, 1.0, 4.0),
    ("diffusive-regime/kdmc", "kdmc", 256.0, 0.19817, 1.0, 4.0),
]


def run_cases(particles):
    from kdmc2d import (Background, Domain, Maxwellian, RunConfig,
                        SourceSpec, StepConfig, Vec2,
                        temperature_from_mean_speed)
    from kdmc2d.harness import run_simulation_detailed

    dom = Domain()
    out = {}
    for name, mode, rate, bg_speed, dt, t_end in CASES:
        cfg = RunConfig(
            mode=mode, particles=particles, seed=7, workers=1,
            step=StepConfig(dt=dt, t_end=t_end),
            source=SourceSpec(Vec2(0.5, 0.5),
                              Maxwellian(temperature_from_mean_speed(0.0625))),
            background=Background.homogeneous(
                rate, Maxwellian(temperature_from_mean_speed(bg_speed)), dom),
            domain=dom)
        res = run_simulation_detailed(cfg)
        # re-run once warm so compilation/caching never lands in the timing
        res = run_simulation_detailed(cfg)
        out[name] = {"seconds": res.wall_time,
                     "checksum": int(res.counts.sum()) + res.absorbed}
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--particles", type=int, default=100_000)
    ap.add_argument("--emit-json", action="store_true",
                    help=argparse.SUPPRESS)  # internal: subprocess mode
    args = ap.parse_args()

    if args.emit_json:
        print(json.dumps(run_cases(args.particles)))
        return

    compiled = run_cases(args.particles)

    # the fallback is orders of magnitude slower; scale the workload down and
    # compare per-particle costs
    fb_particles = max(args.particles // 100, 1000)
    env = dict(os.environ, KDMC2D_DISABLE_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--emit-json",
         "--particles", str(fb_particles)],
        env=env, capture_output=True, text=True, check=True)
    fallback = json.loads(proc.stdout)

    print(f"{'case':28s} {'numba us/p':>12s} {'python us/p':>12s} "
          f"{'speedup':>9s}")
    for name, _, _, _, _, _ in CASES:
        tn = compiled[name]["seconds"] / args.particles * 1e6
        tp = fallback[name]["seconds"] / fb_particles * 1e6
        print(f"{name:28s} {tn:12.3f} {tp:12.3f} {tp / tn:8.1f}x")


if __name__ == "__main__":
    main()
