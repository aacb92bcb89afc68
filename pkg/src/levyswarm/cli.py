"""Command-line entry points for runs, sweeps, and sampler audits.

Exit codes: 0 on success, 2 when a comparison falls outside the acceptance
band, 1 on any error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .core import ExperimentConfig
from .harness import (
    BAND_THRESHOLD,
    SweepSpec,
    compare,
    run_agents,
    run_pde,
    run_sweep,
    sample_audit,
)

DEFAULT_OUT = "levyswarm_out"


def _add_common(parser):
    parser.add_argument("--config", help="path to a JSON configuration file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", default=DEFAULT_OUT, help="output directory")
    parser.add_argument(
        "--workers", type=int, default=1, help="parallel worker count"
    )
    parser.add_argument(
        "--mode",
        choices=("webots", "kinetic", "point"),
        help="override the agent movement mode",
    )


def _load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_json(fh.read())
    else:
        config = ExperimentConfig(n_robots=20, alpha=1.3)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.mode is not None:
        config = replace(config, mode=args.mode)
    return config


def _load_sweep(args) -> SweepSpec:
    if args.config:
        with open(args.config) as fh:
            spec = SweepSpec.from_json(fh.read())
    else:
        base = ExperimentConfig(
            n_robots=20, alpha=1.3, mode="point", replicates=30
        )
        spec = SweepSpec(n_values=[20], alpha_values=[1.3], base=base)
    if args.seed is not None:
        spec = SweepSpec(
            n_values=spec.n_values,
            alpha_values=spec.alpha_values,
            base=replace(spec.base, seed=args.seed),
        )
    if args.mode is not None:
        spec = SweepSpec(
            n_values=spec.n_values,
            alpha_values=spec.alpha_values,
            base=replace(spec.base, mode=args.mode),
        )
    return spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levyswarm",
        description="Levy-walk swarm simulator and fractional-diffusion solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("agents", "pde", "compare", "sweep", "sample-audit"):
        _add_common(sub.add_parser(name))

    args = parser.parse_args(argv)
    try:
        if args.command == "agents":
            run_agents(_load_config(args), out_dir=args.out, workers=args.workers)
        elif args.command == "pde":
            run_pde(_load_config(args), out_dir=args.out)
        elif args.command == "compare":
            report = compare(_load_sweep(args), out_dir=args.out, workers=args.workers)
            if report.worst_containment() < BAND_THRESHOLD:
                print(
                    f"band containment {report.worst_containment():.3f} "
                    f"below threshold {BAND_THRESHOLD}",
                    file=sys.stderr,
                )
                return 2
        elif args.command == "sweep":
            run_sweep(_load_sweep(args), out_dir=args.out, workers=args.workers)
        elif args.command == "sample-audit":
            import os

            alpha = 1.5
            if args.config:
                alpha = _load_config(args).alpha
            sample_audit(
                os.path.join(args.out, "samples.csv"),
                alpha=alpha,
                seed=args.seed or 0,
            )
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
