"""Command-line entry point for the benchmark experiments.

Subcommands ``bp``, ``mc`` and ``vi`` run one problem family over the given
parameter lists (the full Cartesian product); ``sweep`` is the generic form
taking ``--kind``. Each invocation writes one CSV per run, a plot script,
and a JSON manifest that reproduces every CSV byte-for-byte.
"""

import argparse
import sys

from .bench import DIM_DEFAULTS, ExperimentConfig, emit_plots, run_sweep, sweep_failed


def _add_common(parser, kind):
    dims = DIM_DEFAULTS[kind]
    parser.add_argument("--m", type=int, default=dims["m"], help="rows of A / matrix")
    parser.add_argument("--n", type=int, default=dims["n"], help="columns of A / matrix, or VI dimension")
    parser.add_argument("--density", type=float, default=dims["density"], help="nonzero density of the ground truth")
    parser.add_argument("--seed", type=int, nargs="+", default=[0], help="instance seeds")
    parser.add_argument("--p", type=float, nargs="+", default=[1.0, 2.0, 3.0], help="solver orders")
    parser.add_argument(
        "--beta", type=float, nargs="+", default=[5.0 if kind == "mc" else 2.0], help="penalty parameters"
    )
    parser.add_argument("--eps-sub", type=float, nargs="+", default=[0.1], help="subproblem tolerances")
    parser.add_argument(
        "--eps", type=float, default=0.0 if kind == "vi-affine" else 1e-4, help="primal residual tolerance"
    )
    parser.add_argument("--max-outer", type=int, default=200 if kind == "vi-affine" else 1000)
    parser.add_argument("--max-inner", type=int, default=50_000)
    parser.add_argument("--lam", type=float, default=1.0, help="proximal parameter for VI runs")
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument("--dump-instance", action="store_true", help="also write instance text files")


def _config_from(args, kind) -> ExperimentConfig:
    return ExperimentConfig(
        kind=kind,
        m=args.m,
        n=args.n,
        density=args.density,
        seeds=args.seed,
        p_values=args.p,
        betas=args.beta,
        eps_subs=args.eps_sub,
        eps=args.eps,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        out_dir=args.out,
        lambda_ppa=args.lam,
        dump_instances=args.dump_instance,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoprox",
        description="High-order proximal point / augmented Lagrangian benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for kind, help_text in (
        ("bp", "basis pursuit: min ||x||_1 s.t. Ax = b"),
        ("mc", "matrix completion: min ||X||_* s.t. observed entries match"),
        ("vi", "affine monotone VI solved by the high-order proximal iteration"),
    ):
        cmd = sub.add_parser(kind, help=help_text)
        _add_common(cmd, "vi-affine" if kind == "vi" else kind)

    sweep = sub.add_parser("sweep", help="generic sweep over any problem kind")
    sweep.add_argument("--kind", choices=["bp", "mc", "vi-affine"], default="bp")
    # dims default to the bp family; callers override for other kinds
    _add_common(sweep, "bp")
    return parser


def resolve_config(argv) -> ExperimentConfig:
    """Parse CLI arguments into a validated ExperimentConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "sweep":
        kind = args.kind
    elif args.command == "vi":
        kind = "vi-affine"
    else:
        kind = args.command
    if args.command == "sweep" and kind != "bp":
        defaults = DIM_DEFAULTS[kind]
        # only replace dims the user left at the bp defaults
        bp_dims = DIM_DEFAULTS["bp"]
        if args.m == bp_dims["m"] and args.n == bp_dims["n"] and args.density == bp_dims["density"]:
            args.m, args.n, args.density = defaults["m"], defaults["n"], defaults["density"]

    cfg = _config_from(args, kind)
    try:
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    return cfg


def main(argv=None) -> int:
    cfg = resolve_config(argv)
    manifest = run_sweep(cfg)
    emit_plots(manifest)
    for run in manifest.runs:
        print(f"{run['id']}: {run['status']} ({run.get('outer_iterations', '-')} outer iterations)")
    print(f"manifest: {cfg.out_dir}/manifest.json")
    if sweep_failed(manifest):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
