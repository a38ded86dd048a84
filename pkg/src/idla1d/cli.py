"""Command-line entry point: ``idla1d <experiment> [options]``.

The exit status is 0 iff every verdict embedded in the result document
passes (for ``accept``: iff every selected criterion passes).
"""

import argparse
import sys

from . import harness

EXPERIMENTS = ("idla", "gambler", "hitprob", "overshoot", "ladder", "theory")


def _common(p):
    p.add_argument("--law", default="simple",
                   help="preset (simple, two_step, skip_free, stable) or JSON law file")
    p.add_argument("--alpha", type=float, default=1.5, help="tail index of the stable law")
    p.add_argument("--m", type=int, default=1000, help="number of walkers (idla)")
    p.add_argument("--N", type=int, default=500, help="interval scale (gambler, hitprob)")
    p.add_argument("--x", type=int, default=1, help="smallest x reported for sigma_x / x")
    p.add_argument("--c", type=float, default=1.0, help="left end of [-cN, N]")
    p.add_argument("--y", type=float, nargs="+", default=None,
                   help="start fraction (hitprob, theory) or levels (overshoot)")
    p.add_argument("--u", type=float, nargs="+", default=[1.0], help="overshoot thresholds")
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--w", type=float, default=None)
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--max-steps", type=int, default=None, help="per-walk step cap")
    p.add_argument("--budget", type=int, default=None, help="step budget per IDLA replica")
    p.add_argument("--checkpoints", type=int, nargs="*", default=(), help="m values for r_m")
    p.add_argument("--method", default="direct", choices=harness.OVERSHOOT_METHODS)
    p.add_argument("--slack", type=float, default=None)
    p.add_argument("--heights", type=int, default=10000, help="ladder heights to harvest")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(prog="idla1d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _common(sub.add_parser(name, help="run a %s experiment" % name))
    acc = sub.add_parser("accept", help="run the acceptance suite")
    acc.add_argument("--only", type=int, nargs="+", default=None, help="criterion numbers")
    acc.add_argument("--seed", type=int, default=None)
    return parser


def config_from_args(args):
    y = args.y
    if y is None:
        y = (1000,) if args.command == "overshoot" else (0.5,)
    kw = dict(kind=args.command, law=args.law, alpha=args.alpha, m=args.m, N=args.N,
              x=args.x, y=y, c=args.c, u=args.u, s=args.s, w=args.w,
              replicas=args.replicas, seed=args.seed, step_budget=args.budget,
              checkpoints=args.checkpoints, method=args.method, slack=args.slack,
              heights=args.heights, workers=args.workers, backend=args.backend,
              out=args.out, format=args.format)
    if args.max_steps is not None:
        kw["step_cap"] = args.max_steps
    return harness.ExperimentConfig(**kw)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "accept":
        from . import acceptance
        seed = acceptance.DEFAULT_SEED if args.seed is None else args.seed
        results = acceptance.run_all(args.only, seed, echo=print)
        return 0 if all(r.passed for r in results) else 1
    config = config_from_args(args)
    try:
        doc = harness.run_experiment(config)
    except (harness.ConfigError, ValueError) as exc:
        print("idla1d: %s" % exc, file=sys.stderr)
        return 2
    except harness.ReplicaFailure as exc:
        print("idla1d: %s" % exc, file=sys.stderr)
        for f in exc.failures:
            print("  replica %d: %s" % (f["replica"], f["message"]), file=sys.stderr)
        return 3
    if config.out is None:
        sys.stdout.write(harness.to_json(doc) + "\n" if config.format == "json"
                         else harness.to_csv(doc))
    return 0 if doc["passed"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
