"""Command-line entry point.

    succsample --generate gaussian-mixture:centers=4,per=50 --k 4
    succsample --input pts.txt --k 8 --mode kmeans-init --out report.json
    succsample --generate counterexample-5pt --k 3 --repeat 20 --oracle --csv sweep.csv --plot

Exit status: 0 on success, 2 on invalid input or parameters, 3 when k is
infeasible or an oracle would be too large.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import RUN_MODES, RunConfig, run_sweep, write_csv, write_reports, write_trace
from .blackbox import SOLVERS
from .errors import KMedianError
from .io import FORMATS
from .metric import MODES


def build_parser():
    p = argparse.ArgumentParser(prog="succsample", description=__doc__.split("\n\n")[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="points or matrix file")
    src.add_argument("--generate", metavar="KIND[:k=v,...]",
                     help="gaussian-mixture, uniform-box, path or counterexample-5pt")
    p.add_argument("--format", choices=FORMATS, default="points")
    p.add_argument("--metric", choices=MODES, default=None,
                   help="distance for points files and coordinate generators (default euclidean)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=RUN_MODES, default="kmedian")
    p.add_argument("--solver", choices=sorted(SOLVERS), default="local-search")
    p.add_argument("--repeat", type=int, default=1, metavar="N", help="run seeds seed..seed+N-1")
    p.add_argument("--oracle", action="store_true", help="also compute the exact optimum (small n only)")
    p.add_argument("--lloyd-iters", type=int, default=100)
    p.add_argument("--no-timings", action="store_true", help="leave stage timings out of the JSON report")
    p.add_argument("--trace", metavar="PATH", help="write per-round sampler records as JSON lines")
    p.add_argument("--out", metavar="PATH", help="JSON report (default: stdout)")
    p.add_argument("--csv", metavar="PATH", help="per-seed CSV")
    p.add_argument("--plot", action="store_true", help="render PNG figures next to --csv / --out")
    return p


def config_from_args(args) -> RunConfig:
    return RunConfig(
        k=args.k, input=args.input, generate=args.generate, format=args.format,
        mode=args.mode, metric=args.metric, alpha=args.alpha, beta=args.beta,
        seed=args.seed, solver=args.solver, repeat=args.repeat, oracle=args.oracle,
        lloyd_iters=args.lloyd_iters, timings=not args.no_timings, trace=args.trace,
        out=args.out, csv=args.csv, plot=args.plot,
    )


def _plots(config, results):
    from .plotting import plot_clustering, plot_sweep

    written = []
    if config.csv:
        written.append(plot_sweep(results, Path(config.csv).with_suffix(".png")))
    last = results[-1]
    if config.out and config.instance(last.seed).metric.is_coordinate:
        inst = config.instance(last.seed)
        centroids = last.lloyd["centroids"] if last.lloyd else None
        target = Path(config.out)
        written.append(plot_clustering(inst, last.report.final,
                                       target.with_name(target.stem + "_clusters.png"), centroids))
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        results = run_sweep(config)
        if config.out:
            with open(config.out, "w") as fh:
                write_reports(results, fh)
        else:
            write_reports(results, sys.stdout)
        if config.csv:
            write_csv(results, config.csv)
        if config.trace:
            with open(config.trace, "w") as fh:
                write_trace(results, fh)
        if config.plot:
            for path in _plots(config, results):
                print(f"wrote {path}", file=sys.stderr)
    except KMedianError as exc:
        print(f"succsample: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
