"""Run configurations, single runs and multi-seed sweeps."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass
from itertools import combinations

from .blackbox import brute_force_kmedian, get_solver
from .errors import OracleTooLargeError, ValidationError
from .generators import generate, parse_spec
from .io import parse_input
from .lloyd import farthest_point_init, lloyd_refine, random_init
from .metric import EUCLIDEAN, SQUARED, Instance
from .pipeline import PipelineReport, ReportRecord, child_seed, kmedian
from .sampler import SamplerParams, make_rng

RUN_MODES = ("kmedian", "kmeans-init")
CSV_COLUMNS = ("seed", "n", "k", "mode", "final_cost", "oracle_cost", "ratio", "time_ms")
# the k-means oracle runs Lloyd from every k-subset of points
KMEANS_ORACLE_CAP = 5000


@dataclass
class RunConfig:
    k: int
    input: str | None = None
    generate: str | None = None
    format: str = "points"
    mode: str = "kmedian"
    metric: str | None = None
    alpha: float = 4.0
    beta: float = 0.5
    seed: int = 0
    solver: str = "local-search"
    repeat: int = 1
    oracle: bool = False
    lloyd_iters: int = 100
    timings: bool = True
    trace: str | None = None
    out: str | None = None
    csv: str | None = None
    plot: bool = False

    def __post_init__(self):
        if (self.input is None) == (self.generate is None):
            raise ValidationError("give exactly one of an input path or a generator spec")
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.mode not in RUN_MODES:
            raise ValidationError(f"unknown mode {self.mode!r}; expected one of {RUN_MODES}")
        if self.repeat < 1:
            raise ValidationError("repeat must be >= 1")
        if self.plot and not (self.csv or self.out):
            raise ValidationError("plotting needs a CSV or report path to write figures next to")
        get_solver(self.solver)
        SamplerParams(k=self.k, alpha=self.alpha, beta=self.beta)

    def instance(self, seed: int) -> Instance:
        if self.input is not None:
            return parse_input(self.input, self.format, self.metric)
        kind, params = parse_spec(self.generate)
        return generate(kind, params, seed=seed, mode=self.metric or EUCLIDEAN)


@dataclass
class BenchResult:
    seed: int
    n: int
    mode: str
    report: PipelineReport
    record: ReportRecord
    time_ms: float
    oracle_cost: float | None = None
    lloyd: dict | None = None
    baselines: dict | None = None

    @property
    def final_cost(self) -> float:
        if self.mode == "kmeans-init":
            return self.lloyd["final_cost"]
        return self.report.final_cost

    @property
    def ratio(self) -> float | None:
        if self.oracle_cost is None:
            return None
        if self.oracle_cost == 0:
            return 1.0 if self.final_cost == 0 else math.inf
        return self.final_cost / self.oracle_cost

    def csv_row(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "k": self.report.k,
            "mode": self.mode,
            "final_cost": repr(self.final_cost),
            "oracle_cost": "" if self.oracle_cost is None else repr(self.oracle_cost),
            "ratio": "" if self.ratio is None else repr(self.ratio),
            "time_ms": f"{self.time_ms:.3f}",
        }


def _lloyd_summary(res) -> dict:
    return {
        "iters": res.iters,
        "initial_cost": res.history[0],
        "final_cost": res.cost,
        "converged": res.converged,
        "centroids": res.centroids.tolist(),
    }


def kmeans_oracle(inst: Instance, k: int, max_iters: int = 100, cap: int = KMEANS_ORACLE_CAP) -> float:
    """Best Lloyd result over every k-subset of input points as the start."""
    total = math.comb(inst.n, k)
    if total > cap:
        raise OracleTooLargeError(f"k-means oracle needs {total} Lloyd runs (cap {cap})")
    return min(lloyd_refine(inst, list(c), max_iters).cost for c in combinations(range(inst.n), k))


def run_bench(config: RunConfig, seed: int | None = None) -> BenchResult:
    """One pipeline run (plus Lloyd refinement in ``kmeans-init`` mode)."""
    seed = config.seed if seed is None else seed
    inst = config.instance(seed)
    params = SamplerParams(k=config.k, alpha=config.alpha, beta=config.beta, seed=seed)
    solver = get_solver(config.solver)
    t0 = time.perf_counter()
    lloyd = baselines = None
    if config.mode == "kmedian":
        report = kmedian(inst, config.k, params, solver)
    else:
        report = kmedian(inst.with_metric_mode(SQUARED), config.k, params, solver)
        lloyd = _lloyd_summary(lloyd_refine(inst, report.final, config.lloyd_iters))
    elapsed = (time.perf_counter() - t0) * 1000.0

    oracle = None
    if config.mode == "kmeans-init":
        rng = make_rng(child_seed(seed, 99))
        baselines = {
            "random": _lloyd_summary(lloyd_refine(inst, random_init(inst, config.k, rng), config.lloyd_iters)),
            "farthest": _lloyd_summary(lloyd_refine(inst, farthest_point_init(inst, config.k, rng), config.lloyd_iters)),
        }
        if config.oracle:
            oracle = kmeans_oracle(inst, config.k, config.lloyd_iters)
    elif config.oracle:
        oracle = brute_force_kmedian(inst, config.k)[1]

    record = report.record(inst, mode=config.mode, timings=config.timings)
    record.oracle_cost = oracle
    if lloyd is not None:
        record.kmeans = {"lloyd": lloyd, "baselines": baselines}
    return BenchResult(seed=seed, n=inst.n, mode=config.mode, report=report, record=record,
                       time_ms=elapsed, oracle_cost=oracle, lloyd=lloyd, baselines=baselines)


def run_sweep(config: RunConfig) -> list:
    return [run_bench(config, config.seed + r) for r in range(config.repeat)]


def write_reports(results, fp):
    if len(results) == 1:
        fp.write(results[0].record.to_json() + "\n")
    else:
        fp.write(json.dumps([r.record.to_dict() for r in results], indent=2) + "\n")


def write_csv(results, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in results:
            writer.writerow(r.csv_row())


def write_trace(results, fp):
    for r in results:
        many = len(r.report.traces) > 1 or r.report.algorithm == "weighted"
        for c, trace in enumerate(r.report.traces):
            for rec in trace.rounds:
                row = rec.to_json()
                if many:
                    row["class"] = r.report.per_class[c].index
                if len(results) > 1:
                    row["seed"] = r.seed
                fp.write(json.dumps(row) + "\n")
