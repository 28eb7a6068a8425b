"""End-to-end k-median: sample, contract, solve.

``uniform_kmedian`` handles equal weights: successive sampling produces an
assignment sigma, the image of sigma becomes a small weighted instance, and
a black-box solver picks k centers from it.

``weighted_kmedian`` splits points into dyadic weight classes, runs the
uniform algorithm inside each class with the class's upper weight as a
fixed weight, maps every point to its nearest center from its own class,
and solves once more on the union of those centers.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .blackbox import LocalSearchSolver
from .errors import InfeasibleKError, ValidationError
from .metric import (
    Assignment,
    Configuration,
    Instance,
    assign_nearest,
    cost_assignment,
    cost_config,
    floor_log2,
    weight_of,
)
from .sampler import (
    SamplerParams,
    assignment_weights,
    default_k_prime,
    make_rng,
    successive_sample,
)


def child_seed(seed, i: int) -> np.random.SeedSequence:
    """The i-th child of ``seed``; unlike ``SeedSequence.spawn`` this has no side effects."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (int(i),))


@dataclass
class ContractedInstance:
    base: Instance
    support: np.ndarray
    weights: np.ndarray
    instance: Instance

    @property
    def back_map(self) -> np.ndarray:
        return self.support

    @property
    def size(self) -> int:
        return int(self.support.size)

    def lift(self, cfg: Configuration) -> Configuration:
        return Configuration.of(self.support[Configuration.of(cfg).as_array()])


def contract(inst: Instance, sigma: Assignment) -> ContractedInstance:
    """Weighted instance on image(sigma) with w(y) = w(sigma^-1(y))."""
    image, weights = assignment_weights(sigma, inst)
    sub = inst.restrict(image, weights=weights, normalize=False)
    return ContractedInstance(base=inst, support=image, weights=weights, instance=sub)


@dataclass
class WeightClassPartition:
    classes: list  # (i, members) with 2^i <= w < 2^(i+1)
    r_w: int

    def __iter__(self):
        return iter(self.classes)

    def __len__(self):
        return len(self.classes)


def weight_classes(inst: Instance) -> WeightClassPartition:
    """Partition nonzero-weight points into half-open classes [2^i, 2^(i+1))."""
    support = inst.support
    cls = floor_log2(inst.weights[support])
    classes = [(int(i), support[cls == i]) for i in np.unique(cls)]
    return WeightClassPartition(classes=classes, r_w=inst.weight_classes_bound)


@dataclass
class ClassRun:
    index: int
    members: np.ndarray
    centers: Configuration
    phi_cost: float
    rounds: int
    sigma_image_size: int


@dataclass
class PipelineReport:
    algorithm: str
    k: int
    k_prime: int
    alpha: float
    beta: float
    seed: int
    solver: str
    final: Configuration
    final_cost: float
    c_sigma: float
    contracted_cost: float
    image_size: int
    rounds: int
    timings: dict
    traces: list = field(default_factory=list)
    per_class: list = field(default_factory=list)
    sigma: Assignment | None = None

    def record(self, inst: Instance, mode: str = "kmedian", timings: bool = True) -> "ReportRecord":
        return ReportRecord(
            k=self.k,
            mode=mode,
            seed=self.seed,
            alpha=self.alpha,
            beta=self.beta,
            k_prime=self.k_prime,
            final_centers=list(self.final.centers),
            final_cost=self.final_cost,
            c_sigma=self.c_sigma,
            stage_timings_ms=dict(self.timings) if timings else None,
            rounds=self.rounds,
            image_size=self.image_size,
            algorithm=self.algorithm,
            solver=self.solver,
            n=inst.n,
            metric=inst.metric.mode,
            weight_scale=inst.scale,
        )


@dataclass
class ReportRecord:
    """The JSON form of a pipeline run."""

    k: int
    mode: str
    seed: int
    alpha: float
    beta: float
    k_prime: int
    final_centers: list
    final_cost: float
    c_sigma: float
    stage_timings_ms: dict | None
    rounds: int
    image_size: int
    algorithm: str = "uniform"
    solver: str = "local-search"
    n: int = 0
    metric: str = ""
    weight_scale: float = 1.0
    oracle_cost: float | None = None
    kmeans: dict | None = None

    _OPTIONAL = ("stage_timings_ms", "oracle_cost", "kmeans")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in self._OPTIONAL:
            if d[key] is None:
                del d[key]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ReportRecord":
        d = dict(d)
        for key in cls._OPTIONAL:
            d.setdefault(key, None)
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ReportRecord":
        return cls.from_dict(json.loads(text))


def _ms(t0, t1):
    return (t1 - t0) * 1000.0


def _solver_name(solver):
    return getattr(solver, "name", type(solver).__name__)


def _uniform_run(inst, k, params, solver, seed):
    timings = {"sampling": 0.0, "contraction": 0.0, "blackbox": 0.0}
    t0 = time.perf_counter()
    sampled = successive_sample(inst, params, rng=make_rng(child_seed(seed, 0)))
    t1 = time.perf_counter()
    reduced = contract(inst, sampled.sigma)
    t2 = time.perf_counter()
    kk = min(k, reduced.size)
    local = solver.solve(reduced.instance, kk, child_seed(seed, 1))
    t3 = time.perf_counter()
    timings["sampling"] = _ms(t0, t1)
    timings["contraction"] = _ms(t1, t2)
    timings["blackbox"] = _ms(t2, t3)
    final = reduced.lift(local)
    return sampled, reduced, local, final, timings


def uniform_kmedian(inst: Instance, k: int, params: SamplerParams | None = None,
                    solver=None, seed=None) -> PipelineReport:
    """k-median for equal weights.

    ``seed`` overrides ``params.seed`` and may be a ``SeedSequence``.
    """
    if params is None:
        params = SamplerParams(k=k)
    if not inst.is_uniform():
        raise ValidationError("uniform_kmedian requires equal weights; use weighted_kmedian")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > inst.n:
        raise InfeasibleKError(f"k={k} exceeds n={inst.n}")
    solver = solver or LocalSearchSolver()
    seq = child_seed(params.seed, 0) if seed is None else seed
    sampled, reduced, local, final, timings = _uniform_run(inst, k, params, solver, seq)
    return PipelineReport(
        algorithm="uniform",
        k=k,
        k_prime=sampled.trace.k_prime,
        alpha=params.alpha,
        beta=params.beta,
        seed=params.seed,
        solver=_solver_name(solver),
        final=final,
        final_cost=cost_config(inst, final),
        c_sigma=cost_assignment(inst, sampled.sigma),
        contracted_cost=cost_config(reduced.instance, local),
        image_size=reduced.size,
        rounds=sampled.trace.t,
        timings=timings,
        traces=[sampled.trace],
        sigma=sampled.sigma,
    )


def induced_assignment(inst: Instance, Z, subset, base: Assignment | None = None) -> Assignment:
    """Map each point of ``subset`` to its nearest center in ``Z``.

    Points outside ``subset`` keep their target in ``base`` (identity when
    ``base`` is omitted).
    """
    subset = np.asarray(subset, dtype=np.intp)
    target = np.arange(inst.n) if base is None else base.target.copy()
    if subset.size:
        target[subset], _ = assign_nearest(inst, Z, subset)
    return Assignment(target)


def weighted_kmedian(inst: Instance, k: int, params: SamplerParams | None = None,
                     solver=None) -> PipelineReport:
    """k-median for arbitrary nonnegative weights via dyadic weight classes."""
    if params is None:
        params = SamplerParams(k=k)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    support = inst.support
    if k > support.size:
        raise InfeasibleKError(f"k={k} exceeds the {support.size} nonzero-weight points")
    solver = solver or LocalSearchSolver()
    seq = np.random.SeedSequence(int(params.seed))
    # k' comes from the global n, not the class size
    kp = params.k_prime if params.k_prime is not None else default_k_prime(k, inst.n)
    partition = weight_classes(inst)
    timings = {"sampling": 0.0, "contraction": 0.0, "blackbox": 0.0}

    target = np.arange(inst.n)
    per_class, traces = [], []
    for i, members in partition:
        kc = min(k, members.size)
        sub = inst.restrict(members, weights=np.full(members.size, 2.0 ** (i + 1)))
        sub_params = SamplerParams(k=kc, alpha=params.alpha, beta=params.beta,
                                   k_prime=kp, seed=params.seed)
        sampled, reduced, local, final, t = _uniform_run(sub, kc, sub_params, solver, child_seed(seq, i))
        for key in timings:
            timings[key] += t[key]
        t0 = time.perf_counter()
        Z = Configuration.of(members[final.as_array()])
        phi_t, phi_d = assign_nearest(inst, Z, members)
        target[members] = phi_t
        timings["contraction"] += _ms(t0, time.perf_counter())
        traces.append(sampled.trace)
        per_class.append(ClassRun(
            index=i, members=members, centers=Z,
            phi_cost=weight_of(phi_d * inst.weights[members]),
            rounds=sampled.trace.t, sigma_image_size=reduced.size,
        ))

    t0 = time.perf_counter()
    zero = np.flatnonzero(inst.weights == 0)
    if zero.size:
        target[zero], _ = assign_nearest(inst, np.unique(target[support]), zero)
    phi = Assignment(target)
    reduced = contract(inst, phi)
    t1 = time.perf_counter()
    kk = min(k, reduced.size)
    local = solver.solve(reduced.instance, kk, child_seed(seq, partition.r_w + 1))
    t2 = time.perf_counter()
    timings["contraction"] += _ms(t0, t1)
    timings["blackbox"] += _ms(t1, t2)
    final = reduced.lift(local)
    return PipelineReport(
        algorithm="weighted",
        k=k,
        k_prime=kp,
        alpha=params.alpha,
        beta=params.beta,
        seed=params.seed,
        solver=_solver_name(solver),
        final=final,
        final_cost=cost_config(inst, final),
        c_sigma=cost_assignment(inst, phi),
        contracted_cost=cost_config(reduced.instance, local),
        image_size=reduced.size,
        rounds=sum(c.rounds for c in per_class),
        timings=timings,
        traces=traces,
        per_class=per_class,
        sigma=phi,
    )


def kmedian(inst: Instance, k: int, params: SamplerParams | None = None, solver=None) -> PipelineReport:
    """Dispatch to the uniform or weighted algorithm by the instance's weights."""
    if inst.is_uniform():
        return uniform_kmedian(inst, k, params, solver)
    return weighted_kmedian(inst, k, params, solver)


__all__ = [
    "ContractedInstance",
    "PipelineReport",
    "ReportRecord",
    "WeightClassPartition",
    "contract",
    "induced_assignment",
    "kmedian",
    "uniform_kmedian",
    "weight_classes",
    "weighted_kmedian",
]
