"""Successive sampling.

Each round draws ``floor(alpha * k')`` points from the surviving set with
probability proportional to weight, finds the smallest radius whose closed
balls around the draws hold a ``beta`` fraction of the surviving weight,
maps every point inside those balls to its nearest draw, and drops them.
Once at most ``alpha * k'`` points survive they map to themselves.

Random numbers come from numpy's PCG64 bit generator, so a seed fixes the
whole trace on any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInstanceError, ValidationError
from .metric import Assignment, Instance, assign_nearest, ceil_log2, weight_of


def default_k_prime(k: int, n: int) -> int:
    """k' = max(k, ceil(log2 n))."""
    return max(int(k), ceil_log2(n))


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int seed or a ``SeedSequence``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SamplerParams:
    k: int
    alpha: float = 4.0
    beta: float = 0.5
    k_prime: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not self.alpha >= 1:
            raise ValidationError(f"alpha must be >= 1, got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValidationError(f"beta must lie in (0, 1), got {self.beta}")
        if self.k_prime is not None and self.k_prime < self.k:
            raise ValidationError(f"k_prime={self.k_prime} is smaller than k={self.k}")

    def resolve_k_prime(self, n: int) -> int:
        if self.k_prime is not None:
            return int(self.k_prime)
        return default_k_prime(self.k, n)


@dataclass
class RoundRecord:
    round: int
    sample: np.ndarray  # distinct sampled points, sorted
    draws: int
    nu: float
    carved: np.ndarray
    active_count: int
    active_weight: float
    carved_weight: float
    surviving_count: int
    surviving_weight: float

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "sample_indices": self.sample.tolist(),
            "nu": self.nu,
            "carved_count": int(self.carved.size),
            "carved_weight": self.carved_weight,
            "surviving_count": self.surviving_count,
            "surviving_weight": self.surviving_weight,
        }


@dataclass
class SamplerTrace:
    k_prime: int
    alpha: float
    beta: float
    draws: int
    total_weight: float
    rounds: list = field(default_factory=list)
    residual: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))

    @property
    def t(self) -> int:
        return len(self.rounds)

    def parts(self) -> list:
        """C_0, ..., C_{t-1} followed by the residual set U_t."""
        return [r.carved for r in self.rounds] + [self.residual]

    def radius_per_point(self, n: int) -> np.ndarray:
        """nu_i for the round that carved each point; 0 on the residual.

        Points outside the sampled set (zero weight) get NaN.
        """
        nu = np.full(n, np.nan)
        for r in self.rounds:
            nu[r.carved] = r.nu
        nu[self.residual] = 0.0
        return nu

    def cost_bound(self, inst: Instance) -> float:
        """sum_i nu_i w(C_i), accumulated per point."""
        nu = self.radius_per_point(inst.n)
        mask = ~np.isnan(nu)
        return weight_of(nu[mask] * inst.weights[mask])

    def round_bound(self) -> int:
        """ceil(log_{1/(1-beta)}(w(U) / (alpha k'))) + 1."""
        ratio = self.total_weight / (self.alpha * self.k_prime)
        if ratio <= 1:
            return 1
        return math.ceil(math.log(ratio) / -math.log1p(-self.beta)) + 1

    def write_jsonl(self, fp):
        for r in self.rounds:
            fp.write(json.dumps(r.to_json()) + "\n")


@dataclass
class SampledAssignment:
    sigma: Assignment
    trace: SamplerTrace


def weighted_sample_with_replacement(inst: Instance, active, count: int,
                                     rng: np.random.Generator) -> np.ndarray:
    """``count`` independent draws from ``active``, P(x) = w(x) / w(active)."""
    active = np.asarray(active, dtype=np.intp)
    if active.size == 0:
        raise DegenerateInstanceError("cannot sample from an empty set")
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    cum = np.cumsum(inst.weights[active])
    total = cum[-1]
    if not total > 0:
        raise DegenerateInstanceError("active points have zero total weight")
    u = rng.random(count) * total
    # first cumulative weight strictly above u; zero-weight points are never hit
    pos = np.searchsorted(cum, u, side="right")
    np.minimum(pos, active.size - 1, out=pos)
    return active[pos]


def _carve(inst: Instance, active, sample, beta):
    target, dist = assign_nearest(inst, sample, active)
    w = inst.weights[active]
    need = beta * weight_of(w)
    order = np.lexsort((active, dist))
    cum = np.cumsum(w[order])
    p = int(np.searchsorted(cum, need, side="left"))
    p = min(p, active.size - 1)
    levels = dist[order]
    while True:
        nu = float(levels[p])
        inside = dist <= nu
        carved_weight = weight_of(w[inside])
        if carved_weight >= need or p == active.size - 1:
            break
        # cumsum rounding undershot; move to the next distinct radius
        p = int(np.searchsorted(levels, nu, side="right"))
    return nu, inside, target, carved_weight


def carve_radius(inst: Instance, active, sample, beta: float):
    """Smallest radius nu with w(Balls(sample, nu) & active) >= beta w(active).

    Returns ``(nu, C)`` where C holds every active point within nu of the
    sample (closed balls).
    """
    active = np.asarray(active, dtype=np.intp)
    sample = np.unique(np.asarray(sample, dtype=np.intp))
    if active.size == 0 or sample.size == 0:
        raise DegenerateInstanceError("carve_radius needs nonempty active set and sample")
    nu, inside, _, _ = _carve(inst, active, sample, beta)
    return nu, active[inside]


def successive_sample(inst: Instance, params: SamplerParams, rng=None) -> SampledAssignment:
    """Run successive sampling on ``inst``.

    Only nonzero-weight points take part; zero-weight points are mapped to
    their nearest point of the resulting image afterwards, which adds
    nothing to the assignment cost.
    """
    if rng is None:
        rng = make_rng(params.seed)
    n = inst.n
    kp = params.resolve_k_prime(n)
    limit = params.alpha * kp
    draws = math.floor(limit)
    w = inst.weights
    U = inst.support
    trace = SamplerTrace(k_prime=kp, alpha=params.alpha, beta=params.beta, draws=draws,
                         total_weight=weight_of(w[U]))
    sigma = np.arange(n)
    i = 0
    active_weight = trace.total_weight
    while U.size > limit:
        S = np.unique(weighted_sample_with_replacement(inst, U, draws, rng))
        nu, inside, target, carved_weight = _carve(inst, U, S, params.beta)
        C = U[inside]
        sigma[C] = target[inside]
        rest = U[~inside]
        surviving_weight = weight_of(w[rest])
        trace.rounds.append(RoundRecord(
            round=i, sample=S, draws=draws, nu=nu, carved=C,
            active_count=int(U.size), active_weight=active_weight,
            carved_weight=carved_weight, surviving_count=int(rest.size),
            surviving_weight=surviving_weight,
        ))
        U = rest
        active_weight = surviving_weight
        i += 1
    trace.residual = U

    zero = np.flatnonzero(w == 0)
    if zero.size:
        image = np.unique(sigma[inst.support])
        sigma[zero], _ = assign_nearest(inst, image, zero)
    return SampledAssignment(Assignment(sigma), trace)


def assignment_weights(sigma: Assignment, inst: Instance):
    """Weight mapped onto each image point.

    Returns ``(image, weights)`` with ``weights[j] = w(sigma^{-1}(image[j]))``,
    each entry a correctly rounded sum.
    """
    if len(sigma) != inst.n:
        raise ValidationError(f"assignment covers {len(sigma)} points, instance has {inst.n}")
    t = sigma.target
    order = np.argsort(t, kind="stable")
    image, starts = np.unique(t[order], return_index=True)
    ws = inst.weights[order]
    bounds = list(starts[1:]) + [t.size]
    weights = np.array([weight_of(ws[a:b]) for a, b in zip(starts, bounds)])
    return image, weights
