"""k-median solvers used on reduced instances, plus an exact oracle.

Solvers share one calling convention, ``solver.solve(inst, k, seed)``
returning a :class:`Configuration`, so the pipeline never cares which one
it was handed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleKError, OracleTooLargeError, ValidationError
from .metric import Configuration, Instance, cost_config
from .sampler import make_rng

DEFAULT_ORACLE_CAP = 5_000_000
# local search keeps a dense |support|^2 matrix; refuse beyond this many entries
MAX_DENSE_ENTRIES = 60_000_000


@dataclass(frozen=True)
class LocalSearchParams:
    k: int
    epsilon: float = 1e-3
    max_iterations: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")


@dataclass
class LocalSearchResult:
    config: Configuration
    cost: float
    swaps: int
    evaluations: int
    passes: int
    converged: bool


def _candidates(inst: Instance, k: int) -> np.ndarray:
    cands = inst.support
    if k > cands.size:
        raise InfeasibleKError(f"k={k} exceeds the {cands.size} nonzero-weight points")
    return cands


def local_search(inst: Instance, params: LocalSearchParams) -> LocalSearchResult:
    """Single-swap local search with first-improvement acceptance.

    A swap is taken only if it brings the cost below (1 - epsilon/k) times
    the current cost.  Each pass visits the centers in a fresh random order
    and, for each, the non-centers in a fresh random order; the search stops
    after a pass with no accepted swap or once ``max_iterations`` swap
    evaluations (default 100 k n) have been spent.
    """
    k = params.k
    cands = _candidates(inst, k)
    m = cands.size
    if k == m:
        cfg = Configuration.of(cands)
        return LocalSearchResult(cfg, cost_config(inst, cfg), 0, 0, 0, True)
    if m * m > MAX_DENSE_ENTRIES:
        raise ValidationError(f"local search on {m} candidate points is too large; reduce the instance first")

    budget = params.max_iterations or 100 * k * inst.n
    rng = make_rng(params.seed)
    # zero-weight points add nothing to the cost, so rows and columns are both the support
    D = inst.metric.block(cands, cands)
    w = inst.weights[cands]
    slots = np.sort(rng.choice(m, size=k, replace=False, p=w / w.sum()))

    def state(slots):
        order = np.argsort(slots, kind="stable")
        Dc = D[slots[order]]
        j1 = np.argmin(Dc, axis=0)
        cols = np.arange(m)
        near1 = Dc[j1, cols]
        if k > 1:
            Dc = Dc.copy()
            Dc[j1, cols] = np.inf
            near2 = Dc.min(axis=0)
        else:
            near2 = np.full(m, np.inf)
        return order[j1], near1, near2, float(near1 @ w)

    owner, near1, near2, cost = state(slots)
    step = max(1, (1 << 22) // m)
    factor = 1.0 - params.epsilon / k
    evals = swaps = passes = 0
    converged = False
    while evals < budget:
        passes += 1
        improved = False
        rank = np.empty(m, dtype=np.intp)
        rank[rng.permutation(m)] = np.arange(m)
        for j in rng.permutation(k):
            excl = np.where(owner == j, near2, near1)
            costs = np.empty(m)
            for s in range(0, m, step):
                costs[s:s + step] = np.minimum(D[s:s + step], excl) @ w
            evals += m
            costs[slots] = np.inf
            better = np.flatnonzero(costs < factor * cost)
            if better.size:
                p = better[np.argmin(rank[better])]
                slots[j] = p
                owner, near1, near2, cost = state(slots)
                swaps += 1
                improved = True
            if evals >= budget:
                break
        else:
            if not improved:
                converged = True
                break
    cfg = Configuration.of(cands[slots])
    return LocalSearchResult(cfg, cost_config(inst, cfg), swaps, evals, passes, converged)


def local_search_kmedian(inst: Instance, params: LocalSearchParams) -> Configuration:
    return local_search(inst, params).config


def brute_force_kmedian(inst: Instance, k: int, cap: int = DEFAULT_ORACLE_CAP):
    """Exact minimum-cost k-configuration over nonzero-weight centers.

    Ties go to the lexicographically smallest sorted index tuple.
    Returns ``(Configuration, cost)``.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    cands = _candidates(inst, k)
    m = cands.size
    total = math.comb(m, k)
    if total > cap:
        raise OracleTooLargeError(f"C({m},{k}) = {total} subsets exceeds the oracle cap of {cap}")
    rows = cands
    D = inst.metric.block(rows, cands)
    w = inst.weights[rows]
    batch = max(1, (1 << 22) // (rows.size * k))
    best_cost, best = math.inf, None
    combos = itertools.combinations(range(m), k)
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.intp)
        costs = w @ D[:, idx].min(axis=2)
        j = int(np.argmin(costs))
        if costs[j] < best_cost:
            best_cost, best = float(costs[j]), idx[j]
    cfg = Configuration.of(cands[best])
    return cfg, cost_config(inst, cfg)


class LocalSearchSolver:
    name = "local-search"

    def __init__(self, epsilon: float = 1e-3, max_iterations: int | None = None):
        self.epsilon = epsilon
        self.max_iterations = max_iterations

    def solve(self, inst: Instance, k: int, seed=0) -> Configuration:
        # seed may be a SeedSequence; make_rng accepts either
        params = LocalSearchParams(k, self.epsilon, self.max_iterations, seed)
        return local_search(inst, params).config


class BruteForceSolver:
    name = "brute-force"

    def __init__(self, cap: int = DEFAULT_ORACLE_CAP):
        self.cap = cap

    def solve(self, inst: Instance, k: int, seed=0) -> Configuration:
        return brute_force_kmedian(inst, k, self.cap)[0]


SOLVERS = {"local-search": LocalSearchSolver, "brute-force": BruteForceSolver}


def get_solver(name: str):
    try:
        return SOLVERS[name]()
    except KeyError:
        raise ValidationError(f"unknown solver {name!r}; expected one of {sorted(SOLVERS)}") from None

