"""Problem instances, distance oracles and the cost formalism.

An :class:`Instance` is a point set ``0..n-1`` with nonnegative weights and a
:class:`DistanceOracle`.  Coordinate-backed oracles compute distances on
demand; nothing of size n x n is built unless the caller asks for a block
that large.

All distance evaluations for coordinate modes go through :func:`_coord_dist`
so that the same pair of points always yields the same double, whichever
routine asked for it.  Several invariants elsewhere (closed carve balls,
the assignment-cost bound) rely on that bit-for-bit agreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateInstanceError,
    InvalidConfigurationError,
    UnsupportedMetricError,
    ValidationError,
)

EXPLICIT = "explicit-matrix"
EUCLIDEAN = "euclidean"
SQUARED = "squared-euclidean"
MODES = (EXPLICIT, EUCLIDEAN, SQUARED)

# rows * cols * dim budget for one broadcast chunk
_CHUNK_ELEMS = 1 << 22


def _readonly(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _coord_dist(a, b, squared):
    # fixed left-to-right accumulation over dimensions, whatever the batch shape
    diff = a - b
    sq = diff[..., 0] * diff[..., 0]
    for k in range(1, diff.shape[-1]):
        sq = sq + diff[..., k] * diff[..., k]
    if squared:
        return sq
    return np.sqrt(sq)


class DistanceOracle:
    """Distances over points ``0..n-1``.

    ``mode`` is one of ``explicit-matrix`` (payload is an n x n matrix),
    ``euclidean`` or ``squared-euclidean`` (payload is an n x D coordinate
    table).
    """

    def __init__(self, mode: str, payload):
        if mode not in MODES:
            raise ValidationError(f"unknown metric mode {mode!r}; expected one of {MODES}")
        payload = np.asarray(payload, dtype=float)
        if mode == EXPLICIT:
            if payload.ndim != 2 or payload.shape[0] != payload.shape[1]:
                raise ValidationError(f"distance matrix must be square, got shape {payload.shape}")
        else:
            if payload.ndim == 1:
                payload = payload.reshape(-1, 1)
            if payload.ndim != 2:
                raise ValidationError(f"coordinate table must be 2-D, got shape {payload.shape}")
        if payload.shape[0] < 1:
            raise DegenerateInstanceError("instance has no points")
        if not np.all(np.isfinite(payload)):
            raise ValidationError("non-finite values in metric payload")
        self.mode = mode
        self._payload = _readonly(payload)

    @property
    def n(self) -> int:
        return self._payload.shape[0]

    @property
    def is_coordinate(self) -> bool:
        return self.mode != EXPLICIT

    @property
    def squared(self) -> bool:
        return self.mode == SQUARED

    @property
    def coordinates(self) -> np.ndarray:
        if not self.is_coordinate:
            raise UnsupportedMetricError("explicit-matrix instances have no coordinates")
        return self._payload

    @property
    def matrix(self) -> np.ndarray:
        if self.is_coordinate:
            raise UnsupportedMetricError("coordinate instances have no stored matrix; use block()")
        return self._payload

    @property
    def dim(self) -> int:
        return self._payload.shape[1] if self.is_coordinate else 0

    def pair(self, i: int, j: int) -> float:
        if self.is_coordinate:
            return float(_coord_dist(self._payload[i], self._payload[j], self.squared))
        return float(self._payload[i, j])

    def pairs(self, a, b) -> np.ndarray:
        """Elementwise d(a[k], b[k])."""
        a = np.asarray(a, dtype=np.intp)
        b = np.asarray(b, dtype=np.intp)
        if self.is_coordinate:
            return _coord_dist(self._payload[a], self._payload[b], self.squared)
        return self._payload[a, b]

    def to_point(self, idx, j: int) -> np.ndarray:
        """Distances from every point in ``idx`` to point ``j``."""
        idx = np.asarray(idx, dtype=np.intp)
        if self.is_coordinate:
            return _coord_dist(self._payload[idx], self._payload[j], self.squared)
        return self._payload[idx, j]

    def to_location(self, idx, loc) -> np.ndarray:
        """Distances from points ``idx`` to an arbitrary coordinate ``loc``."""
        X = self.coordinates
        idx = np.asarray(idx, dtype=np.intp)
        return _coord_dist(X[idx], np.asarray(loc, dtype=float), self.squared)

    def block(self, rows, cols) -> np.ndarray:
        """The |rows| x |cols| distance matrix."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if not self.is_coordinate:
            return self._payload[np.ix_(rows, cols)]
        out = np.empty((rows.size, cols.size))
        if rows.size == 0 or cols.size == 0:
            return out
        X = self._payload
        step = max(1, _CHUNK_ELEMS // max(1, cols.size * X.shape[1]))
        C = X[cols][None, :, :]
        for s in range(0, rows.size, step):
            r = rows[s:s + step]
            out[s:s + step] = _coord_dist(X[r][:, None, :], C, self.squared)
        return out

    def restrict(self, idx) -> "DistanceOracle":
        idx = np.asarray(idx, dtype=np.intp)
        if self.is_coordinate:
            return DistanceOracle(self.mode, self._payload[idx])
        return DistanceOracle(self.mode, self._payload[np.ix_(idx, idx)])

    def with_mode(self, mode: str) -> "DistanceOracle":
        if mode == self.mode:
            return self
        if not self.is_coordinate or mode == EXPLICIT:
            raise UnsupportedMetricError(f"cannot convert {self.mode} oracle to {mode}")
        return DistanceOracle(mode, self._payload)

    def __repr__(self):
        return f"DistanceOracle(mode={self.mode!r}, n={self.n})"


class Instance:
    """Weighted point set with a distance oracle.

    Weights are divided once by the smallest nonzero weight so the lightest
    point weighs exactly 1; ``raw_weights`` keeps the input and ``scale`` the
    divisor.  Pass ``normalize=False`` for derived instances (contractions)
    whose weights must keep their meaning relative to a parent.
    """

    def __init__(self, metric: DistanceOracle, weights=None, normalize: bool = True):
        n = metric.n
        if weights is None:
            w = np.ones(n)
        else:
            w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size != n:
            raise ValidationError(f"got {w.size} weights for {n} points")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("weights must be finite and nonnegative")
        nz = w > 0
        if not nz.any():
            raise DegenerateInstanceError("at least one weight must be positive")
        self.metric = metric
        self.raw_weights = _readonly(w)
        self.scale = float(w[nz].min()) if normalize else 1.0
        self.weights = _readonly(w / self.scale)

    @classmethod
    def from_coordinates(cls, coords, weights=None, mode: str = EUCLIDEAN, normalize: bool = True):
        return cls(DistanceOracle(mode, coords), weights, normalize=normalize)

    @classmethod
    def from_matrix(cls, matrix, weights=None, normalize: bool = True):
        return cls(DistanceOracle(EXPLICIT, matrix), weights, normalize=normalize)

    @property
    def n(self) -> int:
        return self.metric.n

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def support(self) -> np.ndarray:
        """Indices of the nonzero-weight points."""
        return np.flatnonzero(self.weights > 0)

    @property
    def total_weight(self) -> float:
        return weight_of(self.weights)

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    @property
    def weight_ratio(self) -> float:
        """R_w: largest weight over smallest nonzero weight."""
        nz = self.weights[self.weights > 0]
        return float(nz.max() / nz.min())

    @property
    def weight_classes_bound(self) -> int:
        """r_w = 1 + ceil(log2 R_w)."""
        return 1 + ceil_log2(self.weight_ratio)

    def distance_ratio(self) -> float:
        """R_d: diameter over the smallest nonzero interpoint distance.  O(n^2)."""
        hi, lo = 0.0, math.inf
        pts = self.points
        step = max(1, _CHUNK_ELEMS // max(1, self.n * max(1, self.metric.dim)))
        for s in range(0, self.n, step):
            B = self.metric.block(pts[s:s + step], pts)
            hi = max(hi, float(B.max()))
            pos = B[B > 0]
            if pos.size:
                lo = min(lo, float(pos.min()))
        if not math.isfinite(lo):
            return 1.0
        return hi / lo

    def distance_classes_bound(self) -> int:
        """r_d = 1 + ceil(log2 R_d)."""
        return 1 + ceil_log2(self.distance_ratio())

    def restrict(self, idx, weights=None, normalize: bool = False) -> "Instance":
        """Sub-instance on points ``idx`` (renumbered 0..len(idx)-1)."""
        idx = np.asarray(idx, dtype=np.intp)
        if weights is None:
            weights = self.weights[idx]
        return Instance(self.metric.restrict(idx), weights, normalize=normalize)

    def with_metric_mode(self, mode: str) -> "Instance":
        inst = Instance(self.metric.with_mode(mode), self.raw_weights)
        return inst

    def __repr__(self):
        return f"Instance(n={self.n}, mode={self.metric.mode!r}, W={self.total_weight:g})"


def ceil_log2(x: float) -> int:
    """Exact ceil(log2(x)) for x >= 1."""
    if x <= 1:
        return 0
    m, e = math.frexp(x)
    return e - 1 if m == 0.5 else e


def floor_log2(x):
    """Exact floor(log2(x)) for positive x (array or scalar)."""
    _, e = np.frexp(x)
    return e - 1


def weight_of(w) -> float:
    """Correctly rounded sum, independent of evaluation order."""
    return math.fsum(np.asarray(w, dtype=float).tolist())


@dataclass(frozen=True)
class Configuration:
    """A nonempty set of center indices, kept sorted."""

    centers: tuple

    def __post_init__(self):
        c = tuple(sorted({int(i) for i in self.centers}))
        if not c:
            raise InvalidConfigurationError("configuration must be nonempty")
        if c[0] < 0:
            raise InvalidConfigurationError(f"negative center index {c[0]}")
        object.__setattr__(self, "centers", c)

    @classmethod
    def of(cls, centers: "Configuration | Iterable[int]") -> "Configuration":
        if isinstance(centers, Configuration):
            return centers
        if isinstance(centers, np.ndarray):
            centers = centers.tolist()
        return cls(tuple(centers))

    def check(self, inst: Instance) -> "Configuration":
        if self.centers[-1] >= inst.n:
            raise InvalidConfigurationError(f"center index {self.centers[-1]} out of range for n={inst.n}")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=np.intp)

    def __len__(self):
        return len(self.centers)

    def __iter__(self):
        return iter(self.centers)

    def __contains__(self, x):
        return int(x) in self.centers


@dataclass(frozen=True, eq=False)
class Assignment:
    """tau: U -> U stored as a target index per point."""

    target: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.target, dtype=np.intp, copy=True)
        if t.ndim != 1 or t.size == 0:
            raise InvalidConfigurationError("assignment must map at least one point")
        t.setflags(write=False)
        object.__setattr__(self, "target", t)

    @classmethod
    def identity(cls, n: int) -> "Assignment":
        return cls(np.arange(n))

    @property
    def image(self) -> np.ndarray:
        return np.unique(self.target)

    def __len__(self):
        return self.target.size

    def __eq__(self, other):
        return isinstance(other, Assignment) and np.array_equal(self.target, other.target)

    def __hash__(self):
        return hash(self.target.tobytes())


def _subset(inst: Instance, Y) -> np.ndarray:
    if Y is None:
        return inst.points
    Y = np.asarray(list(Y) if not isinstance(Y, np.ndarray) else Y, dtype=np.intp)
    if Y.size and (Y.min() < 0 or Y.max() >= inst.n):
        raise ValidationError("point index out of range")
    return Y


def assign_nearest(inst: Instance, X, points=None):
    """Nearest center in ``X`` for each of ``points`` (default: all of U).

    Returns ``(target, dist)``.  Ties go to the smallest center index.
    """
    centers = Configuration.of(X).check(inst).as_array()
    pts = _subset(inst, points)
    target = np.empty(pts.size, dtype=np.intp)
    dist = np.empty(pts.size)
    step = max(1, _CHUNK_ELEMS // max(1, centers.size * max(1, inst.metric.dim)))
    for s in range(0, pts.size, step):
        B = inst.metric.block(pts[s:s + step], centers)
        j = np.argmin(B, axis=1)  # first minimum -> smallest index, centers sorted
        target[s:s + step] = centers[j]
        dist[s:s + step] = B[np.arange(j.size), j]
    return target, dist


def nearest(inst: Instance, x: int, X) -> tuple:
    """(center, distance) of the center in ``X`` closest to ``x``."""
    t, d = assign_nearest(inst, X, [x])
    return int(t[0]), float(d[0])


def cost_config(inst: Instance, X, Y=None) -> float:
    """sum over x in Y of d(x, X) * w(x); Y defaults to all points."""
    pts = _subset(inst, Y)
    if pts.size == 0:
        Configuration.of(X)
        return 0.0
    _, d = assign_nearest(inst, X, pts)
    return weight_of(d * inst.weights[pts])


def cost_assignment(inst: Instance, tau: Assignment, Y=None) -> float:
    """sum over x in Y of d(x, tau(x)) * w(x)."""
    if len(tau) != inst.n:
        raise ValidationError(f"assignment covers {len(tau)} points, instance has {inst.n}")
    pts = _subset(inst, Y)
    d = inst.metric.pairs(pts, tau.target[pts])
    return weight_of(d * inst.weights[pts])


@dataclass
class MetricReport:
    mode: str
    checked_pairs: int = 0
    checked_triples: int = 0
    exhaustive: bool = False
    violation_count: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def add(self, kind: str, idx: Sequence[int], detail: str, limit: int = 100):
        self.violation_count += 1
        if len(self.violations) < limit:
            self.violations.append((kind, tuple(int(i) for i in idx), detail))


def validate_metric(inst: Instance, sample_budget: int = 100_000, seed: int = 0,
                    rtol: float = 1e-12) -> MetricReport:
    """Spot-check the metric axioms.

    Exhaustive over all pairs and triples when n <= 64, otherwise
    ``sample_budget`` random pairs and triples.  Squared-Euclidean oracles
    are checked against d(x,z) <= 2 (d(x,y) + d(y,z)).  ``rtol`` absorbs
    rounding in the triangle check only.
    """
    m = inst.metric
    n = inst.n
    rep = MetricReport(mode=m.mode)
    factor = 2.0 if m.squared else 1.0
    if n <= 64:
        rep.exhaustive = True
        D = m.block(inst.points, inst.points)
        I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        a, b = I.ravel(), J.ravel()
        _check_pairs(rep, a, b, D[a, b], D[b, a])
        viol = D[:, None, :] > factor * (D[:, :, None] + D[None, :, :]) * (1 + rtol)
        rep.checked_triples = n ** 3
        for x, y, z in np.argwhere(viol):
            rep.add("triangle", (x, y, z), f"d({x},{z})={D[x, z]:g} > {factor:g}*({D[x, y]:g}+{D[y, z]:g})")
        return rep

    rng = np.random.default_rng(seed)
    a = rng.integers(0, n, sample_budget)
    b = rng.integers(0, n, sample_budget)
    _check_pairs(rep, a, b, m.pairs(a, b), m.pairs(b, a))
    x, y, z = (rng.integers(0, n, sample_budget) for _ in range(3))
    dxz, dxy, dyz = m.pairs(x, z), m.pairs(x, y), m.pairs(y, z)
    rep.checked_triples = sample_budget
    for k in np.flatnonzero(dxz > factor * (dxy + dyz) * (1 + rtol)):
        rep.add("triangle", (x[k], y[k], z[k]),
                f"d={dxz[k]:g} > {factor:g}*({dxy[k]:g}+{dyz[k]:g})")
    return rep


def _check_pairs(rep, a, b, dab, dba):
    rep.checked_pairs += a.size
    for k in np.flatnonzero(dab < 0):
        rep.add("negative", (a[k], b[k]), f"d={dab[k]:g}")
    for k in np.flatnonzero(dab != dba):
        rep.add("asymmetric", (a[k], b[k]), f"{dab[k]:g} != {dba[k]:g}")
    same = a == b
    for k in np.flatnonzero(same & (dab != 0)):
        rep.add("self-distance", (a[k],), f"d(x,x)={dab[k]:g}")
    for k in np.flatnonzero(~same & (dab == 0)):
        rep.add("coincident", (a[k], b[k]), "distinct points at distance 0")
