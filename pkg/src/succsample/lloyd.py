"""Lloyd iterations and helpers for using k-median centers as a k-means start."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedMetricError, ValidationError
from .metric import Configuration, Instance, weight_of

_CHUNK = 1 << 22


def _coords(inst: Instance) -> np.ndarray:
    if not inst.metric.is_coordinate:
        raise UnsupportedMetricError("Lloyd refinement needs a coordinate instance")
    return inst.metric.coordinates


def _sqdist(X, C):
    """n x k squared distances, chunked over points."""
    out = np.empty((X.shape[0], C.shape[0]))
    step = max(1, _CHUNK // max(1, C.size))
    for s in range(0, X.shape[0], step):
        diff = X[s:s + step, None, :] - C[None, :, :]
        out[s:s + step] = (diff * diff).sum(axis=2)
    return out


def _label(X, C):
    D = _sqdist(X, C)
    lab = np.argmin(D, axis=1)
    return lab, D[np.arange(lab.size), lab]


@dataclass
class LloydResult:
    centroids: np.ndarray
    cost: float
    iters: int
    labels: np.ndarray
    history: list = field(default_factory=list)
    converged: bool = False


def initial_centroids(inst: Instance, init) -> np.ndarray:
    X = _coords(inst)
    if isinstance(init, Configuration):
        return X[init.as_array()].copy()
    C = np.array(init, dtype=float)
    if C.ndim == 1 and np.issubdtype(np.asarray(init).dtype, np.integer):
        return X[C.astype(np.intp)].copy()
    if C.ndim != 2 or C.shape[1] != X.shape[1]:
        raise ValidationError(f"initial centroids must be k x {X.shape[1]}, got shape {C.shape}")
    return C


def lloyd_refine(inst: Instance, init, max_iters: int = 100) -> LloydResult:
    """Weighted Lloyd iterations from ``init`` (point indices or coordinates).

    The objective is always the weighted sum of squared Euclidean distances
    to the nearest centroid.  Stops after ``max_iters`` centroid updates or
    as soon as an update leaves every label unchanged.  A centroid left
    without points moves onto the point farthest from its own centroid.
    """
    if max_iters < 1:
        raise ValidationError("max_iters must be >= 1")
    X = _coords(inst)
    w = inst.weights
    C = initial_centroids(inst, init)
    k = C.shape[0]
    labels, d = _label(X, C)
    history = [weight_of(w * d)]
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        C = _update(X, w, labels, C, d, k)
        new_labels, d = _label(X, C)
        history.append(weight_of(w * d))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    return LloydResult(centroids=C, cost=history[-1], iters=it, labels=labels,
                       history=history, converged=converged)


def _update(X, w, labels, C, d, k):
    newC = C.copy()
    mass = np.bincount(labels, weights=w, minlength=k)
    taken = set()
    for j in range(k):
        members = labels == j
        if mass[j] > 0:
            newC[j] = (w[members, None] * X[members]).sum(axis=0) / mass[j]
            continue
        # empty (or zero-weight) cluster: reseed on the point farthest from its centroid
        order = np.argsort(-d, kind="stable")
        pick = next((int(i) for i in order if int(i) not in taken), int(order[0]))
        taken.add(pick)
        newC[j] = X[pick]
    return newC


def kmeans_cost(inst: Instance, centroids) -> float:
    X = _coords(inst)
    _, d = _label(X, np.asarray(centroids, dtype=float))
    return weight_of(inst.weights * d)


def centroid_cost(inst: Instance, centroids) -> float:
    """k-median objective (plain Euclidean distance) of arbitrary centroids."""
    X = _coords(inst)
    _, d = _label(X, np.asarray(centroids, dtype=float))
    return weight_of(inst.weights * np.sqrt(d))


def snap_to_points(inst: Instance, centroids) -> Configuration:
    """Replace each centroid by its nearest input point (lowest index on ties)."""
    X = _coords(inst)
    C = np.asarray(centroids, dtype=float).reshape(-1, X.shape[1])
    nearest = np.argmin(_sqdist(C, X), axis=1)
    return Configuration.of(nearest)


def random_init(inst: Instance, k: int, rng) -> Configuration:
    if k > inst.n:
        raise ValidationError(f"k={k} exceeds n={inst.n}")
    return Configuration.of(rng.choice(inst.n, size=k, replace=False))


def farthest_point_init(inst: Instance, k: int, rng) -> Configuration:
    """Random first center, then repeatedly the point farthest from the chosen ones."""
    X = _coords(inst)
    if k > inst.n:
        raise ValidationError(f"k={k} exceeds n={inst.n}")
    chosen = [int(rng.integers(inst.n))]
    d = _sqdist(X, X[chosen]).ravel()
    for _ in range(k - 1):
        nxt = int(np.argmax(d))
        chosen.append(nxt)
        d = np.minimum(d, _sqdist(X, X[[nxt]]).ravel())
    return Configuration.of(chosen)
