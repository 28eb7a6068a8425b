"""Synthetic instances.

``generate("gaussian-mixture", {"centers": 4, "per": 50}, seed=1)`` and the
string form ``parse_spec("gaussian-mixture:centers=4,per=50")`` are
equivalent ways to ask for one.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .metric import EUCLIDEAN, Instance

KINDS = ("gaussian-mixture", "uniform-box", "path", "counterexample-5pt")

_DEFAULTS = {
    "gaussian-mixture": {"centers": 4, "per": 50, "sigma": 0.1, "box": 10.0, "dim": 2},
    "uniform-box": {"n": 1000, "box": 1.0, "dim": 2},
    "path": {"n": 64},
    "counterexample-5pt": {"D": 1000.0},
}
_INTS = {"centers", "per", "dim", "n"}


def parse_spec(text: str):
    """``kind[:key=value,...]`` -> ``(kind, params)``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValidationError(f"generator parameter {item!r} is not key=value")
        params[key.strip()] = val.strip()
    return kind, params


def _resolve(kind, params):
    if kind not in KINDS:
        raise ValidationError(f"unknown generator {kind!r}; expected one of {KINDS}")
    out = dict(_DEFAULTS[kind])
    for key, val in (params or {}).items():
        if key == "weights":
            out[key] = str(val)
            continue
        if key not in out and key != "wmax":
            raise ValidationError(f"generator {kind!r} has no parameter {key!r}")
        try:
            out[key] = int(val) if key in _INTS else float(val)
        except (TypeError, ValueError):
            raise ValidationError(f"bad value for {key}: {val!r}") from None
    return out


def log_uniform_weights(n, wmax, rng):
    """Weights with log2(w) uniform on [0, log2(wmax))."""
    return np.exp2(rng.uniform(0.0, np.log2(wmax), n))


def generate(kind: str, params: dict | None = None, seed: int = 0, mode: str = EUCLIDEAN) -> Instance:
    """Build an instance; identical arguments give identical instances.

    Coordinate kinds accept ``weights=log-uniform`` with ``wmax`` (default
    256) for non-uniform weights.
    """
    p = _resolve(kind, params)
    rng = np.random.default_rng(seed)
    if kind == "gaussian-mixture":
        if p["centers"] < 1 or p["per"] < 1 or p["sigma"] < 0 or p["box"] <= 0:
            raise ValidationError(f"invalid gaussian-mixture parameters {p}")
        mu = rng.uniform(0.0, p["box"], (p["centers"], p["dim"]))
        X = np.repeat(mu, p["per"], axis=0) + rng.normal(0.0, p["sigma"], (p["centers"] * p["per"], p["dim"]))
    elif kind == "uniform-box":
        if p["n"] < 1 or p["box"] <= 0:
            raise ValidationError(f"invalid uniform-box parameters {p}")
        X = rng.uniform(0.0, p["box"], (p["n"], p["dim"]))
    elif kind == "path":
        if p["n"] < 1:
            raise ValidationError(f"path needs n >= 1, got {p['n']}")
        i = np.arange(p["n"], dtype=float)
        return Instance.from_matrix(np.abs(i[:, None] - i[None, :]))
    else:
        D = p["D"]
        if not D > 0:
            raise ValidationError(f"counterexample needs D > 0, got {D}")
        X = counterexample_points(D)

    weights = None
    scheme = p.get("weights")
    if scheme is not None:
        if scheme not in ("log-uniform", "uniform"):
            raise ValidationError(f"unknown weight scheme {scheme!r}")
        if scheme == "log-uniform":
            weights = log_uniform_weights(X.shape[0], p.get("wmax", 256.0), rng)
    return Instance.from_coordinates(X, weights, mode=mode)


def counterexample_points(D: float = 1000.0) -> np.ndarray:
    """Three blue points on the y-axis, two red points at (-D, 0) and (D, 0)."""
    return np.array([[0.0, 1.0], [0.0, 0.0], [0.0, -1.0], [-D, 0.0], [D, 0.0]])


def path_instance(n: int) -> Instance:
    return generate("path", {"n": n})
