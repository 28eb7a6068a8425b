import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from succsample.errors import DegenerateInstanceError, ValidationError
from succsample.generators import generate
from succsample.metric import Assignment, Instance, cost_assignment
from succsample.sampler import (
    SamplerParams,
    assignment_weights,
    carve_radius,
    default_k_prime,
    make_rng,
    successive_sample,
    weighted_sample_with_replacement,
)


def test_params_validation():
    with pytest.raises(ValidationError):
        SamplerParams(k=0)
    with pytest.raises(ValidationError):
        SamplerParams(k=2, beta=1.0)
    with pytest.raises(ValidationError):
        SamplerParams(k=2, beta=0.0)
    with pytest.raises(ValidationError):
        SamplerParams(k=2, alpha=0.5)
    with pytest.raises(ValidationError):
        SamplerParams(k=5, k_prime=3)


def test_default_k_prime():
    assert default_k_prime(2, 64) == 6
    assert default_k_prime(32, 40000) == 32
    assert default_k_prime(4, 4096) == 12
    assert SamplerParams(k=3).resolve_k_prime(5) == 3


def test_sample_singleton(path4):
    draws = weighted_sample_with_replacement(path4, [2], 50, make_rng(0))
    assert draws.tolist() == [2] * 50


def test_sample_frequency_matches_weights():
    inst = Instance.from_coordinates([[0.0], [1.0]], [1.0, 3.0])
    draws = weighted_sample_with_replacement(inst, [0, 1], 100_000, make_rng(7))
    assert draws.size == 100_000
    assert abs(np.mean(draws == 1) - 0.75) <= 0.01


def test_sample_uniform_entropy():
    inst = Instance.from_coordinates(np.arange(4.0))
    counts = np.zeros(4)
    for seed in range(500):
        counts += np.bincount(weighted_sample_with_replacement(inst, range(4), 4, make_rng(seed)), minlength=4)
    p = counts / counts.sum()
    entropy = -(p * np.log(p)).sum()
    assert entropy == pytest.approx(math.log(4), abs=0.005)
    # chi-square with 3 dof; 16.27 is the 0.999 quantile
    expected = counts.sum() / 4
    assert ((counts - expected) ** 2 / expected).sum() < 16.27


def test_sample_never_picks_zero_weight():
    inst = Instance.from_coordinates(np.arange(5.0), [0.0, 1.0, 0.0, 2.0, 0.0])
    draws = weighted_sample_with_replacement(inst, range(5), 10_000, make_rng(3))
    assert set(draws.tolist()) <= {1, 3}


def test_sample_errors(path4):
    with pytest.raises(DegenerateInstanceError):
        weighted_sample_with_replacement(path4, [], 3, make_rng(0))
    inst = Instance.from_coordinates(np.arange(3.0), [0.0, 0.0, 1.0])
    with pytest.raises(DegenerateInstanceError):
        weighted_sample_with_replacement(inst, [0, 1], 3, make_rng(0))


def test_carve_sample_equals_active(path4):
    nu, C = carve_radius(path4, range(4), range(4), 0.5)
    assert nu == 0.0 and C.tolist() == [0, 1, 2, 3]


def test_carve_path_examples(path4):
    nu, C = carve_radius(path4, range(4), [0], 0.5)
    assert nu == 1.0 and C.tolist() == [0, 1]
    nu, C = carve_radius(path4, range(4), [0], 0.75)
    assert nu == 2.0 and C.tolist() == [0, 1, 2]


def test_carve_closed_ball_includes_ties():
    # from sample {2}: distances 2,1,0,1,2 ; beta=0.5 needs weight 2.5 -> nu=1 takes 3 points
    inst = generate("path", {"n": 5})
    nu, C = carve_radius(inst, range(5), [2], 0.5)
    assert nu == 1.0 and C.tolist() == [1, 2, 3]


def test_small_instance_is_identity(path4):
    sa = successive_sample(path4, SamplerParams(k=1))
    assert sa.trace.t == 0
    assert sa.sigma == Assignment.identity(4)
    assert cost_assignment(path4, sa.sigma) == 0.0


def _check_trace(inst, sa, params):
    tr = sa.trace
    w = inst.weights
    sigma = sa.sigma.target
    # rounds happen only while more than alpha k' points survive
    for r in tr.rounds:
        assert r.active_count > params.alpha * tr.k_prime
        assert r.carved_weight >= params.beta * r.active_weight
        assert r.sample.size <= tr.draws
    assert tr.residual.size <= params.alpha * tr.k_prime
    parts = tr.parts()
    allpts = np.concatenate(parts)
    assert np.array_equal(np.sort(allpts), inst.support)
    for r in tr.rounds:
        assert np.all(np.isin(sigma[r.carved], r.sample))
        assert np.all(inst.metric.pairs(r.carved, sigma[r.carved]) <= r.nu)
    assert np.array_equal(sigma[tr.residual], tr.residual)
    assert sa.sigma.image.size <= (tr.t + 1) * tr.draws + params.alpha * tr.k_prime
    assert tr.t <= tr.round_bound()
    assert cost_assignment(inst, sa.sigma) <= tr.cost_bound(inst)
    assert np.all(w[sigma] > 0)


def test_path64_halving(path64):
    params = SamplerParams(k=2, alpha=2, beta=0.5, seed=11)
    sa = successive_sample(path64, params)
    assert sa.trace.t >= 1
    for r in sa.trace.rounds:
        assert r.surviving_weight <= 0.5 * r.active_weight
    _check_trace(path64, sa, params)


def test_determinism():
    inst = generate("gaussian-mixture", {"centers": 5, "per": 200}, seed=2)
    params = SamplerParams(k=3, seed=99)
    a, b = successive_sample(inst, params), successive_sample(inst, params)
    assert a.sigma == b.sigma
    assert [r.to_json() for r in a.trace.rounds] == [r.to_json() for r in b.trace.rounds]
    c = successive_sample(inst, SamplerParams(k=3, seed=100))
    assert c.sigma != a.sigma


def test_weighted_instance_invariants():
    inst = generate("uniform-box", {"n": 3000, "weights": "log-uniform", "wmax": 64}, seed=4)
    params = SamplerParams(k=4, seed=1)
    _check_trace(inst, successive_sample(inst, params), params)


def test_zero_weight_points_mapped_into_image():
    rng = np.random.default_rng(0)
    w = rng.integers(0, 3, 2000).astype(float)
    inst = Instance.from_coordinates(rng.normal(size=(2000, 2)), w)
    sa = successive_sample(inst, SamplerParams(k=3, seed=5))
    _check_trace(inst, sa, SamplerParams(k=3))
    zero = np.flatnonzero(inst.weights == 0)
    assert np.all(np.isin(sa.sigma.target[zero], sa.sigma.target[inst.support]))


def test_trace_jsonl(path64):
    sa = successive_sample(path64, SamplerParams(k=2, alpha=2, seed=1))
    buf = io.StringIO()
    sa.trace.write_jsonl(buf)
    rows = [json.loads(s) for s in buf.getvalue().splitlines()]
    assert len(rows) == sa.trace.t
    assert set(rows[0]) == {"round", "sample_indices", "nu", "carved_count", "carved_weight",
                            "surviving_count", "surviving_weight"}
    assert rows[0]["surviving_count"] + rows[0]["carved_count"] == 64


def test_assignment_weights_examples(path4):
    img, w = assignment_weights(Assignment.identity(4), path4)
    assert img.tolist() == [0, 1, 2, 3] and w.tolist() == [1, 1, 1, 1]
    img, w = assignment_weights(Assignment([2, 2, 2, 2]), path4)
    assert img.tolist() == [2] and w.tolist() == [4.0]
    img, w = assignment_weights(Assignment([0, 0, 3, 3]), path4)
    assert img.tolist() == [0, 3] and w.tolist() == [2.0, 2.0]


@settings(max_examples=25, deadline=None)
@given(n=st.integers(20, 400), k=st.integers(1, 6), seed=st.integers(0, 10_000),
       beta=st.sampled_from([0.25, 0.5, 0.75]), alpha=st.sampled_from([1.0, 2.0, 4.0]))
def test_sampler_properties(n, k, seed, beta, alpha):
    rng = np.random.default_rng(seed)
    inst = Instance.from_coordinates(rng.uniform(0, 100, (n, 2)), rng.uniform(1, 10, n))
    params = SamplerParams(k=k, alpha=alpha, beta=beta, seed=seed)
    sa = successive_sample(inst, params)
    _check_trace(inst, sa, params)
    img, w = assignment_weights(sa.sigma, inst)
    assert math.fsum(w) == pytest.approx(inst.total_weight, rel=1e-12)
