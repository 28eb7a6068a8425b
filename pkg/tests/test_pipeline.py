import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from succsample.blackbox import BruteForceSolver, LocalSearchParams, brute_force_kmedian, local_search
from succsample.errors import InfeasibleKError, ValidationError
from succsample.generators import generate
from succsample.metric import Assignment, Instance, cost_config
from succsample.pipeline import (
    ReportRecord,
    child_seed,
    contract,
    induced_assignment,
    kmedian,
    uniform_kmedian,
    weight_classes,
    weighted_kmedian,
)
from succsample.sampler import SamplerParams


def test_contract_identity(path4):
    c = contract(path4, Assignment.identity(4))
    assert c.support.tolist() == [0, 1, 2, 3]
    assert c.weights.tolist() == [1, 1, 1, 1]
    assert np.array_equal(c.instance.metric.matrix, path4.metric.matrix)


def test_contract_constant(path4):
    c = contract(path4, Assignment([1, 1, 1, 1]))
    assert c.support.tolist() == [1] and c.weights.tolist() == [4.0]
    assert c.instance.n == 1


def test_contract_path(path4):
    c = contract(path4, Assignment([0, 0, 3, 3]))
    assert c.support.tolist() == [0, 3] and c.weights.tolist() == [2.0, 2.0]
    assert c.instance.metric.pair(0, 1) == 3.0
    assert c.lift([1]).centers == (3,)


def test_induced_assignment(path4):
    assert induced_assignment(path4, [0, 1, 2, 3], range(4)) == Assignment.identity(4)
    assert induced_assignment(path4, [0, 3], range(4)).target.tolist() == [0, 0, 3, 3]
    inst = generate("path", {"n": 3})
    assert induced_assignment(inst, [0, 2], [1]).target.tolist() == [0, 0, 2]


def test_induced_assignment_leaves_others(path4):
    tau = induced_assignment(path4, [3], [2], base=Assignment([1, 1, 1, 1]))
    assert tau.target.tolist() == [1, 1, 3, 1]


def test_uniform_requires_equal_weights():
    inst = Instance.from_coordinates([[0.0], [1.0]], [1.0, 2.0])
    with pytest.raises(ValidationError):
        uniform_kmedian(inst, 1)
    with pytest.raises(InfeasibleKError):
        uniform_kmedian(generate("path", {"n": 3}), 4)


def test_uniform_small_instance_is_blackbox_on_original(path4):
    rep = uniform_kmedian(path4, 2, SamplerParams(k=2, seed=1))
    assert rep.rounds == 0 and rep.image_size == 4 and rep.c_sigma == 0.0
    assert rep.final_cost == 2.0


def test_uniform_path64_ratio(path64):
    opt = 512.0  # brute force over C(64,2), see test_blackbox
    for seed in range(10):
        rep = uniform_kmedian(path64, 2, SamplerParams(k=2, seed=seed))
        assert rep.final_cost <= 10 * opt
        assert rep.final_cost == cost_config(path64, rep.final)
        assert len(rep.final) <= 2


def test_uniform_path64_sampling_active():
    # alpha=1 forces rounds on 64 points (k'=6)
    inst = generate("path", {"n": 64})
    for seed in range(10):
        rep = uniform_kmedian(inst, 2, SamplerParams(k=2, alpha=1.0, seed=seed))
        assert rep.rounds >= 1
        assert rep.final_cost <= 10 * 512.0


def _four_clusters(seed):
    rng = np.random.default_rng(seed)
    mu = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])
    X = np.repeat(mu, 50, axis=0) + rng.normal(0, 0.3, (200, 2))
    return Instance.from_coordinates(X), np.repeat(np.arange(4), 50)


def _restart_oracle(inst, k, restarts=20):
    return min(local_search(inst, LocalSearchParams(k=k, seed=s)).cost for s in range(restarts))


def test_restart_oracle_agrees_with_brute_force_on_subsample():
    inst, _ = _four_clusters(0)
    sub = inst.restrict(np.arange(0, 200, 10), normalize=True)
    _, opt = brute_force_kmedian(sub, 4)
    assert _restart_oracle(sub, 4) == pytest.approx(opt, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_uniform_clustered_gaussians(seed):
    inst, labels = _four_clusters(seed)
    oracle = _restart_oracle(inst, 4)
    rep = uniform_kmedian(inst, 4, SamplerParams(k=4, alpha=2.0, seed=seed))
    assert rep.rounds >= 1
    assert sorted(labels[list(rep.final)]) == [0, 1, 2, 3]
    assert rep.final_cost <= 3 * oracle


def test_weight_classes_partition():
    rng = np.random.default_rng(8)
    w = np.exp2(rng.uniform(0, 8, 200))
    inst = Instance.from_coordinates(rng.normal(size=(200, 2)), w)
    part = weight_classes(inst)
    assert len(part) <= 8
    assert len(part) <= part.r_w
    members = np.concatenate([m for _, m in part])
    assert np.array_equal(np.sort(members), inst.support)
    for i, m in part:
        assert np.all(inst.weights[m] >= 2.0 ** i) and np.all(inst.weights[m] < 2.0 ** (i + 1))


def test_weight_class_boundaries_half_open():
    inst = Instance.from_coordinates(np.arange(4.0), [1.0, 2.0, 3.999, 4.0])
    part = weight_classes(inst)
    assert [(i, m.tolist()) for i, m in part] == [(0, [0]), (1, [1, 2]), (2, [3])]


def test_weighted_with_equal_weights_matches_uniform():
    inst = generate("gaussian-mixture", {"centers": 3, "per": 300}, seed=5)
    params = SamplerParams(k=3, seed=42)
    w = weighted_kmedian(inst, 3, params)
    doubled = inst.restrict(inst.points, weights=np.full(inst.n, 2.0))
    u = uniform_kmedian(doubled, 3, params)
    assert len(w.per_class) == 1
    assert w.final == u.final
    assert w.per_class[0].centers == u.final


def test_weighted_far_pairs_ratio():
    # two far-apart pairs of clusters; one heavy point in each pair
    X = np.array([[0, 0], [0.5, 0], [1, 0], [0, 0.5], [1, 0.5],
                  [100, 0], [100.5, 0], [101, 0], [100, 0.5], [101, 0.5]], dtype=float)
    w = np.array([1000, 1, 1, 1, 1, 1, 1, 1000, 1, 1], dtype=float)
    inst = Instance.from_coordinates(X, w)
    _, opt = brute_force_kmedian(inst, 2)
    for seed in range(10):
        rep = weighted_kmedian(inst, 2, SamplerParams(k=2, seed=seed))
        assert rep.final_cost <= 10 * opt
        assert set(rep.final) & {0, 1, 2, 3, 4} and set(rep.final) & {5, 6, 7, 8, 9}


def test_weighted_report_structure():
    rng = np.random.default_rng(3)
    w = np.exp2(rng.uniform(0, 8, 200))
    inst = Instance.from_coordinates(rng.uniform(0, 10, (200, 2)), w)
    rep = weighted_kmedian(inst, 3, SamplerParams(k=3, seed=1))
    assert len(rep.final) <= 3
    assert rep.final_cost == cost_config(inst, rep.final)
    assert rep.image_size <= sum(len(c.centers) for c in rep.per_class) <= 3 * len(rep.per_class)
    c = contract(inst, rep.sigma)
    assert math.fsum(c.weights) == pytest.approx(inst.total_weight, rel=1e-12)
    for run in rep.per_class:
        assert set(run.centers) <= set(run.members.tolist())


def test_weighted_zero_weight_points():
    rng = np.random.default_rng(1)
    w = rng.uniform(1, 50, 300)
    w[::7] = 0.0
    inst = Instance.from_coordinates(rng.uniform(0, 10, (300, 2)), w)
    rep = weighted_kmedian(inst, 4, SamplerParams(k=4, seed=2))
    assert all(inst.weights[c] > 0 for c in rep.final)


def test_contraction_conserves_weight_exactly_for_integers():
    inst = generate("uniform-box", {"n": 5000}, seed=1)
    rep = uniform_kmedian(inst, 8, SamplerParams(k=8, seed=3))
    c = contract(inst, rep.sigma)
    assert math.fsum(c.weights) == 5000.0


def test_end_to_end_determinism():
    inst = generate("uniform-box", {"n": 3000, "weights": "log-uniform"}, seed=9)
    a = kmedian(inst, 5, SamplerParams(k=5, seed=17))
    b = kmedian(inst, 5, SamplerParams(k=5, seed=17))
    assert a.final == b.final and a.sigma == b.sigma and a.final_cost == b.final_cost


def test_squared_mode_runs():
    inst = generate("gaussian-mixture", {"centers": 4, "per": 100}, seed=2, mode="squared-euclidean")
    rep = uniform_kmedian(inst, 4, SamplerParams(k=4, alpha=2, seed=0))
    assert rep.final_cost == cost_config(inst, rep.final)


def test_brute_force_as_blackbox(path64):
    rep = uniform_kmedian(path64, 2, SamplerParams(k=2, seed=0), solver=BruteForceSolver())
    assert rep.solver == "brute-force"
    assert rep.final_cost <= 10 * 512.0


def test_child_seed_has_no_side_effects():
    s = np.random.SeedSequence(5)
    a = child_seed(s, 0)
    b = child_seed(s, 0)
    assert a.generate_state(4).tolist() == b.generate_state(4).tolist()
    assert child_seed(5, 1).generate_state(2).tolist() != a.generate_state(2).tolist()


def test_report_record_round_trip(path64):
    rep = uniform_kmedian(path64, 2, SamplerParams(k=2, seed=0))
    rec = rep.record(path64)
    assert ReportRecord.from_json(rec.to_json()) == rec
    no_t = rep.record(path64, timings=False)
    assert "stage_timings_ms" not in no_t.to_json()
    assert ReportRecord.from_json(no_t.to_json()) == no_t
    keys = set(rec.to_dict())
    assert {"k", "mode", "seed", "alpha", "beta", "k_prime", "final_centers", "final_cost",
            "c_sigma", "stage_timings_ms", "rounds", "image_size"} <= keys
    assert set(rec.stage_timings_ms) == {"sampling", "contraction", "blackbox"}


@settings(max_examples=15, deadline=None)
@given(n=st.integers(50, 600), k=st.integers(1, 5), seed=st.integers(0, 1000))
def test_pipeline_invariants(n, k, seed):
    rng = np.random.default_rng(seed)
    inst = Instance.from_coordinates(rng.uniform(0, 1, (n, 2)), rng.uniform(1, 20, n))
    rep = weighted_kmedian(inst, k, SamplerParams(k=k, alpha=1.0, seed=seed))
    assert len(rep.final) <= k
    assert rep.final_cost == cost_config(inst, rep.final)
    assert rep.image_size <= k * len(rep.per_class)


def test_small_instances_with_active_sampling():
    # at n <= 14 the default alpha leaves the sampler idle; alpha=1 (k'=4) forces rounds
    from conftest import brute_opt

    rounds = 0
    for seed in range(60):
        rng = np.random.default_rng(seed)
        n, k = int(rng.integers(8, 15)), int(rng.integers(1, 4))
        X = rng.normal(size=(n, 2))
        inst = Instance.from_coordinates(X)
        rep = uniform_kmedian(inst, k, SamplerParams(k=k, alpha=1.0, seed=seed))
        rounds += rep.rounds
        opt = brute_opt([tuple(p) for p in X], k, math.dist)[0]
        assert rep.final_cost <= 10 * opt
    assert rounds > 0
