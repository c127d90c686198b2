import itertools

import pytest
from hypothesis import given, strategies as st

from fmdeploy.checker import Configuration
from fmdeploy.deploy import Colocated, DeploymentSpec, HostedBy, Separated
from fmdeploy.dsl import parse_model
from fmdeploy.errors import BoundExceededError
from fmdeploy.generate import random_instance
from fmdeploy.matcher import AugmentedModel, augment, possible_host
from fmdeploy.oracle import brute_force_enumerate, space_size
from fmdeploy.solver import UNPLACED, canonical_key, encode, enumerate_solutions

from conftest import node

ELASTIC = "model Cloud class elastic { mandatory c (CPU=1) }"


def solve(app_text, nodes=(), spec=DeploymentSpec()):
    app = parse_model(app_text)
    nodes = list(nodes) or [node(ELASTIC)]
    aug = augment(app, nodes, spec)
    return aug, nodes, enumerate_solutions(encode(aug, nodes))


def test_single_feature_encoding():
    app = parse_model("model m { mandatory r }")
    enc = encode(augment(app, [], DeploymentSpec()), [])
    assert enc.space.selection_vars == [("sel", "r")]
    assert enc.space.domains[("sel", "r")] == (1,)
    assert enc.constraints == [] and enc.space.hosting_vars == []
    assert [c.selection for c in enumerate_solutions(enc).configurations] == [{"r": 1}]


def test_pinned_keypad_domain(app, nodes, spec):
    enc = encode(augment(app, nodes, spec), nodes)
    assert enc.space.hosting_domain("keypad") == ["HAB"]
    assert enc.space.hosting_domain("bayesian") == ["CloudVM"]
    assert set(enc.space.hosting_domain("pca")) == {"HAB", "CloudVM"}
    kinds = {c.kind for c in enc.constraints}
    assert {"tree-link", "mandatory-link", "xor-exactly-one", "implies", "colocated-eq",
            "separated-neq", "hosted-pin", "resource-sum-leq"} <= kinds


def test_live_streaming_resource_coefficient():
    app = parse_model("model m { mandatory r { optional live_streaming [0..3] (CPU=30) } }")
    box = node("model Box class embedded { mandatory b (CPU=100) }")
    aug = augment(app, [box], DeploymentSpec())
    enc = encode(aug, [box])
    (rc,) = [c for c in enc.constraints if c.kind == "resource-sum-leq"]
    assert rc.coefficients == (30,) and rc.bound == 100 and rc.label == "Box.CPU"
    counts = sorted(c.count("live_streaming") for c in enumerate_solutions(enc).configurations)
    # arithmetic oracle: 30 * k <= 100
    assert counts == [k for k in range(4) if 30 * k <= 100]
    tight = node("model Box class embedded { mandatory b (CPU=80) }")
    counts = sorted(c.count("live_streaming") for c in possible_host(app, [tight]))
    assert counts == [0, 1, 2]


def test_count_variables_follow_cardinality(app, nodes, spec):
    enc = encode(augment(app, nodes, spec), nodes)
    assert enc.space.count_vars == [("sel", "live_streaming")]
    assert enc.space.domains[("sel", "live_streaming")] == (0, 1, 2, 3)


def test_toy_xor():
    _, _, res = solve("model m { mandatory r { xor { optional a optional b } } }")
    assert len(res.configurations) == 2


def test_toy_or():
    _, _, res = solve("model m { mandatory r { or { optional a optional b } } }")
    assert sorted(sorted(c.selection) for c in res.configurations) == [
        ["Cloud", "a", "b", "r"], ["Cloud", "a", "r"], ["Cloud", "b", "r"], ["Cloud", "r"]]


def test_fixture_matches_oracle(app, nodes, spec):
    aug = augment(app, nodes, spec)
    res = enumerate_solutions(encode(aug, nodes))
    expected = brute_force_enumerate(aug, nodes, bound=10**8)
    assert len(res.configurations) == len(expected) and set(res.configurations) == set(expected)


def test_brute_force_root_only():
    app = parse_model("model m { mandatory r }")
    assert brute_force_enumerate(augment(app, [], DeploymentSpec()), []) == [Configuration({"r": 1})]


def test_brute_force_contradictory_spec():
    app = parse_model("model m { mandatory r { mandatory a (CPU=1) mandatory b (CPU=1) } }")
    nodes = [node(ELASTIC), node("model Other class elastic { mandatory o (CPU=1) }")]
    spec = DeploymentSpec((Colocated("a", "b"), Separated("a", "b")))
    # bypasses the consistency check on purpose
    aug = AugmentedModel(augment(app, nodes, DeploymentSpec()).base, ("Cloud", "Other"), spec)
    assert brute_force_enumerate(aug, nodes) == []
    assert enumerate_solutions(encode(aug, nodes)).configurations == []


def test_brute_force_refuses_large_spaces(app, nodes, spec):
    aug = augment(app, nodes, spec)
    size = space_size(aug.base, nodes)
    with pytest.raises(BoundExceededError) as exc:
        brute_force_enumerate(aug, nodes)
    assert exc.value.size == size > 10**7


def test_truncation_flag(app, nodes, spec):
    aug = augment(app, nodes, spec)
    res = enumerate_solutions(encode(aug, nodes), limit=5)
    assert res.truncated and len(res.configurations) == 5
    full = enumerate_solutions(encode(aug, nodes), limit=10**6)
    assert not full.truncated


def test_unhostable_mandatory_feature_diagnosed():
    _, _, res = solve("model m { mandatory r { mandatory v (GPU=1) } }")
    assert res.configurations == []
    app = parse_model("model m { mandatory r { mandatory v (GPU=1) } }")
    enc = encode(augment(app, [node(ELASTIC)], DeploymentSpec()), [node(ELASTIC)])
    assert enc.diagnostics == ["no feasible host for always-selected feature 'v'"]


def test_pin_to_unmatched_node_diagnosed():
    app = parse_model("model m { mandatory r { optional v (GPU=1) } }")
    nodes = [node(ELASTIC)]
    enc = encode(augment(app, nodes, DeploymentSpec((HostedBy("Cloud", "v"),))), nodes)
    assert any("does not offer" in d for d in enc.diagnostics)
    assert enc.space.domains[("host", "v")] == (UNPLACED,)


def instances():
    return st.randoms(use_true_random=False).map(random_instance)


@given(instances())
def test_canonical_order_without_duplicates(inst):
    aug = augment(inst.app, inst.nodes, inst.spec)
    res = enumerate_solutions(encode(aug, inst.nodes))
    feats = list(aug.base.features)
    keys = [canonical_key(c, feats) for c in res.configurations]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)


@given(instances())
def test_oracle_equivalence(inst):
    aug = augment(inst.app, inst.nodes, inst.spec)
    got = enumerate_solutions(encode(aug, inst.nodes)).configurations
    expected = brute_force_enumerate(aug, inst.nodes)
    assert len(got) == len(expected) and set(got) == set(expected)


def _load(aug, config, nid, r):
    return sum(config.count(f) * aug.base[f].amount(r) for f, n in config.hosting.items() if n == nid)


def test_resource_inequality_is_tight(app, nodes, spec):
    aug = augment(app, nodes, spec)
    hab = nodes[0]
    configs = possible_host(app, nodes, spec).configurations
    for r, cap in hab.capacities.items():
        loads = [_load(aug, c, "HAB", r) for c in configs]
        assert max(loads) <= cap
        peak = max(loads)
        lowered = type(hab)(hab.id, hab.model, hab.node_class, dict(hab.capacities, **{r: peak - 1}))
        survivors = possible_host(app, [lowered, nodes[1]], spec).as_set()
        heavy = {c for c, load in zip(configs, loads) if load == peak}
        assert heavy and not (heavy & survivors)
        # nothing else is lost
        assert survivors == {c for c, load in zip(configs, loads) if load < peak}
