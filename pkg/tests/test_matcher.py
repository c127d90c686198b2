import copy
import pickle

import pytest
from hypothesis import given, strategies as st

from fmdeploy.checker import Configuration, is_valid_configuration
from fmdeploy.deploy import Colocated, DeploymentSpec, HostedBy, NotHostedBy, Separated, check_spec_consistency
from fmdeploy.dsl import parse_model
from fmdeploy.errors import InconsistentSpecError, UnknownReferenceError
from fmdeploy.generate import random_instance
from fmdeploy.matcher import augment, explain_infeasibility, possible_host, relational_subsets
from fmdeploy.oracle import brute_force_enumerate
from fmdeploy.model import Variability

from conftest import node

EMBEDDED_CPU1 = "model Box class embedded { mandatory box (CPU=1) }"
NO_GPU_A = "model A class embedded { mandatory a (CPU=10, RAM=10) }"
NO_GPU_B = "model B class elastic { mandatory b (CPU=10) }"


def instances():
    return st.randoms(use_true_random=False).map(random_instance)


def test_augment_injects_nodes_and_copies(app, nodes, spec):
    aug = augment(app, nodes, spec)
    assert aug.base is not app and "HAB" not in app
    assert aug.node_features == ("HAB", "CloudVM")
    for nid in aug.node_features:
        f = aug.base[nid]
        assert f.is_node_feature and f.parent == app.root and f.variability is Variability.MANDATORY
    assert set(spec.constraints) <= set(aug.constraints)
    # the developer already placed (HAB, keypad), so matching skips that pair
    assert [c for c in aug.derived if c.feature == "keypad"] == [HostedBy("CloudVM", "keypad")]
    # bayesian needs a GPU
    assert NotHostedBy("HAB", "bayesian") in aug.derived
    assert HostedBy("CloudVM", "bayesian") in aug.derived


def test_fixture_solution_set_respects_spec(app, nodes, spec):
    ss = possible_host(app, nodes, spec)
    assert ss.count > 0 and not ss.truncated
    for c in ss:
        assert c.hosting["keypad"] == "HAB"
        if c.selected("bayesian") and c.selected("live_streaming"):
            assert c.hosting["bayesian"] == c.hosting["live_streaming"]
        if c.selected("smart_phone") and c.selected("bayesian"):
            assert c.hosting["smart_phone"] != c.hosting["bayesian"]
    assert len(ss.usage) == ss.count
    for u in ss.usage:
        assert set(u) == {"HAB"} and u["HAB"]["CPU"] <= 100 and u["HAB"]["RAM"] <= 512


def test_basic_variant_survives(app, nodes, spec):
    ss = possible_host(app, nodes, spec)
    basic = Configuration({"control_admittance": 1, "keypad": 1, "performance": 1, "low": 1, "HAB": 1, "CloudVM": 1},
                          {"keypad": "HAB"})
    assert basic in ss.as_set()


def test_unhostable_feature_gives_empty_set_and_diagnostic():
    app = parse_model("model m { mandatory r { mandatory vision (GPU=1) } }")
    ss = possible_host(app, [node(NO_GPU_A), node(NO_GPU_B)])
    assert ss.count == 0
    assert any("vision" in d for d in ss.diagnostics)


def test_toy_single_cpu_node():
    app = parse_model("model t { mandatory r { optional a (CPU=1) optional b (CPU=1) } }")
    nodes = [node(EMBEDDED_CPU1)]
    ss = possible_host(app, nodes)
    assert ss.count == 3
    # exhaustive over the four subsets against the resource inequality
    expected = set()
    for a in (0, 1):
        for b in (0, 1):
            if a + b <= 1:
                sel = {"r": 1, "Box": 1, "a": a, "b": b}
                expected.add(Configuration(sel, {f: "Box" for f in ("a", "b") if sel[f]}))
    assert ss.as_set() == expected


def test_empty_node_list_rejected(app):
    with pytest.raises(ValueError):
        possible_host(app, [])


def test_inconsistent_spec_rejected_before_search(app, nodes):
    with pytest.raises(InconsistentSpecError) as exc:
        possible_host(app, nodes, DeploymentSpec((Colocated("pca", "bayesian"), Separated("pca", "bayesian"))))
    assert exc.value.report


def test_solution_cap_truncates(app, nodes, spec):
    ss = possible_host(app, nodes, spec, limit=10)
    assert ss.truncated and ss.count == 10


@given(instances(), st.randoms(use_true_random=False))
def test_node_order_does_not_matter(inst, rng):
    shuffled = list(inst.nodes)
    rng.shuffle(shuffled)
    assert possible_host(inst.app, inst.nodes, inst.spec).as_set() == \
        possible_host(inst.app, shuffled, inst.spec).as_set()


@given(instances(), st.randoms(use_true_random=False))
def test_adding_a_constraint_never_adds_solutions(inst, rng):
    placed = [f.id for f in inst.app.attributed]
    if not placed:
        return
    kind = rng.choice((HostedBy, NotHostedBy, Colocated, Separated))
    if kind in (HostedBy, NotHostedBy):
        c = kind(rng.choice(inst.nodes).id, rng.choice(placed))
    elif len(placed) >= 2:
        c = kind(*rng.sample(placed, 2))
    else:
        return
    bigger = DeploymentSpec(inst.spec.constraints + (c,))
    if c in inst.spec.constraints or check_spec_consistency(bigger, inst.app, inst.nodes):
        return
    before = possible_host(inst.app, inst.nodes, inst.spec).as_set()
    after = possible_host(inst.app, inst.nodes, bigger).as_set()
    assert after <= before


@given(instances())
def test_input_model_untouched(inst):
    before = pickle.dumps(inst.app)
    snapshot = copy.deepcopy(inst.app)
    possible_host(inst.app, inst.nodes, inst.spec)
    assert pickle.dumps(inst.app) == before and inst.app == snapshot


@given(instances())
def test_soundness(inst):
    aug = augment(inst.app, inst.nodes, inst.spec)
    ss = possible_host(inst.app, inst.nodes, inst.spec)
    assert len(ss.as_set()) == ss.count
    for c in ss:
        assert is_valid_configuration(aug.base, inst.spec, c, inst.nodes)


def test_relational_subsets_keep_pins(spec):
    subs = relational_subsets(spec)
    assert [label for label, _ in subs] == ["none", "colocated(bayesian, live_streaming)",
                                            "separated(smart_phone, bayesian)", "all"]
    for _, s in subs:
        assert HostedBy("HAB", "keypad") in s.constraints
    assert len(relational_subsets(spec, max_size=2)) == 4


def test_explain_missing_gpu():
    app = parse_model("model m { mandatory r { optional vision (CPU=1, GPU=1) } }")
    exp = explain_infeasibility(app, [node(NO_GPU_A), node(NO_GPU_B)], DeploymentSpec(), "vision")
    assert exp.reasons == [("A", "GPU missing"), ("B", "GPU missing")]


def test_explain_colocation_conflict():
    app = parse_model("model m { mandatory r { mandatory x (CPU=1) mandatory y (CPU=1) } }")
    nodes = [node(NO_GPU_A), node(NO_GPU_B)]
    spec = DeploymentSpec((HostedBy("A", "x"), HostedBy("B", "y"), Colocated("x", "y")))
    assert brute_force_enumerate(augment(app, nodes, spec), nodes) == []
    exp = explain_infeasibility(app, nodes, spec, "x")
    assert any(n == "*" and "colocation conflict" in msg for n, msg in exp.reasons)


def test_explain_feasible_feature_is_empty(app, nodes, spec):
    exp = explain_infeasibility(app, nodes, spec, "keypad")
    assert not exp and exp.reasons == []


def test_explain_unknown_feature(app, nodes, spec):
    with pytest.raises(UnknownReferenceError):
        explain_infeasibility(app, nodes, spec, "ghost")
