import itertools

import pytest
from hypothesis import given, strategies as st

from fmdeploy.checker import Configuration, is_valid_configuration
from fmdeploy.deploy import (
    Colocated,
    DeploymentSpec,
    HostedBy,
    NodeDescriptor,
    NotHostedBy,
    Separated,
    check_spec_consistency,
    find_match,
    resource_verification,
)
from fmdeploy.generate import random_instance
from fmdeploy.matcher import augment, possible_host
from fmdeploy.model import Attribute, Feature, FeatureModel, ModelKind, NodeClass

RES = ("CPU", "RAM", "GPU", "IO")


def make_node(caps, cls=NodeClass.EMBEDDED, nid="N"):
    m = FeatureModel(nid, "n", {"n": Feature("n")}, kind=ModelKind.DEPLOYMENT_NODE, node_class=cls)
    return NodeDescriptor(nid, m, cls, dict(caps))


def feat(fid, **amounts):
    return Feature(fid, parent="r", attributes=tuple(Attribute(r, a) for r, a in amounts.items()))


def test_keypad_matches_hab(app, nodes):
    hab = nodes[0]
    assert hab.offered == {"CPU", "RAM"}
    assert find_match(app["keypad"], hab)


def test_match_needs_every_resource_type():
    assert not find_match(feat("f", CPU=1, GPU=1), make_node({"CPU": 10, "RAM": 10}))


def test_match_ignores_amounts():
    assert find_match(feat("f", CPU=1000), make_node({"CPU": 1}))


def test_unattributed_feature_is_a_precondition_violation():
    with pytest.raises(AssertionError):
        find_match(Feature("f"), make_node({"CPU": 1}))


@given(st.sets(st.sampled_from(RES), min_size=1), st.sets(st.sampled_from(RES)), st.sets(st.sampled_from(RES)))
def test_find_match_monotone_in_offerings(need, offered, extra):
    f = feat("f", **{r: 1 for r in need})
    before = find_match(f, make_node({r: 1 for r in offered}))
    after = find_match(f, make_node({r: 1 for r in offered | extra}))
    assert not (before and not after)


def test_overload_fails():
    node = make_node({"CPU": 100})
    assert not resource_verification(node, {feat("f1", CPU=60): 1, feat("f2", CPU=60): 1})


def test_empty_load_fits():
    assert resource_verification(make_node({"CPU": 100, "RAM": 512}), {})


def test_live_streaming_cutoff():
    ls = feat("live_streaming", CPU=30)
    for cap in (100, 80):
        node = make_node({"CPU": cap})
        for count in range(4):
            # arithmetic oracle: 30 * count against capacity
            assert resource_verification(node, {ls: count}) == (30 * count <= cap)
    assert resource_verification(make_node({"CPU": 100}), {ls: 3})
    assert not resource_verification(make_node({"CPU": 80}), {ls: 3})


def test_missing_resource_type_rejected_not_crash():
    assert not resource_verification(make_node({"CPU": 100}), {feat("f", GPU=1): 1})
    assert resource_verification(make_node({"CPU": 100}), {feat("f", GPU=0): 1})


loads = st.lists(st.tuples(st.dictionaries(st.sampled_from(RES), st.integers(0, 50), min_size=1),
                           st.integers(1, 3)), max_size=5)
caps = st.dictionaries(st.sampled_from(RES), st.integers(0, 120))


def _hosted(spec):
    return {feat(f"f{i}", **amounts): n for i, (amounts, n) in enumerate(spec)}


@given(caps, loads, st.dictionaries(st.sampled_from(RES), st.integers(0, 50), min_size=1), st.integers(1, 3))
def test_verification_antitone_in_load(capacity, load, extra, n):
    node = make_node(capacity)
    hosted = _hosted(load)
    grown = dict(hosted)
    grown[feat("extra", **extra)] = n
    assert not (not resource_verification(node, hosted) and resource_verification(node, grown))
    raised = {f: k + 1 for f, k in hosted.items()}
    assert not (not resource_verification(node, hosted) and resource_verification(node, raised))


@given(caps, loads)
def test_elastic_nodes_never_fail(capacity, load):
    assert resource_verification(make_node(capacity, NodeClass.ELASTIC), _hosted(load))


def test_colocated_and_separated_contradiction_found(app, nodes):
    report = check_spec_consistency(DeploymentSpec((Colocated("pca", "bayesian"), Separated("bayesian", "pca"))),
                                    app, nodes)
    assert [v.kind for v in report] == ["contradiction"]


def test_fixture_spec_is_consistent(app, nodes, spec):
    assert check_spec_consistency(spec, app, nodes) == []


def test_unknown_node_reported(app, nodes):
    report = check_spec_consistency(DeploymentSpec((HostedBy("unknown_node", "keypad"),)), app, nodes)
    assert [v.kind for v in report] == ["unresolved-node"]


def test_hosted_and_not_hosted_contradiction(app, nodes):
    spec = DeploymentSpec((HostedBy("HAB", "keypad"), NotHostedBy("HAB", "keypad")))
    assert [v.kind for v in check_spec_consistency(spec, app, nodes)] == ["contradiction"]


def test_pairs_are_symmetric():
    assert Colocated("a", "b") == Colocated("b", "a")
    assert hash(Separated("a", "b")) == hash(Separated("b", "a"))
    assert Colocated("a", "b") != Separated("a", "b")


def test_node_capacities_aggregate(nodes):
    hab, cloud = nodes
    assert hab.capacities == {"CPU": 100, "RAM": 512} and hab.embedded
    assert cloud.offered == {"CPU", "RAM", "GPU"} and not cloud.embedded


@given(st.randoms(use_true_random=False))
def test_swapping_pair_arguments_preserves_validity(rng):
    inst = random_instance(rng)
    pairs = inst.spec.of_type(Colocated, Separated)
    swapped = DeploymentSpec(tuple(type(c)(c.b, c.a) if c in pairs else c for c in inst.spec))
    m = augment(inst.app, inst.nodes, inst.spec).base
    placed = [f.id for f in m.attributed]
    sel = {f: 1 for f in m.features}
    for hosts in itertools.islice(itertools.product([n.id for n in inst.nodes], repeat=len(placed)), 50):
        cfg = Configuration(sel, dict(zip(placed, hosts)))
        assert (is_valid_configuration(m, inst.spec, cfg, inst.nodes)
                == is_valid_configuration(m, swapped, cfg, inst.nodes))
    assert possible_host(inst.app, inst.nodes, inst.spec).as_set() == \
        possible_host(inst.app, inst.nodes, swapped).as_set()
