"""Random problem instances for property tests and experiments.

Any object with the ``random.Random`` interface drives generation, which lets
hypothesis' ``st.randoms()`` shrink failing instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .deploy import (
    Colocated,
    DeploymentSpec,
    HostedBy,
    NodeDescriptor,
    NotHostedBy,
    Separated,
    check_spec_consistency,
)
from .model import (
    Attribute,
    Cardinality,
    CrossKind,
    CrossTreeConstraint,
    Feature,
    FeatureModel,
    Group,
    GroupKind,
    ModelKind,
    NodeClass,
    Variability,
)

RESOURCES = ("CPU", "RAM", "GPU")


@dataclass
class GenConfig:
    max_features: int = 12
    max_upper: int = 3
    max_nodes: int = 3
    max_constraints: int = 4
    max_cross: int = 2
    p_attributed: float = 0.45
    p_multi: float = 0.2
    p_group: float = 0.35
    max_amount: int = 6
    # keeps the brute-force oracle fast; the nominal space bound stays 10**7
    max_space: int = 200_000
    resources: tuple = RESOURCES


@dataclass
class Instance:
    app: FeatureModel
    nodes: list = field(default_factory=list)
    spec: DeploymentSpec = DeploymentSpec()


def random_model(rng: random.Random, cfg: GenConfig = GenConfig(), name: str = "m") -> FeatureModel:
    n = rng.randint(1, cfg.max_features)
    ids = [f"f{i}" for i in range(n)]
    parents = {ids[0]: None}
    for i in range(1, n):
        parents[ids[i]] = ids[rng.randrange(i)]

    kids: dict[str, list[str]] = {}
    for fid in ids[1:]:
        kids.setdefault(parents[fid], []).append(fid)

    group_of: dict[str, int] = {}
    groups = []
    for owner, cs in kids.items():
        pool = list(cs)
        idx = 0
        while len(pool) >= 2 and rng.random() < cfg.p_group:
            k = rng.randint(2, len(pool))
            members = rng.sample(pool, k)
            members.sort(key=ids.index)
            for m in members:
                pool.remove(m)
                group_of[m] = idx
            groups.append(Group(owner, idx, rng.choice(list(GroupKind)), tuple(members)))
            idx += 1

    features = {}
    for fid in ids:
        var = Variability.MANDATORY if rng.random() < 0.4 else Variability.OPTIONAL
        if fid in group_of or fid == ids[0]:
            var = rng.choice(list(Variability)) if fid != ids[0] else Variability.MANDATORY
        if rng.random() < cfg.p_multi:
            upper = rng.randint(2, cfg.max_upper)
            lower = rng.randint(1 if var is Variability.MANDATORY else 0, upper)
        else:
            upper, lower = 1, (0 if var is Variability.OPTIONAL and rng.random() < 0.5 else 1)
        attrs = ()
        if fid != ids[0] and rng.random() < cfg.p_attributed:
            res = rng.sample(cfg.resources, rng.randint(1, min(2, len(cfg.resources))))
            attrs = tuple(Attribute(r, rng.randint(0, cfg.max_amount)) for r in sorted(res))
        features[fid] = Feature(fid, fid, parents[fid], var, group_of.get(fid), Cardinality(lower, upper), attrs)

    cross = []
    if n >= 2:
        for _ in range(rng.randint(0, cfg.max_cross)):
            a, b = rng.sample(ids, 2)
            cross.append(CrossTreeConstraint(rng.choice(list(CrossKind)), a, b))
    return FeatureModel(name, ids[0], features, tuple(groups), tuple(cross))


def random_node(rng: random.Random, name: str, cfg: GenConfig = GenConfig()) -> NodeDescriptor:
    cls = rng.choice(list(NodeClass))
    offered = rng.sample(cfg.resources, rng.randint(1, len(cfg.resources)))
    root = name.lower()
    feats = {root: Feature(root)}
    for r in sorted(offered):
        fid = r.lower()
        feats[fid] = Feature(fid, fid, root, attributes=(Attribute(r, rng.randint(0, 3 * cfg.max_amount)),))
    model = FeatureModel(name, root, feats, kind=ModelKind.DEPLOYMENT_NODE, node_class=cls)
    return NodeDescriptor.from_model(model)


def random_spec(rng: random.Random, app: FeatureModel, nodes, cfg: GenConfig = GenConfig()) -> DeploymentSpec:
    placed = [f.id for f in app.attributed]
    out: list = []
    if not placed:
        return DeploymentSpec()
    for _ in range(rng.randint(0, cfg.max_constraints)):
        kind = rng.choice(("hostedby", "nothostedby", "colocated", "separated"))
        if kind in ("hostedby", "nothostedby"):
            cls = HostedBy if kind == "hostedby" else NotHostedBy
            c = cls(rng.choice(nodes).id, rng.choice(placed))
        elif len(placed) >= 2:
            a, b = rng.sample(placed, 2)
            c = (Colocated if kind == "colocated" else Separated)(a, b)
        else:
            continue
        trial = DeploymentSpec(tuple(out) + (c,))
        if not check_spec_consistency(trial, app, nodes):
            out.append(c)
    return DeploymentSpec(tuple(out))


def random_instance(rng: random.Random, cfg: GenConfig = GenConfig()) -> Instance:
    from .oracle import space_size

    for _ in range(1000):
        app = random_model(rng, cfg, name="app")
        nodes = [random_node(rng, f"N{i}", cfg) for i in range(rng.randint(1, cfg.max_nodes))]
        # node features join the application model as mandatory leaves
        if space_size(app, nodes) * 2 ** len(nodes) <= cfg.max_space:
            return Instance(app, nodes, random_spec(rng, app, nodes, cfg))
    raise RuntimeError("could not draw an instance within max_space")
