"""Deployment constraints, node descriptors, ontology matching and the
embedded-node resource check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .model import (
    Feature,
    FeatureModel,
    ModelKind,
    NodeClass,
    SourceSpan,
    Violation,
)


@dataclass(frozen=True)
class HostedBy:
    node: str
    feature: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __str__(self):
        return f"hostedby({self.node}, {self.feature})"


@dataclass(frozen=True)
class NotHostedBy:
    node: str
    feature: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __str__(self):
        return f"nothostedby({self.node}, {self.feature})"


class _Pair:
    """Symmetric binary relation over two application features."""

    keyword = ""

    def __init__(self, a: str, b: str, span: Optional[SourceSpan] = None):
        self.a = a
        self.b = b
        self.span = span

    @property
    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))

    def __eq__(self, other):
        return type(self) is type(other) and self.pair == other.pair

    def __hash__(self):
        return hash((type(self).__name__, self.pair))

    def __repr__(self):
        return f"{type(self).__name__}({self.a!r}, {self.b!r})"

    def __str__(self):
        return f"{self.keyword}({self.a}, {self.b})"


class Colocated(_Pair):
    keyword = "colocated"


class Separated(_Pair):
    keyword = "separated"


DeploymentConstraint = Union[HostedBy, NotHostedBy, Colocated, Separated]


@dataclass(frozen=True)
class DeploymentSpec:
    constraints: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def of_type(self, *types) -> list:
        return [c for c in self.constraints if isinstance(c, types)]

    def pinned_nodes(self, feature: str) -> set[str]:
        return {c.node for c in self.of_type(HostedBy) if c.feature == feature}

    def excluded_nodes(self, feature: str) -> set[str]:
        return {c.node for c in self.of_type(NotHostedBy) if c.feature == feature}

    def mentions(self, node: str, feature: str) -> bool:
        return any(c.node == node and c.feature == feature for c in self.of_type(HostedBy, NotHostedBy))

    def subset(self, keep: Iterable) -> "DeploymentSpec":
        keep = list(keep)
        return DeploymentSpec(tuple(c for c in self.constraints if any(c is k for k in keep)))


@dataclass(frozen=True)
class NodeDescriptor:
    id: str
    model: FeatureModel
    node_class: NodeClass
    capacities: Mapping[str, int]

    @classmethod
    def from_model(cls, model: FeatureModel) -> "NodeDescriptor":
        if model.kind is not ModelKind.DEPLOYMENT_NODE or model.node_class is None:
            raise ValueError(f"model {model.name!r} is not a deployment-node model")
        caps: dict[str, int] = {}
        for f in _default_features(model):
            for a in f.attributes:
                caps[a.resource] = caps.get(a.resource, 0) + a.amount * max(1, f.cardinality.lower)
        return cls(model.name, model, model.node_class, caps)

    @property
    def embedded(self) -> bool:
        return self.node_class is NodeClass.EMBEDDED

    @property
    def offered(self) -> frozenset:
        return frozenset(self.capacities)


def _default_features(model: FeatureModel):
    # node models are variability-free in practice; take the mandatory closure
    for f in model.preorder():
        if model.always_selected(f.id):
            yield f


def find_match(feature: Feature, node: NodeDescriptor) -> bool:
    """Whether ``node`` offers every resource type ``feature`` declares.

    Amounts are not compared here.
    """
    assert feature.attributes, f"find_match called on unattributed feature {feature.id!r}"
    return all(r in node.offered for r in feature.resources)


def resource_usage(hosted: Mapping[Feature, int]) -> dict[str, int]:
    usage: dict[str, int] = {}
    for f, count in hosted.items():
        for a in f.attributes:
            usage[a.resource] = usage.get(a.resource, 0) + count * a.amount
    return usage


def resource_violations(node: NodeDescriptor, hosted: Mapping[Feature, int]) -> list[str]:
    """Diagnostics for each resource type whose summed load exceeds ``node``'s capacity."""
    if not node.embedded:
        return []
    out = []
    for r, used in sorted(resource_usage(hosted).items()):
        if r not in node.capacities:
            if used > 0:
                out.append(f"{node.id} offers no {r} but hosted features need {used}")
        elif used > node.capacities[r]:
            out.append(f"{node.id}: {r} load {used} exceeds capacity {node.capacities[r]}")
    return out


def resource_verification(node: NodeDescriptor, hosted: Mapping[Feature, int]) -> bool:
    """Summed per-type load of ``hosted`` (count times amount) fits ``node``.

    Elastic nodes always pass.
    """
    return not resource_violations(node, hosted)


def check_spec_consistency(
    spec: DeploymentSpec, app: FeatureModel, nodes: Sequence[NodeDescriptor]
) -> list[Violation]:
    report: list[Violation] = []
    node_ids = {n.id for n in nodes}
    seen = set()
    for c in spec:
        key = c if isinstance(c, _Pair) else (type(c), c.node, c.feature)
        if key in seen:
            report.append(Violation("duplicate", f"duplicate constraint {c}"))
        seen.add(key)
        if isinstance(c, (HostedBy, NotHostedBy)):
            if c.node not in node_ids:
                report.append(Violation("unresolved-node", f"{c} names unknown node {c.node!r}", c.node))
            feats = [c.feature]
        else:
            feats = [c.a, c.b]
            if c.a == c.b:
                report.append(Violation("degenerate", f"{c} relates a feature to itself", c.a))
        for fid in feats:
            if fid not in app:
                report.append(Violation("unresolved-feature", f"{c} names unknown feature {fid!r}", fid))
            elif not app[fid].attributes:
                report.append(Violation("unplaced-feature", f"{c}: {fid!r} has no attributes and is never placed", fid))

    for h in spec.of_type(HostedBy):
        if NotHostedBy(h.node, h.feature) in spec.constraints:
            report.append(Violation("contradiction", f"{h} contradicts nothostedby({h.node}, {h.feature})", h.feature))
    for fid in sorted({h.feature for h in spec.of_type(HostedBy)}):
        pins = sorted(spec.pinned_nodes(fid))
        if len(pins) > 1:
            report.append(Violation("contradiction", f"{fid!r} is pinned to several nodes ({', '.join(pins)})", fid))
    col = {c.pair for c in spec.of_type(Colocated)}
    for s in spec.of_type(Separated):
        if s.pair in col:
            a, b = sorted(s.pair)
            report.append(Violation("contradiction", f"{a} and {b} are both colocated and separated", a))
    return report


__all__ = [
    "Colocated",
    "DeploymentConstraint",
    "DeploymentSpec",
    "HostedBy",
    "NodeDescriptor",
    "NotHostedBy",
    "Separated",
    "check_spec_consistency",
    "find_match",
    "resource_usage",
    "resource_verification",
    "resource_violations",
]
