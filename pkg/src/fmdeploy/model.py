"""Extended feature model data structures and structural validation.

A :class:`FeatureModel` is used both for the application and for every
deployment node.  Models are immutable once built; the feature mapping is
kept in tree preorder so that traversal order is stable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional


class ModelKind(str, enum.Enum):
    APPLICATION = "application"
    DEPLOYMENT_NODE = "deployment-node"


class NodeClass(str, enum.Enum):
    EMBEDDED = "embedded"
    ELASTIC = "elastic"


class Variability(str, enum.Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"


class GroupKind(str, enum.Enum):
    EXCLUSIVE = "xor"
    INCLUSIVE_OR = "or"


class CrossKind(str, enum.Enum):
    IMPLIES = "implies"
    EXCLUDES = "excludes"


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ResourceOntology:
    """Resource-type vocabulary shared by application and node models."""

    entries: Mapping[str, str]

    def __contains__(self, name):
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def unit(self, name: str) -> str:
        return self.entries[name]


DEFAULT_ONTOLOGY = ResourceOntology(
    {"CPU": "MIPS", "RAM": "MB", "GPU": "cores", "IO": "ports", "STORAGE": "MB"}
)


@dataclass(frozen=True)
class Cardinality:
    lower: int = 1
    upper: int = 1

    @property
    def selected_range(self) -> range:
        """Instance counts a selected feature may take (count 0 means absent)."""
        return range(max(1, self.lower), self.upper + 1)

    def __str__(self):
        return f"[{self.lower}..{self.upper}]"


ONE = Cardinality(1, 1)


@dataclass(frozen=True)
class Attribute:
    resource: str
    amount: int


@dataclass(frozen=True)
class Feature:
    id: str
    name: str = ""
    parent: Optional[str] = None
    variability: Variability = Variability.MANDATORY
    # index into the parent's groups, i.e. Group.index of the owning group
    group: Optional[int] = None
    cardinality: Cardinality = ONE
    attributes: tuple[Attribute, ...] = ()
    is_node_feature: bool = False
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)

    def amount(self, resource: str) -> int:
        return sum(a.amount for a in self.attributes if a.resource == resource)

    @property
    def resources(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(a.resource for a in self.attributes))


@dataclass(frozen=True)
class Group:
    owner: str
    index: int
    kind: GroupKind
    members: tuple[str, ...]


@dataclass(frozen=True)
class CrossTreeConstraint:
    kind: CrossKind
    antecedent: str
    consequent: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FeatureModel:
    name: str
    root: str
    features: Mapping[str, Feature]
    groups: tuple[Group, ...] = ()
    cross_constraints: tuple[CrossTreeConstraint, ...] = ()
    kind: ModelKind = ModelKind.APPLICATION
    node_class: Optional[NodeClass] = None

    def __post_init__(self):
        object.__setattr__(self, "features", dict(self.features))
        object.__setattr__(
            self, "groups", tuple(sorted(self.groups, key=lambda g: (g.owner, g.index)))
        )
        object.__setattr__(self, "cross_constraints", tuple(self.cross_constraints))

    def __getitem__(self, fid: str) -> Feature:
        return self.features[fid]

    def __contains__(self, fid) -> bool:
        return fid in self.features

    def __len__(self):
        return len(self.features)

    def children(self, fid: str) -> list[Feature]:
        return [f for f in self.features.values() if f.parent == fid]

    def groups_of(self, owner: str) -> list[Group]:
        return [g for g in self.groups if g.owner == owner]

    def group_of(self, feature: Feature) -> Optional[Group]:
        if feature.group is None:
            return None
        for g in self.groups:
            if g.owner == feature.parent and g.index == feature.group:
                return g
        return None

    def preorder(self) -> Iterator[Feature]:
        """Yield features root first, children in declaration order."""
        if self.root not in self.features:
            return
        kids: dict[Optional[str], list[str]] = {}
        for f in self.features.values():
            kids.setdefault(f.parent, []).append(f.id)
        seen = set()
        stack = [self.root]
        while stack:
            fid = stack.pop()
            if fid in seen:
                continue
            seen.add(fid)
            yield self.features[fid]
            stack.extend(reversed(kids.get(fid, [])))

    @property
    def attributed(self) -> list[Feature]:
        """Application features that need a hosting node."""
        return [f for f in self.preorder() if f.attributes and not f.is_node_feature]

    def always_selected(self, fid: str) -> bool:
        """True when the feature is reachable from the root through mandatory links only."""
        f = self.features[fid]
        while f.parent is not None:
            if f.variability is not Variability.MANDATORY or f.group is not None:
                return False
            f = self.features[f.parent]
        return True


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    subject: Optional[str] = None

    def __str__(self):
        return f"{self.kind}: {self.message}"


ValidationReport = list  # list[Violation]; empty means well-formed


def validate_model(model: FeatureModel, ontology: ResourceOntology = DEFAULT_ONTOLOGY) -> list[Violation]:
    """Return every structural problem of ``model``, in a stable order."""
    report: list[Violation] = []
    feats = model.features

    for key, f in feats.items():
        if key != f.id:
            report.append(Violation("duplicate-id", f"feature registered as {key!r} has id {f.id!r}", key))

    if model.root not in feats:
        report.append(Violation("dangling-reference", f"root {model.root!r} is not a feature", model.root))
    elif feats[model.root].parent is not None:
        report.append(Violation("structure", f"root {model.root!r} has a parent", model.root))

    for f in feats.values():
        if f.id != model.root and f.parent is None:
            report.append(Violation("structure", f"feature {f.id!r} has no parent", f.id))
        if f.parent is not None and f.parent not in feats:
            report.append(Violation("dangling-reference", f"parent {f.parent!r} of {f.id!r} does not exist", f.id))

    # one violation per distinct cycle
    cycles: list[frozenset] = []
    for f in feats.values():
        path: list[str] = []
        cur: Optional[str] = f.id
        while cur is not None and cur in feats and cur not in path:
            path.append(cur)
            cur = feats[cur].parent
        if cur is not None and cur in path:
            cyc = frozenset(path[path.index(cur):])
            if cyc not in cycles:
                cycles.append(cyc)
                members = " -> ".join(sorted(cyc))
                report.append(Violation("cycle", f"parent cycle through {members}", min(cyc)))

    for f in feats.values():
        c = f.cardinality
        if c.lower < 0 or c.upper < 1 or c.lower > c.upper:
            report.append(Violation("cardinality", f"invalid cardinality {c} on {f.id!r}", f.id))
        elif f.variability is Variability.MANDATORY and f.group is None and c.lower < 1:
            report.append(Violation("cardinality", f"mandatory feature {f.id!r} has lower bound 0", f.id))
        for a in f.attributes:
            if a.resource not in ontology:
                report.append(Violation(
                    "unknown-resource",
                    f"resource type {a.resource!r} on {f.id!r} is not in the ontology ({', '.join(ontology)})",
                    f.id,
                ))
            if a.amount < 0:
                report.append(Violation("attribute", f"negative amount for {a.resource} on {f.id!r}", f.id))
        if f.group is not None and model.group_of(f) is None:
            report.append(Violation("dangling-reference", f"{f.id!r} refers to a missing group", f.id))

    seen_groups = set()
    for g in model.groups:
        if (g.owner, g.index) in seen_groups:
            report.append(Violation("duplicate-id", f"group {g.index} of {g.owner!r} declared twice", g.owner))
        seen_groups.add((g.owner, g.index))
        if g.owner not in feats:
            report.append(Violation("dangling-reference", f"group owner {g.owner!r} does not exist", g.owner))
        if len(g.members) < 2:
            report.append(Violation("group", f"group of {g.owner!r} has fewer than two members", g.owner))
        for m in g.members:
            if m not in feats:
                report.append(Violation("dangling-reference", f"group member {m!r} does not exist", m))
            elif feats[m].parent != g.owner or feats[m].group != g.index:
                report.append(Violation("group", f"member {m!r} is not a child of group owner {g.owner!r}", m))

    for xc in model.cross_constraints:
        for ref in (xc.antecedent, xc.consequent):
            if ref not in feats:
                report.append(Violation("dangling-reference", f"constraint references unknown feature {ref!r}", ref))
        if xc.antecedent == xc.consequent:
            report.append(Violation("constraint", f"{xc.kind.value} constraint relates {xc.antecedent!r} to itself",
                                    xc.antecedent))

    if model.kind is ModelKind.DEPLOYMENT_NODE and model.node_class is None:
        report.append(Violation("structure", f"node model {model.name!r} has no class"))
    if model.kind is ModelKind.APPLICATION and model.node_class is not None:
        report.append(Violation("structure", f"application model {model.name!r} declares a node class"))
    return report
