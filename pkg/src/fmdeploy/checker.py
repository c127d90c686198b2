"""Configurations and the semantic validity check.

``is_valid_configuration`` is the reference semantics: the solver is tested
against a brute-force enumerator that filters with this function.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from .deploy import (
    Colocated,
    DeploymentSpec,
    NodeDescriptor,
    NotHostedBy,
    Separated,
    find_match,
    resource_verification,
)
from .errors import UnknownReferenceError
from .model import CrossKind, FeatureModel, GroupKind, Variability


class Configuration:
    """One product: instance counts per selected feature plus a hosting map.

    Features with count 0 are dropped from ``selection``; hosting is part of
    the identity, so two configurations with the same selection but different
    placements are distinct.
    """

    __slots__ = ("selection", "hosting", "_key")

    def __init__(self, selection: Mapping[str, int], hosting: Optional[Mapping[str, str]] = None):
        self.selection = {f: c for f, c in selection.items() if c}
        self.hosting = dict(hosting or {})
        self._key = (tuple(sorted(self.selection.items())), tuple(sorted(self.hosting.items())))

    @property
    def key(self):
        return self._key

    def selected(self, fid: str) -> bool:
        return self.selection.get(fid, 0) > 0

    def count(self, fid: str) -> int:
        return self.selection.get(fid, 0)

    def __eq__(self, other):
        return isinstance(other, Configuration) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        return f"Configuration({dict(self._key[0])!r}, {dict(self._key[1])!r})"

    def to_json(self) -> dict:
        return {"selected": dict(self._key[0]), "hosting": dict(self._key[1])}


def is_valid_configuration(
    model: FeatureModel,
    spec: DeploymentSpec,
    config: Configuration,
    nodes: Optional[Sequence[NodeDescriptor]] = None,
) -> bool:
    """Decide whether ``config`` is a valid product of ``model`` under ``spec``.

    With ``nodes=None`` only the feature-model rules are checked and the
    hosting map is ignored.  Otherwise every selected attributed feature must
    be placed on exactly one node whose offerings match the feature's
    resource types, never a NotHostedBy node, and the pinned node when a
    declared HostedBy exists for it (two different pins cannot both hold).  Colocated and
    Separated bind only when both features are selected, and the summed load
    on each embedded node must fit its capacities.
    """
    feats = model.features
    for fid in config.selection:
        if fid not in feats:
            raise UnknownReferenceError(f"configuration selects unknown feature {fid!r}")
    if nodes is not None:
        node_ids = {n.id for n in nodes}
        for fid, nid in config.hosting.items():
            if fid not in feats:
                raise UnknownReferenceError(f"configuration hosts unknown feature {fid!r}")
            if nid not in node_ids:
                raise UnknownReferenceError(f"configuration names unknown node {nid!r}")

    sel = config.selection
    if sel.get(model.root, 0) < 1:
        return False
    for fid, count in sel.items():
        f = feats[fid]
        if count < 0 or not (max(1, f.cardinality.lower) <= count <= f.cardinality.upper):
            return False
        if f.parent is not None and sel.get(f.parent, 0) < 1:
            return False

    for f in feats.values():
        if (f.parent is not None and f.variability is Variability.MANDATORY and f.group is None
                and sel.get(f.parent, 0) >= 1 and sel.get(f.id, 0) < 1):
            return False

    for g in model.groups:
        if g.kind is GroupKind.EXCLUSIVE and sel.get(g.owner, 0) >= 1:
            if sum(1 for m in g.members if sel.get(m, 0) >= 1) != 1:
                return False

    for xc in model.cross_constraints:
        a = sel.get(xc.antecedent, 0) >= 1
        b = sel.get(xc.consequent, 0) >= 1
        if xc.kind is CrossKind.IMPLIES and a and not b:
            return False
        if xc.kind is CrossKind.EXCLUDES and a and b:
            return False

    if nodes is None:
        return True
    return _deployment_ok(model, spec, config, nodes)


def _deployment_ok(model, spec, config, nodes) -> bool:
    sel = config.selection
    host = config.hosting
    by_id = {n.id: n for n in nodes}

    needs_host = {f.id for f in model.features.values()
                  if f.attributes and not f.is_node_feature and sel.get(f.id, 0) >= 1}
    if set(host) != needs_host:
        return False

    for fid in needs_host:
        nid = host[fid]
        pinned = spec.pinned_nodes(fid)
        if pinned and pinned != {nid}:
            return False
        if not find_match(model.features[fid], by_id[nid]):
            return False
        if NotHostedBy(nid, fid) in spec.constraints:
            return False

    for c in spec.of_type(Colocated, Separated):
        if c.a in host and c.b in host:
            same = host[c.a] == host[c.b]
            if isinstance(c, Colocated) and not same:
                return False
            if isinstance(c, Separated) and same:
                return False

    for node in nodes:
        load = {model.features[fid]: sel[fid] for fid, nid in host.items() if nid == node.id}
        if not resource_verification(node, load):
            return False
    return True
