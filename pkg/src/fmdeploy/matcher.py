"""PossibleHost: graft node features onto the application model, derive
hosting constraints by ontology matching and enumerate every valid
deployment configuration."""

from __future__ import annotations

import time
from itertools import combinations
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .checker import Configuration
from .deploy import (
    Colocated,
    DeploymentSpec,
    HostedBy,
    NodeDescriptor,
    NotHostedBy,
    Separated,
    check_spec_consistency,
    find_match,
    resource_usage,
)
from .errors import InconsistentSpecError, UnknownReferenceError
from .model import Feature, FeatureModel, Variability
from .solver import DEFAULT_LIMIT, encode, enumerate_solutions


@dataclass(frozen=True)
class AugmentedModel:
    """Copy of the application model with node features and derived constraints."""

    base: FeatureModel
    node_features: tuple[str, ...]
    predefined: DeploymentSpec
    derived: tuple = ()

    @property
    def constraints(self) -> tuple:
        """Declared constraints followed by the ones added during matching."""
        return self.predefined.constraints + self.derived


def augment(app: FeatureModel, nodes: Sequence[NodeDescriptor], spec: DeploymentSpec) -> AugmentedModel:
    """Build the augmented model: node features under the root, then one
    HostedBy or NotHostedBy per (node, attributed feature) pair the
    developer did not already constrain."""
    features = dict(app.features)
    injected = []
    for node in nodes:
        if node.id not in features:
            features[node.id] = Feature(node.id, node.id, app.root, Variability.MANDATORY, is_node_feature=True)
        injected.append(node.id)
    base = FeatureModel(
        name=app.name,
        root=app.root,
        features=features,
        groups=app.groups,
        cross_constraints=app.cross_constraints,
        kind=app.kind,
        node_class=app.node_class,
    )
    derived = []
    attributed = base.attributed
    for node in nodes:
        for f in attributed:
            if spec.mentions(node.id, f.id):
                continue
            derived.append(HostedBy(node.id, f.id) if find_match(f, node) else NotHostedBy(node.id, f.id))
    return AugmentedModel(base, tuple(injected), spec, tuple(derived))


@dataclass
class SolutionSet:
    configurations: list[Configuration]
    usage: list[dict[str, dict[str, int]]]
    stats: dict = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.configurations)

    def __iter__(self):
        return iter(self.configurations)

    @property
    def count(self) -> int:
        return len(self.configurations)

    def as_set(self) -> set[Configuration]:
        return set(self.configurations)


def node_usage(model: FeatureModel, config: Configuration, nodes: Sequence[NodeDescriptor]) -> dict:
    out = {}
    for node in nodes:
        if node.embedded:
            load = {model.features[f]: config.count(f) for f, n in config.hosting.items() if n == node.id}
            used = resource_usage(load)
            out[node.id] = {r: used.get(r, 0) for r in sorted(set(used) | set(node.capacities))}
    return out


def possible_host(
    app: FeatureModel,
    nodes: Sequence[NodeDescriptor],
    spec: DeploymentSpec = DeploymentSpec(),
    limit: int = DEFAULT_LIMIT,
) -> SolutionSet:
    """Every valid deployment configuration of ``app`` over ``nodes``.

    Raises :class:`InconsistentSpecError` before searching when the spec
    contradicts itself.  An unhostable always-selected feature gives an
    empty set with a diagnostic.
    """
    if not nodes:
        raise ValueError("possible_host needs at least one node")
    report = check_spec_consistency(spec, app, nodes)
    if report:
        raise InconsistentSpecError(report)
    start = time.perf_counter()
    aug = augment(app, nodes, spec)
    enc = encode(aug, nodes)
    result = enumerate_solutions(enc, limit)
    elapsed = (time.perf_counter() - start) * 1000.0
    usage = [node_usage(aug.base, c, nodes) for c in result.configurations]
    stats = {
        "count": len(result.configurations),
        "elapsed_ms": round(elapsed, 3),
        "truncated": result.truncated,
        "derived_constraints": len(aug.derived),
        "search_nodes": result.nodes_visited,
    }
    return SolutionSet(result.configurations, usage, stats, list(enc.diagnostics), result.truncated)


def relational_subsets(spec: DeploymentSpec, max_size: Optional[int] = None) -> list[tuple[str, DeploymentSpec]]:
    """Spec variants for the counting table.

    HostedBy/NotHostedBy are always kept.  Colocated/Separated vary over the
    empty set, each single constraint and the full set; ``max_size`` instead
    takes every subset up to that size.
    """
    base = spec.of_type(HostedBy, NotHostedBy)
    rel = spec.of_type(Colocated, Separated)
    if max_size is None:
        picks = [()] + [(c,) for c in rel]
        if len(rel) > 1:
            picks.append(tuple(rel))
    else:
        picks = [p for k in range(min(max_size, len(rel)) + 1) for p in combinations(rel, k)]
    out = []
    for p in picks:
        label = "none" if not p else ("all" if len(p) == len(rel) > 1 else " & ".join(str(c) for c in p))
        out.append((label, spec.subset(base + list(p))))
    return out


def subset_counts(app, nodes, spec, max_size=None, limit=DEFAULT_LIMIT) -> list[dict]:
    rows = []
    for label, sub in relational_subsets(spec, max_size):
        ss = possible_host(app, nodes, sub, limit)
        rows.append({
            "subset": label,
            "constraints": [str(c) for c in sub],
            "count": ss.count,
            "truncated": ss.truncated,
            "elapsed_ms": ss.stats["elapsed_ms"],
        })
    return rows


@dataclass
class Explanation:
    feature: str
    reasons: list[tuple[str, str]] = field(default_factory=list)  # (node id or "*", message)

    def __bool__(self):
        return bool(self.reasons)

    def __str__(self):
        return "\n".join(f"{n}: {m}" for n, m in self.reasons)


def explain_infeasibility(
    app: FeatureModel,
    nodes: Sequence[NodeDescriptor],
    spec: DeploymentSpec,
    feature: str,
    limit: int = DEFAULT_LIMIT,
) -> Explanation:
    """Why ``feature`` appears in no valid configuration; empty if it does."""
    if feature not in app:
        raise UnknownReferenceError(f"unknown feature {feature!r}")
    ss = possible_host(app, nodes, spec, limit)
    exp = Explanation(feature)
    if any(c.selected(feature) for c in ss):
        return exp

    f = app[feature]
    candidates = {}
    if f.attributes:
        candidates = {feature: _candidates(f, nodes, spec, exp.reasons)}
    for c in spec.of_type(Colocated, Separated):
        if feature not in (c.a, c.b):
            continue
        other = c.b if c.a == feature else c.a
        theirs = _candidates(app[other], nodes, spec, None)
        mine = candidates.get(feature, set())
        if isinstance(c, Colocated) and mine and theirs and not (mine & theirs):
            exp.reasons.append(("*", f"colocation conflict: {c} but {feature} can only go to "
                                     f"{', '.join(sorted(mine))} and {other} only to {', '.join(sorted(theirs))}"))
        if isinstance(c, Separated) and len(mine) == 1 and mine == theirs:
            exp.reasons.append(("*", f"separation conflict: {c} but both can only go to {next(iter(mine))}"))
    if not exp.reasons:
        exp.reasons.append(("*", f"no valid configuration selects {feature} (feature-model or resource constraints)"))
    return exp


def _candidates(f: Feature, nodes, spec: DeploymentSpec, reasons: Optional[list]) -> set[str]:
    pinned = spec.pinned_nodes(f.id)
    ok = set()
    for node in nodes:
        why = None
        if NotHostedBy(node.id, f.id) in spec.constraints:
            why = f"blocked by nothostedby({node.id}, {f.id})"
        elif len(pinned) > 1:
            why = f"{f.id} is pinned to several nodes ({', '.join(sorted(pinned))})"
        elif pinned and node.id not in pinned:
            why = f"{f.id} is pinned to {next(iter(pinned))}"
        elif not find_match(f, node):
            missing = [r for r in f.resources if r not in node.offered]
            why = ", ".join(f"{r} missing" for r in missing)
        elif node.embedded:
            need = {r: max(1, f.cardinality.lower) * f.amount(r) for r in f.resources}
            over = [r for r, amt in need.items() if amt > node.capacities.get(r, 0)]
            if over:
                why = ", ".join(f"needs {r}={need[r]} but capacity is {node.capacities.get(r, 0)}" for r in over)
        if why is None:
            ok.add(node.id)
        elif reasons is not None:
            reasons.append((node.id, why))
    return ok
