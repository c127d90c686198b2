"""All-solutions constraint engine over an augmented feature model.

Every feature owns one integer variable holding its instance count; 0 means
unselected, so the selection boolean is ``count > 0``.  Every attributed
application feature also owns a hosting variable over node indices, with -1
standing for "not placed" (exactly when the feature is unselected).

Search is static-order backtracking (features in tree preorder, then hosting
variables) with a propagation queue run to fixpoint after each assignment.
Binary relations use support filtering, exclusive groups use counting
rules and resource sums use bounds reasoning on the minimum possible load.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .checker import Configuration
from .deploy import Colocated, HostedBy, NodeDescriptor, NotHostedBy, Separated, find_match
from .model import CrossKind, GroupKind, Variability

log = logging.getLogger(__name__)

DEFAULT_LIMIT = 1_000_000

UNPLACED = -1

Var = tuple  # ("sel", feature_id) or ("host", feature_id)


@dataclass
class VariableSpace:
    order: list[Var]
    domains: dict[Var, tuple[int, ...]]
    features: list[str]
    nodes: list[str]

    @property
    def selection_vars(self) -> list[Var]:
        return [v for v in self.order if v[0] == "sel"]

    @property
    def count_vars(self) -> list[Var]:
        """Selection variables whose selected range has more than one count."""
        return [v for v in self.selection_vars if len([x for x in self.domains[v] if x > 0]) > 1]

    @property
    def hosting_vars(self) -> list[Var]:
        return [v for v in self.order if v[0] == "host"]

    def hosting_domain(self, fid: str) -> list[str]:
        return [self.nodes[i] for i in self.domains[("host", fid)] if i != UNPLACED]


@dataclass(frozen=True)
class EncodedConstraint:
    kind: str
    scope: tuple[Var, ...]
    coefficients: tuple[int, ...] = ()
    bound: Optional[int] = None
    node: Optional[int] = None
    label: str = ""


@dataclass
class Encoding:
    space: VariableSpace
    constraints: list[EncodedConstraint]
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class SearchResult:
    configurations: list[Configuration]
    truncated: bool = False
    nodes_visited: int = 0


_RELATIONS = {
    "tree-link": lambda child, parent: child == 0 or parent > 0,
    "mandatory-link": lambda parent, child: parent == 0 or child > 0,
    "implies": lambda a, b: a == 0 or b > 0,
    "excludes": lambda a, b: a == 0 or b == 0,
    "host-link": lambda sel, host: (sel > 0) == (host != UNPLACED),
    "colocated-eq": lambda ha, hb: ha == UNPLACED or hb == UNPLACED or ha == hb,
    "separated-neq": lambda ha, hb: ha == UNPLACED or hb == UNPLACED or ha != hb,
}

BINARY_KINDS = frozenset(_RELATIONS)


def encode(augmented, nodes: Sequence[NodeDescriptor]) -> Encoding:
    """Translate an :class:`~fmdeploy.matcher.AugmentedModel` into variables and constraints."""
    model = augmented.base
    node_ids = [n.id for n in nodes]
    index = {nid: i for i, nid in enumerate(node_ids)}
    order: list[Var] = []
    domains: dict[Var, tuple[int, ...]] = {}
    cons: list[EncodedConstraint] = []
    diags: list[str] = []

    feats = list(model.preorder())
    for f in feats:
        v = ("sel", f.id)
        counts = tuple(f.cardinality.selected_range)
        domains[v] = counts if f.parent is None else (0,) + counts
        order.append(v)
        if f.parent is not None:
            cons.append(EncodedConstraint("tree-link", (v, ("sel", f.parent))))
            if f.variability is Variability.MANDATORY and f.group is None:
                cons.append(EncodedConstraint("mandatory-link", (("sel", f.parent), v)))

    for g in model.groups:
        if g.kind is GroupKind.EXCLUSIVE:
            scope = (("sel", g.owner),) + tuple(("sel", m) for m in g.members)
            cons.append(EncodedConstraint("xor-exactly-one", scope))

    for xc in model.cross_constraints:
        kind = "implies" if xc.kind is CrossKind.IMPLIES else "excludes"
        cons.append(EncodedConstraint(kind, (("sel", xc.antecedent), ("sel", xc.consequent))))

    declared = augmented.predefined
    derived = list(augmented.constraints)
    for f in model.attributed:
        pinned = declared.pinned_nodes(f.id)
        if pinned:
            # a pin narrows the candidates without waiving ontology matching;
            # two different pins on one feature cannot both hold
            allowed = {n.id for n in nodes if {n.id} == pinned and find_match(f, n)}
            if len(pinned) == 1 and not allowed:
                diags.append(f"{f.id!r} is pinned to {next(iter(pinned))!r}, which does not offer all of "
                             f"{', '.join(f.resources)}")
        else:
            allowed = {c.node for c in derived if isinstance(c, HostedBy) and c.feature == f.id}
        allowed -= {c.node for c in derived if isinstance(c, NotHostedBy) and c.feature == f.id}
        values = sorted(index[n] for n in allowed)
        hv = ("host", f.id)
        domains[hv] = (UNPLACED,) + tuple(values)
        cons.append(EncodedConstraint("host-link", (("sel", f.id), hv)))
        if pinned:
            cons.append(EncodedConstraint("hosted-pin", (hv,), tuple(values), label=f.id))
        if not values:
            if model.always_selected(f.id):
                diags.append(f"no feasible host for always-selected feature {f.id!r}")
            else:
                diags.append(f"feature {f.id!r} has no feasible host and is never selected")
    for fid in (f.id for f in model.attributed):
        order.append(("host", fid))

    for c in declared.of_type(Colocated, Separated):
        ha, hb = ("host", c.a), ("host", c.b)
        if ha in domains and hb in domains:
            kind = "colocated-eq" if isinstance(c, Colocated) else "separated-neq"
            cons.append(EncodedConstraint(kind, (ha, hb), label=str(c)))

    for ni, node in enumerate(nodes):
        if not node.embedded:
            continue
        hosted = [f for f in model.attributed if ni in domains[("host", f.id)]]
        resources = sorted({r for f in hosted for r in f.resources} | set(node.capacities))
        for r in resources:
            terms = [f for f in hosted if f.amount(r) > 0]
            if not terms:
                continue
            scope = tuple(v for f in terms for v in (("sel", f.id), ("host", f.id)))
            cons.append(EncodedConstraint(
                "resource-sum-leq",
                scope,
                coefficients=tuple(f.amount(r) for f in terms),
                bound=node.capacities.get(r, 0),
                node=ni,
                label=f"{node.id}.{r}",
            ))

    space = VariableSpace(order, domains, [f.id for f in feats], node_ids)
    return Encoding(space, cons, diags)


# -- propagators ---------------------------------------------------------

def _prop_binary(c: EncodedConstraint, d: dict) -> Optional[list]:
    rel = _RELATIONS[c.kind]
    a, b = c.scope
    da, db = d[a], d[b]
    na = tuple(x for x in da if any(rel(x, y) for y in db))
    nb = tuple(y for y in db if any(rel(x, y) for x in na))
    if not na or not nb:
        return None
    changed = []
    if len(na) != len(da):
        d[a] = na
        changed.append(a)
    if len(nb) != len(db):
        d[b] = nb
        changed.append(b)
    return changed


def _prop_pin(c: EncodedConstraint, d: dict) -> Optional[list]:
    (h,) = c.scope
    allowed = set(c.coefficients) | {UNPLACED}
    nh = tuple(x for x in d[h] if x in allowed)
    if not nh:
        return None
    if len(nh) != len(d[h]):
        d[h] = nh
        return [h]
    return []


def _prop_xor(c: EncodedConstraint, d: dict) -> Optional[list]:
    owner, *members = c.scope
    forced = [m for m in members if 0 not in d[m]]
    possible = [m for m in members if any(x > 0 for x in d[m])]
    changed = []
    owner_can_be_off = 0 in d[owner]
    owner_can_be_on = any(x > 0 for x in d[owner])
    if len(forced) > 1 or not possible:
        if not owner_can_be_off:
            return None
        if owner_can_be_on:
            d[owner] = (0,)
            changed.append(owner)
        return changed
    if owner_can_be_off:
        return changed
    # owner selected: exactly one member
    if len(forced) == 1:
        for m in possible:
            if m != forced[0]:
                if 0 not in d[m]:
                    return None
                d[m] = (0,)
                changed.append(m)
    elif len(possible) == 1:
        m = possible[0]
        nd = tuple(x for x in d[m] if x > 0)
        if len(nd) != len(d[m]):
            d[m] = nd
            changed.append(m)
    return changed


def _prop_resource(c: EncodedConstraint, d: dict) -> Optional[list]:
    node = c.node
    terms = []
    for k, amt in enumerate(c.coefficients):
        sv, hv = c.scope[2 * k], c.scope[2 * k + 1]
        ds, dh = d[sv], d[hv]
        positive = [x for x in ds if x > 0]
        elsewhere = any(h != node for h in dh)
        if 0 in ds or elsewhere or not positive:
            low = 0
        else:
            low = positive[0] * amt
        terms.append((sv, hv, amt, positive, elsewhere, low))
    total = sum(t[-1] for t in terms)
    if total > c.bound:
        return None
    changed = []
    for sv, hv, amt, positive, elsewhere, low in terms:
        slack = c.bound - (total - low)
        if not elsewhere:
            nd = tuple(x for x in d[sv] if x * amt <= slack)
            if not nd:
                return None
            if len(nd) != len(d[sv]):
                d[sv] = nd
                changed.append(sv)
        if positive and node in d[hv] and positive[0] * amt > slack:
            nh = tuple(h for h in d[hv] if h != node)
            if not nh:
                return None
            d[hv] = nh
            changed.append(hv)
    return changed


_PROPAGATORS = {
    "xor-exactly-one": _prop_xor,
    "hosted-pin": _prop_pin,
    "resource-sum-leq": _prop_resource,
}


class _Engine:
    def __init__(self, enc: Encoding, limit: int):
        self.space = enc.space
        self.cons = enc.constraints
        self.limit = limit
        self.watch: dict[Var, list[int]] = {v: [] for v in self.space.order}
        self.fns = []
        for i, c in enumerate(self.cons):
            self.fns.append(_prop_binary if c.kind in BINARY_KINDS else _PROPAGATORS[c.kind])
            for v in dict.fromkeys(c.scope):
                self.watch[v].append(i)
        self.solutions: list[Configuration] = []
        self.truncated = False
        self.visited = 0

    def propagate(self, d: dict, queue: list[int]) -> bool:
        pending = set(queue)
        queue = list(queue)
        while queue:
            i = queue.pop()
            pending.discard(i)
            changed = self.fns[i](self.cons[i], d)
            if changed is None:
                return False
            for v in changed:
                for j in self.watch[v]:
                    if j not in pending:
                        pending.add(j)
                        queue.append(j)
        return True

    def run(self):
        d = dict(self.space.domains)
        if self.propagate(d, list(range(len(self.cons)))):
            self.search(0, d)

    def search(self, i: int, d: dict):
        order = self.space.order
        while i < len(order) and len(d[order[i]]) == 1:
            i += 1
        self.visited += 1
        if i == len(order):
            if len(self.solutions) >= self.limit:
                self.truncated = True
                return
            self.solutions.append(self.emit(d))
            return
        var = order[i]
        for value in d[var]:
            if self.truncated:
                return
            nd = dict(d)
            nd[var] = (value,)
            if self.propagate(nd, self.watch[var]):
                self.search(i + 1, nd)

    def emit(self, d: dict) -> Configuration:
        nodes = self.space.nodes
        sel = {}
        host = {}
        for v in self.space.order:
            (x,) = d[v]
            if v[0] == "sel":
                if x:
                    sel[v[1]] = x
            elif x != UNPLACED:
                host[v[1]] = nodes[x]
        return Configuration(sel, host)


def canonical_key(config: Configuration, features: Sequence[str]):
    ids = sorted(features)
    return (tuple(config.count(f) for f in ids), tuple(config.hosting.get(f, "") for f in ids))


def enumerate_solutions(enc: Encoding, limit: int = DEFAULT_LIMIT) -> SearchResult:
    """Every solution of ``enc`` exactly once, in canonical order.

    At most ``limit`` solutions are kept; hitting the cap sets ``truncated``.
    """
    eng = _Engine(enc, limit)
    eng.run()
    feats = enc.space.features
    configs = sorted(eng.solutions, key=lambda c: canonical_key(c, feats))
    log.debug("enumerated %d solutions, %d search nodes", len(configs), eng.visited)
    return SearchResult(configs, eng.truncated, eng.visited)
