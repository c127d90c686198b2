"""Exhaustive reference enumerator.

Walks every count assignment for every feature and every node assignment
for the selected attributed features, keeping what
:func:`~fmdeploy.checker.is_valid_configuration` accepts.  It uses nothing
from the solver.  Hosting choices are only expanded for selections that
already pass the feature-model rules, since no placement can repair an
invalid selection.
"""

from __future__ import annotations

import itertools
import math

from .checker import Configuration, is_valid_configuration
from .errors import BoundExceededError

DEFAULT_BOUND = 10**7


def space_size(model, nodes) -> int:
    """Product of all selection, count and hosting domain sizes."""
    counts = math.prod(f.cardinality.upper + 1 for f in model.features.values())
    placed = sum(1 for f in model.features.values() if f.attributes and not f.is_node_feature)
    return counts * len(nodes) ** placed


def brute_force_enumerate(augmented, nodes, bound: int = DEFAULT_BOUND) -> list[Configuration]:
    model = augmented.base
    spec = augmented.predefined
    size = space_size(model, nodes)
    if size > bound:
        raise BoundExceededError(size, bound)

    ids = sorted(model.features)
    ranges = [range(model.features[f].cardinality.upper + 1) for f in ids]
    node_ids = [n.id for n in nodes]
    found = []
    for counts in itertools.product(*ranges):
        selection = {f: c for f, c in zip(ids, counts) if c}
        if not is_valid_configuration(model, spec, Configuration(selection)):
            continue
        placed = [f for f in selection if model.features[f].attributes and not model.features[f].is_node_feature]
        for hosts in itertools.product(node_ids, repeat=len(placed)):
            cfg = Configuration(selection, dict(zip(placed, hosts)))
            if is_valid_configuration(model, spec, cfg, nodes):
                found.append(cfg)
    return sorted(found)
