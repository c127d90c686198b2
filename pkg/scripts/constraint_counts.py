"""Configuration counts of the control-admittance fixture per subset of the
relational deployment constraints, next to the reference counts.

    python scripts/constraint_counts.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import statistics
from pathlib import Path

import fmdeploy
from fmdeploy.deploy import NodeDescriptor
from fmdeploy.dsl import parse_deployment_spec, parse_model
from fmdeploy.matcher import possible_host, relational_subsets

FIXTURES = Path(fmdeploy.__file__).parent / "fixtures"
REFERENCE = {"none": 25, "colocated": 11, "separated": 16, "all": 8}


def load():
    app = parse_model((FIXTURES / "control-admittance.fm").read_text())
    nodes = [NodeDescriptor.from_model(parse_model((FIXTURES / f).read_text())) for f in ("hab.fm", "cloudvm.fm")]
    spec = parse_deployment_spec((FIXTURES / "control-admittance.dep").read_text(), app, nodes)
    return app, nodes, spec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5, help="timing repetitions per subset")
    args = ap.parse_args()
    app, nodes, spec = load()
    print(f"{'subset':45} {'count':>7} {'reference':>10} {'median ms':>10}")
    for label, sub in relational_subsets(spec):
        runs = [possible_host(app, nodes, sub) for _ in range(args.repeat)]
        ms = statistics.median(r.stats["elapsed_ms"] for r in runs)
        ref = REFERENCE[label.split("(")[0]]
        print(f"{label:45} {runs[0].count:>7} {ref:>10} {ms:>10.1f}")


if __name__ == "__main__":
    main()
