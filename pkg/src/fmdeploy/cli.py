"""``fmdeploy`` command line.

Exit codes: 0 success, 1 parse/validation failure, 2 I/O failure,
3 solver/oracle mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from .deploy import DeploymentSpec, NodeDescriptor
from .dsl import parse_deployment_spec, parse_model
from .errors import BoundExceededError, InconsistentSpecError, ParseError
from .matcher import augment, possible_host, relational_subsets
from .model import ModelKind, validate_model
from .oracle import DEFAULT_BOUND, brute_force_enumerate
from .solver import DEFAULT_LIMIT

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3

log = logging.getLogger("fmdeploy")


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        print(f"{path}: error: {e}", file=sys.stderr)
        raise _Exit(EXIT_IO)


def _digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def _report(err: ParseError):
    for d in err.diagnostics:
        print(d, file=sys.stderr)
    raise _Exit(EXIT_INVALID)


class Inputs:
    def __init__(self, app_path, node_paths, spec_path):
        self.digests = {}
        self.app = self._model(app_path)
        if self.app.kind is not ModelKind.APPLICATION:
            print(f"{app_path}: error: application model must not declare a node class", file=sys.stderr)
            raise _Exit(EXIT_INVALID)
        self.nodes = []
        for p in node_paths:
            m = self._model(p)
            if m.kind is not ModelKind.DEPLOYMENT_NODE:
                print(f"{p}: error: node model {m.name!r} must declare 'class embedded' or 'class elastic'",
                      file=sys.stderr)
                raise _Exit(EXIT_INVALID)
            self.nodes.append(NodeDescriptor.from_model(m))
        if not self.nodes:
            print("error: at least one --node model is required", file=sys.stderr)
            raise _Exit(EXIT_INVALID)
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            print(f"error: duplicate node names {ids}", file=sys.stderr)
            raise _Exit(EXIT_INVALID)
        self.spec = DeploymentSpec()
        if spec_path:
            text = _read(spec_path)
            self.digests[spec_path] = _digest(text)
            try:
                self.spec = parse_deployment_spec(text, self.app, self.nodes, filename=spec_path)
            except ParseError as e:
                _report(e)

    def _model(self, path):
        text = _read(path)
        self.digests[path] = _digest(text)
        try:
            return parse_model(text, filename=path)
        except ParseError as e:
            _report(e)


def _limit(args) -> int:
    if args.limit is not None:
        return args.limit
    env = os.environ.get("FMDEPLOY_LIMIT")
    if env:
        try:
            return int(env)
        except ValueError:
            print(f"error: FMDEPLOY_LIMIT must be an integer, got {env!r}", file=sys.stderr)
            raise _Exit(EXIT_INVALID)
    return DEFAULT_LIMIT


def cmd_validate(args) -> int:
    text = _read(args.model)
    try:
        model = parse_model(text, filename=args.model)
    except ParseError as e:
        _report(e)
    problems = validate_model(model)
    for v in problems:
        print(f"{args.model}: error: {v.message}", file=sys.stderr)
    return EXIT_INVALID if problems else EXIT_OK


def _solve(inputs: Inputs, spec, limit):
    try:
        return possible_host(inputs.app, inputs.nodes, spec, limit)
    except InconsistentSpecError as e:
        for v in e.report:
            print(f"error: {v.message}", file=sys.stderr)
        raise _Exit(EXIT_INVALID)


def cmd_enumerate(args) -> int:
    inputs = Inputs(args.app, args.node or [], args.spec)
    ss = _solve(inputs, inputs.spec, _limit(args))
    for d in ss.diagnostics:
        print(f"warning: {d}", file=sys.stderr)
    if ss.truncated:
        print(f"warning: solution cap reached; output holds the first {ss.count} solutions", file=sys.stderr)

    if args.oracle:
        aug = augment(inputs.app, inputs.nodes, inputs.spec)
        try:
            expected = brute_force_enumerate(aug, inputs.nodes, bound=args.oracle_bound)
        except BoundExceededError as e:
            print(f"error: oracle refused: {e}", file=sys.stderr)
            return EXIT_INVALID
        if ss.truncated or set(expected) != ss.as_set():
            missing = len(set(expected) - ss.as_set())
            extra = len(ss.as_set() - set(expected))
            print(f"error: solver/oracle mismatch: {missing} missing, {extra} unexpected "
                  f"(solver {ss.count}, oracle {len(expected)})", file=sys.stderr)
            return EXIT_MISMATCH

    if args.count_only:
        print(ss.count)
    elif args.format == "json":
        print(json.dumps(_enumeration_json(inputs, ss), indent=2))
    else:
        print(_enumeration_table(inputs, ss))
    return EXIT_OK


def _enumeration_json(inputs: Inputs, ss) -> dict:
    return {
        "count": ss.count,
        "truncated": ss.truncated,
        "configurations": [c.to_json() for c in ss.configurations],
        "stats": {
            "inputs": dict(sorted(inputs.digests.items())),
            "features": len(inputs.app),
            "nodes": [{"id": n.id, "class": n.node_class.value, "capacities": dict(sorted(n.capacities.items()))}
                      for n in inputs.nodes],
            "constraints": [str(c) for c in inputs.spec],
            "derived_constraints": ss.stats["derived_constraints"],
            "diagnostics": ss.diagnostics,
        },
    }


def _render(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    sep = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    out = [sep]
    for k, r in enumerate(rows):
        out.append("| " + " | ".join(c.ljust(w) for c, w in zip(r, widths)) + " |")
        if k == 0:
            out.append(sep)
    out.append(sep)
    return "\n".join(out)


def _enumeration_table(inputs: Inputs, ss) -> str:
    embedded = [n for n in inputs.nodes if n.embedded]
    head = ["#", "selected", "hosting"] + [f"{n.id} load" for n in embedded]
    rows = [head]
    for i, (c, usage) in enumerate(zip(ss.configurations, ss.usage), 1):
        sel = " ".join(f if k == 1 else f"{f}x{k}" for f, k in c.to_json()["selected"].items())
        host = " ".join(f"{f}@{n}" for f, n in c.to_json()["hosting"].items())
        loads = [" ".join(f"{r}={v}/{n.capacities.get(r, 0)}" for r, v in usage[n.id].items()) for n in embedded]
        rows.append([str(i), sel, host] + loads)
    return _render(rows) + f"\n{ss.count} configuration(s){' (truncated)' if ss.truncated else ''}"


def cmd_stats(args) -> int:
    inputs = Inputs(args.app, args.node or [], args.spec)
    start = time.perf_counter()
    limit = _limit(args)
    subsets = []
    for label, sub in relational_subsets(inputs.spec, args.max_size):
        ss = _solve(inputs, sub, limit)
        subsets.append({
            "subset": label,
            "constraints": [str(c) for c in sub],
            "count": ss.count,
            "truncated": ss.truncated,
            "elapsed_ms": ss.stats["elapsed_ms"],
        })
    report = {
        "inputs": dict(sorted(inputs.digests.items())),
        "features": len(inputs.app),
        "count": subsets[-1]["count"],
        "subsets": subsets,
        "elapsed_ms": round((time.perf_counter() - start) * 1000.0, 3),
        "truncated": any(s["truncated"] for s in subsets),
    }
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print(_stats_table(inputs, report))
    return EXIT_OK


def _stats_table(inputs: Inputs, report: dict) -> str:
    def col(label):
        return "Config" if label == "none" else f"Config with {label}"

    subs = report["subsets"]
    rows = [
        ["Feature Model", "Features"] + [col(s["subset"]) for s in subs],
        [inputs.app.name, str(report["features"])] + [str(s["count"]) for s in subs],
        ["Execution Time (ms)", "-"] + [f"{s['elapsed_ms']:.0f}" for s in subs],
    ]
    return _render(rows)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fmdeploy", description="Deployment analysis over extended feature models.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check a .fm model")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    def common(p):
        p.add_argument("app")
        p.add_argument("--node", action="append", metavar="NODE.fm", help="deployment node model (repeatable)")
        p.add_argument("--spec", metavar="SPEC.dep")
        p.add_argument("--limit", type=int, help=f"solution cap (default {DEFAULT_LIMIT}, env FMDEPLOY_LIMIT)")

    p = sub.add_parser("enumerate", help="list all valid deployment configurations")
    common(p)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--oracle", action="store_true", help="cross-check against exhaustive enumeration")
    p.add_argument("--oracle-bound", type=int, default=DEFAULT_BOUND)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("stats", help="configuration counts per deployment-constraint subset")
    common(p)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--max-size", type=int, help="count every subset up to this size instead of singles + all")
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except _Exit as e:
        return e.code
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
