"""Text formats for feature models (``.fm``) and deployment specs (``.dep``).

Model files::

    model control_admittance {
      mandatory control_admittance {
        mandatory keypad (CPU=5, RAM=16)
        optional live_streaming as "Live streaming" [0..3] (CPU=30)
        optional images { xor { optional photo  optional video } }
      }
    }
    constraints { bayesian implies high; }

Node models add ``class embedded`` or ``class elastic`` after the model
name.  Deployment specs are a single ``deploy { ... }`` block of
``hostedby``/``nothostedby``/``colocated``/``separated`` calls.

Parsing stops at the first syntax error; name-resolution problems are all
collected.  Either way a :class:`~fmdeploy.errors.ParseError` carries the
diagnostics.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .deploy import (
    Colocated,
    DeploymentSpec,
    HostedBy,
    NotHostedBy,
    Separated,
    check_spec_consistency,
)
from .errors import ParseError
from .model import (
    DEFAULT_ONTOLOGY,
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
    ResourceOntology,
    SourceSpan,
    Variability,
    validate_model,
)


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: Severity
    message: str
    span: SourceSpan

    def __str__(self):
        return f"{self.span}: {self.severity.value}: {self.message}"


FEATURE_ID = re.compile(r"[a-z][a-z0-9_]*\Z")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>\.\.|[{}()\[\],=;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, string, punct, eof
    text: str
    span: SourceSpan


class _Abort(Exception):
    pass


def tokenize(text: str, filename: str = "<string>") -> list[Token]:
    tokens = []
    pos, line = 0, 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        span = SourceSpan(filename, line, pos - line_start + 1)
        if m is None:
            diag = ParseDiagnostic(Severity.ERROR, f"unexpected character {text[pos]!r}", span)
            raise ParseError([diag])
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), span))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(filename, line, pos - line_start + 1)))
    return tokens


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.i = 0
        self.diagnostics: list[ParseDiagnostic] = []

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, span: Optional[SourceSpan] = None):
        self.diagnostics.append(ParseDiagnostic(Severity.ERROR, message, span or self.tok.span))

    def fail(self, message: str, span: Optional[SourceSpan] = None):
        self.error(message, span)
        raise _Abort()

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("ident", "punct") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def keyword(self, choices: Sequence[str]) -> Token:
        t = self.tok
        if t.kind == "ident" and t.text in choices:
            return self.advance()
        what = "unknown keyword" if t.kind == "ident" else "expected keyword, found"
        self.fail(f"{what} {self.describe(t)}; expected one of {', '.join(choices)}")

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "int":
            self.fail(f"expected integer, found {self.describe(self.tok)}")
        return int(self.advance().text)

    def end(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.describe(self.tok)} after end of definition")


class _ModelParser(_Parser):
    def __init__(self, text, filename, ontology):
        super().__init__(text, filename)
        self.ontology = ontology
        self.features: dict[str, Feature] = {}
        self.groups: list[Group] = []

    def parse(self) -> FeatureModel:
        self.keyword(["model"])
        name = self.ident("model name").text
        node_class = None
        if self.at("class"):
            self.advance()
            node_class = NodeClass(self.keyword(["embedded", "elastic"]).text)
        self.expect("{")
        root = self.feature(None, None)
        self.expect("}")
        cross = []
        if self.at("constraints"):
            cross = self.constraints()
        self.end()

        for xc in cross:
            for ref in (xc.antecedent, xc.consequent):
                if ref not in self.features:
                    self.error(f"unresolved feature {ref!r} in constraint", xc.span)
            if xc.antecedent == xc.consequent:
                self.error(f"constraint relates {xc.antecedent!r} to itself", xc.span)
        return FeatureModel(
            name=name,
            root=root.id,
            features=self.features,
            groups=tuple(self.groups),
            cross_constraints=tuple(cross),
            kind=ModelKind.DEPLOYMENT_NODE if node_class else ModelKind.APPLICATION,
            node_class=node_class,
        )

    def feature(self, parent: Optional[str], group: Optional[int]) -> Feature:
        var = Variability(self.keyword(["mandatory", "optional"]).text)
        id_tok = self.ident("feature name")
        fid = id_tok.text
        if not FEATURE_ID.match(fid):
            self.error(f"feature name {fid!r} must be lowercase snake_case", id_tok.span)
        display = ""
        if self.at("as"):
            self.advance()
            if self.tok.kind != "string":
                self.fail(f"expected display string after 'as', found {self.describe(self.tok)}")
            display = _unquote(self.advance().text)
        card = Cardinality()
        if self.at("["):
            card = self.cardinality()
        attrs: tuple[Attribute, ...] = ()
        if self.at("("):
            attrs = self.attributes()
        feat = Feature(fid, display, parent, var, group, card, attrs, span=id_tok.span)
        if fid in self.features:
            self.error(f"duplicate feature {fid!r} (first declared at {self.features[fid].span})", id_tok.span)
        else:
            self.features[fid] = feat
        if self.at("{"):
            self.advance()
            n_groups = 0
            while not self.at("}"):
                if self.tok.kind == "eof":
                    self.fail("expected '}', found end of input")
                if self.at("xor") or self.at("or"):
                    self.group(fid, n_groups)
                    n_groups += 1
                else:
                    self.feature(fid, None)
            self.advance()
        return feat

    def group(self, owner: str, index: int):
        kind = GroupKind(self.advance().text)
        start = self.expect("{")
        members = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}', found end of input")
            members.append(self.feature(owner, index).id)
        self.advance()
        if len(members) < 2:
            self.error(f"{kind.value} group needs at least two features", start.span)
        self.groups.append(Group(owner, index, kind, tuple(members)))

    def cardinality(self) -> Cardinality:
        start = self.expect("[")
        lo = self.integer()
        self.expect("..")
        hi = self.integer()
        self.expect("]")
        if lo > hi or hi < 1:
            self.error(f"invalid cardinality [{lo}..{hi}]", start.span)
        return Cardinality(lo, hi)

    def attributes(self) -> tuple[Attribute, ...]:
        self.expect("(")
        attrs = []
        while True:
            t = self.ident("resource type")
            if t.text not in self.ontology:
                known = ", ".join(self.ontology)
                self.error(f"unknown resource type {t.text!r}; ontology defines {known}", t.span)
            if any(a.resource == t.text for a in attrs):
                self.error(f"resource type {t.text!r} given twice", t.span)
            self.expect("=")
            attrs.append(Attribute(t.text, self.integer()))
            if self.at(","):
                self.advance()
                continue
            self.expect(")")
            return tuple(attrs)

    def constraints(self) -> list[CrossTreeConstraint]:
        self.advance()
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}', found end of input")
            a = self.ident("feature name")
            kind = CrossKind(self.keyword(["implies", "excludes"]).text)
            b = self.ident("feature name").text
            self.expect(";")
            out.append(CrossTreeConstraint(kind, a.text, b, span=a.span))
        self.advance()
        return out


class _SpecParser(_Parser):
    CALLS = {"hostedby": HostedBy, "nothostedby": NotHostedBy, "colocated": Colocated, "separated": Separated}

    def parse(self, app: FeatureModel, node_names: set[str]) -> DeploymentSpec:
        self.keyword(["deploy"])
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}', found end of input")
            kw = self.keyword(list(self.CALLS))
            self.expect("(")
            first = self.ident()
            self.expect(",")
            second = self.ident()
            self.expect(")")
            self.expect(";")
            cls = self.CALLS[kw.text]
            if cls in (HostedBy, NotHostedBy):
                if first.text not in node_names:
                    self.error(f"unresolved node {first.text!r}; known nodes: {', '.join(sorted(node_names))}",
                               first.span)
                self.resolve(app, second)
            else:
                self.resolve(app, first)
                self.resolve(app, second)
                if first.text == second.text:
                    verb = "colocation" if cls is Colocated else "separation"
                    self.error(f"{verb} of a feature with itself", kw.span)
            c = cls(first.text, second.text, span=kw.span)
            if c in out:
                self.error(f"duplicate constraint {c}", kw.span)
            else:
                out.append(c)
        self.advance()
        self.end()
        return DeploymentSpec(tuple(out))

    def resolve(self, app: FeatureModel, t: Token):
        if t.text not in app:
            self.error(f"unresolved feature {t.text!r}", t.span)
        elif not app[t.text].attributes:
            self.error(f"feature {t.text!r} has no attributes and is never placed on a node", t.span)


def parse_model(text: str, filename: str = "<string>", ontology: ResourceOntology = DEFAULT_ONTOLOGY) -> FeatureModel:
    p = _ModelParser(text, filename, ontology)
    try:
        model = p.parse()
    except _Abort:
        raise ParseError(p.diagnostics) from None
    if not p.diagnostics:
        eof = p.tokens[-1].span
        for v in validate_model(model, ontology):
            f = model.features.get(v.subject) if v.subject else None
            span = f.span if f is not None and f.span else eof
            p.error(v.message, span)
    if any(d.severity is Severity.ERROR for d in p.diagnostics):
        raise ParseError(p.diagnostics)
    return model


def parse_deployment_spec(text: str, app: FeatureModel, nodes: Sequence, filename: str = "<string>") -> DeploymentSpec:
    """Parse a ``deploy { ... }`` block; ``nodes`` are NodeDescriptors or node FeatureModels."""
    node_names = {getattr(n, "id", None) or n.name for n in nodes}
    p = _SpecParser(text, filename)
    try:
        spec = p.parse(app, node_names)
    except _Abort:
        raise ParseError(p.diagnostics) from None
    if not p.diagnostics:
        for v in check_spec_consistency(spec, app, [_Named(n) for n in node_names]):
            span = next((c.span for c in spec if c.span and v.subject in _names(c)), p.tokens[0].span)
            p.error(v.message, span)
    if p.diagnostics:
        raise ParseError(p.diagnostics)
    return spec


@dataclass(frozen=True)
class _Named:
    id: str


def _names(c) -> tuple:
    if isinstance(c, (HostedBy, NotHostedBy)):
        return (c.node, c.feature)
    return (c.a, c.b)


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_model(model: FeatureModel) -> str:
    """Canonical text for ``model``; ``parse_model`` reads it back unchanged."""
    header = f"model {model.name}"
    if model.node_class is not None:
        header += f" class {model.node_class.value}"
    lines = [header + " {"]
    _emit_feature(model, model.features[model.root], 1, lines)
    lines.append("}")
    if model.cross_constraints:
        lines.append("constraints {")
        for xc in model.cross_constraints:
            lines.append(f"  {xc.antecedent} {xc.kind.value} {xc.consequent};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_feature(model: FeatureModel, f: Feature, depth: int, lines: list[str]):
    pad = "  " * depth
    head = f"{pad}{f.variability.value} {f.id}"
    if f.name != f.id:
        head += f" as {_quote(f.name)}"
    if f.cardinality != Cardinality():
        head += f" {f.cardinality}"
    if f.attributes:
        head += " (" + ", ".join(f"{a.resource}={a.amount}" for a in f.attributes) + ")"
    plain = [c for c in model.children(f.id) if c.group is None]
    groups = sorted(model.groups_of(f.id), key=lambda g: g.index)
    if not plain and not groups:
        lines.append(head)
        return
    lines.append(head + " {")
    for c in plain:
        _emit_feature(model, c, depth + 1, lines)
    for g in groups:
        lines.append(f"{pad}  {g.kind.value} {{")
        for m in g.members:
            _emit_feature(model, model.features[m], depth + 2, lines)
        lines.append(f"{pad}  }}")
    lines.append(pad + "}")


def serialize_spec(spec: DeploymentSpec) -> str:
    body = "".join(f"  {c};\n" for c in spec)
    return "deploy {\n" + body + "}\n"
