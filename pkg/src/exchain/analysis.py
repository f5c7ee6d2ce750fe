"""Deterministic exception-handling analysis of Java source.

Extracts method invocations, resolves them against a knowledge base, decides
per-exception handling status, and classifies overall quality. All functions
here are pure in (source, kb) and safe to call concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

from . import jparse
from .errors import NoRelevantApis, UnresolvedCall
from .kb import ExceptionHierarchy, ExceptionSpec, KnowledgeBase, same_type, simple_type_name


class HandlingStatus(str, Enum):
    UNHANDLED = "Unhandled"
    GUARDED_THROW = "GuardedThrow"
    CAUGHT_EXACT = "CaughtExact"
    CAUGHT_SUPERTYPE = "CaughtSupertype"
    DECLARED_THROWS = "DeclaredThrows"


class QualityLabel(str, Enum):
    INCOMPLETE = "IncompleteExceptionHandling"
    INCORRECT = "IncorrectExceptionHandling"
    ABUSE = "AbuseOfTryCatch"
    GOOD = "GoodPractice"


@dataclass(frozen=True)
class Resolution:
    kind: str  # 'unresolved' | 'resolved' | 'ambiguous'
    candidates: tuple[str, ...] = ()

    @classmethod
    def unresolved(cls) -> "Resolution":
        return cls("unresolved")

    @classmethod
    def resolved(cls, fqn: str) -> "Resolution":
        return cls("resolved", (fqn,))

    @classmethod
    def ambiguous(cls, fqns) -> "Resolution":
        return cls("ambiguous", tuple(fqns))

    @property
    def fqn(self) -> str:
        if self.kind != "resolved":
            raise UnresolvedCall(f"resolution is {self.kind}")
        return self.candidates[0]


@dataclass(frozen=True)
class CallSite:
    """One method invocation found in analyzed source."""

    simple_name: str
    arity: int
    receiver_hint: str
    span: tuple[int, int]
    resolution: Resolution = Resolution.unresolved()


@dataclass(frozen=True)
class UnhandledException:
    fqn: str
    exception: str
    condition: str


@dataclass(frozen=True)
class StatusEntry:
    fqn: str
    exception: str
    status: HandlingStatus
    span: tuple[int, int]


@dataclass(frozen=True)
class SourceContext:
    """The parts of a compilation unit that resolution needs."""

    imports: tuple[str, ...] = ()

    @classmethod
    def from_source(cls, source: str) -> "SourceContext":
        return cls(imports=tuple(_parse(source).imports))


@dataclass(frozen=True)
class AnalysisReport:
    label: QualityLabel | None
    unhandled: tuple[UnhandledException, ...]
    statuses: tuple[StatusEntry, ...]
    ambiguous: tuple[CallSite, ...]
    unresolved: tuple[CallSite, ...]
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "label": self.label.value if self.label else None,
            "unhandled": [
                {"fqn": u.fqn, "exception": u.exception, "condition": u.condition}
                for u in self.unhandled
            ],
            "statuses": [
                {"fqn": s.fqn, "exception": s.exception,
                 "status": s.status.value, "span": list(s.span)}
                for s in self.statuses
            ],
            "ambiguous": [
                {"name": c.simple_name, "arity": c.arity,
                 "candidates": list(c.resolution.candidates), "span": list(c.span)}
                for c in self.ambiguous
            ],
            "unresolved": [
                {"name": c.simple_name, "arity": c.arity, "span": list(c.span)}
                for c in self.unresolved
            ],
            "warnings": list(self.warnings),
        }


@lru_cache(maxsize=128)
def _parse(source: str) -> jparse.ParsedUnit:
    return jparse.parse_java(source)


def _hint_for(inv: jparse.Invocation) -> str:
    """Declared type of the receiver, when statically visible."""
    chain = inv.receiver
    if not chain:
        return ""
    parts = chain.split(".")
    if parts[0] == "this":
        parts = parts[1:]
        if len(parts) == 1 and inv.owner is not None and parts[0] in inv.owner.fields:
            return jparse.erase_type(inv.owner.fields[parts[0]])
        return ""
    if len(parts) == 1:
        name = parts[0]
        if inv.method is not None:
            best = ""
            for vname, vtype, offset in inv.method.vars:
                if vname == name and offset <= inv.name_start:
                    best = vtype
            if best:
                return best
        if inv.owner is not None and name in inv.owner.fields:
            return jparse.erase_type(inv.owner.fields[name])
        if name[:1].isupper():
            return name  # static call through a type name
        return ""
    if parts[-1][:1].isupper():
        root = parts[0]
        if inv.method is not None and any(v[0] == root for v in inv.method.vars):
            return ""  # rooted in a variable: field chain, type unknown
        return chain  # qualified type name, e.g. java.util.Collections
    return ""


def extract_invocations(source: str) -> list[CallSite]:
    """Every method-invocation expression, in source order.

    Constructor calls are excluded; arity counts top-level argument
    expressions. Raises ParseError on unsupported syntax.
    """
    unit = _parse(source)
    return [
        CallSite(
            simple_name=inv.name,
            arity=inv.arity,
            receiver_hint=_hint_for(inv),
            span=inv.span,
        )
        for inv in unit.invocations
    ]


def resolve(call: CallSite, context: SourceContext | str, kb: KnowledgeBase) -> CallSite:
    """Match a call site against knowledge-base entries.

    Candidates share the simple name and arity; a receiver hint and explicit
    imports narrow them. Zero candidates is Unresolved, several
    Ambiguous; resolution failure is data, not an error.
    """
    if isinstance(context, str):
        context = SourceContext.from_source(context)
    candidates = [
        e for e in kb.entries.values()
        if e.simple_name == call.simple_name and e.arity == call.arity
    ]
    if call.receiver_hint:
        narrowed = [e for e in candidates if same_type(e.declaring_type, call.receiver_hint)]
        if narrowed:
            candidates = narrowed
    explicit = {imp for imp in context.imports if not imp.endswith(".*")}
    if explicit:
        narrowed = [e for e in candidates if e.declaring_type in explicit]
        if narrowed:
            candidates = narrowed
    if not candidates:
        resolution = Resolution.unresolved()
    elif len(candidates) == 1:
        resolution = Resolution.resolved(candidates[0].fqn)
    else:
        resolution = Resolution.ambiguous(sorted(e.fqn for e in candidates))
    return replace(call, resolution=resolution)


# --- handling detection -----------------------------------------------------


def _find_path(root: jparse.Node, offset: int) -> list[jparse.Node]:
    """Chain of nodes from root down to the innermost one containing offset."""
    path = [root]
    node = root
    while True:
        nxt = None
        for child in node.children():
            lo, hi = child.span
            if lo <= offset < hi:
                nxt = child
                break
        if nxt is None:
            return path
        path.append(nxt)
        node = nxt


def _branch_throws(node: jparse.Node | None, exception: str) -> bool:
    """True when the branch unconditionally throws exactly this exception."""
    if node is None:
        return False
    if isinstance(node, jparse.Throw):
        return node.thrown is not None and same_type(node.thrown, exception)
    if isinstance(node, jparse.Block):
        return any(
            _branch_throws(s, exception)
            for s in node.stmts
            if isinstance(s, (jparse.Throw, jparse.Block))
        )
    return False


def _guarding_if(method: jparse.MethodDecl, path: list[jparse.Node],
                 offset: int, exception: str) -> jparse.If | None:
    """A dominating if whose taken branch throws the exception exactly."""
    # Guard before the call, in the same or an enclosing block: either branch
    # throwing means the condition was checked before execution continued.
    for i, node in enumerate(path):
        if not isinstance(node, jparse.Block) or i + 1 >= len(path):
            continue
        child = path[i + 1]
        if child not in node.stmts:
            continue
        idx = node.stmts.index(child)
        for prior in node.stmts[:idx]:
            if isinstance(prior, jparse.If) and (
                _branch_throws(prior.then, exception)
                or _branch_throws(prior.orelse, exception)
            ):
                return prior
    # Call on the non-throwing side of an if whose other branch throws.
    for node in path:
        if not isinstance(node, jparse.If):
            continue
        then_has = node.then is not None and _contains(node.then, offset)
        else_has = node.orelse is not None and _contains(node.orelse, offset)
        if then_has and _branch_throws(node.orelse, exception):
            return node
        if else_has and _branch_throws(node.then, exception):
            return node
    return None


def _contains(node: jparse.Node, offset: int) -> bool:
    lo, hi = node.span
    return lo <= offset < hi


def detect_handling(
    source: str,
    call: CallSite,
    spec: ExceptionSpec,
    hierarchy: ExceptionHierarchy,
) -> HandlingStatus:
    """Handling status of one (resolved call, exception spec) pair.

    Precedence when several constructs apply:
    GuardedThrow > CaughtExact > CaughtSupertype > DeclaredThrows.
    """
    if call.resolution.kind != "resolved":
        raise UnresolvedCall(
            f"cannot judge handling of {call.simple_name!r}: {call.resolution.kind}"
        )
    status, _ = _detect(source, call, spec, hierarchy)
    return status


def _detect(source, call, spec, hierarchy) -> tuple[HandlingStatus, str | None]:
    """Status plus an optional warning about guard-condition wording."""
    unit = _parse(source)
    offset = call.span[0]
    method = unit.method_at(offset)
    if method is None or method.body is None:
        return HandlingStatus.UNHANDLED, None
    path = _find_path(method.body, offset)

    guard = _guarding_if(method, path, offset, spec.exception)
    if guard is not None:
        warning = _guard_wording_warning(unit.source, guard, spec)
        return HandlingStatus.GUARDED_THROW, warning

    caught_exact = False
    caught_super = False
    for node in path:
        if isinstance(node, jparse.Try) and node.body is not None and _contains(node.body, offset):
            for clause in node.catches:
                for caught in clause.types:
                    if same_type(caught, spec.exception):
                        caught_exact = True
                    elif hierarchy.is_subtype(spec.exception, caught):
                        caught_super = True
    if caught_exact:
        return HandlingStatus.CAUGHT_EXACT, None
    if caught_super:
        return HandlingStatus.CAUGHT_SUPERTYPE, None

    for declared in method.throws:
        if same_type(declared, spec.exception) or hierarchy.is_subtype(spec.exception, declared):
            return HandlingStatus.DECLARED_THROWS, None

    return HandlingStatus.UNHANDLED, None


_IDENT_CHAIN = re.compile(r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*")


def _skeleton(expr: str) -> str:
    """Condition shape with names erased: 'i >= v.size()' -> '#>=#()'."""
    return _IDENT_CHAIN.sub("#", "".join(expr.split()))


def _guard_wording_warning(source: str, guard: jparse.If, spec: ExceptionSpec) -> str | None:
    """Report when a guard's shape diverges from the documented condition.

    Identifier names are erased before comparison, since documentation uses
    formal parameter names while code uses actual variables. Mismatch is a
    warning, never a failure.
    """
    open_idx = spec.condition.find("(")
    if open_idx < 0:
        return None
    documented = _skeleton(spec.condition[open_idx:]).strip("()")
    lo, hi = guard.cond_span
    written = _skeleton(source[lo:hi])
    if documented and documented not in written:
        return (
            f"guard for {spec.exception} does not repeat the documented "
            f"condition {spec.condition!r}"
        )
    return None


# --- whole-source analysis ---------------------------------------------------


def analyze_source(source: str, kb: KnowledgeBase) -> AnalysisReport:
    """Full analyzer pass: statuses, unhandled list, quality label.

    Ambiguous and unresolved call sites are excluded from classification but
    surfaced in the report, never silently dropped.
    """
    context = SourceContext.from_source(source)
    calls = [resolve(c, context, kb) for c in extract_invocations(source)]

    statuses: list[StatusEntry] = []
    warnings: list[str] = []
    unhandled: list[UnhandledException] = []
    seen_unhandled: set[tuple[str, str]] = set()
    any_specs = False
    saw_unhandled = saw_supertype = saw_abuse = False

    for call in calls:
        if call.resolution.kind != "resolved":
            continue
        fqn = call.resolution.fqn
        for spec in kb.lookup(fqn):
            any_specs = True
            status, warning = _detect(source, call, spec, kb.hierarchy)
            statuses.append(StatusEntry(fqn, spec.exception, status, call.span))
            if warning:
                warnings.append(warning)
            if status is HandlingStatus.UNHANDLED:
                saw_unhandled = True
                key = (fqn, spec.exception)
                if key not in seen_unhandled:
                    seen_unhandled.add(key)
                    unhandled.append(UnhandledException(fqn, spec.exception, spec.condition))
            elif status is HandlingStatus.CAUGHT_SUPERTYPE:
                saw_supertype = True
            elif status is HandlingStatus.CAUGHT_EXACT and spec.guardable:
                saw_abuse = True

    if not any_specs:
        label = None
    elif saw_unhandled:
        label = QualityLabel.INCOMPLETE
    elif saw_supertype:
        label = QualityLabel.INCORRECT
    elif saw_abuse:
        label = QualityLabel.ABUSE
    else:
        label = QualityLabel.GOOD

    ambiguous = tuple(c for c in calls if c.resolution.kind == "ambiguous")
    unresolved = tuple(c for c in calls if c.resolution.kind == "unresolved")
    if ambiguous:
        names = sorted({c.simple_name for c in ambiguous})
        warnings.append(
            "ambiguous call sites excluded from classification: " + ", ".join(names)
        )
    return AnalysisReport(
        label=label,
        unhandled=tuple(unhandled),
        statuses=tuple(statuses),
        ambiguous=ambiguous,
        unresolved=unresolved,
        warnings=tuple(warnings),
    )


def collect_unhandled(source: str, kb: KnowledgeBase) -> list[UnhandledException]:
    """Unhandled (fqn, exception, condition) triples, deduplicated in order."""
    return list(analyze_source(source, kb).unhandled)


def classify_quality(source: str, kb: KnowledgeBase) -> QualityLabel:
    """Quality label with the fixed priority Incomplete > Incorrect > Abuse > Good."""
    report = analyze_source(source, kb)
    if report.label is None:
        raise NoRelevantApis("no resolved call site carries knowledge-base specs")
    return report.label
