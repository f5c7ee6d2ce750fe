"""API exception-knowledge base: domain types, hierarchy queries, persistence.

The knowledge base maps a fully-qualified method signature to the exception
specifications documented for it, and carries a class hierarchy so callers
can reason about supertype relations between exception types. Instances are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import FormatVersionMismatch, SchemaViolation

KB_FORMAT_VERSION = 1

_FQN_RE = re.compile(r"^(.+)\.([A-Za-z_$][\w$]*)\((.*)\)$", re.S)


def split_parameters(params: str) -> list[str]:
    """Split a parameter list on top-level commas, respecting <>, [] and ()."""
    parts: list[str] = []
    depth = 0
    buf: list[str] = []
    for ch in params:
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    tail = "".join(buf).strip()
    if tail:
        parts.append(tail)
    return parts


def simple_type_name(name: str) -> str:
    """'java.lang.IOException' -> 'IOException'; simple names pass through."""
    return name.rsplit(".", 1)[-1]


def same_type(a: str, b: str) -> bool:
    """Type-name equality that tolerates one side being unqualified."""
    if "." in a and "." in b:
        return a == b
    return simple_type_name(a) == simple_type_name(b)


@dataclass(frozen=True)
class ExceptionSpec:
    """One documented `<exception, condition>` pair from a Throws clause."""

    exception: str
    condition: str = ""
    guardable: bool = False

    def __post_init__(self):
        if not self.exception:
            raise ValueError("exception name must be non-empty")
        if not self.condition and self.guardable:
            raise ValueError("guardable requires a non-empty condition")


@dataclass(frozen=True)
class ApiEntry:
    """A method-level API together with its exception specifications."""

    fqn: str
    simple_name: str
    arity: int
    declaring_type: str
    specs: tuple[ExceptionSpec, ...] = ()

    def __post_init__(self):
        declaring, name, arity = parse_fqn(self.fqn)
        if name != self.simple_name:
            raise ValueError(f"simple_name {self.simple_name!r} disagrees with fqn {self.fqn!r}")
        if arity != self.arity:
            raise ValueError(f"arity {self.arity} disagrees with fqn {self.fqn!r}")
        if declaring != self.declaring_type:
            raise ValueError(f"declaring_type {self.declaring_type!r} disagrees with fqn {self.fqn!r}")
        pairs = [(s.exception, s.condition) for s in self.specs]
        if len(pairs) != len(set(pairs)):
            raise ValueError(f"duplicate (exception, condition) pair in specs of {self.fqn!r}")

    @classmethod
    def make(cls, fqn: str, specs: Iterable[ExceptionSpec] = ()) -> "ApiEntry":
        """Build an entry with derived fields, deduplicating specs in order."""
        declaring, name, arity = parse_fqn(fqn)
        deduped: list[ExceptionSpec] = []
        seen: set[tuple[str, str]] = set()
        for s in specs:
            key = (s.exception, s.condition)
            if key not in seen:
                seen.add(key)
                deduped.append(s)
        return cls(fqn=fqn, simple_name=name, arity=arity,
                   declaring_type=declaring, specs=tuple(deduped))


def parse_fqn(fqn: str) -> tuple[str, str, int]:
    """Split 'pkg.Type.name(params)' into (declaring type, name, arity)."""
    m = _FQN_RE.match(fqn)
    if not m:
        raise ValueError(f"not a method signature: {fqn!r}")
    declaring, name, params = m.groups()
    return declaring, name, len(split_parameters(params))


class ExceptionHierarchy:
    """Exception supertype relation, rooted at java.lang.Throwable.

    Edges map a type to its direct supertype. Simple names resolve to the
    unique fully-qualified type sharing that simple name, when there is one.
    Types absent from the hierarchy behave as direct children of the root.
    """

    ROOT = "java.lang.Throwable"

    def __init__(self, edges: Mapping[str, str]):
        edges = dict(edges)
        if self.ROOT in edges:
            raise ValueError("the root type cannot have a supertype")
        nodes = set(edges) | set(edges.values()) | {self.ROOT}
        for name, parent in edges.items():
            if parent != self.ROOT and parent not in edges:
                raise ValueError(f"dangling supertype {parent!r} for {name!r}")
        for start in edges:
            seen = {start}
            cur = start
            while cur != self.ROOT:
                cur = edges[cur]
                if cur in seen:
                    raise ValueError(f"cycle through {cur!r}")
                seen.add(cur)
        self.edges: dict[str, str] = edges
        self._nodes = nodes
        by_simple: dict[str, list[str]] = {}
        for n in sorted(nodes):
            by_simple.setdefault(simple_type_name(n), []).append(n)
        self._by_simple = by_simple

    def __eq__(self, other):
        return isinstance(other, ExceptionHierarchy) and self.edges == other.edges

    def __repr__(self):
        return f"ExceptionHierarchy({len(self._nodes)} types)"

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self._nodes)

    def resolve(self, name: str) -> str | None:
        """Fully-qualified form of a known type, else None."""
        if name in self._nodes:
            return name
        if "." not in name:
            matches = self._by_simple.get(name, [])
            if len(matches) == 1:
                return matches[0]
        return None

    def canonical(self, name: str) -> str:
        """Resolve to the unique fully-qualified name when possible."""
        return self.resolve(name) or name

    def is_ambiguous(self, simple: str) -> bool:
        return len(self._by_simple.get(simple, [])) > 1

    def supertypes(self, name: str) -> list[str]:
        """Chain of supertypes, starting at the type itself, ending at the root."""
        resolved = self.resolve(name)
        if resolved is None:
            return [name, self.ROOT]
        chain = [resolved]
        while chain[-1] != self.ROOT:
            chain.append(self.edges[chain[-1]])
        return chain

    def is_subtype(self, sub: str, sup: str) -> bool:
        """True iff sub equals sup or sup lies on sub's supertype chain."""
        if sub == sup:
            return True
        s = self.resolve(sub)
        p = self.resolve(sup)
        if s is None:
            # Unknown types hang directly off the root.
            return p == self.ROOT
        if p is None:
            return False
        return p in self.supertypes(s)


def is_subtype(hierarchy: ExceptionHierarchy, sub: str, sup: str) -> bool:
    return hierarchy.is_subtype(sub, sup)


def default_hierarchy() -> ExceptionHierarchy:
    """The curated hierarchy of common JDK exception types shipped as data."""
    raw = resources.files("exchain").joinpath("data/hierarchy.json").read_text("utf-8")
    return ExceptionHierarchy(json.loads(raw)["edges"])


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable index from method fqn to exception specs, plus the hierarchy."""

    entries: dict[str, ApiEntry] = field(default_factory=dict)
    hierarchy: ExceptionHierarchy = field(default_factory=default_hierarchy)
    provenance: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def lookup(self, fqn: str) -> tuple[ExceptionSpec, ...]:
        entry = self.entries.get(fqn)
        return entry.specs if entry is not None else ()

    def __iter__(self) -> Iterator[ApiEntry]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def spec_count(self) -> int:
        return sum(len(e.specs) for e in self)


def kb_lookup(kb: KnowledgeBase, fqn: str) -> tuple[ExceptionSpec, ...]:
    """Specs of the matching entry; empty tuple when the fqn is absent."""
    return kb.lookup(fqn)


def build_knowledge_base(
    pages: Iterable[tuple[str, Iterable[ApiEntry]]],
    hierarchy: ExceptionHierarchy | None = None,
) -> KnowledgeBase:
    """Assemble a knowledge base from parsed pages.

    Simple exception names are canonicalized to fully-qualified names when
    the hierarchy knows exactly one type with that simple name; ambiguous
    names stay simple and are flagged in provenance. Entries with the same
    fqn from several pages are merged (spec union, collision noted).
    """
    hierarchy = hierarchy or default_hierarchy()
    entries: dict[str, ApiEntry] = {}
    provenance: dict[str, list[str]] = {}

    for page_id, page_entries in pages:
        for entry in page_entries:
            notes = [page_id]
            specs = []
            for spec in entry.specs:
                name = spec.exception
                if "." not in name:
                    resolved = hierarchy.resolve(name)
                    if resolved is not None:
                        name = resolved
                    elif hierarchy.is_ambiguous(spec.exception):
                        notes.append(f"ambiguous exception name: {spec.exception}")
                specs.append(replace(spec, exception=name))
            if entry.fqn in entries:
                notes.append("duplicate declaration")
                merged = list(entries[entry.fqn].specs) + specs
                entries[entry.fqn] = ApiEntry.make(entry.fqn, merged)
            else:
                entries[entry.fqn] = ApiEntry.make(entry.fqn, specs)
            provenance.setdefault(entry.fqn, []).extend(notes)

    return KnowledgeBase(
        entries=entries,
        hierarchy=hierarchy,
        provenance={fqn: tuple(notes) for fqn, notes in provenance.items()},
    )


def _entry_to_dict(entry: ApiEntry) -> dict:
    return {
        "fqn": entry.fqn,
        "simple_name": entry.simple_name,
        "arity": entry.arity,
        "declaring_type": entry.declaring_type,
        "specs": [
            {"exception": s.exception, "condition": s.condition, "guardable": s.guardable}
            for s in entry.specs
        ],
    }


def kb_save(kb: KnowledgeBase, path: str | Path) -> None:
    """Write a versioned knowledge-base file; stable bytes for stable input."""
    doc = {
        "version": KB_FORMAT_VERSION,
        "entries": [_entry_to_dict(kb.entries[fqn]) for fqn in sorted(kb.entries)],
        "hierarchy": {"edges": kb.hierarchy.edges},
        "provenance": {fqn: list(notes) for fqn, notes in sorted(kb.provenance.items())},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def kb_load(path: str | Path) -> KnowledgeBase:
    """Read a knowledge-base file, enforcing version and schema invariants."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise SchemaViolation(f"not a knowledge-base file: {err}") from err
    if not isinstance(doc, dict) or doc.get("version") != KB_FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"expected version {KB_FORMAT_VERSION}, found {doc.get('version')!r}"
        )

    try:
        hierarchy = ExceptionHierarchy(doc.get("hierarchy", {}).get("edges", {}))
    except (ValueError, AttributeError) as err:
        raise SchemaViolation(f"bad hierarchy: {err}") from err

    entries: dict[str, ApiEntry] = {}
    for record in doc.get("entries", ()):
        try:
            specs = [
                ExceptionSpec(s["exception"], s.get("condition", ""), s.get("guardable", False))
                for s in record["specs"]
            ]
            entry = ApiEntry(
                fqn=record["fqn"],
                simple_name=record["simple_name"],
                arity=record["arity"],
                declaring_type=record["declaring_type"],
                specs=tuple(specs),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise SchemaViolation(f"bad entry record: {err}", record) from err
        if entry.fqn in entries:
            raise SchemaViolation(f"duplicate fqn {entry.fqn!r}", record)
        entries[entry.fqn] = entry

    provenance_raw = doc.get("provenance", {})
    if not isinstance(provenance_raw, dict):
        raise SchemaViolation("provenance must be a mapping", provenance_raw)
    provenance = {fqn: tuple(notes) for fqn, notes in provenance_raw.items()}
    return KnowledgeBase(entries=entries, hierarchy=hierarchy, provenance=provenance)
