"""Parse Javadoc-style documentation pages into API entries.

Pages are already-downloaded files, either raw markup or pre-extracted text.
Only two kinds of content matter: method declarations (which carry the
fully-qualified name) and Throws clauses; everything else on a page (code
snippets, prose, parameter tables) is ignored.
"""

from __future__ import annotations

import html
import re

from .errors import MalformedClause, PageStructureError
from .kb import ApiEntry, ExceptionSpec, split_parameters

_THROWS_PREFIX = re.compile(r"^\s*throws:\s*", re.IGNORECASE)

# "public E get(int index)": at least one modifier, a return type, a name,
# and a flat parameter list, as rendered in method-detail sections.
_MODIFIER = r"(?:public|protected|private|static|final|abstract|synchronized|native|strictfp|default)"
_SIGNATURE = re.compile(
    rf"^{_MODIFIER}(?:\s+{_MODIFIER})*"
    r"(?:\s+<[^<>]*>)?"                      # method type parameters
    r"\s+([\w.$]+(?:<[^<>]*>)?(?:\[\])*)"    # return type
    r"\s+([A-Za-z_$][\w$]*)"                 # method name
    r"\s*\(([^()]*)\)"
    r"(?:\s+throws\s+[\w.$]+(?:\s*,\s*[\w.$]+)*)?\s*$"
)

_CLASS_FQN = re.compile(r"^(?:[a-z][\w$]*\.)+[A-Z][\w$]*$")

# A bare exception name (capitalized, so method-name headings do not match)
# or any "Name - condition" form.
_CLAUSE_LINE = re.compile(r"^(?:[\w.$]*[.$])?[A-Z][\w$]*$|^[A-Za-z_$][\w.$]*\s+-\s+.*$")

_SECTION_HEADERS = (
    "parameters:", "returns:", "throws:", "see also:", "since:",
    "type parameters:", "specified by:", "overrides:", "api note:",
    "implementation requirements:", "implementation note:",
)

_TAG_BREAKS = re.compile(r"</?(?:p|div|li|dt|dd|tr|br|pre|h[1-6])\b[^>]*>", re.IGNORECASE)
_TAG_ANY = re.compile(r"<[^>]+>")
_SCRIPT = re.compile(r"<(script|style)\b.*?</\1>", re.IGNORECASE | re.DOTALL)


def parse_throws_clause(text: str) -> ExceptionSpec:
    """Parse one 'Throws: Exception - condition' clause.

    The exception is the token before the first ' - ' separator; the
    condition keeps its wording verbatim, minus surrounding whitespace and a
    single trailing period. A condition starting with "if" marks a checkable
    precondition (guardable).
    """
    m = _THROWS_PREFIX.match(text)
    if m is None:
        raise MalformedClause(f"not a Throws clause: {text.strip()[:80]!r}")
    rest = text[m.end():].strip()
    exception, _, condition = rest.partition(" - ")
    exception = exception.strip()
    if not exception or any(ch.isspace() for ch in exception):
        raise MalformedClause(f"missing exception token in {text.strip()[:80]!r}")
    condition = condition.strip()
    if condition.endswith("."):
        condition = condition[:-1]
    return ExceptionSpec(
        exception=exception,
        condition=condition,
        guardable=bool(condition) and condition.startswith("if"),
    )


def looks_like_markup(page: str) -> bool:
    return bool(re.search(r"<\s*(?:html|head|body|div|dl|pre|h1|p|table)\b", page, re.IGNORECASE))


def strip_markup(page: str) -> str:
    """Reduce an HTML page to the line-oriented text form the parser reads."""
    text = _SCRIPT.sub("", page)
    text = _TAG_BREAKS.sub("\n", text)
    text = _TAG_ANY.sub("", text)
    text = html.unescape(text)
    lines = [line.strip() for line in text.splitlines()]
    return "\n".join(line for line in lines if line)


def _normalize_params(params: str) -> str:
    return ", ".join(" ".join(p.split()) for p in split_parameters(params))


def parse_api_page(page: str, page_id: str = "") -> list[ApiEntry]:
    """Extract one ApiEntry per declared method that documents a Throws clause.

    Clauses attach to the closest preceding declaration. Methods without any
    Throws clause are dropped. Raises PageStructureError when the page has no
    recognizable class identity or method declaration at all.
    """
    text = strip_markup(page) if looks_like_markup(page) else page
    lines = [line.strip() for line in text.splitlines()]

    declaring_type = next((l for l in lines if _CLASS_FQN.match(l)), None)

    declarations: list[dict] = []
    current: dict | None = None
    in_throws = False
    for line in lines:
        sig = _SIGNATURE.match(line)
        if sig:
            current = {"name": sig.group(2), "params": sig.group(3), "specs": []}
            declarations.append(current)
            in_throws = False
            continue
        lowered = line.lower()
        if lowered.startswith("throws:"):
            in_throws = True
            if current is not None and lowered != "throws:":
                current["specs"].append(parse_throws_clause(line))
            continue
        if any(lowered.startswith(h) for h in _SECTION_HEADERS):
            in_throws = False
            continue
        if in_throws and current is not None and line:
            if _CLAUSE_LINE.match(line):
                try:
                    current["specs"].append(parse_throws_clause("Throws: " + line))
                except MalformedClause:
                    in_throws = False
            else:
                in_throws = False

    if not declarations or declaring_type is None:
        raise PageStructureError(
            f"no method declaration located on page {page_id or '<unnamed>'!r}"
        )

    entries = []
    for decl in declarations:
        if not decl["specs"]:
            continue
        fqn = f"{declaring_type}.{decl['name']}({_normalize_params(decl['params'])})"
        entries.append(ApiEntry.make(fqn, decl["specs"]))
    return entries
