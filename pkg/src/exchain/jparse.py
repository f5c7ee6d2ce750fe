"""Tokenizer and statement-level parser for the analyzed Java subset.

The grammar covers one compilation unit: package/import declarations, class
bodies, method declarations with throws clauses, and the statement forms
that matter for exception-handling analysis (blocks, if/else, try/catch/
finally, throw, loops, switch). Expressions are scanned rather than parsed
into trees: the scan records method invocations (name, arity, receiver
chain) and object creations, in token order. Generic type arguments are
skipped, lambda block bodies are parsed as nested statements of the
enclosing method, and anonymous class bodies are parsed as class members.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import ParseError

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while""".split()
)

PRIMITIVES = frozenset("boolean byte char double float int long short void".split())

_STATEMENT_KEYWORDS = frozenset(
    "if for while switch catch return new assert synchronized throw".split()
)

IDENT, KW, NUM, STR, CHAR, OP, EOF = "ident", "kw", "num", "str", "char", "op", "eof"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


def _line_starts(source: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(source):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def line_col(source: str, offset: int) -> tuple[int, int]:
    """1-based line and column of a character offset."""
    starts = _line_starts(source)
    line = bisect.bisect_right(starts, offset) - 1
    return line + 1, offset - starts[line] + 1


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)

    def err(msg: str, at: int) -> ParseError:
        line, col = line_col(source, at)
        return ParseError(msg, line, col)

    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/" and i + 1 < n:
            nxt = source[i + 1]
            if nxt == "/":
                j = source.find("\n", i)
                i = n if j < 0 else j + 1
                continue
            if nxt == "*":
                j = source.find("*/", i + 2)
                if j < 0:
                    raise err("unterminated comment", i)
                i = j + 2
                continue
        if ch == '"':
            if source.startswith('"""', i):
                j = source.find('"""', i + 3)
                if j < 0:
                    raise err("unterminated text block", i)
                tokens.append(Token(STR, source[i:j + 3], i, j + 3))
                i = j + 3
                continue
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\\":
                    j += 1
                elif source[j] == "\n":
                    raise err("unterminated string literal", i)
                j += 1
            if j >= n:
                raise err("unterminated string literal", i)
            tokens.append(Token(STR, source[i:j + 1], i, j + 1))
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and source[j] != "'":
                if source[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise err("unterminated character literal", i)
            tokens.append(Token(CHAR, source[i:j + 1], i, j + 1))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "._"):
                j += 1
            tokens.append(Token(NUM, source[i:j], i, j))
            i = j
            continue
        if ch.isalpha() or ch in "_$":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            text = source[i:j]
            tokens.append(Token(KW if text in KEYWORDS else IDENT, text, i, j))
            i = j
            continue
        two = source[i:i + 2]
        if two in ("->", "::"):
            tokens.append(Token(OP, two, i, i + 2))
            i += 2
            continue
        tokens.append(Token(OP, ch, i, i + 1))
        i += 1

    tokens.append(Token(EOF, "", n, n))
    return tokens


# --- AST -----------------------------------------------------------------


@dataclass(eq=False)
class Node:
    span: tuple[int, int] = (0, 0)
    nested: list["Block"] = field(default_factory=list)  # lambda block bodies

    def children(self) -> list["Node"]:
        return list(self.nested)


@dataclass(eq=False)
class Block(Node):
    stmts: list[Node] = field(default_factory=list)

    def children(self):
        return self.stmts + list(self.nested)


@dataclass(eq=False)
class If(Node):
    cond_span: tuple[int, int] = (0, 0)
    then: Node | None = None
    orelse: Node | None = None

    def children(self):
        out = [s for s in (self.then, self.orelse) if s is not None]
        return out + list(self.nested)


@dataclass(eq=False)
class Catch(Node):
    types: list[str] = field(default_factory=list)
    var: str = ""
    body: Block | None = None

    def children(self):
        return ([self.body] if self.body else []) + list(self.nested)


@dataclass(eq=False)
class Try(Node):
    body: Block | None = None
    catches: list[Catch] = field(default_factory=list)
    fin: Block | None = None

    def children(self):
        out: list[Node] = [self.body] if self.body else []
        out.extend(self.catches)
        if self.fin:
            out.append(self.fin)
        return out + list(self.nested)


@dataclass(eq=False)
class Throw(Node):
    thrown: str | None = None  # type created at the throw site, when visible


@dataclass(eq=False)
class Loop(Node):
    kind: str = "while"
    body: Node | None = None

    def children(self):
        return ([self.body] if self.body else []) + list(self.nested)


@dataclass(eq=False)
class Switch(Node):
    stmts: list[Node] = field(default_factory=list)

    def children(self):
        return self.stmts + list(self.nested)


@dataclass(eq=False)
class Sync(Node):
    body: Block | None = None

    def children(self):
        return ([self.body] if self.body else []) + list(self.nested)


@dataclass(eq=False)
class Labeled(Node):
    label: str = ""
    stmt: Node | None = None

    def children(self):
        return ([self.stmt] if self.stmt else []) + list(self.nested)


@dataclass(eq=False)
class ExprStmt(Node):
    pass


@dataclass(eq=False)
class VarDecl(Node):
    type_name: str | None = None
    names: list[str] = field(default_factory=list)


@dataclass(eq=False)
class Simple(Node):
    kind: str = ""


@dataclass(eq=False)
class MethodDecl(Node):
    name: str = ""
    owner: str = ""
    is_ctor: bool = False
    params: list[tuple[str, str]] = field(default_factory=list)  # (type, name)
    throws: list[str] = field(default_factory=list)
    body: Block | None = None
    vars: list[tuple[str, str, int]] = field(default_factory=list)  # name, type, offset


@dataclass(eq=False)
class ClassDecl(Node):
    name: str = ""
    fields: dict[str, str] = field(default_factory=dict)  # name -> declared type
    methods: list[MethodDecl] = field(default_factory=list)
    nested_types: list["ClassDecl"] = field(default_factory=list)


@dataclass(eq=False)
class Invocation:
    name: str
    name_start: int
    arity: int
    receiver: str  # dotted chain text, '' when absent or not a name chain
    span: tuple[int, int]
    method: MethodDecl | None = None
    owner: ClassDecl | None = None


@dataclass
class ParsedUnit:
    source: str
    package: str | None
    imports: list[str]
    types: list[ClassDecl]
    methods: list[MethodDecl]
    invocations: list[Invocation]

    def method_at(self, offset: int) -> MethodDecl | None:
        """Innermost method whose span contains the offset."""
        best = None
        for m in self.methods:
            lo, hi = m.span
            if lo <= offset < hi and (best is None or hi - lo < best.span[1] - best.span[0]):
                best = m
        return best

    def class_of(self, method: MethodDecl) -> ClassDecl | None:
        def walk(types):
            for t in types:
                if method in t.methods:
                    return t
                found = walk(t.nested_types)
                if found:
                    return found
            return None
        return walk(self.types)


@dataclass
class ExprScan:
    span: tuple[int, int] = (0, 0)
    leading_new_type: str | None = None
    blocks: list[Block] = field(default_factory=list)


class Parser:
    """Recursive-descent parser over the token stream."""

    def __init__(self, source: str):
        self.source = source
        self.toks = tokenize(source)
        self.pos = 0
        self.imports: list[str] = []
        self.package: str | None = None
        self.types: list[ClassDecl] = []
        self.methods: list[MethodDecl] = []
        self.invocations: list[Invocation] = []
        self._method_stack: list[MethodDecl] = []
        self._class_stack: list[ClassDecl] = []
        self._anon_count = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        line, col = line_col(self.source, tok.start)
        return ParseError(msg, line, col)

    # -- entry point ----------------------------------------------------------

    def parse(self) -> ParsedUnit:
        self._skip_annotations()
        if self.at("package"):
            self.advance()
            self.package = self._dotted_name()
            self.expect(";")
        while True:
            self._skip_annotations()
            if not self.at("import"):
                break
            self.advance()
            if self.at("static"):
                self.advance()
            name = self._dotted_name(allow_star=True)
            self.expect(";")
            self.imports.append(name)
        while self.peek().kind != EOF:
            if self.at(";"):
                self.advance()
                continue
            self.types.append(self._type_decl())
        self.invocations.sort(key=lambda inv: inv.name_start)
        return ParsedUnit(
            source=self.source,
            package=self.package,
            imports=self.imports,
            types=self.types,
            methods=self.methods,
            invocations=self.invocations,
        )

    # -- declarations -----------------------------------------------------------

    def _skip_annotations(self):
        while self.at("@"):
            self.advance()
            if self.peek().kind in (IDENT, KW):
                self._dotted_name()
            if self.at("("):
                self._skip_balanced("(", ")")

    def _skip_modifiers(self):
        mods = {"public", "protected", "private", "static", "final", "abstract",
                "synchronized", "native", "strictfp", "default", "transient", "volatile"}
        while True:
            self._skip_annotations()
            if self.peek().text in mods:
                self.advance()
            else:
                return

    def _dotted_name(self, allow_star: bool = False) -> str:
        parts = [self.advance().text]
        while self.at(".") and (self.peek(1).kind in (IDENT, KW) or (allow_star and self.peek(1).text == "*")):
            self.advance()
            parts.append(self.advance().text)
            if parts[-1] == "*":
                break
        return ".".join(parts)

    def _skip_balanced(self, open_text: str, close_text: str):
        self.expect(open_text)
        depth = 1
        while depth:
            tok = self.advance()
            if tok.kind == EOF:
                raise self.error(f"unbalanced {open_text!r}")
            if tok.text == open_text:
                depth += 1
            elif tok.text == close_text:
                depth -= 1

    def _try_skip_generics(self) -> bool:
        """Skip a balanced <...> of type-ish tokens; False if it is not one."""
        if not self.at("<"):
            return False
        allowed = {"<", ">", ",", ".", "?", "[", "]", "&", "extends", "super"}
        i = self.pos
        depth = 0
        while i < len(self.toks):
            t = self.toks[i]
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
                if depth == 0:
                    self.pos = i + 1
                    return True
            elif t.kind not in (IDENT,) and t.text not in allowed and t.text not in PRIMITIVES:
                return False
            i += 1
        return False

    def _try_parse_type(self) -> str | None:
        """Parse a type reference; None (position restored) if not a type."""
        start = self.pos
        tok = self.peek()
        if tok.text in PRIMITIVES:
            self.advance()
            base = tok.text
        elif tok.kind == IDENT:
            base = self._dotted_name()
            if self.at("<") and not self._try_skip_generics():
                self.pos = start
                return None
        else:
            return None
        while self.at("[") and self.peek(1).text == "]":
            self.advance()
            self.advance()
            base += "[]"
        return base

    def _type_decl(self) -> ClassDecl:
        self._skip_modifiers()
        kind_tok = self.peek()
        if kind_tok.text not in ("class", "interface", "enum", "record"):
            raise self.error(f"unsupported top-level construct {kind_tok.text!r}")
        self.advance()
        name_tok = self.advance()
        decl = ClassDecl(name=name_tok.text, span=(kind_tok.start, name_tok.end))
        if self.at("<"):
            self._try_skip_generics()
        if kind_tok.text == "record" and self.at("("):
            self._record_components(decl)
        while not self.at("{"):
            if self.peek().kind == EOF:
                raise self.error("missing class body")
            self.advance()  # extends/implements clauses
        self._class_body(decl)
        decl.span = (kind_tok.start, self.toks[self.pos - 1].end)
        return decl

    def _record_components(self, decl: ClassDecl):
        self.expect("(")
        while not self.at(")"):
            self._skip_annotations()
            ctype = self._try_parse_type()
            if ctype is None:
                raise self.error("bad record component")
            name = self.advance().text
            decl.fields[name] = ctype
            if self.at(","):
                self.advance()
        self.expect(")")

    def _class_body(self, decl: ClassDecl):
        self.expect("{")
        self._class_stack.append(decl)
        try:
            while not self.at("}"):
                if self.peek().kind == EOF:
                    raise self.error("unterminated class body")
                self._class_member(decl)
        finally:
            self._class_stack.pop()
        self.expect("}")

    def _class_member(self, decl: ClassDecl):
        if self.at(";"):
            self.advance()
            return
        self._skip_modifiers()
        tok = self.peek()
        if tok.text in ("class", "interface", "enum", "record"):
            decl.nested_types.append(self._type_decl())
            return
        if tok.text == "{":  # instance or static initializer
            method = MethodDecl(name="<initializer>", owner=decl.name, span=(tok.start, tok.start))
            self._enter_method(method, decl)
            method.body = self._block()
            self._leave_method()
            method.span = (tok.start, method.body.span[1])
            return
        if self.at("<"):
            self._try_skip_generics()
            tok = self.peek()
        # constructor: ClassName (
        if tok.kind == IDENT and tok.text == decl.name and self.peek(1).text == "(":
            self.advance()
            self._method_rest(decl, name_tok=tok, is_ctor=True)
            return
        rtype = self._try_parse_type()
        if rtype is not None and self.peek().kind == IDENT and self.peek(1).text == "(":
            name_tok = self.advance()
            self._method_rest(decl, name_tok=name_tok, is_ctor=False)
            return
        if rtype is not None and self.peek().kind == IDENT:
            self._field_rest(decl, rtype)
            return
        raise self.error(f"unsupported class member near {tok.text!r}", tok)

    def _field_rest(self, decl: ClassDecl, ftype: str):
        while True:
            name_tok = self.advance()
            decl.fields[name_tok.text] = ftype
            while self.at("[") and self.peek(1).text == "]":
                self.advance()
                self.advance()
            if self.at("="):
                self.advance()
                self._scan_expression({",", ";"})
            if self.at(","):
                self.advance()
                continue
            break
        self.expect(";")

    def _method_rest(self, decl: ClassDecl, name_tok: Token, is_ctor: bool):
        method = MethodDecl(
            name=name_tok.text, owner=decl.name, is_ctor=is_ctor,
            span=(name_tok.start, name_tok.end),
        )
        self.expect("(")
        while not self.at(")"):
            self._skip_annotations()
            if self.at("final"):
                self.advance()
            ptype = self._try_parse_type()
            if ptype is None:
                raise self.error("bad parameter declaration")
            if self.at(".") :  # varargs '...': three OP '.' tokens
                while self.at("."):
                    self.advance()
                ptype += "..."
            pname = self.advance().text
            while self.at("[") and self.peek(1).text == "]":
                self.advance()
                self.advance()
            method.params.append((ptype, pname))
            if self.at(","):
                self.advance()
        self.expect(")")
        if self.at("throws"):
            self.advance()
            while True:
                method.throws.append(self._dotted_name())
                if self.at(","):
                    self.advance()
                    continue
                break
        decl.methods.append(method)
        self.methods.append(method)
        for ptype, pname in method.params:
            method.vars.append((pname, erase_type(ptype), name_tok.start))
        if self.at(";"):
            self.advance()
            return
        self._enter_method(method, decl)
        method.body = self._block()
        self._leave_method()
        method.span = (name_tok.start, method.body.span[1])

    def _enter_method(self, method: MethodDecl, decl: ClassDecl):
        if method not in decl.methods:
            decl.methods.append(method)
        if method not in self.methods:
            self.methods.append(method)
        self._method_stack.append(method)

    def _leave_method(self):
        self._method_stack.pop()

    def _register_var(self, name: str, type_name: str | None, offset: int):
        if self._method_stack and type_name:
            self._method_stack[-1].vars.append((name, erase_type(type_name), offset))

    # -- statements ------------------------------------------------------------

    def _block(self) -> Block:
        open_tok = self.expect("{")
        block = Block(span=(open_tok.start, open_tok.end))
        while not self.at("}"):
            if self.peek().kind == EOF:
                raise self.error("unterminated block")
            block.stmts.append(self._statement())
        close = self.expect("}")
        block.span = (open_tok.start, close.end)
        return block

    def _statement(self) -> Node:
        tok = self.peek()
        text = tok.text
        if text == "{":
            return self._block()
        if text == "if":
            return self._if_stmt()
        if text == "try":
            return self._try_stmt()
        if text == "throw":
            return self._throw_stmt()
        if text == "return":
            self.advance()
            scan = None
            if not self.at(";"):
                scan = self._scan_expression({";"})
            end = self.expect(";")
            node = Simple(kind="return", span=(tok.start, end.end))
            if scan:
                node.nested.extend(scan.blocks)
            return node
        if text == "while":
            self.advance()
            self.expect("(")
            scan = self._scan_expression({")"})
            self.expect(")")
            body = self._statement()
            loop = Loop(kind="while", body=body, span=(tok.start, body.span[1]))
            loop.nested.extend(scan.blocks)
            return loop
        if text == "do":
            self.advance()
            body = self._statement()
            self.expect("while")
            self.expect("(")
            scan = self._scan_expression({")"})
            self.expect(")")
            end = self.expect(";")
            loop = Loop(kind="do", body=body, span=(tok.start, end.end))
            loop.nested.extend(scan.blocks)
            return loop
        if text == "for":
            return self._for_stmt()
        if text == "switch":
            return self._switch_stmt()
        if text == "synchronized":
            self.advance()
            self.expect("(")
            scan = self._scan_expression({")"})
            self.expect(")")
            body = self._block()
            node = Sync(body=body, span=(tok.start, body.span[1]))
            node.nested.extend(scan.blocks)
            return node
        if text in ("break", "continue"):
            self.advance()
            if self.peek().kind == IDENT:
                self.advance()
            end = self.expect(";")
            return Simple(kind=text, span=(tok.start, end.end))
        if text == "assert":
            self.advance()
            scan = self._scan_expression({";"})
            end = self.expect(";")
            node = Simple(kind="assert", span=(tok.start, end.end))
            node.nested.extend(scan.blocks)
            return node
        if text == ";":
            end = self.advance()
            return Simple(kind="empty", span=(tok.start, end.end))
        if text in ("class", "interface", "enum", "record"):
            decl = self._type_decl()
            return Simple(kind="local-class", span=decl.span)
        if tok.kind == IDENT and self.peek(1).text == ":" and self.peek(1).kind == OP:
            self.advance()
            self.advance()
            inner = self._statement()
            return Labeled(label=text, stmt=inner, span=(tok.start, inner.span[1]))
        decl = self._try_var_decl()
        if decl is not None:
            return decl
        scan = self._scan_expression({";"})
        end = self.expect(";")
        node = ExprStmt(span=(tok.start, end.end))
        node.nested.extend(scan.blocks)
        return node

    def _if_stmt(self) -> If:
        tok = self.expect("if")
        self.expect("(")
        cond_start = self.peek().start
        scan = self._scan_expression({")"})
        cond_end = self.peek().start
        self.expect(")")
        then = self._statement()
        orelse = None
        if self.at("else"):
            self.advance()
            orelse = self._statement()
        end = (orelse or then).span[1]
        node = If(cond_span=(cond_start, cond_end), then=then, orelse=orelse,
                  span=(tok.start, end))
        node.nested.extend(scan.blocks)
        return node

    def _try_stmt(self) -> Try:
        tok = self.expect("try")
        node = Try(span=(tok.start, tok.end))
        has_resources = False
        if self.at("("):
            has_resources = True
            self.advance()
            while not self.at(")"):
                if self.at(";"):
                    self.advance()
                    continue
                if self.at("final"):
                    self.advance()
                rtype = self._try_parse_type()
                if rtype is not None and self.peek().kind == IDENT:
                    name_tok = self.advance()
                    self._register_var(name_tok.text, rtype, name_tok.start)
                    if self.at("="):
                        self.advance()
                        self._scan_expression({";", ")"})
                else:
                    self._scan_expression({";", ")"})
            self.expect(")")
        node.body = self._block()
        while self.at("catch"):
            ctok = self.advance()
            self.expect("(")
            if self.at("final"):
                self.advance()
            types = []
            while True:
                t = self._try_parse_type()
                if t is None:
                    raise self.error("bad catch parameter")
                types.append(t)
                if self.at("|"):
                    self.advance()
                    continue
                break
            var_tok = self.advance()
            self.expect(")")
            self._register_var(var_tok.text, types[0], var_tok.start)
            body = self._block()
            node.catches.append(
                Catch(types=types, var=var_tok.text, body=body, span=(ctok.start, body.span[1]))
            )
        if self.at("finally"):
            self.advance()
            node.fin = self._block()
        if not node.catches and node.fin is None and not has_resources:
            raise self.error("try without catch or finally")
        last = node.fin or (node.catches[-1] if node.catches else node.body)
        node.span = (tok.start, last.span[1])
        return node

    def _throw_stmt(self) -> Throw:
        tok = self.expect("throw")
        scan = self._scan_expression({";"})
        end = self.expect(";")
        node = Throw(thrown=scan.leading_new_type, span=(tok.start, end.end))
        node.nested.extend(scan.blocks)
        return node

    def _for_stmt(self) -> Loop:
        tok = self.expect("for")
        self.expect("(")
        blocks: list[Block] = []
        # enhanced for: [final] Type name : expr
        start = self.pos
        enhanced = False
        if self.at("final"):
            self.advance()
        ftype = self._try_parse_type()
        if ftype is not None and self.peek().kind == IDENT and self.peek(1).text == ":":
            name_tok = self.advance()
            self._register_var(name_tok.text, ftype, name_tok.start)
            self.expect(":")
            blocks.extend(self._scan_expression({")"}).blocks)
            enhanced = True
        else:
            self.pos = start
        if not enhanced:
            # initializer; a successful var decl consumes the first ';'
            if self.at(";"):
                self.advance()
            elif self._try_var_decl(terminators={";"}) is None:
                blocks.extend(self._scan_expression({";"}).blocks)
                self.expect(";")
            # condition
            if not self.at(";"):
                blocks.extend(self._scan_expression({";"}).blocks)
            self.expect(";")
            # update
            if not self.at(")"):
                blocks.extend(self._scan_expression({")"}).blocks)
        self.expect(")")
        body = self._statement()
        loop = Loop(kind="for", body=body, span=(tok.start, body.span[1]))
        loop.nested.extend(blocks)
        return loop

    def _switch_stmt(self) -> Switch:
        tok = self.expect("switch")
        self.expect("(")
        scan = self._scan_expression({")"})
        self.expect(")")
        self.expect("{")
        node = Switch(span=(tok.start, tok.end))
        node.nested.extend(scan.blocks)
        while not self.at("}"):
            if self.peek().kind == EOF:
                raise self.error("unterminated switch body")
            if self.at("case"):
                self.advance()
                self._scan_expression({":", "->"})
                arrow = self.advance().text == "->"
                if arrow:
                    node.stmts.append(self._statement())
                continue
            if self.at("default"):
                self.advance()
                arrow = self.advance().text == "->"
                if arrow:
                    node.stmts.append(self._statement())
                continue
            node.stmts.append(self._statement())
        end = self.expect("}")
        node.span = (tok.start, end.end)
        return node

    def _try_var_decl(self, terminators: frozenset[str] | set[str] = frozenset({";"})) -> VarDecl | None:
        start = self.pos
        start_tok = self.peek()
        if self.at("final"):
            self.advance()
        if self.at("var"):
            if self.peek(1).kind == IDENT:
                self.advance()
                name_tok = self.advance()
                node = VarDecl(type_name=None, names=[name_tok.text])
                inferred = None
                if self.at("="):
                    self.advance()
                    scan = self._scan_expression(set(terminators) | {","})
                    inferred = scan.leading_new_type
                    node.nested.extend(scan.blocks)
                self._register_var(name_tok.text, inferred, name_tok.start)
                node.type_name = inferred
                end = self.expect(";") if ";" in terminators else self.peek()
                node.span = (start_tok.start, end.end)
                return node
            self.pos = start
            return None
        vtype = self._try_parse_type()
        if vtype is None or self.peek().kind != IDENT or self.peek(1).text not in (",", "=", ";", "["):
            self.pos = start
            return None
        node = VarDecl(type_name=vtype, names=[])
        while True:
            name_tok = self.advance()
            node.names.append(name_tok.text)
            self._register_var(name_tok.text, vtype, name_tok.start)
            while self.at("[") and self.peek(1).text == "]":
                self.advance()
                self.advance()
            if self.at("="):
                self.advance()
                scan = self._scan_expression(set(terminators) | {","})
                node.nested.extend(scan.blocks)
            if self.at(","):
                self.advance()
                continue
            break
        if ";" in terminators and self.at(";"):
            end = self.advance()
            node.span = (start_tok.start, end.end)
        else:
            node.span = (start_tok.start, self.peek().start)
        return node

    # -- expression scanning ------------------------------------------------------

    def _scan_expression(self, stoppers: set[str]) -> ExprScan:
        """Consume one expression, recording invocations and creations.

        Stops at any stopper token at nesting depth zero. Lambda block bodies
        are parsed as statements; anonymous class bodies as class members.
        """
        scan = ExprScan()
        start_tok = self.peek()
        depth = 0
        first = True
        pending_anon: set[int] = set()
        while True:
            tok = self.peek()
            if tok.kind == EOF:
                raise self.error("unexpected end of input in expression")
            if depth == 0 and tok.text in stoppers:
                break
            if tok.text in ("(", "["):
                depth += 1
                self.advance()
                first = False
                continue
            if tok.text == "{":
                if self.pos in pending_anon:
                    pending_anon.discard(self.pos)
                    self._anonymous_body()
                    continue
                depth += 1
                self.advance()
                first = False
                continue
            if tok.text in (")", "]", "}"):
                if depth == 0:
                    raise self.error(f"unbalanced {tok.text!r} in expression")
                depth -= 1
                self.advance()
                continue
            if tok.text == "new" and tok.kind == KW:
                self.advance()
                tname = self._creation_type()
                if first and tname and self.peek().text == "(":
                    scan.leading_new_type = tname
                if self.peek().text == "(":
                    rp = self._match_ahead(self.pos)
                    if rp is not None and self.toks[rp + 1].text == "{":
                        pending_anon.add(rp + 1)
                first = False
                continue
            if tok.text == "->":
                self.advance()
                if self.at("{"):
                    scan.blocks.append(self._block())
                continue
            if tok.kind == IDENT and self.peek(1).text == "(":
                self._record_invocation()
                first = False
                continue
            if tok.kind == KW and tok.text in ("this", "super") and self.peek(1).text == "(":
                self.advance()  # constructor chain call, not a call site
                first = False
                continue
            self.advance()
            first = False
        end = self.peek().start
        scan.span = (start_tok.start, end)
        return scan

    def _creation_type(self) -> str | None:
        if self.peek().text in PRIMITIVES:
            base = self.advance().text
        elif self.peek().kind == IDENT:
            base = self._dotted_name()
        else:
            return None
        if self.at("<"):
            self._try_skip_generics()
        return base

    def _anonymous_body(self):
        """Parse an anonymous class body; its methods join the unit's list."""
        self._anon_count += 1
        owner = self._class_stack[-1] if self._class_stack else None
        decl = ClassDecl(name=f"{owner.name if owner else ''}${self._anon_count}")
        if owner is not None:
            owner.nested_types.append(decl)
        else:
            self.types.append(decl)
        start = self.peek().start
        self._class_body(decl)
        decl.span = (start, self.toks[self.pos - 1].end)

    def _record_invocation(self):
        name_tok = self.advance()  # IDENT; '(' is current
        lp = self.pos
        rp = self._match_ahead(lp)
        if rp is None:
            raise self.error("unbalanced call parenthesis", name_tok)
        arity = self._count_args(lp, rp)
        receiver = self._receiver_chain(self.pos - 1)
        self.invocations.append(
            Invocation(
                name=name_tok.text,
                name_start=name_tok.start,
                arity=arity,
                receiver=receiver,
                span=(name_tok.start, self.toks[rp].end),
                method=self._method_stack[-1] if self._method_stack else None,
                owner=self._class_stack[-1] if self._class_stack else None,
            )
        )
        # The argument list is scanned by the main loop, so nested calls,
        # lambdas, and anonymous bodies inside the arguments are still seen.

    def _match_ahead(self, lp: int) -> int | None:
        """Index of the ')' matching toks[lp] == '(', ignoring nesting kinds."""
        depth = 0
        i = lp
        while i < len(self.toks):
            text = self.toks[i].text
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return i
            i += 1
        return None

    def _count_args(self, lp: int, rp: int) -> int:
        if rp == lp + 1:
            return 0
        commas = 0
        depth = 0
        i = lp
        while i < rp:
            tok = self.toks[i]
            if tok.text in ("(", "[", "{"):
                depth += 1
            elif tok.text in (")", "]", "}"):
                depth -= 1
            elif depth == 1:
                if tok.text == ",":
                    commas += 1
                elif tok.kind == IDENT and self.toks[i + 1].text == "<":
                    end = self._generic_args_end(i + 1)
                    if end is not None and self.toks[end].text in ("(", ")", ",", ".", "::"):
                        i = end - 1
            i += 1
        return commas + 1

    def _generic_args_end(self, lt: int) -> int | None:
        """Token index just past a type-argument list starting at toks[lt]=='<'."""
        allowed = {"<", ">", ",", ".", "?", "[", "]", "&", "extends", "super"}
        depth = 0
        i = lt
        while i < len(self.toks):
            t = self.toks[i]
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
                if depth == 0:
                    return i + 1
            elif t.kind != IDENT and t.text not in allowed and t.text not in PRIMITIVES:
                return None
            i += 1
        return None

    def _receiver_chain(self, name_idx: int) -> str:
        """Dotted name chain immediately before the call name, or ''."""
        j = name_idx - 1
        if j < 0 or self.toks[j].text != ".":
            return ""
        parts: list[str] = []
        k = j - 1
        while k >= 0:
            tok = self.toks[k]
            if tok.kind == IDENT:
                parts.append(tok.text)
                if k - 1 >= 0 and self.toks[k - 1].text == ".":
                    k -= 2
                    continue
                break
            if tok.kind == KW and tok.text == "this":
                parts.append("this")
                break
            # call result, array element, literal, or cast: type unknown
            return ""
        if k - 1 >= 0 and self.toks[k - 1].text == "." and not parts[-1] == "this":
            return ""  # chain anchored on a non-name expression
        return ".".join(reversed(parts))


def erase_type(type_name: str) -> str:
    """Drop generic arguments and array/vararg suffixes from a type name."""
    base = type_name.split("<", 1)[0]
    return base.replace("[]", "").replace("...", "").strip()


def parse_java(source: str) -> ParsedUnit:
    """Parse a compilation unit of the supported subset."""
    return Parser(source).parse()
