"""AST, parser and pretty-printer for the small WHILE language.

Concrete syntax::

    program := stmt*
    stmt    := ID "=" expr ";" | "skip" ";" | "use" "(" ID {"," ID} ")" ";"
             | "while" "(" expr ")" block | "if" "(" expr ")" block ["else" block]
    block   := "{" stmt* "}"

Expressions use C precedence (``* / %`` over ``+ -`` over ``< <= > >=``
over ``== !=``), all binary operators are left associative, ``-`` is the
only unary operator, ``//`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1

BINARY_OPS = ("+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=")
_PRECEDENCE = {
    "==": 1, "!=": 1,
    "<": 2, "<=": 2, ">": 2, ">=": 2,
    "+": 3, "-": 3,
    "*": 4, "/": 4, "%": 4,
}
_UNARY_PREC = 5
KEYWORDS = frozenset({"while", "if", "else", "skip", "use"})


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int

    def __post_init__(self):
        if not INT_MIN <= self.value <= INT_MAX:
            raise ValueError(f"integer literal out of 64-bit range: {self.value}")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[IntLit, Var, Unary, Binary]


# --- commands --------------------------------------------------------------
# ``span`` is (first line, last line) in the source; it never takes part in
# structural equality.

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    items: tuple["Command", ...] = ()
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Skip:
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Use:
    args: tuple[str, ...]
    site: Optional[int] = field(default=None, compare=False)
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.args:
            raise ValueError("use() needs at least one variable")


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Command"
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then_branch: "Command"
    else_branch: Optional["Command"] = None
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


Command = Union[Assign, Seq, Skip, Use, While, If]


def seq(*items: Command) -> Seq:
    return Seq(tuple(items))


# --- variable queries ------------------------------------------------------

def vars_of_expr(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, IntLit):
        return frozenset()
    if isinstance(e, Unary):
        return vars_of_expr(e.operand)
    return vars_of_expr(e.lhs) | vars_of_expr(e.rhs)


def in_vars(c: Command) -> frozenset[str]:
    """Variables read anywhere in ``c`` (right-hand sides, conditions, use arguments)."""
    if isinstance(c, Assign):
        return vars_of_expr(c.value)
    if isinstance(c, Use):
        return frozenset(c.args)
    if isinstance(c, Skip):
        return frozenset()
    if isinstance(c, Seq):
        return frozenset().union(*(in_vars(x) for x in c.items))
    if isinstance(c, While):
        return vars_of_expr(c.cond) | in_vars(c.body)
    out = vars_of_expr(c.cond) | in_vars(c.then_branch)
    if c.else_branch is not None:
        out |= in_vars(c.else_branch)
    return out


def out_vars(c: Command) -> frozenset[str]:
    """Variables that ``c`` may assign."""
    if isinstance(c, Assign):
        return frozenset((c.target,))
    if isinstance(c, (Use, Skip)):
        return frozenset()
    if isinstance(c, Seq):
        return frozenset().union(*(out_vars(x) for x in c.items))
    if isinstance(c, While):
        return out_vars(c.body)
    out = out_vars(c.then_branch)
    if c.else_branch is not None:
        out |= out_vars(c.else_branch)
    return out


def _expr_var_order(e: Expr) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, Unary):
        yield from _expr_var_order(e.operand)
    elif isinstance(e, Binary):
        yield from _expr_var_order(e.lhs)
        yield from _expr_var_order(e.rhs)


def _cmd_var_order(c: Command) -> Iterator[str]:
    if isinstance(c, Assign):
        yield c.target
        yield from _expr_var_order(c.value)
    elif isinstance(c, Use):
        yield from c.args
    elif isinstance(c, Seq):
        for x in c.items:
            yield from _cmd_var_order(x)
    elif isinstance(c, While):
        yield from _expr_var_order(c.cond)
        yield from _cmd_var_order(c.body)
    elif isinstance(c, If):
        yield from _expr_var_order(c.cond)
        yield from _cmd_var_order(c.then_branch)
        if c.else_branch is not None:
            yield from _cmd_var_order(c.else_branch)


def variables(c: Command) -> list[str]:
    """All variables of ``c`` in order of first textual occurrence."""
    return list(dict.fromkeys(_cmd_var_order(c)))


def contains_use(c: Command) -> bool:
    if isinstance(c, Use):
        return True
    if isinstance(c, Seq):
        return any(contains_use(x) for x in c.items)
    if isinstance(c, While):
        return contains_use(c.body)
    if isinstance(c, If):
        return contains_use(c.then_branch) or (
            c.else_branch is not None and contains_use(c.else_branch))
    return False


def iter_commands(c: Command) -> Iterator[Command]:
    """Pre-order walk over all command nodes."""
    yield c
    if isinstance(c, Seq):
        for x in c.items:
            yield from iter_commands(x)
    elif isinstance(c, While):
        yield from iter_commands(c.body)
    elif isinstance(c, If):
        yield from iter_commands(c.then_branch)
        if c.else_branch is not None:
            yield from iter_commands(c.else_branch)


def flatten(c: Command) -> list[Command]:
    """Top-level statements of ``c``, splicing nested sequences."""
    if isinstance(c, Seq):
        out = []
        for x in c.items:
            out.extend(flatten(x))
        return out
    return [c]


# --- parsing ---------------------------------------------------------------

class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|==|!=|[-+*/%<>=(){};,])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str  # "int", "id", "kw", "op", "eof"
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "id":
            toks.append(_Tok("kw" if text in KEYWORDS else "id", text, line, col))
        elif kind in ("int", "op"):
            toks.append(_Tok(kind, text, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, source: str):
        self.toks = _tokenize(source)
        self.pos = 0
        self.use_sites = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"expected {expected}, found {found}", t.line, t.col)

    def accept(self, text: str) -> Optional[_Tok]:
        t = self.tok
        if t.kind in ("op", "kw") and t.text == text:
            self.pos += 1
            return t
        return None

    def expect(self, text: str) -> _Tok:
        t = self.accept(text)
        if t is None:
            self.error(repr(text))
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id":
            self.error("identifier")
        self.pos += 1
        return t.text

    def program(self) -> Seq:
        items = []
        while self.tok.kind != "eof":
            items.append(self.stmt())
        return Seq(tuple(items), span=(1, self.tok.line))

    def block(self) -> tuple[Seq, int]:
        start = self.expect("{")
        items = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("'}'")
            items.append(self.stmt())
        end = self.toks[self.pos - 1].line
        return Seq(tuple(items), span=(start.line, end)), end

    def stmt(self) -> Command:
        t = self.tok
        if self.accept("skip"):
            self.expect(";")
            return Skip(span=(t.line, t.line))
        if self.accept("use"):
            self.expect("(")
            args = [self.ident()]
            while self.accept(","):
                args.append(self.ident())
            self.expect(")")
            self.expect(";")
            site = self.use_sites
            self.use_sites += 1
            return Use(tuple(args), site=site, span=(t.line, t.line))
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            body, end = self.block()
            return While(cond, body, span=(t.line, end))
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then, end = self.block()
            other = None
            if self.accept("else"):
                other, end = self.block()
            return If(cond, then, other, span=(t.line, end))
        if t.kind == "id":
            name = self.ident()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return Assign(name, value, span=(t.line, t.line))
        self.error("statement")

    def expr(self, min_prec: int = 1) -> Expr:
        lhs = self.unary()
        while True:
            t = self.tok
            prec = _PRECEDENCE.get(t.text) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return lhs
            self.pos += 1
            rhs = self.expr(prec + 1)
            lhs = Binary(t.text, lhs, rhs)

    def unary(self) -> Expr:
        t = self.tok
        if self.accept("-"):
            nxt = self.tok
            if nxt.kind == "int":
                # fold so that INT_MIN is expressible
                self.pos += 1
                return self._literal(-int(nxt.text), nxt)
            return Unary("neg", self.unary())
        return self.atom()

    def _literal(self, value: int, t: _Tok) -> IntLit:
        if not INT_MIN <= value <= INT_MAX:
            raise ParseError("integer literal out of 64-bit range", t.line, t.col)
        return IntLit(value)

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return self._literal(int(t.text), t)
        if t.kind == "id":
            self.pos += 1
            return Var(t.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error("expression")


def parse(source: str) -> Seq:
    """Parse a whole program into a single ``Seq``.

    Raises :class:`ParseError` carrying the line and column of the offending token.
    """
    return _Parser(source).program()


# --- pretty-printing -------------------------------------------------------

def pretty_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"-({pretty_expr(e.operand)})"
    prec = _PRECEDENCE[e.op]
    text = f"{pretty_expr(e.lhs, prec)} {e.op} {pretty_expr(e.rhs, prec + 1)}"
    return f"({text})" if prec < parent_prec else text


def _pretty_lines(c: Command, indent: str, out: list[str]):
    if isinstance(c, Seq):
        for x in c.items:
            _pretty_lines(x, indent, out)
    elif isinstance(c, Assign):
        out.append(f"{indent}{c.target} = {pretty_expr(c.value)};")
    elif isinstance(c, Skip):
        out.append(f"{indent}skip;")
    elif isinstance(c, Use):
        out.append(f"{indent}use({', '.join(c.args)});")
    elif isinstance(c, While):
        out.append(f"{indent}while ({pretty_expr(c.cond)}) {{")
        _pretty_lines(c.body, indent + "    ", out)
        out.append(f"{indent}}}")
    elif isinstance(c, If):
        out.append(f"{indent}if ({pretty_expr(c.cond)}) {{")
        _pretty_lines(c.then_branch, indent + "    ", out)
        if c.else_branch is not None:
            out.append(f"{indent}}} else {{")
            _pretty_lines(c.else_branch, indent + "    ", out)
        out.append(f"{indent}}}")
    else:
        raise TypeError(f"not a command: {c!r}")


def pretty(c: Command) -> str:
    lines: list[str] = []
    _pretty_lines(c, "", lines)
    return "".join(line + "\n" for line in lines)


def one_line(c: Command) -> str:
    """Single-line rendering used in reports."""
    return " ".join(line.strip() for line in pretty(c).splitlines())


def canonical(c: Command) -> Command:
    """Normal form that survives a pretty/parse round trip: blocks are flat ``Seq`` nodes."""
    if isinstance(c, Seq):
        return Seq(tuple(canonical(x) for x in flatten(c)))
    if isinstance(c, While):
        return While(c.cond, _block(c.body))
    if isinstance(c, If):
        other = None if c.else_branch is None else _block(c.else_branch)
        return If(c.cond, _block(c.then_branch), other)
    return c


def _block(c: Command) -> Seq:
    return Seq(tuple(canonical(x) for x in flatten(c)))
