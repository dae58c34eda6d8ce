"""A small, total expression language for user-defined aggregation rules.

A rule file looks like::

    # strong liberal rule
    fcif lib { f(i) = p(i,i) }

``p(a, t)`` is agent a's opinion of agent t, ``col(t)`` the column of
opinions about t, ``self`` abbreviates ``p(i,i)``, ``n`` is the society
size and ``theta`` the configured threshold.  Agent indices are ``i`` or
integer literals (1-based).  All arithmetic is exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Union

from .aggregators import Fcif, UnknownFcif
from .core import HALF, FcifError, Profile, format_value

AGGREGATES = ("min", "max", "mean", "sum", "count_high", "count_low")
COMPARISONS = ("<", "<=", "=", ">=", ">")
KEYWORDS = {
    "fcif", "f", "i", "if", "then", "else", "and", "or", "not", "n", "theta",
    "p", "self", "col", *AGGREGATES,
}


class DslError(FcifError):
    pass


class LexError(DslError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col = line, col


class ParseError(DslError):
    def __init__(self, message: str, line: int, col: int, expected: frozenset = frozenset()):
        exp = ", ".join(sorted(expected))
        super().__init__(f"{line}:{col}: {message}" + (f" (expected one of: {exp})" if exp else ""))
        self.line, self.col, self.expected = line, col, expected


class EvaluationError(DslError):
    pass


class DivisionByZero(EvaluationError, ZeroDivisionError):
    pass


class AgentIndexOutOfRange(EvaluationError, IndexError):
    pass


class ResultOutOfUnitInterval(EvaluationError, ValueError):
    pass


# ---------------------------------------------------------------------------
# Syntax tree
# ---------------------------------------------------------------------------

# an agent index: the target variable "i" or a 1-based literal
Index = Union[str, int]


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Target:
    pass


@dataclass(frozen=True)
class Size:
    pass


@dataclass(frozen=True)
class Theta:
    pass


@dataclass(frozen=True)
class Cell:
    agent: Index
    target: Index


@dataclass(frozen=True)
class SelfOpinion:
    pass


@dataclass(frozen=True)
class ColAgg:
    kind: str
    target: Index


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class If:
    cond: "Cond"
    then: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Not:
    operand: "Cond"


Expr = Union[Num, Target, Size, Theta, Cell, SelfOpinion, ColAgg, Arith, If]
Cond = Union[Compare, BoolOp, Not]


@dataclass(frozen=True)
class FcifDef:
    name: str
    body: Expr


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|[-+*/<>=(){},])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "word" | "op" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise LexError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "number" and "." in lexeme and len(lexeme.split(".")[1]) > 9:
            raise LexError(f"number {lexeme} has more than 9 fraction digits; use a/b", line, col)
        if kind != "ws":
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        # furthest failure seen, for error reporting after backtracking
        self.fail_pos = -1
        self.fail_expected: set[str] = set()
        self.fail_msg = ""

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def _fail(self, expected, msg: str | None = None):
        if self.pos > self.fail_pos:
            self.fail_pos, self.fail_expected = self.pos, set()
            self.fail_msg = ""
        if self.pos == self.fail_pos:
            self.fail_expected |= set(expected)
            if msg:
                self.fail_msg = msg
        t = self.tok
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(msg or f"unexpected {got}", t.line, t.col, frozenset(expected))

    def _furthest(self) -> ParseError:
        t = self.toks[self.fail_pos]
        got = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(self.fail_msg or f"unexpected {got}", t.line, t.col,
                          frozenset(self.fail_expected))

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("word", "op") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self._fail({repr(text)})
        t = self.tok
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    # def := "fcif" IDENT "{" "f" "(" "i" ")" "=" expr "}"
    def definition(self) -> FcifDef:
        self.expect("fcif")
        t = self.tok
        if t.kind != "word" or t.text in KEYWORDS:
            self._fail({"identifier"})
        self.pos += 1
        for s in ("{", "f", "(", "i", ")", "="):
            self.expect(s)
        body = self.expr()
        self.expect("}")
        if self.tok.kind != "eof":
            self._fail({"end of input"})
        return FcifDef(t.text, body)

    def expr(self) -> Expr:
        if self.accept("if"):
            cond = self.cond()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return If(cond, then, self.expr())
        return self.sum()

    def sum(self) -> Expr:
        node = self.prod()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.pos += 1
            node = Arith(op, node, self.prod())
        return node

    def prod(self) -> Expr:
        node = self.atom()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.pos += 1
            node = Arith(op, node, self.atom())
        return node

    def index(self) -> Index:
        t = self.tok
        if t.kind == "word" and t.text == "i":
            self.pos += 1
            return "i"
        if t.kind == "number" and "." not in t.text:
            self.pos += 1
            return int(t.text)
        self._fail({"'i'", "integer"})

    _ATOM_START = {"number", "'n'", "'theta'", "'i'", "'p'", "'self'", "'('"} | {repr(a) for a in AGGREGATES}

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.pos += 1
            return Num(Fraction(t.text))
        if t.kind == "word":
            if t.text == "n":
                self.pos += 1
                return Size()
            if t.text == "theta":
                self.pos += 1
                return Theta()
            if t.text == "i":
                self.pos += 1
                return Target()
            if t.text == "self":
                self.pos += 1
                return SelfOpinion()
            if t.text == "p":
                self.pos += 1
                self.expect("(")
                a = self.index()
                self.expect(",")
                b = self.index()
                self.expect(")")
                return Cell(a, b)
            if t.text in AGGREGATES:
                self.pos += 1
                self.expect("(")
                self.expect("col")
                self.expect("(")
                target = self.index()
                self.expect(")")
                self.expect(")")
                return ColAgg(t.text, target)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self._fail(self._ATOM_START)

    # cond := conj ("or" conj)* ; conj := neg ("and" neg)*
    def cond(self) -> Cond:
        node = self.conj()
        while self.accept("or"):
            node = BoolOp("or", node, self.conj())
        return node

    def conj(self) -> Cond:
        node = self.neg()
        while self.accept("and"):
            node = BoolOp("and", node, self.neg())
        return node

    def neg(self) -> Cond:
        if self.accept("not"):
            return Not(self.neg())
        if self.at("("):
            saved = self.pos
            try:
                self.pos += 1
                node = self.cond()
                self.expect(")")
                return node
            except ParseError:
                self.pos = saved  # not a parenthesised condition; try a comparison
        left = self.expr()
        for op in COMPARISONS:
            if self.at(op):
                self.pos += 1
                return Compare(op, left, self.expr())
        self._fail({repr(c) for c in COMPARISONS})


def parse(text: str) -> FcifDef:
    """Parse one ``fcif NAME { f(i) = ... }`` definition."""
    parser = _Parser(tokenize(text))
    try:
        return parser.definition()
    except ParseError:
        raise parser._furthest() from None


def parse_file(path: str | Path) -> FcifDef:
    return parse(Path(path).read_text())


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

def _fmt_num(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    text = format_value(v) if 0 <= v <= 1 else f"{v.numerator}/{v.denominator}"
    return f"({text})" if "/" in text else text


def format_expr(e) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Target):
        return "i"
    if isinstance(e, Size):
        return "n"
    if isinstance(e, Theta):
        return "theta"
    if isinstance(e, SelfOpinion):
        return "self"
    if isinstance(e, Cell):
        return f"p({e.agent},{e.target})"
    if isinstance(e, ColAgg):
        return f"{e.kind}(col({e.target}))"
    if isinstance(e, Arith):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, If):
        return f"(if {format_expr(e.cond)} then {format_expr(e.then)} else {format_expr(e.orelse)})"
    if isinstance(e, Compare):
        return f"{format_expr(e.left)} {e.op} {format_expr(e.right)}"
    if isinstance(e, BoolOp):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, Not):
        return f"not ({format_expr(e.operand)})"
    raise TypeError(f"not a DSL node: {e!r}")


def format_def(d: FcifDef) -> str:
    return f"fcif {d.name} {{ f(i) = {format_expr(d.body)} }}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _index_fn(idx: Index):
    if idx == "i":
        return lambda rows, i: i
    k = idx - 1

    def literal(rows, i):
        if k >= len(rows):
            raise AgentIndexOutOfRange(f"agent {idx} does not exist in a society of {len(rows)}")
        return k
    return literal


def _compile(e, theta: Fraction):
    """Turn a tree into a closure ``fn(rows, i)`` with ``i`` 0-based."""
    if isinstance(e, Num):
        v = e.value
        return lambda rows, i: v
    if isinstance(e, Target):
        return lambda rows, i: Fraction(i + 1)
    if isinstance(e, Size):
        return lambda rows, i: Fraction(len(rows))
    if isinstance(e, Theta):
        return lambda rows, i: theta
    if isinstance(e, SelfOpinion):
        return lambda rows, i: rows[i][i]
    if isinstance(e, Cell):
        a, t = _index_fn(e.agent), _index_fn(e.target)
        return lambda rows, i: rows[a(rows, i)][t(rows, i)]
    if isinstance(e, ColAgg):
        t = _index_fn(e.target)
        kind = e.kind
        if kind == "min":
            return lambda rows, i: min(r[t(rows, i)] for r in rows)
        if kind == "max":
            return lambda rows, i: max(r[t(rows, i)] for r in rows)
        if kind == "sum":
            return lambda rows, i: sum((r[t(rows, i)] for r in rows), Fraction(0))
        if kind == "mean":
            return lambda rows, i: sum((r[t(rows, i)] for r in rows), Fraction(0)) / len(rows)
        if kind == "count_high":
            return lambda rows, i: Fraction(sum(1 for r in rows if r[t(rows, i)] >= theta))
        return lambda rows, i: Fraction(sum(1 for r in rows if r[t(rows, i)] < theta))
    if isinstance(e, Arith):
        left, right = _compile(e.left, theta), _compile(e.right, theta)
        if e.op == "+":
            return lambda rows, i: left(rows, i) + right(rows, i)
        if e.op == "-":
            return lambda rows, i: left(rows, i) - right(rows, i)
        if e.op == "*":
            return lambda rows, i: left(rows, i) * right(rows, i)

        def divide(rows, i):
            den = right(rows, i)
            if den == 0:
                raise DivisionByZero(f"division by zero in {format_expr(e)}")
            return left(rows, i) / den
        return divide
    if isinstance(e, If):
        c, a, b = _compile(e.cond, theta), _compile(e.then, theta), _compile(e.orelse, theta)
        return lambda rows, i: a(rows, i) if c(rows, i) else b(rows, i)
    if isinstance(e, Compare):
        left, right = _compile(e.left, theta), _compile(e.right, theta)
        op = {
            "<": lambda x, y: x < y, "<=": lambda x, y: x <= y, "=": lambda x, y: x == y,
            ">=": lambda x, y: x >= y, ">": lambda x, y: x > y,
        }[e.op]
        return lambda rows, i: op(left(rows, i), right(rows, i))
    if isinstance(e, BoolOp):
        left, right = _compile(e.left, theta), _compile(e.right, theta)
        if e.op == "and":
            return lambda rows, i: left(rows, i) and right(rows, i)
        return lambda rows, i: left(rows, i) or right(rows, i)
    if isinstance(e, Not):
        inner = _compile(e.operand, theta)
        return lambda rows, i: not inner(rows, i)
    raise TypeError(f"not a DSL node: {e!r}")


class DslRule:
    """Picklable evaluator for a parsed definition; compiles on first use."""

    __slots__ = ("definition", "theta", "_fn")

    def __init__(self, definition: FcifDef, theta: Fraction = HALF):
        self.definition = definition
        self.theta = Fraction(theta)
        self._fn = None

    def __reduce__(self):
        return (DslRule, (self.definition, self.theta))

    def __call__(self, profile: Profile, i: int) -> Fraction:
        if self._fn is None:
            self._fn = _compile(self.definition.body, self.theta)
        v = self._fn(profile.rows, i)
        if not 0 <= v <= 1:
            raise ResultOutOfUnitInterval(
                f"{self.definition.name}: f({i + 1}) = {format_value(v)} is outside [0, 1]")
        return v


def to_fcif(definition: FcifDef, theta: Fraction = HALF) -> Fcif:
    params = () if Fraction(theta) == HALF else (("theta", Fraction(theta)),)
    return Fcif(f"dsl-name:{definition.name}", DslRule(definition, theta), params)


def evaluate(definition: FcifDef, profile: Profile, theta: Fraction = HALF):
    """Evaluate a definition on every agent of ``profile``."""
    return to_fcif(definition, theta)(profile)


# ---------------------------------------------------------------------------
# Dependency analysis
# ---------------------------------------------------------------------------

def _resolve(idx: Index, n: int, i: int) -> int:
    if idx == "i":
        return i
    if not 1 <= idx <= n:
        raise AgentIndexOutOfRange(f"agent {idx} does not exist in a society of {n}")
    return idx


_STATIC = (Num, Target, Size, Theta)


def _is_static(e) -> bool:
    if isinstance(e, _STATIC):
        return True
    if isinstance(e, (Arith, Compare, BoolOp)):
        return _is_static(e.left) and _is_static(e.right)
    if isinstance(e, Not):
        return _is_static(e.operand)
    if isinstance(e, If):
        return _is_static(e.cond) and _is_static(e.then) and _is_static(e.orelse)
    return False


def _deps(e, n: int, i: int, theta: Fraction) -> set:
    if isinstance(e, _STATIC):
        return set()
    if isinstance(e, SelfOpinion):
        return {(i, i)}
    if isinstance(e, Cell):
        return {(_resolve(e.agent, n, i), _resolve(e.target, n, i))}
    if isinstance(e, ColAgg):
        t = _resolve(e.target, n, i)
        return {(j, t) for j in range(1, n + 1)}
    if isinstance(e, (Arith, Compare, BoolOp)):
        return _deps(e.left, n, i, theta) | _deps(e.right, n, i, theta)
    if isinstance(e, Not):
        return _deps(e.operand, n, i, theta)
    if isinstance(e, If):
        if _is_static(e.cond):
            # a condition on i, n and theta alone picks one branch statically
            dummy = Profile._trusted(tuple((Fraction(0),) * n for _ in range(n)))
            taken = e.then if _compile(e.cond, theta)(dummy.rows, i - 1) else e.orelse
            return _deps(taken, n, i, theta)
        return _deps(e.cond, n, i, theta) | _deps(e.then, n, i, theta) | _deps(e.orelse, n, i, theta)
    raise TypeError(f"not a DSL node: {e!r}")


def dependencies(definition: FcifDef, n: int, i: int, theta: Fraction = HALF) -> set:
    """Cells ``(agent, target)`` (1-based) whose values can influence f(i)."""
    if not 1 <= i <= n:
        raise AgentIndexOutOfRange(f"target {i} outside 1..{n}")
    return _deps(definition.body, n, i, theta)


def is_structurally_independent(definition: FcifDef, n: int, theta: Fraction = HALF) -> bool:
    """True when every f(i) reads only column i.

    Sound for the Independence axiom but not complete: ``False`` does not
    prove a violation exists.
    """
    return all(
        all(t == i for _, t in dependencies(definition, n, i, theta))
        for i in range(1, n + 1)
    )


# ---------------------------------------------------------------------------
# Named definitions
# ---------------------------------------------------------------------------

_DEFS: dict[str, FcifDef] = {}
_bundled_loaded = False


def _load_bundled() -> None:
    global _bundled_loaded
    if _bundled_loaded:
        return
    _bundled_loaded = True
    for entry in sorted(resources.files("fuzzyid").joinpath("rules").iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".fcif"):
            d = parse(entry.read_text())
            _DEFS.setdefault(d.name, d)


def register(definition: FcifDef) -> None:
    """Make ``definition`` addressable as ``dsl-name:<name>``."""
    _DEFS[definition.name] = definition


def definitions() -> dict[str, FcifDef]:
    _load_bundled()
    return dict(_DEFS)


def resolve(ref: str, theta: Fraction = HALF) -> Fcif:
    """Resolve ``dsl:<path>`` or ``dsl-name:<identifier>`` to a rule."""
    if ref.startswith("dsl:"):
        path = Path(ref[4:])
        if not path.exists():
            # fall back to the bundled rule of the same file name
            bundled = resources.files("fuzzyid").joinpath("rules", path.name)
            if bundled.is_file():
                d = parse(bundled.read_text())
                register(d)
                return to_fcif(d, theta)
        d = parse_file(path)
        register(d)
        return to_fcif(d, theta)
    name = ref.split(":", 1)[1]
    _load_bundled()
    if name not in _DEFS:
        raise UnknownFcif(f"no DSL rule named {name!r}")
    return to_fcif(_DEFS[name], theta)
