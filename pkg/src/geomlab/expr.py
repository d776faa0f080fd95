"""Small arithmetic expression language for metric components.

Expressions are parsed into an immutable tree that can be evaluated on
numpy arrays and differentiated symbolically.  Only the constant folding
needed to keep derivative trees small is performed.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'
    cond    := expr ('<' | '<=' | '>' | '>=') expr

``piecewise(cond, a, b)`` takes ``a`` where ``cond`` holds and ``b`` elsewhere.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "ExprSyntaxError",
    "Node",
    "parse_expr",
    "parse_condition",
    "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprSyntaxError(ValueError):
    """Raised for malformed expressions; ``offset`` is a 0-based character index."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


# --------------------------------------------------------------------------- nodes


class Node:
    def evaluate(self, env: Mapping[str, np.ndarray]):
        raise NotImplementedError

    def diff(self, var: str) -> "Node":
        raise NotImplementedError

    def variables(self) -> set[str]:
        return set()

    @property
    def is_const(self) -> bool:
        return False

    def __call__(self, **env):
        return self.evaluate(env)


@dataclass(frozen=True)
class Num(Node):
    value: float

    def evaluate(self, env):
        return self.value

    def diff(self, var):
        return ZERO

    @property
    def is_const(self):
        return True

    def __str__(self):
        return repr(self.value)


ZERO = Num(0.0)
ONE = Num(1.0)


@dataclass(frozen=True)
class Var(Node):
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise NameError(f"unbound variable {self.name!r}") from None

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def variables(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def diff(self, var):
        return neg(self.arg.diff(var))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class Bin(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        # integer exponents keep negative bases well defined
        if isinstance(self.right, Num) and float(self.right.value).is_integer():
            return a ** int(self.right.value)
        return a ** b

    def diff(self, var):
        a, b = self.left, self.right
        da, db = a.diff(var), b.diff(var)
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        if self.op == "/":
            return sub(div(da, b), div(mul(a, db), mul(b, b)))
        # power
        if b.is_const:
            if da.is_const and da.value == 0.0:
                return ZERO
            return mul(mul(b, power(a, Num(b.evaluate({}) - 1.0))), da)
        return mul(self, add(mul(db, call("log", a)), div(mul(b, da), a)))

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


_NP_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


@dataclass(frozen=True)
class Call(Node):
    fn: str
    arg: Node

    def evaluate(self, env):
        return _NP_FUNCS[self.fn](self.arg.evaluate(env))

    def diff(self, var):
        u = self.arg
        du = u.diff(var)
        if du.is_const and du.evaluate({}) == 0.0:
            return ZERO
        fn = self.fn
        if fn == "sin":
            d = call("cos", u)
        elif fn == "cos":
            d = neg(call("sin", u))
        elif fn == "tan":
            d = div(ONE, power(call("cos", u), Num(2.0)))
        elif fn == "sinh":
            d = call("cosh", u)
        elif fn == "cosh":
            d = call("sinh", u)
        elif fn == "tanh":
            d = sub(ONE, power(self, Num(2.0)))
        elif fn == "exp":
            d = self
        elif fn == "log":
            d = div(ONE, u)
        elif fn == "sqrt":
            d = div(Num(0.5), self)
        elif fn == "abs":
            d = Sign(u)
        else:  # pragma: no cover - guarded by the parser
            raise ValueError(fn)
        return mul(d, du)

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"{self.fn}({self.arg})"


@dataclass(frozen=True)
class Sign(Node):
    arg: Node

    def evaluate(self, env):
        return np.sign(self.arg.evaluate(env))

    def diff(self, var):
        return ZERO

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"sign({self.arg})"


@dataclass(frozen=True)
class Cmp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        return {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}[
            self.op
        ](a, b)

    def diff(self, var):  # pragma: no cover - conditions are never differentiated
        raise TypeError("conditions are not differentiable")

    def variables(self):
        return self.left.variables() | self.right.variables()

    def level(self) -> Node:
        """Signed level function whose zero set is the condition boundary."""
        return sub(self.left, self.right)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Piecewise(Node):
    cond: Cmp
    then: Node
    other: Node

    def evaluate(self, env):
        c = self.cond.evaluate(env)
        with np.errstate(all="ignore"):
            a = self.then.evaluate(env)
            b = self.other.evaluate(env)
        return np.where(c, a, b)

    def diff(self, var):
        da, db = self.then.diff(var), self.other.diff(var)
        if da == db:
            return da
        return Piecewise(self.cond, da, db)

    def variables(self):
        return self.cond.variables() | self.then.variables() | self.other.variables()

    def __str__(self):
        return f"piecewise({self.cond}, {self.then}, {self.other})"


# ------------------------------------------------------------------ constructors


def _c(node: Node, value: float) -> bool:
    return node.is_const and node.evaluate({}) == value


def neg(a: Node) -> Node:
    if a.is_const:
        return Num(-a.evaluate({}))
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    if a.is_const and b.is_const:
        return Num(a.evaluate({}) + b.evaluate({}))
    if _c(a, 0.0):
        return b
    if _c(b, 0.0):
        return a
    return Bin("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if a.is_const and b.is_const:
        return Num(a.evaluate({}) - b.evaluate({}))
    if _c(b, 0.0):
        return a
    if _c(a, 0.0):
        return neg(b)
    return Bin("-", a, b)


def mul(a: Node, b: Node) -> Node:
    if a.is_const and b.is_const:
        return Num(a.evaluate({}) * b.evaluate({}))
    if _c(a, 0.0) or _c(b, 0.0):
        return ZERO
    if _c(a, 1.0):
        return b
    if _c(b, 1.0):
        return a
    if _c(a, -1.0):
        return neg(b)
    if _c(b, -1.0):
        return neg(a)
    return Bin("*", a, b)


def div(a: Node, b: Node) -> Node:
    if a.is_const and b.is_const:
        return Num(a.evaluate({}) / b.evaluate({}))
    if _c(a, 0.0):
        return ZERO
    if _c(b, 1.0):
        return a
    return Bin("/", a, b)


def power(a: Node, b: Node) -> Node:
    if a.is_const and b.is_const:
        return Num(a.evaluate({}) ** b.evaluate({}))
    if _c(b, 0.0):
        return ONE
    if _c(b, 1.0):
        return a
    return Bin("^", a, b)


def call(fn: str, a: Node) -> Node:
    if a.is_const:
        return Num(float(_NP_FUNCS[fn](a.evaluate({}))))
    return Call(fn, a)


# ------------------------------------------------------------------------ parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|[-+*/^(),<>]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, names: set[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            what = "end of expression" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {value!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def done(self):
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def unary(self) -> Node:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return power(base, self.unary())
        return base

    def cond(self) -> Cmp:
        lhs = self.expr()
        tok = self.peek()
        if tok[1] not in ("<", "<=", ">", ">="):
            raise ExprSyntaxError("expected comparison operator in condition", tok[2])
        self.take()
        return Cmp(tok[1], lhs, self.expr())

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[1] == "(":
                self.take("(")
                if val == "piecewise":
                    c = self.cond()
                    self.take(",")
                    a = self.expr()
                    self.take(",")
                    b = self.expr()
                    self.take(")")
                    return Piecewise(c, a, b)
                if val not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {val!r}", pos)
                arg = self.expr()
                self.take(")")
                return call(val, arg)
            if val in CONSTANTS and (self.names is None or val not in self.names):
                return Num(CONSTANTS[val])
            if self.names is not None and val not in self.names:
                raise ExprSyntaxError(f"unknown name {val!r}", pos)
            return Var(val)
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        what = "end of expression" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse_expr(text: str, names=None) -> Node:
    """Parse ``text`` into an expression tree.

    ``names``, when given, restricts the free variables that may appear.
    """
    p = _Parser(text, set(names) if names is not None else None)
    node = p.expr()
    p.done()
    return node


def parse_condition(text: str, names=None) -> Cmp:
    p = _Parser(text, set(names) if names is not None else None)
    node = p.cond()
    p.done()
    return node


def piecewise_conditions(node: Node) -> list[Cmp]:
    """All branch conditions appearing inside ``node``."""
    out: list[Cmp] = []

    def walk(n):
        if isinstance(n, Piecewise):
            out.append(n.cond)
            walk(n.then)
            walk(n.other)
        elif isinstance(n, Bin):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, (Neg, Call, Sign)):
            walk(n.arg)

    walk(node)
    return out


# ---------------------------------------------------------------------- compiler

_CMP_OPS = {"<", "<=", ">", ">="}


def compile_nodes(nodes, names):
    """Compile expression trees into one numpy function with shared subexpressions.

    Returns ``f(*arrays) -> list`` taking one array per name in ``names``.
    Structurally equal subtrees are evaluated once.
    """
    names = list(names)
    args = {nm: f"a{i}" for i, nm in enumerate(names)}
    lines: list[str] = []
    memo: dict = {}

    def emit(node) -> str:
        if isinstance(node, Num):
            return repr(float(node.value))
        if isinstance(node, Var):
            if node.name not in args:
                raise NameError(f"unbound variable {node.name!r}")
            return args[node.name]
        key = node
        if key in memo:
            return memo[key]
        if isinstance(node, Neg):
            code = f"-{emit(node.arg)}"
        elif isinstance(node, Bin):
            a, b = emit(node.left), emit(node.right)
            if node.op == "^":
                r = node.right
                if isinstance(r, Num) and float(r.value).is_integer():
                    code = f"{a}**{int(r.value)}"
                else:
                    code = f"{a}**{b}"
            else:
                code = f"{a} {node.op} {b}"
        elif isinstance(node, Call):
            code = f"np.{node.fn}({emit(node.arg)})"
        elif isinstance(node, Sign):
            code = f"np.sign({emit(node.arg)})"
        elif isinstance(node, Cmp):
            code = f"{emit(node.left)} {node.op} {emit(node.right)}"
        elif isinstance(node, Piecewise):
            code = f"np.where({emit(node.cond)}, {emit(node.then)}, {emit(node.other)})"
        else:  # pragma: no cover
            raise TypeError(type(node))
        tmp = f"t{len(memo)}"
        lines.append(f"        {tmp} = {code}")
        memo[key] = tmp
        return tmp

    outs = [emit(nd) for nd in nodes]
    src = [f"def _compiled({', '.join(args[n] for n in names)}):",
           "    with np.errstate(all='ignore'):"]
    src += lines or ["        pass"]
    src.append(f"    return [{', '.join(outs)}]")
    scope = {"np": np}
    exec("\n".join(src), scope)  # noqa: S102 - source is generated from parsed trees only
    return scope["_compiled"]
