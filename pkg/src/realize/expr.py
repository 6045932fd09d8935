"""A small expression language for dynamics, outputs and trajectories.

Grammar (see README for the user-facing description):

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' exponent)?
    exponent := ['-'] number
    base     := number | ident | func '(' expr ')' | '(' expr ')' | '-' base

Identifiers are t and x1..xn; functions are sin cos tan exp log sqrt abs
(plus sign, which the differentiator emits for abs and the parser therefore
also accepts).  Exponents are restricted to numeric literals, so general
f(x)^g(x) is rejected at parse time.  Unary minus binds looser than '^'
(-x1^2 is -(x1^2)).

Expressions are immutable; differentiation returns a new tree and applies
constant folding but no further simplification.
"""

import math
import re
from dataclasses import dataclass

from .errors import DomainError, ExprSyntaxError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sign")


def _sign(v):
    if v == 0.0:
        return 0.0
    return math.copysign(1.0, v)


_FUNC_IMPL = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "sign": _sign,
}


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Time:
    pass


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


# ---------------------------------------------------------------------------
# Tokenizer

_NUMBER_RE = re.compile(r"(?:\d+\.\d*|\d+|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_VAR_RE = re.compile(r"x(\d+)\Z")


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER_RE.match(text, pos)
        if m:
            tokens.append(("num", m.group(), pos))
            pos = m.end()
            continue
        m = _IDENT_RE.match(text, pos)
        if m:
            tokens.append(("ident", m.group(), pos))
            pos = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, pos))
            pos += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", _byte_offset(text, pos))
    tokens.append(("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text, n):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, pos):
        raise ExprSyntaxError(message, _byte_offset(self.text, pos))

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            self.fail(f"expected {kind!r}", tok[2])
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = Bin(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.peek()[0] == "^":
            self.advance()
            node = Bin("^", node, self.exponent())
        return node

    def exponent(self):
        negate = False
        if self.peek()[0] == "-":
            self.advance()
            negate = True
        tok = self.peek()
        if tok[0] != "num":
            self.fail("exponent must be a numeric literal", tok[2])
        self.advance()
        value = float(tok[1])
        return Num(-value if negate else value)

    def base(self):
        tok = self.peek()
        if tok[0] == "num":
            self.advance()
            return Num(float(tok[1]))
        if tok[0] == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok[0] == "-":
            self.advance()
            # unary minus applies to the whole factor so -x^2 is -(x^2)
            return Neg(self.factor())
        if tok[0] == "ident":
            self.advance()
            name = tok[1]
            if name == "t":
                return Time()
            if name in FUNCTIONS:
                nxt = self.peek()
                if nxt[0] != "(":
                    self.fail(f"function {name!r} needs parentheses", nxt[2])
                self.advance()
                node = self.expr()
                self.expect(")")
                return Call(name, node)
            m = _VAR_RE.match(name)
            if m:
                index = int(m.group(1))
                if 1 <= index <= self.n:
                    return Var(index)
            raise UnknownIdentifierError(name, _byte_offset(self.text, tok[2]))
        self.fail(f"unexpected token {tok[1]!r}" if tok[1] else "unexpected end of input", tok[2])


# ---------------------------------------------------------------------------
# Printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 25, 30, 40


def _num_text(value):
    return repr(float(value))


def _render(node):
    """Return (text, precedence).  Parenthesization preserves the tree."""
    if isinstance(node, Num):
        if node.value < 0:
            return f"-{_num_text(-node.value)}", _PREC_NEG
        return _num_text(node.value), _PREC_ATOM
    if isinstance(node, Time):
        return "t", _PREC_ATOM
    if isinstance(node, Var):
        return f"x{node.index}", _PREC_ATOM
    if isinstance(node, Call):
        inner, _ = _render(node.arg)
        return f"{node.fn}({inner})", _PREC_ATOM
    if isinstance(node, Neg):
        inner, prec = _render(node.arg)
        if prec < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}", _PREC_NEG
    if isinstance(node, Bin):
        if node.op == "^":
            left, lp = _render(node.left)
            if lp < _PREC_ATOM:
                left = f"({left})"
            if isinstance(node.right, Num):
                exp_text = _num_text(node.right.value) if node.right.value >= 0 \
                    else f"-{_num_text(-node.right.value)}"
                return f"{left}^{exp_text}", _PREC_POW
            right, _ = _render(node.right)
            return f"{left}^({right})", _PREC_POW
        mine = _PREC_ADD if node.op in "+-" else _PREC_MUL
        left, lp = _render(node.left)
        if lp < mine:
            left = f"({left})"
        right, rp = _render(node.right)
        if rp <= mine:
            right = f"({right})"
        return f"{left} {node.op} {right}" if mine == _PREC_ADD \
            else f"{left}{node.op}{right}", mine
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Compilation and evaluation


def _emit(node):
    if isinstance(node, Num):
        return f"({node.value!r})"
    if isinstance(node, Time):
        return "t"
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{_emit(node.arg)})"
    if isinstance(node, Bin):
        op = "**" if node.op == "^" else node.op
        return f"({_emit(node.left)} {op} {_emit(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}({_emit(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _collect(node, time_flag, indices):
    if isinstance(node, Time):
        return True, indices
    if isinstance(node, Var):
        return time_flag, indices | {node.index}
    if isinstance(node, Neg):
        return _collect(node.arg, time_flag, indices)
    if isinstance(node, Bin):
        time_flag, indices = _collect(node.left, time_flag, indices)
        return _collect(node.right, time_flag, indices)
    if isinstance(node, Call):
        return _collect(node.arg, time_flag, indices)
    return time_flag, indices


def _compile(node):
    _, indices = _collect(node, False, frozenset())
    lines = ["def _f(t, x):", "    t = float(t)"]
    for k in sorted(indices):
        lines.append(f"    x{k} = float(x[{k - 1}])")
    lines.append(f"    return {_emit(node)}")
    namespace = dict(_FUNC_IMPL)
    exec(compile("\n".join(lines), "<expression>", "exec"), namespace)
    return namespace["_f"]


def compile_vector(expressions, label="vector field"):
    """Fuse several expressions into one callable (t, x) -> tuple of floats.

    Shares the domain semantics of Expression.evaluate but pays the Python
    call overhead once per vector instead of once per entry, which matters
    inside integration loops.
    """
    exprs = tuple(expressions)
    indices = frozenset()
    for e in exprs:
        indices |= e._indices
    lines = ["def _f(t, x):", "    t = float(t)"]
    for k in sorted(indices):
        lines.append(f"    x{k} = float(x[{k - 1}])")
    if exprs:
        lines.append("    return (" + ", ".join(_emit(e.root) for e in exprs) + ",)")
    else:
        lines.append("    return ()")
    namespace = dict(_FUNC_IMPL)
    exec(compile("\n".join(lines), "<expression-vector>", "exec"), namespace)
    raw = namespace["_f"]
    top = max(indices, default=0)

    def call(t, x):
        try:
            values = raw(t, x)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"cannot evaluate {label}: {exc}") from exc
        except (TypeError, IndexError) as exc:
            if x is None or (hasattr(x, "__len__") and len(x) < top):
                raise ValueError(
                    f"{label} expects a state of dimension at least {top}"
                ) from exc
            raise DomainError(f"cannot evaluate {label}: {exc}") from exc
        for v in values:
            if isinstance(v, complex) or not math.isfinite(v):
                raise DomainError(f"non-real or non-finite value from {label}")
        return values

    return call


class Expression:
    """Parsed expression over t and x1..xn.  Immutable."""

    __slots__ = ("root", "n", "_fn", "_uses_time", "_indices")

    def __init__(self, root, n):
        self.root = root
        self.n = int(n)
        self._fn = None
        self._uses_time, self._indices = _collect(root, False, frozenset())

    @property
    def uses_time(self):
        return self._uses_time

    @property
    def variable_indices(self):
        return set(self._indices)

    def evaluate(self, t, x=None):
        """Evaluate at time t and state x; raises DomainError when the
        result leaves the reals (division by zero, log of a negative
        number, overflow, fractional power of a negative base...)."""
        if self._fn is None:
            self._fn = _compile(self.root)
        try:
            value = self._fn(t, x)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"cannot evaluate {self}: {exc}") from exc
        except (TypeError, IndexError) as exc:
            top = max(self._indices, default=0)
            if x is None or (hasattr(x, "__len__") and top > len(x)):
                raise ValueError(
                    f"expression references x{top} but state has "
                    f"dimension {0 if x is None else len(x)}"
                ) from exc
            raise DomainError(f"cannot evaluate {self}: {exc}") from exc
        if isinstance(value, complex) or not math.isfinite(value):
            raise DomainError(f"non-real or non-finite value from {self}")
        return float(value)

    def differentiate(self, var):
        """Symbolic partial derivative with respect to 't' or 'xk'."""
        return Expression(_derivative(self.root, _check_var(var, self.n)), self.n)

    def __str__(self):
        return _render(self.root)[0]

    def __repr__(self):
        return f"Expression({str(self)!r}, n={self.n})"


def _check_var(var, n):
    if var == "t":
        return "t"
    m = _VAR_RE.match(var)
    if m and 1 <= int(m.group(1)) <= n:
        return int(m.group(1))
    raise ValueError(f"cannot differentiate with respect to {var!r} (n = {n})")


# ---------------------------------------------------------------------------
# Differentiation with constant folding

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_num(node, value=None):
    return isinstance(node, Num) and (value is None or node.value == value)


def _fold_num(value):
    if not math.isfinite(value):
        return None
    return Num(float(value))


def _add(a, b):
    if _is_num(a) and _is_num(b):
        folded = _fold_num(a.value + b.value)
        if folded is not None:
            return folded
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return Bin("+", a, b)


def _sub(a, b):
    if _is_num(a) and _is_num(b):
        folded = _fold_num(a.value - b.value)
        if folded is not None:
            return folded
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    return Bin("-", a, b)


def _neg(a):
    if _is_num(a):
        return Num(-a.value)
    return Neg(a)


def _mul(a, b):
    if _is_num(a) and _is_num(b):
        folded = _fold_num(a.value * b.value)
        if folded is not None:
            return folded
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return Bin("*", a, b)


def _div(a, b):
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        folded = _fold_num(a.value / b.value)
        if folded is not None:
            return folded
    if _is_num(b, 1.0):
        return a
    return Bin("/", a, b)


def _pow(base, c):
    if c == 0.0:
        return _ONE
    if c == 1.0:
        return base
    if _is_num(base):
        try:
            value = base.value ** c
        except (OverflowError, ZeroDivisionError):
            value = None
        if isinstance(value, float) and math.isfinite(value):
            return Num(value)
    return Bin("^", base, Num(c))


_CALL_DERIVS = {
    "sin": lambda u, du: _mul(Call("cos", u), du),
    "cos": lambda u, du: _neg(_mul(Call("sin", u), du)),
    "tan": lambda u, du: _div(du, Bin("^", Call("cos", u), Num(2.0))),
    "exp": lambda u, du: _mul(Call("exp", u), du),
    "log": lambda u, du: _div(du, u),
    "sqrt": lambda u, du: _div(du, _mul(Num(2.0), Call("sqrt", u))),
    # abs differentiates to sign, which is 0 at 0 by convention
    "abs": lambda u, du: _mul(Call("sign", u), du),
    "sign": lambda u, du: _ZERO,
}


def _derivative(node, wrt):
    if isinstance(node, Num):
        return _ZERO
    if isinstance(node, Time):
        return _ONE if wrt == "t" else _ZERO
    if isinstance(node, Var):
        return _ONE if node.index == wrt else _ZERO
    if isinstance(node, Neg):
        return _neg(_derivative(node.arg, wrt))
    if isinstance(node, Call):
        return _CALL_DERIVS[node.fn](node.arg, _derivative(node.arg, wrt))
    if isinstance(node, Bin):
        da = _derivative(node.left, wrt)
        db = _derivative(node.right, wrt)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, node.right), _mul(node.left, db))
        if node.op == "/":
            numerator = _sub(_mul(da, node.right), _mul(node.left, db))
            return _div(numerator, Bin("^", node.right, Num(2.0)))
        if node.op == "^":
            if not isinstance(node.right, Num):
                raise ValueError("exponent must be a numeric literal")
            c = node.right.value
            return _mul(_mul(Num(c), _pow(node.left, c - 1.0)), da)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Module-level API


def parse(text, n):
    """Parse text into an Expression over t and x1..xn.

    Raises ExprSyntaxError (with byte offset) on malformed input and
    UnknownIdentifierError for identifiers outside t, x1..xn and the
    function set.
    """
    if not isinstance(text, str):
        raise TypeError("expression source must be a string")
    root = _Parser(text, n).parse()
    return Expression(root, n)


def evaluate(e, t, x=None):
    return e.evaluate(t, x)


def differentiate(e, var):
    return e.differentiate(var)


def to_string(e):
    return str(e)
