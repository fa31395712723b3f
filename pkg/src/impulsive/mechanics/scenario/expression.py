"""A small arithmetic expression language for scenario files.

Expressions are parsed with a LALR grammar into an immutable AST whose nodes remember their character span in the
source. An AST is compiled into a closure over a vector of variable values, and can be differentiated
symbolically.

Precedence from tight to loose: `^` (right associative), unary `-`, `*` `/`, `+` `-` (left associative). The
functions `sin`, `cos`, `tan`, `sqrt`, `abs`, `min` and `max` are available. Angles are in radians.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

GRAMMAR = r"""
?start: sum

?sum: product
    | sum "+" product       -> add
    | sum "-" product       -> sub

?product: unary
    | product "*" unary     -> mul
    | product "/" unary     -> div

?unary: power
    | "-" unary             -> neg
    | "+" unary             -> pos

?power: atom
    | atom "^" unary        -> pow

?atom: NUMBER               -> number
    | NAME                  -> name
    | NAME "(" sum ("," sum)* ")" -> call
    | "(" sum ")"

NAME: /[A-Za-z_][A-Za-z_0-9]*/
NUMBER: /(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?/

%import common.WS
%ignore WS
"""

#: The functions of the language and their arities (`None` means two or more).
FUNCTIONS: dict[str, Optional[int]] = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sqrt": 1,
    "abs": 1,
    "min": None,
    "max": None,
}

Span = tuple[int, int]


def byte_offset(source: str, index: int) -> int:
    """The UTF-8 byte offset of character *index* in *source*, clamped to the source."""

    return len(source[: max(0, min(index, len(source)))].encode())


class ExpressionError(ValueError):
    """An error in an expression, located by the byte span `[start, end)` in its UTF-8 encoded source.

    The *span* passed in counts characters of *source*; it is converted to bytes when a source is given.
    """

    def __init__(self, message: str, source: str = "", span: Optional[Span] = None) -> None:
        self.message = message
        self.source = source
        self.char_span = span
        if span is not None and source:
            span = (byte_offset(source, span[0]), byte_offset(source, span[1]))
        self.span = span
        location = f" at offset {span[0]}" if span is not None else ""
        super().__init__(f"{message}{location} in {source!r}" if source else f"{message}{location}")


class NotDifferentiableError(ExpressionError):
    """Raised by :meth:`Expression.diff` for constructs without a closed-form derivative in the language."""


@dataclasses.dataclass(frozen=True)
class Number:
    value: float
    span: Span = (0, 0)


@dataclasses.dataclass(frozen=True)
class Name:
    name: str
    span: Span = (0, 0)


@dataclasses.dataclass(frozen=True)
class Unary:
    op: str
    operand: Node
    span: Span = (0, 0)


@dataclasses.dataclass(frozen=True)
class Binary:
    op: str
    left: Node
    right: Node
    span: Span = (0, 0)


@dataclasses.dataclass(frozen=True)
class Call:
    func: str
    args: tuple[Node, ...]
    span: Span = (0, 0)


Node = Union[Number, Name, Unary, Binary, Call]


@v_args(meta=True)
class _AstBuilder(Transformer):  # type: ignore[misc]
    def number(self, meta, children):  # type: ignore[no-untyped-def]
        return Number(float(children[0]), (meta.start_pos, meta.end_pos))

    def name(self, meta, children):  # type: ignore[no-untyped-def]
        return Name(str(children[0]), (meta.start_pos, meta.end_pos))

    def neg(self, meta, children):  # type: ignore[no-untyped-def]
        return Unary("-", children[0], (meta.start_pos, meta.end_pos))

    def pos(self, meta, children):  # type: ignore[no-untyped-def]
        return children[0]

    def call(self, meta, children):  # type: ignore[no-untyped-def]
        func, args = str(children[0]), tuple(children[1:])
        span = (meta.start_pos, meta.end_pos)
        if func not in FUNCTIONS:
            raise ExpressionError(f"unknown function {func!r}", span=span)
        arity = FUNCTIONS[func]
        if (arity is None and len(args) < 2) or (arity is not None and len(args) != arity):
            expected = "at least 2" if arity is None else str(arity)
            raise ExpressionError(f"function {func!r} takes {expected} argument(s), got {len(args)}", span=span)
        return Call(func, args, span)

    def add(self, meta, children):  # type: ignore[no-untyped-def]
        return Binary("+", children[0], children[1], (meta.start_pos, meta.end_pos))

    def sub(self, meta, children):  # type: ignore[no-untyped-def]
        return Binary("-", children[0], children[1], (meta.start_pos, meta.end_pos))

    def mul(self, meta, children):  # type: ignore[no-untyped-def]
        return Binary("*", children[0], children[1], (meta.start_pos, meta.end_pos))

    def div(self, meta, children):  # type: ignore[no-untyped-def]
        return Binary("/", children[0], children[1], (meta.start_pos, meta.end_pos))

    def pow(self, meta, children):  # type: ignore[no-untyped-def]
        return Binary("^", children[0], children[1], (meta.start_pos, meta.end_pos))


_parser = Lark(GRAMMAR, parser="lalr", propagate_positions=True)


def _variables(node: Node) -> Iterable[str]:
    if isinstance(node, Name):
        yield node.name
    elif isinstance(node, Unary):
        yield from _variables(node.operand)
    elif isinstance(node, Binary):
        yield from _variables(node.left)
        yield from _variables(node.right)
    elif isinstance(node, Call):
        for arg in node.args:
            yield from _variables(arg)


def _names(node: Node) -> Iterable[Name]:
    if isinstance(node, Name):
        yield node
    elif isinstance(node, Unary):
        yield from _names(node.operand)
    elif isinstance(node, Binary):
        yield from _names(node.left)
        yield from _names(node.right)
    elif isinstance(node, Call):
        for arg in node.args:
            yield from _names(arg)


# Constructors that fold constants, so that derivatives stay small.


def _num(value: float) -> Number:
    return Number(float(value))


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Number) and node.value == value


def _add(a: Node, b: Node) -> Node:
    if isinstance(a, Number) and isinstance(b, Number):
        return _num(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Binary("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if isinstance(a, Number) and isinstance(b, Number):
        return _num(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    return Binary("-", a, b)


def _neg(a: Node) -> Node:
    if isinstance(a, Number):
        return _num(-a.value)
    if isinstance(a, Unary) and a.op == "-":
        return a.operand
    return Unary("-", a)


def _mul(a: Node, b: Node) -> Node:
    if isinstance(a, Number) and isinstance(b, Number):
        return _num(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return _num(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return Binary("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if isinstance(a, Number) and isinstance(b, Number) and b.value != 0.0:
        return _num(a.value / b.value)
    if _is(a, 0.0) and not _is(b, 0.0):
        return _num(0.0)
    if _is(b, 1.0):
        return a
    return Binary("/", a, b)


def _pow(a: Node, b: Node) -> Node:
    if _is(b, 0.0):
        return _num(1.0)
    if _is(b, 1.0):
        return a
    if isinstance(a, Number) and isinstance(b, Number):
        try:
            return _num(math.pow(a.value, b.value))
        except (ValueError, OverflowError):
            pass
    return Binary("^", a, b)


def _call(func: str, *args: Node) -> Node:
    if all(isinstance(arg, Number) for arg in args):
        try:
            return _num(_FUNCTION_IMPL[func](*(arg.value for arg in args)))  # type: ignore[union-attr]
        except (ValueError, OverflowError):
            pass
    return Call(func, tuple(args))


def _sqrt(value: float) -> float:
    if value < 0.0:
        raise ValueError("square root of a negative number")
    return math.sqrt(value)


_FUNCTION_IMPL: dict[str, Callable[..., float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": _sqrt,
    "abs": abs,
    "min": min,
    "max": max,
}


def _keep_span(folded: Node, node: Node) -> Node:
    if isinstance(folded, (Unary, Binary, Call)) and folded.span == (0, 0):
        return dataclasses.replace(folded, span=node.span)
    return folded


def _fold(node: Node) -> Node:
    if isinstance(node, Unary):
        return _keep_span(_neg(_fold(node.operand)), node)
    if isinstance(node, Binary):
        left, right = _fold(node.left), _fold(node.right)
        folded = {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": _pow}[node.op](left, right)
        return _keep_span(folded, node)
    if isinstance(node, Call):
        return _keep_span(_call(node.func, *(_fold(arg) for arg in node.args)), node)
    return node


def _substitute(node: Node, values: Mapping[str, Node]) -> Node:
    if isinstance(node, Name):
        return values.get(node.name, node)
    if isinstance(node, Unary):
        return dataclasses.replace(node, operand=_substitute(node.operand, values))
    if isinstance(node, Binary):
        return dataclasses.replace(node, left=_substitute(node.left, values), right=_substitute(node.right, values))
    if isinstance(node, Call):
        return dataclasses.replace(node, args=tuple(_substitute(arg, values) for arg in node.args))
    return node


def _derivative(node: Node, var: str, source: str) -> Node:
    if isinstance(node, Number):
        return _num(0.0)
    if isinstance(node, Name):
        return _num(1.0 if node.name == var else 0.0)
    if var not in set(_variables(node)):
        return _num(0.0)
    if isinstance(node, Unary):
        return _neg(_derivative(node.operand, var, source))
    if isinstance(node, Binary):
        u, v = node.left, node.right
        du = _derivative(u, var, source)
        if node.op == "+":
            return _add(du, _derivative(v, var, source))
        if node.op == "-":
            return _sub(du, _derivative(v, var, source))
        if node.op == "*":
            return _add(_mul(du, v), _mul(u, _derivative(v, var, source)))
        if node.op == "/":
            return _div(_sub(_mul(du, v), _mul(u, _derivative(v, var, source))), _pow(v, _num(2.0)))
        if var in set(_variables(v)):
            raise NotDifferentiableError(f"exponent depends on {var!r}", source, node.span)
        return _mul(_mul(v, _pow(u, _sub(v, _num(1.0)))), du)
    assert isinstance(node, Call)
    if node.func in ("abs", "min", "max"):
        raise NotDifferentiableError(f"{node.func!r} has no closed-form derivative", source, node.span)
    u = node.args[0]
    du = _derivative(u, var, source)
    if node.func == "sin":
        return _mul(_call("cos", u), du)
    if node.func == "cos":
        return _mul(_neg(_call("sin", u)), du)
    if node.func == "tan":
        return _div(du, _pow(_call("cos", u), _num(2.0)))
    if node.func == "sqrt":
        return _div(du, _mul(_num(2.0), _call("sqrt", u)))
    raise AssertionError(f"unknown function {node.func!r}")


def _unparse(node: Node) -> str:
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Unary):
        return f"-({_unparse(node.operand)})"
    if isinstance(node, Binary):
        return f"({_unparse(node.left)} {node.op} {_unparse(node.right)})"
    return f"{node.func}({', '.join(_unparse(arg) for arg in node.args)})"


Compiled = Callable[[Sequence[float]], float]


def _compile(node: Node, index: Mapping[str, int], source: str) -> Compiled:
    span = node.span

    def fail(message: str) -> ExpressionError:
        return ExpressionError(message, source, span if span != (0, 0) else None)

    if isinstance(node, Number):
        value = node.value
        return lambda values: value
    if isinstance(node, Name):
        i = index[node.name]
        return lambda values: values[i]
    if isinstance(node, Unary):
        operand = _compile(node.operand, index, source)
        return lambda values: -operand(values)
    if isinstance(node, Binary):
        left, right = _compile(node.left, index, source), _compile(node.right, index, source)
        if node.op == "+":
            return lambda values: left(values) + right(values)
        if node.op == "-":
            return lambda values: left(values) - right(values)
        if node.op == "*":
            return lambda values: left(values) * right(values)
        if node.op == "/":

            def divide(values: Sequence[float]) -> float:
                denominator = right(values)
                if denominator == 0.0:
                    raise fail("division by zero")
                return left(values) / denominator

            return divide

        def power(values: Sequence[float]) -> float:
            try:
                return math.pow(left(values), right(values))
            except (ValueError, OverflowError, ZeroDivisionError) as exc:
                raise fail(f"invalid power: {exc}")

        return power

    assert isinstance(node, Call)
    args = [_compile(arg, index, source) for arg in node.args]
    impl = _FUNCTION_IMPL[node.func]

    def call(values: Sequence[float]) -> float:
        try:
            return float(impl(*(arg(values) for arg in args)))
        except (ValueError, OverflowError) as exc:
            raise fail(f"{node.func}: {exc}")

    return call


@dataclasses.dataclass(frozen=True)
class Expression:
    """A parsed expression together with its source text."""

    source: str
    node: Node

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(_variables(self.node))

    @property
    def is_constant(self) -> bool:
        return isinstance(_fold(self.node), Number)

    def substitute(self, values: Mapping[str, float]) -> Expression:
        """Replace names by numbers and fold the constants that result."""

        nodes = {name: Number(float(value)) for name, value in values.items()}
        return Expression(self.source, _fold(_substitute(self.node, nodes)))

    def diff(self, var: str) -> Expression:
        """The symbolic partial derivative with respect to *var*.

        :raise NotDifferentiableError: For `abs`, `min`, `max` and exponents that depend on *var*.
        """

        return Expression(self.source, _fold(_derivative(self.node, var, self.source)))

    def bind(self, variables: Sequence[str], parameters: Optional[Mapping[str, float]] = None) -> Compiled:
        """Substitute *parameters* and compile the expression into a function of the values of *variables*,
        given as a sequence in the same order.

        :raise ExpressionError: If the expression uses a name that is neither a variable nor a parameter.
        """

        node = _fold(_substitute(self.node, {k: Number(float(v)) for k, v in (parameters or {}).items()}))
        index = {name: i for i, name in enumerate(variables)}
        for name in _names(self.node):
            if name.name not in index and name.name not in (parameters or {}):
                raise ExpressionError(f"unknown identifier {name.name!r}", self.source, name.span)
        return _compile(node, index, self.source)

    def evaluate(self, env: Mapping[str, float]) -> float:
        names = sorted(env)
        return self.bind(names)([env[name] for name in names])

    def __str__(self) -> str:
        return _unparse(self.node)


def parse_expression(src: str) -> Expression:
    """Parse *src* into an :class:`Expression`.

    :raise ExpressionError: On a syntax error, an unknown function or a wrong number of function arguments.
    """

    try:
        tree = _parser.parse(src)
        node = _AstBuilder().transform(tree)
    except UnexpectedInput as exc:
        # UnexpectedEOF reports -1; the LALR parser reports the end as a `$END` token at the last token.
        position = getattr(exc, "pos_in_stream", None)
        if position is None or position < 0 or getattr(getattr(exc, "token", None), "type", None) == "$END":
            position = len(src)
        raise ExpressionError("syntax error", src, (position, position + 1))
    except VisitError as exc:
        if isinstance(exc.orig_exc, ExpressionError):
            raise ExpressionError(exc.orig_exc.message, src, exc.orig_exc.char_span)
        raise
    return Expression(src, node)


def as_expression(value: Union[str, float, int]) -> Expression:
    """Scenario files may give a number wherever an expression is allowed."""

    if isinstance(value, bool):
        raise ExpressionError(f"expected a number or an expression, got {value!r}")
    if isinstance(value, (int, float)):
        return Expression(repr(float(value)), Number(float(value)))
    return parse_expression(value)
