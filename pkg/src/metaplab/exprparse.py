"""Tiny arithmetic expression language for user-supplied symbols.

Grammar (recursive descent, no dependencies):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Identifiers: the variables x, xi, u, v plus the constant pi; functions
exp, sin, cos, sqrt.  Compiled expressions evaluate elementwise on numpy
arrays.  Errors carry the character position for line-precise messages.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ExprError", "compile_expression"]

_FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}
_VARIABLES = ("x", "xi", "u", "v")


class ExprError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None, self.pos
        return self.text[self.pos], self.pos

    def take_number(self):
        start = self.pos
        text = self.text
        n = len(text)
        i = self.pos
        while i < n and (text[i].isdigit() or text[i] == "."):
            i += 1
        if i < n and text[i] in "eE":
            j = i + 1
            if j < n and text[j] in "+-":
                j += 1
            if j < n and text[j].isdigit():
                i = j
                while i < n and text[i].isdigit():
                    i += 1
        token = text[start:i]
        try:
            value = float(token)
        except ValueError:
            raise ExprError(f"bad numeric literal {token!r}", start) from None
        self.pos = i
        return value

    def take_ident(self):
        start = self.pos
        text = self.text
        i = self.pos
        while i < len(text) and (text[i].isalnum() or text[i] == "_"):
            i += 1
        self.pos = i
        return text[start:i]


def _parse_expr(tz: _Tokenizer):
    node = _parse_term(tz)
    while True:
        ch, _ = tz.peek()
        if ch in ("+", "-"):
            tz.pos += 1
            rhs = _parse_term(tz)
            node = (lambda a, b: (lambda env: a(env) + b(env)))(node, rhs) if ch == "+" else (
                lambda a, b: (lambda env: a(env) - b(env))
            )(node, rhs)
        else:
            return node


def _parse_term(tz: _Tokenizer):
    node = _parse_unary(tz)
    while True:
        ch, _ = tz.peek()
        if ch in ("*", "/"):
            tz.pos += 1
            rhs = _parse_unary(tz)
            node = (lambda a, b: (lambda env: a(env) * b(env)))(node, rhs) if ch == "*" else (
                lambda a, b: (lambda env: a(env) / b(env))
            )(node, rhs)
        else:
            return node


def _parse_unary(tz: _Tokenizer):
    ch, _ = tz.peek()
    if ch == "-":
        tz.pos += 1
        inner = _parse_unary(tz)
        return lambda env: -inner(env)
    if ch == "+":
        tz.pos += 1
        return _parse_unary(tz)
    return _parse_power(tz)


def _parse_power(tz: _Tokenizer):
    base = _parse_atom(tz)
    ch, _ = tz.peek()
    if ch == "^":
        tz.pos += 1
        exponent = _parse_unary(tz)
        return lambda env: base(env) ** exponent(env)
    return base


def _parse_atom(tz: _Tokenizer):
    ch, pos = tz.peek()
    if ch is None:
        raise ExprError("unexpected end of expression", pos)
    if ch == "(":
        tz.pos += 1
        node = _parse_expr(tz)
        ch2, pos2 = tz.peek()
        if ch2 != ")":
            raise ExprError("missing closing parenthesis", pos2)
        tz.pos += 1
        return node
    if ch.isdigit() or ch == ".":
        value = tz.take_number()
        return lambda env: value
    if ch.isalpha() or ch == "_":
        name = tz.take_ident()
        if name == "pi":
            return lambda env: np.pi
        if name in _FUNCTIONS:
            ch2, pos2 = tz.peek()
            if ch2 != "(":
                raise ExprError(f"function {name!r} needs parentheses", pos2)
            tz.pos += 1
            arg = _parse_expr(tz)
            ch3, pos3 = tz.peek()
            if ch3 != ")":
                raise ExprError("missing closing parenthesis", pos3)
            tz.pos += 1
            fn = _FUNCTIONS[name]
            return lambda env: fn(arg(env))
        if name in _VARIABLES:
            return lambda env: env[name]
        raise ExprError(f"unknown identifier {name!r}", pos)
    raise ExprError(f"unexpected character {ch!r}", pos)


def compile_expression(text: str, variables: tuple[str, ...] = ("x", "xi")):
    """Compile to a callable of the named variables (numpy arrays welcome).

    compile_expression("exp(-x^2)*cos(xi)")(x=..., xi=...) evaluates
    elementwise; unknown identifiers and syntax problems raise ExprError
    with the offending position.
    """
    tz = _Tokenizer(text)
    node = _parse_expr(tz)
    ch, pos = tz.peek()
    if ch is not None:
        raise ExprError(f"trailing input starting with {ch!r}", pos)

    def call(*args, **kwargs):
        env = dict(zip(variables, args))
        env.update(kwargs)
        for name in _VARIABLES:
            env.setdefault(name, 0.0)
        out = np.asarray(node(env), dtype=np.complex128)
        shape = np.broadcast(*(np.asarray(env[v]) for v in variables)).shape if variables else ()
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        return out

    return call
