"""
Data Expressions

Data functions (``v``, ``gamma_d``, ``y_d``, ``u0``) are given in configs as
short arithmetic strings over ``x1`` and ``x2``::

    0.05 * x2 * sin(pi * x1)
    -x1 * (1 - x1)
    exp(-(x1 - 0.5)^2 / 0.01)

Grammar (``^`` binds tighter than unary minus and associates to the right)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x1' | 'x2' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'sin' | 'cos' | 'exp' | 'abs'

The parser is hand-written so the accepted language stays exactly this one;
the parsed tree is a :mod:`sympy` expression, which provides exact partial
derivatives and vectorized NumPy evaluation through ``lambdify``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Tuple

import numpy as np
import sympy as sy

from ..errors import ExpressionError

X1, X2 = sy.symbols("x1 x2", real=True)

_FUNCTIONS = {"sin": sy.sin, "cos": sy.cos, "exp": sy.exp, "abs": sy.Abs}
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(.))")

# Finiteness is checked on this grid of the unit square.
_CHECK_GRID = np.linspace(0.0, 1.0, 11)


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens: List[Tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None or match.end() == pos:
            break
        number, name, symbol = match.groups()
        start = match.start(match.lastindex) if match.lastindex else pos
        if number is not None:
            tokens.append(("num", number, start))
        elif name is not None:
            tokens.append(("name", name, start))
        elif symbol is not None:
            if symbol not in "+-*/^()":
                raise ExpressionError(f"Unexpected character '{symbol}'", text, start)
            tokens.append(("op", symbol, start))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> Tuple[str, str, int]:
        return self.tokens[self.index]

    def _fail(self, message: str) -> ExpressionError:
        return ExpressionError(message, self.text, self.current[2])

    def _accept(self, value: str) -> bool:
        kind, tok, _ = self.current
        if kind == "op" and tok == value:
            self.index += 1
            return True
        return False

    def _expect(self, value: str) -> None:
        if not self._accept(value):
            found = self.current[1] or "end of input"
            raise self._fail(f"Expected '{value}', found '{found}'")

    def parse(self) -> sy.Expr:
        if self.current[0] == "end":
            raise self._fail("Empty expression")
        tree = self._expr()
        if self.current[0] != "end":
            raise self._fail(f"Unexpected '{self.current[1]}'")
        return tree

    def _expr(self) -> sy.Expr:
        tree = self._term()
        while True:
            if self._accept("+"):
                tree = tree + self._term()
            elif self._accept("-"):
                tree = tree - self._term()
            else:
                return tree

    def _term(self) -> sy.Expr:
        tree = self._unary()
        while True:
            if self._accept("*"):
                tree = tree * self._unary()
            elif self._accept("/"):
                tree = tree / self._unary()
            else:
                return tree

    def _unary(self) -> sy.Expr:
        if self._accept("-"):
            return -self._unary()
        if self._accept("+"):
            return self._unary()
        return self._power()

    def _power(self) -> sy.Expr:
        base = self._atom()
        if self._accept("^"):
            return base ** self._unary()
        return base

    def _atom(self) -> sy.Expr:
        kind, tok, _ = self.current
        if kind == "num":
            self.index += 1
            return sy.Float(tok) if any(c in tok for c in ".eE") else sy.Integer(tok)
        if kind == "name":
            self.index += 1
            if tok == "x1":
                return X1
            if tok == "x2":
                return X2
            if tok == "pi":
                return sy.pi
            if tok in _FUNCTIONS:
                self._expect("(")
                argument = self._expr()
                self._expect(")")
                return _FUNCTIONS[tok](argument)
            self.index -= 1
            raise self._fail(f"Unknown name '{tok}'")
        if self._accept("("):
            inner = self._expr()
            self._expect(")")
            return inner
        found = tok or "end of input"
        raise self._fail(f"Unexpected '{found}'")


# ---------------------------------------------------------------------------
# Public type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expression:
    """
    A parsed data expression in ``(x1, x2)``.

    Attributes:
        text: Source string (kept for reports).
        tree: Parsed :mod:`sympy` expression.
    """

    text: str
    tree: sy.Expr = field(repr=False)

    @classmethod
    def parse(cls, text: str) -> "Expression":
        """
        Parse *text* and check it is finite on the unit square.

        Raises:
            ExpressionError: Syntax error (with position) or non-finite values.
        """
        expression = cls(text=str(text), tree=_Parser(str(text)).parse())
        xx, yy = np.meshgrid(_CHECK_GRID, _CHECK_GRID)
        with np.errstate(all="ignore"):
            values = expression(xx, yy)
        if not np.all(np.isfinite(values)):
            raise ExpressionError(f"Expression '{text}' is not finite on [0, 1]^2")
        return expression

    @classmethod
    def constant(cls, value: float) -> "Expression":
        return cls(text=repr(float(value)), tree=sy.Float(float(value)))

    @cached_property
    def _function(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        return sy.lambdify((X1, X2), self.tree, modules="numpy")

    def __call__(self, x1: np.ndarray | float, x2: np.ndarray | float) -> np.ndarray:
        """Evaluate at broadcast points; constants broadcast to the point shape."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast_shapes(x1.shape, x2.shape)
        return np.asarray(self._function(x1, x2), dtype=float) * np.ones(shape)

    def derivative(self, variable: str = "x2", order: int = 1) -> "Expression":
        """Exact partial derivative in ``x1`` or ``x2``."""
        symbol = {"x1": X1, "x2": X2}[variable]
        tree = sy.diff(self.tree, symbol, order)
        return Expression(text=f"d^{order}/d{variable}^{order}({self.text})", tree=tree)

    @property
    def is_constant(self) -> bool:
        return not self.tree.free_symbols

    def depends_on(self, variable: str) -> bool:
        return {"x1": X1, "x2": X2}[variable] in self.tree.free_symbols

    def __str__(self) -> str:
        return self.text
