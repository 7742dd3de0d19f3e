"""Text formats for pure states: a Dirac-ket expression language and an
amplitude table.

Ket expressions::

    state   := ['dims:' int+ ';'] sum
    sum     := ['+'|'-'] product (('+'|'-') product)*
    product := atom (('*'|'/') atom)*
    atom    := number | 'i' | 'sqrt' '(' sum ')' | ket | '(' sum ')'
    ket     := '|' digit+ '>'

``*`` between two states is the tensor product, so ``|0>*|1>`` equals
``|01>``.  Each ket digit is one party; a party's dimension is its largest
digit plus one (at least 2) unless a ``dims:`` header overrides it.

Amplitude tables::

    # comment
    dims: 2 2
    0 0  0.70710678 0
    1 1  0.70710678 0
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    ArityMismatch,
    BadHeader,
    BadRow,
    DuplicateEntry,
    IndexOutOfRange,
    KetSyntaxError,
    SizeLimit,
    ZeroState,
)
from .state import PureState, SystemShape, max_dim, normalize

MAX_NESTING = 200


@dataclass(frozen=True)
class Token:
    kind: str  # ket, num, ident, op, eof
    text: str
    line: int
    column: int


_OPS = set("+-*/();:")


def _tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg, expected=()):
        raise KetSyntaxError(msg, line, col, expected)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_col = col
        if ch == "|":
            j = i + 1
            while j < n and text[j] in "0123456789":
                j += 1
            if j == i + 1:
                col += 1
                err("empty ket", ("digit",))
            if j >= n or text[j] != ">":
                col += j - i
                err("unterminated ket", ("'>'",))
            tokens.append(Token("ket", text[i + 1 : j], line, start_col))
            col += j + 1 - i
            i = j + 1
        elif ch in "0123456789.":
            j = i
            while j < n and text[j] in "0123456789":
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j] in "0123456789":
                    j += 1
            if text[i:j] == ".":
                err("malformed number", ("digit",))
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k] in "0123456789":
                    while k < n and text[k] in "0123456789":
                        k += 1
                    j = k
            tokens.append(Token("num", text[i:j], line, start_col))
            col += j - i
            i = j
        elif ch.isascii() and ch.isalpha():
            j = i
            while j < n and text[j].isascii() and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word not in ("i", "sqrt", "dims"):
                err(f"unknown name {word!r}", ("'i'", "'sqrt'"))
            tokens.append(Token("ident", word, line, start_col))
            col += j - i
            i = j
        elif ch in _OPS:
            tokens.append(Token("op", ch, line, start_col))
            i += 1
            col += 1
        else:
            err(f"unexpected character {ch!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Ket:
    """Sparse state value: digit tuple -> amplitude, all of one arity."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: dict):
        self.arity = arity
        self.terms = terms


Value = Union[complex, _Ket]


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.depth = 0
        self.cap = max_dim()
        self.max_arity = max(1, int(math.log2(self.cap)))

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, msg, expected=(), tok=None):
        tok = tok or self.tok
        return KetSyntaxError(msg, tok.line, tok.column, expected)

    def expect_op(self, ch):
        tok = self.tok
        if tok.kind == "op" and tok.text == ch:
            return self.advance()
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", (f"'{ch}'",))

    def finite(self, value: Value, tok: Token) -> Value:
        if isinstance(value, _Ket):
            ok = all(cmath.isfinite(a) for a in value.terms.values())
        else:
            ok = cmath.isfinite(value)
        if not ok:
            raise self.error("non-finite value", tok=tok)
        return value

    def parse(self):
        dims = None
        if self.tok.kind == "ident" and self.tok.text == "dims":
            dims = self.parse_header()
        value = self.parse_sum()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}", ("'+'", "'-'", "'*'", "'/'", "end of input"))
        if not isinstance(value, _Ket):
            raise self.error("expression evaluates to a scalar, not a state", ("ket",), tok=self.tokens[0])
        return value, dims

    def parse_header(self):
        self.advance()
        self.expect_op(":")
        dims = []
        while self.tok.kind == "num":
            tok = self.advance()
            if not tok.text.isdigit():
                raise self.error("dimension must be an integer", tok=tok)
            d = int(tok.text)
            if d < 2:
                raise self.error("dimension must be >= 2", tok=tok)
            dims.append(d)
        if not dims:
            raise self.error("empty dims header", ("integer",))
        self.expect_op(";")
        return dims

    def enter(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("expression nested too deeply")

    def parse_sum(self) -> Value:
        self.enter()
        sign = 1
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = -1 if self.advance().text == "-" else 1
        start = self.tok
        value = self.parse_product()
        if sign < 0:
            value = self.scale(-1, value)
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            rhs = self.parse_product()
            if op.text == "-":
                rhs = self.scale(-1, rhs)
            value = self.add(value, rhs, op)
        self.depth -= 1
        return self.finite(value, start)

    def parse_product(self) -> Value:
        value = self.parse_atom()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            rhs = self.parse_atom()
            if op.text == "*":
                value = self.multiply(value, rhs, op)
            else:
                if isinstance(rhs, _Ket):
                    raise self.error("cannot divide by a state", ("scalar",), tok=op)
                if rhs == 0:
                    raise self.error("division by zero", tok=op)
                value = self.scale(1 / rhs, value)
            self.finite(value, op)
        return value

    def parse_atom(self) -> Value:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            try:
                value = complex(float(tok.text))
            except (ValueError, OverflowError):
                raise self.error(f"malformed number {tok.text!r}", tok=tok) from None
            return self.finite(value, tok)
        if tok.kind == "ket":
            self.advance()
            return self.ket(tok)
        if tok.kind == "ident" and tok.text == "i":
            self.advance()
            return 1j
        if tok.kind == "ident" and tok.text == "sqrt":
            self.advance()
            self.expect_op("(")
            inner = self.parse_sum()
            self.expect_op(")")
            if isinstance(inner, _Ket):
                raise self.error("sqrt of a state", ("scalar",), tok=tok)
            return self.finite(cmath.sqrt(inner), tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_sum()
            self.expect_op(")")
            return inner
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", ("number", "ket", "'i'", "'sqrt'", "'('"))

    def ket(self, tok: Token) -> _Ket:
        digits = tuple(int(c) for c in tok.text)
        if len(digits) > self.max_arity:
            raise SizeLimit(
                f"line {tok.line}, column {tok.column}: ket with {len(digits)} parties "
                f"exceeds the dimension cap {self.cap}"
            )
        return _Ket(len(digits), {digits: 1 + 0j})

    def scale(self, c: complex, value: Value) -> Value:
        if isinstance(value, _Ket):
            return _Ket(value.arity, {k: c * a for k, a in value.terms.items()})
        return c * value

    def add(self, a: Value, b: Value, op: Token) -> Value:
        a_ket, b_ket = isinstance(a, _Ket), isinstance(b, _Ket)
        if a_ket != b_ket:
            raise self.error("cannot add a scalar and a state", tok=op)
        if not a_ket:
            return a + b
        if a.arity != b.arity:
            raise ArityMismatch(
                f"cannot add kets of {a.arity} and {b.arity} parties", op.line, op.column
            )
        terms = dict(a.terms)
        for k, v in b.terms.items():
            terms[k] = terms.get(k, 0j) + v
        self.check_size(len(terms), op)
        return _Ket(a.arity, terms)

    def multiply(self, a: Value, b: Value, op: Token) -> Value:
        a_ket, b_ket = isinstance(a, _Ket), isinstance(b, _Ket)
        if a_ket and b_ket:
            arity = a.arity + b.arity
            if arity > self.max_arity:
                raise SizeLimit(
                    f"line {op.line}, column {op.column}: tensor product of "
                    f"{arity} parties exceeds the dimension cap {self.cap}"
                )
            self.check_size(len(a.terms) * len(b.terms), op)
            terms = {ka + kb: va * vb for ka, va in a.terms.items() for kb, vb in b.terms.items()}
            return _Ket(arity, terms)
        if a_ket:
            return self.scale(b, a)
        return self.scale(a, b)

    def check_size(self, count: int, op: Token):
        if count > self.cap:
            raise SizeLimit(
                f"line {op.line}, column {op.column}: {count} terms exceed the dimension cap {self.cap}"
            )


def evaluate_ket_expression(text: str) -> tuple[np.ndarray, tuple[int, ...]]:
    """Evaluate a ket expression to a dense, unnormalized amplitude vector."""
    ket, header = _Parser(text).parse()
    inferred = [2] * ket.arity
    for digits in ket.terms:
        for k, d in enumerate(digits):
            inferred[k] = max(inferred[k], d + 1)
    if header is not None:
        if len(header) != ket.arity:
            raise ArityMismatch(
                f"dims header lists {len(header)} parties but kets have {ket.arity}", 1, 1
            )
        for k, (d, need) in enumerate(zip(header, inferred)):
            if need > d:
                raise IndexOutOfRange(
                    f"party {k + 1} uses digit {need - 1} but dims allows < {d}", 1, 1
                )
        dims = tuple(header)
    else:
        dims = tuple(inferred)
    shape = SystemShape(dims)
    amps = np.zeros(shape.total_dim, dtype=np.complex128)
    for digits, a in ket.terms.items():
        amps[np.ravel_multi_index(digits, dims)] += a
    return amps, dims


def parse_ket_expression(text: str) -> PureState:
    """Parse and normalize a ket expression such as ``(|00> + |11>)/sqrt(2)``."""
    amps, dims = evaluate_ket_expression(text)
    if float(np.linalg.norm(amps)) < 1e-12:
        raise ZeroState("ket expression sums to the zero vector")
    return normalize(amps, dims)


def _table_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body


def evaluate_amplitude_table(text: str) -> tuple[np.ndarray, tuple[int, ...]]:
    """Read an amplitude table into a dense, unnormalized amplitude vector."""
    lines = _table_lines(text)
    first = next(lines, None)
    if first is None:
        raise BadHeader("missing 'dims:' header", 1, 1)
    lineno, header = first
    if not header.startswith("dims:"):
        raise BadHeader("first line must be 'dims: d_1 ... d_n'", lineno, 1)
    fields = header[len("dims:"):].split()
    try:
        dims = tuple(int(f) for f in fields)
    except ValueError:
        raise BadHeader("dimensions must be integers", lineno, 1) from None
    if not dims or any(d < 2 for d in dims):
        raise BadHeader("need at least one dimension, each >= 2", lineno, 1)
    shape = SystemShape(dims)
    n = len(dims)
    amps = np.zeros(shape.total_dim, dtype=np.complex128)
    seen = set()
    for lineno, body in lines:
        fields = body.split()
        if len(fields) != n + 2:
            raise BadRow(f"expected {n} indices and 2 amplitude parts, got {len(fields)} fields", lineno, 1)
        try:
            index = tuple(int(f) for f in fields[:n])
            re, im = float(fields[n]), float(fields[n + 1])
        except ValueError:
            raise BadRow("malformed number", lineno, 1) from None
        if not (math.isfinite(re) and math.isfinite(im)):
            raise BadRow("amplitude must be finite", lineno, 1)
        for k, (i, d) in enumerate(zip(index, dims)):
            if not 0 <= i < d:
                raise IndexOutOfRange(f"index {i} of party {k + 1} outside 0..{d - 1}", lineno, 1)
        if index in seen:
            raise DuplicateEntry(f"index {' '.join(map(str, index))} listed twice", lineno, 1)
        seen.add(index)
        amps[np.ravel_multi_index(index, dims)] = complex(re, im)
    return amps, dims


def parse_amplitude_table(text: str) -> PureState:
    amps, dims = evaluate_amplitude_table(text)
    if float(np.linalg.norm(amps)) < 1e-12:
        raise ZeroState("amplitude table describes the zero vector")
    return normalize(amps, dims)


def serialize_state(state: PureState, threshold: float = 1e-12) -> str:
    """Write ``state`` as an amplitude table, skipping tiny amplitudes."""
    lines = ["dims: " + " ".join(str(d) for d in state.dims)]
    for flat, a in enumerate(state.amplitudes):
        if abs(a) < threshold:
            continue
        index = np.unravel_index(flat, state.dims)
        lines.append(
            " ".join(str(int(i)) for i in index) + f" {float(a.real)!r} {float(a.imag)!r}"
        )
    return "\n".join(lines) + "\n"
