"""Expression text <-> PolyJet.

Grammar (whitespace insensitive):

    expr     := ['+'|'-'] term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := atom ('^' uint)?
    atom     := rational | 'i' | ident | '(' expr ')'
    rational := uint ('/' uint)?

Identifiers must be declared coordinate names.  ``print_canonical`` is the
inverse: terms sorted by total degree then exponent tuple, coefficients as
``a/b`` rationals and ``i`` literals, so that parse(print(p)) == p.
"""

from __future__ import annotations

from fractions import Fraction

from .jets import PolyJet
from .scalars import I, ONE, Scalar, scalar_sign_magnitude


class ParseError(ValueError):
    """Syntax or name error, with the 0-based offset in ``position``."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_CHARS = {"+", "-", "*", "^", "/", "(", ")"}


def _tokenize(src: str):
    tokens = []
    k = 0
    n = len(src)
    while k < n:
        c = src[k]
        if c.isspace():
            k += 1
            continue
        if c in _TOKEN_CHARS:
            tokens.append((c, c, k))
            k += 1
            continue
        if c.isdigit():
            j = k
            while j < n and src[j].isdigit():
                j += 1
            tokens.append(("int", src[k:j], k))
            k = j
            continue
        if c.isalpha() or c == "_":
            j = k
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("ident", src[k:j], k))
            k = j
            continue
        raise ParseError(f"unexpected character {c!r}", k)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str, vars: tuple[str, ...], cap):
        self.src = src
        self.vars = tuple(vars)
        self.cap = cap
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> PolyJet:
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return value

    def expr(self) -> PolyJet:
        sign = 1
        if self.peek()[0] in ("+", "-"):
            sign = -1 if self.advance()[0] == "-" else 1
        value = self.term()
        if sign < 0:
            value = -value
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            value = value - rhs if op == "-" else value + rhs
        return value

    def term(self) -> PolyJet:
        value = self.factor()
        while self.peek()[0] == "*":
            self.advance()
            value = value * self.factor()
        return value

    def factor(self) -> PolyJet:
        value = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.expect("int")
            power = int(tok[1])
            out = PolyJet.constant(self.vars, 1, self.cap)
            for _ in range(power):
                out = out * value
            return out
        return value

    def atom(self) -> PolyJet:
        kind, text, where = self.advance()
        if kind == "int":
            numer = int(text)
            if self.peek()[0] == "/":
                self.advance()
                denom = int(self.expect("int")[1])
                if denom == 0:
                    raise ParseError("zero denominator", where)
                return PolyJet.constant(self.vars, Fraction(numer, denom), self.cap)
            return PolyJet.constant(self.vars, numer, self.cap)
        if kind == "ident":
            if text == "i":
                return PolyJet.constant(self.vars, I, self.cap)
            if text not in self.vars:
                raise ParseError(f"unknown identifier {text!r}", where)
            return PolyJet.coordinate(self.vars, text, self.cap)
        if kind == "(":
            value = self.expr()
            self.expect(")")
            return value
        raise ParseError(f"unexpected {text!r}" if text else "unexpected end of input", where)


def parse_poly(src: str, vars, cap: int | None = None) -> PolyJet:
    """Parse an expression over the named coordinates into a PolyJet."""
    return _Parser(src, tuple(vars), cap).parse()


def parse_scalar(src: str) -> Scalar:
    """Parse a constant expression (rationals and ``i`` only)."""
    return parse_poly(src, ()).constant_term()


def _monomial_text(vars, exps) -> str:
    parts = []
    for name, e in zip(vars, exps):
        if e == 0:
            continue
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def print_canonical(p: PolyJet) -> str:
    """Deterministic text form; the exact inverse of :func:`parse_poly`."""
    if p.is_zero():
        return "0"
    chunks = []
    for exps, coeff in p.sorted_terms():
        mono = _monomial_text(p.vars, exps)
        negative, magnitude = scalar_sign_magnitude(coeff)
        if mono:
            body = mono if magnitude == "1" else f"{magnitude}*{mono}"
        else:
            body = magnitude
        if not chunks:
            chunks.append(f"-{body}" if negative else body)
        else:
            chunks.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(chunks)
