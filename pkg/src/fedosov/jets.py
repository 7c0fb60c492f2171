"""Sparse multivariate polynomial jets with optional total-degree truncation.

A :class:`PolyJet` stores a polynomial in named chart coordinates as a map
from exponent tuples to :class:`~fedosov.scalars.Scalar` coefficients.  An
optional ``cap`` marks the jet as a truncated Taylor expansion: terms of
total degree above ``cap`` have been discarded and must not be trusted.

Truncation bookkeeping follows one discipline throughout the engine:

* sums and products carry the minimum of the operand caps,
* differentiation lowers the cap by one,
* a retained coefficient is always exact (truncation only ever removes
  whole terms, it never alters those kept).

``cap=None`` means the jet is an exact polynomial.  Equality compares
variables and terms only; two jets that agree as polynomials are equal even
if their caps differ.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .scalars import ONE, Scalar


def min_cap(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class PolyJet:
    """Sparse polynomial with Scalar coefficients and an optional degree cap."""

    __slots__ = ("vars", "terms", "cap")

    def __init__(self, vars: tuple[str, ...], terms: dict | None = None, cap: int | None = None):
        vars = tuple(vars)
        clean: dict[tuple[int, ...], Scalar] = {}
        if terms:
            for exps, coeff in terms.items():
                coeff = Scalar.of(coeff)
                if coeff.is_zero():
                    continue
                exps = tuple(exps)
                if len(exps) != len(vars):
                    raise ValueError("exponent tuple length does not match variables")
                if cap is not None and sum(exps) > cap:
                    continue
                clean[exps] = coeff
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "cap", cap)

    def __setattr__(self, name, value):
        raise AttributeError("PolyJet is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, vars, cap=None) -> "PolyJet":
        return cls(vars, {}, cap)

    @classmethod
    def constant(cls, vars, value, cap=None) -> "PolyJet":
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): Scalar.of(value)}, cap)

    @classmethod
    def coordinate(cls, vars, name, cap=None) -> "PolyJet":
        vars = tuple(vars)
        idx = vars.index(name)
        exps = tuple(1 if k == idx else 0 for k in range(len(vars)))
        return cls(vars, {exps: ONE}, cap)

    @classmethod
    def monomial(cls, vars, exps, coeff=1, cap=None) -> "PolyJet":
        return cls(vars, {tuple(exps): Scalar.of(coeff)}, cap)

    # -- predicates / views -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> Scalar:
        return self.terms.get((0,) * len(self.vars), Scalar(0))

    def as_scalar(self) -> Scalar:
        if not self.is_constant():
            raise ValueError("jet is not constant")
        return self.constant_term()

    def degree(self) -> int:
        """Total degree; -1 for the zero jet."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def partial_degree(self, indices) -> int:
        """Maximum combined degree in the given variable positions (-1 if zero)."""
        if not self.terms:
            return -1
        return max(sum(e[i] for i in indices) for e in self.terms)

    def sorted_terms(self):
        """Terms ordered by total degree, then exponent tuple (high powers first)."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0])))

    # -- arithmetic ---------------------------------------------------------

    def _check_vars(self, other: "PolyJet"):
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")

    def __add__(self, other: "PolyJet") -> "PolyJet":
        self._check_vars(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = terms.get(exps)
            terms[exps] = coeff if acc is None else acc + coeff
        return PolyJet(self.vars, terms, min_cap(self.cap, other.cap))

    def __neg__(self) -> "PolyJet":
        return PolyJet(self.vars, {e: -c for e, c in self.terms.items()}, self.cap)

    def __sub__(self, other: "PolyJet") -> "PolyJet":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return self.scale(other)
        self._check_vars(other)
        cap = min_cap(self.cap, other.cap)
        terms: dict[tuple[int, ...], Scalar] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if cap is not None and d1 + sum(e2) > cap:
                    continue
                exps = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                acc = terms.get(exps)
                terms[exps] = c if acc is None else acc + c
        return PolyJet(self.vars, terms, cap)

    __rmul__ = __mul__

    def scale(self, factor) -> "PolyJet":
        factor = Scalar.of(factor)
        if factor.is_zero():
            return PolyJet.zero(self.vars, self.cap)
        return PolyJet(self.vars, {e: c * factor for e, c in self.terms.items()}, self.cap)

    def diff(self, index: int) -> "PolyJet":
        """Partial derivative; a finite cap drops by one."""
        terms: dict[tuple[int, ...], Scalar] = {}
        for exps, coeff in self.terms.items():
            k = exps[index]
            if not k:
                continue
            lowered = list(exps)
            lowered[index] = k - 1
            terms[tuple(lowered)] = coeff * k
        cap = None if self.cap is None else self.cap - 1
        return PolyJet(self.vars, terms, cap)

    def power(self, exponent, order: int) -> "PolyJet":
        """Binomial series of ``self**exponent`` truncated at total degree ``order``.

        Requires constant term exactly 1; ``exponent`` may be any Fraction.
        """
        exponent = Fraction(exponent)
        if self.constant_term() != Scalar(1):
            raise ValueError("power() requires a jet with constant term 1")
        cap = min_cap(self.cap, order)
        one = PolyJet.constant(self.vars, 1, cap)
        v = (self - one).with_cap(cap)
        result = one
        vk = one
        binom = Fraction(1)
        for k in range(1, order + 1):
            binom = binom * (exponent - (k - 1)) / k
            vk = vk * v
            if vk.is_zero():
                break
            result = result + vk.scale(Scalar(binom))
        return result

    def with_cap(self, cap: int | None) -> "PolyJet":
        """Re-cap the jet, dropping terms above ``cap``.

        Raising a cap is the caller's assertion that the extra degrees are
        genuinely exact (used where a construction knows its own validity).
        """
        return PolyJet(self.vars, self.terms, cap)

    def conjugate_coefficients(self) -> "PolyJet":
        return PolyJet(self.vars, {e: c.conjugate() for e, c in self.terms.items()}, self.cap)

    # -- variable plumbing ---------------------------------------------------

    def embed(self, new_vars) -> "PolyJet":
        """Reinterpret over a superset of variables (matched by name)."""
        new_vars = tuple(new_vars)
        positions = [new_vars.index(v) for v in self.vars]
        width = len(new_vars)
        terms = {}
        for exps, coeff in self.terms.items():
            row = [0] * width
            for pos, e in zip(positions, exps):
                row[pos] = e
            terms[tuple(row)] = coeff
        return PolyJet(new_vars, terms, self.cap)

    def restrict(self, sub_vars) -> "PolyJet":
        """Project onto a variable subset; fails if other variables occur."""
        sub_vars = tuple(sub_vars)
        keep = [self.vars.index(v) for v in sub_vars]
        drop = [i for i in range(len(self.vars)) if i not in keep]
        terms = {}
        for exps, coeff in self.terms.items():
            if any(exps[i] for i in drop):
                raise ValueError("jet depends on variables outside the restriction")
            terms[tuple(exps[i] for i in keep)] = coeff
        return PolyJet(sub_vars, terms, self.cap)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyJet):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def key(self):
        """Hashable canonical identity (variables, sorted terms, cap)."""
        return (self.vars, tuple(sorted(self.terms.items())), self.cap)

    def __str__(self) -> str:
        from .exprs import print_canonical

        return print_canonical(self)

    def __repr__(self) -> str:
        return f"PolyJet({self!s})"


def jet_power(u: PolyJet, exponent, order: int) -> PolyJet:
    """Module-level alias for :meth:`PolyJet.power`."""
    return u.power(exponent, order)


def binomial(e: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out = out * (e - j) / (j + 1)
    return out


def integer_binomial(n: int, k: int) -> int:
    return comb(n, k)
