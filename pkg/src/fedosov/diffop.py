"""Normal-ordered differential operators with explicit hbar powers.

A :class:`DiffOperator` acts on functions of named variables as

    sum over (beta, m) of  hbar^m * a(x) * d^beta

with every coefficient ``a`` a :class:`PolyJet` placed left of all
derivatives.  Composition re-normal-orders via the Leibniz rule.
"""

from __future__ import annotations

import itertools
from math import comb

from .jets import PolyJet
from .scalars import Scalar


class DiffOperator:
    """Sparse map (derivative multi-index, hbar power) -> coefficient jet."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple[str, ...], terms: dict | None = None):
        vars = tuple(vars)
        clean: dict[tuple[tuple[int, ...], int], PolyJet] = {}
        if terms:
            for (beta, m), jet in terms.items():
                if jet.is_zero():
                    continue
                clean[(tuple(beta), m)] = jet
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("DiffOperator is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, vars) -> "DiffOperator":
        return cls(vars, {})

    @classmethod
    def multiplication(cls, jet: PolyJet) -> "DiffOperator":
        zero_beta = (0,) * len(jet.vars)
        return cls(jet.vars, {(zero_beta, 0): jet})

    @classmethod
    def derivative(cls, vars, index: int, hbar_power: int = 0, coeff=1) -> "DiffOperator":
        vars = tuple(vars)
        beta = tuple(1 if k == index else 0 for k in range(len(vars)))
        return cls(vars, {(beta, hbar_power): PolyJet.constant(vars, coeff)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        if self.vars != other.vars:
            raise ValueError("operator variable mismatch")
        terms = dict(self.terms)
        for key, jet in other.terms.items():
            old = terms.get(key)
            merged = jet if old is None else old + jet
            if merged.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = merged
        return DiffOperator(self.vars, terms)

    def __neg__(self) -> "DiffOperator":
        return DiffOperator(self.vars, {k: -jet for k, jet in self.terms.items()})

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + (-other)

    def scale(self, factor) -> "DiffOperator":
        factor = Scalar.of(factor)
        return DiffOperator(self.vars, {k: jet.scale(factor) for k, jet in self.terms.items()})

    def hbar_shift(self, k: int) -> "DiffOperator":
        return DiffOperator(self.vars, {(beta, m + k): jet for (beta, m), jet in self.terms.items()})

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """self after other, re-normal-ordered by the Leibniz rule."""
        if self.vars != other.vars:
            raise ValueError("operator variable mismatch")
        n = len(self.vars)
        acc: dict[tuple[tuple[int, ...], int], PolyJet] = {}
        for (beta, m1), a in self.terms.items():
            ranges = [range(b + 1) for b in beta]
            for alpha in itertools.product(*ranges):
                weight = 1
                for b, al in zip(beta, alpha):
                    weight *= comb(b, al)
                rest = tuple(b - al for b, al in zip(beta, alpha))
                for (gamma, m2), bjet in other.terms.items():
                    deriv = bjet
                    dead = False
                    for idx in range(n):
                        for _ in range(alpha[idx]):
                            deriv = deriv.diff(idx)
                            if deriv.is_zero():
                                dead = True
                                break
                        if dead:
                            break
                    if dead:
                        continue
                    key = (tuple(r + g for r, g in zip(rest, gamma)), m1 + m2)
                    piece = (a * deriv).scale(weight)
                    if piece.is_zero():
                        continue
                    old = acc.get(key)
                    merged = piece if old is None else old + piece
                    if merged.is_zero():
                        acc.pop(key, None)
                    else:
                        acc[key] = merged
        return DiffOperator(self.vars, acc)

    # -- application ---------------------------------------------------------

    def apply_jet(self, f: PolyJet) -> dict[int, PolyJet]:
        """Apply to an hbar-free function; returns hbar power -> jet."""
        out: dict[int, PolyJet] = {}
        for (beta, m), a in self.terms.items():
            deriv = f
            for idx, count in enumerate(beta):
                for _ in range(count):
                    deriv = deriv.diff(idx)
            piece = a * deriv
            if piece.is_zero():
                continue
            old = out.get(m)
            merged = piece if old is None else old + piece
            if merged.is_zero():
                out.pop(m, None)
            else:
                out[m] = merged
        return out

    def at_origin(self) -> dict[tuple[tuple[int, ...], int], Scalar]:
        """Constant terms of all coefficients; requires every cap >= 0."""
        out = {}
        for key, jet in self.terms.items():
            if jet.cap is not None and jet.cap < 0:
                raise ValueError("coefficient jet has no trusted constant term")
            c = jet.constant_term()
            if not c.is_zero():
                out[key] = c
        return out

    # -- comparison / printing --------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], sum(kv[0][0]), kv[0][0]))

    def __str__(self) -> str:
        from .exprs import print_canonical

        if not self.terms:
            return "0"
        lines = []
        for (beta, m), jet in self.sorted_terms():
            dpart = " ".join(
                f"d({name})" + (f"^{b}" if b > 1 else "")
                for name, b in zip(self.vars, beta)
                if b
            )
            head = f"hbar^{m}"
            if dpart:
                head = f"{head} {dpart}"
            lines.append(f"{head} : {print_canonical(jet)}")
        return "\n".join(lines)

    def __repr__(self):
        return f"DiffOperator<{len(self.terms)} terms>"
