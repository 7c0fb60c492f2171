"""Polynomial representations of the Weyl algebra and metaplectic generators.

Three pictures, all acting on polynomial wave functions with explicit hbar
powers:

* position: q-generators multiply, p-generators act as -i hbar d/dq,
* momentum: p-generators multiply, q-generators act as +i hbar d/dp
  (the sign fixed by the canonical commutation relation),
* fock: z-generators multiply, conjugate generators act as hbar d/dz.

A symmetric fiber monomial acts through the recursion

    y^mu . a  =  y^mu o a  -  (i hbar / 2) omega_inv[mu][nu] d(a)/d(y^nu),

so the representation is a homomorphism for the circle product by
construction.
"""

from __future__ import annotations

from fractions import Fraction

from .diffop import DiffOperator
from .geometry import fock_symplectic_matrix, is_sp_matrix, standard_symplectic_matrix
from .jets import PolyJet
from .scalars import I, ONE, Scalar
from .weyl import WeylForm

_KINDS = {
    "position": "position",
    "schrodinger-position": "position",
    "momentum": "momentum",
    "schrodinger-momentum": "momentum",
    "fock": "fock",
}


class PolyWave:
    """Sparse polynomial wave function with integer hbar powers per term."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple[str, ...], terms: dict | None = None):
        vars = tuple(vars)
        clean: dict[tuple[int, tuple[int, ...]], Scalar] = {}
        if terms:
            for (m, exps), coeff in terms.items():
                coeff = Scalar.of(coeff)
                if coeff.is_zero():
                    continue
                clean[(m, tuple(exps))] = coeff
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("PolyWave is immutable")

    @classmethod
    def unit(cls, vars) -> "PolyWave":
        vars = tuple(vars)
        return cls(vars, {(0, (0,) * len(vars)): ONE})

    @classmethod
    def monomial(cls, vars, exps, coeff=1, hbar_power: int = 0) -> "PolyWave":
        return cls(tuple(vars), {(hbar_power, tuple(exps)): Scalar.of(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolyWave") -> "PolyWave":
        terms = dict(self.terms)
        for key, c in other.terms.items():
            old = terms.get(key)
            merged = c if old is None else old + c
            if merged.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = merged
        return PolyWave(self.vars, terms)

    def __neg__(self) -> "PolyWave":
        return PolyWave(self.vars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "PolyWave") -> "PolyWave":
        return self + (-other)

    def scale(self, factor) -> "PolyWave":
        factor = Scalar.of(factor)
        return PolyWave(self.vars, {k: c * factor for k, c in self.terms.items()})

    def hbar_shift(self, k: int) -> "PolyWave":
        return PolyWave(self.vars, {(m + k, exps): c for (m, exps), c in self.terms.items()})

    def mul_var(self, index: int) -> "PolyWave":
        terms = {}
        for (m, exps), c in self.terms.items():
            lifted = list(exps)
            lifted[index] += 1
            terms[(m, tuple(lifted))] = c
        return PolyWave(self.vars, terms)

    def diff(self, index: int) -> "PolyWave":
        terms = {}
        for (m, exps), c in self.terms.items():
            k = exps[index]
            if not k:
                continue
            lowered = list(exps)
            lowered[index] = k - 1
            terms[(m, tuple(lowered))] = c * k
        return PolyWave(self.vars, terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyWave):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __str__(self) -> str:
        from .scalars import format_scalar

        if not self.terms:
            return "0"
        bits = []
        for (m, exps), c in sorted(self.terms.items()):
            mono = "*".join(
                f"{name}^{e}" if e > 1 else name for name, e in zip(self.vars, exps) if e
            )
            head = f"hbar^{m}"
            if mono:
                head = f"{head}*{mono}"
            bits.append(f"({format_scalar(c)})*{head}")
        return " + ".join(bits)

    def __repr__(self):
        return f"PolyWave<{len(self.terms)} terms>"


class RepConfig:
    """Which picture the fiber generators act in, for n degrees of freedom."""

    def __init__(self, kind: str, n: int):
        try:
            self.kind = _KINDS[kind]
        except KeyError:
            raise ValueError(f"unknown representation kind {kind!r}") from None
        self.n = n
        if self.kind == "fock":
            self.omega = fock_symplectic_matrix(n)
            prefix = "z"
        else:
            self.omega = standard_symplectic_matrix(2 * n)
            prefix = "q" if self.kind == "position" else "p"
        self.wave_vars = tuple(f"{prefix}{j + 1}" for j in range(n))
        from .geometry import matrix_inverse

        self.omega_inv = matrix_inverse(self.omega)


def _generator_action(cfg: RepConfig, mu: int, psi: PolyWave) -> PolyWave:
    n = cfg.n
    if cfg.kind == "position":
        if mu < n:
            return psi.mul_var(mu)
        return psi.diff(mu - n).hbar_shift(1).scale(-I)
    if cfg.kind == "momentum":
        if mu < n:
            return psi.diff(mu).hbar_shift(1).scale(I)
        return psi.mul_var(mu - n)
    # fock
    if mu < n:
        return psi.mul_var(mu)
    return psi.diff(mu - n).hbar_shift(1)


def fiber_monomial_action(cfg: RepConfig, sym: tuple[int, ...], psi: PolyWave) -> PolyWave:
    """Action of the symmetric monomial y^sym on a wave function."""
    if not sym:
        return psi
    mu = sym[0]
    rest = sym[1:]
    out = _generator_action(cfg, mu, fiber_monomial_action(cfg, rest, psi))
    half = -(I / 2)
    for idx, nu in enumerate(rest):
        if idx and rest[idx] == rest[idx - 1]:
            continue  # each distinct nu once; multiplicity handled below
        w = cfg.omega_inv[mu][nu]
        if w.is_zero():
            continue
        mult = rest.count(nu)
        smaller = list(rest)
        smaller.remove(nu)
        piece = fiber_monomial_action(cfg, tuple(smaller), psi)
        out = out + piece.hbar_shift(1).scale(half * w * mult)
    return out


def rep_apply(cfg: RepConfig, a: WeylForm, psi: PolyWave) -> PolyWave:
    """Apply a pure fiber Weyl element (constant coefficients, no form part).

    The result may carry transient negative hbar powers when ``a`` does.
    """
    if psi.vars != cfg.wave_vars:
        raise ValueError("wave function variables do not match the representation")
    if a.chart.dim != 2 * cfg.n:
        raise ValueError("chart dimension does not match the representation")
    if a.chart.omega != cfg.omega:
        raise ValueError("chart symplectic form does not match the representation")
    out = PolyWave(cfg.wave_vars, {})
    for (h, sym, form), jet in a.terms.items():
        if form:
            raise ValueError("representation requires a zero form degree")
        coeff = jet.as_scalar()
        piece = fiber_monomial_action(cfg, sym, psi).hbar_shift(h).scale(coeff)
        out = out + piece
    return out


def _block(matrix, rows, cols):
    return [[Scalar.of(matrix[r][c]) for c in cols] for r in rows]


def metaplectic_operator(cfg: RepConfig, X) -> DiffOperator:
    """The differential operator representing the quadratic generator of X.

    Position picture:
        (i hbar/2) B^{jk} d_j d_k - A^k_j q^j d_k - tr(A)/2 + (i/2 hbar) C_{jk} q^j q^k
    Fock picture:
        -(hbar/2) B_{ab} d_a d_b - A_{ab} z^b d_a - tr(A)/2 + (1/2 hbar) C_{ab} z^a z^b
    for X = [[A, B], [C, -A^T]] with B, C symmetric.
    """
    if cfg.kind == "momentum":
        raise ValueError("the quadratic operator formula is provided for position and fock pictures")
    n = cfg.n
    if len(X) != 2 * n or any(len(row) != 2 * n for row in X):
        raise ValueError("matrix dimension does not match the representation")
    if not is_sp_matrix(cfg.omega, X):
        raise ValueError("matrix is not in the symplectic Lie algebra")
    A = _block(X, range(n), range(n))
    B = _block(X, range(n), range(n, 2 * n))
    C = _block(X, range(n, 2 * n), range(n))
    vars = cfg.wave_vars
    op = DiffOperator.zero(vars)
    second = (I / 2) if cfg.kind == "position" else Scalar(Fraction(-1, 2))
    zero_c = Scalar(Fraction(1, 2)) * I if cfg.kind == "position" else Scalar(Fraction(1, 2))
    for j in range(n):
        for k in range(n):
            b = B[j][k]
            if not b.is_zero():
                beta = tuple((1 if t == j else 0) + (1 if t == k else 0) for t in range(n))
                op = op + DiffOperator(vars, {(beta, 1): PolyJet.constant(vars, b * second)})
            a = A[k][j]
            if not a.is_zero():
                beta = tuple(1 if t == k else 0 for t in range(n))
                coeff = PolyJet.coordinate(vars, vars[j]).scale(-a)
                op = op + DiffOperator(vars, {(beta, 0): coeff})
            c = C[j][k]
            if not c.is_zero():
                zeta = tuple((1 if t == j else 0) + (1 if t == k else 0) for t in range(n))
                jet = PolyJet.monomial(vars, zeta, c * zero_c)
                op = op + DiffOperator(vars, {((0,) * n, -1): jet})
    trace = Scalar(0)
    for j in range(n):
        trace = trace + A[j][j]
    if not trace.is_zero():
        op = op + DiffOperator.multiplication(PolyJet.constant(vars, trace * Scalar(Fraction(-1, 2))))
    return op


def apply_operator(op: DiffOperator, psi: PolyWave) -> PolyWave:
    """Apply a DiffOperator over the wave variables to a PolyWave."""
    if op.vars != psi.vars:
        raise ValueError("operator and wave variables differ")
    out = PolyWave(psi.vars, {})
    n = len(psi.vars)
    for (beta, m), a in op.terms.items():
        piece = psi
        for idx in range(n):
            for _ in range(beta[idx]):
                piece = piece.diff(idx)
        if piece.is_zero():
            continue
        for exps, c in a.terms.items():
            lifted_terms = {}
            for (pm, pexps), pc in piece.terms.items():
                key = (pm + m, tuple(e + x for e, x in zip(pexps, exps)))
                val = pc * c
                old = lifted_terms.get(key)
                lifted_terms[key] = val if old is None else old + val
            out = out + PolyWave(psi.vars, lifted_terms)
    return out
