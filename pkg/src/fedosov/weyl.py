"""The fiberwise Weyl algebra with form part.

A :class:`WeylForm` is a sparse sum of monomials

    hbar^h  *  f(x)  *  y^{mu_1}...y^{mu_l}  *  dx^{nu_1}^...^dx^{nu_p}

keyed by ``(h, sym, form)`` where ``sym`` is a sorted multiset of fiber
generator indices (the symmetric part, stored with symmetrization factors
absorbed into the coefficient) and ``form`` a strictly increasing index
tuple (the antisymmetric part).  The coefficient is a :class:`PolyJet` over
the chart coordinates.

The doubled hbar-degree of a key is ``D = 2*h + len(sym)``; every operation
is exact on the quotient by ``D > dcap``.  Honest sections keep ``h >= 0``;
negative powers appear only in adjoint-action generators, which the product
machinery handles transparently.
"""

from __future__ import annotations

from bisect import insort
from math import factorial

from .geometry import ChartGeometry
from .jets import PolyJet
from .scalars import I, ONE, Scalar

WeylKey = tuple[int, tuple[int, ...], tuple[int, ...]]


class GradingError(ArithmeticError):
    """An hbar division that should have been exact was not."""


def charts_compatible(a: ChartGeometry, b: ChartGeometry) -> bool:
    """Same coordinates and symplectic form (truncation views of one chart
    count as the same space)."""
    return a is b or (a.coords == b.coords and a.omega == b.omega)


def doubled_degree(key: WeylKey) -> int:
    h, sym, _form = key
    return 2 * h + len(sym)


def merge_wedge(f1: tuple[int, ...], f2: tuple[int, ...]):
    """Wedge two increasing index tuples: (sign, merged) or None if they meet."""
    if not f1:
        return 1, f2
    if not f2:
        return 1, f1
    if set(f1) & set(f2):
        return None
    inversions = 0
    for x in f1:
        for y in f2:
            if y < x:
                inversions += 1
    merged = tuple(sorted(f1 + f2))
    return (-1 if inversions % 2 else 1), merged


def _multiset_remove(sym: tuple[int, ...], value: int) -> tuple[int, ...]:
    out = list(sym)
    out.remove(value)
    return tuple(out)


def _multiset_insert(sym: tuple[int, ...], value: int) -> tuple[int, ...]:
    out = list(sym)
    insort(out, value)
    return tuple(out)


class WeylForm:
    """Graded element of the Weyl bundle tensor exterior algebra."""

    __slots__ = ("chart", "terms", "dcap")

    def __init__(self, chart: ChartGeometry, terms: dict | None = None, dcap: int | None = None):
        clean: dict[WeylKey, PolyJet] = {}
        if terms:
            for key, jet in terms.items():
                if jet.is_zero():
                    continue
                if dcap is not None and doubled_degree(key) > dcap:
                    continue
                clean[key] = jet
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "dcap", dcap)

    def __setattr__(self, name, value):
        raise AttributeError("WeylForm is immutable")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, chart, dcap=None) -> "WeylForm":
        return cls(chart, {}, dcap)

    @classmethod
    def scalar_section(cls, chart, value, dcap=None) -> "WeylForm":
        """Embed a function (PolyJet or constant) as a 0-form with no fiber part."""
        jet = value if isinstance(value, PolyJet) else chart.constant_jet(value)
        return cls(chart, {(0, (), ()): jet}, dcap)

    @classmethod
    def generator(cls, chart, mu: int, dcap=None) -> "WeylForm":
        """The fiber generator y^mu."""
        return cls(chart, {(0, (mu,), ()): chart.constant_jet(1)}, dcap)

    @classmethod
    def monomial(cls, chart, hpow, sym, form, coeff, dcap=None) -> "WeylForm":
        jet = coeff if isinstance(coeff, PolyJet) else chart.constant_jet(coeff)
        return cls(chart, {(hpow, tuple(sorted(sym)), tuple(form)): jet}, dcap)

    # -- views ------------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def min_doubled_degree(self):
        return min((doubled_degree(k) for k in self.terms), default=None)

    def max_doubled_degree(self):
        return max((doubled_degree(k) for k in self.terms), default=None)

    def min_hpow(self):
        return min((k[0] for k in self.terms), default=None)

    def form_degrees(self):
        return sorted({len(k[2]) for k in self.terms})

    def form_component(self, p: int) -> "WeylForm":
        return WeylForm(self.chart, {k: v for k, v in self.terms.items() if len(k[2]) == p}, self.dcap)

    def sorted_terms(self):
        """Canonical order: (doubled degree, hpow, sym, form)."""
        return sorted(self.terms.items(), key=lambda kv: (doubled_degree(kv[0]),) + kv[0])

    # -- linear structure ----------------------------------------------------------

    def _check_chart(self, other: "WeylForm"):
        if not charts_compatible(self.chart, other.chart):
            raise ValueError("chart mismatch between Weyl forms")

    def __add__(self, other: "WeylForm") -> "WeylForm":
        self._check_chart(other)
        from .jets import min_cap as _mc  # doubled-degree caps share min semantics

        dcap = _mc(self.dcap, other.dcap)
        terms = dict(self.terms)
        for key, jet in other.terms.items():
            acc = terms.get(key)
            merged = jet if acc is None else acc + jet
            if merged.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = merged
        return WeylForm(self.chart, terms, dcap)

    def __neg__(self) -> "WeylForm":
        return WeylForm(self.chart, {k: -v for k, v in self.terms.items()}, self.dcap)

    def __sub__(self, other: "WeylForm") -> "WeylForm":
        return self + (-other)

    def scale(self, factor) -> "WeylForm":
        factor = Scalar.of(factor)
        if factor.is_zero():
            return WeylForm.zero(self.chart, self.dcap)
        return WeylForm(self.chart, {k: v.scale(factor) for k, v in self.terms.items()}, self.dcap)

    def mul_jet(self, jet: PolyJet) -> "WeylForm":
        return WeylForm(self.chart, {k: v * jet for k, v in self.terms.items()}, self.dcap)

    def hbar_shift(self, k: int) -> "WeylForm":
        """Multiply by hbar^k (k may be negative; keys only, no exactness check)."""
        return WeylForm(self.chart, {(h + k, s, f): v for (h, s, f), v in self.terms.items()}, None).with_dcap(
            None if self.dcap is None else self.dcap + 2 * k
        )

    def with_dcap(self, dcap: int | None) -> "WeylForm":
        return WeylForm(self.chart, self.terms, dcap)

    def truncated(self, dmax: int) -> "WeylForm":
        return WeylForm(
            self.chart,
            {k: v for k, v in self.terms.items() if doubled_degree(k) <= dmax},
            self.dcap,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylForm):
            return NotImplemented
        return charts_compatible(self.chart, other.chart) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("WeylForm is not hashable")

    def __str__(self) -> str:
        return "\n".join(format_term(self.chart, k, v) for k, v in self.sorted_terms()) or "0"

    def __repr__(self):
        return f"WeylForm<{len(self.terms)} terms>"


def format_term(chart: ChartGeometry, key: WeylKey, jet: PolyJet) -> str:
    from .exprs import print_canonical

    h, sym, form = key
    bits = [f"hbar^{h}"]
    if sym:
        bits.append("".join(f"y({chart.coords[m]})" for m in sym))
    if form:
        bits.append("^".join(f"dx({chart.coords[m]})" for m in form))
    body = " ".join(bits)
    return f"{body} : {print_canonical(jet)}"


# -- fiber contraction kernel ---------------------------------------------------


def _counts(sym: tuple[int, ...], dim: int) -> tuple[int, ...]:
    row = [0] * dim
    for m in sym:
        row[m] += 1
    return tuple(row)


def _multiset(counts: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for idx, c in enumerate(counts):
        out.extend([idx] * c)
    return tuple(out)


def _fiber_contractions(chart: ChartGeometry, s1, s2):
    """All Moyal-type contractions of two fiber monomials.

    Returns a tuple of (k, merged_sym, scalar) where k powers of hbar are
    produced and scalar already contains (i/2)^k / k! and the omega_inv
    weights.  Cached on the chart.
    """
    cache = chart._contractions
    hit = cache.get((s1, s2))
    if hit is not None:
        return hit
    dim = chart.dim
    states = {(_counts(s1, dim), _counts(s2, dim)): ONE}
    entries = chart.omega_inv_entries
    out = []
    k = 0
    while states:
        halved = (I / 2) ** k / Scalar.of(factorial(k))
        for (v1, v2), c in states.items():
            merged = _multiset(tuple(a + b for a, b in zip(v1, v2)))
            out.append((k, merged, c * halved))
        nxt: dict = {}
        for (v1, v2), c in states.items():
            for mu, nu, w in entries:
                m1 = v1[mu]
                m2 = v2[nu]
                if not m1 or not m2:
                    continue
                n1 = list(v1)
                n1[mu] -= 1
                n2 = list(v2)
                n2[nu] -= 1
                key = (tuple(n1), tuple(n2))
                add = c * (w * (m1 * m2))
                acc = nxt.get(key)
                nxt[key] = add if acc is None else acc + add
        states = {k2: v for k2, v in nxt.items() if not v.is_zero()}
        k += 1
    out = tuple(out)
    cache[(s1, s2)] = out
    return out


def _full_contraction(chart: ChartGeometry, s1, s2) -> Scalar:
    """Scalar of the complete contraction (sym-degree-0 output), or zero."""
    cache = chart._full_contractions
    hit = cache.get((s1, s2))
    if hit is not None:
        return hit
    value = Scalar(0)
    if len(s1) == len(s2):
        for k, merged, c in _fiber_contractions(chart, s1, s2):
            if not merged:
                value = value + c
    cache[(s1, s2)] = value
    return value


# -- the circle product -----------------------------------------------------------


DEFAULT_CAP = object()  # sentinel: "use the operands' minimum dcap"


def weyl_product(a: WeylForm, b: WeylForm, dcap=DEFAULT_CAP) -> WeylForm:
    """The fiberwise Moyal-Weyl product combined with the wedge of forms.

    ``dcap`` defaults to the operands' minimum cap; pass ``None`` explicitly
    for an unbounded product (finite whenever the operands are).
    """
    a._check_chart(b)
    from .jets import min_cap as _mc

    if dcap is DEFAULT_CAP:
        dcap = _mc(a.dcap, b.dcap)
    chart = a.chart
    acc: dict[WeylKey, dict] = {}
    caps: dict[WeylKey, int | None] = {}
    b_items = list(b.terms.items())
    for (h1, s1, f1), P1 in a.terms.items():
        d1 = 2 * h1 + len(s1)
        for (h2, s2, f2), P2 in b_items:
            if dcap is not None and d1 + 2 * h2 + len(s2) > dcap:
                continue
            wedge = merge_wedge(f1, f2)
            if wedge is None:
                continue
            sign, form = wedge
            jet = P1 * P2
            if jet.is_zero():
                continue
            jet_terms = jet.terms
            h12 = h1 + h2
            for k, sym, c in _fiber_contractions(chart, s1, s2):
                key = (h12 + k, sym, form)
                if sign < 0:
                    c = -c
                target = acc.get(key)
                if target is None:
                    target = acc[key] = {}
                    caps[key] = jet.cap
                else:
                    caps[key] = _mc(caps[key], jet.cap)
                for exps, cc in jet_terms.items():
                    val = cc * c
                    old = target.get(exps)
                    target[exps] = val if old is None else old + val
    coords = chart.coords
    out = {key: PolyJet(coords, terms, caps[key]) for key, terms in acc.items()}
    return WeylForm(chart, out, dcap)


def product_symbol(a: WeylForm, b: WeylForm) -> dict[int, PolyJet]:
    """The fully contracted (fiber-degree-0) part of ``a o b`` on 0-forms.

    Returns a map hbar-power -> coefficient jet.  Both inputs must have empty
    form parts; this is the fast path behind the star product.
    """
    from .jets import min_cap as _mc

    a._check_chart(b)
    chart = a.chart
    acc: dict[int, dict] = {}
    caps: dict[int, int | None] = {}
    b_by_len: dict[int, list] = {}
    for (h2, s2, f2), P2 in b.terms.items():
        if f2:
            raise ValueError("product_symbol requires 0-forms")
        b_by_len.setdefault(len(s2), []).append((h2, s2, P2))
    for (h1, s1, f1), P1 in a.terms.items():
        if f1:
            raise ValueError("product_symbol requires 0-forms")
        for h2, s2, P2 in b_by_len.get(len(s1), ()):
            c = _full_contraction(chart, s1, s2)
            if c.is_zero():
                continue
            k = h1 + h2 + len(s1)
            jet = P1 * P2
            if jet.is_zero():
                continue
            target = acc.get(k)
            if target is None:
                target = acc[k] = {}
                caps[k] = jet.cap
            else:
                caps[k] = _mc(caps[k], jet.cap)
            for exps, cc in jet.terms.items():
                val = cc * c
                old = target.get(exps)
                target[exps] = val if old is None else old + val
    coords = chart.coords
    out = {}
    for k, terms in acc.items():
        jet = PolyJet(coords, terms, caps[k])
        if not jet.is_zero():
            out[k] = jet
    return out


def graded_commutator(a: WeylForm, b: WeylForm, dcap=DEFAULT_CAP) -> WeylForm:
    """[a, b] = a o b - (-1)^{pq} b o a, distributed over form degrees."""
    a._check_chart(b)
    from .jets import min_cap as _mc

    if dcap is DEFAULT_CAP:
        dcap = _mc(a.dcap, b.dcap)
    out = WeylForm.zero(a.chart, dcap)
    for p in a.form_degrees():
        ap = a.form_component(p)
        for q in b.form_degrees():
            bq = b.form_component(q)
            left = weyl_product(ap, bq, dcap)
            right = weyl_product(bq, ap, dcap)
            if (p * q) % 2:
                out = out + left + right
            else:
                out = out + left - right
    return out


# -- index-exchange operators -----------------------------------------------------


def delta(a: WeylForm) -> WeylForm:
    """Replace one y^mu by dx^mu (with multiplicity); lowers D by one."""
    acc: dict[WeylKey, PolyJet] = {}
    for (h, sym, form), jet in a.terms.items():
        for mu in set(sym):
            wedge = merge_wedge((mu,), form)
            if wedge is None:
                continue
            sign, nf = wedge
            mult = sym.count(mu) * sign
            key = (h, _multiset_remove(sym, mu), nf)
            piece = jet.scale(mult)
            old = acc.get(key)
            merged = piece if old is None else old + piece
            if merged.is_zero():
                acc.pop(key, None)
            else:
                acc[key] = merged
    return WeylForm(a.chart, acc, a.dcap)


def delta_star(a: WeylForm) -> WeylForm:
    """Replace one dx^mu by y^mu (with graded sign); raises D by one."""
    acc: dict[WeylKey, PolyJet] = {}
    for (h, sym, form), jet in a.terms.items():
        for pos, mu in enumerate(form):
            sign = -1 if pos % 2 else 1
            key = (h, _multiset_insert(sym, mu), form[:pos] + form[pos + 1:])
            piece = jet.scale(sign)
            old = acc.get(key)
            merged = piece if old is None else old + piece
            if merged.is_zero():
                acc.pop(key, None)
            else:
                acc[key] = merged
    return WeylForm(a.chart, acc, a.dcap)


def delta_inv(a: WeylForm) -> WeylForm:
    """delta_star / (l + p) termwise, zero on the l + p = 0 part."""
    from fractions import Fraction

    acc: dict[WeylKey, PolyJet] = {}
    for (h, sym, form), jet in a.terms.items():
        weight = len(sym) + len(form)
        if weight == 0:
            continue
        scaled = jet.scale(Scalar(Fraction(1, weight)))
        for pos, mu in enumerate(form):
            sign = -1 if pos % 2 else 1
            key = (h, _multiset_insert(sym, mu), form[:pos] + form[pos + 1:])
            piece = scaled.scale(sign)
            old = acc.get(key)
            merged = piece if old is None else old + piece
            if merged.is_zero():
                acc.pop(key, None)
            else:
                acc[key] = merged
    return WeylForm(a.chart, acc, a.dcap)


# -- projections --------------------------------------------------------------------


def project_hbar(a: WeylForm, d: int) -> WeylForm:
    """Homogeneous component of doubled hbar-degree d."""
    return WeylForm(a.chart, {k: v for k, v in a.terms.items() if doubled_degree(k) == d}, a.dcap)


def project_sym(a: WeylForm, k: int) -> WeylForm:
    """Homogeneous component of fiber (symmetric) degree k."""
    return WeylForm(a.chart, {key: v for key, v in a.terms.items() if len(key[1]) == k}, a.dcap)


def symbol_part(a: WeylForm) -> WeylForm:
    """The fiber-degree-0 part (all hbar powers, forms kept)."""
    return project_sym(a, 0)


def function_part(a: WeylForm) -> WeylForm:
    """The part with no fiber and no form factors (any hbar power)."""
    return WeylForm(
        a.chart,
        {key: v for key, v in a.terms.items() if not key[1] and not key[2]},
        a.dcap,
    )


def symbol_jet(a: WeylForm) -> dict[int, PolyJet]:
    """Fiber-degree-0, form-degree-0 terms as a map hbar-power -> jet."""
    out = {}
    for (h, sym, form), jet in a.terms.items():
        if not sym and not form:
            out[h] = jet
    return out


# -- hbar division and adjoint action -------------------------------------------------


def hbar_quotient(a: WeylForm, scale: Scalar = I) -> WeylForm:
    """Multiply by ``scale`` and divide by one power of hbar, exactly.

    Raises :class:`GradingError` if any term has no hbar power to give (that
    signals a grading bug in the caller).
    """
    terms = {}
    for (h, sym, form), jet in a.terms.items():
        if h - 1 < 0:
            raise GradingError("inexact hbar division in adjoint action")
        terms[(h - 1, sym, form)] = jet.scale(scale)
    dcap = None if a.dcap is None else a.dcap - 2
    return WeylForm(a.chart, terms, dcap)


def adjoint_action(gen: WeylForm, a: WeylForm, dcap=DEFAULT_CAP) -> WeylForm:
    """(i/hbar) [gen, a]: the graded commutator with one exact hbar removed."""
    from .jets import min_cap as _mc

    if dcap is DEFAULT_CAP:
        dcap = _mc(gen.dcap, a.dcap)
    head = None if dcap is None else dcap + 2
    commutator = graded_commutator(gen, a, head)
    return hbar_quotient(commutator).with_dcap(dcap)


# -- gradings ------------------------------------------------------------------------


def q_degree_of_key(key: WeylKey, p_indices: frozenset[int]) -> int:
    """(#y in q-block - #y in p-block) + (#dx in q-block - #dx in p-block)."""
    _h, sym, form = key
    deg = 0
    for mu in sym:
        deg += -1 if mu in p_indices else 1
    for mu in form:
        deg += -1 if mu in p_indices else 1
    return deg


class GradingReport:
    """Monomial listing bucketed by doubled hbar-degree."""

    def __init__(self, by_doubled_degree: dict[int, list[str]], q_degree_min: int | None):
        self.by_doubled_degree = by_doubled_degree
        self.q_degree_min = q_degree_min


def grading_report(a: WeylForm, p_indices=None) -> GradingReport:
    buckets: dict[int, list[str]] = {}
    for key, jet in a.sorted_terms():
        buckets.setdefault(doubled_degree(key), []).append(format_term(a.chart, key, jet))
    qmin = None
    if p_indices is not None:
        pset = frozenset(p_indices)
        qmin = min((q_degree_of_key(k, pset) for k in a.terms), default=None)
    return GradingReport(buckets, qmin)
