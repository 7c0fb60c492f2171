"""Flat Weyl-bundle connections and the star product.

Builds, for a chart with symplectic connection, the unique curvature
correction 1-form ``r`` normalized by ``delta_inv(r) = 0``, lifts functions
to flat sections of the Weyl bundle, and reads off star products as the
fiber-scalar part of products of flat sections.

All recursions run modulo doubled hbar-degree ``> dcap`` and are exact on
the retained grades.
"""

from __future__ import annotations

from fractions import Fraction

from .geometry import ChartGeometry, is_sp_matrix
from .jets import PolyJet, min_cap
from .scalars import I, Scalar
from .weyl import (
    WeylForm,
    adjoint_action,
    delta,
    delta_inv,
    doubled_degree,
    hbar_quotient,
    merge_wedge,
    product_symbol,
    project_hbar,
    weyl_product,
)


def metaplectic_generator(chart: ChartGeometry, A, dcap: int | None = None) -> WeylForm:
    """Quadratic fiber element -(i/2 hbar) omega_{ij} A^j_k y^i y^k for A in sp.

    Stored with hbar power -1; it generates the linear symplectic action via
    the graded commutator.
    """
    dim = chart.dim
    if len(A) != dim or any(len(row) != dim for row in A):
        raise ValueError("matrix dimension does not match the chart")
    if not is_sp_matrix(chart.omega, A):
        raise ValueError("matrix is not in the symplectic Lie algebra")
    acc: dict = {}
    for i in range(dim):
        for k in range(dim):
            c = Scalar(0)
            for l in range(dim):
                w = chart.omega[i][l]
                if not w.is_zero():
                    c = c + w * Scalar.of(A[l][k])
            if c.is_zero():
                continue
            key = (-1, tuple(sorted((i, k))), ())
            value = c * (-(I / 2))
            jet = chart.constant_jet(value)
            old = acc.get(key)
            acc[key] = jet if old is None else old + jet
    return WeylForm(chart, acc, dcap)


def covariant_derivative(a: WeylForm) -> WeylForm:
    """Exterior covariant derivative: d on coefficients plus the connection
    action on fiber indices.  Preserves the doubled hbar-degree."""
    chart = a.chart
    acc: dict = {}

    def put(key, piece):
        if piece.is_zero():
            return
        old = acc.get(key)
        merged = piece if old is None else old + piece
        if merged.is_zero():
            acc.pop(key, None)
        else:
            acc[key] = merged

    for (h, sym, form), jet in a.terms.items():
        for mu in range(chart.dim):
            djet = jet.diff(mu)
            if djet.is_zero():
                continue
            wedge = merge_wedge((mu,), form)
            if wedge is None:
                continue
            sign, nf = wedge
            put((h, sym, nf), djet if sign > 0 else -djet)
        for mu in set(sym):
            mult = sym.count(mu)
            stripped = list(sym)
            stripped.remove(mu)
            for (aa, bb, gamma_jet) in chart.gamma_raised_entries(mu):
                # nabla y^mu = -Gamma^mu_{ab} y^a dx^b; both index orders appear.
                wedge = merge_wedge((bb,), form)
                if wedge is None:
                    continue
                sign, nf = wedge
                new_sym = tuple(sorted(stripped + [aa]))
                piece = (jet * gamma_jet).scale(-mult * sign)
                put((h, new_sym, nf), piece)
    return WeylForm(chart, acc, a.dcap)


def weyl_curvature(chart: ChartGeometry, dcap: int | None = None) -> WeylForm:
    """The curvature 2-form -(1/4) R_{ijkl} y^i y^j dx^k ^ dx^l."""
    table = chart.curvature()
    acc: dict = {}
    quarter = Scalar(Fraction(-1, 4))
    for (i, j, k, l), jet in table.lowered_entries():
        wedge = merge_wedge((k,), (l,))
        if wedge is None:
            continue
        sign, form = wedge
        key = (0, tuple(sorted((i, j))), form)
        piece = jet.scale(quarter * sign)
        old = acc.get(key)
        merged = piece if old is None else old + piece
        if merged.is_zero():
            acc.pop(key, None)
        else:
            acc[key] = merged
    return WeylForm(chart, acc, dcap)


def _components(a: WeylForm) -> dict[int, WeylForm]:
    """Split into homogeneous doubled-degree components."""
    buckets: dict[int, dict] = {}
    for key, jet in a.terms.items():
        buckets.setdefault(doubled_degree(key), {})[key] = jet
    return {d: WeylForm(a.chart, terms, a.dcap) for d, terms in buckets.items()}


class FedosovConnection:
    """Chart, doubled-degree cap, curvature form, and the correction 1-form.

    The recursion data (``correction``, ``curvature_form``, flat sections)
    lives on the exact view of the chart, so the defining identities hold
    identically; ``chart`` keeps the caller's capped chart.
    """

    def __init__(self, chart: ChartGeometry, dcap: int, correction: WeylForm, curvature_form: WeylForm):
        self.chart = chart
        self.algebra_chart = correction.chart
        self.dcap = dcap
        self.correction = correction
        self.curvature_form = curvature_form
        self.correction_levels = _components(correction)
        self._section_cache: dict = {}
        self._monomial_levels: dict = {}

    def __repr__(self):
        return f"FedosovConnection(dim={self.chart.dim}, dcap={self.dcap})"


def flat_connection(chart: ChartGeometry, dcap: int) -> FedosovConnection:
    """Solve delta(r) = R + nabla(r) + (i/hbar) r^2 with delta_inv(r) = 0.

    The correction is built one doubled degree past ``dcap``: the flatness
    equation at degree D involves r at degree D+1 through delta, so the extra
    level is what makes the residual vanish on every retained grade <= dcap.

    The recursion is strictly graded -- level D of the fixed point depends
    only on levels below D -- so each level is computed exactly once.
    """
    if dcap < 3:
        raise ValueError("dcap must be at least 3 for the connection recursion")
    caller_chart = chart
    chart = chart.exact_chart()
    rcap = dcap + 1
    rhat = weyl_curvature(chart, rcap)
    levels: dict[int, WeylForm] = {}
    zero = WeylForm.zero(chart, rcap)
    for d in range(3, rcap + 1):
        # accumulate the full right-hand side at level d-1 BEFORE applying
        # delta_inv: this keeps each level an exact delta_inv image, so the
        # normalization delta_inv(r) = 0 holds identically even on charts
        # whose truncated jets prune data when sums are merged
        rhs = project_hbar(rhat, d - 1)
        prev = levels.get(d - 1)
        if prev is not None:
            rhs = rhs + covariant_derivative(prev)
        # (i/hbar) r^2 at level d-1 pairs components with D1 + D2 = d + 1.
        # The hbar-free parts only cancel across the summed pairs, so divide
        # after accumulating all of them.
        quad_sum = None
        for d1 in range(3, d - 1):
            d2 = d + 1 - d1
            if d2 < 3:
                break
            a = levels.get(d1)
            b = levels.get(d2)
            if a is None or b is None:
                continue
            piece = weyl_product(a, b, None)
            quad_sum = piece if quad_sum is None else quad_sum + piece
        if quad_sum is not None and not quad_sum.is_zero():
            rhs = rhs + hbar_quotient(quad_sum)
        # A homogeneous level-d component is complete at any cap >= d.
        level = project_hbar(delta_inv(rhs), d).with_dcap(rcap)
        if not level.is_zero():
            levels[d] = level
    r = zero
    for level in levels.values():
        r = r + level
    r = r.with_dcap(rcap)
    if not delta_inv(r).is_zero():
        raise AssertionError("normalization delta_inv(r) = 0 violated")
    return FedosovConnection(caller_chart, dcap, r, rhat)


def flatness_residual(conn: FedosovConnection) -> WeylForm:
    """delta(r) - R - nabla(r) - (i/hbar) r^2, truncated at dcap."""
    r = conn.correction
    rcap = conn.dcap + 1
    quad = hbar_quotient(weyl_product(r, r, rcap + 2)).with_dcap(rcap)
    return (delta(r) - conn.curvature_form - covariant_derivative(r) - quad).truncated(conn.dcap)


class FlatSection:
    """A function together with its flat lift through the Weyl bundle."""

    def __init__(self, source: PolyJet, lifted: WeylForm, dcap: int):
        self.source = source
        self.lifted = lifted
        self.dcap = dcap


def _section_levels(conn: FedosovConnection, f: PolyJet) -> dict[int, WeylForm]:
    """Level-by-level flat lift of ``f``: the recursion raises the doubled
    degree strictly, so level d needs only levels below d (and correction
    levels up to d+1)."""
    chart = conn.algebra_chart
    dcap = conn.dcap
    zero = WeylForm.zero(chart, dcap)
    levels: dict[int, WeylForm] = {0: WeylForm.scalar_section(chart, f, dcap)}
    for d in range(1, dcap + 1):
        rhs = zero
        prev = levels.get(d - 1)
        if prev is not None:
            rhs = rhs + covariant_derivative(prev)
        for dr, r_level in conn.correction_levels.items():
            df = d + 1 - dr
            if df < 1:  # scalars are central, so the df = 0 bracket vanishes
                continue
            part = levels.get(df)
            if part is None:
                continue
            rhs = rhs + adjoint_action(r_level, part, None)
        level = project_hbar(delta_inv(rhs), d).with_dcap(dcap)
        if not level.is_zero():
            levels[d] = level
    return levels


def flat_section(conn: FedosovConnection, f: PolyJet) -> FlatSection:
    """The unique flat section whose fiber-scalar part is ``f`` (mod dcap).

    The lift is linear in ``f``, so it is assembled from cached per-monomial
    lifts.  The stored terms of ``f`` are lifted exactly; a cap on ``f`` is
    the caller's record of what the stored data represents, while the caps
    of the lifted coefficients track the chart's own truncation.
    """
    if f.vars != conn.chart.coords:
        raise ValueError("function is not a jet over the chart coordinates")
    cache_key = f.key()
    hit = conn._section_cache.get(cache_key)
    if hit is not None:
        return hit
    chart = conn.algebra_chart
    dcap = conn.dcap
    combined: dict[int, WeylForm] = {}
    for exps, coeff in f.terms.items():
        mono_levels = conn._monomial_levels.get(exps)
        if mono_levels is None:
            mono = PolyJet.monomial(chart.coords, exps)
            mono_levels = _section_levels(conn, mono)
            conn._monomial_levels[exps] = mono_levels
        for d, level in mono_levels.items():
            piece = level.scale(coeff)
            old = combined.get(d)
            combined[d] = piece if old is None else old + piece
    lifted = WeylForm.zero(chart, dcap)
    for level in combined.values():
        lifted = lifted + level
    section = FlatSection(f, lifted.with_dcap(dcap), dcap)
    conn._section_cache[cache_key] = section
    return section


def flat_section_residual(conn: FedosovConnection, section: FlatSection) -> WeylForm:
    """nabla(s) - delta(s) + (i/hbar)[r, s]; zero through doubled degree dcap-1."""
    s = section.lifted
    bracket = adjoint_action(conn.correction, s, conn.dcap)
    return (covariant_derivative(s) - delta(s) + bracket).truncated(conn.dcap - 1)


class StarExpansion:
    """Coefficients c_k of f * g = sum_k hbar^k c_k, with a trust bound.

    Orders with 2k <= dcap are guaranteed; nothing beyond is stored, so a
    caller can never silently read an untrusted order.
    """

    def __init__(self, vars: tuple[str, ...], coefficients: dict[int, PolyJet], max_trusted_order: int):
        self.vars = vars
        self.max_trusted_order = max_trusted_order
        self.coefficients = {
            k: jet for k, jet in coefficients.items() if k <= max_trusted_order and not jet.is_zero()
        }

    def coefficient(self, k: int) -> PolyJet:
        if k > self.max_trusted_order:
            raise ValueError(
                f"order {k} exceeds the trusted bound {self.max_trusted_order}; rebuild with a larger dcap"
            )
        jet = self.coefficients.get(k)
        if jet is None:
            return PolyJet.zero(self.vars)
        return jet

    def as_pairs(self):
        return sorted(self.coefficients.items())


def star_product(conn: FedosovConnection, f: PolyJet, g: PolyJet) -> StarExpansion:
    """f * g as the fiber-scalar part of the product of the flat lifts."""
    fh = flat_section(conn, f).lifted
    gh = flat_section(conn, g).lifted
    coeffs = product_symbol(fh, gh)
    return StarExpansion(conn.chart.coords, coeffs, conn.dcap // 2)


def connection_one_form(conn: FedosovConnection) -> WeylForm:
    """The full connection 1-form, an hbar^-1 generator:

    (i/hbar) omega_{mu nu} y^nu dx^mu + dU-type quadratic part + (i/hbar) r.
    """
    chart = conn.algebra_chart
    acc: dict = {}
    for mu in range(chart.dim):
        for nu in range(chart.dim):
            w = chart.omega[mu][nu]
            if w.is_zero():
                continue
            key = (-1, (nu,), (mu,))
            jet = chart.constant_jet(w * I)
            old = acc.get(key)
            acc[key] = jet if old is None else old + jet
    # quadratic part: -(i/2 hbar) Gamma_{mu nu kappa} y^mu y^nu dx^kappa, all orderings
    half_i = -(I / 2)
    for mu in range(chart.dim):
        for nu in range(chart.dim):
            for kappa in range(chart.dim):
                jet = chart.gamma_lowered(mu, nu, kappa)
                if jet.is_zero():
                    continue
                key = (-1, tuple(sorted((mu, nu))), (kappa,))
                piece = jet.scale(half_i)
                old = acc.get(key)
                merged = piece if old is None else old + piece
                if merged.is_zero():
                    acc.pop(key, None)
                else:
                    acc[key] = merged
    r_part = conn.correction.scale(I).hbar_shift(-1)
    terms = dict(acc)
    for key, jet in r_part.terms.items():
        old = terms.get(key)
        merged = jet if old is None else old + jet
        if merged.is_zero():
            terms.pop(key, None)
        else:
            terms[key] = merged
    return WeylForm(chart, terms, None)
