"""Cotangent-bundle charts: lifted connections and quantum operators.

From a (semi-)Riemannian base metric this module builds the canonical
symplectic connection on the phase-space chart (coordinates ``q`` then
``p``), verifies its compatibility with the vertical polarization, and runs
the operator recursion that turns phase-space polynomials into differential
operators on the base.

The operator recursion splits a momentum monomial ``h = h^j p_j`` and uses

    sigma(h) = sigma(h^j) sigma(p_j) - sum_k hbar^k sigma(c_k(h^j, p_j)),

with the star coefficients computed on the lifted chart; the base cases are
multiplication by functions of q and ``sigma(p_j) = -i hbar d/dq^j`` in the
coordinate half-density trivialization.
"""

from __future__ import annotations

import itertools

from .diffop import DiffOperator
from .geometry import ChartGeometry, matrix_inverse
from .jets import PolyJet, min_cap
from .metaplectic import PolyWave, RepConfig, fiber_monomial_action
from .quantization import FedosovConnection, connection_one_form, flat_connection, star_product
from .scalars import I, ONE, Scalar, ZERO
from .weyl import WeylForm, doubled_degree, q_degree_of_key


# -- base geometry -------------------------------------------------------------


class BaseMetric:
    """Metric jet on the base manifold with derived Levi-Civita data.

    ``g`` is a symmetric matrix of PolyJets over the base coordinates; its
    inverse, the Christoffel symbols, curvature, Ricci and scalar curvature
    are computed once, all truncated consistently with ``jet_order``
    (``None`` for exact polynomial metrics whose inverse terminates).
    """

    def __init__(self, coords, g, jet_order: int | None):
        self.coords = tuple(coords)
        self.dim = len(self.coords)
        self.jet_order = jet_order
        n = self.dim
        self.g = tuple(
            tuple(entry.with_cap(min_cap(entry.cap, jet_order)) for entry in row) for row in g
        )
        for i in range(n):
            for j in range(n):
                if self.g[i][j] != self.g[j][i]:
                    raise ValueError("metric must be symmetric")
        self.g_inv = self._invert_metric()
        self.christoffel = self._christoffel()
        self.curvature = self._curvature()
        self.ricci = self._ricci()
        self.scalar_curvature = self._scalar()

    # metric inverse by Neumann series around the constant part
    def _invert_metric(self):
        n = self.dim
        order = self.jet_order
        const = tuple(tuple(self.g[i][j].constant_term() for j in range(n)) for i in range(n))
        b0 = matrix_inverse(const)
        if order is None:
            # exact polynomial metric: the series must terminate
            nil = [[self.g[i][j] - PolyJet.constant(self.coords, const[i][j]) for j in range(n)]
                   for i in range(n)]
            if all(entry.is_zero() for row in nil for entry in row):
                return tuple(tuple(PolyJet.constant(self.coords, b0[i][j]) for j in range(n))
                             for i in range(n))
            raise ValueError("non-constant metric requires a finite jet_order")
        zero = PolyJet.zero(self.coords, order)
        b0_jets = [[PolyJet.constant(self.coords, b0[i][j], order) for j in range(n)] for i in range(n)]
        nil = [[(self.g[i][j] - PolyJet.constant(self.coords, const[i][j], order)) for j in range(n)]
               for i in range(n)]
        term = b0_jets
        total = [row[:] for row in b0_jets]
        for _ in range(order):
            # term <- -B0 * N * term
            mid = [[zero for _ in range(n)] for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    acc = zero
                    for k in range(n):
                        if not nil[i][k].is_zero():
                            acc = acc + nil[i][k] * term[k][j]
                    mid[i][j] = acc
            nxt = [[zero for _ in range(n)] for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    acc = zero
                    for k in range(n):
                        acc = acc + b0_jets[i][k] * mid[k][j]
                    nxt[i][j] = -acc
            term = nxt
            if all(entry.is_zero() for row in term for entry in row):
                break
            for i in range(n):
                for j in range(n):
                    total[i][j] = total[i][j] + term[i][j]
        return tuple(tuple(row[j] for j in range(n)) for i, row in enumerate(total))

    def _christoffel(self):
        """Gamma^k_{ij}, cap one below the metric order."""
        n = self.dim
        half = Scalar.of(1) / 2
        out = {}
        for k in range(n):
            for i in range(n):
                for j in range(i, n):
                    acc = None
                    for l in range(n):
                        piece = self.g[l][j].diff(i) + self.g[l][i].diff(j) - self.g[i][j].diff(l)
                        if piece.is_zero():
                            continue
                        piece = self.g_inv[k][l] * piece
                        acc = piece if acc is None else acc + piece
                    if acc is not None:
                        acc = acc.scale(half)
                        if not acc.is_zero():
                            out[(k, i, j)] = acc
                            if i != j:
                                out[(k, j, i)] = acc
        return out

    def gamma(self, k, i, j) -> PolyJet:
        return self.christoffel.get((k, i, j), PolyJet.zero(self.coords, self.jet_order))

    def _curvature(self):
        """R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}."""
        n = self.dim
        out = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(k + 1, n):
                        acc = self.gamma(i, l, j).diff(k) - self.gamma(i, k, j).diff(l)
                        for m in range(n):
                            t1 = self.gamma(i, k, m)
                            if not t1.is_zero():
                                t2 = self.gamma(m, l, j)
                                if not t2.is_zero():
                                    acc = acc + t1 * t2
                            t3 = self.gamma(i, l, m)
                            if not t3.is_zero():
                                t4 = self.gamma(m, k, j)
                                if not t4.is_zero():
                                    acc = acc - t3 * t4
                        if not acc.is_zero():
                            out[(i, j, k, l)] = acc
                            out[(i, j, l, k)] = -acc
        return out

    def riemann(self, i, j, k, l) -> PolyJet:
        return self.curvature.get((i, j, k, l), PolyJet.zero(self.coords, self.jet_order))

    def _ricci(self):
        n = self.dim
        out = {}
        for j in range(n):
            for l in range(n):
                acc = None
                for k in range(n):
                    piece = self.curvature.get((k, j, k, l))
                    if piece is None:
                        continue
                    acc = piece if acc is None else acc + piece
                if acc is not None and not acc.is_zero():
                    out[(j, l)] = acc
        return out

    def _scalar(self) -> PolyJet:
        n = self.dim
        acc = PolyJet.zero(self.coords, None if self.jet_order is None else self.jet_order - 2)
        for (j, l), ric in self.ricci.items():
            acc = acc + self.g_inv[j][l] * ric
        return acc

    def riemann_cov_deriv(self, m, a, j, l, k) -> PolyJet:
        """nabla_m R^a_{jlk} on the base (mixed 1-3 tensor)."""
        acc = self.riemann(a, j, l, k).diff(m)
        n = self.dim
        for s in range(n):
            g1 = self.gamma(a, m, s)
            if not g1.is_zero():
                r = self.riemann(s, j, l, k)
                if not r.is_zero():
                    acc = acc + g1 * r
            for slot, idx in ((1, j), (2, l), (3, k)):
                g2 = self.gamma(s, m, idx)
                if g2.is_zero():
                    continue
                args = [a, j, l, k]
                args[slot] = s
                r = self.riemann(*args)
                if not r.is_zero():
                    acc = acc - g2 * r
        return acc


def metric_from_json_dict(data: dict) -> BaseMetric:
    from .exprs import parse_poly

    try:
        coords = tuple(data["coords"])
        dim = int(data["dim"])
        g_rows = data["g"]
    except KeyError as missing:
        raise ValueError(f"metric file is missing required key {missing}") from None
    if len(coords) != dim:
        raise ValueError("metric 'coords' length does not match 'dim'")
    jet_order = data.get("jet_order")
    g = tuple(
        tuple(parse_poly(str(entry), coords, jet_order) for entry in row) for row in g_rows
    )
    if len(g) != dim or any(len(row) != dim for row in g):
        raise ValueError("metric matrix shape does not match 'dim'")
    return BaseMetric(coords, g, jet_order)


def load_metric(path: str) -> BaseMetric:
    import json

    with open(path, "r", encoding="utf-8") as handle:
        return metric_from_json_dict(json.load(handle))


# -- the lifted connection -------------------------------------------------------


def lift_connection(base: BaseMetric) -> ChartGeometry:
    """Phase-space chart carrying the canonical lift of the Levi-Civita
    connection: coordinates (q..., p...), standard symplectic form, lowered
    coefficients

        Gamma_{i j pbar(k)} = G^k_{ij}            (functions of q),
        Gamma_{i j k} = -(p_a / 3) * sum_cyc (2 G^a_{jl} G^l_{ki} - d_j G^a_{ki}),

    every component with two or more momentum indices vanishing.
    """
    n = base.dim
    coords = base.coords + tuple(f"p{j + 1}" for j in range(n))
    if len(set(coords)) != 2 * n:
        coords = base.coords + tuple(f"p_{name}" for name in base.coords)
    xcap = None if base.jet_order is None else base.jet_order - 1
    gamma: dict[tuple[int, int, int], PolyJet] = {}

    def embed(jet: PolyJet) -> PolyJet:
        return jet.embed(coords)

    for (k, i, j), jet in base.christoffel.items():
        if i > j:
            continue
        key = tuple(sorted((i, j, n + k)))
        value = embed(jet)
        if key in gamma:
            if gamma[key] != value:
                raise AssertionError("inconsistent lift assembly")
        else:
            gamma[key] = value

    def cyclic_term(i, j, k) -> PolyJet:
        # 2 G^a_{jl} G^l_{ki} - d_j G^a_{ki}, contracted with p_a, one cyclic slot
        acc = PolyJet.zero(coords, None if xcap is None else xcap - 1)
        for a in range(n):
            p_a = PolyJet.coordinate(coords, coords[n + a])
            inner = PolyJet.zero(base.coords, None if base.jet_order is None else base.jet_order - 2)
            for l in range(n):
                g1 = base.gamma(a, j, l)
                if not g1.is_zero():
                    g2 = base.gamma(l, k, i)
                    if not g2.is_zero():
                        inner = inner + (g1 * g2).scale(2)
            inner = inner - base.gamma(a, k, i).diff(j)
            if inner.is_zero():
                continue
            acc = acc + p_a * embed(inner)
        return acc

    third = Scalar.of(1) / 3
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                total = cyclic_term(i, j, k) + cyclic_term(j, k, i) + cyclic_term(k, i, j)
                if total.is_zero():
                    continue
                # lowered all-q component carries the opposite sign of the
                # p-indexed upper component
                jet = total.scale(-third)
                if xcap is not None:
                    jet = jet.with_cap(xcap)
                gamma[(i, j, k)] = jet

    return ChartGeometry(coords, omega=None, gamma=gamma, xcap=xcap)


# -- Q-degree -----------------------------------------------------------------------


def p_block(chart: ChartGeometry):
    """Index set of the momentum half of a (q..., p...) chart."""
    n = chart.dim // 2
    return frozenset(range(n, 2 * n))


def q_degree(a: WeylForm, p_indices=None):
    """Minimum Q-degree over the monomials of ``a``; None for zero."""
    if p_indices is None:
        p_indices = p_block(a.chart)
    pset = frozenset(p_indices)
    return min((q_degree_of_key(key, pset) for key in a.terms), default=None)


def q_degree_terms(a: WeylForm, p_indices=None):
    """Map key -> Q-degree for every stored monomial."""
    if p_indices is None:
        p_indices = p_block(a.chart)
    pset = frozenset(p_indices)
    return {key: q_degree_of_key(key, pset) for key in a.terms}


# -- compatibility -------------------------------------------------------------------


class CompatibilityReport:
    """Outcome of the polarization/connection checks on one chart."""

    def __init__(self, order2, order3, bressler_nabla, bressler_curvature, annihilator, details):
        self.order2 = order2
        self.order3 = order3
        self.bressler_nabla = bressler_nabla
        self.bressler_curvature = bressler_curvature
        self.annihilator = annihilator
        self.details = details

    @property
    def passed(self) -> bool:
        return (
            self.order2
            and self.order3
            and self.bressler_nabla
            and self.bressler_curvature
            and self.annihilator
        )

    def lines(self):
        yield f"order-2 (Gamma with two momentum indices vanishes): {'pass' if self.order2 else 'FAIL'}"
        yield f"order-3 (symmetrized curvature with momentum form index): {'pass' if self.order3 else 'FAIL'}"
        yield f"vertical sub-bundle preserved by the connection: {'pass' if self.bressler_nabla else 'FAIL'}"
        yield f"curvature vanishes on three vertical arguments: {'pass' if self.bressler_curvature else 'FAIL'}"
        yield f"connection form annihilates the vacuum (momentum picture): {'pass' if self.annihilator else 'FAIL'}"
        for line in self.details:
            yield "  " + line


def check_compatibility(
    chart: ChartGeometry,
    p_indices=None,
    dcap: int = 6,
    conn: FedosovConnection | None = None,
) -> CompatibilityReport:
    if p_indices is None:
        p_indices = p_block(chart)
    pset = sorted(p_indices)
    qset = [i for i in range(chart.dim) if i not in p_indices]
    details: list[str] = []

    # (a) order 2: lowered Gamma with >= 2 momentum indices
    order2 = True
    for kbar in pset:
        for lbar in pset:
            for mu in range(chart.dim):
                jet = chart.gamma_lowered(kbar, lbar, mu)
                if not jet.is_zero():
                    order2 = False
                    details.append(f"Gamma[{kbar},{lbar},{mu}] nonzero")

    # (b) order 3: symmetrized R_{(abc) kbar} with >= 2 of a,b,c vertical
    table = chart.curvature()
    order3 = True
    for kbar in pset:
        for a in range(chart.dim):
            for b in range(chart.dim):
                for c in range(chart.dim):
                    vertical = sum(1 for x in (a, b, c) if x in p_indices)
                    if vertical < 2:
                        continue
                    acc = None
                    for (x, y, z) in set(itertools.permutations((a, b, c))):
                        piece = table.lowered(x, y, z, kbar)
                        if piece.is_zero():
                            continue
                        acc = piece if acc is None else acc + piece
                    if acc is not None and not acc.is_zero():
                        order3 = False
                        details.append(f"sym curvature ({a},{b},{c};{kbar}) nonzero")

    # (c) vertical fields stay vertical: raised Gamma^(q)_{mu, pbar} = 0,
    #     and R(X,Y)Z = 0 for three vertical arguments
    bressler_nabla = True
    for qi in qset:
        for mu in range(chart.dim):
            for kbar in pset:
                if not chart.gamma_raised(qi, mu, kbar).is_zero():
                    bressler_nabla = False
                    details.append(f"raised Gamma[{qi};{mu},{kbar}] nonzero")
    bressler_curvature = True
    for mu in range(chart.dim):
        for zbar in pset:
            for xbar in pset:
                for ybar in pset:
                    if not table.lowered(mu, zbar, xbar, ybar).is_zero():
                        bressler_curvature = False
                        details.append(f"R[{mu},{zbar},{xbar},{ybar}] nonzero")

    # (d) the connection 1-form contracted with vertical directions kills the
    #     constant wave function in the momentum picture, grade by grade
    if conn is None:
        conn = flat_connection(chart, dcap)
    one_form = connection_one_form(conn)
    n = chart.dim // 2
    cfg = RepConfig("momentum", n)
    psi = PolyWave.unit(cfg.wave_vars)
    annihilator = True
    for kbar in pset:
        by_degree: dict[int, dict] = {}
        for (h, sym, form), jet in one_form.terms.items():
            if form != (kbar,):
                continue
            by_degree.setdefault(2 * h + len(sym), {})[(h, sym)] = jet
        for d in sorted(by_degree):
            total: dict[tuple[int, tuple[int, ...], tuple[int, ...]], Scalar] = {}
            for (h, sym), jet in by_degree[d].items():
                wave = fiber_monomial_action(cfg, sym, psi)
                if wave.is_zero():
                    continue
                for (m, wexps), c in wave.terms.items():
                    for jexps, jc in jet.terms.items():
                        key = (m + h, jexps, wexps)
                        val = c * jc
                        old = total.get(key)
                        merged = val if old is None else old + val
                        if merged.is_zero():
                            total.pop(key, None)
                        else:
                            total[key] = merged
            if total:
                annihilator = False
                details.append(f"vacuum not annihilated at grade {d} (direction {kbar})")

    return CompatibilityReport(order2, order3, bressler_nabla, bressler_curvature, annihilator, details)


# -- the operator recursion ------------------------------------------------------------


class CotangentQuantizer:
    """Operator recursion on a lifted chart, with per-monomial caching.

    ``split`` picks which momentum factor is peeled off a monomial ("low" or
    "high" index); the result must not depend on it.
    """

    def __init__(self, base: BaseMetric, dcap: int, split: str = "low"):
        if split not in ("low", "high"):
            raise ValueError("split must be 'low' or 'high'")
        self.base = base
        self.dcap = dcap
        self.split = split
        self.chart = lift_connection(base)
        self.connection = flat_connection(self.chart, dcap)
        self._mono_cache: dict[tuple[int, ...], DiffOperator] = {}

    # p-degree of an exponent tuple over the lifted coordinates
    def _p_degree(self, exps) -> int:
        n = self.base.dim
        return sum(exps[n:])

    def p_operator(self, j: int) -> DiffOperator:
        return DiffOperator.derivative(self.base.coords, j, hbar_power=1, coeff=-I)

    def operator(self, f: PolyJet) -> DiffOperator:
        """sigma(f) for a polynomial in p with q-jet coefficients."""
        if f.vars != self.chart.coords:
            raise ValueError("function must be a jet over the lifted chart coordinates")
        max_p = max((self._p_degree(e) for e in f.terms), default=0)
        if 2 * max_p > self.dcap:
            raise ValueError(
                f"p-degree {max_p} requires dcap >= {2 * max_p}; this quantizer has dcap={self.dcap}"
            )
        out = DiffOperator.zero(self.base.coords)
        for exps, coeff in f.terms.items():
            mono = self._monomial_operator(exps)
            piece = mono.scale(coeff)
            if f.cap is not None:
                piece = DiffOperator(
                    piece.vars,
                    {key: jet.with_cap(min_cap(jet.cap, f.cap)) for key, jet in piece.terms.items()},
                )
            out = out + piece
        return out

    def _monomial_operator(self, exps: tuple[int, ...]) -> DiffOperator:
        cached = self._mono_cache.get(exps)
        if cached is not None:
            return cached
        n = self.base.dim
        if self._p_degree(exps) == 0:
            jet = PolyJet.monomial(self.chart.coords, exps).restrict(self.base.coords)
            op = DiffOperator.multiplication(jet)
        else:
            p_positions = [idx for idx in range(n, 2 * n) if exps[idx]]
            pos = p_positions[0] if self.split == "low" else p_positions[-1]
            j = pos - n
            rest = list(exps)
            rest[pos] -= 1
            rest_exps = tuple(rest)
            h_j = PolyJet.monomial(self.chart.coords, rest_exps)
            p_j = PolyJet.coordinate(self.chart.coords, self.chart.coords[pos])
            op = self._monomial_operator(rest_exps).compose(self.p_operator(j))
            expansion = star_product(self.connection, h_j, p_j)
            for k, c_k in expansion.as_pairs():
                if k == 0:
                    continue
                if self._p_degree_jet(c_k) >= self._p_degree(exps):
                    raise AssertionError("star coefficient failed to lower the momentum degree")
                op = op - self.operator(c_k).hbar_shift(k)
        self._mono_cache[exps] = op
        return op

    def _p_degree_jet(self, jet: PolyJet) -> int:
        return max((self._p_degree(e) for e in jet.terms), default=-1)


def geometric_operator(
    base: BaseMetric, f: PolyJet, dcap: int | None = None, split: str = "low"
) -> DiffOperator:
    """sigma(f) on the lifted chart of ``base``.

    Without an explicit ``dcap`` the recursion runs at 2N + 4 for momentum
    degree N and verifies the result is stable two grades higher.
    """
    n = base.dim
    max_p = max((sum(e[n:]) for e in f.terms), default=0)
    if dcap is None:
        quantizer = CotangentQuantizer(base, 2 * max_p + 4, split=split)
        result = quantizer.operator(f)
        checker = CotangentQuantizer(base, 2 * max_p + 6, split=split)
        if checker.operator(f) != result:
            raise AssertionError("operator not stable under a larger doubled-degree cap")
        return result
    return CotangentQuantizer(base, dcap, split=split).operator(f)


def conjugate(op: DiffOperator, u: PolyJet, order: int | None = None) -> DiffOperator:
    """u^-1 o op o u, re-normal-ordered (a change of half-density trivialization).

    ``u`` must have constant term 1; ``order`` bounds the truncation of the
    inverse jet and defaults to the cap of ``u``.
    """
    if order is None:
        order = u.cap
    if order is None:
        if u.degree() > 0:
            raise ValueError("an exact non-constant u needs an explicit truncation order")
        order = 0
    u_inv = u.power(-1, order)
    left = DiffOperator.multiplication(u_inv)
    right = DiffOperator.multiplication(u)
    return left.compose(op.compose(right))
