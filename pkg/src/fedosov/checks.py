"""Seeded randomized check suites, shared by the CLI and the test suite.

Every suite takes a seed and returns a list of :class:`CheckItem`; the CLI
renders them and sets the exit code.  Random data is drawn through a local
``random.Random`` so runs are reproducible byte for byte.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .cotangent import (
    BaseMetric,
    CotangentQuantizer,
    check_compatibility,
    lift_connection,
    p_block,
    q_degree,
    q_degree_terms,
)
from .geometry import ChartGeometry, hamiltonian_field, omega_pairing, poisson_bracket, vector_cov_deriv
from .jets import PolyJet
from .metaplectic import PolyWave, RepConfig, apply_operator, metaplectic_operator, rep_apply
from .quantization import (
    connection_one_form,
    flat_connection,
    flat_section,
    flat_section_residual,
    flatness_residual,
    metaplectic_generator,
    star_product,
)
from .scalars import I, Scalar
from .weyl import (
    WeylForm,
    delta,
    delta_inv,
    delta_star,
    doubled_degree,
    function_part,
    graded_commutator,
    weyl_product,
)


class CheckItem:
    def __init__(self, name: str, passed: bool, detail: str = ""):
        self.name = name
        self.passed = passed
        self.detail = detail

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        suffix = f"  ({self.detail})" if self.detail else ""
        return f"{status} {self.name}{suffix}"


# -- random data -----------------------------------------------------------------


def random_scalar(rng: random.Random, *, complex_part=True) -> Scalar:
    re = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    im = Fraction(rng.randint(-2, 2)) if complex_part and rng.random() < 0.4 else Fraction(0)
    return Scalar(re, im)


def random_jet(rng: random.Random, vars, max_degree=2, terms=2, cap=None) -> PolyJet:
    out: dict = {}
    for _ in range(terms):
        exps = [0] * len(vars)
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(len(vars))] += 1
        out[tuple(exps)] = random_scalar(rng, complex_part=False)
    return PolyJet(vars, out, cap)


def random_chart(rng: random.Random, dim: int, xcap: int | None = None, entries: int = 3) -> ChartGeometry:
    """Darboux chart with a sparse random polynomial connection."""
    coords = tuple(f"q{j + 1}" for j in range(dim // 2)) + tuple(f"p{j + 1}" for j in range(dim // 2))
    gamma: dict = {}
    for _ in range(entries):
        key = tuple(sorted(rng.randrange(dim) for _ in range(3)))
        jet = random_jet(rng, coords, max_degree=min(2, xcap or 2), terms=1, cap=xcap)
        if jet.is_zero():
            continue
        gamma[key] = gamma.get(key, PolyJet.zero(coords, xcap)) + jet
    return ChartGeometry(coords, gamma=gamma, xcap=xcap)


def random_weyl_form(rng: random.Random, chart: ChartGeometry, dcap: int, terms=3, max_form=1) -> WeylForm:
    out: dict = {}
    for _ in range(terms):
        h = rng.randint(0, 1)
        sym_len = rng.randint(0, max(0, dcap - 2 * h))
        sym = tuple(sorted(rng.randrange(chart.dim) for _ in range(min(sym_len, 3))))
        form_len = rng.randint(0, max_form)
        form = tuple(sorted(rng.sample(range(chart.dim), form_len)))
        jet = random_jet(rng, chart.coords, max_degree=1, terms=1, cap=chart.xcap)
        if jet.is_zero():
            continue
        key = (h, sym, form)
        out[key] = out.get(key, chart.zero_jet()) + jet
    return WeylForm(chart, out, dcap)


def random_base_metric(rng: random.Random, dim: int = 2, jet_order: int = 4) -> BaseMetric:
    coords = tuple(f"x{j + 1}" for j in range(dim))
    g = [[PolyJet.constant(coords, 1 if i == j else 0, jet_order) for j in range(dim)] for i in range(dim)]
    for i in range(dim):
        for j in range(i, dim):
            bump: dict = {}
            exps = [0] * dim
            exps[rng.randrange(dim)] += 1
            exps[rng.randrange(dim)] += 1
            bump[tuple(exps)] = Scalar(Fraction(rng.randint(-2, 2), 6))
            jet = PolyJet(coords, bump, jet_order)
            g[i][j] = g[i][j] + jet
            if i != j:
                g[j][i] = g[j][i] + jet
    return BaseMetric(coords, tuple(tuple(row) for row in g), jet_order)


def random_poly(rng: random.Random, vars, max_degree=2, terms=2, cap=None) -> PolyJet:
    return random_jet(rng, vars, max_degree=max_degree, terms=terms, cap=cap)


# -- suites -----------------------------------------------------------------------


def weyl_suite(seed: int, triples: int = 40) -> list[CheckItem]:
    rng = random.Random(seed)
    items: list[CheckItem] = []
    for dim in (2, 4):
        chart = random_chart(rng, dim, xcap=None, entries=2)
        dcap = 6
        assoc_ok = True
        for _ in range(triples):
            a = random_weyl_form(rng, chart, dcap)
            b = random_weyl_form(rng, chart, dcap)
            c = random_weyl_form(rng, chart, dcap)
            left = weyl_product(weyl_product(a, b), c)
            right = weyl_product(a, weyl_product(b, c))
            if left != right:
                assoc_ok = False
                break
        items.append(CheckItem(f"dim {dim}: product associativity ({triples} triples)", assoc_ok))
        d_ok = True
        dec_ok = True
        for _ in range(triples):
            a = random_weyl_form(rng, chart, dcap, max_form=2)
            if not delta(delta(a)).is_zero() or not delta_star(delta_star(a)).is_zero():
                d_ok = False
            recomposed = delta(delta_inv(a)) + delta_inv(delta(a)) + function_part(a)
            if recomposed != a:
                dec_ok = False
        items.append(CheckItem(f"dim {dim}: delta and delta_star square to zero", d_ok))
        items.append(CheckItem(f"dim {dim}: index-exchange decomposition", dec_ok))
    return items


def fedosov_suite(seed: int, pairs: int = 15) -> list[CheckItem]:
    rng = random.Random(seed)
    items: list[CheckItem] = []
    for dim in (2, 4):
        capped = random_chart(rng, dim, xcap=3, entries=2)
        conn_capped = flat_connection(capped, 8)
        items.append(CheckItem(f"dim {dim}: flatness residual vanishes (xcap 3, dcap 8)",
                               flatness_residual(conn_capped).is_zero()))
        # identity checks run on exact polynomial charts, where every stored
        # term is trusted and the comparisons are sharp
        chart = random_chart(rng, dim, xcap=None, entries=2)
        conn = flat_connection(chart, 8)
        items.append(CheckItem(f"dim {dim}: flatness residual vanishes (exact chart)",
                               flatness_residual(conn).is_zero()))
        ok_c0 = True
        ok_corr = True
        ok_flat = True
        for _ in range(pairs):
            f = random_poly(rng, chart.coords, max_degree=2)
            g = random_poly(rng, chart.coords, max_degree=2)
            exp_fg = star_product(conn, f, g)
            exp_gf = star_product(conn, g, f)
            if exp_fg.coefficient(0) != f * g:
                ok_c0 = False
            bracket = exp_fg.coefficient(1) - exp_gf.coefficient(1)
            if bracket != poisson_bracket(chart, f, g).scale(I):
                ok_corr = False
            section = flat_section(conn, f)
            if not flat_section_residual(conn, section).is_zero():
                ok_flat = False
        items.append(CheckItem(f"dim {dim}: star c0 equals the pointwise product", ok_c0))
        items.append(CheckItem(f"dim {dim}: correspondence principle at first order", ok_corr))
        items.append(CheckItem(f"dim {dim}: flat sections are parallel mod cap", ok_flat))
    return items


def qgrad_suite(seed: int, dcap: int = 8) -> list[CheckItem]:
    rng = random.Random(seed)
    base = random_base_metric(rng, 2, jet_order=4)
    chart = lift_connection(base)
    conn = flat_connection(chart, dcap)
    pset = p_block(chart)
    items: list[CheckItem] = []
    one_form = connection_one_form(conn)
    qA = q_degree(one_form, pset)
    items.append(CheckItem("connection form has Q-degree >= 0", qA is not None and qA >= 0,
                           f"min degree {qA}"))
    # strip the symplectic part (hbar^-1 with a single fiber factor)
    stripped = {k: v for k, v in one_form.terms.items() if not (k[0] == -1 and len(k[1]) == 1)}
    rest = WeylForm(chart, stripped, None)
    q_rest = q_degree(rest, pset)
    items.append(CheckItem("higher connection terms have positive Q-degree",
                           q_rest is None or q_rest > 0, f"min degree {q_rest}"))
    ok_r = True
    for key, qd in q_degree_terms(conn.correction, pset).items():
        if qd < doubled_degree(key) - 1:
            ok_r = False
    items.append(CheckItem("correction terms satisfy q >= D - 1", ok_r))
    ok_f = True
    for n_p in (0, 1, 2):
        exps = [0] * chart.dim
        exps[0] = 1
        exps[chart.dim // 2] = n_p
        f = PolyJet.monomial(chart.coords, tuple(exps))
        section = flat_section(conn, f)
        for key, qd in q_degree_terms(section.lifted, pset).items():
            level = doubled_degree(key)
            if level == 0:
                continue
            if qd < level - 2 * n_p:
                ok_f = False
    items.append(CheckItem("section terms satisfy q >= D - 2N for momentum degree N", ok_f))
    return items


def compat_suite(seed: int, dcap: int = 6) -> list[CheckItem]:
    rng = random.Random(seed)
    items: list[CheckItem] = []
    for trial in range(2):
        base = random_base_metric(rng, 2, jet_order=4)
        chart = lift_connection(base)
        report = check_compatibility(chart, dcap=dcap)
        items.append(CheckItem(f"lifted chart {trial + 1}: compatibility checks (a)-(d)",
                               report.passed, "; ".join(report.details[:2])))
    bad_coords = ("q1", "p1")
    bad = ChartGeometry(bad_coords, gamma={(1, 1, 0): PolyJet.constant(bad_coords, 1)})
    report = check_compatibility(bad, dcap=4)
    items.append(CheckItem("chart with momentum-heavy connection is rejected", not report.order2))
    return items


def metaplectic_suite(seed: int, max_degree: int = 4) -> list[CheckItem]:
    rng = random.Random(seed)
    items: list[CheckItem] = []
    from .geometry import fock_symplectic_matrix

    for n in (1, 2):
        chart = ChartGeometry(tuple(f"q{j+1}" for j in range(n)) + tuple(f"p{j+1}" for j in range(n)))
        cfg = RepConfig("position", n)

        def random_sp(rng, n):
            A = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
            B = [[Fraction(0)] * n for _ in range(n)]
            C = [[Fraction(0)] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    B[i][j] = B[j][i] = Fraction(rng.randint(-2, 2))
                    C[i][j] = C[j][i] = Fraction(rng.randint(-2, 2))
            top = [row_a + row_b for row_a, row_b in zip(A, B)]
            bottom = [row_c + [-A[j][i] for j in range(n)] for i, row_c in enumerate(C)]
            return [list(map(Scalar, row)) for row in top + bottom]

        hom_ok = True
        rep_ok = True
        for _ in range(6):
            X = random_sp(rng, n)
            Y = random_sp(rng, n)
            gen_x = metaplectic_generator(chart, X)
            gen_y = metaplectic_generator(chart, Y)
            comm = graded_commutator(gen_x, gen_y, None)
            XY = [[sum((X[i][k] * Y[k][j] - Y[i][k] * X[k][j] for k in range(2 * n)), Scalar(0))
                   for j in range(2 * n)] for i in range(2 * n)]
            gen_xy = metaplectic_generator(chart, XY)
            # the commutation relation supplies exactly one hbar, so the
            # bracket of two generators lands back on generator keys
            if comm != gen_xy:
                hom_ok = False
            op = metaplectic_operator(cfg, X)
            for _ in range(3):
                exps = tuple(rng.randint(0, max_degree) for _ in range(n))
                psi = PolyWave.monomial(cfg.wave_vars, exps)
                if rep_apply(cfg, gen_x, psi) != apply_operator(op, psi):
                    rep_ok = False
        items.append(CheckItem(f"n={n}: generator map is a Lie algebra homomorphism", hom_ok))
        items.append(CheckItem(f"n={n}: representation matches the closed-form operator", rep_ok))
        lin_ok = True
        for _ in range(4):
            X = random_sp(rng, n)
            gen_x = metaplectic_generator(chart, X)
            mu = rng.randrange(2 * n)
            y_mu = WeylForm.generator(chart, mu)
            bracket = graded_commutator(gen_x, y_mu, None)
            expected: dict = {}
            for j in range(2 * n):
                value = -Scalar.of(X[mu][j])
                if value.is_zero():
                    continue
                key = (0, (j,), ())
                expected[key] = chart.constant_jet(value)
            if bracket != WeylForm(chart, expected, None):
                lin_ok = False
        items.append(CheckItem(f"n={n}: commutator with a generator is the linear action", lin_ok))
    return items


def homogeneity_suite(seed: int, dcap: int = 8) -> list[CheckItem]:
    rng = random.Random(seed)
    base = random_base_metric(rng, 2, jet_order=4)
    chart = lift_connection(base)
    conn = flat_connection(chart, dcap)
    n = chart.dim // 2
    items: list[CheckItem] = []
    bound_ok = True
    homog_ok = True
    for deg_f in range(0, 3):
        for deg_g in range(0, 3 - deg_f + 1):
            if deg_f + deg_g > 4 or 2 * (deg_f + deg_g) > dcap:
                continue
            f_exps = [0] * chart.dim
            g_exps = [0] * chart.dim
            f_exps[rng.randrange(n)] = 1
            g_exps[rng.randrange(n)] = 2
            for _ in range(deg_f):
                f_exps[n + rng.randrange(n)] += 1
            for _ in range(deg_g):
                g_exps[n + rng.randrange(n)] += 1
            f = PolyJet.monomial(chart.coords, tuple(f_exps))
            g = PolyJet.monomial(chart.coords, tuple(g_exps))
            expansion = star_product(conn, f, g)
            for k, jet in expansion.as_pairs():
                if k > deg_f + deg_g and not jet.is_zero():
                    bound_ok = False
                p_idx = range(n, 2 * n)
                degrees = {sum(e[i] for i in p_idx) for e in jet.terms}
                if degrees and degrees != {deg_f + deg_g - k}:
                    homog_ok = False
    items.append(CheckItem("star coefficients vanish beyond the combined momentum degree", bound_ok))
    items.append(CheckItem("momentum degree of c_k is deg_p(f) + deg_p(g) - k", homog_ok))
    return items


SUITES = {
    "weyl": weyl_suite,
    "fedosov": fedosov_suite,
    "qgrad": qgrad_suite,
    "compat": compat_suite,
    "metaplectic": metaplectic_suite,
    "homogeneity": homogeneity_suite,
}
