import itertools
import random
from fractions import Fraction

import pytest

from fedosov.checks import random_chart, random_weyl_form
from fedosov.exprs import parse_poly
from fedosov.geometry import ChartGeometry
from fedosov.jets import PolyJet
from fedosov.scalars import I, ONE, Scalar
from fedosov.weyl import (
    GradingError,
    WeylForm,
    adjoint_action,
    delta,
    delta_inv,
    delta_star,
    doubled_degree,
    function_part,
    graded_commutator,
    grading_report,
    hbar_quotient,
    project_hbar,
    project_sym,
    symbol_part,
    weyl_product,
)


@pytest.fixture
def chart2():
    return ChartGeometry(("q", "p"))


@pytest.fixture
def chart4():
    return ChartGeometry(("q1", "q2", "p1", "p2"))


def test_generator_product(chart2):
    yq = WeylForm.generator(chart2, 0, dcap=8)
    yp = WeylForm.generator(chart2, 1, dcap=8)
    prod = weyl_product(yq, yp)
    expected = WeylForm(
        chart2,
        {
            (0, (0, 1), ()): chart2.constant_jet(1),
            (1, (), ()): chart2.constant_jet(I / 2),
        },
        8,
    )
    assert prod == expected


def test_canonical_commutation_relation(chart2):
    yq = WeylForm.generator(chart2, 0, dcap=8)
    yp = WeylForm.generator(chart2, 1, dcap=8)
    comm = graded_commutator(yq, yp)
    assert comm == WeylForm(chart2, {(1, (), ()): chart2.constant_jet(I)}, 8)


def test_commutator_of_generator_with_itself_vanishes(chart4):
    for mu in range(4):
        y = WeylForm.generator(chart4, mu, dcap=6)
        assert graded_commutator(y, y).is_zero()


def test_scalars_are_central(chart2):
    f = WeylForm.scalar_section(chart2, parse_poly("1 + q^2*p", ("q", "p")), 6)
    gen = WeylForm(
        chart2,
        {(0, (1,), (0,)): chart2.constant_jet(-1), (0, (0,), (1,)): chart2.constant_jet(1)},
        6,
    )
    assert graded_commutator(gen, f).is_zero()


def _direct_symbol_contraction(chart, s1, s2):
    """Independent oracle for the fiber-degree-0 part of y^s1 o y^s2:
    (i/2)^k sum over permutations of products of omega_inv entries."""
    k = len(s1)
    if len(s2) != k:
        return Scalar(0)
    total = Scalar(0)
    for perm in itertools.permutations(range(k)):
        piece = ONE
        for idx in range(k):
            piece = piece * chart.omega_inv[s1[idx]][s2[perm[idx]]]
        total = total + piece
    return total * (I / 2) ** k


@pytest.mark.parametrize("dim", [2, 4])
def test_full_contraction_matches_permutation_formula(dim):
    rng = random.Random(dim)
    chart = ChartGeometry(
        tuple(f"q{i}" for i in range(dim // 2)) + tuple(f"p{i}" for i in range(dim // 2))
    )
    for k in range(1, 5):
        for _ in range(8):
            s1 = tuple(sorted(rng.randrange(dim) for _ in range(k)))
            s2 = tuple(sorted(rng.randrange(dim) for _ in range(k)))
            a = WeylForm.monomial(chart, 0, s1, (), 1, dcap=None)
            b = WeylForm.monomial(chart, 0, s2, (), 1, dcap=None)
            prod = symbol_part(weyl_product(a, b, None))
            got = prod.terms.get((k, (), ()), chart.zero_jet()).constant_term()
            assert got == _direct_symbol_contraction(chart, s1, s2)


def test_pairwise_contraction_example(chart4):
    # fiber-degree-0 part of y^a y^b o y^i y^j = (i/2)^2 hbar^2
    #   (omega^{ai} omega^{bj} + omega^{aj} omega^{bi})
    a, b, i, j = 0, 1, 2, 3
    left = WeylForm.monomial(chart4, 0, (a, b), (), 1, dcap=None)
    right = WeylForm.monomial(chart4, 0, (i, j), (), 1, dcap=None)
    got = symbol_part(weyl_product(left, right, None))
    w = chart4.omega_inv
    expected_value = (I / 2) ** 2 * (w[a][i] * w[b][j] + w[a][j] * w[b][i])
    assert got == WeylForm(chart4, {(2, (), ()): chart4.constant_jet(expected_value)}, None)


@pytest.mark.parametrize("dim", [2, 4])
def test_product_associativity_random(dim):
    rng = random.Random(100 + dim)
    chart = random_chart(rng, dim, xcap=None, entries=2)
    for _ in range(100):
        a = random_weyl_form(rng, chart, 6)
        b = random_weyl_form(rng, chart, 6)
        c = random_weyl_form(rng, chart, 6)
        assert weyl_product(weyl_product(a, b), c) == weyl_product(a, weyl_product(b, c))


def test_delta_identity_on_mixed_monomial(chart2):
    a = WeylForm.monomial(chart2, 0, (0,), (1,), 1, dcap=8)
    assert delta(delta_star(a)) + delta_star(delta(a)) == a.scale(2)


def test_delta_on_pure_function(chart2):
    f = WeylForm.scalar_section(chart2, parse_poly("q^3 - p", ("q", "p")), 6)
    assert delta(f).is_zero()


def test_hodge_type_decomposition_example(chart2):
    a = WeylForm.monomial(chart2, 0, (0, 1), (0,), 1, dcap=8)
    recomposed = delta_inv(delta(a)) + delta(delta_inv(a)) + function_part(a)
    assert recomposed == a


@pytest.mark.parametrize("dim", [2, 4])
def test_delta_properties_random(dim):
    rng = random.Random(7 + dim)
    chart = random_chart(rng, dim, xcap=None, entries=2)
    for _ in range(60):
        a = random_weyl_form(rng, chart, 6, max_form=2)
        assert delta(delta(a)).is_zero()
        assert delta_star(delta_star(a)).is_zero()
        assert delta_inv(delta(a)) + delta(delta_inv(a)) + function_part(a) == a


def test_delta_moves_doubled_degree_by_one(chart4):
    rng = random.Random(5)
    chart = chart4
    for _ in range(40):
        key = (
            rng.randint(0, 2),
            tuple(sorted(rng.randrange(4) for _ in range(rng.randint(1, 3)))),
            tuple(sorted(rng.sample(range(4), rng.randint(0, 2)))),
        )
        a = WeylForm(chart, {key: chart.constant_jet(1)}, None)
        d = doubled_degree(key)
        down = delta(a)
        for out_key in down.terms:
            assert doubled_degree(out_key) == d - 1
        up = delta_star(a)
        for out_key in up.terms:
            assert doubled_degree(out_key) == d + 1


def test_projections(chart2):
    one = chart2.constant_jet(1)
    a = WeylForm(
        chart2,
        {
            (1, (), ()): one.scale(1),
            (0, (0, 1), ()): one,
            (0, (0,), ()): one.scale(3),
        },
        6,
    )
    at2 = project_hbar(a, 2)
    assert set(at2.terms) == {(1, (), ()), (0, (0, 1), ())}
    sym0 = symbol_part(a)
    assert set(sym0.terms) == {(1, (), ())}
    # fiber-degree-0 projection of y + 3 keeps the scalar 3
    b = WeylForm(chart2, {(0, (0,), ()): one, (0, (), ()): one.scale(3)}, 6)
    assert symbol_part(b) == WeylForm(chart2, {(0, (), ()): one.scale(3)}, 6)
    # a 1-form has no function part
    c = WeylForm(chart2, {(0, (), (0,)): one}, 6)
    assert function_part(c).is_zero()


def test_adjoint_action_reproduces_delta(chart2):
    # generator omega_{ab} y^b dx^a
    terms = {}
    for a in range(2):
        for b in range(2):
            w = chart2.omega[a][b]
            if not w.is_zero():
                key = (0, (b,), (a,))
                terms[key] = terms.get(key, chart2.zero_jet()) + chart2.constant_jet(w)
    gen = WeylForm(chart2, terms, None)
    rng = random.Random(2)
    for _ in range(30):
        x = random_weyl_form(rng, chart2, 6, max_form=1)
        assert adjoint_action(gen, x, 6) == -delta(x).with_dcap(6)


def test_adjoint_action_annihilates_identity(chart2):
    gen = WeylForm.monomial(chart2, 0, (0, 0), (1,), 1, dcap=None)
    one = WeylForm.scalar_section(chart2, chart2.constant_jet(5), 6)
    assert adjoint_action(gen, one, 6).is_zero()


def test_adjoint_action_on_generator_gives_linear_term(chart2):
    # quadratic generator -(1/2) Gamma_{mu nu kappa} y^mu y^nu dx^kappa acting
    # on y^i yields -Gamma^i_{kl} y^l dx^k (expanded by the commutation rule)
    gamma = {(0, 0, 0): parse_poly("3", ("q", "p"))}
    chart = ChartGeometry(("q", "p"), gamma=gamma)
    terms = {}
    for mu in range(2):
        for nu in range(2):
            for kappa in range(2):
                jet = chart.gamma_lowered(mu, nu, kappa)
                if jet.is_zero():
                    continue
                key = (0, tuple(sorted((mu, nu))), (kappa,))
                terms[key] = terms.get(key, chart.zero_jet()) + jet.scale(Scalar(Fraction(-1, 2)))
    gen = WeylForm(chart, terms, None)
    for i in range(2):
        y_i = WeylForm.generator(chart, i, dcap=6)
        got = adjoint_action(gen, y_i, 6)
        expected_terms = {}
        for k in range(2):
            for l in range(2):
                jet = chart.gamma_raised(i, k, l)
                if jet.is_zero():
                    continue
                key = (0, (l,), (k,))
                expected_terms[key] = expected_terms.get(key, chart.zero_jet()) - jet
        assert got == WeylForm(chart, expected_terms, 6)


def test_hbar_quotient_detects_grading_bug(chart2):
    bad = WeylForm(chart2, {(0, (0,), ()): chart2.constant_jet(1)}, 6)
    with pytest.raises(GradingError):
        hbar_quotient(bad)


def test_grading_report_buckets(chart2):
    one = chart2.constant_jet(1)
    a = WeylForm(chart2, {(1, (), ()): one, (0, (0, 1), ()): one, (0, (0,), (1,)): one}, 6)
    report = grading_report(a, p_indices=(1,))
    assert sorted(report.by_doubled_degree) == [1, 2]
    assert len(report.by_doubled_degree[2]) == 2
    assert report.q_degree_min == 0
