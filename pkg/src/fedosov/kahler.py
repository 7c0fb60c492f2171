"""Kaehler charts from a potential and the holomorphic star-product checks.

Complex coordinates are formal chart coordinates ``z1..zn, zb1..zbn`` with
Gaussian-rational coefficients; reality of the potential is the syntactic
condition that swapping the two blocks conjugates every coefficient.  The
Levi-Civita connection of a Kaehler metric has only the mixed
third-derivative components

    Gamma_{zbar(a) b c} = -i d_zbar(a) d_b d_c K,
    Gamma_{a zbar(b) zbar(c)} = +i d_a d_zbar(b) d_zbar(c) K,

which this module assembles into a standard chart.  The chart's symplectic
form is i d(dbar(K)), required constant (normal-form potentials).
"""

from __future__ import annotations

from .geometry import ChartGeometry, poisson_bracket
from .jets import PolyJet
from .quantization import FedosovConnection, flat_connection, star_product
from .scalars import I, Scalar


def kahler_coords(n: int) -> tuple[str, ...]:
    return tuple(f"z{j + 1}" for j in range(n)) + tuple(f"zb{j + 1}" for j in range(n))


def is_real_potential(K: PolyJet, n: int) -> bool:
    """K is real iff swapping the z and zbar blocks conjugates coefficients."""
    for exps, coeff in K.terms.items():
        swapped = tuple(exps[n:]) + tuple(exps[:n])
        other = K.terms.get(swapped)
        if other is None or other != coeff.conjugate():
            return False
    return True


def kahler_chart(K: PolyJet, xcap: int | None = None) -> ChartGeometry:
    """Chart over (z..., zbar...) with the Kaehler connection of ``K``.

    The chart keeps a constant symplectic form, so the checks are local at
    the origin: omega is i ddbar(K) evaluated there, and the metric block
    K_{a bbar}(0) must be invertible.  The connection keeps the full jets of
    the mixed third derivatives.
    """
    dim = len(K.vars)
    if dim % 2:
        raise ValueError("potential must live over paired coordinates (z..., zbar...)")
    n = dim // 2
    coords = K.vars
    if not is_real_potential(K, n):
        raise ValueError("potential is not real (block swap must conjugate coefficients)")
    metric = [[K.diff(a).diff(n + b) for b in range(n)] for a in range(n)]
    omega = [[Scalar(0)] * dim for _ in range(dim)]
    for a in range(n):
        for b in range(n):
            value = I * metric[a][b].constant_term()
            omega[a][n + b] = value
            omega[n + b][a] = -value
    gamma: dict[tuple[int, int, int], PolyJet] = {}
    for abar in range(n):
        for b in range(n):
            for c in range(b, n):
                jet = K.diff(n + abar).diff(b).diff(c).scale(-I)
                if not jet.is_zero():
                    gamma[tuple(sorted((n + abar, b, c)))] = jet
    for a in range(n):
        for bbar in range(n):
            for cbar in range(bbar, n):
                jet = K.diff(a).diff(n + bbar).diff(n + cbar).scale(I)
                if not jet.is_zero():
                    key = tuple(sorted((a, n + bbar, n + cbar)))
                    if key in gamma and gamma[key] != jet:
                        raise ValueError("potential produced an asymmetric connection")
                    gamma[key] = jet
    return ChartGeometry(coords, omega=omega, gamma=gamma, xcap=xcap)


class HolomorphicStarReport:
    """Order-by-order outcome of the two holomorphic star conditions."""

    def __init__(self, order, product_orders, potential_orders):
        self.order = order
        self.product_orders = product_orders      # k -> bool (c_k(f, g) == 0)
        self.potential_orders = potential_orders  # (a, k) -> bool
        self.holomorphic_product = all(product_orders.values())
        self.potential_condition = all(potential_orders.values())

    @property
    def passed(self) -> bool:
        return self.holomorphic_product and self.potential_condition

    def lines(self):
        for k in sorted(self.product_orders):
            ok = self.product_orders[k]
            yield f"c_{k}(f, g) == 0: {'pass' if ok else 'FAIL'}"
        for (a, k) in sorted(self.potential_orders):
            ok = self.potential_orders[(a, k)]
            yield f"potential direction {a}, order {k}: {'pass' if ok else 'FAIL'}"


def check_holomorphic_star(
    chart: ChartGeometry,
    f: PolyJet,
    g: PolyJet,
    K: PolyJet,
    order: int,
    conn: FedosovConnection | None = None,
) -> HolomorphicStarReport:
    """Check f * g = fg and f * dK_a = f dK_a + (i hbar/2){f, dK_a} through
    the given hbar order, for holomorphic f and g (z-block dependence only)."""
    n = chart.dim // 2
    for name, jet in (("f", f), ("g", g)):
        for exps in jet.terms:
            if any(exps[n:]):
                raise ValueError(f"{name} must be holomorphic (no zbar dependence)")
    if conn is None:
        conn = flat_connection(chart, 2 * order)
    if 2 * order > conn.dcap:
        raise ValueError("order exceeds the trust bound of the supplied connection")
    product_orders = {}
    exp_fg = star_product(conn, f, g)
    for k in range(1, order + 1):
        product_orders[k] = exp_fg.coefficient(k).is_zero()
    potential_orders = {}
    half_i = I / 2
    for a in range(n):
        dK = K.diff(a)
        expansion = star_product(conn, f, dK)
        first = poisson_bracket(chart, f, dK).scale(half_i)
        potential_orders[(a, 1)] = expansion.coefficient(1) == first
        for k in range(2, order + 1):
            potential_orders[(a, k)] = expansion.coefficient(k).is_zero()
    return HolomorphicStarReport(order, product_orders, potential_orders)
