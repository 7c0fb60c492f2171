"""Chart-level symplectic geometry.

A :class:`ChartGeometry` is a local Darboux chart: a constant antisymmetric
invertible matrix ``omega`` over named coordinates, together with a fully
symmetric table of lowered connection coefficients as polynomial jets.  The
exact inverse of ``omega`` is computed once; curvature and raised
coefficients are derived on demand and cached.

Index convention fixed once for the whole engine:
``omega_inv[mu][nu] * omega[nu][kappa] = delta(mu, kappa)``, i.e. the plain
matrix inverse.  With coordinates ordered ``(q1..qn, p1..pn)`` the standard
block form has ``omega[q][p] = -1`` and ``omega_inv[q][p] = +1``, so the
Poisson bracket ``omega_inv[a][b] d_a f d_b g`` gives ``{q, p} = 1``.
"""

from __future__ import annotations

import json

from .jets import PolyJet, min_cap
from .scalars import MINUS_ONE, ONE, Scalar, ZERO


# -- exact linear algebra over Scalar ---------------------------------------


def matrix_inverse(matrix: tuple[tuple[Scalar, ...], ...]) -> tuple[tuple[Scalar, ...], ...]:
    n = len(matrix)
    aug = [[Scalar.of(matrix[r][c]) for c in range(n)] + [ONE if c == r else ZERO for c in range(n)]
           for r in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = ONE / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def standard_symplectic_matrix(dim: int) -> tuple[tuple[Scalar, ...], ...]:
    """Block form of dp_j ^ dq^j on coordinates (q1..qn, p1..pn)."""
    if dim % 2:
        raise ValueError("symplectic dimension must be even")
    n = dim // 2
    rows = [[ZERO] * dim for _ in range(dim)]
    for j in range(n):
        rows[j][n + j] = MINUS_ONE
        rows[n + j][j] = ONE
    return tuple(tuple(r) for r in rows)


def fock_symplectic_matrix(n: int) -> tuple[tuple[Scalar, ...], ...]:
    """Complex standard form i dz^j ^ dzbar^j on (z1..zn, zb1..zbn)."""
    dim = 2 * n
    rows = [[ZERO] * dim for _ in range(dim)]
    ii = Scalar(0, 1)
    for j in range(n):
        rows[j][n + j] = ii
        rows[n + j][j] = -ii
    return tuple(tuple(r) for r in rows)


def is_sp_matrix(omega, A) -> bool:
    """Membership in the symplectic Lie algebra: omega*A symmetric."""
    dim = len(omega)
    for i in range(dim):
        for k in range(i + 1, dim):
            lhs = sum((omega[i][l] * Scalar.of(A[l][k]) for l in range(dim)), ZERO)
            rhs = sum((omega[k][l] * Scalar.of(A[l][i]) for l in range(dim)), ZERO)
            if lhs != rhs:
                return False
    return True


# -- charts ------------------------------------------------------------------


class ChartGeometry:
    """Darboux chart with a symmetric (lowered) symplectic connection.

    ``gamma`` maps a sorted index triple to the jet of the fully lowered
    coefficient; lookups symmetrize automatically.  ``xcap`` caps every
    stored jet (``None`` for exact polynomial data).
    """

    def __init__(self, coords, omega=None, gamma=None, xcap: int | None = None):
        self.coords = tuple(coords)
        dim = len(self.coords)
        if dim % 2:
            raise ValueError("chart dimension must be even")
        self.dim = dim
        self.xcap = xcap
        if omega is None:
            omega = standard_symplectic_matrix(dim)
        self.omega = tuple(tuple(Scalar.of(x) for x in row) for row in omega)
        for i in range(dim):
            for j in range(dim):
                if self.omega[i][j] != -self.omega[j][i]:
                    raise ValueError("omega must be antisymmetric")
        self.omega_inv = matrix_inverse(self.omega)
        self.omega_inv_entries = tuple(
            (mu, nu, self.omega_inv[mu][nu])
            for mu in range(dim)
            for nu in range(dim)
            if not self.omega_inv[mu][nu].is_zero()
        )
        self._gamma: dict[tuple[int, int, int], PolyJet] = {}
        if gamma:
            for indices, jet in gamma.items():
                key = tuple(sorted(indices))
                jet = jet.with_cap(min_cap(jet.cap, xcap))
                if jet.is_zero():
                    continue
                if key in self._gamma and self._gamma[key] != jet:
                    raise ValueError(f"conflicting connection entries for {indices}")
                self._gamma[key] = jet
        self._zero_jet = PolyJet.zero(self.coords, xcap)
        self._gamma_raised: dict[int, tuple] = {}
        self._curvature: CurvatureTable | None = None
        self._contractions: dict = {}
        self._full_contractions: dict = {}
        self._exact: ChartGeometry | None = None

    # -- jets ----------------------------------------------------------------

    def zero_jet(self) -> PolyJet:
        return self._zero_jet

    def constant_jet(self, value) -> PolyJet:
        return PolyJet.constant(self.coords, value, self.xcap)

    def coordinate_jet(self, index: int) -> PolyJet:
        return PolyJet.coordinate(self.coords, self.coords[index], self.xcap)

    # -- connection ------------------------------------------------------------

    def gamma_lowered(self, i: int, j: int, k: int) -> PolyJet:
        return self._gamma.get(tuple(sorted((i, j, k))), self._zero_jet)

    def has_connection(self) -> bool:
        return bool(self._gamma)

    def gamma_lowered_entries(self):
        """Sorted triples with nonzero lowered coefficients."""
        return sorted(self._gamma.items())

    def gamma_raised(self, mu: int, a: int, b: int) -> PolyJet:
        """Gamma^mu_{ab} = omega_inv[mu][l] Gamma_{lab}."""
        for aa, bb, jet in self.gamma_raised_entries(mu):
            if (aa, bb) == (a, b):
                return jet
        return self._zero_jet

    def gamma_raised_entries(self, mu: int):
        """Nonzero (a, b, Gamma^mu_{ab}) rows, cached per upper index."""
        cached = self._gamma_raised.get(mu)
        if cached is not None:
            return cached
        rows = []
        for a in range(self.dim):
            for b in range(a, self.dim):
                acc = self._zero_jet
                for l in range(self.dim):
                    w = self.omega_inv[mu][l]
                    if w.is_zero():
                        continue
                    jet = self.gamma_lowered(l, a, b)
                    if jet.is_zero():
                        continue
                    acc = acc + jet.scale(w)
                if not acc.is_zero():
                    rows.append((a, b, acc))
                    if a != b:
                        rows.append((b, a, acc))
        rows = tuple(sorted(rows, key=lambda t: (t[0], t[1])))
        self._gamma_raised[mu] = rows
        return rows

    def curvature(self) -> "CurvatureTable":
        if self._curvature is None:
            self._curvature = _curvature_of_chart(self)
        return self._curvature

    def exact_chart(self) -> "ChartGeometry":
        """The same chart with every truncation cap removed.

        The stored coefficients are kept verbatim and treated as exact
        polynomial data: the graded recursions run on this view so their
        defining identities hold identically, while the capped chart remains
        the record of which degrees the data actually represents.
        """
        if self.xcap is None:
            return self
        if self._exact is None:
            gamma = {key: jet.with_cap(None) for key, jet in self._gamma.items()}
            self._exact = ChartGeometry(self.coords, omega=self.omega, gamma=gamma, xcap=None)
        return self._exact

    # -- serialization -----------------------------------------------------------

    def to_json_dict(self) -> dict:
        from .exprs import print_canonical

        omega_is_standard = self.omega == standard_symplectic_matrix(self.dim)
        data: dict = {"dim": self.dim, "coords": list(self.coords)}
        if not omega_is_standard:
            data["omega"] = [[str(x) for x in row] for row in self.omega]
        seen = set()
        entries = []
        for key, jet in sorted(self._gamma.items()):
            if key in seen:
                continue
            seen.add(key)
            entries.append({"indices": [k + 1 for k in key], "coeff": print_canonical(jet)})
        data["gamma"] = entries
        if self.xcap is not None:
            data["xcap"] = self.xcap
        return data


def chart_from_json_dict(data: dict) -> ChartGeometry:
    from .exprs import parse_poly, parse_scalar

    try:
        coords = tuple(data["coords"])
        dim = int(data["dim"])
    except KeyError as missing:
        raise ValueError(f"chart file is missing required key {missing}") from None
    if len(coords) != dim:
        raise ValueError("chart 'coords' length does not match 'dim'")
    xcap = data.get("xcap")
    omega = None
    if "omega" in data and data["omega"] is not None:
        omega = tuple(
            tuple(parse_scalar(str(entry)) for entry in row) for row in data["omega"]
        )
    gamma: dict[tuple[int, int, int], PolyJet] = {}
    for entry in data.get("gamma", []):
        indices = entry["indices"]
        if len(indices) != 3 or not all(1 <= k <= dim for k in indices):
            raise ValueError(f"bad connection indices {indices} (expected three in 1..{dim})")
        key = tuple(sorted(k - 1 for k in indices))
        jet = parse_poly(entry["coeff"], coords, xcap)
        if key in gamma:
            raise ValueError(f"duplicate connection entry for indices {indices}")
        gamma[key] = jet
    return ChartGeometry(coords, omega=omega, gamma=gamma, xcap=xcap)


def load_chart(path: str) -> ChartGeometry:
    with open(path, "r", encoding="utf-8") as handle:
        return chart_from_json_dict(json.load(handle))


# -- curvature ------------------------------------------------------------------


class CurvatureTable:
    """Lowered curvature components R_{ijkl} of a chart connection.

    Symmetric in the first two indices, antisymmetric in the last two.
    """

    def __init__(self, chart: ChartGeometry, lowered: dict, raised: dict):
        self.chart = chart
        self._lowered = lowered
        self._raised = raised

    def lowered(self, i, j, k, l) -> PolyJet:
        return self._lowered.get((i, j, k, l), self.chart._zero_jet)

    def raised(self, i, j, k, l) -> PolyJet:
        """R^i_{jkl}."""
        return self._raised.get((i, j, k, l), self.chart._zero_jet)

    def lowered_entries(self):
        return sorted(self._lowered.items())

    def is_zero(self) -> bool:
        return not self._lowered


def _curvature_of_chart(chart: ChartGeometry) -> CurvatureTable:
    dim = chart.dim
    cap = None if chart.xcap is None else chart.xcap - 1
    raised: dict[tuple[int, int, int, int], PolyJet] = {}
    for i in range(dim):
        rows_i = {(a, b): jet for a, b, jet in chart.gamma_raised_entries(i)}
        for j in range(dim):
            for k in range(dim):
                for l in range(k + 1, dim):
                    term = chart.zero_jet().with_cap(cap)
                    g_lj = rows_i.get((l, j))
                    if g_lj is not None:
                        term = term + g_lj.diff(k)
                    g_kj = rows_i.get((k, j))
                    if g_kj is not None:
                        term = term - g_kj.diff(l)
                    for m in range(dim):
                        g_km = rows_i.get((k, m))
                        if g_km is not None:
                            g = chart.gamma_raised(m, l, j)
                            if not g.is_zero():
                                term = term + g_km * g
                        g_lm = rows_i.get((l, m))
                        if g_lm is not None:
                            g = chart.gamma_raised(m, k, j)
                            if not g.is_zero():
                                term = term - g_lm * g
                    term = term.with_cap(min_cap(term.cap, cap))
                    if not term.is_zero():
                        raised[(i, j, k, l)] = term
                        raised[(i, j, l, k)] = -term
    lowered: dict[tuple[int, int, int, int], PolyJet] = {}
    for (i, j, k, l), jet in raised.items():
        for m in range(dim):
            w = chart.omega[m][i]
            if w.is_zero():
                continue
            key = (m, j, k, l)
            acc = lowered.get(key)
            piece = jet.scale(w)
            lowered[key] = piece if acc is None else acc + piece
    lowered = {k: v for k, v in lowered.items() if not v.is_zero()}
    return CurvatureTable(chart, lowered, raised)


def curvature(chart: ChartGeometry) -> CurvatureTable:
    return chart.curvature()


# -- tensor calculus helpers -------------------------------------------------


def hamiltonian_field(chart: ChartGeometry, f: PolyJet) -> list[PolyJet]:
    """Components X^a = omega_inv[a][b] d_b f."""
    out = []
    for a in range(chart.dim):
        acc = chart.zero_jet()
        for b in range(chart.dim):
            w = chart.omega_inv[a][b]
            if w.is_zero():
                continue
            acc = acc + f.diff(b).scale(w)
        out.append(acc)
    return out


def poisson_bracket(chart: ChartGeometry, f: PolyJet, g: PolyJet) -> PolyJet:
    """{f, g} = omega_inv[a][b] d_a f d_b g."""
    acc = chart.zero_jet()
    for a, b, w in chart.omega_inv_entries:
        acc = acc + (f.diff(a) * g.diff(b)).scale(w)
    return acc


def omega_pairing(chart: ChartGeometry, X, Y) -> PolyJet:
    """omega(X, Y) = omega[a][b] X^a Y^b for component lists."""
    acc = chart.zero_jet()
    for a in range(chart.dim):
        for b in range(chart.dim):
            w = chart.omega[a][b]
            if w.is_zero() or X[a].is_zero() or Y[b].is_zero():
                continue
            acc = acc + (X[a] * Y[b]).scale(w)
    return acc


def vector_cov_deriv(chart: ChartGeometry, X) -> dict[tuple[int, int], PolyJet]:
    """(nabla_k X)^l = d_k X^l + Gamma^l_{km} X^m, keyed (k, l)."""
    out = {}
    for k in range(chart.dim):
        for l in range(chart.dim):
            acc = X[l].diff(k)
            for a, b, jet in chart.gamma_raised_entries(l):
                if a == k and not X[b].is_zero():
                    acc = acc + jet * X[b]
            out[(k, l)] = acc
    return out


def tensor_cov_deriv_lowered(chart: ChartGeometry, table: dict, rank: int) -> dict:
    """Covariant derivative of a fully lowered tensor given as an index-tuple map.

    Returns a map keyed (m, *indices) with the derivative slot first; every
    original slot receives a -Gamma^a_{m, slot} correction.  Tables here are
    tiny (dim <= 4, rank <= 4), so the full index cube is iterated.
    """
    import itertools

    dim = chart.dim

    def get(idx):
        return table.get(idx, chart._zero_jet)

    out = {}
    for m in range(dim):
        for idx in itertools.product(range(dim), repeat=rank):
            acc = get(idx).diff(m)
            for slot in range(rank):
                for a in range(dim):
                    jet = chart.gamma_raised(a, m, idx[slot])
                    if jet.is_zero():
                        continue
                    val = get(idx[:slot] + (a,) + idx[slot + 1:])
                    if not val.is_zero():
                        acc = acc - jet * val
            if not acc.is_zero():
                out[(m,) + idx] = acc
    return out
