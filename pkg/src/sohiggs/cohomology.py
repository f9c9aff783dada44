"""Riemann-Roch for line bundle symbols, graded deformation complexes, and
the component census for SO(n,n+1).

The deformation complex studied here belongs to the polystable point
V = K^{n-1} + ... + K^{1-n}, W = M + K^{n-2} + ... + K^{2-n} + M^{-1} with
deg M = 0 and every section except the chain of ones equal to zero.  Each
summand gets a weight (V_j = K^{-j}, W_j = K^{-j}, and M, M^{-1} sit in
weight 0) so that ad_eta maps grade k of so(V) + so(W) to grade k+1 of
Hom(V, W) (x) K.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .bundles import CurveContext, DegreeOutOfRange, K, LineBundleSymbol
from .exact_algebra import ExactMatrix

__all__ = [
    "DimReport",
    "GradedTable",
    "HypercohReport",
    "CensusEntry",
    "CensusReport",
    "BadGrade",
    "UnsupportedRank",
    "Mismatch",
    "rr_dims",
    "grade_range",
    "graded_table",
    "lambda2v_closed_form",
    "hypercoh_route_a",
    "hypercoh_route_b",
    "hypercoh_dims",
    "euler_characteristic",
    "expected_dim",
    "ExpectedDim",
    "component_dims",
    "ComponentDims",
    "census",
    "census_formula_closed",
    "census_formula_sum",
]


class BadGrade(ValueError):
    pass


class UnsupportedRank(ValueError):
    pass


class Mismatch(AssertionError):
    pass


# ------------------------------------------------------------ Riemann-Roch


@dataclass(frozen=True)
class DimReport:
    h0: int
    h1: int
    mode: str  # "forced" when determined by degree/type, "generic" otherwise

    def euler(self) -> int:
        return self.h0 - self.h1


def _h0_degree_zero(L: LineBundleSymbol) -> int:
    return 1 if L.is_trivial() else 0


def _k_power_only(L: LineBundleSymbol) -> bool:
    return L.reduced_m_power() == 0 and L.l_power == 0


def rr_dims(L: LineBundleSymbol, ctx: CurveContext) -> DimReport:
    g = ctx.genus
    deg = L.degree(g)
    chi = deg - g + 1
    if deg < 0:
        return DimReport(0, -chi, "forced")
    if deg == 0:
        h0 = _h0_degree_zero(L)
        return DimReport(h0, h0 - chi, "forced")
    if _k_power_only(L) and L.k_power == 1 and deg == 2 * g - 2:
        return DimReport(g, 1, "forced")
    if deg > 2 * g - 2:
        return DimReport(chi, 0, "forced")
    if deg == 2 * g - 2:
        # h1(L) = h0(K L^{-1}) and K L^{-1} has degree 0
        h1 = _h0_degree_zero(K(1) * L.dual())
        return DimReport(chi + h1, h1, "forced")
    h0 = max(chi, 0)
    return DimReport(h0, h0 - chi, "generic")


# ----------------------------------------------------------- graded pieces


@dataclass(frozen=True)
class _Summand:
    space: str  # "V" or "W"
    index: int  # position in the ordered summand list
    weight: int
    bundle: LineBundleSymbol


def _singular_summands(n: int, torsion: str) -> tuple[list[_Summand], list[_Summand]]:
    m = LineBundleSymbol(m_power=1, m_degree=0, torsion=torsion)
    # V listed as K^{n-1}, ..., K^{1-n}; weight j has bundle K^{-j}
    V = [_Summand("V", i, -(n - 1 - 2 * i), K(n - 1 - 2 * i)) for i in range(n)]
    W = [_Summand("W", 0, 0, m)]
    for i in range(1, n):
        a = n - 2 * i
        W.append(_Summand("W", i, -a, K(a)))
    W.append(_Summand("W", n, 0, m.dual()))
    return V, W


def _pairing_partner(size: int, i: int) -> int:
    return size - 1 - i


def _skew_basis(summands: list[_Summand]):
    """Basis of Q-skew endomorphisms for an antidiagonal pairing.

    Yields (source, target, matrix) where the element maps ``source`` into
    ``target`` and ``matrix`` is E_{t,s} - E_{s',t'} (primes = partners).
    """
    r = len(summands)
    seen = set()
    for s in range(r):
        for t in range(r):
            sp, tp = _pairing_partner(r, s), _pairing_partner(r, t)
            key = frozenset({(s, t), (tp, sp)})
            if (s, t) == (tp, sp) or key in seen:
                continue
            seen.add(key)
            rows = [[0] * r for _ in range(r)]
            rows[t][s] += 1
            rows[sp][tp] -= 1
            yield summands[s], summands[t], ExactMatrix(rows)


@dataclass(frozen=True)
class GradedTable:
    n: int
    k: int
    torsion: str
    # (Lambda^2_Q V + Lambda^2_Q W)_k as (label, bundle) pairs
    lambda2: tuple
    # Hom(V, W)_{k+1} (x) K
    hom: tuple

    def lambda2_bundles(self) -> list[LineBundleSymbol]:
        return [b for _, b in self.lambda2]

    def hom_bundles(self) -> list[LineBundleSymbol]:
        return [b for _, b in self.hom]


def grade_range(n: int) -> tuple[int, int]:
    """Grades k for which the complex C_k can be nonzero."""
    return 2 - 2 * n, 2 * n - 4


def _check_grade(n: int, k: int) -> None:
    if n < 2:
        raise UnsupportedRank("the singular shape needs n >= 2")
    lo, hi = grade_range(n)
    if not lo <= k <= hi:
        raise BadGrade(f"grade {k} outside [{lo}, {hi}] for n = {n}")


def _label(a: _Summand, b: _Summand) -> str:
    return f"Hom({a.space}_{a.weight},{b.space}_{b.weight})"


def _all_pieces(n: int, torsion: str):
    V, W = _singular_summands(n, torsion)
    lam = []  # (weight, label, bundle, space, matrix)
    for space, summ in (("V", V), ("W", W)):
        for a, b, mat in _skew_basis(summ):
            lam.append((b.weight - a.weight, _label(a, b), a.bundle.hom_to(b.bundle), space, mat))
    hom = []
    for a in V:
        for b in W:
            hom.append((b.weight - a.weight, _label(a, b), a.bundle.hom_to(b.bundle) * K(1), a.index, b.index))
    return V, W, lam, hom


def graded_table(n: int, k: int, torsion: str = "generic") -> GradedTable:
    _check_grade(n, k)
    _, _, lam, hom = _all_pieces(n, torsion)
    l2 = tuple((lab, bun) for w, lab, bun, _, _ in lam if w == k)
    hk = tuple((lab, bun) for w, lab, bun, _, _ in hom if w == k + 1)
    return GradedTable(n, k, torsion, l2, hk)


def lambda2v_closed_form(n: int, two_k: int) -> list[tuple[int, int]]:
    """(Lambda^2_Q V)_{2k} for 0 <= 2k <= 2n-4 as an explicit sum of Hom(V_a, V_b).

    Returns the (a, b) weight pairs.
    """
    if two_k % 2 or not 0 <= two_k <= 2 * n - 4:
        raise BadGrade(f"closed form covers even 0 <= 2k <= {2 * n - 4}")
    k = two_k // 2
    top = (n - k) // 2 - 1
    return [(1 - n + 2 * j, 1 - n + 2 * j + 2 * k) for j in range(top + 1)]


def _eta_matrix(n: int) -> ExactMatrix:
    """eta with q = mu = nu = 0: entry (i, j) = 1 iff i = j+1 (1-based), i in 2..n."""
    rows = [[0] * n for _ in range(n + 1)]
    for i in range(2, n + 1):
        rows[i - 1][i - 2] = 1
    return ExactMatrix(rows)


# ---------------------------------------------------------- hypercohomology


@dataclass(frozen=True)
class HypercohReport:
    n: int
    genus: int
    torsion: str
    k: int
    h0: int
    h1: int
    h2: int
    route: str
    detail: tuple = ()


def _iso_group(L: LineBundleSymbol) -> tuple:
    return L.iso_key()


def hypercoh_route_a(n: int, g: int, k: int, torsion: str = "generic") -> HypercohReport:
    """Rank bookkeeping of ad_eta, grouped by isomorphism class of line bundle.

    ad_eta(g_V, g_W) = eta g_V - g_W eta maps each basis element of the
    source to a constant combination of Hom(V, W) (x) K basis elements that
    are isomorphic line bundles.  For a class L with constant matrix A_L of
    rank r from L^a to L^b, the long exact sequence splits and gives
    H^0 = h0(L)(a-r), H^1 = h0(L)(b-r) + h1(L)(a-r), H^2 = h1(L)(b-r).
    """
    _check_grade(n, k)
    ctx = CurveContext(g)
    _, _, lam, hom = _all_pieces(n, torsion)
    eta = _eta_matrix(n)
    src = [(lab, bun, space, mat) for w, lab, bun, space, mat in lam if w == k]
    tgt = [(lab, bun, vi, wi) for w, lab, bun, vi, wi in hom if w == k + 1]
    tindex = {(vi, wi): pos for pos, (_, _, vi, wi) in enumerate(tgt)}
    groups_src = defaultdict(list)
    groups_tgt = defaultdict(list)
    for pos, (_, bun, _, _) in enumerate(src):
        groups_src[_iso_group(bun)].append(pos)
    for pos, (_, bun, _, _) in enumerate(tgt):
        groups_tgt[_iso_group(bun)].append(pos)
    # column of the ad_eta matrix for each source element
    columns = []
    for lab, bun, space, mat in src:
        if space == "V":
            image = eta @ mat
        else:
            image = (mat @ eta).scale(-1)
        col = [Fraction(0)] * len(tgt)
        for wi in range(n + 1):
            for vi in range(n):
                c = image[wi, vi]
                if c == 0:
                    continue
                pos = tindex.get((vi, wi))
                if pos is None or _iso_group(tgt[pos][1]) != _iso_group(bun):
                    raise ArithmeticError(f"ad_eta leaves the graded piece at {lab}")
                col[pos] = c
        columns.append(col)
    h0 = h1 = h2 = 0
    detail = []
    for key in sorted(set(groups_src) | set(groups_tgt)):
        s_pos, t_pos = groups_src.get(key, []), groups_tgt.get(key, [])
        bundle = (src[s_pos[0]][1] if s_pos else tgt[t_pos[0]][1])
        if s_pos and t_pos:
            block = ExactMatrix([[columns[s][t] for s in s_pos] for t in t_pos])
            r = block.rank()
        else:
            r = 0
        a, b = len(s_pos), len(t_pos)
        dims = rr_dims(bundle, ctx)
        h0 += dims.h0 * (a - r)
        h1 += dims.h0 * (b - r) + dims.h1 * (a - r)
        h2 += dims.h1 * (b - r)
        detail.append((str(bundle), a, b, r))
    return HypercohReport(n, g, torsion, k, h0, h1, h2, "rank", tuple(detail))


def hypercoh_route_b(n: int, g: int, k: int, torsion: str = "generic") -> HypercohReport:
    """Closed forms: H^1 by grade, H^0 = H^0(End M) in grade 0 only, H^2 = 0."""
    _check_grade(n, k)
    ctx = CurveContext(g)
    m = LineBundleSymbol(m_power=1, m_degree=0, torsion=torsion)
    h0 = 1 if k == 0 else 0
    if k > 0:
        h1 = 0
    elif k == 0:
        h1 = rr_dims(LineBundleSymbol(), ctx).h1
    elif k == -n:
        h1 = rr_dims(m * K(n), ctx).h0 + rr_dims(m.dual() * K(n), ctx).h0
        if n % 2 == 0:
            h1 += rr_dims(K(n), ctx).h0
    elif k % 2 == 0:
        # the surviving bundle Hom(V_{1-n-k}, W_{2-n}) (x) K is K^{-k}
        h1 = rr_dims(K(-k), ctx).h0
    else:
        h1 = 0
    return HypercohReport(n, g, torsion, k, h0, h1, 0, "closed-form")


def euler_characteristic(n: int, g: int, k: int, torsion: str = "generic") -> int:
    """chi(graded so piece) - chi(graded Hom piece) by Riemann-Roch."""
    t = graded_table(n, k, torsion)
    chi = lambda L: L.degree(g) - g + 1
    return sum(chi(b) for b in t.lambda2_bundles()) - sum(chi(b) for b in t.hom_bundles())


def hypercoh_dims(n: int, g: int, torsion: str = "generic", k: int = 0) -> tuple[int, int, int]:
    a = hypercoh_route_a(n, g, k, torsion)
    b = hypercoh_route_b(n, g, k, torsion)
    if (a.h0, a.h1, a.h2) != (b.h0, b.h1, b.h2):
        raise Mismatch(f"n={n} g={g} k={k} {torsion}: rank route {(a.h0, a.h1, a.h2)} "
                       f"vs closed form {(b.h0, b.h1, b.h2)}")
    return a.h0, a.h1, a.h2


# ------------------------------------------------------------- dimensions


@dataclass(frozen=True)
class ExpectedDim:
    n: int
    genus: int
    real_moduli_dim: int
    complex_differentials_dim: int

    @property
    def real_differentials_dim(self) -> int:
        return 2 * self.complex_differentials_dim


def expected_dim(n: int, g: int) -> ExpectedDim:
    """n(2n+1)(2g-2), checked against the real dimension of the Hitchin base."""
    if n < 1 or g < 2:
        raise ValueError("n >= 1 and g >= 2")
    ctx = CurveContext(g)
    real = n * (2 * n + 1) * (2 * g - 2)
    base = sum(rr_dims(K(2 * j), ctx).h0 for j in range(1, n + 1))
    if 2 * base != real:
        raise Mismatch(f"expected dimension {real} != 2 * {base}")
    return ExpectedDim(n, g, real, base)


@dataclass(frozen=True)
class ComponentDims:
    n: int
    genus: int
    d: int
    base_dim: int
    fiber_rank: int
    differentials_dim: int

    @property
    def total(self) -> int:
        return self.base_dim + self.fiber_rank + self.differentials_dim


def component_dims(n: int, g: int, d: int) -> ComponentDims:
    """Sym^{n(2g-2)-d}(X) base, rank d+(2n-1)(g-1) fibre, plus the q_2..q_{2n-2} directions."""
    top = n * (2 * g - 2)
    if not 0 < d <= top:
        raise DegreeOutOfRange(f"d = {d} outside (0, {top}]")
    ctx = CurveContext(g)
    diffs = sum(rr_dims(K(2 * j), ctx).h0 for j in range(1, n))
    return ComponentDims(n, g, d, top - d, d + (2 * n - 1) * (g - 1), diffs)


# ----------------------------------------------------------------- census


@dataclass(frozen=True)
class CensusEntry:
    label: str
    dimension: int
    contains_compact_zariski: bool
    kind: str


@dataclass(frozen=True)
class CensusReport:
    n: int
    genus: int
    entries: tuple
    totals: dict
    caveat: str | None = None

    @property
    def total(self) -> int:
        return len(self.entries)


def census_formula_closed(n: int, g: int) -> int:
    return 2 ** (2 * g + 2) + 2 ** (2 * g + 1) - 1 + n * (2 * g - 2)


def census_formula_sum(n: int, g: int) -> int:
    return 2 ** (2 * g + 2) + 1 + n * (2 * g - 2) + 2 * (2 ** (2 * g) - 1)


def census(n: int, g: int) -> CensusReport:
    if n < 2:
        raise UnsupportedRank("the census needs n >= 2")
    dim = expected_dim(n, g).real_moduli_dim
    entries = []
    for c in range(2 ** (2 * g + 2)):
        entries.append(CensusEntry(f"compact-type[{c}]", dim, True, "compact-type"))
    for d in range(1, n * (2 * g - 2) + 1):
        entries.append(CensusEntry(f"X_{d}", dim, False, "smooth"))
    entries.append(CensusEntry("X_0", dim, False, "singular"))
    for sw1 in range(1, 2 ** (2 * g)):
        for sw2 in (0, 1):
            entries.append(CensusEntry(f"X_sw1={sw1}^sw2={sw2}", dim, False, "sw"))
    kinds = defaultdict(int)
    for e in entries:
        kinds[e.kind] += 1
    total = len(entries)
    f1, f2 = census_formula_closed(n, g), census_formula_sum(n, g)
    if not f1 == f2 == total:
        raise Mismatch(f"census count {total}, formulas {f1} and {f2}")
    totals = dict(sorted(kinds.items()))
    totals["total"] = total
    caveat = "n = 2 is the Hermitian case; components are counted as for n >= 3" if n == 2 else None
    return CensusReport(n, g, tuple(entries), totals, caveat)
