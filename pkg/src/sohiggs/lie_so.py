"""Matrix models of so(n,n-1), so(n,n) and so(n,n+1).

Each group preserves a form with ones on the antidiagonal.  The odd
dimensional groups have an extra middle entry: +1 for SO(n,n-1) and -1 for
SO(n,n+1).  With these forms the diagonal matrices
diag(x_1, ..., x_r, [0], -x_r, ..., -x_1) make up a maximal split torus
(r = n-1 for SO(n,n-1), r = n otherwise) and
the upper triangular matrices carry the positive root spaces, so the simple
root vectors can be written with elementary matrices E_{ij} (1-based).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

from .exact_algebra import DimensionMismatch, ExactMatrix, commutator

__all__ = [
    "Family",
    "GroupKind",
    "RootDatum",
    "ParabolicDatum",
    "UnsupportedTheta",
    "build_form",
    "in_lie_algebra",
    "in_group",
    "root_datum",
    "parabolic_datum",
    "torus_element",
    "lie_algebra_dimension",
    "levi_torus_weight",
    "levi_torus_matrix",
    "light_cone_basis",
    "bracket_check",
]


class Family(str, Enum):
    SO_n_nminus1 = "so_nn1"
    SO_n_n = "so_nn"
    SO_n_nplus1 = "so_nnp1"


class UnsupportedTheta(ValueError):
    pass


@dataclass(frozen=True)
class GroupKind:
    family: Family
    n: int

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family(self.family))
        if self.n < 2:
            raise ValueError("groups are only modelled for n >= 2")

    @property
    def dim(self) -> int:
        """Size of the matrices."""
        return {Family.SO_n_nminus1: 2 * self.n - 1,
                Family.SO_n_n: 2 * self.n,
                Family.SO_n_nplus1: 2 * self.n + 1}[self.family]

    @property
    def rank(self) -> int:
        """Real rank, i.e. the number of simple roots."""
        return self.n - 1 if self.family is Family.SO_n_nminus1 else self.n

    @property
    def centre(self) -> int:
        """Middle entry of the form (0 if there is no middle)."""
        return {Family.SO_n_nminus1: 1, Family.SO_n_n: 0, Family.SO_n_nplus1: -1}[self.family]

    def label(self) -> str:
        q = {Family.SO_n_nminus1: self.n - 1, Family.SO_n_n: self.n,
             Family.SO_n_nplus1: self.n + 1}[self.family]
        return f"SO({self.n},{q})"

    def __str__(self):
        return self.label()


@lru_cache(maxsize=None)
def build_form(kind: GroupKind) -> ExactMatrix:
    m = kind.dim
    rows = [[0] * m for _ in range(m)]
    for i in range(m):
        rows[i][m - 1 - i] = 1
    if m % 2:
        rows[m // 2][m // 2] = kind.centre
    return ExactMatrix(rows)


def _antidiag_signs(kind: GroupKind) -> list[int]:
    """eps_i = J[i, m+1-i]; used to write the partner of a root vector."""
    j = build_form(kind)
    m = kind.dim
    return [int(j[i, m - 1 - i]) for i in range(m)]


def in_lie_algebra(a: ExactMatrix, kind: GroupKind) -> bool:
    m = kind.dim
    if a.shape != (m, m):
        raise DimensionMismatch(f"{a.shape} is not {m}x{m}")
    j = build_form(kind)
    return (a.T @ j + j @ a).is_zero()


def in_group(g: ExactMatrix, kind: GroupKind) -> bool:
    m = kind.dim
    if g.shape != (m, m):
        raise DimensionMismatch(f"{g.shape} is not {m}x{m}")
    j = build_form(kind)
    return g.T @ j @ g == j


def lie_algebra_dimension(kind: GroupKind) -> int:
    """Dimension of {A : A^T J + J A = 0}, computed by linear algebra."""
    m = kind.dim
    j = build_form(kind)
    # the map A -> A^T J + J A written in the E_{ij} basis
    cols = []
    for r in range(1, m + 1):
        for c in range(1, m + 1):
            e = ExactMatrix.elementary(m, r, c)
            cols.append((e.T @ j + j @ e).entries())
    mat = ExactMatrix(list(zip(*cols)))
    return m * m - mat.rank()


def torus_element(kind: GroupKind, xs: Sequence) -> ExactMatrix:
    """diag(x_1..x_r, [0], -x_r..-x_1) with r the real rank."""
    r = kind.rank
    if len(xs) != r:
        raise ValueError(f"need {r} torus coordinates")
    vals = [Fraction(x) for x in xs]
    mid = [0] if kind.dim % 2 else []
    return ExactMatrix.diagonal(vals + mid + [-x for x in reversed(vals)])


def _pair(kind: GroupKind, p: int, q: int, coeff=1) -> ExactMatrix:
    """coeff*E_{p,q} plus the partner entry forced by membership.

    For A in the Lie algebra, A_{q',p'} = -(eps_{p'}/eps_q) A_{p,q} where
    i' = m+1-i.  When (p, q) is its own partner the single entry is returned.
    """
    m = kind.dim
    eps = _antidiag_signs(kind)
    pp, qp = m + 1 - p, m + 1 - q
    a = ExactMatrix.elementary(m, p, q, coeff)
    if (qp, pp) == (p, q):
        return a
    partner = Fraction(-eps[pp - 1] * coeff, eps[q - 1])
    return a + ExactMatrix.elementary(m, qp, pp, partner)


@dataclass(frozen=True)
class RootDatum:
    kind: GroupKind
    torus_dim: int
    # simple root j (1-based) -> integer coefficients on x_1..x_r
    simple_roots: dict
    # simple root j -> list of basis matrices of its root space
    root_spaces: dict

    def evaluate(self, j: int, xs: Sequence) -> Fraction:
        return sum((Fraction(c) * Fraction(x) for c, x in zip(self.simple_roots[j], xs)), Fraction(0))

    def root_vector(self, j: int) -> ExactMatrix:
        return self.root_spaces[j][0]


def _simple_root_vector(kind: GroupKind, j: int) -> ExactMatrix:
    n, m = kind.n, kind.dim
    fam = kind.family
    if fam is Family.SO_n_nminus1:
        if j <= n - 2:
            return _pair(kind, j, j + 1)
        # short root x_{n-1}: E_{n-1,n} - E_{n,n+1}
        return _pair(kind, n - 1, n)
    if fam is Family.SO_n_n:
        if j <= n - 1:
            return _pair(kind, j, j + 1)
        # x_{n-1} + x_n: E_{n-1,n+1} - E_{n,n+2}
        return _pair(kind, n - 1, n + 1)
    if j <= n - 1:
        return _pair(kind, j, j + 1)
    # short root x_n of so(n,n+1): E_{n,n+1} + E_{n+1,n+2}
    return _pair(kind, n, n + 1)


def _simple_root_functional(kind: GroupKind, j: int) -> tuple[int, ...]:
    n = kind.n
    c = [0] * kind.rank
    fam = kind.family
    last = kind.rank
    if j < last:
        c[j - 1], c[j] = 1, -1
    elif fam is Family.SO_n_nminus1:
        c[n - 2] = 1
    elif fam is Family.SO_n_n:
        c[n - 2], c[n - 1] = 1, 1
    else:
        c[n - 1] = 1
    return tuple(c)


@lru_cache(maxsize=None)
def root_datum(kind: GroupKind) -> RootDatum:
    r = kind.rank
    roots = {j: _simple_root_functional(kind, j) for j in range(1, r + 1)}
    spaces = {j: [_simple_root_vector(kind, j)] for j in range(1, r + 1)}
    return RootDatum(kind=kind, torus_dim=kind.rank, simple_roots=roots, root_spaces=spaces)


@dataclass(frozen=True)
class ParabolicDatum:
    kind: GroupKind
    theta: tuple[int, ...]
    # sizes of the diagonal blocks of the Levi factor
    levi_blocks: tuple[int, ...]
    # beta in theta -> basis of the graded piece u_beta
    pieces: dict = field(default_factory=dict)

    def piece_dim(self, beta: int) -> int:
        return len(self.pieces[beta])


def light_cone_basis(n: int) -> list[ExactMatrix]:
    """Basis (X1, X2, X3) of u_{beta_{n-1}} for SO(n,n+1) with Theta = Delta minus beta_n.

    X1 = E_{n-1,n} - E_{n+2,n+3}, X2 = E_{n-1,n+1} + E_{n+1,n+3},
    X3 = E_{n-1,n+2} - E_{n,n+3}.
    """
    kind = GroupKind(Family.SO_n_nplus1, n)
    return [_pair(kind, n - 1, n), _pair(kind, n - 1, n + 1), _pair(kind, n - 1, n + 2)]


def parabolic_datum(kind: GroupKind, theta: Sequence[int] | None = None) -> ParabolicDatum:
    """Graded pieces for the two supported configurations.

    Borel (Theta = all simple roots) for SO(n,n-1) and SO(n,n); Theta =
    {beta_1..beta_{n-1}} for SO(n,n+1), where u_{beta_{n-1}} is three
    dimensional.
    """
    n = kind.n
    full = tuple(range(1, kind.rank + 1))
    if kind.family is Family.SO_n_nplus1:
        expected = tuple(range(1, n))
    else:
        expected = full
    theta = expected if theta is None else tuple(sorted(theta))
    if theta != expected:
        raise UnsupportedTheta(f"{kind}: only Theta={expected} is supported, got {theta}")
    rd = root_datum(kind)
    if kind.family is Family.SO_n_nplus1:
        pieces = {j: rd.root_spaces[j] for j in range(1, n - 1)}
        pieces[n - 1] = light_cone_basis(n)
        blocks = (1,) * (n - 1) + (3,) + (1,) * (n - 1)
    else:
        pieces = {j: rd.root_spaces[j] for j in theta}
        blocks = (1,) * kind.dim
    return ParabolicDatum(kind=kind, theta=theta, levi_blocks=blocks, pieces=pieces)


def levi_torus_weight(kind: GroupKind, beta: int, ts: Sequence) -> Fraction:
    """Scalar by which t = diag(t_1..t_k, A, ...) acts on u_beta by conjugation.

    For the Borel case of SO(n,n-1) this is t_i/t_{i+1} on u_{beta_i} (i<n-1)
    and t_{n-1} on the short root space.
    """
    ts = [Fraction(t) for t in ts]
    r = kind.rank
    if beta < r:
        return ts[beta - 1] / ts[beta]
    if kind.family is Family.SO_n_nminus1:
        return ts[kind.n - 2]
    if kind.family is Family.SO_n_n:
        return ts[kind.n - 2] * ts[kind.n - 1]
    return ts[kind.n - 1]


def levi_torus_matrix(kind: GroupKind, ts: Sequence) -> ExactMatrix:
    """diag(t_1..t_r, [1], t_r^{-1}..t_1^{-1})."""
    ts = [Fraction(t) for t in ts]
    if len(ts) != kind.rank:
        raise ValueError(f"need {kind.rank} torus entries")
    mid = [1] if kind.dim % 2 else []
    return ExactMatrix.diagonal(ts + mid + [1 / t for t in reversed(ts)])


def bracket_check(kind: GroupKind, xs: Sequence) -> bool:
    """[t, X_beta] = beta(t) X_beta for every simple root vector."""
    rd = root_datum(kind)
    t = torus_element(kind, xs)
    for j, basis in rd.root_spaces.items():
        for x in basis:
            if commutator(t, x) != x.scale(rd.evaluate(j, xs)):
                return False
    return True
