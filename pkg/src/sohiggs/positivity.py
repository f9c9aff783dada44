"""Positive semigroups, their factorisation, embeddings and positive triples.

The positive semigroup of each supported (group, Theta) pair is the image of
a product of exponentials of cone elements, arranged in blocks that follow a
reduced expression of the longest element:

* SO(n,n-1), Borel:  B_1 ... B_{n-1},  B_j over s_{n-j} .. s_{n-1} .. s_{n-j}
* SO(n,n),   Borel:  D_1 D_2 D_3 ... D_n, D_1 = exp(v X_n), D_2 = exp(v X_{n-1})
* SO(n,n+1), Theta:  B_1 ... B_{n-1} over sigma letters, the middle letter
  being a point of the light cone in the three dimensional piece.

:func:`factorize` inverts this map.  Block j only touches the coordinates
in a window [s, m+1-s], and the blocks before it live in a strictly smaller
window, so row s of the matrix already equals row s of the last block.
That row determines the block's parameters one pair at a time, working
inwards; the block is then divided off and the next row is read.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence, Union

from .exact_algebra import (
    QSqrt2,
    DimensionMismatch,
    ExactMatrix,
    mat_exp_nilpotent,
    to_scalar,
)
from .lie_so import Family, GroupKind, build_form, in_group, light_cone_basis, root_datum
from .weyl import longest_word

__all__ = [
    "random_rational",
    "random_cone_value",
    "random_params",
    "Cone",
    "SemigroupParams",
    "make_params",
    "IsotropicFlag",
    "InvalidParams",
    "NotPositive",
    "NotUnipotent",
    "NotInGroup",
    "NotTransverse",
    "MalformedFlag",
    "cones",
    "schedule",
    "semigroup_element",
    "word_element",
    "factorize",
    "is_positive",
    "embedding_matrix",
    "embed",
    "embed_group",
    "embedding_case_table",
    "map_params",
    "embedding_positivity_check",
    "standard_flag",
    "opposite_flag",
    "flag_dims",
    "translate_flag",
    "flag_transverse",
    "unipotent_between",
    "triple_is_positive",
]

Scalar = Union[Fraction, QSqrt2]
Entry = Union[Scalar, tuple]


class InvalidParams(ValueError):
    pass


class NotUnipotent(ValueError):
    pass


class NotInGroup(ValueError):
    pass


class NotTransverse(ValueError):
    pass


class MalformedFlag(ValueError):
    pass


@dataclass(frozen=True)
class NotPositive:
    """Returned (not raised) when a unipotent element is outside the semigroup."""

    reason: str

    def __bool__(self):
        return False


# ------------------------------------------------------------------ cones


@dataclass(frozen=True)
class Cone:
    kind: GroupKind
    root: int
    basis: tuple
    predicate: str  # "positive-ray" or "light-cone"

    def contains(self, value: Entry) -> bool:
        if self.predicate == "positive-ray":
            return not isinstance(value, tuple) and value > 0
        if not (isinstance(value, tuple) and len(value) == 3):
            return False
        x, y, z = value
        return 2 * x * z - y * y > 0 and x > 0

    def element(self, value: Entry) -> ExactMatrix:
        """The Lie algebra element with these coordinates."""
        if self.predicate == "positive-ray":
            return self.basis[0].scale(value)
        x, y, z = value
        b = self.basis
        return b[0].scale(x) + b[1].scale(y) + b[2].scale(z)


def _is_theta(kind: GroupKind) -> bool:
    return kind.family is Family.SO_n_nplus1


@lru_cache(maxsize=None)
def cones(kind: GroupKind) -> dict[int, Cone]:
    """Cone attached to each letter of the schedule, keyed by root index.

    Cached; callers must not mutate the returned dict.
    """
    rd = root_datum(kind)
    out = {}
    if _is_theta(kind):
        for j in range(1, kind.n - 1):
            out[j] = Cone(kind, j, tuple(rd.root_spaces[j]), "positive-ray")
        out[kind.n - 1] = Cone(kind, kind.n - 1, tuple(light_cone_basis(kind.n)), "light-cone")
    else:
        for j, basis in rd.root_spaces.items():
            out[j] = Cone(kind, j, tuple(basis), "positive-ray")
    return out


def schedule(kind: GroupKind) -> tuple[tuple[int, ...], ...]:
    """Letters of each block of the canonical factorisation.

    For SO(n,n+1) the letters are sigma indices; sigma_{n-1} is the light cone.
    """
    return longest_word(kind).blocks


# --------------------------------------------------------------- params


@dataclass(frozen=True)
class SemigroupParams:
    kind: GroupKind
    blocks: tuple[tuple[Entry, ...], ...]

    def letters(self) -> list[tuple[int, Entry]]:
        sched = schedule(self.kind)
        if len(sched) != len(self.blocks):
            raise InvalidParams(f"expected {len(sched)} blocks, got {len(self.blocks)}")
        out = []
        for word, vals in zip(sched, self.blocks):
            if len(word) != len(vals):
                raise InvalidParams(f"block {word} needs {len(word)} parameters, got {len(vals)}")
            out.extend(zip(word, vals))
        return out

    def validate(self) -> None:
        cs = cones(self.kind)
        for j, v in self.letters():
            if not cs[j].contains(v):
                raise InvalidParams(f"parameter {v} outside the cone of root {j}")

    def flat(self) -> list[Entry]:
        return [v for b in self.blocks for v in b]


def _norm_entry(v):
    if isinstance(v, tuple):
        return tuple(to_scalar(x) for x in v)
    return to_scalar(v)


def make_params(kind: GroupKind, blocks: Sequence[Sequence]) -> SemigroupParams:
    return SemigroupParams(kind, tuple(tuple(_norm_entry(v) for v in b) for b in blocks))


def random_rational(rng, bound: int = 100, positive: bool = True) -> Fraction:
    """p/q with 1 <= |p|, q <= bound; sign random unless ``positive``."""
    p = rng.randint(1, bound)
    if not positive and rng.random() < 0.5:
        p = -p
    return Fraction(p, rng.randint(1, bound))


def random_cone_value(cone: Cone, rng, bound: int = 100) -> Entry:
    if cone.predicate == "positive-ray":
        return random_rational(rng, bound)
    while True:
        x, z = random_rational(rng, bound), random_rational(rng, bound)
        y = random_rational(rng, bound, positive=False)
        if 2 * x * z - y * y > 0:
            return (x, y, z)


def random_params(kind: GroupKind, rng, bound: int = 100) -> SemigroupParams:
    """Seeded sample of strictly positive parameters for every letter of the schedule."""
    cs = cones(kind)
    return make_params(kind, [[random_cone_value(cs[j], rng, bound) for j in word] for word in schedule(kind)])


def _sparse(mat: ExactMatrix) -> list[tuple[int, int, Scalar]]:
    return [(i, j, x) for i, r in enumerate(mat) for j, x in enumerate(r) if x]


def _sparse_square(terms: list) -> list:
    acc: dict = {}
    for i, k, a in terms:
        for k2, j, b in terms:
            if k == k2:
                acc[(i, j)] = acc.get((i, j), 0) + a * b
    return [(i, j, x) for (i, j), x in acc.items() if x]


def _letter_terms(cone: Cone, value: Entry) -> list[tuple[int, int, Scalar]]:
    """Strictly upper entries of exp(N) - I for the cone element N; N^3 = 0."""
    terms: dict = {}
    if cone.predicate == "positive-ray":
        pairs = [(value, cone.basis[0])]
    else:
        pairs = list(zip(value, cone.basis))
    first = []
    for c, b in pairs:
        if c:
            first.extend((i, j, c * x) for i, j, x in _sparse(b))
    for i, j, x in first:
        terms[(i, j)] = terms.get((i, j), 0) + x
    for i, j, x in _sparse_square(first):
        terms[(i, j)] = terms.get((i, j), 0) + x / 2
    return sorted(((i, j, x) for (i, j), x in terms.items() if x), key=lambda t: -t[1])


def _apply_right(rows: list[list], terms: list) -> None:
    """rows <- rows * (I + S) in place, S strictly upper; terms sorted by column descending."""
    for i, j, x in terms:
        for r in rows:
            if r[i]:
                r[j] = r[j] + r[i] * x


def _exp_letter(cone: Cone, value: Entry) -> ExactMatrix:
    rows = [list(r) for r in ExactMatrix.identity(cone.basis[0].rows)]
    _apply_right(rows, _letter_terms(cone, value))
    return ExactMatrix(rows)


def word_element(kind: GroupKind, letters: Sequence[tuple[int, Entry]]) -> ExactMatrix:
    """Product of exp(value * X_letter) in the given order (no cone checks)."""
    return _right_multiply(ExactMatrix.identity(kind.dim), kind, letters)


def _right_multiply(g: ExactMatrix, kind: GroupKind, letters) -> ExactMatrix:
    cs = cones(kind)
    rows = [list(r) for r in g]
    for j, v in letters:
        _apply_right(rows, _letter_terms(cs[j], _norm_entry(v)))
    return ExactMatrix(rows)


def semigroup_element(kind: GroupKind, params: SemigroupParams | Sequence[Sequence]) -> ExactMatrix:
    if not isinstance(params, SemigroupParams):
        params = make_params(kind, params)
    params.validate()
    return word_element(kind, params.letters())


# ----------------------------------------------------------- factorize


class _Fail(Exception):
    pass


def _div(a, b):
    if not b:
        raise _Fail("division by zero while peeling")
    return a / b


def _row_times_exp(row: list, s: int, m: int, t) -> list:
    """row * exp(t X) for X = E_{s,s+1} - E_{m-s,m+1-s} (1-based s); X^2 = 0."""
    out = list(row)
    out[s] = out[s] + t * row[s - 1]
    out[m - s] = out[m - s] - t * row[m - s - 1]
    return out


def _peel_block(kind: GroupKind, word: tuple[int, ...], rho: list) -> list:
    """Recover the parameters of one block from the row it starts."""
    m = kind.dim
    n = kind.n
    fam = kind.family
    centre_start = _centre_index(kind)
    outer = [j for j in word[: len(word) // 2] if j < centre_start]
    s = word[0]
    if rho[s - 1] != 1:
        raise _Fail("pivot entry is not 1")
    # outside the window the row must vanish
    if any(rho[i] for i in range(m) if i < s - 1 or i > m - s):
        raise _Fail("row leaks outside the block window")
    us, ws = [], []
    row = rho
    for t in outer:
        # row = e_t + w e_{t+1} + u (r - w r_{m-t} e_{m+1-t}),  r_{t+1} = 1
        w = -_div(row[m - t], row[m - t - 1])
        u = row[t] - w
        nxt = _row_times_exp(row, t, m, -w)
        nxt[t - 1] = nxt[t - 1] - 1
        nxt = [_div(x, u) for x in nxt]
        if any(nxt[i] for i in range(m) if i < t or i > m - t - 1):
            raise _Fail("inner row leaks outside its window")
        us.append(u)
        ws.append(w)
        row = nxt
    c = centre_start
    if row[c - 1] != 1:
        raise _Fail("centre pivot is not 1")
    if fam is Family.SO_n_nminus1:
        v = row[c]
        if row[c + 1] != -v * v / 2 or any(row[i] for i in range(c + 2, m)):
            raise _Fail("centre row inconsistent with a short root exponential")
        centre = [v]
    elif fam is Family.SO_n_n:
        a, b = row[c], row[c + 1]
        if row[c + 2] != -a * b or any(row[i] for i in range(c + 3, m)):
            raise _Fail("centre row inconsistent with commuting pair")
        centre = [a, b]
    else:
        x, y, z = row[c], row[c + 1], row[c + 2]
        if row[c + 3] != (y * y - 2 * x * z) / 2 or any(row[i] for i in range(c + 4, m)):
            raise _Fail("centre row inconsistent with a light cone exponential")
        centre = [(x, y, z)]
    return us + centre + ws[::-1]


def _centre_index(kind: GroupKind) -> int:
    # the first coordinate moved by the centre letter(s) of every block
    return kind.n - 1


def _merge_base(kind: GroupKind) -> bool:
    return kind.family is Family.SO_n_n


def _check_unipotent_group(kind: GroupKind, u: ExactMatrix) -> None:
    m = kind.dim
    if u.shape != (m, m):
        raise DimensionMismatch(f"{u.shape} is not {m}x{m}")
    if not u.is_upper_unitriangular():
        raise NotUnipotent("matrix is not upper unitriangular")
    if not in_group(u, kind):
        raise NotInGroup(f"matrix does not preserve the form of {kind}")


def factorize(kind: GroupKind, u: ExactMatrix, *, certify: bool = True) -> SemigroupParams | NotPositive:
    """Parameters p with semigroup_element(kind, p) == u, or NotPositive."""
    _check_unipotent_group(kind, u)
    sched = schedule(kind)
    cs = cones(kind)
    blocks: list = [None] * len(sched)
    cur = u
    k = len(sched) - 1
    try:
        while k >= 0:
            if _merge_base(kind) and k == 1:
                # D_1 D_2 = exp(v_n X_n) exp(v_{n-1} X_{n-1}) read from row n-1 together
                n = kind.n
                row = list(cur.row(n - 2))
                vals = _peel_block(kind, (n - 1, n), row)
                a, b = vals
                blocks[0], blocks[1] = (b,), (a,)
                cur = _divide_off(cur, kind, [(n, b), (n - 1, a)])
                k = -1
                break
            word = sched[k]
            s = min(word)
            row = list(cur.row(s - 1))
            vals = _peel_block(kind, word, row)
            blocks[k] = tuple(vals)
            cur = _divide_off(cur, kind, list(zip(word, vals)))
            k -= 1
    except _Fail as exc:
        return NotPositive(str(exc))
    if not cur.is_identity():
        return NotPositive("residual after peeling is not the identity")
    params = SemigroupParams(kind, tuple(tuple(b) for b in blocks))
    for j, v in params.letters():
        if not cs[j].contains(v):
            return NotPositive(f"parameter {v} of root {j} is not inside its cone")
    if certify and word_element(kind, params.letters()) != u:
        return NotPositive("certificate failed")
    return params


def _negate(v: Entry) -> Entry:
    return tuple(-x for x in v) if isinstance(v, tuple) else -v


def _divide_off(g: ExactMatrix, kind: GroupKind, letters: list) -> ExactMatrix:
    """g * (product of letters)^{-1}."""
    return _right_multiply(g, kind, [(j, _negate(v)) for j, v in reversed(letters)])


def is_positive(kind: GroupKind, u: ExactMatrix) -> bool:
    return not isinstance(factorize(kind, u), NotPositive)


# ---------------------------------------------------------- embeddings


def _embedding_kinds(source: GroupKind) -> GroupKind:
    if source.family is Family.SO_n_nminus1:
        return GroupKind(Family.SO_n_n, source.n)
    if source.family is Family.SO_n_n:
        return GroupKind(Family.SO_n_nplus1, source.n)
    raise ValueError(f"no embedding out of {source}")


def embedding_matrix(source: GroupKind) -> ExactMatrix:
    """Isometry P from the source vector space into the target one.

    iota_{n,n-1}: e_n -> (e_n + e_{n+1})/sqrt2, the later basis vectors shift
    by one.  iota_{n,n}: a zero coordinate is inserted in the middle.
    """
    n = source.n
    ms = source.dim
    mt = ms + 1
    cols = []
    for i in range(1, ms + 1):
        col = [Fraction(0)] * mt
        if i < n:
            col[i - 1] = Fraction(1)
        elif i > n or source.family is Family.SO_n_n and i == n:
            tgt = i + 1 if i > n else i
            col[tgt - 1] = Fraction(1)
        else:
            half = QSqrt2(0, Fraction(1, 2))  # 1/sqrt2
            col[n - 1] = half
            col[n] = half
        cols.append(col)
    return ExactMatrix.from_columns(cols)


def _pseudo_inverse(source: GroupKind) -> ExactMatrix:
    target = _embedding_kinds(source)
    p = embedding_matrix(source)
    return build_form(source) @ p.T @ build_form(target)


def embed(source: GroupKind, a: ExactMatrix) -> ExactMatrix:
    """Lie algebra embedding X -> P X P^+."""
    if a.shape != (source.dim, source.dim):
        raise DimensionMismatch(f"{a.shape} does not match {source}")
    p = embedding_matrix(source)
    return p @ a @ _pseudo_inverse(source)


def embed_group(source: GroupKind, g: ExactMatrix) -> ExactMatrix:
    """Group embedding g -> P g P^+ + (I - P P^+)."""
    if g.shape != (source.dim, source.dim):
        raise DimensionMismatch(f"{g.shape} does not match {source}")
    p = embedding_matrix(source)
    pp = _pseudo_inverse(source)
    proj = p @ pp
    return p @ g @ pp + (ExactMatrix.identity(proj.rows) - proj)


def embedding_case_table(source: GroupKind, i: int, j: int) -> list[tuple[int, int]] | None:
    """Literal reading of the case tables for iota(E_{ij}); None where no case applies.

    Returns the list of target elementary matrices (coefficient one each).
    """
    n = source.n
    if source.family is Family.SO_n_nminus1:
        if i < n and j < n:
            return [(i, j)]
        if j == n:
            return [(i, n), (i, n + 1)]
        if n + 1 <= i <= 2 * n - 1 and j < n:
            return [(i + 1, j)]
        if i < n and n + 1 <= j <= 2 * n - 1:
            return [(i, j + 1)]
        if n + 1 <= i <= 2 * n - 1 and n + 1 <= j <= 2 * n - 1:
            return [(i + 1, j + 1)]
        return None
    if source.family is Family.SO_n_n:
        if i <= n and j <= n:
            return [(i, j)]
        if n + 1 <= i <= 2 * n and j < n:
            return [(i + 1, j)]
        if i < n and n + 1 <= j <= 2 * n:
            return [(i, j + 1)]
        if n + 1 <= i <= 2 * n and n + 1 <= j <= 2 * n:
            return [(i + 1, j + 1)]
        return None
    raise ValueError(f"no embedding out of {source}")


def map_params(source: GroupKind, params: SemigroupParams) -> SemigroupParams:
    """Parameter map carrying F_source(p) to F_target(map(p))."""
    target = _embedding_kinds(source)
    blocks = params.blocks
    out: list[tuple] = []
    if source.family is Family.SO_n_nminus1:
        inv = QSqrt2(0, Fraction(1, 2))  # 1/sqrt2
        (v,) = blocks[0]
        out.append((v * inv,))
        out.append((v * inv,))
        for b in blocks[1:]:
            k = len(b) // 2
            us, v, ws = b[:k], b[k], b[k + 1:]
            out.append(tuple(us) + (v * inv, v * inv) + tuple(ws))
    else:
        (vn,) = blocks[0]
        (vn1,) = blocks[1]
        out.append(((vn1, Fraction(0), vn),))
        for b in blocks[2:]:
            k = len(b) // 2 - 1
            us, a, c, ws = b[:k], b[k], b[k + 1], b[k + 2:]
            out.append(tuple(us) + ((a, Fraction(0), c),) + tuple(ws))
    return SemigroupParams(target, tuple(out))


@dataclass(frozen=True)
class EmbeddingReport:
    source: str
    target: str
    identity_holds: bool
    target_params_valid: bool
    target_positive: bool | None
    detail: str = ""

    def ok(self) -> bool:
        return self.identity_holds and self.target_params_valid


def embedding_positivity_check(
    source: GroupKind, params: SemigroupParams, *, factorize_target: bool = False
) -> EmbeddingReport:
    """Check iota(F_source(p)) == F_target(map(p)) exactly in Q(sqrt2)."""
    target = _embedding_kinds(source)
    lhs = embed_group(source, semigroup_element(source, params))
    mapped = map_params(source, params)
    try:
        mapped.validate()
        valid = True
    except InvalidParams as exc:
        return EmbeddingReport(str(source), str(target), False, False, None, str(exc))
    rhs = word_element(target, mapped.letters())
    same = lhs == rhs
    pos = None
    if factorize_target:
        pos = is_positive(target, lhs)
    return EmbeddingReport(str(source), str(target), same, valid, pos)


# ---------------------------------------------------------------- flags


def flag_dims(kind: GroupKind) -> tuple[int, ...]:
    if kind.family is Family.SO_n_nminus1:
        return tuple(range(1, kind.n))
    if kind.family is Family.SO_n_n:
        return tuple(range(1, kind.n + 1))
    return tuple(range(1, kind.n))


@dataclass(frozen=True)
class IsotropicFlag:
    kind: GroupKind
    # dimension -> basis matrix (m x dim), nested
    spaces: tuple[ExactMatrix, ...]

    def __post_init__(self):
        dims = flag_dims(self.kind)
        if len(self.spaces) != len(dims):
            raise MalformedFlag(f"need subspaces of dimensions {dims}")
        j = build_form(self.kind)
        prev = None
        for d, b in zip(dims, self.spaces):
            if b.rows != self.kind.dim or b.cols != d or b.rank() != d:
                raise MalformedFlag(f"subspace of dimension {d} has basis of shape {b.shape}")
            if not (b.T @ j @ b).is_zero():
                raise MalformedFlag(f"subspace of dimension {d} is not isotropic")
            if prev is not None and prev.hstack(b).rank() != d:
                raise MalformedFlag("subspaces are not nested")
            prev = b

    def space(self, d: int) -> ExactMatrix:
        return self.spaces[flag_dims(self.kind).index(d)]


def standard_flag(kind: GroupKind) -> IsotropicFlag:
    m = kind.dim
    ident = ExactMatrix.identity(m)
    return IsotropicFlag(kind, tuple(ident.submatrix(range(m), range(d)) for d in flag_dims(kind)))


def opposite_flag(kind: GroupKind) -> IsotropicFlag:
    m = kind.dim
    ident = ExactMatrix.identity(m)
    return IsotropicFlag(
        kind, tuple(ident.submatrix(range(m), range(m - 1, m - 1 - d, -1)) for d in flag_dims(kind))
    )


def translate_flag(g: ExactMatrix, x: IsotropicFlag) -> IsotropicFlag:
    return IsotropicFlag(x.kind, tuple(g @ b for b in x.spaces))


def _perp(kind: GroupKind, b: ExactMatrix) -> ExactMatrix:
    j = build_form(kind)
    null = (b.T @ j).nullspace()
    return ExactMatrix.from_columns(null)


def flag_transverse(x: IsotropicFlag, y: IsotropicFlag) -> bool:
    """V_d(x) meets V_d(y)^perp trivially for every d."""
    if x.kind != y.kind:
        raise MalformedFlag("flags live in different groups")
    m = x.kind.dim
    for bx, by in zip(x.spaces, y.spaces):
        if bx.hstack(_perp(x.kind, by)).rank() != m:
            return False
    return True


def _same_span(a: ExactMatrix, b: ExactMatrix) -> bool:
    return a.rank() == b.rank() == a.hstack(b).rank()


def _adapted_basis(x: IsotropicFlag) -> tuple[ExactMatrix, list[int]]:
    """Matrix whose trailing d columns span the d-th space of the extended flag.

    The flag is extended by perpendiculars, so the block sizes match the Levi
    blocks.  Returns the matrix and the block sizes (left to right).
    """
    kind = x.kind
    m = kind.dim
    chain = list(x.spaces) + [_perp(kind, b) for b in reversed(x.spaces)]
    chain.append(ExactMatrix.identity(m))
    cols: list[tuple] = []
    sizes: list[int] = []
    for b in chain:
        cur_rank = len(cols)
        added = 0
        for c in range(b.cols):
            cand = cols + [b.column(c)]
            if ExactMatrix.from_columns(cand).rank() > cur_rank + added:
                cols = cand
                added += 1
        if added:
            sizes.append(added)
    # cols were collected innermost first; the last column of A is the first vector
    a = ExactMatrix.from_columns(cols[::-1])
    return a, sizes[::-1]


def unipotent_between(x0: IsotropicFlag) -> ExactMatrix:
    """The unique u0 in the unipotent radical with u0 . x_minus = x0.

    Solved as a block UL decomposition A = U L of an adapted basis A of x0,
    with U block unit upper triangular and L block lower triangular.
    Raises NotTransverse if x0 is not transverse to the standard flag.
    """
    kind = x0.kind
    if not flag_transverse(x0, standard_flag(kind)):
        raise NotTransverse("x0 is not transverse to x_plus")
    a, sizes = _adapted_basis(x0)
    m = kind.dim
    # reverse rows and columns: A = U L  <=>  RAR = (RUR)(RLR), a block LU problem
    rev = list(range(m - 1, -1, -1))
    work = [list(r) for r in a.submatrix(rev, rev)]
    lower = [[Fraction(1) if i == j else Fraction(0) for j in range(m)] for i in range(m)]
    bounds = []
    start = 0
    for s in sizes[::-1]:
        bounds.append((start, start + s))
        start += s
    for bi, (lo, hi) in enumerate(bounds):
        pivot = ExactMatrix([work[i][lo:hi] for i in range(lo, hi)])
        try:
            pinv = pivot.inverse()
        except ArithmeticError as exc:
            raise NotTransverse("pivot block is singular") from exc
        for lo2, hi2 in bounds[bi + 1:]:
            blk = ExactMatrix([work[i][lo:hi] for i in range(lo2, hi2)])
            f = blk @ pinv
            for r in range(lo2, hi2):
                frow = f.row(r - lo2)
                for c in range(m):
                    acc = work[r][c]
                    for t in range(lo, hi):
                        if frow[t - lo]:
                            acc = acc - frow[t - lo] * work[t][c]
                    work[r][c] = acc
                for t in range(lo, hi):
                    lower[r][t] = frow[t - lo]
    l_mat = ExactMatrix(lower)
    u0 = l_mat.submatrix(rev, rev)
    if not in_group(u0, kind):
        raise NotTransverse("recovered transformation does not preserve the form")
    return u0


def triple_is_positive(x_plus: IsotropicFlag, x0: IsotropicFlag, x_minus: IsotropicFlag) -> bool:
    kind = x0.kind
    for d, (sp, sm) in enumerate(zip(x_plus.spaces, x_minus.spaces)):
        if not _same_span(sp, standard_flag(kind).spaces[d]) or not _same_span(
            sm, opposite_flag(kind).spaces[d]
        ):
            raise MalformedFlag("only the standard pair (x_plus, x_minus) is supported")
    u0 = unipotent_between(x0)
    if u0.is_identity():
        return False
    return not isinstance(factorize(kind, u0), NotPositive)
