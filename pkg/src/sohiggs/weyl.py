"""Weyl groups of types B and D as signed permutations.

A signed permutation w on r letters is stored as its images: ``w[i] = s*j``
means w(e_{i+1}) = s*e_j.  Words act left to right as compositions, so the
word [i1, i2, ...] is the element s_{i1} s_{i2} ... .

Lengths are computed by counting positive roots sent to negative roots,
which avoids enumerating the group.  Brute-force enumeration is available
for small ranks as an independent check.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from math import factorial
from typing import Iterable, Sequence

from .lie_so import Family, GroupKind

__all__ = [
    "SignedPermutation",
    "WeylWord",
    "LongestReport",
    "reflect",
    "simple_reflections",
    "positive_roots",
    "length",
    "longest_element",
    "word_product",
    "longest_word",
    "so_nn_block_formula",
    "verify_longest",
    "w_theta",
    "theta_longest_element",
    "theta_length",
    "generate_group",
    "root_system_type",
    "SoNNAudit",
    "audit_so_nn",
    "bfs_lengths",
    "weyl_order",
]


@dataclass(frozen=True)
class SignedPermutation:
    images: tuple[int, ...]

    def __post_init__(self):
        r = len(self.images)
        if sorted(abs(x) for x in self.images) != list(range(1, r + 1)):
            raise ValueError(f"not a signed permutation: {self.images}")

    @property
    def rank(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, r: int) -> "SignedPermutation":
        return cls(tuple(range(1, r + 1)))

    @classmethod
    def minus_identity(cls, r: int) -> "SignedPermutation":
        return cls(tuple(-i for i in range(1, r + 1)))

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        # (self * other)(e_i) = self(other(e_i))
        out = []
        for x in other.images:
            y = self.images[abs(x) - 1]
            out.append(y if x > 0 else -y)
        return SignedPermutation(tuple(out))

    def inverse(self) -> "SignedPermutation":
        out = [0] * self.rank
        for i, x in enumerate(self.images, start=1):
            out[abs(x) - 1] = i if x > 0 else -i
        return SignedPermutation(tuple(out))

    def act(self, v: Sequence[int]) -> tuple[int, ...]:
        """Image of the vector sum v_i e_i."""
        out = [0] * self.rank
        for i, c in enumerate(v):
            if c:
                x = self.images[i]
                out[abs(x) - 1] += c if x > 0 else -c
        return tuple(out)

    def sign_changes(self) -> int:
        return sum(1 for x in self.images if x < 0)

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.images, start=1))

    def order(self) -> int:
        k, w = 1, self
        while not w.is_identity():
            w = w * self
            k += 1
        return k


@dataclass(frozen=True)
class WeylWord:
    kind: GroupKind
    letters: tuple[int, ...]
    # for the Theta schedule of SO(n,n+1): the word in sigma generators
    theta_letters: tuple[int, ...] | None = None
    # human readable description of each block, e.g. "b_2"
    blocks: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.letters)


def root_system_type(kind: GroupKind) -> str:
    return "D" if kind.family is Family.SO_n_n else "B"


def reflect(kind: GroupKind, j: int) -> SignedPermutation:
    """Reflection in the j-th simple root, acting on x_1..x_r."""
    r = kind.rank
    if not 1 <= j <= r:
        raise ValueError(f"simple root index {j} outside 1..{r}")
    im = list(range(1, r + 1))
    if j < r:
        im[j - 1], im[j] = j + 1, j
    elif kind.family is Family.SO_n_n:
        # x_{r-1} + x_r: e_{r-1} -> -e_r, e_r -> -e_{r-1}
        im[r - 2], im[r - 1] = -r, -(r - 1)
    else:
        im[r - 1] = -r
    return SignedPermutation(tuple(im))


def simple_reflections(kind: GroupKind) -> list[SignedPermutation]:
    return [reflect(kind, j) for j in range(1, kind.rank + 1)]


def positive_roots(rtype: str, r: int) -> list[tuple[int, ...]]:
    """Positive roots for B_r or D_r with the x_i - x_{i+1} / x_r / x_{r-1}+x_r conventions."""
    roots = []
    for i, j in combinations(range(r), 2):
        v = [0] * r
        v[i], v[j] = 1, -1
        roots.append(tuple(v))
        v = [0] * r
        v[i], v[j] = 1, 1
        roots.append(tuple(v))
    if rtype == "B":
        for i in range(r):
            v = [0] * r
            v[i] = 1
            roots.append(tuple(v))
    return roots


def _is_positive(v: Sequence[int]) -> bool:
    for c in v:
        if c:
            return c > 0
    raise ValueError("zero vector is not a root")


def length(w: SignedPermutation, rtype: str) -> int:
    return sum(1 for a in positive_roots(rtype, w.rank) if not _is_positive(w.act(a)))


def longest_element(kind: GroupKind) -> SignedPermutation:
    r = kind.rank
    if kind.family is Family.SO_n_n and r % 2:
        # D_r, r odd: -1 composed with the diagram flip
        return SignedPermutation(tuple(-i for i in range(1, r)) + (r,))
    return SignedPermutation.minus_identity(r)


def word_product(kind: GroupKind, letters: Iterable[int]) -> SignedPermutation:
    w = SignedPermutation.identity(kind.rank)
    for j in letters:
        w = w * reflect(kind, j)
    return w


# ---------------------------------------------------------------- words


def _b_block(n: int, j: int) -> list[int]:
    """b_j for SO(n,n-1): s_{n-j} ... s_{n-2} s_{n-1} s_{n-2} ... s_{n-j}."""
    up = list(range(n - j, n - 1))
    return up + [n - 1] + up[::-1]


def so_nn_block_formula(n: int) -> list[list[int] | None]:
    """Blocks d_1..d_n of the closed block formula, taken verbatim (no repair).

    d_1 = s_{delta_n}, d_2 = s_{delta_{n-1}}, and for j >= 3
    d_j = s_{n+1-j} (s_{n-j} ... s_{n-2}) s_{n-1} s_n (s_{n-2} ... s_{n-j}) s_{n+1-j}.
    A block that mentions a non-existent generator (index 0) is returned as
    None.
    """
    blocks: list[list[int] | None] = []
    for j in range(1, n + 1):
        if j == 1:
            blocks.append([n])
        elif j == 2:
            blocks.append([n - 1])
        else:
            mid = list(range(n - j, n - 1))
            word = [n + 1 - j] + mid + [n - 1, n] + mid[::-1] + [n + 1 - j]
            blocks.append(None if min(word) < 1 else word)
    return blocks


def _d_block(n: int, j: int) -> list[int]:
    """Repaired d_j for SO(n,n): s_{n+1-j} ... s_{n-2} s_{n-1} s_n s_{n-2} ... s_{n+1-j}."""
    if j == 1:
        return [n]
    if j == 2:
        return [n - 1]
    up = list(range(n + 1 - j, n - 1))
    return up + [n - 1, n] + up[::-1]


def _sigma_expansion(n: int, j: int) -> list[int]:
    """sigma_j of W(Theta) in ambient generators of B_n."""
    if j <= n - 2:
        return [j]
    if j == n - 1:
        # longest word of the B_2 subsystem {beta_{n-1}, beta_n}
        return [n - 1, n, n - 1, n]
    raise ValueError(f"sigma_{j} undefined for n={n}")


def w_theta(n: int) -> list[list[int]]:
    """Generators sigma_1..sigma_{n-1} of W(Theta) inside W(SO(n,n+1)), as ambient words."""
    if n < 2:
        raise ValueError("W(Theta) needs n >= 2")
    return [_sigma_expansion(n, j) for j in range(1, n)]


def longest_word(kind: GroupKind) -> WeylWord:
    n = kind.n
    if kind.family is Family.SO_n_nminus1:
        blocks = tuple(tuple(_b_block(n, j)) for j in range(1, n))
        return WeylWord(kind, tuple(x for b in blocks for x in b), blocks=blocks)
    if kind.family is Family.SO_n_n:
        blocks = tuple(tuple(_d_block(n, j)) for j in range(1, n + 1))
        return WeylWord(kind, tuple(x for b in blocks for x in b), blocks=blocks)
    # W(Theta) schedule: same shape as the SO(n,n-1) word, over sigma letters
    sblocks = tuple(tuple(_b_block(n, j)) for j in range(1, n))
    sigma = tuple(x for b in sblocks for x in b)
    ambient = tuple(x for s in sigma for x in _sigma_expansion(n, s))
    return WeylWord(kind, ambient, theta_letters=sigma, blocks=sblocks)


# ------------------------------------------------------------- W(Theta)


def _sigma_element(n: int, j: int) -> SignedPermutation:
    kind = GroupKind(Family.SO_n_nplus1, n)
    return word_product(kind, _sigma_expansion(n, j))


def theta_longest_element(n: int) -> SignedPermutation:
    """Longest element of W(Theta): negates x_1..x_{n-1} and leaves x_n with sign (-1)^{n-1}."""
    sign = -1 if (n - 1) % 2 else 1
    return SignedPermutation(tuple(-i for i in range(1, n)) + (sign * n,))


def theta_length(w: SignedPermutation) -> int:
    """Length in W(Theta) ~ B_{n-1}: count restricted roots on x_1..x_{n-1} sent negative.

    Elements of W(Theta) preserve span(e_1..e_{n-1}), so the restriction is
    a signed permutation of rank n-1.
    """
    n = w.rank
    head = w.images[: n - 1]
    if any(abs(x) == n for x in head):
        raise ValueError("element does not lie in W(Theta)")
    return length(SignedPermutation(head), "B")


@dataclass(frozen=True)
class LongestReport:
    is_reduced: bool
    is_longest: bool
    length: int
    target_length: int
    word_length: int
    note: str = ""

    def ok(self) -> bool:
        return self.is_reduced and self.is_longest and self.length == self.target_length


def verify_longest(kind: GroupKind, word: WeylWord | Sequence[int]) -> LongestReport:
    """Decide whether a word is reduced and represents the longest element.

    For SO(n,n+1) a :class:`WeylWord` carrying sigma letters is judged
    inside W(Theta); plain sequences are judged in the ambient Weyl group.
    """
    if isinstance(word, WeylWord) and word.theta_letters is not None:
        n = kind.n
        w = SignedPermutation.identity(n)
        for s in word.theta_letters:
            w = w * _sigma_element(n, s)
        amb = word_product(kind, word.letters)
        note = "" if amb == w else "ambient expansion disagrees with sigma product"
        ell = theta_length(w)
        target = (n - 1) ** 2
        return LongestReport(
            is_reduced=ell == len(word.theta_letters),
            is_longest=w == theta_longest_element(n),
            length=ell,
            target_length=target,
            word_length=len(word.theta_letters),
            note=note,
        )
    letters = word.letters if isinstance(word, WeylWord) else tuple(word)
    rtype = root_system_type(kind)
    w = word_product(kind, letters)
    ell = length(w, rtype)
    return LongestReport(
        is_reduced=ell == len(letters),
        is_longest=w == longest_element(kind),
        length=ell,
        target_length=len(positive_roots(rtype, kind.rank)),
        word_length=len(letters),
    )


def generate_group(gens: Sequence[SignedPermutation]) -> set[SignedPermutation]:
    """Breadth-first closure of a generating set (brute force, small ranks only)."""
    if not gens:
        return set()
    e = SignedPermutation.identity(gens[0].rank)
    seen = {e}
    queue = deque([e])
    while queue:
        w = queue.popleft()
        for s in gens:
            x = w * s
            if x not in seen:
                seen.add(x)
                queue.append(x)
    return seen


def bfs_lengths(gens: Sequence[SignedPermutation]) -> dict[SignedPermutation, int]:
    """Word length of every element by breadth-first search on the Cayley graph."""
    e = SignedPermutation.identity(gens[0].rank)
    dist = {e: 0}
    queue = deque([e])
    while queue:
        w = queue.popleft()
        for s in gens:
            x = w * s
            if x not in dist:
                dist[x] = dist[w] + 1
                queue.append(x)
    return dist


def weyl_order(rtype: str, r: int) -> int:
    return 2 ** r * factorial(r) if rtype == "B" else 2 ** (r - 1) * factorial(r)


@dataclass(frozen=True)
class SoNNAudit:
    n: int
    literal_blocks: tuple
    literal_verdict: str  # "malformed", "not-reduced", "not-longest" or "ok"
    literal_report: LongestReport | None
    repaired_report: LongestReport
    # the literal word with malformed blocks dropped
    truncated_report: LongestReport | None = None

    def ok(self) -> bool:
        return self.repaired_report.ok()


def audit_so_nn(n: int) -> SoNNAudit:
    """Judge the literal d_1..d_n word for SO(n,n) and the repaired one side by side."""
    kind = GroupKind(Family.SO_n_n, n)
    blocks = so_nn_block_formula(n)
    literal_report = None
    if any(b is None for b in blocks):
        verdict = "malformed"
    else:
        literal_report = verify_longest(kind, [x for b in blocks for x in b])
        if not literal_report.is_reduced:
            verdict = "not-reduced"
        elif not literal_report.is_longest:
            verdict = "not-longest"
        else:
            verdict = "ok"
    repaired = verify_longest(kind, longest_word(kind))
    frozen = tuple(None if b is None else tuple(b) for b in blocks)
    truncated = None
    if verdict == "malformed":
        truncated = verify_longest(kind, [x for b in blocks if b is not None for x in b])
    return SoNNAudit(n, frozen, verdict, literal_report, repaired, truncated)
