"""Formal bundle data for SO(n,n+1) Higgs bundles built from chains of line bundles.

Line bundles are symbols K^a M^b (optionally twisted by the 2-torsion bundle
L of an unramified double cover); no point of a Picard variety is ever
represented.  A Higgs field eta : V -> W (x) K is a matrix of formal
sections.  Row i of eta belongs to the i-th summand of W and column j to the
j-th summand of V, so entry (i, j) is a section of Hom(V_j, W_i) (x) K.

Everything that needs numbers (gauge actions, characteristic polynomials)
evaluates the sections pointwise: a section becomes one rational number.
Holomorphicity is only ever tracked through degrees.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, Union

from .exact_algebra import ExactMatrix, char_poly, to_scalar

__all__ = [
    "CurveContext",
    "LineBundleSymbol",
    "Rank2Block",
    "OrthChainBundle",
    "Section",
    "HiggsFieldMatrix",
    "HiggsBundle",
    "FamilyDatum",
    "MLine",
    "GaugePair",
    "TypecheckReport",
    "StabilityResult",
    "DegreeOutOfRange",
    "TypeMismatch",
    "UnsupportedField",
    "InvalidGauge",
    "MixedFamilies",
    "NoPrymFlag",
    "K",
    "build_hitchin",
    "build_psi_d",
    "build_psi_mirror",
    "build_psi_0",
    "build_psi_sw",
    "build_so_nn_hitchin",
    "build_from_datum",
    "typecheck",
    "eta_star",
    "assemble_sl",
    "numeric_matrix",
    "stability",
    "invariant_subsets",
    "invariant_subsets_bruteforce",
    "scaling_gauge",
    "switching_gauge",
    "psi0_torus_gauge",
    "psi0_swap_gauge",
    "parity_sign_swap_gauge",
    "apply_gauge",
    "scaling_formula",
    "switching_formula",
    "orbit_equal",
    "hitchin_invariants",
    "o2_stabilizer",
    "o2_stabilizer_from_action",
    "pushforward_rank2",
    "so12_admits_polystable",
]

TORSION_FLAGS = ("generic", "square-trivial", "trivial")


class DegreeOutOfRange(ValueError):
    pass


class TypeMismatch(ValueError):
    pass


class UnsupportedField(ValueError):
    pass


class InvalidGauge(ValueError):
    pass


class MixedFamilies(ValueError):
    pass


class NoPrymFlag(ValueError):
    pass


@dataclass(frozen=True)
class CurveContext:
    genus: int
    double_cover: bool = False

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")

    @property
    def covering_genus(self) -> int | None:
        return 2 * self.genus - 1 if self.double_cover else None

    @property
    def deg_k(self) -> int:
        return 2 * self.genus - 2


# --------------------------------------------------------------- symbols


@dataclass(frozen=True)
class LineBundleSymbol:
    """K^k_power (x) M^m_power (x) L^l_power.

    ``m_degree`` and ``torsion`` describe M itself; ``l_power`` counts the
    2-torsion bundle of a double cover (mod 2).
    """

    k_power: int = 0
    m_power: int = 0
    m_degree: int = 0
    torsion: str = "generic"
    l_power: int = 0

    def __post_init__(self):
        if self.torsion not in TORSION_FLAGS:
            raise ValueError(f"unknown torsion flag {self.torsion!r}")
        if self.torsion != "generic" and self.m_degree != 0:
            raise ValueError("a torsion M must have degree 0")
        object.__setattr__(self, "l_power", self.l_power % 2)

    @property
    def rank(self) -> int:
        return 1

    def degree(self, g: int) -> int:
        return self.k_power * (2 * g - 2) + self.m_power * self.m_degree

    def _m_data(self, other: "LineBundleSymbol") -> tuple[int, str]:
        if self.m_power and other.m_power and (self.m_degree, self.torsion) != (other.m_degree, other.torsion):
            raise TypeMismatch("tensoring symbols built on different M")
        src = self if self.m_power else other
        return src.m_degree, src.torsion

    def __mul__(self, other: "LineBundleSymbol") -> "LineBundleSymbol":
        if not isinstance(other, LineBundleSymbol):
            return NotImplemented
        deg, tor = self._m_data(other)
        return LineBundleSymbol(
            self.k_power + other.k_power, self.m_power + other.m_power, deg, tor,
            self.l_power + other.l_power,
        )

    tensor = __mul__

    def dual(self) -> "LineBundleSymbol":
        return LineBundleSymbol(-self.k_power, -self.m_power, self.m_degree, self.torsion, self.l_power)

    def hom_to(self, other: "LineBundleSymbol") -> "LineBundleSymbol":
        """Hom(self, other) = other (x) self^{-1}."""
        return other * self.dual()

    def reduced_m_power(self) -> int:
        """Power of M up to isomorphism (torsion taken into account)."""
        if self.m_power == 0 or self.torsion == "trivial":
            return 0
        if self.torsion == "square-trivial":
            return self.m_power % 2
        return self.m_power

    def iso_key(self) -> tuple:
        """Two symbols on the same M are isomorphic iff their keys agree."""
        m = self.reduced_m_power()
        return (self.k_power, m, self.m_degree if m else 0, self.l_power)

    def is_trivial(self) -> bool:
        return self.k_power == 0 and self.reduced_m_power() == 0 and self.l_power == 0

    def __str__(self):
        parts = []
        if self.k_power:
            parts.append("K" if self.k_power == 1 else f"K^{self.k_power}")
        if self.m_power:
            parts.append("M" if self.m_power == 1 else f"M^{self.m_power}")
        if self.l_power:
            parts.append("L")
        return "".join(parts) or "O"


def K(a: int = 1) -> LineBundleSymbol:
    return LineBundleSymbol(k_power=a)


@dataclass(frozen=True)
class Rank2Block:
    """The rank two orthogonal bundle pi_* M for M in a Prym variety."""

    sw1: int = 1
    sw2: int = 0
    label: str = "pi_*M"

    @property
    def rank(self) -> int:
        return 2

    def degree(self, g: int) -> int:
        return 0

    def determinant(self) -> LineBundleSymbol:
        # det(pi_* M) is the 2-torsion bundle of the cover
        return LineBundleSymbol(l_power=1)

    def __str__(self):
        return self.label


Summand = Union[LineBundleSymbol, Rank2Block]


@dataclass(frozen=True)
class Rank2Hom:
    """Hom between a line bundle and the rank two block, twisted: rank 2, degree 2*deg(line part)."""

    line: LineBundleSymbol

    def degree(self, g: int) -> int:
        return 2 * self.line.degree(g)

    def is_trivial(self) -> bool:
        return False

    def __str__(self):
        return f"pi_*M({self.line})"


def _antidiagonal(r: int) -> ExactMatrix:
    return ExactMatrix([[1 if i + j == r - 1 else 0 for j in range(r)] for i in range(r)])


@dataclass(frozen=True)
class OrthChainBundle:
    summands: tuple
    pairing: ExactMatrix

    def __post_init__(self):
        r = len(self.summands)
        if self.pairing.shape != (r, r):
            raise TypeMismatch("pairing has the wrong size")
        for i in range(r):
            partners = [j for j in range(r) if self.pairing[i, j]]
            if len(partners) != 1:
                raise TypeMismatch("pairing must pair each summand with exactly one summand")
            j = partners[0]
            a, b = self.summands[i], self.summands[j]
            if isinstance(a, Rank2Block) or isinstance(b, Rank2Block):
                if a != b:
                    raise TypeMismatch("rank two block must pair with itself")
                continue
            if not (a * b).is_trivial():
                raise TypeMismatch(f"summands {a} and {b} do not pair to O")

    @classmethod
    def antidiagonal(cls, summands: Sequence[Summand]) -> "OrthChainBundle":
        return cls(tuple(summands), _antidiagonal(len(summands)))

    @property
    def rank(self) -> int:
        return sum(s.rank for s in self.summands)

    def __len__(self):
        return len(self.summands)

    def partner(self, i: int) -> int:
        return next(j for j in range(len(self.summands)) if self.pairing[i, j])

    def determinant(self) -> LineBundleSymbol:
        out = LineBundleSymbol()
        for s in self.summands:
            out = out * (s.determinant() if isinstance(s, Rank2Block) else s)
        return out

    def __str__(self):
        return " + ".join(str(s) for s in self.summands)


# --------------------------------------------------------------- sections


@dataclass(frozen=True)
class Section:
    """A formal section: zero, the constant 1, a named section, or a number.

    ``coeff`` carries signs produced by adjoints.  ``nonzero`` is the marked
    bit of a named section (None when unmarked).
    """

    kind: str
    name: str | None = None
    coeff: Fraction = Fraction(1)
    nonzero: bool | None = None
    value: Fraction | None = None

    @staticmethod
    def zero() -> "Section":
        return Section("zero", coeff=Fraction(0))

    @staticmethod
    def one() -> "Section":
        return Section("one")

    @staticmethod
    def named(name: str, nonzero: bool | None = None, value=None) -> "Section":
        if value is not None:
            v = to_scalar(value)
            return Section("named", name, nonzero=bool(v), value=v)
        return Section("named", name, nonzero=nonzero)

    @staticmethod
    def numeric(value) -> "Section":
        v = to_scalar(value)
        return Section("numeric", value=v, nonzero=bool(v))

    def is_zero(self) -> bool:
        if self.kind == "zero" or self.coeff == 0:
            return True
        if self.kind in ("named", "numeric"):
            return self.nonzero is False
        return False

    def definitely_nonzero(self) -> bool | None:
        if self.is_zero():
            return False
        if self.kind == "one":
            return True
        return self.nonzero

    def scaled(self, c) -> "Section":
        c = Fraction(c)
        if self.kind == "zero" or c == 0:
            return Section.zero()
        return replace(self, coeff=self.coeff * c)

    def __neg__(self) -> "Section":
        return self.scaled(-1)

    def evaluate(self) -> Fraction:
        """Pointwise value; raises if the section has no number attached."""
        if self.is_zero():
            return Fraction(0)
        if self.kind == "one":
            return self.coeff
        if self.value is None:
            raise UnsupportedField(f"section {self.name} has no numeric value")
        return self.coeff * self.value

    def __str__(self):
        if self.is_zero():
            return "0"
        base = {"one": "1", "named": self.name or "?", "numeric": str(self.value)}[self.kind]
        if self.coeff == 1:
            return base
        if self.coeff == -1:
            return f"-{base}"
        return f"{self.coeff}*{base}"


@dataclass(frozen=True)
class HiggsFieldMatrix:
    """entries[i][j] is a section of Hom(source_j, target_i) (x) K."""

    source: OrthChainBundle
    target: OrthChainBundle
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != len(self.target) or any(len(r) != len(self.source) for r in self.entries):
            raise TypeMismatch("Higgs field shape does not match the bundles")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def __getitem__(self, key) -> Section:
        i, j = key
        return self.entries[i][j]

    def hom(self, i: int, j: int):
        """Bundle of which entry (i, j) is a section (0-based)."""
        a, b = self.source.summands[j], self.target.summands[i]
        if isinstance(a, Rank2Block) and isinstance(b, Rank2Block):
            return LineBundleSymbol(k_power=1)  # End of the block: only its scalar part matters here
        if isinstance(b, Rank2Block):
            return Rank2Hom(a.dual() * K(1))
        if isinstance(a, Rank2Block):
            return Rank2Hom(b * K(1))
        return a.hom_to(b) * K(1)

    def with_entry(self, i: int, j: int, s: Section) -> "HiggsFieldMatrix":
        rows = [list(r) for r in self.entries]
        rows[i][j] = s
        return replace(self, entries=tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class TypecheckReport:
    ok: bool
    errors: tuple[str, ...]
    det_source: str
    det_target: str
    det_ok: bool


def typecheck(V: OrthChainBundle, W: OrthChainBundle, eta: HiggsFieldMatrix, ctx: CurveContext) -> TypecheckReport:
    errors = []
    if eta.source != V or eta.target != W:
        errors.append("Higgs field is not a map V -> W (x) K")
    g = ctx.genus
    for i, row in enumerate(eta.entries):
        for j, s in enumerate(row):
            if s.is_zero():
                continue
            h = eta.hom(i, j)
            where = f"entry ({i + 1},{j + 1}) in {h}"
            if s.kind == "one":
                if not h.is_trivial():
                    errors.append(f"{where}: constant 1 over a nontrivial bundle")
                continue
            deg = h.degree(g)
            marked = s.definitely_nonzero()
            if deg < 0 and marked is not False:
                errors.append(f"{where}: section {s} of a negative degree bundle is not marked zero")
            elif deg == 0 and not h.is_trivial() and marked:
                errors.append(f"{where}: nonzero section {s} of a nontrivial degree 0 bundle")
    dv, dw = V.determinant(), W.determinant()
    det_ok = dv.iso_key() == dw.iso_key()
    if not det_ok:
        errors.append(f"det(V) = {dv} but det(W) = {dw}")
    return TypecheckReport(not errors, tuple(errors), str(dv), str(dw), det_ok)


def eta_star(V: OrthChainBundle, W: OrthChainBundle, eta: HiggsFieldMatrix) -> HiggsFieldMatrix:
    """eta* = -Q_V^{-1} eta^T Q_W for permutation-type pairings."""
    rows = []
    for a in range(len(V)):
        c = V.partner(a)  # Q_V^{-1} has the same pattern as Q_V
        row = []
        for b in range(len(W)):
            d = next(k for k in range(len(W)) if W.pairing[k, b])
            coef = V.pairing[a, c] * W.pairing[d, b]
            row.append(eta[d, c].scaled(-coef))
        rows.append(tuple(row))
    return HiggsFieldMatrix(W, V, tuple(rows))


def assemble_sl(V: OrthChainBundle, W: OrthChainBundle, eta: HiggsFieldMatrix) -> tuple[tuple[Section, ...], ...]:
    """Phi = [[0, eta*], [eta, 0]] on V + W, as a matrix of sections indexed by summands."""
    star = eta_star(V, W, eta)
    nv, nw = len(V), len(W)
    z = Section.zero()
    rows = []
    for a in range(nv):
        rows.append(tuple([z] * nv + list(star.entries[a])))
    for i in range(nw):
        rows.append(tuple(list(eta.entries[i]) + [z] * nw))
    return tuple(rows)


def _block_form(V: OrthChainBundle, W: OrthChainBundle) -> ExactMatrix:
    nv, nw = len(V), len(W)
    rows = [[0] * (nv + nw) for _ in range(nv + nw)]
    for i in range(nv):
        for j in range(nv):
            rows[i][j] = V.pairing[i, j]
    for i in range(nw):
        for j in range(nw):
            rows[nv + i][nv + j] = W.pairing[i, j]
    return ExactMatrix(rows)


def numeric_matrix(rows: Sequence[Sequence[Section]]) -> ExactMatrix:
    return ExactMatrix([[s.evaluate() for s in r] for r in rows])


# -------------------------------------------------------------- stability


def _nodes(V: OrthChainBundle, W: OrthChainBundle) -> list:
    return list(V.summands) + list(W.summands)


def _arrows(phi) -> list[set[int]]:
    """out[b] = summands that Phi maps summand b into."""
    size = len(phi)
    out = [set() for _ in range(size)]
    for a in range(size):
        for b in range(size):
            s = phi[a][b]
            mark = s.definitely_nonzero()
            if mark is None:
                raise UnsupportedField(f"section {s} has no zero/nonzero marking")
            if mark:
                out[b].add(a)
    return out


def _closure(start: Iterable[int], out: list[set[int]]) -> frozenset:
    seen = set(start)
    stack = list(seen)
    while stack:
        b = stack.pop()
        for a in out[b]:
            if a not in seen:
                seen.add(a)
                stack.append(a)
    return frozenset(seen)


def invariant_subsets(phi) -> set[frozenset]:
    """All Phi-invariant unions of summands, as unions of reachability closures."""
    out = _arrows(phi)
    principal = {_closure([v], out) for v in range(len(phi))}
    result = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for p in principal:
                u = s | p
                if u not in result:
                    result.add(u)
                    nxt.append(u)
        frontier = nxt
    return result


def invariant_subsets_bruteforce(phi) -> set[frozenset]:
    """Every subset of summands checked directly for Phi-invariance."""
    out = _arrows(phi)
    size = len(phi)
    found = set()
    for mask in range(1 << size):
        s = frozenset(i for i in range(size) if mask >> i & 1)
        if all(out[b] <= s for b in s):
            found.add(s)
    return found


@dataclass(frozen=True)
class StabilityResult:
    classification: str  # "stable", "strictly-polystable" or "unstable"
    semistable: bool
    witness: tuple[int, ...]
    witness_labels: tuple[str, ...]
    witness_degree: int | None
    invariant_count: int


def stability(
    V: OrthChainBundle, W: OrthChainBundle, eta: HiggsFieldMatrix, ctx: CurveContext, *, brute_force: bool = False
) -> StabilityResult:
    """Classify the associated SL(2n+1) Higgs bundle using summand subbundles only."""
    phi = assemble_sl(V, W, eta)
    nodes = _nodes(V, W)
    g = ctx.genus
    deg = [s.degree(g) for s in nodes]
    subsets = invariant_subsets_bruteforce(phi) if brute_force else invariant_subsets(phi)
    full = frozenset(range(len(nodes)))
    proper = [s for s in subsets if s and s != full]

    def d(s):
        return sum(deg[i] for i in s)

    witness: frozenset = frozenset()
    wdeg = None
    if proper:
        witness = max(proper, key=lambda s: (d(s), -len(s), sorted(s)))
        wdeg = d(witness)
    semistable = all(d(s) <= 0 for s in proper)
    if all(d(s) < 0 for s in proper):
        cls = "stable"
    elif semistable and all((full - s) in subsets for s in proper if d(s) == 0):
        cls = "strictly-polystable"
    else:
        cls = "unstable"
    labels = tuple(str(nodes[i]) for i in sorted(witness))
    return StabilityResult(cls, semistable, tuple(sorted(witness)), labels, wdeg, len(subsets))


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class MLine:
    """Bookkeeping for the auxiliary line bundle M: a label, a sign (M or M^{-1}),
    its degree and torsion flag, and whether iota^* has been applied."""

    label: str = "M"
    sign: int = 1
    degree: int = 0
    torsion: str = "generic"
    pulled: bool = False
    prym: bool = False
    sw2: int = 0

    def __post_init__(self):
        if self.torsion != "generic" and self.degree:
            raise ValueError("torsion flags need degree 0")
        if self.torsion != "generic" and self.sign == -1:
            # M^{-1} = M for 2-torsion M
            object.__setattr__(self, "sign", 1)

    def inverse(self) -> "MLine":
        return replace(self, sign=-self.sign, degree=-self.degree)

    def is_self_dual(self) -> bool:
        return self.torsion in ("trivial", "square-trivial")

    def symbol(self, power: int = 1) -> LineBundleSymbol:
        # the symbol is always written in terms of the positively oriented M
        base_degree = self.degree * self.sign
        return LineBundleSymbol(m_power=power * self.sign, m_degree=base_degree, torsion=self.torsion)


@dataclass(frozen=True)
class FamilyDatum:
    family: str  # hitchin, psi_d, psi_0, psi_sw, so_nn_hitchin
    n: int
    genus: int
    d: int = 0
    m: MLine | None = None
    mu: Section | None = None
    nu: Section | None = None
    # q_2, q_4, ... as sections; for so_nn_hitchin the last one is q_n
    q: tuple = ()

    def to_record(self) -> dict:
        def sec(s):
            if s is None:
                return None
            return {"kind": s.kind, "name": s.name, "nonzero": s.definitely_nonzero(),
                    "value": None if s.value is None else str(s.value * s.coeff)}

        return {
            "family": self.family,
            "n": self.n,
            "genus": self.genus,
            "d": self.d,
            "m": None if self.m is None else {
                "label": self.m.label, "sign": self.m.sign, "degree": self.m.degree,
                "torsion": self.m.torsion, "pulled": self.m.pulled, "sw2": self.m.sw2,
            },
            "mu": sec(self.mu),
            "nu": sec(self.nu),
            "q": [sec(s) for s in self.q],
        }

    def numeric(self) -> bool:
        secs = [s for s in (self.mu, self.nu, *self.q) if s is not None]
        return all(s.is_zero() or s.value is not None for s in secs)


@dataclass(frozen=True)
class HiggsBundle:
    V: OrthChainBundle
    W: OrthChainBundle
    eta: HiggsFieldMatrix
    datum: FamilyDatum
    ctx: CurveContext

    def typecheck(self) -> TypecheckReport:
        return typecheck(self.V, self.W, self.eta, self.ctx)

    def stability(self, brute_force: bool = False) -> StabilityResult:
        return stability(self.V, self.W, self.eta, self.ctx, brute_force=brute_force)

    def phi(self) -> ExactMatrix:
        return numeric_matrix(assemble_sl(self.V, self.W, self.eta))

    def form(self) -> ExactMatrix:
        return _block_form(self.V, self.W)


def _as_section(x, name: str) -> Section:
    """Accept a Section, a bool marking, a number, or None (marked zero)."""
    if isinstance(x, Section):
        return x
    if x is None or x is False:
        return Section.named(name, nonzero=False)
    if x is True:
        return Section.named(name, nonzero=True)
    return Section.named(name, value=x)


def _q_sections(count: int, q, start: int = 2, step: int = 2) -> tuple:
    q = list(q) if q is not None else []
    if len(q) > count:
        raise ValueError(f"expected at most {count} differentials")
    q = q + [None] * (count - len(q))
    return tuple(_as_section(x, f"q{start + step * k}") for k, x in enumerate(q))


def _chain_V(n: int) -> list[LineBundleSymbol]:
    return [K(n + 1 - 2 * j) for j in range(1, n + 1)]


def _q_of(qs: tuple, index: int) -> Section:
    """q_index with q_0 = 1 and q_negative = 0."""
    if index == 0:
        return Section.one()
    if index < 0 or index // 2 > len(qs):
        return Section.zero()
    return qs[index // 2 - 1]


def _pattern_row(i: int, n: int, qs: tuple) -> tuple:
    # row i (1-based) of the Hitchin-type pattern: entry (i, j) = q_{2(j-i+1)}
    return tuple(_q_of(qs, 2 * (j - i + 1)) for j in range(1, n + 1))


def build_hitchin(n: int, q=None, genus: int = 2) -> HiggsBundle:
    """V = K^{n-1}+...+K^{1-n}, W = K^n+...+K^{-n}, eta(i,j) = q_{2(j-i+1)}."""
    if n < 1:
        raise ValueError("n >= 1")
    ctx = CurveContext(genus)
    qs = _q_sections(n, q)
    V = OrthChainBundle.antidiagonal(_chain_V(n))
    W = OrthChainBundle.antidiagonal([K(n + 2 - 2 * i) for i in range(1, n + 2)])
    rows = tuple(_pattern_row(i, n, qs) for i in range(1, n + 2))
    eta = HiggsFieldMatrix(V, W, rows)
    datum = FamilyDatum("hitchin", n, genus, q=qs)
    return HiggsBundle(V, W, eta, datum, ctx)


def _psi_shape(n: int, genus: int, m: MLine, mu: Section, nu: Section, qs: tuple, family: str, d: int,
               m_symbol: LineBundleSymbol | None = None) -> HiggsBundle:
    ctx = CurveContext(genus)
    msym = m.symbol() if m_symbol is None else m_symbol
    V = OrthChainBundle.antidiagonal(_chain_V(n))
    W0 = [K(n + 2 - 2 * i) for i in range(2, n + 1)]
    W = OrthChainBundle.antidiagonal([msym] + W0 + [msym.dual()])
    z = Section.zero()
    top = tuple([z] * (n - 1) + [nu])
    bottom = tuple([z] * (n - 1) + [mu])
    rows = (top,) + tuple(_pattern_row(i, n, qs) for i in range(2, n + 1)) + (bottom,)
    eta = HiggsFieldMatrix(V, W, rows)
    datum = FamilyDatum(family, n, genus, d=d, m=m, mu=mu, nu=nu, q=qs)
    return HiggsBundle(V, W, eta, datum, ctx)


def build_psi_d(n: int, d: int, genus: int = 2, mu=True, nu=None, q=None, label: str = "M") -> HiggsBundle:
    """The family with W = M + K^{n-2} + ... + K^{2-n} + M^{-1}, deg M = d.

    ``mu`` and ``nu`` are Sections, markings (True/False/None) or numbers.
    At d = n(2g-2) the bundle M^{-1}K^n has degree 0 and a nonzero mu forces
    M = K^n, so M is written as K^n there.  See build_psi_mirror for d < 0.
    """
    top = n * (2 * genus - 2)
    if not 0 <= d <= top:
        raise DegreeOutOfRange(f"d = {d} is outside [0, {top}]")
    return _psi_signed(n, d, genus, mu, nu, q, label)


def build_psi_mirror(n: int, d: int, genus: int = 2, mu=None, nu=True, q=None, label: str = "M") -> HiggsBundle:
    """The same shape with deg M = -d, i.e. the image of Psi_d under switching.

    Here nu in H^0(MK^n) is the section that must be nonzero.
    """
    top = n * (2 * genus - 2)
    if not 0 < d <= top:
        raise DegreeOutOfRange(f"d = {d} is outside (0, {top}]")
    return _psi_signed(n, -d, genus, mu, nu, q, label)


def _psi_signed(n: int, d: int, genus: int, mu, nu, q, label: str) -> HiggsBundle:
    top = n * (2 * genus - 2)
    mu_s, nu_s = _as_section(mu, "mu"), _as_section(nu, "nu")
    if d > 0 and not mu_s.definitely_nonzero():
        raise ValueError("d > 0 requires mu marked nonzero")
    if d < 0 and not nu_s.definitely_nonzero():
        raise ValueError("d < 0 requires nu marked nonzero")
    qs = _q_sections(n - 1, q)
    m = MLine(label=label, degree=d)
    msym = None
    if d == top:
        msym = K(n)
    elif d == -top:
        msym = K(-n)
    family = "psi_0" if d == 0 else "psi_d"
    return _psi_shape(n, genus, m, mu_s, nu_s, qs, family, d, m_symbol=msym)


def _unchecked_psi_d(n: int, d: int, genus: int, mu, nu, q) -> HiggsBundle:
    """Same shape as build_psi_d without range checks (for negative tests)."""
    return _psi_shape(n, genus, MLine(degree=d), _as_section(mu, "mu"), _as_section(nu, "nu"),
                      _q_sections(n - 1, q), "psi_d", d)


def build_psi_0(n: int, genus: int = 2, mu=None, nu=None, q=None, torsion: str = "generic",
                label: str = "M") -> HiggsBundle:
    """deg M = 0; mu in H^0(M^{-1}K^n), nu in H^0(MK^n), both optional."""
    m = MLine(label=label, degree=0, torsion=torsion)
    return _psi_shape(n, genus, m, _as_section(mu, "mu"), _as_section(nu, "nu"),
                      _q_sections(n - 1, q), "psi_0", 0)


def build_psi_sw(n: int, genus: int = 2, mu=True, q=None, sw2: int = 0, twist: bool = True,
                 label: str = "M") -> HiggsBundle:
    """W = pi_*M + K^{n-2} + ... + K^{2-n} with pi_*mu in the top right corner.

    With ``twist`` the line summands of V and W are tensored by the 2-torsion
    bundle L of the cover so that det V = det W; without it the literal
    shape is returned, whose determinants differ by L.
    """
    ctx = CurveContext(genus, double_cover=True)
    block = Rank2Block(sw1=1, sw2=sw2)
    tw = LineBundleSymbol(l_power=1 if twist else 0)
    V = OrthChainBundle.antidiagonal([s * tw for s in _chain_V(n)])
    W = OrthChainBundle(
        (block,) + tuple(K(n + 2 - 2 * i) * tw for i in range(2, n + 1)),
        _sw_pairing(n),
    )
    qs = _q_sections(n - 1, q)
    mu_s = _as_section(mu, "mu")
    z = Section.zero()
    top = tuple([z] * (n - 1) + [mu_s])
    rows = (top,) + tuple(_pattern_row(i, n, qs) for i in range(2, n + 1))
    eta = HiggsFieldMatrix(V, W, rows)
    m = MLine(label=label, degree=0, prym=True, sw2=sw2)
    datum = FamilyDatum("psi_sw", n, genus, m=m, mu=mu_s, q=qs)
    return HiggsBundle(V, W, eta, datum, ctx)


def _sw_pairing(n: int) -> ExactMatrix:
    # the block pairs with itself; the K-chain is antidiagonal
    rows = [[0] * n for _ in range(n)]
    rows[0][0] = 1
    for i in range(1, n):
        rows[i][n - i] = 1
    return ExactMatrix(rows)


def build_so_nn_hitchin(n: int, q=None, qn=None, genus: int = 2) -> HiggsBundle:
    """SO(n,n) Hitchin section: V = K^{n-2}+...+K^{2-n}+O, W = K^{n-1}+...+K^{1-n}.

    The degree-n differential q_n maps the O summand into K^{n-1} (x) K, so it
    sits in row 1 of the last column.
    """
    if n < 2:
        raise ValueError("n >= 2")
    ctx = CurveContext(genus)
    qs = _q_sections(n - 1, q)
    qn_s = _as_section(qn, f"q{n}")
    chain = [K(n - 2 * j) for j in range(1, n)]
    qv = [[0] * n for _ in range(n)]
    for i in range(n - 1):
        qv[i][n - 2 - i] = 1
    qv[n - 1][n - 1] = 1
    V = OrthChainBundle(tuple(chain + [K(0)]), ExactMatrix(qv))
    W = OrthChainBundle.antidiagonal([K(n + 1 - 2 * i) for i in range(1, n + 1)])
    z = Section.zero()
    rows = []
    for i in range(1, n + 1):
        row = [_q_of(qs, 2 * (j - i + 1)) for j in range(1, n)]
        row.append(qn_s if i == 1 else z)
        rows.append(tuple(row))
    eta = HiggsFieldMatrix(V, W, tuple(rows))
    datum = FamilyDatum("so_nn_hitchin", n, genus, q=qs + (qn_s,))
    return HiggsBundle(V, W, eta, datum, ctx)


def build_from_datum(datum: FamilyDatum) -> HiggsBundle:
    if datum.family == "hitchin":
        return build_hitchin(datum.n, datum.q, datum.genus)
    if datum.family in ("psi_d", "psi_0"):
        m = datum.m
        top = datum.n * (2 * datum.genus - 2)
        msym = None
        if m.degree and abs(m.degree) == top:
            msym = K(datum.n if m.degree > 0 else -datum.n)
        return _psi_shape(datum.n, datum.genus, m, datum.mu, datum.nu, datum.q, datum.family, datum.d,
                          m_symbol=msym)
    if datum.family == "psi_sw":
        return build_psi_sw(datum.n, datum.genus, datum.mu, datum.q, sw2=datum.m.sw2, label=datum.m.label)
    if datum.family == "so_nn_hitchin":
        return build_so_nn_hitchin(datum.n, datum.q[:-1], datum.q[-1], datum.genus)
    raise ValueError(f"unknown family {datum.family}")


def so12_admits_polystable(d: int, genus: int) -> bool:
    """Whether the n = 1 family with deg M = d > 0 has a polystable member.

    mu in H^0(M^{-1}K) must be nonzero, so past d = 2g-2 only mu = 0 typechecks.
    """
    if d <= 0:
        raise DegreeOutOfRange("the bound concerns d > 0")
    if d <= 2 * genus - 2:
        hb = build_psi_d(1, d, genus, mu=True)
    else:
        hb = _unchecked_psi_d(1, d, genus, mu=False, nu=None, q=None)
    if not hb.typecheck().ok:
        return False
    return hb.stability().classification != "unstable"


# ------------------------------------------------------------------ gauges


@dataclass(frozen=True)
class GaugePair:
    """A pair (g_V, g_W) acting by eta -> g_W (eta_scale * eta) g_V^{-1}."""

    name: str
    n: int
    g_V: ExactMatrix
    g_W: ExactMatrix
    eta_scale: Fraction = Fraction(1)
    # effect on the auxiliary bundle: +1 keeps M, -1 replaces it by M^{-1}
    m_action: int = 1

    def check(self, V: OrthChainBundle, W: OrthChainBundle) -> list[str]:
        problems = []
        if self.g_V.T @ V.pairing @ self.g_V != V.pairing:
            problems.append("g_V is not orthogonal")
        # g_W maps W to W' whose pairing is again antidiagonal
        if self.g_W.T @ W.pairing @ self.g_W != W.pairing:
            problems.append("g_W is not orthogonal")
        if self.g_V.det() * self.g_W.det() != 1:
            problems.append("det(g_V) det(g_W) != 1")
        return problems


def scaling_gauge(n: int, lam) -> GaugePair:
    lam = Fraction(lam)
    if lam == 0:
        raise InvalidGauge("lambda must be nonzero")
    gv = ExactMatrix.diagonal([lam ** (n + 1 - 2 * j) for j in range(1, n + 1)])
    gw = ExactMatrix.diagonal([lam ** (n + 2 - 2 * i) for i in range(1, n + 2)])
    return GaugePair("scaling", n, gv, gw, eta_scale=lam)


def switching_gauge(n: int) -> GaugePair:
    gv = ExactMatrix.identity(n).scale(-1)
    rows = [[0] * (n + 1) for _ in range(n + 1)]
    rows[0][n] = -1
    rows[n][0] = -1
    for i in range(1, n):
        rows[i][i] = -1
    return GaugePair("switching", n, gv, ExactMatrix(rows), m_action=-1)


def psi0_torus_gauge(n: int, lam) -> GaugePair:
    lam = Fraction(lam)
    if lam == 0:
        raise InvalidGauge("lambda must be nonzero")
    gw = ExactMatrix.diagonal([lam] + [1] * (n - 1) + [1 / lam])
    return GaugePair("psi0-torus", n, ExactMatrix.identity(n), gw)


def psi0_swap_gauge(n: int, lam) -> GaugePair:
    """(-Id_V, antidiag(lam, -Id_{W_0}, 1/lam)); lam = -1 is the switching gauge."""
    return _swap_gauge(n, lam, -1, "psi0-swap")


def parity_sign_swap_gauge(n: int, lam) -> GaugePair:
    """The same shape with sign (-1)^{n+1} on V and W_0.

    For odd n this pair has det(g_V) det(g_W) = -1; GaugePair.check reports it.
    """
    return _swap_gauge(n, lam, (-1) ** (n + 1), "psi0-swap-parity-sign")


def _swap_gauge(n: int, lam, sign: int, name: str) -> GaugePair:
    lam = Fraction(lam)
    if lam == 0:
        raise InvalidGauge("lambda must be nonzero")
    rows = [[0] * (n + 1) for _ in range(n + 1)]
    rows[0][n] = lam
    rows[n][0] = 1 / lam
    for i in range(1, n):
        rows[i][i] = sign
    return GaugePair(name, n, ExactMatrix.identity(n).scale(sign), ExactMatrix(rows), m_action=-1)


def _numeric_eta(hb: HiggsBundle) -> ExactMatrix:
    return ExactMatrix([[s.evaluate() for s in r] for r in hb.eta.entries])


def _decode_psi(n: int, mat: ExactMatrix, template: FamilyDatum, m: MLine) -> FamilyDatum:
    """Read (mu, nu, q) off a matrix of the psi shape; reject anything else."""
    nu = mat[0, n - 1]
    mu = mat[n, n - 1]
    qs = tuple(mat[1, k] for k in range(1, n))  # q_2 .. q_{2n-2}
    expect = [[Fraction(0)] * n for _ in range(n + 1)]
    expect[0][n - 1] = nu
    expect[n][n - 1] = mu
    for i in range(2, n + 1):
        for j in range(1, n + 1):
            k = 2 * (j - i + 1)
            expect[i - 1][j - 1] = Fraction(1) if k == 0 else (qs[k // 2 - 1] if 0 < k <= 2 * n - 2 else Fraction(0))
    if ExactMatrix(expect) != mat:
        raise InvalidGauge("gauge transformation leaves the family shape")
    return replace(
        template,
        m=m,
        d=m.degree,
        mu=Section.named("mu", value=mu),
        nu=Section.named("nu", value=nu),
        q=tuple(Section.named(f"q{2 * (k + 1)}", value=v) for k, v in enumerate(qs)),
    )


def apply_gauge(gp: GaugePair, datum: FamilyDatum) -> FamilyDatum:
    """Transform a numeric psi_d / psi_0 datum by an explicit gauge pair."""
    if datum.family not in ("psi_d", "psi_0"):
        raise InvalidGauge(f"gauges are implemented for the psi families, not {datum.family}")
    if gp.n != datum.n:
        raise InvalidGauge("gauge built for a different n")
    if not datum.numeric():
        raise InvalidGauge("apply_gauge needs numeric sections")
    hb = build_from_datum(datum)
    problems = gp.check(hb.V, hb.W)
    if problems:
        raise InvalidGauge("; ".join(problems))
    eta = _numeric_eta(hb).scale(gp.eta_scale)
    new = gp.g_W @ eta @ gp.g_V.inverse()
    m = datum.m if gp.m_action == 1 else datum.m.inverse()
    return _decode_psi(datum.n, new, datum, m)


def _val(s: Section | None) -> Fraction:
    return Fraction(0) if s is None else s.evaluate()


def scaling_formula(datum: FamilyDatum, lam) -> FamilyDatum:
    """(M, mu, nu, q_2, ...) -> (M, mu, lam^{2n} nu, lam^2 q_2, ..., lam^{2n-2} q_{2n-2})."""
    lam = Fraction(lam)
    n = datum.n
    return replace(
        datum,
        mu=Section.named("mu", value=_val(datum.mu)),
        nu=Section.named("nu", value=lam ** (2 * n) * _val(datum.nu)),
        q=tuple(Section.named(f"q{2 * (k + 1)}", value=lam ** (2 * (k + 1)) * _val(s))
                for k, s in enumerate(datum.q)),
    )


def switching_formula(datum: FamilyDatum) -> FamilyDatum:
    """Psi_d(M, mu, nu, q) -> Psi_{-d}(M^{-1}, nu, mu, q)."""
    return replace(
        datum,
        m=datum.m.inverse(),
        d=-datum.d if datum.d else 0,
        mu=Section.named("mu", value=_val(datum.nu)),
        nu=Section.named("nu", value=_val(datum.mu)),
        q=tuple(Section.named(f"q{2 * (k + 1)}", value=_val(s)) for k, s in enumerate(datum.q)),
    )


def _same_values(a: Sequence[Section], b: Sequence[Section]) -> bool:
    return len(a) == len(b) and all(_val(x) == _val(y) for x, y in zip(a, b))


def _rescalable(mu, nu, mu2, nu2) -> bool:
    """Is there lam != 0 with mu2 = lam mu and nu2 = nu / lam?"""
    if mu != 0:
        if mu2 == 0:
            return False
        lam = mu2 / mu
        return nu2 == nu / lam
    if mu2 != 0:
        return False
    if nu != 0:
        return nu2 != 0
    return nu2 == 0


def _same_m(a: MLine, b: MLine) -> bool:
    return (a.label, a.sign, a.degree, a.torsion) == (b.label, b.sign, b.degree, b.torsion)


def orbit_equal(a: FamilyDatum, b: FamilyDatum) -> bool:
    """Gauge-orbit equality according to the classification of each family."""
    fam = a.family
    if fam != b.family or a.n != b.n or a.genus != b.genus:
        raise MixedFamilies(f"{a.family} vs {b.family}")
    if fam in ("hitchin", "so_nn_hitchin"):
        return _same_values(a.q, b.q)
    if not _same_values(a.q, b.q):
        return False
    mu, nu, mu2, nu2 = _val(a.mu), _val(a.nu), _val(b.mu), _val(b.nu)
    if fam == "psi_d":
        return _same_m(a.m, b.m) and _rescalable(mu, nu, mu2, nu2)
    if fam == "psi_0":
        if _same_m(a.m, b.m) and _rescalable(mu, nu, mu2, nu2):
            return True
        swapped = a.m.inverse()
        return _same_m(swapped, b.m) and _rescalable(nu, mu, mu2, nu2)
    if fam == "psi_sw":
        same_m = a.m.label == b.m.label and a.m.sw2 == b.m.sw2
        return same_m and (mu2 == mu or mu2 == -mu)
    raise MixedFamilies(f"no orbit rule for {fam}")


def pull_back_sw(datum: FamilyDatum) -> FamilyDatum:
    """(M, mu) -> (iota^* M, iota^* mu) for the sw family."""
    return replace(datum, m=replace(datum.m, pulled=not datum.m.pulled))


def hitchin_invariants(datum: FamilyDatum, seed: int | None = None) -> tuple[Fraction, ...]:
    """Even coefficients of det(x - Phi) for a numeric instantiation.

    Unvalued sections marked nonzero receive seeded random rationals.
    """
    import random

    rng = random.Random(seed)

    def inst(s: Section | None, name: str):
        if s is None or s.is_zero():
            return s
        if s.value is not None or s.kind == "one":
            return s
        return Section.named(name, value=Fraction(rng.randint(-100, 100) or 1, rng.randint(1, 100)))

    filled = replace(
        datum,
        mu=inst(datum.mu, "mu"),
        nu=inst(datum.nu, "nu"),
        q=tuple(inst(s, s.name or "q") for s in datum.q),
    )
    hb = build_from_datum(filled)
    coeffs = char_poly(hb.phi())
    odd = coeffs[1::2]
    if any(odd):
        raise ArithmeticError(f"odd coefficients do not vanish: {odd}")
    return tuple(coeffs[2::2])


# --------------------------------------------------------- O(2) stabilizer


def o2_stabilizer(m_self_dual: bool, mu_zero: bool, nu_zero: bool, proportional: bool) -> str:
    """Stabilizer of (M, mu, nu) with mu = 0 iff nu = 0, by the case table."""
    if mu_zero != nu_zero:
        raise ValueError("point is outside the polystable locus")
    if mu_zero:
        return "O(2)" if m_self_dual else "SO(2)"
    if m_self_dual and proportional:
        return "Z2"
    return "trivial"


def o2_stabilizer_from_action(m_self_dual: bool, mu: Sequence[Fraction], nu: Sequence[Fraction]) -> str:
    """Stabilizer derived directly from the action on vectors of section coordinates.

    diag(l, 1/l) sends (M, mu, nu) to (M, mu/l, l nu); the swap composed with
    it sends (M, mu, nu) to (M^{-1}, l nu, mu/l).
    """
    mu = [Fraction(x) for x in mu]
    nu = [Fraction(x) for x in nu]
    zero_mu = not any(mu)
    zero_nu = not any(nu)
    # torus part: every l fixes the point iff mu = nu = 0, otherwise only l = 1
    torus_infinite = zero_mu and zero_nu
    # swap part: need M = M^{-1} and some l with mu = l nu and nu = mu / l
    swap_solutions = 0
    if m_self_dual:
        if zero_mu and zero_nu:
            swap_solutions = 2  # all l, infinitely many
        elif not zero_mu and not zero_nu:
            ratios = {a / b for a, b in zip(mu, nu) if b}
            consistent = all((a == 0) == (b == 0) for a, b in zip(mu, nu))
            if consistent and len(ratios) == 1:
                swap_solutions = 1
    if torus_infinite:
        return "O(2)" if swap_solutions else "SO(2)"
    return "Z2" if swap_solutions == 1 else "trivial"


# ------------------------------------------------------------ pushforward


def pushforward_rank2(m: MLine, ctx: CurveContext) -> Rank2Block:
    """pi_* M as a rank two orthogonal block; sw2 is the declared Prym component."""
    if not ctx.double_cover:
        raise NoPrymFlag("no double cover in the curve context")
    if not m.prym:
        raise NoPrymFlag("M is not marked as a Prym element (iota^* M = M^{-1})")
    if m.degree != 0:
        raise NoPrymFlag("Prym elements have degree 0")
    return Rank2Block(sw1=1, sw2=m.sw2)


def pushforward_degree(m_degree: int) -> int:
    """deg pi_* M on X: pi^* pi_* M = M + iota^* M has degree 2 deg M, so deg pi_* M = deg M."""
    return m_degree
