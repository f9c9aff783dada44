"""Exact scalars and small dense matrices.

Every computation in the package happens over the rationals or over the
quadratic field Q(sqrt 2).  Rationals are plain :class:`fractions.Fraction`
objects; :class:`QSqrt2` adds the one irrationality that the orthogonal
embeddings need.  :class:`ExactMatrix` is an immutable dense matrix that
works for either scalar type, and only ever uses field operations.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from numbers import Rational
from typing import Callable, Iterable, Sequence, Union

__all__ = [
    "ExactError",
    "DimensionMismatch",
    "NotNilpotent",
    "SingularMatrix",
    "QSqrt2",
    "ExactMatrix",
    "to_scalar",
    "mat_exp_nilpotent",
    "char_poly",
    "commutator",
    "SQRT2",
]


class ExactError(ArithmeticError):
    """Base class for errors raised by the exact kernels."""


class DimensionMismatch(ExactError, ValueError):
    pass


class NotNilpotent(ExactError):
    pass


class SingularMatrix(ExactError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class QSqrt2:
    """An element a + b*sqrt(2) of Q(sqrt 2) with rational a, b.

    Compares equal (and hashes equal) to the rational ``a`` when ``b == 0``
    so that mixed matrices behave.
    """

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = _frac(a)
        self.b = _frac(b)

    @staticmethod
    def _coerce(x) -> "QSqrt2 | None":
        if isinstance(x, QSqrt2):
            return x
        if isinstance(x, (int, Fraction)):
            return QSqrt2(x, 0)
        return None

    def __add__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm a^2 - 2 b^2; zero only for zero."""
        return self.a * self.a - 2 * self.b * self.b

    def conjugate(self) -> "QSqrt2":
        return QSqrt2(self.a, -self.b)

    def inverse(self) -> "QSqrt2":
        nm = self.norm()
        if nm == 0:
            raise ZeroDivisionError("QSqrt2 division by zero")
        return QSqrt2(self.a / nm, -self.b / nm)

    def __truediv__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        out, base = QSqrt2(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        o = QSqrt2._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(2)."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sb == 0 or sa == sb:
            return sa or sb
        # opposite signs: compare a^2 with 2 b^2
        big = self.a * self.a - 2 * self.b * self.b
        return sa if big > 0 else -sa

    def _cmp(self, other) -> int:
        o = QSqrt2._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare QSqrt2 with {other!r}")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self):
        return float(self.a) + float(self.b) * 2 ** 0.5

    def __repr__(self):
        return f"QSqrt2({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt2"
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*sqrt2"


SQRT2 = QSqrt2(0, 1)

Scalar = Union[Fraction, QSqrt2]


def to_scalar(x) -> Scalar:
    """Normalise ints (and other exact rationals) to Fraction; floats are rejected."""
    if isinstance(x, (Fraction, QSqrt2)):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"inexact scalar {x!r} ({type(x).__name__})")


_ZERO = Fraction(0)
_ONE = Fraction(1)


class ExactMatrix:
    """Immutable dense matrix over Fraction or QSqrt2.

    Indices passed to ``[i, j]`` are 0-based; :meth:`elementary` follows the
    usual 1-based E_{ij} convention.
    """

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(to_scalar(x) for x in r) for r in rows)
        if not data:
            raise DimensionMismatch("empty matrix")
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise DimensionMismatch("ragged rows")
        self.rows = len(data)
        self.cols = width
        self._data = data
        self._hash = None

    @classmethod
    def _raw(cls, data: tuple) -> "ExactMatrix":
        m = object.__new__(cls)
        m._data = data
        m.rows = len(data)
        m.cols = len(data[0])
        m._hash = None
        return m

    # constructors
    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "ExactMatrix":
        cols = rows if cols is None else cols
        return cls._raw(tuple((_ZERO,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls._raw(tuple(tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def elementary(cls, n: int, i: int, j: int, value=1, cols: int | None = None) -> "ExactMatrix":
        """E_{ij} (1-based) scaled by ``value``."""
        cols = n if cols is None else cols
        if not (1 <= i <= n and 1 <= j <= cols):
            raise DimensionMismatch(f"E_({i},{j}) outside {n}x{cols}")
        v = to_scalar(value)
        return cls._raw(
            tuple(
                tuple(v if (r == i - 1 and c == j - 1) else _ZERO for c in range(cols))
                for r in range(n)
            )
        )

    @classmethod
    def diagonal(cls, entries: Sequence) -> "ExactMatrix":
        n = len(entries)
        ent = [to_scalar(e) for e in entries]
        return cls._raw(tuple(tuple(ent[i] if i == j else _ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "ExactMatrix":
        return cls(zip(*columns))

    # basic access
    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key):
        i, j = key
        return self._data[i][j]

    def entry(self, i: int, j: int):
        """1-based access, mirroring E_{ij} notation."""
        return self._data[i - 1][j - 1]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def to_lists(self) -> list[list]:
        return [list(r) for r in self._data]

    def entries(self) -> tuple:
        """Row-major flattening."""
        return tuple(x for r in self._data for x in r)

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._data)
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"ExactMatrix[{self.rows}x{self.cols}]({body})"

    def map(self, f: Callable) -> "ExactMatrix":
        return ExactMatrix._raw(tuple(tuple(to_scalar(f(x)) for x in r) for r in self._data))

    # arithmetic
    def _check_same(self, other: "ExactMatrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same(other)
        return ExactMatrix._raw(
            tuple(tuple(a + b if b else a for a, b in zip(r, s)) for r, s in zip(self._data, other._data))
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same(other)
        return ExactMatrix._raw(
            tuple(tuple(a - b if b else a for a, b in zip(r, s)) for r, s in zip(self._data, other._data))
        )

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix._raw(tuple(tuple(-a for a in r) for r in self._data))

    def scale(self, c) -> "ExactMatrix":
        c = to_scalar(c)
        return ExactMatrix._raw(tuple(tuple(c * a if a else a for a in r) for r in self._data))

    def __mul__(self, other):
        if isinstance(other, ExactMatrix):
            return self.matmul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self.matmul(other)

    def __truediv__(self, c) -> "ExactMatrix":
        c = to_scalar(c)
        if not c:
            raise ZeroDivisionError("matrix divided by zero")
        return self.scale(1 / c)

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        # skip zeros on both sides; unipotent factors are very sparse
        brows = [[(j, b) for j, b in enumerate(r) if b] for r in other._data]
        width = other.cols
        out = []
        for r in self._data:
            acc = [_ZERO] * width
            for k, a in enumerate(r):
                if not a:
                    continue
                for j, b in brows[k]:
                    acc[j] = acc[j] + a * b
            out.append(tuple(acc))
        return ExactMatrix._raw(tuple(out))

    def __pow__(self, e: int) -> "ExactMatrix":
        if not self.is_square():
            raise DimensionMismatch("power of a non-square matrix")
        if e < 0:
            return self.inverse() ** (-e)
        out, base = ExactMatrix.identity(self.rows), self
        while e:
            if e & 1:
                out = out @ base
            base = base @ base
            e >>= 1
        return out

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix._raw(tuple(zip(*self._data)))

    def transpose(self) -> "ExactMatrix":
        return self.T

    def trace(self):
        if not self.is_square():
            raise DimensionMismatch("trace of a non-square matrix")
        t = _ZERO
        for i in range(self.rows):
            t = t + self._data[i][i]
        return t

    def is_zero(self) -> bool:
        return not any(x for r in self._data for x in r)

    def is_identity(self) -> bool:
        return self.is_square() and all(
            (x == 1) if i == j else (not x)
            for i, r in enumerate(self._data)
            for j, x in enumerate(r)
        )

    def is_upper_unitriangular(self) -> bool:
        return self.is_square() and all(
            (x == 1) if i == j else (not x)
            for i, r in enumerate(self._data)
            for j, x in enumerate(r)
            if j <= i
        )

    def hstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch("hstack needs equal row counts")
        return ExactMatrix._raw(tuple(r + s for r, s in zip(self._data, other._data)))

    def vstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.cols:
            raise DimensionMismatch("vstack needs equal column counts")
        return ExactMatrix._raw(self._data + other._data)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix._raw(tuple(tuple(self._data[i][j] for j in cols) for i in rows))

    # elimination based kernels
    def _rref(self):
        """Reduced row echelon form as a mutable list plus the pivot columns."""
        m = [list(r) for r in self._data]
        pivots = []
        r = 0
        for c in range(self.cols):
            piv = next((i for i in range(r, self.rows) if m[i][c]), None)
            if piv is None:
                continue
            m[r], m[piv] = m[piv], m[r]
            inv = 1 / m[r][c]
            m[r] = [x * inv for x in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c]:
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return m, pivots

    def rank(self) -> int:
        return len(self._rref()[1])

    def nullspace(self) -> list[tuple]:
        """Basis of {x : A x = 0} as a list of column tuples."""
        m, pivots = self._rref()
        free = [c for c in range(self.cols) if c not in pivots]
        basis = []
        for f in free:
            v = [_ZERO] * self.cols
            v[f] = _ONE
            for r, p in enumerate(pivots):
                v[p] = -m[r][f]
            basis.append(tuple(v))
        return basis

    def det(self):
        if not self.is_square():
            raise DimensionMismatch("determinant of a non-square matrix")
        m = [list(r) for r in self._data]
        n = self.rows
        d = _ONE
        for c in range(n):
            piv = next((i for i in range(c, n) if m[i][c]), None)
            if piv is None:
                return _ZERO
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                d = -d
            d = d * m[c][c]
            inv = 1 / m[c][c]
            for i in range(c + 1, n):
                if m[i][c]:
                    f = m[i][c] * inv
                    m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        return d

    def inverse(self) -> "ExactMatrix":
        if not self.is_square():
            raise DimensionMismatch("inverse of a non-square matrix")
        n = self.rows
        aug = self.hstack(ExactMatrix.identity(n))
        m, pivots = aug._rref()
        if pivots[:n] != list(range(n)):
            raise SingularMatrix("matrix is not invertible")
        return ExactMatrix._raw(tuple(tuple(r[n:]) for r in m))

    def solve(self, rhs: "ExactMatrix") -> "ExactMatrix":
        """Unique solution X of self @ X = rhs for square invertible self."""
        if rhs.rows != self.rows:
            raise DimensionMismatch("right-hand side has the wrong number of rows")
        n = self.rows
        if not self.is_square():
            raise DimensionMismatch("solve needs a square matrix")
        m, pivots = self.hstack(rhs)._rref()
        if pivots[:n] != list(range(n)):
            raise SingularMatrix("system is singular")
        return ExactMatrix._raw(tuple(tuple(r[n:]) for r in m))

    def char_poly(self) -> list:
        return char_poly(self)


def commutator(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return a @ b - b @ a


def mat_exp_nilpotent(n_mat: ExactMatrix, k: int | None = None) -> ExactMatrix:
    """exp(N) = sum_{i<k} N^i / i! for N with N^k = 0.

    ``k`` defaults to the dimension, which always suffices for a nilpotent
    matrix.  Raises NotNilpotent when the witness is wrong.
    """
    if not n_mat.is_square():
        raise DimensionMismatch("exp of a non-square matrix")
    dim = n_mat.rows
    k = dim if k is None else k
    if k < 1 or k > dim:
        raise ValueError(f"nilpotency witness {k} outside [1, {dim}]")
    total = ExactMatrix.identity(dim)
    power = ExactMatrix.identity(dim)
    for i in range(1, k):
        power = power @ n_mat
        if power.is_zero():
            return total
        total = total + power.scale(Fraction(1, factorial(i)))
    if not (power @ n_mat).is_zero():
        raise NotNilpotent(f"N^{k} is not zero")
    return total


def char_poly(a: ExactMatrix) -> list:
    """Coefficients of det(x I - A), leading coefficient first.

    Faddeev-LeVerrier recursion; exact over any field of characteristic zero.
    """
    if not a.is_square():
        raise DimensionMismatch("characteristic polynomial of a non-square matrix")
    n = a.rows
    coeffs = [_ONE]
    m = ExactMatrix.zeros(n)
    ident = ExactMatrix.identity(n)
    c_prev = _ONE
    for k in range(1, n + 1):
        m = a @ m + ident.scale(c_prev)
        c_prev = -(a @ m).trace() / k
        coeffs.append(c_prev)
    return coeffs
