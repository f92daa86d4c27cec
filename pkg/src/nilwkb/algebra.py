"""Exact scalar, polynomial, rational-function and matrix arithmetic.

Coefficients are Gaussian rationals (pairs of ``fractions.Fraction``), so every
identity checked on catalog objects (nilpotency, flatness, residue conditions)
is exact rather than tolerance-dependent.  The antiholomorphic coordinate is a
second formal variable ``zbar``; conjugation becomes a substitution at
evaluation time, which keeps unitary-frame connection terms such as
``dz/z - dzbar/zbar`` rational.

Doubles enter only through :meth:`BiRationalFunction.evaluate` and the
compiled evaluators used by the transport layer.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import sympy
from sympy.polys.domains import QQ_I

from .errors import DimensionMismatch, PoleHit

_Z, _ZBAR = sympy.symbols("z zbar")

EVAL_TOLERANCE = 1e-14


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        if x != int(x):
            raise TypeError(f"refusing to coerce non-integral float {x!r} to an exact rational")
        return Fraction(int(x))
    raise TypeError(f"cannot coerce {type(x).__name__} to Fraction")


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, *args):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(_as_fraction(x.real), _as_fraction(x.imag))
        return cls(_as_fraction(x))

    @classmethod
    def from_strings(cls, re: str, im: str) -> "GaussianRational":
        return cls(Fraction(re), Fraction(im))

    # -- field operations ---------------------------------------------------

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    # -- predicates and conversions ------------------------------------------

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if not self.im:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


def _domain_elt(c: GaussianRational):
    return QQ_I.new(
        sympy.Rational(c.re.numerator, c.re.denominator),
        sympy.Rational(c.im.numerator, c.im.denominator),
    )


def _from_domain_elt(e) -> GaussianRational:
    x, y = e.x, e.y
    return GaussianRational(
        Fraction(int(x.numerator), int(x.denominator)),
        Fraction(int(y.numerator), int(y.denominator)),
    )


class BiPolynomial:
    """Polynomial in the two formal variables (z, zbar) over Gaussian rationals.

    Stored as a monomial dict {(deg_z, deg_zbar): coefficient} with zero
    coefficients stripped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, GaussianRational] | None = None):
        clean = {}
        if terms:
            for (i, j), c in terms.items():
                c = GaussianRational.coerce(c)
                if c:
                    clean[(int(i), int(j))] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *args):
        raise AttributeError("BiPolynomial is immutable")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c) -> "BiPolynomial":
        return cls({(0, 0): GaussianRational.coerce(c)})

    @classmethod
    def z(cls) -> "BiPolynomial":
        return cls({(1, 0): GR_ONE})

    @classmethod
    def zbar(cls) -> "BiPolynomial":
        return cls({(0, 1): GR_ONE})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "BiPolynomial":
        return cls({(i, j): GaussianRational.coerce(c)})

    # -- ring operations ------------------------------------------------------

    def __add__(self, other: "BiPolynomial") -> "BiPolynomial":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, GR_ZERO) + c
        return BiPolynomial(out)

    def __sub__(self, other: "BiPolynomial") -> "BiPolynomial":
        return self + (-other)

    def __neg__(self) -> "BiPolynomial":
        return BiPolynomial({k: -c for k, c in self.terms.items()})

    def __mul__(self, other: "BiPolynomial") -> "BiPolynomial":
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                prev = out.get(k)
                out[k] = c1 * c2 if prev is None else prev + c1 * c2
        return BiPolynomial(out)

    def scale(self, c) -> "BiPolynomial":
        c = GaussianRational.coerce(c)
        return BiPolynomial({k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, BiPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> tuple:
        """(max deg_z, max deg_zbar); (-1, -1) for the zero polynomial."""
        if not self.terms:
            return (-1, -1)
        return (max(i for i, _ in self.terms), max(j for _, j in self.terms))

    def leading_monomial(self) -> tuple:
        """Lexicographically largest (deg_z, deg_zbar) monomial present."""
        return max(self.terms)

    # -- calculus --------------------------------------------------------------

    def derivative_z(self) -> "BiPolynomial":
        return BiPolynomial({(i - 1, j): c * i for (i, j), c in self.terms.items() if i > 0})

    def derivative_zbar(self) -> "BiPolynomial":
        return BiPolynomial({(i, j - 1): c * j for (i, j), c in self.terms.items() if j > 0})

    def conj_swap(self) -> "BiPolynomial":
        """Formal complex conjugate: swap z <-> zbar and conjugate coefficients."""
        return BiPolynomial({(j, i): c.conjugate() for (i, j), c in self.terms.items()})

    # -- evaluation -------------------------------------------------------------

    def eval_complex(self, z: complex, zbar: complex) -> complex:
        total = 0j
        for (i, j), c in self.terms.items():
            total += c.to_complex() * z**i * zbar**j
        return total

    def eval_exact(self, z: GaussianRational, zbar: GaussianRational) -> GaussianRational:
        total = GR_ZERO
        for (i, j), c in self.terms.items():
            term = c
            for _ in range(i):
                term = term * z
            for _ in range(j):
                term = term * zbar
            total = total + term
        return total

    def max_coeff_magnitude(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(c.to_complex()) for c in self.terms.values())

    # -- sympy bridge (gcd only) --------------------------------------------------

    def _to_sympy(self):
        d = {k: _domain_elt(c) for k, c in self.terms.items()}
        if not d:
            d = {(0, 0): QQ_I.zero}
        return sympy.Poly.from_dict(d, _Z, _ZBAR, domain=QQ_I)

    @classmethod
    def _from_sympy(cls, poly) -> "BiPolynomial":
        return cls({k: _from_domain_elt(c) for k, c in poly.rep.to_dict().items()})

    def __repr__(self):
        if not self.terms:
            return "BiPolynomial(0)"
        bits = []
        for (i, j), c in sorted(self.terms.items()):
            bits.append(f"({c.re}{'+' if c.im >= 0 else ''}{c.im}i)z^{i}zb^{j}")
        return "BiPolynomial(" + " + ".join(bits) + ")"


def _poly_gcd(a: BiPolynomial, b: BiPolynomial) -> BiPolynomial:
    return BiPolynomial._from_sympy(a._to_sympy().gcd(b._to_sympy()))


def _poly_div_exact(a: BiPolynomial, b: BiPolynomial) -> BiPolynomial:
    q, r = a._to_sympy().div(b._to_sympy())
    if not r.is_zero:
        raise ArithmeticError("inexact polynomial division during normalization")
    return BiPolynomial._from_sympy(q)


class BiRationalFunction:
    """Quotient of two BiPolynomials in canonical form.

    Canonical form: gcd(num, den) is a unit and the lexicographically leading
    coefficient of the denominator is 1, so equality is plain structural
    equality.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: BiPolynomial, den: BiPolynomial | None = None, _normalized=False):
        if den is None:
            den = BiPolynomial.constant(1)
        if den.is_zero:
            raise ZeroDivisionError("zero denominator in BiRationalFunction")
        if not _normalized:
            num, den = self._normalize(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *args):
        raise AttributeError("BiRationalFunction is immutable")

    @staticmethod
    def _normalize(num: BiPolynomial, den: BiPolynomial):
        if num.is_zero:
            return BiPolynomial(), BiPolynomial.constant(1)
        g = _poly_gcd(num, den)
        if g.degree() != (0, 0) or g.terms.get((0, 0)) != GR_ONE:
            num = _poly_div_exact(num, g)
            den = _poly_div_exact(den, g)
        lead = den.terms[den.leading_monomial()]
        if lead != GR_ONE:
            inv = GR_ONE / lead
            num = num.scale(inv)
            den = den.scale(inv)
        return num, den

    # -- constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, c) -> "BiRationalFunction":
        return cls(BiPolynomial.constant(c))

    @classmethod
    def zero(cls) -> "BiRationalFunction":
        return cls(BiPolynomial())

    @classmethod
    def one(cls) -> "BiRationalFunction":
        return cls(BiPolynomial.constant(1))

    @classmethod
    def z(cls) -> "BiRationalFunction":
        return cls(BiPolynomial.z())

    @classmethod
    def zbar(cls) -> "BiRationalFunction":
        return cls(BiPolynomial.zbar())

    @classmethod
    def from_poles(cls, scalar, poles: Iterable) -> "BiRationalFunction":
        """scalar / prod (z - pole), the shape of every toy-model denominator."""
        den = BiPolynomial.constant(1)
        for p in poles:
            den = den * (BiPolynomial.z() - BiPolynomial.constant(GaussianRational.coerce(p)))
        return cls(BiPolynomial.constant(scalar), den)

    # -- field operations ----------------------------------------------------------

    def __add__(self, other: "BiRationalFunction") -> "BiRationalFunction":
        return BiRationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "BiRationalFunction") -> "BiRationalFunction":
        return BiRationalFunction(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> "BiRationalFunction":
        return BiRationalFunction(-self.num, self.den, _normalized=True)

    def __mul__(self, other: "BiRationalFunction") -> "BiRationalFunction":
        return BiRationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "BiRationalFunction") -> "BiRationalFunction":
        if other.num.is_zero:
            raise ZeroDivisionError("division by zero rational function")
        return BiRationalFunction(self.num * other.den, self.den * other.num)

    def scale(self, c) -> "BiRationalFunction":
        c = GaussianRational.coerce(c)
        if not c:
            return BiRationalFunction.zero()
        return BiRationalFunction(self.num.scale(c), self.den, _normalized=False)

    def __eq__(self, other):
        return (
            isinstance(other, BiRationalFunction)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.num.is_zero

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    # -- calculus ---------------------------------------------------------------------

    def derivative_z(self) -> "BiRationalFunction":
        return BiRationalFunction(
            self.num.derivative_z() * self.den - self.num * self.den.derivative_z(),
            self.den * self.den,
        )

    def derivative_zbar(self) -> "BiRationalFunction":
        return BiRationalFunction(
            self.num.derivative_zbar() * self.den - self.num * self.den.derivative_zbar(),
            self.den * self.den,
        )

    def conj_swap(self) -> "BiRationalFunction":
        return BiRationalFunction(self.num.conj_swap(), self.den.conj_swap())

    def invert_chart(self) -> "BiRationalFunction":
        """Substitute z -> 1/z, zbar -> 1/zbar (no Jacobian factor)."""
        ni, nj = self.num.degree()
        di, dj = self.den.degree()
        mi, mj = max(ni, di), max(nj, dj)
        flip = lambda p: BiPolynomial({(mi - i, mj - j): c for (i, j), c in p.terms.items()})
        return BiRationalFunction(flip(self.num), flip(self.den))

    # -- evaluation -----------------------------------------------------------------------

    def evaluate(self, z: complex) -> complex:
        """Numeric value at z with zbar := conj(z); raises PoleHit near poles."""
        zc = complex(z)
        nv = self.num.eval_complex(zc, zc.conjugate())
        dv = self.den.eval_complex(zc, zc.conjugate())
        if abs(dv) <= EVAL_TOLERANCE * (1.0 + abs(nv)):
            raise PoleHit(f"denominator vanishes at z={z!r}")
        return nv / dv

    def evaluate_exact(self, z: GaussianRational) -> GaussianRational:
        zb = z.conjugate()
        dv = self.den.eval_exact(z, zb)
        if not dv:
            raise PoleHit(f"denominator vanishes exactly at z={z!r}")
        return self.num.eval_exact(z, zb) / dv

    def compiled(self) -> Callable[[complex], complex]:
        """Closure evaluating this function in doubles (for the transport layer)."""
        num_terms = [(i, j, c.to_complex()) for (i, j), c in self.num.terms.items()]
        den_terms = [(i, j, c.to_complex()) for (i, j), c in self.den.terms.items()]

        def ev(z: complex) -> complex:
            zb = z.conjugate()
            n = 0j
            for i, j, c in num_terms:
                n += c * z**i * zb**j
            d = 0j
            for i, j, c in den_terms:
                d += c * z**i * zb**j
            if abs(d) <= EVAL_TOLERANCE * (1.0 + abs(n)):
                raise PoleHit(f"denominator vanishes at z={z!r}")
            return n / d

        return ev

    # -- serialization ------------------------------------------------------------------------

    def to_json(self) -> dict:
        enc = lambda p: [
            [i, j, str(c.re), str(c.im)] for (i, j), c in sorted(p.terms.items())
        ]
        return {"num": enc(self.num), "den": enc(self.den)}

    @classmethod
    def from_json(cls, data: dict) -> "BiRationalFunction":
        dec = lambda rows: BiPolynomial(
            {(int(i), int(j)): GaussianRational.from_strings(re, im) for i, j, re, im in rows}
        )
        num, den = dec(data["num"]), dec(data["den"])
        if den.is_zero:
            raise ZeroDivisionError("zero denominator in serialized rational function")
        # Serialized functions are stored in canonical form; re-normalize anyway
        # so hand-written files are accepted too.
        return cls(num, den)

    def __repr__(self):
        return f"BiRationalFunction({self.num!r} / {self.den!r})"


BRF = BiRationalFunction


class RationalFunctionMatrix:
    """Dense matrix of BiRationalFunctions."""

    __slots__ = ("entries", "rows", "cols")

    def __init__(self, entries):
        rows = tuple(tuple(e for e in row) for row in entries)
        if not rows or not rows[0]:
            raise DimensionMismatch("empty matrix")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionMismatch("ragged matrix rows")
        for row in rows:
            for e in row:
                if not isinstance(e, BiRationalFunction):
                    raise TypeError("matrix entries must be BiRationalFunction")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", ncols)

    def __setattr__(self, *args):
        raise AttributeError("RationalFunctionMatrix is immutable")

    # -- constructors ----------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "RationalFunctionMatrix":
        cols = rows if cols is None else cols
        z = BiRationalFunction.zero()
        return cls([[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RationalFunctionMatrix":
        one, zero = BiRationalFunction.one(), BiRationalFunction.zero()
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_scalars(cls, grid) -> "RationalFunctionMatrix":
        """Build from a grid of constants (int/Fraction/GaussianRational)."""
        return cls([[BiRationalFunction.constant(GaussianRational.coerce(x)) for x in row] for row in grid])

    # -- algebra ------------------------------------------------------------------

    def _check_same_shape(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch(f"{self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def __add__(self, other):
        self._check_same_shape(other)
        return RationalFunctionMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        self._check_same_shape(other)
        return RationalFunctionMatrix(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __neg__(self):
        return RationalFunctionMatrix([[-a for a in row] for row in self.entries])

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = BiRationalFunction.zero()
                for k in range(self.cols):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RationalFunctionMatrix(out)

    def scale(self, f) -> "RationalFunctionMatrix":
        if not isinstance(f, BiRationalFunction):
            f = BiRationalFunction.constant(GaussianRational.coerce(f))
        return RationalFunctionMatrix([[e * f for e in row] for row in self.entries])

    def power(self, k: int) -> "RationalFunctionMatrix":
        if self.rows != self.cols:
            raise DimensionMismatch("power of a non-square matrix")
        out = RationalFunctionMatrix.identity(self.rows)
        for _ in range(k):
            out = out @ self
        return out

    def trace(self) -> BiRationalFunction:
        if self.rows != self.cols:
            raise DimensionMismatch("trace of a non-square matrix")
        acc = BiRationalFunction.zero()
        for i in range(self.rows):
            acc = acc + self.entries[i][i]
        return acc

    def transpose(self) -> "RationalFunctionMatrix":
        return RationalFunctionMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def map_entries(self, fn) -> "RationalFunctionMatrix":
        return RationalFunctionMatrix([[fn(e) for e in row] for row in self.entries])

    def derivative_z(self):
        return self.map_entries(lambda e: e.derivative_z())

    def derivative_zbar(self):
        return self.map_entries(lambda e: e.derivative_zbar())

    def conj_swap(self):
        return self.map_entries(lambda e: e.conj_swap())

    def __eq__(self, other):
        return (
            isinstance(other, RationalFunctionMatrix)
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash(self.entries)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    # -- evaluation ----------------------------------------------------------------

    def evaluate(self, z: complex):
        import numpy as np

        out = np.empty((self.rows, self.cols), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e.evaluate(z) if e else 0j
        return out

    def evaluate_exact(self, z: GaussianRational):
        return [[e.evaluate_exact(z) for e in row] for row in self.entries]

    def compiled(self):
        """List-of-lists of compiled entry evaluators (None for zero entries)."""
        return [[(e.compiled() if e else None) for e in row] for row in self.entries]

    # -- serialization ----------------------------------------------------------------

    def to_json(self) -> list:
        return [[e.to_json() for e in row] for row in self.entries]

    @classmethod
    def from_json(cls, data) -> "RationalFunctionMatrix":
        return cls([[BiRationalFunction.from_json(e) for e in row] for row in data])

    def __repr__(self):
        return f"RationalFunctionMatrix({self.rows}x{self.cols})"


# ---------------------------------------------------------------------------
# exact rank
# ---------------------------------------------------------------------------


def _exact_rank_of_grid(grid) -> int:
    """Rank of a GaussianRational matrix by fraction-free (Bareiss) elimination."""
    m = [list(row) for row in grid]
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = GR_ONE
    row = 0
    for col in range(ncols):
        pivot = None
        for r in range(row, nrows):
            if m[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        for r in range(row + 1, nrows):
            for c in range(col + 1, ncols):
                m[r][c] = (m[row][col] * m[r][c] - m[r][col] * m[row][c]) / prev
            m[r][col] = GR_ZERO
        prev = m[row][col]
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


def _random_gaussian_rational(rng: random.Random) -> GaussianRational:
    return GaussianRational(
        Fraction(rng.randint(-97, 97), rng.randint(1, 29)),
        Fraction(rng.randint(-97, 97), rng.randint(1, 29)),
    )


def matrix_rank_exact(
    M: RationalFunctionMatrix,
    at: GaussianRational | None = None,
    fallback_generic: bool = False,
    seed: int = 2301,
) -> int:
    """Exact rank of M evaluated at a point.

    With ``fallback_generic`` the matrix is resampled at up to 8 pseudo-random
    Gaussian-rational points (PoleHit points are skipped) and the maximum rank
    is returned; rank is lower-semicontinuous, so the maximum over samples is
    the generic rank.
    """
    if at is not None and not fallback_generic:
        return _exact_rank_of_grid(M.evaluate_exact(at))

    rng = random.Random(seed)
    candidates = []
    if at is not None:
        candidates.append(at)
    while len(candidates) < 8:
        candidates.append(_random_gaussian_rational(rng))

    best = None
    for point in candidates:
        try:
            grid = M.evaluate_exact(point)
        except PoleHit:
            continue
        r = _exact_rank_of_grid(grid)
        best = r if best is None else max(best, r)
        if best == min(M.rows, M.cols):
            break
    if best is None:
        raise PoleHit("all sample points hit poles while computing generic rank")
    return best


def evaluate(f: BiRationalFunction, z: complex) -> complex:
    """Substitute zbar := conj(z) and return num/den in double precision."""
    return f.evaluate(z)


def radical_divides(den: BiPolynomial, allowed: BiPolynomial) -> bool:
    """True when every irreducible factor of den divides allowed.

    Used to verify exactly that a rational entry has poles only at declared
    locations: strip common factors until the denominator is exhausted or a
    foreign factor remains.
    """
    r = den
    while True:
        if r.degree() == (0, 0):
            return True
        g = _poly_gcd(r, allowed)
        if g.degree() == (0, 0):
            return False
        r = _poly_div_exact(r, g)


def wedge_bracket(A, B) -> RationalFunctionMatrix:
    """dz^dzbar coefficient of the graded bracket [A ^ B] = A^B + B^A.

    A and B are matrix 1-forms given as objects with dz_part/dzbar_part or as
    (dz_part, dzbar_part) pairs.  Pure-type wedges (dz^dz, dzbar^dzbar) drop
    identically; the orientation convention is dzbar^dz = -dz^dzbar.
    """
    az, azb = _form_parts(A)
    bz, bzb = _form_parts(B)
    if az.rows != bz.rows or az.cols != bz.cols:
        raise DimensionMismatch("wedge_bracket of forms with different dimensions")
    # [A^B] = (Az Bzb - Bzb Az) + (Bz Azb - Azb Bz), all coefficients of dz^dzbar
    return (az @ bzb - bzb @ az) + (bz @ azb - azb @ bz)


def _form_parts(A):
    if isinstance(A, tuple):
        return A
    return A.dz_part, A.dzbar_part
