"""Rational maps on the projective line with exact coefficients.

Polynomials are stored dense, lowest degree first, over one of the
supported quadratic fields (or the rationals).  Maps are kept in a
normalized form: numerator and denominator coprime, denominator monic
(numerator monic for the constant-infinity map), so structural equality
is coefficient equality.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, FieldMismatchError
from .quadfield import (
    QuadFieldElement,
    integral_gcd,
    normalize_unit,
    parse_element,
    format_element,
)


def _coerce_coeff(c, d: int) -> QuadFieldElement:
    if isinstance(c, QuadFieldElement):
        if c.d != d:
            raise FieldMismatchError(
                f"coefficient lives in d={c.d}, polynomial in d={d}"
            )
        return c
    return QuadFieldElement(c, 0, d)


class Poly:
    """Univariate polynomial with exact quadratic-field coefficients."""

    __slots__ = ("_c", "_d")

    def __init__(self, coeffs: Iterable, d: int = 0):
        c = [_coerce_coeff(x, d) for x in coeffs]
        while c and c[-1].is_zero():
            c.pop()
        self._c = c
        self._d = d

    @property
    def d(self) -> int:
        return self._d

    @property
    def coeffs(self) -> tuple:
        return tuple(self._c)

    @property
    def degree(self) -> int:
        # zero polynomial reports -1
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def coeff(self, k: int) -> QuadFieldElement:
        if 0 <= k < len(self._c):
            return self._c[k]
        return QuadFieldElement.zero(self._d)

    def leading(self) -> QuadFieldElement:
        if not self._c:
            raise DomainError("zero polynomial has no leading coefficient")
        return self._c[-1]

    def _check(self, other: "Poly") -> None:
        if self._d != other._d:
            raise FieldMismatchError(
                f"polynomials over d={self._d} and d={other._d}"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self._d == other._d and self._c == other._c

    def __hash__(self) -> int:
        return hash((self._d, tuple(self._c)))

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        n = max(len(self._c), len(other._c))
        return Poly(
            [self.coeff(k) + other.coeff(k) for k in range(n)], self._d
        )

    def __sub__(self, other: "Poly") -> "Poly":
        self._check(other)
        n = max(len(self._c), len(other._c))
        return Poly(
            [self.coeff(k) - other.coeff(k) for k in range(n)], self._d
        )

    def __neg__(self) -> "Poly":
        return Poly([-x for x in self._c], self._d)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            if not self._c or not other._c:
                return Poly([], self._d)
            out = [QuadFieldElement.zero(self._d)] * (
                len(self._c) + len(other._c) - 1
            )
            for i, a in enumerate(self._c):
                if a.is_zero():
                    continue
                for j, b in enumerate(other._c):
                    out[i + j] = out[i + j] + a * b
            return Poly(out, self._d)
        s = _coerce_coeff(other, self._d)
        return Poly([s * x for x in self._c], self._d)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise DomainError("negative polynomial power")
        out = Poly([QuadFieldElement.one(self._d)], self._d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other: "Poly"):
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self._c)
        dq = len(rem) - len(other._c)
        if dq < 0:
            return Poly([], self._d), self
        inv_lead = other.leading().inverse()
        quot = [QuadFieldElement.zero(self._d)] * (dq + 1)
        for k in range(dq, -1, -1):
            t = rem[k + other.degree] * inv_lead
            quot[k] = t
            if t.is_zero():
                continue
            for j, b in enumerate(other._c):
                rem[k + j] = rem[k + j] - t * b
        return Poly(quot, self._d), Poly(rem[: other.degree], self._d)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.leading().inverse() * self

    def derivative(self) -> "Poly":
        return Poly(
            [k * self._c[k] for k in range(1, len(self._c))], self._d
        )

    def __call__(self, z):
        """Horner evaluation; accepts field elements or complex."""
        if isinstance(z, QuadFieldElement):
            acc = QuadFieldElement.zero(self._d)
            for c in reversed(self._c):
                acc = acc * z + c
            return acc
        acc = 0j
        for c in reversed(self._c):
            acc = acc * z + complex(c)
        return acc

    def eval_pair(self, x0, x1, deg: int):
        """Evaluate the degree-`deg` homogenization at the pair (x0, x1).

        Returns sum of c_k x0^k x1^(deg-k); works for field elements and
        for anything with ring semantics (used by tracker arithmetic too).
        """
        if len(self._c) - 1 > deg:
            raise DomainError("declared degree below actual degree")
        acc = self.coeff(deg)
        p1 = x1
        for k in range(deg - 1, -1, -1):
            acc = acc * x0 + self.coeff(k) * p1
            p1 = p1 * x1
        return acc

    def embed(self, d: int) -> "Poly":
        return Poly([c.embed(d) for c in self._c], d)

    def complex_coeffs(self) -> list:
        return [complex(c) for c in self._c]

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for k in range(len(self._c) - 1, -1, -1):
            c = self._c[k]
            if c.is_zero():
                continue
            cs = format_element(c)
            if k == 0:
                term = cs if ("+" not in cs[1:] and "-" not in cs[1:]) else f"({cs})"
            else:
                zk = "z" if k == 1 else f"z^{k}"
                if cs == "1":
                    term = zk
                elif cs == "-1":
                    term = f"-{zk}"
                elif "+" in cs[1:] or "-" in cs[1:]:
                    term = f"({cs})*{zk}"
                else:
                    term = f"{cs}*{zk}"
            parts.append(term)
        out = parts[0]
        for t in parts[1:]:
            out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
        return out

    def __repr__(self) -> str:
        return f"Poly({self})"


def poly_from_strings(coeffs: Sequence[str], d: int) -> Poly:
    return Poly([parse_element(s, d) for s in coeffs], d)


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm."""
    if f.is_zero() and g.is_zero():
        raise DomainError("gcd of two zero polynomials")
    a, b = f, g
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def _squarefree_factors(h: Poly) -> list:
    """Yun decomposition: list of (multiplicity, squarefree factor)."""
    out = []
    g = poly_gcd(h, h.derivative()) if h.degree >= 1 else Poly([1], h.d)
    w = h // g
    y = h.derivative() // g
    i = 1
    while w.degree >= 1:
        z = y - w.derivative()
        a = poly_gcd(w, z)
        if a.degree >= 1:
            out.append((i, a))
        w = w // a
        y = z // a
        i += 1
    return out


class ProjPoint:
    """Point of the projective line over a quadratic field.

    Stored as a coordinate pair (x0 : x1), x1 = 0 meaning infinity.
    Equality is cross-multiplication, so representatives never need to
    be scaled by hand.
    """

    __slots__ = ("_x0", "_x1", "_d")

    def __init__(self, x0, x1, d: int | None = None):
        if d is None:
            if isinstance(x0, QuadFieldElement):
                d = x0.d
            elif isinstance(x1, QuadFieldElement):
                d = x1.d
            else:
                d = 0
        self._x0 = _coerce_coeff(x0, d)
        self._x1 = _coerce_coeff(x1, d)
        self._d = d
        if self._x0.is_zero() and self._x1.is_zero():
            raise DomainError("(0 : 0) is not a projective point")

    @classmethod
    def affine(cls, z, d: int | None = None) -> "ProjPoint":
        if isinstance(z, QuadFieldElement):
            return cls(z, QuadFieldElement.one(z.d), z.d)
        return cls(z, 1, d if d is not None else 0)

    @classmethod
    def infinity(cls, d: int = 0) -> "ProjPoint":
        return cls(1, 0, d)

    @property
    def d(self) -> int:
        return self._d

    @property
    def x0(self) -> QuadFieldElement:
        return self._x0

    @property
    def x1(self) -> QuadFieldElement:
        return self._x1

    def is_infinity(self) -> bool:
        return self._x1.is_zero()

    def value(self) -> QuadFieldElement:
        if self.is_infinity():
            raise DomainError("point at infinity has no affine value")
        return self._x0 / self._x1

    def reduced_pair(self) -> tuple:
        """Integral coprime representative, gcd-normalized.

        Clears denominators with one rational integer, removes the
        integral gcd, and fixes the unit so the pair is canonical.
        """
        den_lcm = 1
        for coord in (self._x0, self._x1):
            u, v = coord.basis_pair()
            den_lcm = math.lcm(den_lcm, u.denominator, v.denominator)
        a = self._x0 * den_lcm
        b = self._x1 * den_lcm
        g = integral_gcd(a, b)
        a, b = a / g, b / g
        # fix residual unit on the pair via the first nonzero coordinate
        lead = b if not b.is_zero() else a
        u = normalize_unit(lead) / lead
        return (a * u, b * u)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjPoint):
            return NotImplemented
        if self._d != other._d:
            return False
        return (self._x0 * other._x1 - other._x0 * self._x1).is_zero()

    def __hash__(self) -> int:
        return hash(self.reduced_pair() + (self._d,))

    def __complex__(self) -> complex:
        if self.is_infinity():
            raise DomainError("point at infinity has no complex value")
        return complex(self.value())

    def __str__(self) -> str:
        return f"({format_element(self._x0)} : {format_element(self._x1)})"

    def __repr__(self) -> str:
        return f"ProjPoint{self}"


class RationalMap:
    """Endomorphism of the projective line, num(z)/den(z)."""

    __slots__ = ("_num", "_den", "_d", "_deg")

    def __init__(self, num: Poly, den: Poly):
        if num.d != den.d:
            raise FieldMismatchError("numerator and denominator field mismatch")
        if num.is_zero() and den.is_zero():
            raise DomainError("0/0 does not define a map")
        self._d = num.d
        if not num.is_zero() and not den.is_zero():
            g = poly_gcd(num, den)
            if g.degree >= 1:
                num, den = num // g, den // g
        # canonical scale: monic denominator, else monic numerator
        scale = (den if not den.is_zero() else num).leading().inverse()
        self._num = scale * num
        self._den = scale * den
        self._deg = max(self._num.degree, self._den.degree)

    @classmethod
    def from_strings(
        cls, num: Sequence[str], den: Sequence[str], d: int
    ) -> "RationalMap":
        return cls(poly_from_strings(num, d), poly_from_strings(den, d))

    @property
    def num(self) -> Poly:
        return self._num

    @property
    def den(self) -> Poly:
        return self._den

    @property
    def d(self) -> int:
        return self._d

    @property
    def degree(self) -> int:
        return self._deg

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMap):
            return NotImplemented
        return (
            self._d == other._d
            and self._num == other._num
            and self._den == other._den
        )

    def __hash__(self) -> int:
        return hash((self._num, self._den))

    def __call__(self, p: ProjPoint) -> ProjPoint:
        f0, f1 = self.eval_pair(p.x0, p.x1)
        return ProjPoint(f0, f1, self._d)

    def eval_pair(self, x0, x1):
        """Homogeneous evaluation at a coordinate pair."""
        return (
            self._num.eval_pair(x0, x1, self._deg),
            self._den.eval_pair(x0, x1, self._deg),
        )

    def eval_affine(self, z: QuadFieldElement) -> ProjPoint:
        return self(ProjPoint.affine(z))

    def compose(self, inner: "RationalMap") -> "RationalMap":
        """self after inner, by homogeneous substitution."""
        if self._d != inner._d:
            raise FieldMismatchError("composition across different fields")
        p, q = inner._num, inner._den
        dd = inner._deg
        # powers of p and q up to the outer degree
        m = self._deg
        pp = [Poly([1], self._d)]
        qq = [Poly([1], self._d)]
        for _ in range(m):
            pp.append(pp[-1] * p)
            qq.append(qq[-1] * q)
        num = Poly([], self._d)
        den = Poly([], self._d)
        for k in range(m + 1):
            cn = self._num.coeff(k)
            cd = self._den.coeff(k)
            cross = pp[k] * qq[m - k]
            if not cn.is_zero():
                num = num + cn * cross
            if not cd.is_zero():
                den = den + cd * cross
        out = RationalMap(num, den)
        if out.degree != self._deg * inner._deg and self._deg and inner._deg:
            raise DomainError("degree collapsed under composition")
        return out

    def iterate(self, p: ProjPoint, n: int) -> ProjPoint:
        for _ in range(n):
            p = self(p)
        return p

    def commutes_with(self, other: "RationalMap") -> bool:
        return self.compose(other) == other.compose(self)

    def derivative_map(self) -> "RationalMap":
        num = self._num.derivative() * self._den - self._num * self._den.derivative()
        den = self._den * self._den
        if num.is_zero():
            return RationalMap(Poly([0], self._d), Poly([1], self._d))
        return RationalMap(num, den)

    def integral_model(self) -> tuple:
        """Coefficient lists of an integral content-free model.

        Both polynomials are scaled by one rational so every coefficient
        is an algebraic integer and the joint gcd of all coefficients is
        a unit.  Lists are padded to length degree+1 (homogeneous form).
        """
        den_lcm = 1
        for poly in (self._num, self._den):
            for c in poly.coeffs:
                u, v = c.basis_pair()
                den_lcm = math.lcm(den_lcm, u.denominator, v.denominator)
        c0 = [self._num.coeff(k) * den_lcm for k in range(self._deg + 1)]
        c1 = [self._den.coeff(k) * den_lcm for k in range(self._deg + 1)]
        nz = [x for x in c0 + c1 if not x.is_zero()]
        g = nz[0]
        for x in nz[1:]:
            if g.norm() == 1:
                break
            g = integral_gcd(g, x)
        g = normalize_unit(g)
        return ([x / g for x in c0], [x / g for x in c1])

    def complex_pair(self) -> tuple:
        """(num coeffs, den coeffs) as complex lists padded to degree+1."""
        n = [complex(self._num.coeff(k)) for k in range(self._deg + 1)]
        m = [complex(self._den.coeff(k)) for k in range(self._deg + 1)]
        return n, m

    def embed(self, d: int) -> "RationalMap":
        return RationalMap(self._num.embed(d), self._den.embed(d))

    def scalar_multiple(self, c) -> "RationalMap":
        """The map c * self (post-composition with multiplication by c)."""
        s = _coerce_coeff(c, self._d)
        if s.is_zero():
            raise DomainError("scaling a map by zero")
        return RationalMap(s * self._num, self._den)

    def __str__(self) -> str:
        if self._den.degree <= 0 and not self._den.is_zero():
            if self._den.coeff(0) == QuadFieldElement.one(self._d):
                return str(self._num)
        return f"({self._num}) / ({self._den})"

    def __repr__(self) -> str:
        return f"RationalMap({self})"


def distinct_preimages(phi: RationalMap, target: ProjPoint) -> int:
    """Number of distinct solutions of phi(z) = target."""
    return len(preimage_multiplicities(phi, target))


def preimage_multiplicities(phi: RationalMap, target: ProjPoint) -> list:
    """Multiplicity multiset of the fiber over target, sorted descending.

    Finite fiber points are the roots of t1*num - t0*den; infinity
    contributes when that polynomial drops below the map degree.
    """
    if phi.d != target.d:
        raise FieldMismatchError("target lives in a different field")
    if phi.degree < 1:
        raise DomainError("constant maps have no fibers of interest")
    h = target.x1 * phi.num - target.x0 * phi.den
    if h.is_zero():
        raise DomainError("target equals the constant value of the map")
    mults = []
    m_inf = phi.degree - h.degree
    if m_inf > 0:
        mults.append(m_inf)
    if h.degree >= 1:
        for mult, factor in _squarefree_factors(h):
            mults.extend([mult] * factor.degree)
    return sorted(mults, reverse=True)


def critical_points_poly(phi: RationalMap) -> Poly:
    """Wronskian num'*den - num*den'; finite critical points are its roots."""
    return (
        phi.num.derivative() * phi.den - phi.num * phi.den.derivative()
    )


def _solve_exact(mat: list, rhs: list, d: int) -> list:
    """Gaussian elimination over the field; mat is modified in place."""
    n = len(mat)
    x = list(rhs)
    for col in range(n):
        piv = next(
            (r for r in range(col, n) if not mat[r][col].is_zero()), None
        )
        if piv is None:
            raise DomainError("singular linear system")
        mat[col], mat[piv] = mat[piv], mat[col]
        x[col], x[piv] = x[piv], x[col]
        inv = mat[col][col].inverse()
        for r in range(col + 1, n):
            f = mat[r][col] * inv
            if f.is_zero():
                continue
            for c in range(col, n):
                mat[r][c] = mat[r][c] - f * mat[col][c]
            x[r] = x[r] - f * x[col]
    out = [QuadFieldElement.zero(d)] * n
    for r in range(n - 1, -1, -1):
        acc = x[r]
        for c in range(r + 1, n):
            acc = acc - mat[r][c] * out[c]
        out[r] = acc * mat[r][r].inverse()
    return out


def homogeneous_resultant(c0: Sequence, c1: Sequence, deg: int):
    """Resultant of two degree-`deg` binary forms given by coefficient lists.

    Lists are lowest-first, length deg+1.  Nonzero exactly when the forms
    share no projective root.
    """
    if len(c0) != deg + 1 or len(c1) != deg + 1:
        raise DomainError("coefficient lists must have length deg+1")
    d = c0[0].d
    n = 2 * deg
    zero = QuadFieldElement.zero(d)
    mat = []
    for shift in range(deg):
        row = [zero] * n
        for j in range(deg + 1):
            row[shift + j] = c0[deg - j]
        mat.append(row)
    for shift in range(deg):
        row = [zero] * n
        for j in range(deg + 1):
            row[shift + j] = c1[deg - j]
        mat.append(row)
    # exact determinant by elimination with partial (nonzero) pivoting
    det = QuadFieldElement.one(d)
    sign = 1
    for col in range(n):
        piv = next(
            (r for r in range(col, n) if not mat[r][col].is_zero()), None
        )
        if piv is None:
            return zero
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            sign = -sign
        det = det * mat[col][col]
        inv = mat[col][col].inverse()
        for r in range(col + 1, n):
            f = mat[r][col] * inv
            if f.is_zero():
                continue
            for c in range(col, n):
                mat[r][c] = mat[r][c] - f * mat[col][c]
    return det if sign == 1 else -det


def cofactor_certificate(c0: Sequence, c1: Sequence, deg: int) -> tuple:
    """Resultant R plus a bound certificate for the fiber of the pair.

    Solves A0*F0 + A1*F1 = R*x^(2deg-1) and the mirror equation ending in
    R*z^(2deg-1); returns (R, S) where S is the larger coefficient
    one-norm of a solving pair.  On the unit polydisc this certifies
    max(|F0|, |F1|) >= |R| / S.
    """
    if len(c0) != deg + 1 or len(c1) != deg + 1:
        raise DomainError("coefficient lists must have length deg+1")
    d = c0[0].d
    R = homogeneous_resultant(list(c0), list(c1), deg)
    if R.is_zero():
        raise DomainError("forms share a root; resultant vanishes")
    n = 2 * deg
    zero = QuadFieldElement.zero(d)

    def build():
        mat = []
        for k in range(n):
            row = [zero] * n
            for i in range(deg):
                j = k - i
                if 0 <= j <= deg:
                    row[i] = c0[j]
                    row[deg + i] = c1[j]
            mat.append(row)
        return mat

    s_max = 0.0
    for top in (True, False):
        rhs = [zero] * n
        rhs[n - 1 if top else 0] = R
        sol = _solve_exact(build(), rhs, d)
        s = sum(math.sqrt(float(x.norm())) for x in sol)
        s_max = max(s_max, s)
    return R, s_max
