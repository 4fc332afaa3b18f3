"""Naive and canonical heights with certified error bounds.

The canonical height of a point under a degree-alpha map splits into an
archimedean Green value plus finite-place corrections:

    h_hat(P) = g_inf(v0) - sum_k (1/alpha^(k+1)) * (1/2) log N(g_k)

where v0 is an integral coprime representative, g_k is the coordinate
content extracted at step k of the exact orbit, and g_inf is the limit
of renormalized sup-norms.  The archimedean part iterates renormalized
coordinates at a working precision padded against worst-case round-off
amplification; each finite prime runs in its own modular
tracker, valid because the content of a coprime pair divides the
resultant of the lifted map, so per-step valuations are bounded and the
needed precision is known in advance.  Both tails carry explicit
geometric bounds derived from the coefficient one-norms (upper) and an
exact Bezout certificate (lower).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from sympy import factorint
from sympy.ntheory import sqrt_mod

from .errors import DomainError, IterationBudgetError
from .lattes import EllipticCurveCM, lattes_double
from .quadfield import QuadFieldElement, integral_gcd
from .ratmaps import ProjPoint, RationalMap, cofactor_certificate

_LN2 = math.log(2)
_ARCH_CAP = 300
_FIN_CAP = 64


def _log_int(n: int) -> float:
    """log of a positive integer, safe for thousands of digits."""
    if n <= 0:
        raise DomainError("log of non-positive integer")
    if n.bit_length() <= 900:
        return math.log(n)
    k = n.bit_length() - 60
    return math.log(n >> k) + k * _LN2

def _log_fraction(fr: Fraction) -> float:
    return _log_int(fr.numerator) - _log_int(fr.denominator)


@dataclass(frozen=True)
class Place:
    """A place of the base field: archimedean or a finite prime."""

    kind: str
    prime: object = None
    local_degree: int = 1

    def __post_init__(self):
        if self.kind not in ("archimedean", "finite"):
            raise DomainError(f"unknown place kind {self.kind!r}")
        if self.kind == "finite" and self.prime is None:
            raise DomainError("finite place needs a prime")


@dataclass(frozen=True)
class HeightValue:
    value: float
    iterations_used: int
    error_bound: float

    def __post_init__(self):
        if self.value < 0:
            raise DomainError("height value must be nonnegative")
        if self.error_bound < 0:
            raise DomainError("error bound must be nonnegative")


def naive_height(P: ProjPoint) -> HeightValue:
    """Weil height: half the log of the largest coordinate norm.

    Coordinates are first made integral and coprime, after which only the
    one complex place (or the real place, over the rationals)
    contributes.
    """
    a, b = P.reduced_pair()
    nmax = max(a.norm(), b.norm())
    return HeightValue(0.5 * _log_fraction(nmax), 0, 0.0)


def naive_height_by_places(P: ProjPoint) -> HeightValue:
    """Oracle route over the rationals: explicit sum of local terms.

    No gcd pre-reduction: the finite places are read off the prime
    factorization, so this cross-checks the reduce-first shortcut.
    """
    if P.d != 0:
        raise DomainError("place-by-place oracle is for rational points")
    x, y = P.x0, P.x1
    if not (x.is_integral() and y.is_integral()):
        raise DomainError("oracle expects integral coordinates")
    xi, yi = int(x.a), int(y.a)
    total = _log_int(max(abs(xi), abs(yi)))
    g = math.gcd(xi, yi)
    for p, e in factorint(g).items():
        # min of the two valuations is the valuation of the integer gcd
        total -= e * math.log(int(p))
    return HeightValue(max(total, 0.0), 0, 0.0)


def place_decomposition(P: ProjPoint) -> list:
    """The places contributing to naive_height_by_places, for inspection."""
    if P.d != 0:
        raise DomainError("place decomposition implemented over the rationals")
    if not (P.x0.is_integral() and P.x1.is_integral()):
        raise DomainError("place decomposition expects integral coordinates")
    xi, yi = int(P.x0.a), int(P.x1.a)
    out = [(Place("archimedean", None, 1), _log_int(max(abs(xi), abs(yi))))]
    for p, e in factorint(math.gcd(xi, yi)).items():
        out.append((Place("finite", int(p), 1), -e * math.log(int(p))))
    return out


def _vp_capped(n: int, p: int, cap: int) -> int:
    if n == 0:
        return cap
    e = 0
    while e < cap and n % p == 0:
        n //= p
        e += 1
    return e


class _PrimeTracker:
    """Orbit of one prime's local data, in fixed modular precision.

    Tracks an integral coordinate pair modulo p^K, extracting at each
    step the minimum valuation of the evaluated pair.  The tracked pair
    drifts from the true orbit by a local unit only (each step divides by
    a fixed element of the right valuation; the map is homogeneous), so
    the valuations read off are exact.
    """

    def __init__(self, p, cap, K, kind, d, c0, c1, v0, gen_image=None):
        self.p = p
        self.cap = cap
        self.kind = kind  # "int" | "inert" | "ramified"
        self.d = d
        self.mod = p**K
        self.gen = gen_image
        # log of the absolute norm of the prime being tracked
        if kind == "int":
            self.log_norm = 2 * math.log(p) if d == 0 else math.log(p)
        elif kind == "inert":
            self.log_norm = 2 * math.log(p)
        else:
            self.log_norm = math.log(p)
        if kind == "ramified":
            if d == 1:
                self.pi_conj = (1, self.mod - 1)  # 1 - i
            else:
                self.pi_conj = (1, self.mod - 2)  # -(2w - 1) = 1 - 2w
        self.rc0 = [self._embed(c) for c in c0]
        self.rc1 = [self._embed(c) for c in c1]
        self.v = (self._embed(v0[0]), self._embed(v0[1]))

    def _embed(self, x: QuadFieldElement):
        u, v = x.basis_pair()
        if self.kind == "int":
            if self.d == 0:
                return u % self.mod
            return (u + v * self.gen) % self.mod
        return (u % self.mod, v % self.mod)

    def _mul(self, a, b):
        m = self.mod
        if self.kind == "int":
            return a * b % m
        a0, a1 = a
        b0, b1 = b
        if self.d == 1:
            return ((a0 * b0 - a1 * b1) % m, (a0 * b1 + a1 * b0) % m)
        # (1, w) basis with w^2 = w - 1
        return (
            (a0 * b0 - a1 * b1) % m,
            (a0 * b1 + a1 * b0 + a1 * b1) % m,
        )

    def _add(self, a, b):
        if self.kind == "int":
            return (a + b) % self.mod
        return ((a[0] + b[0]) % self.mod, (a[1] + b[1]) % self.mod)

    def _val(self, a) -> int:
        p, cap = self.p, self.cap
        if self.kind == "int":
            return _vp_capped(a, p, cap)
        if self.kind == "inert":
            return min(_vp_capped(a[0], p, cap), _vp_capped(a[1], p, cap))
        u, v = a
        if self.d == 1:
            norm = u * u + v * v
        else:
            norm = u * u + u * v + v * v
        return _vp_capped(norm % self.mod, p, cap)

    def _divide(self, a, e):
        pe = self.p**e
        if self.kind == "int":
            return a // pe
        if self.kind == "inert":
            return (a[0] // pe, a[1] // pe)
        for _ in range(e):
            a = self._mul(a, self.pi_conj)
        return (a[0] // pe, a[1] // pe)

    def _eval_form(self, coeffs):
        x0, x1 = self.v
        acc = coeffs[-1]
        p1 = x1
        for k in range(len(coeffs) - 2, -1, -1):
            acc = self._add(self._mul(acc, x0), self._mul(coeffs[k], p1))
            p1 = self._mul(p1, x1)
        return acc

    def step(self) -> int:
        f0 = self._eval_form(self.rc0)
        f1 = self._eval_form(self.rc1)
        e = min(self._val(f0), self._val(f1))
        if e >= self.cap:
            raise DomainError(
                f"content valuation at p={self.p} exceeded its resultant "
                "bound; the map model is inconsistent"
            )
        if e:
            f0 = self._divide(f0, e)
            f1 = self._divide(f1, e)
        self.v = (f0, f1)
        return e


def _lift_sqrt(a: int, p: int, K: int) -> int:
    """Square root of a mod p^K by Newton lifting from a root mod p."""
    s = sqrt_mod(a % p, p)
    if s is None:
        raise DomainError(f"{a} is not a square mod {p}")
    s = int(s)
    prec = 1
    while prec < K:
        prec = min(2 * prec, K)
        m = p**prec
        s = (s - (s * s - a) * pow(2 * s, -1, m)) % m
    return s


def _trackers_for_prime(p, w, n_steps, d, c0, c1, v0):
    cap = w + 1
    K = n_steps * cap + 4
    if d == 0:
        return [_PrimeTracker(p, cap, K, "int", d, c0, c1, v0)]
    ramified = (d == 1 and p == 2) or (d == 3 and p == 3)
    if ramified:
        return [_PrimeTracker(p, cap, K, "ramified", d, c0, c1, v0)]
    split = (d == 1 and p % 4 == 1) or (d == 3 and p % 3 == 1)
    if not split:
        return [_PrimeTracker(p, cap, K, "inert", d, c0, c1, v0)]
    mod = p**K
    s = _lift_sqrt(-d, p, K)
    if d == 1:
        gens = [s, mod - s]
    else:
        inv2 = pow(2, -1, mod)
        gens = [(1 + s) * inv2 % mod, (1 + mod - s) * inv2 % mod]
    return [
        _PrimeTracker(p, cap, K, "int", d, c0, c1, v0, gen_image=g)
        for g in gens
    ]


class _HeightEngine:
    """Per-map state for canonical height evaluation."""

    def __init__(self, phi: RationalMap):
        if phi.degree < 2:
            raise DomainError("canonical heights need a map of degree >= 2")
        self.phi = phi
        self.alpha = phi.degree
        self.d = phi.d
        c0, c1 = phi.integral_model()
        self.c0 = c0
        self.c1 = c1
        R, s_cof = cofactor_certificate(c0, c1, self.alpha)
        n_R = R.norm()
        if n_R.denominator != 1:
            raise DomainError("integral model produced a non-integral resultant")
        self.n_R = int(n_R)
        self.log_nR = _log_fraction(n_R)
        s_up = max(
            sum(math.sqrt(float(c.norm())) for c in c0),
            sum(math.sqrt(float(c.norm())) for c in c1),
        )
        self.c_up = max(0.0, math.log(s_up))
        self.c_low = max(0.0, math.log(s_cof) - 0.5 * self.log_nR)
        self.c_bound = max(self.c_up, self.c_low)
        # per-step error amplification of the renormalized iteration:
        # the differential of w -> F(w/||w||) on the unit sphere is at
        # most alpha * e^{c_up}, and the next division by ||F|| costs
        # another e^{c_low}; the 4 soaks up evaluation round-off
        amp = 4.0 * self.alpha * math.exp(self.c_up + self.c_low)
        self._amp_bits = max(2, math.ceil(math.log2(amp)))
        self._ab0 = [(c.a, c.b) for c in c0]
        self._ab1 = [(c.a, c.b) for c in c1]
        self.prime_exponents = (
            {int(p): int(e) for p, e in factorint(self.n_R).items()}
            if self.n_R > 1
            else {}
        )

    def _arch_steps_needed(self, tol: float) -> int:
        if self.c_bound == 0.0:
            return 1
        n = 1
        bound = self.c_bound / (self.alpha - 1)
        while bound / self.alpha**n > tol and n <= _ARCH_CAP:
            n += 1
        return n

    def _fin_steps_needed(self, tol: float) -> int:
        if not self.prime_exponents:
            return 0
        n = 0
        bound = 0.5 * self.log_nR / (self.alpha - 1)
        while bound / self.alpha**n > tol and n <= _FIN_CAP:
            n += 1
        return n

    def _arch_value(self, x0, x1, n_arch):
        # plain doubles are not enough here: orbits through transversally
        # repelling configurations blow round-off up by _amp_bits bits per
        # step, so pad the working mantissa to absorb the full run
        bits = 64 + n_arch * self._amp_bits
        with mpmath.workprec(bits):
            sq = mpmath.sqrt(self.d) if self.d else None

            def lift(ab):
                a, b = ab
                re = mpmath.mpf(a.numerator) / a.denominator
                if not b:
                    return mpmath.mpc(re, 0)
                im = mpmath.mpf(b.numerator) / b.denominator * sq
                return mpmath.mpc(re, im)

            g0 = [lift(ab) for ab in self._ab0]
            g1 = [lift(ab) for ab in self._ab1]
            w0 = lift((x0.a, x0.b))
            w1 = lift((x1.a, x1.b))
            total = mpmath.mpf(0)
            scale = mpmath.mpf(1)
            for _ in range(n_arch):
                m = max(abs(w0), abs(w1))
                total += mpmath.log(m) * scale
                w0, w1 = w0 / m, w1 / m
                acc0, acc1, p1 = g0[-1], g1[-1], w1
                for k in range(self.alpha - 1, -1, -1):
                    acc0 = acc0 * w0 + g0[k] * p1
                    acc1 = acc1 * w0 + g1[k] * p1
                    p1 = p1 * w1
                w0, w1 = acc0, acc1
                scale /= self.alpha
            m = max(abs(w0), abs(w1))
            total += mpmath.log(m) * scale
            tail = self.c_bound / (self.alpha - 1) * float(scale)
            return float(total), tail

    def _fin_value(self, x0, x1, n_fin):
        if n_fin == 0:
            return 0.0, 0.0
        trackers = []
        for p, w in self.prime_exponents.items():
            trackers.extend(
                _trackers_for_prime(p, w, n_fin, self.d, self.c0, self.c1, (x0, x1))
            )
        total = 0.0
        scale = 1.0
        for _ in range(n_fin):
            scale /= self.alpha
            for t in trackers:
                e = t.step()
                if e:
                    total += 0.5 * e * t.log_norm * scale
        tail = 0.5 * self.log_nR / (self.alpha - 1) * scale
        return total, tail

    def height(self, P: ProjPoint, target_error: float) -> HeightValue:
        x0, x1 = P.reduced_pair()
        # flat budget for double-precision accumulation outside the
        # padded-precision archimedean loop
        slack = 2e-12
        certifiable = target_error > 4 * slack
        tol = (target_error - slack) / 2 if certifiable else slack
        n_arch = self._arch_steps_needed(tol)
        n_fin = self._fin_steps_needed(tol)
        over_budget = (
            not certifiable or n_arch > _ARCH_CAP or n_fin > _FIN_CAP
        )
        n_arch = min(n_arch, _ARCH_CAP)
        n_fin = min(n_fin, _FIN_CAP)
        g_arch, err_arch = self._arch_value(x0, x1, n_arch)
        fin_sum, err_fin = self._fin_value(x0, x1, n_fin)
        value = g_arch - fin_sum
        err = err_arch + err_fin + slack
        if value < 0:
            if value < -(err + 1e-9):
                raise DomainError(
                    f"computed height {value} is negative beyond the error "
                    "budget; internal inconsistency"
                )
            value = 0.0
        result = HeightValue(value, max(n_arch, n_fin), err)
        if over_budget:
            raise IterationBudgetError(
                f"target error {target_error} is below the certifiable "
                f"floor or needs more than {_ARCH_CAP} archimedean / "
                f"{_FIN_CAP} finite iterations",
                partial=result,
            )
        return result


_ENGINES: dict = {}


def _engine(phi: RationalMap) -> _HeightEngine:
    eng = _ENGINES.get(phi)
    if eng is None:
        eng = _HeightEngine(phi)
        _ENGINES[phi] = eng
    return eng


def _coerce_point(phi: RationalMap, P: ProjPoint) -> ProjPoint:
    if P.d == phi.d:
        return P
    if P.d == 0:
        return ProjPoint(P.x0.embed(phi.d), P.x1.embed(phi.d), phi.d)
    raise DomainError(
        f"point over d={P.d} cannot feed a map over d={phi.d}"
    )


def canonical_height(
    phi: RationalMap, P: ProjPoint, target_error: float = 1e-9
) -> HeightValue:
    """Canonical height of P under phi, accurate to target_error.

    The reported error_bound is a rigorous bound on |value - true|,
    derived from coefficient norms and the resultant; it is at most
    target_error unless the iteration caps are hit, which raises with
    the partial value attached.
    """
    if target_error <= 0:
        raise DomainError("target_error must be positive")
    return _engine(phi).height(_coerce_point(phi, P), target_error)


def height_constants(phi: RationalMap) -> dict:
    """Expansion constants and bad primes of the lifted map (diagnostic)."""
    eng = _engine(phi)
    return {
        "c_upper": eng.c_up,
        "c_lower": eng.c_low,
        "resultant_norm": eng.n_R,
        "bad_primes": sorted(eng.prime_exponents),
    }


def tate_limit_raw(phi: RationalMap, P: ProjPoint, steps: int) -> list:
    """Exact gcd-reduced orbit heights h(phi^n P) / alpha^n.

    The direct definition, kept as a slow cross-check for the decomposed
    engine.  Coordinate sizes grow like alpha^n, so keep steps small.
    """
    if phi.degree < 2:
        raise DomainError("needs degree >= 2")
    P = _coerce_point(phi, P)
    eng = _engine(phi)
    from .ratmaps import Poly

    f0 = Poly(eng.c0, phi.d)
    f1 = Poly(eng.c1, phi.d)
    x0, x1 = P.reduced_pair()
    out = []
    weight = 1.0
    for _ in range(steps):
        y0 = f0.eval_pair(x0, x1, eng.alpha)
        y1 = f1.eval_pair(x0, x1, eng.alpha)
        g = integral_gcd(y0, y1)
        x0, x1 = y0 / g, y1 / g
        weight /= eng.alpha
        nmax = max(x0.norm(), x1.norm())
        out.append(0.5 * _log_fraction(nmax) * weight)
    return out


def neron_tate(
    curve: EllipticCurveCM, x, target_error: float = 1e-9
) -> HeightValue:
    """Height of the curve point above x, via the doubling quotient map."""
    if isinstance(x, ProjPoint):
        point = x
    elif isinstance(x, QuadFieldElement):
        point = ProjPoint.affine(x)
    else:
        point = ProjPoint.affine(QuadFieldElement(x, 0, curve.d))
    return canonical_height(lattes_double(curve), point, target_error)
