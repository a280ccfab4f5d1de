"""Exact arithmetic in quadratic fields Q(sqrt(d)).

Elements are stored as (a + b*sqrt(d))/den with integer a, b, den.  Ideals are
lattices s*[a, (b + sqrt(D))/2], which is the same data as the binary form
(a, b, c) with b^2 - 4ac = D together with a content s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, isqrt, prod

import gmpy2
import numpy as np
from sympy import factorint, primerange


class NotSquarefree(ValueError):
    pass


class NonPrincipal(ValueError):
    def __init__(self, ideal, dlog=None):
        super().__init__(f"{ideal} is not principal")
        self.ideal = ideal
        self.dlog = dlog


_SMALL_PRIMES: list[int] = []


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    if n > 10 ** 15:
        return all(e == 1 for e in factorint(n).values())
    global _SMALL_PRIMES
    if not _SMALL_PRIMES:
        _SMALL_PRIMES = list(primerange(2, 10 ** 5 + 1))
    # strip primes up to cbrt(n); what is left has at most two prime factors
    for p in _SMALL_PRIMES:
        if p * p * p > n:
            break
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
    return n == 1 or not gmpy2.is_square(n)


def kronecker(a: int, n: int) -> int:
    return int(gmpy2.kronecker(a, n))


def icbrt(n: int) -> int | None:
    """Signed integer cube root, or None when n is not a cube."""
    r, exact = gmpy2.iroot(abs(n), 3)
    if not exact:
        return None
    return int(r) if n >= 0 else -int(r)


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    g, s, t = gmpy2.gcdext(a, b)
    return int(g), int(s), int(t)


# ---------------------------------------------------------------- fields


@dataclass(frozen=True)
class QuadField:
    m: int
    real: bool = False

    def __post_init__(self):
        if not is_squarefree(self.m):
            raise NotSquarefree(f"m={self.m} is not a squarefree positive integer")
        if self.real and self.m == 1:
            raise ValueError("Q(sqrt(1)) is not a field")

    @cached_property
    def d(self) -> int:
        return self.m if self.real else -self.m

    @cached_property
    def D(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def half_omega(self) -> bool:
        """True when omega = (1 + sqrt(d))/2, False when omega = sqrt(d)."""
        return self.d % 4 == 1

    @property
    def signature(self) -> str:
        return "real" if self.real else "imaginary"

    @property
    def units_order(self) -> int:
        """Number of roots of unity."""
        if self.real:
            return 2
        return {1: 4, 3: 6}.get(self.m, 2)

    @property
    def sqrt_D_coeff(self) -> int:
        # sqrt(D) = k*sqrt(d)
        return 1 if self.half_omega else 2

    def omega(self) -> QuadElement:
        return QuadElement(self, 1, 1, 2) if self.half_omega else QuadElement(self, 0, 1, 1)

    def __call__(self, a, b=0, den=1) -> QuadElement:
        return QuadElement(self, a, b, den)

    def from_omega(self, x0: int, x1: int) -> QuadElement:
        """x0 + x1*omega."""
        if self.half_omega:
            return QuadElement(self, 2 * x0 + x1, x1, 2)
        return QuadElement(self, x0, x1, 1)

    def __str__(self):
        return f"Q(sqrt({self.d}))"


def make_field(m: int, signature: str = "imaginary") -> QuadField:
    if signature not in ("imaginary", "real"):
        raise ValueError(f"unknown signature {signature!r}")
    return QuadField(m, signature == "real")


# ---------------------------------------------------------------- elements


def _sign_surd(a: int, b: int, d: int) -> int:
    """Exact sign of a + b*sqrt(d) for d > 0."""
    if a >= 0 and b >= 0:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 and b <= 0:
        return -1
    lhs, rhs = a * a, d * b * b
    if lhs == rhs:
        return 0
    return (1 if a > 0 else -1) if lhs > rhs else (1 if b > 0 else -1)


class QuadElement:
    """(a + b*sqrt(d))/den, kept in lowest terms with den > 0."""

    __slots__ = ("field", "a", "b", "den")

    def __init__(self, field: QuadField, a: int, b: int = 0, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        a, b, den = int(a), int(b), int(den)
        if den < 0:
            a, b, den = -a, -b, -den
        g = gcd(gcd(a, b), den)
        if g > 1:
            a, b, den = a // g, b // g, den // g
        self.field = field
        self.a = a
        self.b = b
        self.den = den

    @classmethod
    def _coerce(cls, F, x):
        if isinstance(x, QuadElement):
            return x
        if isinstance(x, Fraction):
            return cls(F, x.numerator, 0, x.denominator)
        return cls(F, int(x))

    def __add__(self, other):
        o = self._coerce(self.field, other)
        return QuadElement(self.field, self.a * o.den + o.a * self.den,
                           self.b * o.den + o.b * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement(self.field, -self.a, -self.b, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(self.field, other))

    def __rsub__(self, other):
        return self._coerce(self.field, other) - self

    def __mul__(self, other):
        o = self._coerce(self.field, other)
        d = self.field.d
        return QuadElement(self.field, self.a * o.a + d * self.b * o.b,
                           self.a * o.b + self.b * o.a, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> QuadElement:
        n = self.a * self.a - self.field.d * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        # 1/x = den*conj(a + b sqrt d)/(a^2 - d b^2)
        return QuadElement(self.field, self.den * self.a, -self.den * self.b, n)

    def __truediv__(self, other):
        return self * self._coerce(self.field, other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(self.field, other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadElement(self.field, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(self.field, other)
        if not isinstance(other, QuadElement):
            return NotImplemented
        return (self.field == other.field and self.a == other.a
                and self.b == other.b and self.den == other.den)

    def __hash__(self):
        return hash((self.field, self.a, self.b, self.den))

    def conj(self) -> QuadElement:
        return QuadElement(self.field, self.a, -self.b, self.den)

    def norm(self) -> Fraction:
        return Fraction(self.a * self.a - self.field.d * self.b * self.b, self.den * self.den)

    def trace(self) -> Fraction:
        return Fraction(2 * self.a, self.den)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integral(self) -> bool:
        t, n = self.trace(), self.norm()
        return t.denominator == 1 and n.denominator == 1

    def is_rational(self) -> bool:
        return self.b == 0

    def omega_coords(self) -> tuple[int, int]:
        """(x0, x1) with self = x0 + x1*omega; requires integrality."""
        if self.field.half_omega:
            # (a + b sqrt d)/den = x0 + x1 (1 + sqrt d)/2
            two_x1 = Fraction(2 * self.b, self.den)
            x0 = Fraction(self.a, self.den) - two_x1 / 2
            x1 = two_x1
        else:
            x0, x1 = Fraction(self.a, self.den), Fraction(self.b, self.den)
        if x0.denominator != 1 or x1.denominator != 1:
            raise ValueError(f"{self} is not integral")
        return int(x0), int(x1)

    def power_coords(self) -> tuple[Fraction, Fraction]:
        """(U0, U1) with self = U0 + U1*sqrt(d)."""
        return Fraction(self.a, self.den), Fraction(self.b, self.den)

    def real_embeddings(self) -> tuple[float, float]:
        """Values under sqrt(d) -> +sqrt(d) and -sqrt(d) (real fields)."""
        import mpmath

        s = mpmath.sqrt(self.field.d)
        return (float((self.a + self.b * s) / self.den), float((self.a - self.b * s) / self.den))

    def sign(self, conjugate: bool = False) -> int:
        """Exact sign under sqrt(d) -> +sqrt(d) (or -sqrt(d) with conjugate)."""
        return _sign_surd(self.a, -self.b if conjugate else self.b, self.field.d)

    def small_embedding_is_plus(self) -> bool:
        """True when |x| <= |x'| with x taken at sqrt(d) > 0."""
        return self.a * self.b <= 0

    def complex_value(self) -> complex:
        s = complex(0, self.field.m ** 0.5) if not self.field.real else self.field.m ** 0.5
        return (self.a + self.b * s) / self.den

    def __repr__(self):
        return f"QuadElement({self})"

    def __str__(self):
        d = self.field.d
        root = f"sqrt({d})"
        if self.b == 0:
            num = str(self.a)
        else:
            bpart = root if abs(self.b) == 1 else f"{abs(self.b)}*{root}"
            if self.a == 0:
                num = ("-" if self.b < 0 else "") + bpart
            else:
                num = f"{self.a} {'-' if self.b < 0 else '+'} {bpart}"
        if self.den == 1:
            return num
        return f"({num})/{self.den}"


# ---------------------------------------------------------------- forms


def compose_forms(f1, f2):
    """Compose primitive forms of equal discriminant.

    Returns (a3, b3, c3, d1) where [a1,..][a2,..] = d1*[a3, (b3+sqrt D)/2].
    """
    a1, b1, c1 = f1
    a2, b2, c2 = f2
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, dd = 0, a1
    else:
        dd, u, v = xgcd(a2, a1)
        y1 = u
    if s % dd == 0:
        y2, x2, d1 = -1, 0, dd
    else:
        d1, x2, y2 = xgcd(s, dd)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return a3, b3, c3, d1


def normalize_form(f):
    a, b, c = f
    r = (a - b) // (2 * a)
    return a, b + 2 * r * a, a * r * r + b * r + c


def reduce_imaginary(f):
    a, b, c = normalize_form(f)
    while a > c or (a == c and b < 0):
        s = (c + b) // (2 * c)
        a, b, c = c, -b + 2 * s * c, c * s * s - b * s + a
    if a == c and b < 0:
        b = -b
    return a, b, c


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """All reduced forms of discriminant D < 0, by enumeration."""
    if D >= 0:
        raise ValueError("negative discriminant expected")
    out = []
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        bs = np.arange(-a + 1, a + 1, dtype=np.int64)
        bs = bs[(bs - D) % 2 == 0]
        num = bs * bs - D
        ok = num % (4 * a) == 0
        bs, cs = bs[ok], num[ok] // (4 * a)
        keep = (cs > a) | ((cs == a) & (bs >= 0))
        for b, c in zip(bs[keep].tolist(), cs[keep].tolist()):
            out.append((a, b, c))
    return out


def imaginary_class_numbers(limit: int) -> np.ndarray:
    """h(D) for every negative D with |D| <= limit, counted as reduced forms.

    Entry n of the result is the number of reduced forms of discriminant -n;
    this equals h(-n) when -n is fundamental (every form is then primitive).
    """
    counts = np.zeros(limit + 1, dtype=np.int32)
    amax = isqrt(limit // 3)
    for a in range(1, amax + 1):
        step = 4 * a
        for b in range(-a + 1, a + 1):
            cmin = a if b >= 0 else a + 1
            start = step * cmin - b * b
            if start > limit:
                continue
            counts[start::step] += 1
    return counts


# ---------------------------------------------------------------- ideals


class QuadIdeal:
    """The lattice s*[a, (b + sqrt(D))/2] with a > 0 and b^2 = D mod 4a."""

    __slots__ = ("field", "s", "a", "b")

    def __init__(self, field: QuadField, a: int, b: int, s: int = 1):
        a, b, s = int(a), int(b), int(s)
        if a <= 0 or s <= 0:
            raise ValueError("ideal data must be positive")
        D = field.D
        if (b * b - D) % (4 * a):
            raise ValueError(f"b^2 != D mod 4a for a={a}, b={b}, D={D}")
        self.field = field
        self.s = s
        self.a = a
        self.b = (b + a) % (2 * a) - a if a > 1 else D % 2
        if self.b == -a:
            self.b = a

    @classmethod
    def unit(cls, field: QuadField) -> QuadIdeal:
        return cls(field, 1, field.D % 2)

    @classmethod
    def principal(cls, g: QuadElement) -> QuadIdeal:
        """The ideal g*O for an integral nonzero g."""
        F = g.field
        x0, x1 = g.omega_coords()
        w = F.omega()
        # Z-basis of gO: g, g*omega; Hermite normal form on (1, omega) coordinates
        y0, y1 = (g * w).omega_coords()
        # rows (x0, x1), (y0, y1); HNF: [[n, c], [0, e]] with lattice {n*1 + ...}
        s_ = gcd(x1, y1)
        _, u, v = xgcd(x1, y1)
        r0 = u * x0 + v * y0  # combination with omega-coefficient s_
        n = abs(x0 * y1 - x1 * y0) // s_  # index of the pure-rational sublattice
        # lattice = n*Z + (r0 + s_*omega)*Z
        # write as s*[a, (b + sqrt D)/2]: s = s_, a = n/s_, (b+sqrt D)/2 = r0/s_ + omega
        a = n // s_
        if r0 % s_ or n % s_:
            raise ValueError(f"{g} does not span an ideal lattice")
        # omega = (D%2 + sqrt D)/2 in both cases
        b = 2 * (r0 // s_) + (F.D % 2)
        return cls(F, a, b, s_)

    def form(self) -> tuple[int, int, int]:
        return self.a, self.b, (self.b * self.b - self.field.D) // (4 * self.a)

    def norm(self) -> int:
        return self.s * self.s * self.a

    def is_primitive(self) -> bool:
        return self.s == 1

    def conj(self) -> QuadIdeal:
        return QuadIdeal(self.field, self.a, -self.b, self.s)

    def basis(self) -> tuple[QuadElement, QuadElement]:
        F = self.field
        k = F.sqrt_D_coeff
        return F(self.s * self.a), QuadElement(F, self.s * self.b, self.s * k, 2)

    def contains(self, g: QuadElement) -> bool:
        # g = s*(x*a + y*(b + sqrt D)/2)
        F = self.field
        k = F.sqrt_D_coeff
        y = Fraction(2 * g.b, g.den * k * self.s)
        if y.denominator != 1:
            return False
        rest = Fraction(g.a, g.den) / self.s - y * Fraction(self.b, 2)
        x = rest / self.a
        return x.denominator == 1

    def __mul__(self, other: QuadIdeal) -> QuadIdeal:
        if other.field != self.field:
            raise ValueError("ideals from different fields")
        a3, b3, _, d1 = compose_forms(self.form(), other.form())
        return QuadIdeal(self.field, a3, b3, self.s * other.s * d1)

    def __pow__(self, n: int) -> QuadIdeal:
        if n < 0:
            raise ValueError("negative powers of ideals are not integral")
        if n > 1 and self.a > 1 and self.a % 2 and gcd(self.a, self.b) == 1:
            return self._coprime_power(n)
        result = QuadIdeal.unit(self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _coprime_power(self, n: int) -> QuadIdeal:
        # I prime to its conjugate: I^n = s^n [a^n, (b_n + sqrt D)/2] where b_n is
        # the square root of D mod a^n that agrees with b mod a
        D = self.field.D
        a, r = self.a, self.b % self.a
        mod, k = a, 1
        while k < n:
            k = min(2 * k, n)
            mod = a ** k
            r = (r - (r * r - D) * pow(2 * r, -1, mod)) % mod
        if (r - D) % 2:
            r += mod
        return QuadIdeal(self.field, mod, r, self.s ** n)

    def __eq__(self, other):
        if not isinstance(other, QuadIdeal):
            return NotImplemented
        return (self.field, self.s, self.a, self.b) == (other.field, other.s, other.a, other.b)

    def __hash__(self):
        return hash((self.field, self.s, self.a, self.b))

    def __repr__(self):
        pre = f"{self.s}*" if self.s != 1 else ""
        return f"{pre}[{self.a}, ({self.b} + sqrt({self.field.D}))/2]"


def ideal_mul(I: QuadIdeal, J: QuadIdeal) -> QuadIdeal:
    return I * J


def ideal_pow(I: QuadIdeal, n: int) -> QuadIdeal:
    return I ** n


# ---------------------------------------------------------------- primes


@dataclass(frozen=True)
class SplitType:
    kind: str  # "split", "inert", "ramified"
    primes: tuple[QuadIdeal, ...] = ()

    @property
    def is_split(self) -> bool:
        return self.kind == "split"


def sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks; a must be a square mod the odd prime p."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    mm, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        bb = pow(c, 1 << (mm - i - 1), p)
        mm, c = i, bb * bb % p
        t, r = t * c % p, r * bb % p
    return r


def split_type(F: QuadField, p: int) -> SplitType:
    """Decomposition of the odd prime p; the first split prime has 0 < b < p."""
    D = F.D
    k = kronecker(D, p)
    if k == -1:
        return SplitType("inert")
    if k == 0:
        b = D % 2 if D % 2 == 0 else p
        return SplitType("ramified", (QuadIdeal(F, p, b),))
    r = sqrt_mod_prime(D, p)
    if (r - D) % 2:
        r = p - r
    # r has the parity of D; the other root is 2p - r
    b1, b2 = r, 2 * p - r
    b1n = (b1 + p) % (2 * p) - p
    b2n = (b2 + p) % (2 * p) - p
    first, second = (b1n, b2n) if b1n > 0 else (b2n, b1n)
    return SplitType("split", (QuadIdeal(F, p, first), QuadIdeal(F, p, second)))


def prime_ideals_above(F: QuadField, ell: int) -> tuple[QuadIdeal, ...]:
    if ell == 2:
        D = F.D
        if D % 4 == 0:
            b = 0 if (D // 4) % 2 == 0 else 2
            return (QuadIdeal(F, 2, b),)
        if D % 8 == 1:
            return (QuadIdeal(F, 2, 1), QuadIdeal(F, 2, -1))
        return ()
    st = split_type(F, ell)
    return st.primes


# ---------------------------------------------------------------- imaginary principality


def _gauss_reduce_tracking(a, b, c):
    """Reduce a positive definite form, returning the reduced form and the
    coordinates (x, y) of the vector it represents as its first coefficient."""
    # columns of the accumulated SL2 matrix
    p, q, r, s = 1, 0, 0, 1
    # normalize
    k = (a - b) // (2 * a)
    if k:
        b, c = b + 2 * k * a, a * k * k + b * k + c
        q, s = q + k * p, s + k * r
    while a > c or (a == c and b < 0):
        # (x, y) -> (-y, x) then normalize
        a, b, c = c, -b, a
        p, q, r, s = q, -p, s, -r
        k = (a - b) // (2 * a)
        if k:
            b, c = b + 2 * k * a, a * k * k + b * k + c
            q, s = q + k * p, s + k * r
    return (a, b, c), (p, r)


def _associate_normalize(g: QuadElement) -> QuadElement:
    """Pick the associate of g whose argument lies in [0, 2*pi/w)."""
    F = g.field
    import cmath

    w = F.units_order
    if w == 2:
        x0, x1 = g.omega_coords()
        if x1 < 0 or (x1 == 0 and x0 < 0):
            return -g
        return g
    zeta = F.from_omega(0, 1) if w == 4 else F.from_omega(0, 1)  # i, or (1+sqrt(-3))/2
    best = g
    cur = g
    for _ in range(w):
        ang = cmath.phase(cur.complex_value()) % (2 * cmath.pi)
        if ang < 2 * cmath.pi / w - 1e-12:
            best = cur
            break
        cur = cur * zeta
    return best


def principal_generator(I: QuadIdeal) -> QuadElement:
    """A generator of I (imaginary fields), normalized up to roots of unity."""
    F = I.field
    if F.real:
        return real_generator(I)
    (a, b, c), (x, y) = _gauss_reduce_tracking(*I.form())
    if a != 1:
        raise NonPrincipal(I)
    k = F.sqrt_D_coeff
    # x*A + y*(B + sqrt D)/2 with (A, B) the primitive part of I
    g = QuadElement(F, I.s * (2 * x * I.a + y * I.b), I.s * y * k, 2)
    return _associate_normalize(g)


def is_principal(I: QuadIdeal) -> bool:
    if I.field.real:
        try:
            real_generator(I)
            return True
        except NonPrincipal:
            return False
    return reduce_imaginary(I.form())[0] == 1


# ---------------------------------------------------------------- real fields


def _rho_b(a: int, b: int, D: int, sD: int) -> int:
    """Normalize b mod 2a for the rho step: sqrt(D)-2a < b < sqrt(D) when a < sqrt(D)."""
    two_a = 2 * a
    if a <= sD:
        # largest value = b mod 2a that is <= floor(sqrt D)
        return sD - ((sD - b) % two_a)
    return (b + a) % two_a - a if (b + a) % two_a != 0 else a


def _is_reduced_real(a: int, b: int, D: int, sD: int) -> bool:
    # 0 < b < sqrt D and sqrt D - b < 2a < sqrt D + b (with a > 0)
    if not (0 < b <= sD):
        return False
    lo = 2 * a + b
    hi = 2 * a - b
    return lo * lo > D and (hi < 0 or hi * hi < D)


def _rho(a: int, b: int, D: int, sD: int):
    """One rho step on the primitive ideal [a, (b + sqrt D)/2].

    Returns (a', b', gamma) with the new ideal equal to gamma times the old one,
    gamma = (b - sqrt D)/(2a) given as (num_rational, num_sqrtD, den).
    """
    c = (b * b - D) // (4 * a)
    a2 = abs(c)
    b2 = _rho_b(a2, -b, D, sD)
    return a2, b2, (b, -1, 2 * a)


def _gamma_element(F: QuadField, g) -> QuadElement:
    u, v, den = g
    return QuadElement(F, u, v * F.sqrt_D_coeff, den)


def _real_reduce(F: QuadField, a: int, b: int, track: bool):
    """Apply rho until the ideal is reduced; returns (a, b, Gamma)."""
    D = F.D
    sD = isqrt(D)
    Gamma = QuadElement(F, 1) if track else None
    b = _rho_b(a, b, D, sD) if a <= sD else b
    guard = 0
    while not _is_reduced_real(a, b, D, sD):
        a, b, g = _rho(a, b, D, sD)
        if track:
            Gamma = Gamma * _gamma_element(F, g)
        guard += 1
        if guard > 10000 + 4 * D.bit_length() * 64:
            raise RuntimeError("real reduction failed to terminate")
    return a, b, Gamma


def _real_cycle(F: QuadField, a: int, b: int):
    """The rho-cycle of a reduced ideal as a list of (a, b)."""
    D = F.D
    sD = isqrt(D)
    start = (a, b)
    cyc = [start]
    while True:
        a, b, _ = _rho(a, b, D, sD)
        if (a, b) == start:
            return cyc
        cyc.append((a, b))
        if len(cyc) > 4 * D + 10:
            raise RuntimeError("rho cycle did not close")


@dataclass(frozen=True)
class UnitData:
    eps: QuadElement
    norm_of_unit: int
    regulator_proxy: int  # period length of the principal rho-cycle


@lru_cache(maxsize=4096)
def fundamental_unit(F: QuadField) -> UnitData:
    """Fundamental unit eps > 1 (under sqrt(d) > 0) from one period of the
    principal cycle of reduced ideals."""
    if not F.real:
        raise ValueError("fundamental_unit needs a real field")
    D = F.D
    sD = isqrt(D)
    a, b = 1, _rho_b(1, D % 2, D, sD)
    start = (a, b)
    Gamma = QuadElement(F, 1)
    steps = 0
    while True:
        a, b, g = _rho(a, b, D, sD)
        Gamma = Gamma * _gamma_element(F, g)
        steps += 1
        if (a, b) == start:
            break
    eps = _positive_large(Gamma)
    n = eps.norm()
    return UnitData(eps, int(n), steps)


def _positive_large(u: QuadElement) -> QuadElement:
    """Among +-u, +-u^-1 (a unit) return the one > 1 at sqrt(d) > 0."""
    cands = [u, -u, u.inverse(), -u.inverse()]
    for c in cands:
        if (c - 1).sign() > 0:
            return c
    raise RuntimeError("no unit exceeds 1")


def real_generator(I: QuadIdeal) -> QuadElement:
    """Generator of a principal ideal of a real field.

    Balanced modulo the fundamental unit (minimal |trace| among the eps-multiples
    of the generator and its negative), then the sign is chosen so that the
    embedding of smaller absolute value is positive.
    """
    F = I.field
    if not F.real:
        raise ValueError("real_generator needs a real field")
    D = F.D
    sD = isqrt(D)
    a, b, Gamma = _real_reduce(F, I.a, I.b, True)
    start = (a, b)
    while a != 1:
        a, b, g = _rho(a, b, D, sD)
        Gamma = Gamma * _gamma_element(F, g)
        if (a, b) == start:
            raise NonPrincipal(I)
    # now Gamma * prim(I) = O, so prim(I) = (1/Gamma)
    gen = Gamma.inverse() * I.s
    return normalize_real_generator(gen)


def normalize_real_generator(g: QuadElement) -> QuadElement:
    F = g.field
    eps = fundamental_unit(F).eps
    epsinv = eps.inverse()

    def score(x):
        return abs(x.trace())

    best = g
    # walk in the direction that lowers |trace|
    for step in (eps, epsinv):
        cur = best
        while True:
            nxt = cur * step
            if score(nxt) < score(cur):
                cur = nxt
            else:
                break
        best = cur if score(cur) < score(best) else best
    # a tie between x and x*eps^{+-1} goes to the one positive-and-larger at sqrt(d) > 0
    for alt in (best * eps, best * epsinv):
        if score(alt) == score(best) and (alt * alt - best * best).sign() > 0:
            best = alt
    small_sign = best.sign(conjugate=not best.small_embedding_is_plus())
    return -best if small_sign < 0 else best


# ---------------------------------------------------------------- class groups


class _Group:
    """Finite abelian group of ideal classes, with canonical class keys."""

    def __init__(self, F: QuadField):
        self.F = F
        self.D = F.D
        if F.real:
            self.sD = isqrt(self.D)
            self._canon_cache: dict = {}

    def canon(self, form_ab):
        a, b = form_ab
        if not self.F.real:
            c = (b * b - self.D) // (4 * a)
            ra, rb, _ = reduce_imaginary((a, b, c))
            return ra, rb
        ra, rb, _ = _real_reduce(self.F, a, b, False)
        hit = self._canon_cache.get((ra, rb))
        if hit is not None:
            return hit
        cyc = _real_cycle(self.F, ra, rb)
        key = min(cyc)
        for x in cyc:
            self._canon_cache[x] = key
        return key

    def identity(self):
        return self.canon((1, self.D % 2))

    def mul(self, x, y):
        D = self.D
        fx = (x[0], x[1], (x[1] * x[1] - D) // (4 * x[0]))
        fy = (y[0], y[1], (y[1] * y[1] - D) // (4 * y[0]))
        a3, b3, _, _ = compose_forms(fx, fy)
        return self.canon((a3, b3))

    def inv(self, x):
        return self.canon((x[0], -x[1]))

    def pow(self, x, n):
        if n < 0:
            x, n = self.inv(x), -n
        result = self.identity()
        base = x
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def elements(self):
        if not self.F.real:
            return [(a, b) for a, b, _ in reduced_forms(self.D)]
        D, sD = self.D, self.sD
        keys = set()
        for a in range(1, sD + 1):
            for b in range(sD, 0, -1):
                if (b - D) % 2 or (b * b - D) % (4 * a):
                    continue
                if _is_reduced_real(a, b, D, sD):
                    keys.add(self.canon((a, b)))
        return sorted(keys)


def _sylow_basis(G: _Group, S: list, ell: int):
    """Basis of the abelian ell-group S (given as all its elements).

    Returns (orders, basis, table) with table mapping each element of S to its
    exponent vector on the basis.
    """
    e = G.identity()
    table = {e: ()}
    basis, orders = [], []

    def order_mod(x, H):
        k = 0
        while x not in H:
            x = G.pow(x, ell)
            k += 1
        return k

    Sset = list(S)
    while len(table) < len(Sset):
        best, bk = None, -1
        for x in Sset:
            if x in table:
                continue
            k = order_mod(x, table)
            if k > bk:
                best, bk = x, k
        n = ell ** bk
        y = G.pow(best, n)
        # y = z^n for some z in H since the quotient order of best is maximal
        ez = None
        for z, vec in table.items():
            if G.pow(z, n) == y:
                ez = (z, vec)
                break
        if ez is None:
            raise RuntimeError("basis extension failed")
        z, zvec = ez
        xprime = G.mul(best, G.inv(z))
        new_table = {}
        cur = e
        for i in range(n):
            for h, vec in table.items():
                new_table[G.mul(h, cur)] = vec + (i,)
            cur = G.mul(cur, xprime)
        table = new_table
        basis.append(xprime)
        orders.append(n)
    # pad earlier vectors: entries were appended progressively, all same length now
    return orders, basis, table


class ClassGroupData:
    """Class group with elementary divisors d_1 | d_2 | ... and generators."""

    def __init__(self, F: QuadField):
        self.field = F
        G = _Group(F)
        self._G = G
        elems = G.elements()
        self.order = len(elems)
        h = self.order
        self._sylow = {}
        per_prime = {}
        for ell, v in sorted(factorint(h).items()):
            cof = h // ell ** v
            S = {G.identity()}
            for x in elems:
                if len(S) == ell ** v:
                    break
                y = G.pow(x, cof)
                if y in S:
                    continue
                # close the subgroup under multiplication by y
                frontier = list(S)
                cur = y
                new = set(S)
                while cur not in S:
                    for s in frontier:
                        new.add(G.mul(s, cur))
                    cur = G.mul(cur, y)
                S = new
            orders, basis, table = _sylow_basis(G, sorted(S), ell)
            self._sylow[ell] = (orders, basis, table, cof)
            per_prime[ell] = (orders, basis)
        # combine: invariant factors, largest first
        rank = max((len(o) for o, _ in per_prime.values()), default=0)
        divs, gens = [], []
        for i in range(rank):
            d = 1
            g = G.identity()
            for ell, (orders, basis) in per_prime.items():
                if i < len(orders):
                    d *= orders[i]
                    g = G.mul(g, basis[i])
            divs.append(d)
            gens.append(g)
        # ascending divisibility chain
        self.elementary_divisors = divs[::-1]
        self._gen_keys = gens[::-1]
        self.generators = [QuadIdeal(F, a, b) for a, b in self._gen_keys]

    def __repr__(self):
        return f"ClassGroupData({self.field}, h={self.order}, cyc={self.elementary_divisors})"

    @property
    def cyclic(self) -> bool:
        return len(self.elementary_divisors) <= 1

    def p_part(self, p: int) -> list[int]:
        """Elementary divisors of the p-Sylow subgroup, ascending."""
        if p not in self._sylow:
            return []
        return sorted(self._sylow[p][0])

    def p_exponent(self, p: int) -> int:
        """Largest p-valuation among elementary divisors."""
        part = self.p_part(p)
        return max((vp_int(d, p) for d in part), default=0)

    def key(self, I: QuadIdeal):
        return self._G.canon((I.a, I.b))

    def discrete_log(self, I: QuadIdeal) -> tuple[int, ...]:
        """Exponents (n_i) with cl(I) = prod g_i^{n_i}, n_i mod d_i."""
        G = self._G
        x = self.key(I)
        divs = self.elementary_divisors
        r = len(divs)
        residues = [[] for _ in range(r)]
        for ell, (orders, basis, table, cof) in self._sylow.items():
            vec = table[G.pow(x, cof)]
            # position j in the descending list corresponds to index r-1-j ascending
            for j, (e, n) in enumerate(zip(vec, orders)):
                ni = e * pow(cof, -1, n) % n
                residues[r - 1 - j].append((ni, n))
        out = []
        for res in residues:
            n_val, mod = 0, 1
            for ni, n in res:
                # CRT
                t = (ni - n_val) * pow(mod, -1, n) % n
                n_val, mod = n_val + mod * t, mod * n
            out.append(n_val % mod if mod > 1 else 0)
        return tuple(out)

    def class_order(self, I: QuadIdeal) -> int:
        from math import lcm

        dl = self.discrete_log(I)
        return lcm(1, *(d // gcd(n, d) for n, d in zip(dl, self.elementary_divisors)))

    def is_trivial_class(self, I: QuadIdeal) -> bool:
        return self.key(I) == self._G.identity()


_cg_cache: dict = {}


def class_group(F: QuadField) -> ClassGroupData:
    cg = _cg_cache.get(F)
    if cg is None:
        cg = ClassGroupData(F)
        _cg_cache[F] = cg
    return cg


def order_of_class(I: QuadIdeal, h: int | None = None) -> int:
    """Order of cl(I); h is a known multiple (the class number) when supplied."""
    F = I.field
    if h is None:
        return class_group(F).class_order(I)
    G = _Group(F)
    x = G.canon((I.a, I.b))
    one = G.identity()
    order = h
    for ell, v in factorint(h).items():
        for _ in range(v):
            if order % ell == 0 and G.pow(x, order // ell) == one:
                order //= ell
            else:
                break
    return order


def vp_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


__all__ = [
    "NotSquarefree", "NonPrincipal", "QuadField", "QuadElement", "QuadIdeal",
    "SplitType", "UnitData", "ClassGroupData", "make_field", "split_type",
    "class_group", "order_of_class", "principal_generator", "real_generator",
    "fundamental_unit", "ideal_mul", "ideal_pow", "is_principal", "reduced_forms",
    "imaginary_class_numbers", "compose_forms", "reduce_imaginary", "kronecker",
    "icbrt", "is_squarefree", "prime_ideals_above", "sqrt_mod_prime",
]
