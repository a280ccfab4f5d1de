"""Finite-precision p-adic integers, Hensel square roots and the Iwasawa log.

Logs are only ever taken of units, which is the convention log(p) = 0 without
having to extend the series.
"""

from __future__ import annotations

from dataclasses import dataclass

from .quad_arith import QuadElement, QuadIdeal, kronecker


class NonResidue(ValueError):
    pass


class NotAUnit(ValueError):
    pass


class PrecisionExhausted(RuntimeError):
    pass


def vp(z: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if z == 0:
        raise ValueError("valuation of zero is infinite")
    z = abs(z)
    v = 0
    # strip large powers first, cheap for big z
    pk, k = p, 1
    while z % pk == 0:
        z //= pk
        v += k
        pk, k = pk * pk, k * 2
    while z % p == 0:
        z //= p
        v += 1
    return v


@dataclass(frozen=True)
class PAdicInt:
    p: int
    N: int
    residue: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("negative precision")
        object.__setattr__(self, "residue", self.residue % self.p ** self.N)

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    def _check(self, other) -> PAdicInt:
        if isinstance(other, int):
            return PAdicInt(self.p, self.N, other)
        if other.p != self.p:
            raise ValueError("mixed primes")
        return other

    def _prec(self, other) -> int:
        return min(self.N, other.N)

    def __add__(self, other):
        o = self._check(other)
        return PAdicInt(self.p, self._prec(o), self.residue + o.residue)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._check(other)
        return PAdicInt(self.p, self._prec(o), self.residue - o.residue)

    def __rsub__(self, other):
        return self._check(other) - self

    def __neg__(self):
        return PAdicInt(self.p, self.N, -self.residue)

    def __mul__(self, other):
        o = self._check(other)
        return PAdicInt(self.p, self._prec(o), self.residue * o.residue)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return PAdicInt(self.p, self.N, pow(self.residue, n, self.modulus))

    def is_unit(self) -> bool:
        return self.N > 0 and self.residue % self.p != 0

    def inverse(self) -> PAdicInt:
        if not self.is_unit():
            raise NotAUnit("only units are invertible")
        return PAdicInt(self.p, self.N, pow(self.residue, -1, self.modulus))

    def div_p(self, k: int = 1) -> PAdicInt:
        """Exact division by p^k; the precision drops by k."""
        if self.N < k or self.residue % self.p ** k:
            raise ValueError("not divisible at this precision")
        return PAdicInt(self.p, self.N - k, self.residue // self.p ** k)

    def valuation(self) -> int:
        """Valuation, or N when the residue is 0 (only a lower bound)."""
        if self.residue == 0:
            return self.N
        return vp(self.residue, self.p)

    def __eq__(self, other):
        if isinstance(other, int):
            other = PAdicInt(self.p, self.N, other)
        if not isinstance(other, PAdicInt):
            return NotImplemented
        n = self._prec(other)
        return self.p == other.p and (self.residue - other.residue) % self.p ** n == 0

    def __hash__(self):
        return hash((self.p, self.N, self.residue))


@dataclass(frozen=True)
class PrecisionPolicy:
    initial: int = 8
    max_N: int = 4096
    growth: int = 2

    def __post_init__(self):
        if self.initial < 4:
            raise ValueError("initial precision must be at least 4")

    def schedule(self):
        N = self.initial
        while N <= self.max_N:
            yield N
            N *= self.growth


def hensel_sqrt(a: int, p: int, N: int) -> PAdicInt:
    """s with s^2 = a mod p^N for a a nonzero square mod the odd prime p."""
    if a % p == 0:
        raise NonResidue(f"{a} is divisible by {p}")
    if kronecker(a, p) != 1:
        raise NonResidue(f"{a} is not a square mod {p}")
    from .quad_arith import sqrt_mod_prime

    s = sqrt_mod_prime(a, p)
    k = 1
    while k < N:
        k = min(2 * k, N)
        mod = p ** k
        # Newton step s <- s - (s^2 - a)/(2s)
        s = (s - (s * s - a) * pow(2 * s, -1, mod)) % mod
    return PAdicInt(p, N, s)


def sqrt_d_root_for(P: QuadIdeal, N: int) -> PAdicInt:
    """The p-adic square root of d that sends the prime ideal P into pZ_p."""
    F = P.field
    p = P.a
    s = hensel_sqrt(F.d, p, N)
    # P = [p, (b + k sqrt d)/2]: under the embedding, (b + k s)/2 must be = 0 mod p
    k = F.sqrt_D_coeff
    if (P.b + k * s.residue) * pow(2, -1, p) % p != 0:
        s = -s
    return s


def embed_at_p(z: QuadElement, P: QuadIdeal, N: int) -> PAdicInt:
    """Image of z in Z_p under the embedding attached to the split prime P."""
    p = P.a
    if z.den % p == 0:
        raise NotAUnit("denominator divisible by p")
    s = sqrt_d_root_for(P, N)
    mod = p ** N
    return PAdicInt(p, N, (z.a + z.b * s.residue) * pow(z.den, -1, mod))


def log_series(t: PAdicInt) -> PAdicInt:
    """log(1 + t) for v_p(t) >= 1, exact to the precision of t."""
    p, N = t.p, t.N
    s = t.valuation()
    if s < 1:
        raise ValueError("log series needs v_p(t) >= 1")
    if s >= N:
        return PAdicInt(p, N, 0)
    mod = p ** N
    t1 = t.residue // p ** s  # t = p^s * t1
    total = 0
    k = 1
    t1k = t1 % mod
    while True:
        # s*k - (number of base-p digits of k) bounds v_p(t^k/k) from below and
        # never decreases, so once it reaches N the tail vanishes mod p^N
        if s * k - len(_digits(k, p)) >= N:
            break
        j = vp(k, p)
        e = s * k - j
        if e < N:
            kp = k // p ** j
            term = pow(p, e, mod) * t1k * pow(kp, -1, mod)
            total += term if k % 2 else -term
        k += 1
        t1k = t1k * t1 % mod
    return PAdicInt(p, N, total)


def _digits(n: int, p: int) -> list[int]:
    out = []
    while n:
        out.append(n % p)
        n //= p
    return out


def iwasawa_log_unit(u: PAdicInt) -> PAdicInt:
    """log(u) = (1/(p-1)) log(u^(p-1)) for a unit u."""
    if not u.is_unit():
        raise NotAUnit("Iwasawa log is only taken on units here")
    p = u.p
    t = u ** (p - 1) - 1
    L = log_series(t)
    return L * pow(p - 1, -1, p ** L.N)


def delta_from_log(xbar_embedded: PAdicInt) -> int | None:
    """v_p((1/p) log(u)), or None when the precision cannot certify it."""
    L = iwasawa_log_unit(xbar_embedded)
    v = L.valuation()
    if v >= L.N - 2:
        return None
    return v - 1
