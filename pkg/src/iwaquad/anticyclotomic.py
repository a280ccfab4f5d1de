"""First layer of the anti-cyclotomic Z_3-extension of Q(sqrt(-m)), from a Kummer
radical of the mirror field and a sieve over auxiliary primes q.

Cubics over Q are tuples of integer coefficients, highest degree first.
Cubics over k have QuadElement coefficients.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, isqrt

import gmpy2

from .padics import vp
from .quad_arith import (
    QuadElement,
    QuadField,
    QuadIdeal,
    class_group,
    fundamental_unit,
    icbrt,
    is_squarefree,
    kronecker,
    make_field,
    normalize_real_generator,
    prime_ideals_above,
    principal_generator,
    real_generator,
    split_type,
)


class NotApplicable(ValueError):
    pass


class NotACube(ValueError):
    pass


class NoSurvivor(RuntimeError):
    def __init__(self, msg, audit):
        super().__init__(msg)
        self.audit = audit


class InvalidRadical(ValueError):
    pass


# ---------------------------------------------------------------- mirror field


@dataclass(frozen=True)
class MirrorField:
    m: int
    star: QuadField
    h_star: int
    v3_h_star: int

    @property
    def k(self) -> QuadField:
        return make_field(self.m)


def mirror(m: int) -> MirrorField:
    """k* = Q(sqrt(3m)) when 3 does not divide m, Q(sqrt(m/3)) otherwise."""
    if not is_squarefree(m):
        raise ValueError(f"m={m} is not squarefree")
    ms = m // 3 if m % 3 == 0 else 3 * m
    if ms == 1:
        raise NotApplicable("mirror field of Q(sqrt(-3)) is Q")
    star = make_field(ms, "real")
    h = class_group(star).order
    return MirrorField(m, star, h, vp(h, 3))


# ---------------------------------------------------------------- candidates


class Status(enum.Enum):
    ALIVE = "alive"
    ELIMINATED = "eliminated"
    SELECTED = "selected"


@dataclass(frozen=True)
class RadicalCandidate:
    j: int
    w: QuadElement
    a: int
    t: int
    status: Status = Status.ALIVE
    eliminated_at: int | None = None

    @property
    def Q(self) -> tuple[int, int, int, int]:
        return (1, 0, -3 * self.a, -self.t)


def make_candidate(j: int, w: QuadElement) -> RadicalCandidate:
    n = w.norm()
    tr = w.trace()
    if n.denominator != 1 or tr.denominator != 1:
        raise NotACube(f"{w} is not integral")
    a = icbrt(int(n))
    if a is None:
        raise NotACube(f"N({w}) = {n} is not a cube")
    return RadicalCandidate(j, w, a, int(tr))


def _aux_ideal(star: QuadField) -> QuadIdeal:
    """Smallest-norm prime ideal whose class has the largest elementary divisor as order."""
    cg = class_group(star)
    target = cg.elementary_divisors[-1]
    ell = 2
    while True:
        for P in prime_ideals_above(star, ell):
            if cg.class_order(P) == target:
                return P
        ell = int(gmpy2.next_prime(ell))
        if ell > 10 ** 6:
            raise RuntimeError("no prime ideal generates the class group part")


def _small_plus(g: QuadElement) -> QuadElement:
    # among a generator and its conjugate, keep the one small at sqrt(d) > 0
    return g if g.small_embedding_is_plus() else g.conj()


def canonical_basis(MF: MirrorField) -> tuple[QuadElement, QuadElement]:
    """(w0, w1): w0 = eps > 1 and w1 a generator of a^h* for a class of order divisible by 3."""
    if MF.v3_h_star != 1:
        raise NotApplicable(f"v_3(h*) = {MF.v3_h_star} for m={MF.m}")
    star = MF.star
    w0 = fundamental_unit(star).eps
    A = _aux_ideal(star)
    w1 = _small_plus(real_generator(A ** MF.h_star))
    return w0, w1


def _ideals_of_norm(F: QuadField, n: int):
    """All ideals s*[a, (b + sqrt D)/2] of norm n."""
    D = F.D
    s = 1
    while s * s <= n:
        if n % (s * s) == 0:
            a = n // (s * s)
            for b in range(-a + 1, a + 1):
                if (b * b - D) % (4 * a) == 0:
                    yield QuadIdeal(F, a, b, s)
        s += 1


def validate_basis(MF: MirrorField, w0: QuadElement, w1: QuadElement) -> QuadIdeal:
    """Check an externally supplied radical basis; returns the ideal a with (w1) = a^h*."""
    star = MF.star
    if w0.field != star or w1.field != star:
        raise InvalidRadical("radical basis must live in the mirror field")
    eps = fundamental_unit(star).eps
    if w0 not in (eps, -eps, eps.inverse(), -eps.inverse()):
        raise InvalidRadical(f"{w0} is not +-eps^(+-1)")
    if not w1.is_integral():
        raise InvalidRadical(f"{w1} is not integral")
    n = abs(int(w1.norm()))
    r, exact = gmpy2.iroot(n, MF.h_star)
    if not exact:
        raise InvalidRadical(f"|N(w1)| = {n} is not an h*-th power")
    r = int(r)
    if r > 10 ** 6:
        raise InvalidRadical("norm of the auxiliary ideal too large to search")
    target = QuadIdeal.principal(w1)
    cg = class_group(star)
    for A in _ideals_of_norm(star, r):
        if A ** MF.h_star == target and cg.class_order(A) % 3 == 0:
            return A
    raise InvalidRadical(f"(w1) is not a^h* for a class of order divisible by 3")


def radical_candidates(MF: MirrorField, basis: tuple[QuadElement, QuadElement] | None = None
                       ) -> list[RadicalCandidate]:
    """[w0, w1, w0*w1, w0*w1^2] from the canonical basis or a validated replay basis."""
    if MF.v3_h_star != 1:
        raise NotApplicable(f"v_3(h*) = {MF.v3_h_star} for m={MF.m}")
    if basis is None:
        w0, w1 = canonical_basis(MF)
    else:
        w0, w1 = basis
        validate_basis(MF, w0, w1)
    ws = [w0, w1, w0 * w1, w0 * w1 * w1]
    return [make_candidate(j + 1, w) for j, w in enumerate(ws)]


# ---------------------------------------------------------------- cubics


def cubic_from_radical(c: RadicalCandidate) -> tuple[int, int, int, int]:
    """x^3 - 3a x - t with a^3 = N(w), t = Tr(w)."""
    if c.a ** 3 != c.w.norm():
        raise NotACube(f"a^3 != N(w) for {c.w}")
    return c.Q


def cubic_discriminant(Q) -> int:
    _, b, c, d = Q  # monic
    return b * b * c * c - 4 * c ** 3 - 4 * b ** 3 * d - 27 * d * d + 18 * b * c * d


def radical_root_residual(c: RadicalCandidate) -> float:
    """|Q(cbrt(w) + cbrt(w'))| relative to the scale of the terms."""
    import mpmath

    mpmath.mp.dps = 60
    x1, x2 = (mpmath.mpf(v) for v in _embeddings_mp(c.w))
    # real cube roots, so that their product is the rational a
    r = _real_cbrt(x1) + _real_cbrt(x2)
    terms = [r ** 3, 3 * c.a * r, mpmath.mpf(c.t)]
    val = terms[0] - terms[1] - terms[2]
    scale = max(abs(t) for t in terms) or 1
    return float(abs(val) / scale)


def _real_cbrt(x):
    import mpmath

    return mpmath.cbrt(x) if x >= 0 else -mpmath.cbrt(-x)


def _embeddings_mp(w: QuadElement):
    import mpmath

    s = mpmath.sqrt(w.field.d)
    return (w.a + w.b * s) / w.den, (w.a - w.b * s) / w.den


def conjugate_layers(c: RadicalCandidate, m: int):
    """The two conjugate cubics over k = Q(sqrt(-m)) defining the non-Galois layers.

    With w = (u + v sqrt(d*))/2 the traces are -(u +- 3v sqrt(-m))/2 when 3 does
    not divide m and -(u +- v sqrt(-m))/2 otherwise.  The first cubic is the one
    whose t has a positive sqrt(-m) coefficient.
    """
    k = make_field(m)
    w = c.w
    u = Fraction(2 * w.a, w.den)
    v = Fraction(2 * w.b, w.den)
    if u.denominator != 1 or v.denominator != 1:
        raise NotACube(f"{w} is not integral")
    u, v = int(u), int(v)
    f = 1 if m % 3 == 0 else 3
    t1 = QuadElement(k, -u, abs(f * v), 2)
    t2 = t1.conj()
    Q1 = (1, 0, -3 * c.a, -t1)
    Q2 = (1, 0, -3 * c.a, -t2)
    return Q1, Q2


def poly_mul(P, R):
    out = [0] * (len(P) + len(R) - 1)
    for i, x in enumerate(P):
        for j, y in enumerate(R):
            out[i + j] = out[i + j] + x * y
    return out


def rational_product(Q1, Q2) -> tuple[int, ...]:
    """R = Q1 * Q2, asserted to have rational integer coefficients."""
    R = poly_mul(Q1, Q2)
    out = []
    for x in R:
        if isinstance(x, QuadElement):
            if not x.is_rational() or x.den != 1:
                raise ArithmeticError(f"non-rational coefficient {x}")
            x = x.a
        out.append(int(x))
    return tuple(out)


def format_poly(Q, var: str = "x") -> str:
    n = len(Q) - 1
    parts = []
    for i, c in enumerate(Q):
        e = n - i
        if isinstance(c, QuadElement) and c.is_rational() and c.den == 1:
            c = c.a
        if isinstance(c, QuadElement):
            mono = "" if e == 0 else (f"*{var}" if e == 1 else f"*{var}^{e}")
            parts.append(("+", f"({c}){mono}"))
            continue
        if c == 0:
            continue
        sgn = "-" if c < 0 else "+"
        a = abs(c)
        if e == 0:
            body = str(a)
        else:
            mono = var if e == 1 else f"{var}^{e}"
            body = mono if a == 1 else f"{a}*{mono}"
        parts.append((sgn, body))
    if not parts:
        return "0"
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sgn, body in parts[1:]:
        s += f" {sgn} {body}"
    return s


def format_layer_poly(Q) -> str:
    """x^3 + A*x - C style rendering of a cubic over k, with C = t when possible."""
    _, _, c1, c0 = Q
    head = format_poly((1, 0, c1 if not isinstance(c1, QuadElement) else c1.a, 0))
    t = -c0
    num = f"{t.a} + {t.b}*sqrt({t.field.d})" if t.b >= 0 else f"{t.a} - {-t.b}*sqrt({t.field.d})"
    tail = f"({num})/{t.den}" if t.den != 1 else f"({num})"
    return f"{head} - {tail}"


# ---------------------------------------------------------------- roots mod q


def _polmod(P, Q, q):
    """Remainder of P by the monic Q over F_q (lists, highest degree first)."""
    P = [x % q for x in P]
    n = len(Q) - 1
    while len(P) > n:
        lead = P[0]
        if lead:
            for i in range(1, n + 1):
                P[i] = (P[i] - lead * Q[i]) % q
        P = P[1:]
    return P


def _mulmod(A, B, Q, q):
    return _polmod(poly_mul(A, B), Q, q)


def _polgcd_deg(A, B, q) -> int:
    """Degree of gcd(A, B) over F_q."""
    def strip(P):
        P = [x % q for x in P]
        while P and P[0] == 0:
            P = P[1:]
        return P

    A, B = strip(A), strip(B)
    while B:
        inv = pow(B[0], -1, q)
        B = [x * inv % q for x in B]
        A = strip(_polmod(A, B, q)) if len(A) >= len(B) else A
        A, B = B, A
    return len(A) - 1


def has_root_mod(Q, q: int) -> bool:
    """True iff the monic integer cubic Q has a root in F_q."""
    Qm = [x % q for x in Q]
    # x^q mod Q by repeated squaring
    result = [1]
    base = [1, 0]
    e = q
    while e:
        if e & 1:
            result = _mulmod(result, base, Qm, q)
        e >>= 1
        if e:
            base = _mulmod(base, base, Qm, q)
    # x^q - x
    r = [0] * (3 - len(result)) + result
    r[-2] = (r[-2] - 1) % q
    return _polgcd_deg(Qm, r, q) >= 1


# ---------------------------------------------------------------- sieve


class Verdict(enum.Enum):
    UNIQUE = "unique"
    INCONCLUSIVE = "inconclusive"
    NO_SURVIVOR = "no survivor"


@dataclass(frozen=True)
class SieveConfig:
    q_bound: int = 10 ** 5
    pp: int | None = None  # 3^(e_k + 2) from the class group of k when None
    radical_basis: tuple[QuadElement, QuadElement] | None = None
    exhaustive: bool = False  # keep sieving after a unique survivor

    def __post_init__(self):
        if self.pp is not None and (self.pp < 9 or 3 ** vp(self.pp, 3) != self.pp):
            raise ValueError("pp must be a power of 3 at least 9")
        if self.q_bound < 5:
            raise ValueError("q_bound must be at least 5")


@dataclass
class LayerResult:
    m: int
    mirror: MirrorField
    candidates: list[RadicalCandidate]
    verdict: Verdict
    selected: RadicalCandidate | None
    Q_ac: tuple[int, int, int, int] | None
    Q: tuple | None
    Q_conj: tuple | None
    audit: list[tuple[int, int]] = field(default_factory=list)
    qualified: list[int] = field(default_factory=list)
    pp: int = 9

    @property
    def survivors(self) -> list[RadicalCandidate]:
        return [c for c in self.candidates if c.status != Status.ELIMINATED]


def sieve_modulus(k: QuadField) -> int:
    cg = class_group(k)
    return 3 ** (cg.p_exponent(3) + 2)


def _frac_v3(x: Fraction) -> int:
    if x == 0:
        return 10 ** 9
    return vp(x.numerator, 3) - vp(x.denominator, 3)


def qualifies(k: QuadField, q: int, h_k: int, pp: int) -> bool:
    """The principality test applied to an auxiliary split prime q."""
    A = split_type(k, q).primes[0]
    g = principal_generator(A ** h_k)
    C0, C1 = g.power_coords()
    if C0.numerator % 3 == 0:
        C0, C1 = C1, C0
    e = vp(pp, 3)
    # C0^2 = 1 and C1 = 0 modulo pp, then 3 | (C0^2 - 1)/pp
    return _frac_v3(C0 * C0 - 1) >= e + 1 and _frac_v3(C1) >= e


def _q_candidates(pp: int, q_bound: int):
    # q^2 = 1 mod pp means q = +-1 mod pp (pp a power of an odd prime)
    base = 0
    while base - 1 <= q_bound:
        for q in (base - 1, base + 1):
            if 5 <= q <= q_bound and gmpy2.is_prime(q):
                yield q
        base += pp


def select_radical(k: QuadField, candidates: list[RadicalCandidate], cfg: SieveConfig,
                   mirror_field: MirrorField | None = None) -> LayerResult:
    m = k.m
    h_k = class_group(k).order
    pp = cfg.pp or sieve_modulus(k)
    cands = list(candidates)
    audit: list[tuple[int, int]] = []
    qualified: list[int] = []
    for q in _q_candidates(pp, cfg.q_bound):
        alive = [i for i, c in enumerate(cands) if c.status == Status.ALIVE]
        if len(alive) <= 1 and not cfg.exhaustive:
            break
        if kronecker(-m if m % 4 == 3 else -4 * m, q) != 1:
            continue
        if not qualifies(k, q, h_k, pp):
            continue
        qualified.append(q)
        for i in alive:
            c = cands[i]
            if not has_root_mod(c.Q, q):
                cands[i] = replace(c, status=Status.ELIMINATED, eliminated_at=q)
                audit.append((q, c.j))
    alive = [c for c in cands if c.status == Status.ALIVE]
    mf = mirror_field or mirror(m)
    if not alive:
        raise NoSurvivor(f"all candidates eliminated for m={m}", audit)
    if len(alive) > 1:
        return LayerResult(m, mf, cands, Verdict.INCONCLUSIVE, None, None, None, None,
                           audit, qualified, pp)
    sel = replace(alive[0], status=Status.SELECTED)
    cands = [sel if c.j == sel.j else c for c in cands]
    Q1, Q2 = conjugate_layers(sel, m)
    return LayerResult(m, mf, cands, Verdict.UNIQUE, sel, cubic_from_radical(sel), Q1, Q2,
                       audit, qualified, pp)


def first_layer(m: int, cfg: SieveConfig = SieveConfig()) -> LayerResult:
    MF = mirror(m)
    cands = radical_candidates(MF, cfg.radical_basis)
    return select_radical(make_field(m), cands, cfg, MF)


# ---------------------------------------------------------------- field comparison


def _squarefree_kernel(n: int) -> int:
    from sympy import factorint

    sgn = -1 if n < 0 else 1
    out = 1
    for ell, e in factorint(abs(n)).items():
        if e % 2:
            out *= ell
    return sgn * out


def root_count_mod(P, q: int) -> int:
    return sum(1 for x in range(q) if _eval_mod(P, x, q) == 0)


def _eval_mod(P, x, q):
    r = 0
    for c in P:
        r = (r * x + c) % q
    return r


def same_cubic_field(P1, P2, n_primes: int = 50) -> bool:
    """Isomorphism test for cubic fields: equal discriminant square class and equal
    root counts modulo the first n_primes primes not dividing either discriminant."""
    d1, d2 = cubic_disc_any(P1), cubic_disc_any(P2)
    if d1 == 0 or d2 == 0:
        raise ValueError("reducible or inseparable cubic")
    if _squarefree_kernel(d1) != _squarefree_kernel(d2):
        return False
    q, seen = 5, 0
    while seen < n_primes:
        if d1 % q and d2 % q:
            if root_count_mod(P1, q) != root_count_mod(P2, q):
                return False
            seen += 1
        q = int(gmpy2.next_prime(q))
    return True


def cubic_disc_any(P) -> int:
    a, b, c, d = P
    return (b * b * c * c - 4 * a * c ** 3 - 4 * b ** 3 * d - 27 * a * a * d * d
            + 18 * a * b * c * d)
