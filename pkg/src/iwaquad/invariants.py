"""Fundamental p-units, the Fermat-quotient valuation delta, the order of the
logarithmic class group and the closed-form predictions built on them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

from .padics import PrecisionExhausted, PrecisionPolicy, delta_from_log, embed_at_p, vp
from .quad_arith import (
    QuadElement,
    QuadField,
    QuadIdeal,
    class_group,
    make_field,
    order_of_class,
    principal_generator,
    split_type,
)


class NotSplit(ValueError):
    pass


class InvalidLayers(ValueError):
    pass


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class PUnitRecord:
    field: QuadField
    p: int
    prime: QuadIdeal
    h: int
    x: QuadElement
    h_k: int
    p_part: tuple[int, ...] | None = None  # elementary divisors of the p-class group

    @property
    def m(self) -> int:
        return self.field.m

    @cached_property
    def X(self) -> QuadElement:
        """Generator of prime^h_k, equal to x^(h_k/h)."""
        return self.x ** (self.h_k // self.h)

    @property
    def vp_hk(self) -> int:
        return vp(self.h_k, self.p)

    @property
    def vp_h(self) -> int:
        return vp(self.h, self.p)


def fundamental_p_unit(F: QuadField | int, p: int, prime: QuadIdeal | None = None,
                       class_number: int | None = None) -> PUnitRecord:
    """(h, x) with prime^h = (x) for the split prime above p."""
    if isinstance(F, int):
        F = make_field(F)
    if F.real:
        raise ValueError("imaginary field expected")
    if p == 2 or p < 2:
        raise ValueError("p must be an odd prime")
    st = split_type(F, p)
    if not st.is_split:
        raise NotSplit(f"{p} is {st.kind} in {F}")
    P = prime if prime is not None else st.primes[0]
    p_part = None
    if class_number is None:
        cg = class_group(F)
        h_k = cg.order
        p_part = tuple(cg.p_part(p))
        h = cg.class_order(P)
    else:
        h_k = class_number
        h = order_of_class(P, h_k)
    x = principal_generator(P ** h)
    return PUnitRecord(F, p, P, h, x, h_k, p_part)


def _pow_surd_mod(a: int, b: int, d: int, e: int, mod: int) -> tuple[int, int]:
    """(a + b sqrt d)^e modulo mod, as a pair of residues."""
    ra, rb = 1, 0
    a, b = a % mod, b % mod
    while e:
        if e & 1:
            ra, rb = (ra * a + d * rb * b) % mod, (ra * b + rb * a) % mod
        e >>= 1
        if e:
            a, b = (a * a + d * b * b) % mod, (2 * a * b) % mod
    return ra, rb


def norm_valuation_of_power_minus_one(z: QuadElement, p: int, e: int, start: int = 8) -> int:
    """v_p(N(z^e - 1)), computed modulo growing powers of p (exact)."""
    d = z.field.d
    den_e_needed = z.den % p != 0
    if not den_e_needed:
        raise ValueError("denominator divisible by p")
    K = start
    while True:
        mod = p ** K
        u, v = _pow_surd_mod(z.a, z.b, d, e, mod)
        # z^e - 1 = ((A + B sqrt d) - den^e)/den^e
        u = (u - pow(z.den, e, mod)) % mod
        n = (u * u - d * v * v) % mod
        if n:
            return vp(n, p)
        K *= 2
        if K > 1 << 16:
            raise PrecisionExhausted("norm valuation beyond working precision")


def delta_p(rec: PUnitRecord) -> int:
    """delta_p(k) = v_p(N(xbar^(p-1) - 1)) - 1, the norm method."""
    return norm_valuation_of_power_minus_one(rec.x.conj(), rec.p, rec.p - 1) - 1


def delta_p_via_log(rec: PUnitRecord, policy: PrecisionPolicy = PrecisionPolicy()) -> int:
    """delta_p(k) = v_p((1/p) log(xbar)) in the completion at the chosen prime."""
    xbar = rec.x.conj()
    for N in policy.schedule():
        d = delta_from_log(embed_at_p(xbar, rec.prime, N))
        if d is not None:
            return d
    raise PrecisionExhausted(f"delta above {policy.max_N} for m={rec.m}, p={rec.p}")


def delta_tilde(rec: PUnitRecord, delta: int | None = None) -> int:
    if delta is None:
        delta = delta_p(rec)
    return delta + rec.vp_hk - rec.vp_h


def log_class_order(rec: PUnitRecord, delta: int | None = None) -> int:
    """Order p^delta_tilde of the logarithmic class group."""
    return rec.p ** delta_tilde(rec, delta)


def is_log_trivial(rec: PUnitRecord, delta: int | None = None) -> bool:
    """Trivial logarithmic class group: H_k generated by cl(p) and delta = 0."""
    return delta_tilde(rec, delta) == 0


def _infer_p(n: int) -> int:
    from sympy import factorint

    f = factorint(n)
    if len(f) != 1:
        raise ValueError(f"cannot infer p from {n}; pass p explicitly")
    return next(iter(f))


class GoldVerdict(enum.Enum):
    """HOLDS means the favourable case: lambda = 1 (Gold, Gold-Sands) or the
    Iwasawa formula #H_{K_n} = p^(n + v_p(h)) (gold_plus)."""

    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not applicable"


def gold_criterion(rec: PUnitRecord, delta: int | None = None) -> GoldVerdict:
    """With a trivial p-class group: lambda = 1 iff delta = 0."""
    if rec.vp_hk != 0:
        return GoldVerdict.NOT_APPLICABLE
    delta = delta_p(rec) if delta is None else delta
    return GoldVerdict.HOLDS if delta == 0 else GoldVerdict.FAILS


def generated_by_prime(rec: PUnitRecord) -> bool:
    # v_p(h) = v_p(h_k) already forces the p-class group to be cyclic; the
    # structure, when known, is checked for consistency
    same = rec.vp_h == rec.vp_hk
    if same and rec.p_part is not None and len(rec.p_part) > 1:
        raise AssertionError("cyclic image of cl(p) fills a non-cyclic group")
    return same


def gold_plus(rec: PUnitRecord, delta: int | None = None) -> GoldVerdict:
    """When H_k is generated by cl(p): #H_{K_n} = p^(n+v_p(h)) for all n iff delta = 0."""
    if not generated_by_prime(rec):
        return GoldVerdict.NOT_APPLICABLE
    delta = delta_p(rec) if delta is None else delta
    return GoldVerdict.HOLDS if delta == 0 else GoldVerdict.FAILS


def gold_sands(rec: PUnitRecord, delta: int | None = None) -> GoldVerdict:
    """With p not dividing h: lambda >= 2 iff p | h_k or delta >= 1."""
    if rec.vp_h != 0:
        return GoldVerdict.NOT_APPLICABLE
    delta = delta_p(rec) if delta is None else delta
    return GoldVerdict.FAILS if (rec.vp_hk >= 1 or delta >= 1) else GoldVerdict.HOLDS


def symbol_order(n: int, layer_e: int, delta: int, p: int) -> int:
    """Order p^max(0, n - e - delta) of the norm residue symbol of xbar."""
    if min(n, layer_e, delta) < 0:
        raise ValueError("negative argument")
    return p ** max(0, n - layer_e - delta)


def chevalley_fixed_points(n: int, e: int, ebar: int, h_k_p: int, p: int | None = None) -> int:
    """#H^{G_n} = #H_k * p^(n-ebar) * p^(n-e) / p^n."""
    if p is None:
        p = _infer_p(h_k_p)
    if not (n >= e >= ebar >= 0):
        raise InvalidLayers(f"need n >= e >= ebar >= 0, got {n}, {e}, {ebar}")
    num = h_k_p * p ** (n - ebar) * p ** (n - e)
    q, r = divmod(num, p ** n)
    if r:
        raise InvalidLayers("fixed-point count is not an integer")
    return q


@dataclass(frozen=True)
class FiltrationPrediction:
    n: int
    e: int
    ebar: int
    order_H1: int
    ratio_H2_H1: int
    n0: int
    valid: bool
    total_order_if_trivial: int | None


def filtration_prediction(rec: PUnitRecord, n: int, e: int, ebar: int,
                          delta: int | None = None) -> FiltrationPrediction:
    p = rec.p
    if not (n >= e >= ebar >= 0):
        raise InvalidLayers(f"need n >= e >= ebar >= 0, got {n}, {e}, {ebar}")
    if ebar > rec.vp_hk:
        raise InvalidLayers("the unramified part cannot exceed the p-class group")
    if rec.p_part is None:
        raise ValueError("filtration prediction needs the p-class group structure")
    delta = delta_p(rec) if delta is None else delta
    dt = delta + rec.vp_hk - rec.vp_h
    expo = max((vp(c, p) for c in rec.p_part), default=0)
    n0 = expo + e + delta + max(0, ebar - rec.vp_h)
    order_h1 = p ** (rec.vp_hk - ebar + n - e)
    total = p ** (n + rec.vp_hk - e - ebar) if dt == 0 else None
    return FiltrationPrediction(n, e, ebar, order_h1, p ** dt, n0, n >= n0, total)


def lambda_stability(h_k_ord: int, h_K1_ord: int, lam: int, p: int | None = None) -> bool:
    """True iff #H_{K_1} = #H_k * p^lambda."""
    if p is None:
        p = _infer_p(h_K1_ord)
    return h_K1_ord == h_k_ord * p ** lam


def smooth_capitulation_check(e_L: int, b_L: int, N: int, p: int) -> bool:
    """Smooth-complexity test: with p^s <= b_L < p^(s+1), need 1 <= e_L <= N - s."""
    if b_L < 1 or N < 1:
        raise ValueError("b_L and N must be positive")
    if b_L >= p ** N:
        raise OutOfRange(f"b_L={b_L} >= p^N={p ** N}")
    s = 0
    while p ** (s + 1) <= b_L:
        s += 1
    return 1 <= e_L <= N - s


def noncyclic_prediction(h_k_cyclic: bool, n0: int, n: int) -> bool:
    """The p-class group of the n-th layer is predicted non-cyclic."""
    return bool(h_k_cyclic) and n >= n0 + 1


@dataclass(frozen=True)
class InvariantReport:
    m: int
    p: int
    h_k: int
    h: int
    delta: int
    delta_tilde: int
    log_class_order: int
    x: str
    p_part: tuple[int, ...] | None
    gold: GoldVerdict
    gold_plus: GoldVerdict
    gold_sands: GoldVerdict
    notes: tuple[str, ...] = field(default_factory=tuple)


def invariant_report(m: int, p: int, record: PUnitRecord | None = None) -> InvariantReport:
    rec = record or fundamental_p_unit(make_field(m), p)
    d = delta_p(rec)
    dt = delta_tilde(rec, d)
    notes = []
    if rec.vp_hk == 0:
        notes.append("trivial p-class group")
    if rec.vp_h != 0:
        notes.append(f"v_{p}(h) = {rec.vp_h} != 0")
    return InvariantReport(
        m=rec.m, p=p, h_k=rec.h_k, h=rec.h, delta=d, delta_tilde=dt,
        log_class_order=p ** dt, x=str(rec.x), p_part=rec.p_part,
        gold=gold_criterion(rec, d), gold_plus=gold_plus(rec, d),
        gold_sands=gold_sands(rec, d), notes=tuple(notes),
    )
