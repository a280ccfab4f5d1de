from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from iwaquad.anticyclotomic import has_root_mod
from iwaquad.invariants import delta_p, delta_p_via_log, delta_tilde, fundamental_p_unit
from iwaquad.padics import PAdicInt, embed_at_p, hensel_sqrt
from iwaquad.quad_arith import (
    QuadIdeal,
    class_group,
    fundamental_unit,
    is_squarefree,
    kronecker,
    make_field,
    reduced_forms,
    split_type,
)
from oracles import naive_delta, roots_mod

PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
SETTINGS = settings(max_examples=60, deadline=None,
                    suppress_health_check=[HealthCheck.filter_too_much])

squarefree = st.integers(1, 20000).filter(is_squarefree)


def split_pair(m, p):
    F = make_field(m)
    assume(kronecker(F.D, p) == 1)
    return F


@SETTINGS
@given(squarefree, st.sampled_from(PRIMES))
def test_generator_norm_is_prime_power(m, p):
    F = split_pair(m, p)
    rec = fundamental_p_unit(F, p)
    assert rec.x * rec.x.conj() == F(p ** rec.h)
    assert QuadIdeal.principal(rec.x) == rec.prime ** rec.h
    assert rec.h_k % rec.h == 0


@SETTINGS
@given(squarefree, st.sampled_from(PRIMES))
def test_conjugate_prime_invariance(m, p):
    F = split_pair(m, p)
    P, Pb = split_type(F, p).primes
    a = fundamental_p_unit(F, p, prime=P)
    b = fundamental_p_unit(F, p, prime=Pb)
    assert a.h == b.h
    assert delta_p(a) == delta_p(b)
    assert delta_tilde(a) == delta_tilde(b)


@SETTINGS
@given(squarefree, st.sampled_from(PRIMES))
def test_norm_and_log_routes_agree(m, p):
    F = split_pair(m, p)
    rec = fundamental_p_unit(F, p)
    d = delta_p(rec)
    assert d == delta_p_via_log(rec)
    if m < 3000:
        assert d == naive_delta(rec.x, p)
    assert delta_tilde(rec) >= 0


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 400000))
def test_class_number_equals_reduced_form_count(n):
    assume(n % 4 in (0, 3))
    D = -n
    # fundamental discriminants only
    if D % 4 == 0:
        m = n // 4
        assume(m % 4 in (1, 2) and is_squarefree(m))
    else:
        m = n
        assume(is_squarefree(m))
    assert class_group(make_field(m)).order == len(reduced_forms(D))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5000).filter(is_squarefree))
def test_unit_solves_pell(d):
    F = make_field(d, "real")
    eps = fundamental_unit(F).eps
    assert eps.norm() in (1, -1)
    assert eps.is_integral() and eps.sign() == 1 and (eps - 1).sign() == 1


@settings(max_examples=60, deadline=None)
@given(squarefree, st.sampled_from(PRIMES), st.integers(2, 9))
def test_ideal_power_matches_repeated_product(m, p, n):
    F = split_pair(m, p)
    P = split_type(F, p).primes[0]
    J = P
    for _ in range(n - 1):
        J = J * P
    assert P ** n == J


@settings(max_examples=60, deadline=None)
@given(squarefree, st.sampled_from(PRIMES))
def test_class_group_exponent_and_orders(m, p):
    F = split_pair(m, p)
    cg = class_group(F)
    P = split_type(F, p).primes[0]
    o = cg.class_order(P)
    assert cg.order % o == 0
    assert cg.elementary_divisors[-1] % o == 0 if cg.elementary_divisors else o == 1


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(PRIMES), st.integers(0, 10 ** 12), st.integers(0, 10 ** 12),
       st.integers(2, 20))
def test_padic_ring_homomorphism(p, a, b, N):
    mod = p ** N
    x, y = PAdicInt(p, N, a), PAdicInt(p, N, b)
    assert (x * y).residue == a * b % mod
    assert (x + y).residue == (a + b) % mod
    assert (x - y).residue == (a - b) % mod


@settings(max_examples=60, deadline=None)
@given(squarefree, st.sampled_from(PRIMES), st.integers(-50, 50), st.integers(-50, 50))
def test_embedding_is_multiplicative(m, p, a, b):
    F = split_pair(m, p)
    P = split_type(F, p).primes[0]
    z1, z2 = F(a, b), F(b + 1, a)
    N = 12
    e = embed_at_p(z1 * z2, P, N).residue
    assert e == embed_at_p(z1, P, N).residue * embed_at_p(z2, P, N).residue % p ** N
    s = hensel_sqrt(F.d % p ** N, p, N).residue
    assert (s * s - F.d) % p ** N == 0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=3, max_size=3),
       st.sampled_from([5, 7, 11, 13, 17, 19, 23, 101, 103]))
def test_root_test_matches_enumeration(coeffs, q):
    P = (1, *coeffs)
    assert has_root_mod(P, q) == bool(roots_mod(P, q))
