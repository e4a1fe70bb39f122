import random

import pytest

from drinfeldlab.carlitz import CarlitzCache
from drinfeldlab.exactalg import DoubleSeries, KRing, RatFunc, ThetaPoly, TPoly
from drinfeldlab.ffield import get_field

SEED = 20260825


def cache(q):
    if q == 4:
        return CarlitzCache(get_field(2, 2), 4)
    return CarlitzCache(get_field(q, 1), q)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_brackets_and_factorials(q):
    C = cache(q)
    F = C.F
    assert C.bracket(1) == ThetaPoly.theta(F, q) - ThetaPoly.theta(F)
    assert C.bracket(2) == ThetaPoly.theta(F, q * q) - ThetaPoly.theta(F)
    assert C.d(0).is_one()
    assert C.d(1) == C.bracket(1)
    assert C.d(2) == C.bracket(2) * C.d(1) ** q
    assert C.d(3) == C.bracket(3) * C.d(2) ** q
    assert C.d(2).degree() == 2 * q * q


@pytest.mark.parametrize("q", [2, 3])
def test_action_coeffs(q):
    C = cache(q)
    F = C.F
    th = ThetaPoly.theta(F)
    assert C.action_coeffs(th) == [th, ThetaPoly.one(F)]
    # theta^2 acts by theta^2 + (theta^q + theta) tau + tau^2
    got = C.action_coeffs(th * th)
    assert got == [th * th, ThetaPoly.theta(F, q) + th, ThetaPoly.one(F)]
    # additivity in a
    rng = random.Random(SEED)
    for _ in range(10):
        a = ThetaPoly(F, [rng.randrange(F.order) for _ in range(4)])
        b = ThetaPoly(F, [rng.randrange(F.order) for _ in range(4)])
        ca, cb, cab = C.action_coeffs(a), C.action_coeffs(b), C.action_coeffs(a + b)
        width = max(len(ca), len(cb), len(cab))
        pad = lambda v: v + [ThetaPoly.zero(F)] * (width - len(v))
        assert pad(cab) == [x + y for x, y in zip(pad(ca), pad(cb))]


def test_action_composition():
    """phi_{theta^2} = phi_theta o phi_theta as twisted polynomials."""
    C = cache(3)
    F = C.F
    th = ThetaPoly.theta(F)
    a = C.action_coeffs(th)
    # compose [c0, c1] with itself: sum_i c_i * (coeffs of phi_theta)^(q^i) tau^(i+j)
    comp = [ThetaPoly.zero(F)] * 3
    for i, ci in enumerate(a):
        for j, cj in enumerate(a):
            comp[i + j] = comp[i + j] + ci * cj.qspread(i, 3)
    assert comp == C.action_coeffs(th * th)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_u_theta_geometric_series(q):
    C = cache(q)
    F = C.F
    N = 3 * q + 5
    ua = C.u_a_series(ThetaPoly.theta(F), N)
    mth = -ThetaPoly.theta(F)
    k = 0
    while q + k * (q - 1) <= N:
        got = ua.coeff(q + k * (q - 1))
        assert got.degree() == 0 and got.c[0] == RatFunc(mth**k)
        k += 1
    for n in range(N + 1):
        if n < q or (n - q) % (q - 1):
            assert ua.coeff(n).is_zero()


@pytest.mark.parametrize("q", [2, 3])
def test_u_a_times_f_a(q):
    """u_a * f_a(u) = u^(q^d) back-checks the series inversion."""
    C = cache(q)
    F = C.F
    ring = C.ring
    a = ThetaPoly.theta(F) ** 2 + ThetaPoly.one(F)
    N = q * q + 8
    ua = C.u_a_series(a, N)
    coeffs = C.action_coeffs(a)
    f_a = DoubleSeries.zero(ring, N)
    for i, c in enumerate(coeffs):
        if not c.is_zero():
            f_a = f_a + DoubleSeries.u_pow(ring, q ** a.degree() - q**i, N).scale(
                TPoly.const(ring, RatFunc(c))
            )
    assert (ua * f_a).eq_prec(DoubleSeries.u_pow(ring, q ** a.degree(), N))


def test_u_a_caching():
    C = cache(2)
    a = ThetaPoly.theta(C.F)
    assert C.u_a_series(a, 9) is C.u_a_series(a, 9)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_goss_low_range(q):
    C = cache(q)
    for n in range(1, q + 1):
        g = C.goss_poly(n)
        assert len(g) == n + 1 and g[-1].is_one()
        assert all(c.is_zero() for c in g[:-1])


@pytest.mark.parametrize("q", [2, 3, 4])
def test_goss_q_plus_one(q):
    C = cache(q)
    F = C.F
    g = C.goss_poly(q + 1)
    assert g[q + 1].is_one()
    assert g[2] == RatFunc(ThetaPoly.one(F), C.bracket(1))
    assert all(c.is_zero() for i, c in enumerate(g) if i not in (2, q + 1))


@pytest.mark.parametrize("q", [2, 3, 4])
def test_goss_q_squared_collapses(q):
    # the multinomial coefficients of the intermediate terms all vanish mod p
    g = C = cache(q).goss_poly(q * q)
    assert g[q * q].is_one()
    assert all(c.is_zero() for c in g[: q * q])


def test_goss_frozen_q2_n5():
    """G_5 at q = 2: X^5 + X^4/[1] + X^3/[1]^2 + X^2/d_2."""
    C = cache(2)
    F = C.F
    g = C.goss_poly(5)
    b1 = C.bracket(1)
    assert g[5].is_one()
    assert g[4] == RatFunc(ThetaPoly.one(F), b1)
    assert g[3] == RatFunc(ThetaPoly.one(F), b1 * b1)
    assert g[2] == RatFunc(ThetaPoly.one(F), C.d(2))
    assert g[0].is_zero() and g[1].is_zero()


def test_goss_eval_matches_horner():
    C = cache(3)
    ring = C.ring
    u = DoubleSeries.u_pow(ring, 1, 8)
    f = u + DoubleSeries.u_pow(ring, 2, 8).scale(TPoly.const(ring, ThetaPoly.theta(C.F)))
    n = 5
    direct = DoubleSeries.zero(ring, 8)
    for j, c in enumerate(C.goss_poly(n)):
        if not c.is_zero():
            direct = direct + (f**j).scale(TPoly.const(ring, c))
    assert C.goss_eval(n, f).eq_prec(direct)


@pytest.mark.parametrize("q", [2, 3])
def test_monics(q):
    C = cache(q)
    for d in range(4):
        ms = C.monics(d)
        assert len(ms) == q**d
        assert all(m.degree() == d and m.lead() == 1 for m in ms)
        assert len({m.c for m in ms}) == len(ms)
    assert len(C.monics_up_to(3)) == sum(q**d for d in range(4))
