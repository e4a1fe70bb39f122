import time

import pytest

from drinfeldlab import generators
from drinfeldlab.exactalg import DoubleSeries, RatFunc, ThetaPoly, TPoly
from drinfeldlab.infnum import NumField, lattice_double_sum, series_eval, u_of

_SETS = {}


def gset(q, N=30):
    key = (q, N)
    if key not in _SETS:
        _SETS[key] = generators.generator_set(q, N)
    return _SETS[key]


def coeff_strs(f, upto):
    return {n: str(c) for n, c in sorted(f.items()) if n <= upto}


@pytest.mark.parametrize("q", [2, 3, 4])
def test_g_shape(q):
    s = gset(q)
    g = s.g
    assert str(g.coeff(0)) == "1"
    # next term is -[1] u^(q-1)
    m1 = TPoly.const(s.C.ring, RatFunc(-s.C.bracket(1)))
    assert str(g.coeff(q - 1)) == str(m1)
    assert all(n % (q - 1) == 0 for n in g.support())


@pytest.mark.parametrize("q", [2, 3, 4])
def test_delta_h_relation(q):
    s = gset(q)
    lhs = s.delta + s.h ** (q - 1)
    assert lhs.is_zero()


@pytest.mark.parametrize("q", [2, 3, 4])
def test_h_and_E_leading_terms(q):
    s = gset(q)
    neg1 = TPoly.const(s.C.ring, RatFunc(-ThetaPoly.one(s.C.F)))
    assert str(s.h.coeff(1)) == str(neg1)
    assert str(s.E.coeff(1)) == "1"
    for n in range(2, q):
        assert s.h.coeff(n).is_zero()
        assert s.E.coeff(n).is_zero()


def test_g_frozen_q2():
    got = coeff_strs(gset(2).g, 6)
    assert got == {
        0: "1",
        1: "(theta^2 + theta)",
        3: "(theta^2 + theta)",
        4: "(theta^2 + theta)",
        5: "(theta^4 + theta)",
        6: "(theta^2 + theta)",
    }


def test_delta_frozen_q2():
    got = coeff_strs(gset(2).delta, 6)
    assert got == {
        1: "1",
        2: "1",
        3: "(theta^2 + theta + 1)",
        4: "1",
        5: "(theta^4 + theta + 1)",
        6: "(theta^4 + theta^2)",
    }


def test_E_frozen_q2():
    got = coeff_strs(gset(2).E, 6)
    assert got == {
        1: "1",
        2: "1",
        3: "1",
        4: "(theta^2 + theta + 1)",
        5: "1",
        6: "(theta^4 + theta)",
    }


def test_g_delta_h_frozen_q3():
    s = gset(3)
    assert coeff_strs(s.g, 18) == {
        0: "1",
        2: "(2*theta^3 + theta)",
        14: "(2*theta^3 + theta)",
        18: "(theta^3 + 2*theta)",
    }
    assert coeff_strs(s.delta, 8) == {2: "2", 6: "1", 8: "(2*theta^3 + theta)"}
    assert coeff_strs(s.h, 7) == {1: "2", 5: "2", 7: "(theta^3 + 2*theta)"}


@pytest.mark.parametrize("q", [2, 3])
def test_g_star_family(q):
    s = gset(q)
    C, N = s.C, s.N
    ring = C.ring
    assert generators.g_star(C, 0, N, g=s.g, delta=s.delta).eq_prec(
        DoubleSeries.u_pow(ring, 0, N)
    )
    assert generators.g_star(C, 1, N, g=s.g, delta=s.delta).eq_prec(s.g)
    # g*_2 specializes at t = theta to g^(q+1) - [1] Delta
    gs2 = generators.g_star(C, 2, N, g=s.g, delta=s.delta)
    th = RatFunc(ThetaPoly.theta(C.F))
    b1 = TPoly.const(ring, RatFunc(C.bracket(1)))
    want = s.g ** (q + 1) - s.delta.scale(b1)
    assert gs2.subs_t(th).eq_prec(want)


def test_g_star_frozen():
    s = gset(2)
    gs2 = generators.g_star(s.C, 2, s.N, g=s.g, delta=s.delta)
    assert coeff_strs(gs2, 3) == {
        0: "1",
        1: "t + theta",
        2: "t + theta^4",
        3: "(theta^2 + theta + 1)*t + (theta^6 + theta^5 + theta)",
    }
    s3 = gset(3)
    gs2 = generators.g_star(s3.C, 2, s3.N, g=s3.g, delta=s3.delta)
    assert coeff_strs(gs2, 6) == {0: "1", 2: "2*t + theta", 6: "t + 2*theta^9"}


@pytest.mark.parametrize("q", [2, 3])
def test_E_against_monic_average(q):
    """E agrees with the weighted sum of u_a over monic a.

    This route never touches the deformation bootstrap, so it pins the
    normalization of E (hence of bold e) independently.
    """
    s = gset(q)
    C, N = s.C, s.N
    ring = C.ring
    total = DoubleSeries.zero(ring, N)
    d = 0
    while q**d <= N:
        for a in C.monics(d):
            total = total + C.u_a_series(a, N).scale(TPoly.const(ring, RatFunc(a)))
        d += 1
    assert s.E.eq_prec(total)


@pytest.mark.parametrize("q,prec", [(2, 40), (3, 24)])
def test_g_delta_against_lattice_sums(q, prec):
    """Numeric cross-check of the u-expansions of g and Delta.

    The lattice route only uses Eisenstein sums over a z A + A and the
    rank-2 coefficient dictionary, nothing from the u-expansion builders:
        alpha_1 = E_(q-1),  alpha_2 = E_(q^2-1) + alpha_1^(q+1),
        g = pibar^(1-q) [1] alpha_1,
        Delta = pibar^(1-q^2) ([2] alpha_2 - [1] alpha_1^(q+1)).
    """
    s = gset(q)
    C = s.C
    R = NumField(q, 1, 2, prec)
    z = R.const(R.nonreal_unit()) * R.theta_pow(1)
    u0 = u_of(R, C, z)
    pi = R.pi_tilde()
    a1 = lattice_double_sum(R, C, z, q - 1, R.prec)
    a2 = lattice_double_sum(R, C, z, q * q - 1, R.prec) + a1 ** (q + 1)
    b1 = R.from_theta_poly(C.bracket(1))
    b2 = R.from_theta_poly(C.bracket(2))
    g_num = pi ** (1 - q) * (b1 * a1)
    d_num = pi ** (1 - q * q) * (b2 * a2 - b1 * a1 ** (q + 1))
    g_ser = series_eval(R, s.g, u0, needed=R.prec)
    d_ser = series_eval(R, s.delta, u0, needed=R.prec)
    assert (g_num - g_ser).val_lower() >= R.prec
    assert (d_num - d_ser).val_lower() >= R.prec


@pytest.mark.parametrize("q", [2, 3, 4])
def test_battery_all_ok(q):
    t0 = time.monotonic()
    rows = generators.battery(q, N=36)
    assert rows, "battery produced no rows"
    bad = [r for r in rows if not r.ok]
    assert not bad, [f"{r.name}: {r.detail}" for r in bad]
    assert time.monotonic() - t0 < 60
