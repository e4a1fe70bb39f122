import pytest

from drinfeldlab.carlitz import CarlitzCache
from drinfeldlab.exactalg import RatFunc, SeriesPrecisionError, ThetaPoly
from drinfeldlab.ffield import get_field
from drinfeldlab.infnum import (
    NumField,
    carlitz_exp,
    lattice_double_sum,
    lattice_inner_sum,
    omega_pf,
    omega_product,
    series_eval,
    u_of,
    zeta_num,
)


def setup_ctx(q, prec=40):
    p, e = {2: (2, 1), 3: (3, 1), 4: (2, 2)}[q]
    R = NumField(p, e, 2, prec)
    C = CarlitzCache(get_field(p, e), q)
    return R, C


def goss_value(R, C, n, u0):
    acc = R.zero(R.cap)
    upow = R.one()
    for j, cf in enumerate(C.goss_poly(n)):
        if j > 0:
            upow = upow * u0
        if not cf.is_zero():
            acc = acc + R.from_ratfunc(cf) * upow
    return acc


def agree(a, b):
    """Relative agreement in y-digits between two numeric values."""
    return (a - b).val_lower() - min(a.val_lower(), b.val_lower())


@pytest.mark.parametrize("q", [2, 3, 4])
def test_uniformizer_relation(q):
    R, _ = setup_ctx(q)
    assert (R.theta_pow(1) * R.y_pow(q - 1) + R.one()).is_zero()
    assert (R.theta_pow(3) * R.theta_pow(-3) - R.one()).is_zero()
    # the chosen (q-1)-th root of -theta
    root = R.y_pow(-1)
    assert (root ** (q - 1) + R.theta_pow(1)).is_zero()


@pytest.mark.parametrize("q", [2, 3, 4])
def test_pi_valuation_and_shape(q):
    R, _ = setup_ctx(q)
    pi = R.pi_tilde()
    assert pi.valuation() == -q
    assert pi.lead_code() == R.F.neg_table[1]  # pi = -y^-q + higher order


@pytest.mark.parametrize("q", [2, 3, 4])
def test_periods_vanish(q):
    R, C = setup_ctx(q)
    pi = R.pi_tilde()
    one = ThetaPoly.one(C.F)
    th = ThetaPoly.theta(C.F)
    for a in (one, th, th + one):
        v = carlitz_exp(R, C, pi * R.from_theta_poly(a)).val_lower()
        assert v >= R.prec, f"e_C(pi * {a}) only vanishes to y^{v}"


@pytest.mark.parametrize("q", [2, 3])
def test_omega_two_formulas_agree(q):
    R, C = setup_ctx(q)
    samples = [R.zero(), R.theta_pow(-1), R.one() + R.theta_pow(-1)]
    for t0 in samples:
        a = omega_pf(R, C, t0)
        b = omega_product(R, t0)
        assert (a - b).val_lower() >= R.prec
        assert a.valuation() == -1


def test_omega_q4_spot():
    R, C = setup_ctx(4)
    a = omega_pf(R, C, R.theta_pow(-1))
    b = omega_product(R, R.theta_pow(-1))
    assert (a - b).val_lower() >= R.prec


@pytest.mark.parametrize("q", [2, 3])
def test_omega_twist_equation(q):
    """omega^(1)(t0) = (t0 - theta) omega(t0), both sides summed separately."""
    R, C = setup_ctx(q)
    t0 = R.one() + R.theta_pow(-1)
    lhs = omega_pf(R, C, t0, twist=1)
    rhs = (t0 - R.theta_pow(1)) * omega_pf(R, C, t0)
    assert agree(lhs, rhs) >= R.prec


@pytest.mark.parametrize("q", [2, 3, 4])
def test_zeta_q_minus_one_closed_form(q):
    R, C = setup_ctx(q)
    pi = R.pi_tilde()
    zn = zeta_num(R, C, q - 1, R.prec)
    closed = -(pi ** (q - 1)) * R.from_theta_poly(C.bracket(1)).inverse()
    assert (zn - closed).val_lower() >= R.prec


def test_zeta_q2_minus_one_closed_form():
    q = 2
    R, C = setup_ctx(q)
    pi = R.pi_tilde()
    zn = zeta_num(R, C, q * q - 1, R.prec)
    den = R.from_theta_poly(C.bracket(1) * C.bracket(2)).inverse()
    closed = pi ** (q * q - 1) * den
    assert (zn - closed).val_lower() >= R.prec


def sample_z(R):
    return R.const(R.nonreal_unit()) * R.theta_pow(1)


@pytest.mark.parametrize("q", [2, 3])
def test_goss_identity_inner_sums(q):
    R, C = setup_ctx(q)
    pi = R.pi_tilde()
    z = sample_z(R)
    u0 = u_of(R, C, z)
    assert u0.valuation() >= 2
    for n in (q, q + 1, q * q):
        lhs = lattice_inner_sum(R, C, z, n, 12)
        rhs = pi**n * goss_value(R, C, n, u0)
        assert agree(lhs, rhs) >= 12, f"n={n}"


def test_eisenstein_double_sum_q2():
    q = 2
    R, C = setup_ctx(q)
    pi = R.pi_tilde()
    z = sample_z(R)
    n = 3
    D = lattice_double_sum(R, C, z, n, 10)
    zn = zeta_num(R, C, n, R.prec)
    tail = R.zero(R.cap)
    for d in range(4):
        for a in C.monics(d):
            ua = u_of(R, C, R.from_theta_poly(a) * z)
            tail = tail + goss_value(R, C, n, ua)
    rhs = -zn - pi**n * tail
    assert agree(D, rhs) >= 10


@pytest.mark.parametrize("q", [2, 3])
def test_u_a_series_evaluates_to_u_of_az(q):
    """u_a(u(z)) = u(az) ties the exact u_a expansion to the numeric layer."""
    R, C = setup_ctx(q)
    z = sample_z(R)
    u0 = u_of(R, C, z)
    th = ThetaPoly.theta(C.F)
    for a in (th, th * th):
        ua = C.u_a_series(a, 40)
        got = series_eval(R, ua, u0, needed=R.prec // 2)
        want = u_of(R, C, R.from_theta_poly(a) * z)
        assert agree(got, want) >= R.prec // 2, f"a = {a}"


def test_series_eval_tail_certificate_raises():
    q = 2
    R, C = setup_ctx(q)
    z = sample_z(R)
    u0 = u_of(R, C, z)
    assert u0.valuation() == 4
    # truncation 5 certifies only (5+1)(4-1) = 18 digits, short of 40
    ua = C.u_a_series(ThetaPoly.theta(C.F), 5)
    with pytest.raises(SeriesPrecisionError):
        series_eval(R, ua, u0, needed=R.prec)


def test_agf_guard_rejects_large_t0():
    R, C = setup_ctx(3)
    with pytest.raises(ValueError):
        omega_pf(R, C, R.theta_pow(1))


@pytest.mark.parametrize("q", [2, 3, 4])
def test_imag_split(q):
    R, _ = setup_ctx(q)
    zt = R.const(R.nonreal_unit())
    z = zt * R.theta_pow(1) + R.theta_pow(-2)
    assert z.imag_valuation() == -(q - 1)
    re = z.real_part()
    assert (re - R.theta_pow(-2)).is_zero()
    # real elements have no visible imaginary part
    assert R.theta_pow(5).imag_valuation() == R.theta_pow(5).prec


@pytest.mark.parametrize("q", [2, 3])
def test_coords_over_base_round_trip(q):
    R, _ = setup_ctx(q)
    zc = R.nonreal_unit()
    for c in R.F.elements():
        a, b = R.coords_over_base(c)
        assert R.F.add(R.embed_table[a], R.F.mul(R.embed_table[b], zc)) == c


def test_precision_boxes():
    R, _ = setup_ctx(2)
    x = R.el(0, [1], prec=10)
    y = R.el(0, [1], prec=20)
    assert (x + y).prec == 10
    assert (x * y).prec == 10
    inv = R.el(-3, [1], prec=12).inverse()
    assert inv.prec == 12 + 6 and inv.valuation() == 3
    big = R.el(2, [1], prec=9)
    assert big.qpow(2).prec == 36 and big.qpow(2).valuation() == 8
    with pytest.raises(SeriesPrecisionError):
        R.zero(8).valuation()
