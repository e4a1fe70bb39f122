import pytest

from drinfeldlab import deformations, generators, multiplicity, spaces
from drinfeldlab.exactalg import RatFunc, ThetaPoly, TPoly
from drinfeldlab.multiplicity import DagPoly
from drinfeldlab.spaces import QmPoly

_SETS = {}


def dset(q, N=36):
    key = (q, N)
    if key not in _SETS:
        C = generators.carlitz_context(q)
        _SETS[key] = deformations.deformed_set(C, N)
    return _SETS[key]


def C_(q):
    return dset(q).C


def rf_one(q):
    return RatFunc(ThetaPoly.one(C_(q).F))


def mono(q, a, b, c):
    return QmPoly.monomial(C_(q), a, b, c, rf_one(q))


# bounds


def test_theorem_constant():
    assert multiplicity.theorem_constant(2) == 1512
    assert multiplicity.theorem_constant(3) == 6048


def test_bound_eval_frozen():
    b = multiplicity.bound_eval(2, 2, 1)
    assert (b.conjecture, b.theorem) == (1, 1512)
    b = multiplicity.bound_eval(2, 3, 1)
    assert (b.conjecture, b.theorem) == (2, 3024)
    # d = 3 > q crosses into the log regime: floor(1512 * 3 * log_2 3)
    b = multiplicity.bound_eval(2, 4, 1)
    assert (b.conjecture, b.theorem) == (3, 7189)
    assert b.earlier_shape == 12096
    # log_2 4 = 2 exactly, so the floor is attained
    b = multiplicity.bound_eval(2, 5, 1)
    assert (b.conjecture, b.theorem) == (4, 12096)
    b = multiplicity.bound_eval(3, 3, 1)
    assert (b.conjecture, b.theorem) == (2, 12096)


def test_bound_eval_rejects_violation():
    with pytest.raises(AssertionError):
        multiplicity.bound_eval(2, 2, 1, measured=2000)


def test_floor_log_scaled_matches_small_cases():
    # floor(s * log_q d) against direct enumeration
    for q in (2, 3):
        for d in range(2, 30):
            for s in range(1, 5):
                got = multiplicity.floor_log_scaled(q, d, s)
                assert q**got <= d**s < q ** (got + 1)


def test_smallest_twist_count():
    assert multiplicity.smallest_twist_count(2, 12) == 4
    assert multiplicity.smallest_twist_count(2, 36) == 4
    assert multiplicity.smallest_twist_count(2, 72) == 5


# resultants


def test_resultant_linear_pair():
    # res(aE + b, cE + d) = ad - bc
    f1 = mono(2, 1, 1, 0) + mono(2, 0, 0, 1)          # gE + h
    f2 = mono(2, 1, 0, 1) + mono(2, 0, 2, 1)          # hE + g^2 h
    r = multiplicity.resultant_E(f1, f2)
    expect = mono(2, 0, 3, 1) - mono(2, 0, 0, 2)      # g^3 h - h^2
    assert (r - expect).is_zero()
    assert r.weight == multiplicity.resultant_weight(f1, f2) == 6
    assert r.depth == 0


def test_resultant_of_equal_arguments_vanishes():
    f = mono(2, 1, 1, 0) + mono(2, 0, 0, 1)
    assert multiplicity.resultant_E(f, f).is_zero()


def test_resultant_degree_zero_convention():
    E = mono(2, 1, 0, 0)
    h = mono(2, 0, 0, 1)
    assert (multiplicity.resultant_E(E, h) - h).is_zero()
    assert (multiplicity.resultant_E(h, E) - h).is_zero()


def test_pseudo_remainder():
    E = mono(2, 1, 0, 0)
    f = mono(2, 2, 0, 0) + mono(2, 0, 1, 1)           # E^2 + gh
    rem, power = multiplicity.pseudo_remainder_E(f, E)
    assert power == 1
    assert len(rem) == 1 and (rem[0] - mono(2, 0, 1, 1)).is_zero()
    # g^2 E^2 = (gE + h)(gE - h) + h^2
    gE_h = mono(2, 1, 1, 0) + mono(2, 0, 0, 1)
    rem, power = multiplicity.pseudo_remainder_E(mono(2, 2, 0, 0), gE_h)
    assert power == 2
    assert len(rem) == 1 and (rem[0] - mono(2, 0, 0, 2)).is_zero()
    rem, power = multiplicity.pseudo_remainder_E(gE_h * gE_h, gE_h)
    assert all(x.is_zero() for x in rem)


# symbolic twisting


def _dag_series(ds, dag):
    terms = [((i, b, c, j), tp) for (b, c, i, j), tp in dag.terms.items()]
    return spaces.expand_exact_dag(ds, terms)


def _den_poly(C, den):
    out = TPoly.const(C.ring, RatFunc(ThetaPoly.one(C.F)))
    for r, e in den.items():
        lin = deformations.t_minus_theta(C, C.q**r)
        for _ in range(e):
            out = out * lin
    return out


def _check_twist_against_series(q, nu, terms, k):
    """k symbolic twists must match the series twist once the tracked
    denominator is multiplied back in."""
    ds = dset(q)
    C = ds.C
    dag = DagPoly(C, nu, terms)
    f0 = _dag_series(ds, dag)
    for _ in range(k):
        dag = dag.twist()
    lhs = _dag_series(ds, dag)
    rhs = f0.twist(k).scale(_den_poly(C, dag.den))
    n = min(lhs.trunc, rhs.trunc)
    assert (lhs - rhs).truncate(n).is_zero()


def test_dag_twist_matches_series_q2():
    C = C_(2)
    ring = C.ring
    t = TPoly.t(ring)
    th = TPoly.const(ring, deformations.theta_rf(C))
    terms = {
        (3, 0, 0, 1): t + th,
        (2, 0, 1, 0): TPoly.const(ring, rf_one(2)),
        (0, 1, 0, 1): t * t,
    }
    _check_twist_against_series(2, 1, terms, 1)
    _check_twist_against_series(2, 1, terms, 2)


def test_dag_twist_matches_series_q3():
    C = C_(3)
    ring = C.ring
    t = TPoly.t(ring)
    terms = {
        (1, 0, 1, 0): t,
        (0, 0, 0, 1): TPoly.const(ring, rf_one(3)),
    }
    _check_twist_against_series(3, 1, terms, 1)
    _check_twist_against_series(3, 1, terms, 2)


def test_dag_twist_matches_series_q3_nu2():
    # j = 2 exercises the binomial split of ebold^2 and i = 1 the sign flip
    C = C_(3)
    ring = C.ring
    t = TPoly.t(ring)
    th = TPoly.const(ring, deformations.theta_rf(C))
    terms = {
        (1, 0, 0, 2): t + th,
        (0, 0, 1, 1): t,
    }
    _check_twist_against_series(3, 2, terms, 1)
    _check_twist_against_series(3, 2, terms, 2)


def test_dag_from_witness_and_guards():
    C = C_(2)
    one = TPoly.const(C.ring, rf_one(2))
    dag = DagPoly.from_witness(C, 1, [((0, 2, 0), one), ((1, 1, 0), one)])
    assert set(dag.terms) == {(2, 0, 0, 1), (1, 0, 1, 0)}
    with pytest.raises(ValueError):
        DagPoly(C, 2, {(0, 0, 1, 0): one})


def test_dag_subs_theta_specializes_bolds():
    # hbold -> h and ebold -> E at t = theta
    C = C_(2)
    one = TPoly.const(C.ring, rf_one(2))
    dag = DagPoly(C, 1, {(1, 1, 1, 0): one, (2, 1, 0, 1): one})
    f = dag.subs_theta()
    assert (f - (mono(2, 0, 1, 2) + mono(2, 1, 2, 1))).is_zero()


# certificates


def test_certify_E_small_mu_chain():
    rep = multiplicity.certify(
        mono(2, 1, 0, 0), mu=6, unsafe_small_mu=True)
    assert rep.k == 3
    assert rep.n_aux == 4
    assert rep.v_fk == 32 and rep.w_fk == 49
    assert rep.branch == "resultant"
    assert rep.w_rho == 49 and rep.v_rho == 1
    assert rep.rho_ceiling == 16
    assert rep.bound == 1 and rep.measured == 1
    assert rep.conclusive and not rep.hypotheses_met
    assert all(r.status == "ok" for r in rep.rows)


def test_certify_rejects_depth_zero():
    with pytest.raises(ValueError):
        multiplicity.certify(mono(2, 0, 1, 1), mu=6, unsafe_small_mu=True)


def test_certify_hypothesis_gate():
    with pytest.raises(ValueError):
        multiplicity.certify(mono(2, 1, 0, 0), mu=6)


# conjecture scan


def test_scan_q2_small():
    table, checks = multiplicity.conjecture_scan(2, 8, 2)
    assert table and checks[-1].status == "ok"
    assert not any(r["flag"] for r in table)
    row = next(r for r in table if r["w"] == 2 and r["l"] == 1)
    assert row["max_nu"] == 1 and row["conj_bound"] == 1
    # depth-1 extremal orders are sharp at w = 3 and w = 5
    assert next(r for r in table if r["w"] == 3 and r["l"] == 1)["max_nu"] == 2
    assert next(r for r in table if r["w"] == 5 and r["l"] == 1)["max_nu"] == 4


def test_scan_q3_small():
    table, checks = multiplicity.conjecture_scan(3, 4, 1)
    assert checks[-1].status == "ok"
    by = {(r["w"], r["m"]): r["max_nu"] for r in table if r["l"] == 1}
    assert by[(2, 0)] == 0
    assert by[(2, 1)] == 1


def test_scan_deterministic():
    t1, _ = multiplicity.conjecture_scan(2, 6, 1)
    t2, _ = multiplicity.conjecture_scan(2, 6, 1)
    assert t1 == t2
