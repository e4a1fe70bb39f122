"""t-deformed series: bold h, bold e, the h_i family, sigma and s_2.

bold h is pinned down by its tau-difference equation.  Writing
Y = bold h and Y^(k) for the k-fold Anderson twist, the equation

    (t - theta^q) Y^(2) = Delta^(q-1) (g Y^(1) + Delta Y)

can be rewritten as Y = -(g/Delta) Y^(1) + ((t - theta^q)/Delta^q) Y^(2).
Since twisting multiplies u-orders by q and q^2 while the two Laurent
prefactors only shift by -(q-1) and -q(q-1), the u^n coefficient of the
right side only involves coefficients b_m with m <= (n+q-1)/q < n once
n > 1, so everything unwinds from the boundary value b_1 = -1 (at n = 1
the equation degenerates to b_1 = b_1^q, which is checked, not solved).

From bold h everything else is one division away:

    bold e = bold h^(1) / Delta        (= u + ..., specializes to E)
    h_i    = bold h^i h^(1-i)          (0 <= i <= q, h_0 = h, h_1 = bold h)

The normalized Carlitz generating series splits as y^(-1) sigma(t) with
sigma(t) = prod_i (1 - t/theta^(q^i))^(-1); sigma's t-coefficients live
in F_q((1/theta)) and are carried numerically.  s_2 = bold h sigma
/ (y pi h) then has the shape s_C/pi + sum kappa_i u^i, which the
cross-oracle tests compare against the Anderson-sum construction.
"""

from __future__ import annotations

import random
import time

from .carlitz import CarlitzCache
from .config import CheckRow, config_for_q
from .exactalg import DoubleSeries, GradTag, RatFunc, SeriesPrecisionError, ThetaPoly, TPoly
from . import generators
from .infnum import InfLaurent, NumField


def theta_rf(C: CarlitzCache, k: int = 1) -> RatFunc:
    return RatFunc(ThetaPoly.theta(C.F, k))


def t_minus_theta(C: CarlitzCache, k: int) -> TPoly:
    """The linear polynomial t - theta^k over K."""
    ring = C.ring
    return TPoly.t(ring) - TPoly.const(ring, theta_rf(C, k))


def _assert_integral(f: DoubleSeries, what: str):
    for n, c in f.items():
        for rf in c.c:
            if not rf.is_poly():
                raise ValueError(f"bootstrap integrality violated: {what} at u^{n}")


def bootstrap_h(C: CarlitzCache, g: DoubleSeries, delta: DoubleSeries, N: int) -> DoubleSeries:
    """Solve the bold-h equation coefficientwise up to u^N.

    g and delta must be boxed a little beyond N (order N + q - 2 suffices)
    because the Laurent prefactor -g/Delta loses 2(q-1) orders to the
    inversion; the builder raises if the boxes cannot certify order N.
    """
    q = C.q
    qm1 = q - 1
    ring = C.ring
    dinv = delta.inverse()
    A = -(g * dinv)
    B = dinv.twist(1).scale(t_minus_theta(C, q))
    nmax = min(N, A.trunc + q, B.trunc + q * q)
    if nmax < N:
        raise SeriesPrecisionError(
            f"bootstrap can only certify order {nmax}; rebuild g, Delta past {N + q - 2}"
        )
    acoef = dict(A.items())
    bcoef = dict(B.items())

    neg_one = TPoly.const(ring, C.F.neg(1))
    b: dict[int, TPoly] = {1: neg_one}
    # boundary consistency: the u^1 coefficient reads b_1 = A_{1-q} b_1^(1)
    lead = acoef.get(1 - q, TPoly.zero(ring))
    if lead * neg_one.twist(1, q) != neg_one:
        raise AssertionError("bootstrap boundary is inconsistent at u^1")

    for n in range(2, N + 1):
        acc = None
        m = 1
        while q * m <= n + qm1:
            bm = b.get(m)
            if bm is not None:
                aj = acoef.get(n - q * m)
                if aj is not None:
                    term = aj * bm.twist(1, q)
                    acc = term if acc is None else acc + term
            m += 1
        m = 1
        while q * q * m <= n + q * qm1:
            bm = b.get(m)
            if bm is not None:
                bj = bcoef.get(n - q * q * m)
                if bj is not None:
                    term = bj * bm.twist(2, q)
                    acc = term if acc is None else acc + term
            m += 1
        if acc is not None and not acc.is_zero():
            if n % qm1 != 1 % qm1:
                raise AssertionError(f"bold h has a coefficient at u^{n}, outside 1 + (q-1)Z")
            b[n] = acc

    coeffs = [b.get(n) for n in range(1, N + 1)]
    out = DoubleSeries(ring, 1, coeffs, N, GradTag(q, 1, 1, 0, qm1))
    _assert_integral(out, "bold h")

    # post-check the equation in its original multiplied form
    lhs = out.twist(2).scale(t_minus_theta(C, q))
    rhs = delta ** qm1 * (g * out.twist(1) + delta * out)
    resid = (lhs - rhs).truncate(min(lhs.trunc, rhs.trunc))
    if not resid.is_zero():
        raise AssertionError("bold h fails its tau-difference equation")
    return out


def build_e(C: CarlitzCache, g: DoubleSeries, delta: DoubleSeries,
            h_bold: DoubleSeries) -> DoubleSeries:
    """bold e = bold h^(1) / Delta, with its tau-equation checked."""
    q = C.q
    e = h_bold.twist(1) * delta.inverse()
    if e.valuation() != 1 or e.coeff(1) != TPoly.const(C.ring, 1):
        raise AssertionError("bold e does not start with +u")
    _assert_integral(e, "bold e")
    lhs = e.twist(2).scale(t_minus_theta(C, q * q))
    rhs = g.twist(1) * e.twist(1) + delta * e
    resid = (lhs - rhs).truncate(min(lhs.trunc, rhs.trunc))
    if not resid.is_zero():
        raise AssertionError("bold e fails its tau-difference equation")
    return DoubleSeries(e.ring, e.n0, list(e.coeffs), e.trunc, GradTag(1, 1, 1, 0, q - 1))


def build_h_i(C: CarlitzCache, i: int, h_bold: DoubleSeries, h: DoubleSeries) -> DoubleSeries:
    """h_i = bold h^i * h^(1-i); h_0 = h, h_1 = bold h, u-order exactly 1."""
    q = C.q
    if not 0 <= i <= q:
        raise ValueError(f"h_i needs 0 <= i <= q, got {i}")
    if i == 0:
        out = h
    elif i == 1:
        out = h_bold
    else:
        out = (h_bold**i) * (h ** (i - 1)).inverse()
    if out.valuation() != 1:
        raise AssertionError(f"h_{i} does not have u-order 1")
    return DoubleSeries(out.ring, out.n0, list(out.coeffs), out.trunc,
                        GradTag(q + 1 - i, i, 1, 0, q - 1))


class DeformedSet:
    """g, Delta, h plus the deformed members, all truncated to one order N.

    t_profile maps u-exponent blocks to the largest t-degree seen among
    the bold-h coefficients there (the observed input to degree bounds).
    """

    def __init__(self, C, N, g, delta, h, h_bold, e_bold, h_i, E, verified, t_profile):
        self.C = C
        self.q = C.q
        self.N = N
        self.g = g
        self.delta = delta
        self.h = h
        self.h_bold = h_bold
        self.e_bold = e_bold
        self.h_i = h_i
        self.E = E
        self.verified = list(verified)
        self.t_profile = dict(t_profile)

    def generator(self, name: str) -> DoubleSeries:
        table = {"g": self.g, "h": self.h, "delta": self.delta, "E": self.E,
                 "hbold": self.h_bold, "ebold": self.e_bold}
        return table[name]


def deformed_set(C: CarlitzCache, N: int, g=None, delta=None, h=None) -> DeformedSet:
    """Build the full deformed family to order N.

    Inputs may be passed in when already available; anything missing or
    boxed short of the internal working order is rebuilt.  The working
    order carries a 4q buffer so that every division and root below still
    certifies order N.
    """
    q = C.q
    qm1 = q - 1
    M = N + 4 * q
    if g is None or g.trunc < M:
        g = generators.build_g(C, M)
    if delta is None or delta.trunc < M:
        delta = generators.build_delta(C, M, g)
    if h is None or h.trunc < M:
        h = generators.build_h(C, delta)

    h_bold = bootstrap_h(C, g, delta, M - q)
    e_bold = build_e(C, g, delta, h_bold)
    verified = ["bold h tau-equation", "bold e tau-equation"]

    theta = theta_rf(C)
    if not h_bold.subs_t(theta).truncate(min(h_bold.trunc, h.trunc)).eq_prec(
        h.truncate(min(h_bold.trunc, h.trunc))
    ):
        raise AssertionError("bold h does not specialize to h at t = theta")
    verified.append("bold h at t=theta equals h")

    E = e_bold.subs_t(theta).truncate(N)
    E = DoubleSeries(E.ring, E.n0, list(E.coeffs), N, GradTag(2, 0, 1, 1, qm1))

    his = [build_h_i(C, i, h_bold, h).truncate(N) for i in range(q + 1)]
    his = [DoubleSeries(f.ring, f.n0, list(f.coeffs), N, f.tag) for f in his]

    profile = {}
    for n, c in h_bold.items():
        if n > N:
            break
        profile[n] = c.degree()

    def cut(f, tag):
        t = f.truncate(N)
        return DoubleSeries(t.ring, t.n0, list(t.coeffs), N, tag)

    return DeformedSet(
        C, N,
        cut(g, GradTag(qm1, 0, 0, 0, qm1)),
        cut(delta, GradTag(q * q - 1, 0, 0, 0, qm1)),
        cut(h, GradTag(q + 1, 0, 1, 0, qm1)),
        cut(h_bold, GradTag(q, 1, 1, 0, qm1)),
        cut(e_bold, GradTag(1, 1, 1, 0, qm1)),
        his, E, verified, profile,
    )


# ---------------------------------------------------------------------------
# twist closure
# ---------------------------------------------------------------------------


def twist_reps(C: CarlitzCache, dset: DeformedSet) -> dict[str, tuple[str, DoubleSeries]]:
    """First-twist rewrites of the four algebra generators.

    Each value is (description, series).  bold e's rewrite divides by the
    linear factor (t - theta^q) exactly, coefficient by coefficient.
    """
    g, h = dset.g, dset.h
    hb, eb = dset.h_bold, dset.e_bold
    thq = theta_rf(C, C.q)
    e_rw = (hb + g * eb).map_coeffs(lambda c: c.divexact_linear(thq))
    return {
        "g": ("g^q", g.twist(1)),
        "h": ("h^q", h.twist(1)),
        "hbold": ("Delta * ebold", dset.delta * eb),
        "ebold": ("(t - theta^q)^(-1) (hbold + g ebold)", e_rw),
    }


def verify_twist_closure(C: CarlitzCache, dset: DeformedSet, count: int = 8,
                         seed: int | None = None) -> list[CheckRow]:
    """Check twist(f) against its four-generator rewrite.

    First on each generator alone, then on `count` random monomials
    g^a h^b ebold^c hbold^d; the rewrite of a monomial is the product of
    the generator rewrites, so equality here says the algebra really is
    twist-stable with the claimed representatives.
    """
    rows = []
    reps = twist_reps(C, dset)
    floor = dset.N // 2
    for name in ("g", "h", "hbold", "ebold"):
        desc, rep = reps[name]
        f = dset.generator(name)
        diff = (f.twist(1) - rep).truncate(min(f.twist(1).trunc, rep.trunc))
        ok = diff.is_zero() and diff.trunc >= floor
        rows.append(CheckRow(f"twist({name}) = {desc}", "ok" if ok else "fail",
                             f"checked to u^{diff.trunc}"))
    rng = random.Random(config_for_q(C.q).seed if seed is None else seed)
    names = ["g", "h", "ebold", "hbold"]
    for _ in range(count):
        exps = [rng.randrange(0, 3) for _ in names]
        if sum(exps) == 0:
            exps[rng.randrange(4)] = 1
        mono = DoubleSeries.const(C.ring, 1, dset.N)
        rep = DoubleSeries.const(C.ring, 1, dset.N)
        for nm, a in zip(names, exps):
            for _ in range(a):
                mono = mono * dset.generator(nm)
                rep = rep * reps[nm][1]
        lhs = mono.twist(1)
        diff = (lhs - rep).truncate(min(lhs.trunc, rep.trunc))
        label = " ".join(f"{nm}^{a}" for nm, a in zip(names, exps) if a)
        ok = diff.is_zero() and diff.trunc >= floor
        rows.append(CheckRow(f"twist closure on {label}", "ok" if ok else "fail",
                             f"checked to u^{diff.trunc}"))
    return rows


# ---------------------------------------------------------------------------
# sigma and symbolic s_2
# ---------------------------------------------------------------------------


def scarlitz_sigma(R: NumField, Dt: int) -> list[InfLaurent]:
    """t-coefficients of sigma(t) = prod_{i>=0} (1 - t/theta^(q^i))^(-1).

    sigma(0) = 1; coefficients live in F_q((1/theta)) and are returned as
    Laurent series in y.  Factors with q^i (q-1) beyond the working cap
    are 1 + O(y^cap) on the unit disk and are dropped.  The full s_C is
    y^(-1) * sigma(t): the root prefactor is tracked as that explicit
    power, consistent with the period normalization.
    """
    q = R.q
    coeffs = [R.one()] + [R.zero() for _ in range(Dt)]
    i = 0
    while q**i * (q - 1) <= R.cap:
        ratio = R.theta_pow(-(q**i))
        new = list(coeffs)
        for k in range(1, Dt + 1):
            acc = coeffs[k]
            r = ratio
            for j in range(1, k + 1):
                acc = acc + coeffs[k - j] * r
                if j < k:
                    r = r * ratio
            new[k] = acc
        coeffs = new
        i += 1
    return coeffs


def sigma_tau_rows(R: NumField, Dt: int) -> list[CheckRow]:
    """sigma^(1)(t) = (1 - t/theta) sigma(t), coefficient by coefficient."""
    sig = scarlitz_sigma(R, Dt)
    inv_theta = R.theta_pow(-1)
    rows = []
    worst = None
    for k in range(Dt + 1):
        lhs = sig[k].qpow(1)
        rhs = sig[k] if k == 0 else sig[k] - sig[k - 1] * inv_theta
        d = lhs - rhs
        v = d.prec if d.is_zero() else d.valuation()
        worst = v if worst is None else min(worst, v)
    ok = worst is not None and worst >= min(R.prec, R.cap // 2)
    rows.append(CheckRow("sigma tau-equation", "ok" if ok else "fail",
                         f"residual valuation >= {worst} through t^{Dt}"))
    return rows


class S2Series:
    """Symbolic s_2 = s_C/pi + sum_i kappa_i(t) u^i.

    rows[n][k] is the y-Laurent coefficient of t^k u^n, 0 <= k <= Dt.
    eval() certifies two tails: the u-tail from the slope allowance of the
    exact ratio bold h / h (excess), and the t-tail from the sigma series
    cut at Dt (dmax, t_slack measure how much the ratio coefficients can
    eat into the (Dt+2-k)(q-1) decay of the dropped sigma terms).
    """

    def __init__(self, R: NumField, Dt: int, trunc: int, rows, excess: int,
                 dmax: int, t_slack: int):
        self.R = R
        self.Dt = Dt
        self.trunc = trunc
        self.rows = rows
        self.excess = excess
        self.dmax = dmax
        self.t_slack = t_slack

    def kappa(self, i: int) -> list[InfLaurent]:
        """t-coefficients of the u^i term (i >= 1)."""
        return self.rows.get(i, [self.R.zero() for _ in range(self.Dt + 1)])

    def u0_row(self) -> list[InfLaurent]:
        return self.rows[0]

    def eval(self, u0: InfLaurent, t0: InfLaurent, needed: int | None = None) -> InfLaurent:
        R = self.R
        needed = R.prec if needed is None else needed
        vu = u0.valuation()
        if vu < 2:
            raise SeriesPrecisionError(f"sample too large: v(u) = {vu} < 2")
        vt0 = 0 if t0.is_zero() else t0.valuation()
        if vt0 < 0:
            raise SeriesPrecisionError("s_2 evaluation needs |t0| <= 1")
        u_tail = (self.trunc + 1) * (vu - 1) - self.excess
        t_tail = (self.Dt + 2 - self.dmax) * R.qm1 + (self.Dt + 1) * vt0 - self.t_slack
        tail = min(u_tail, t_tail)
        if tail < needed:
            raise SeriesPrecisionError(
                f"certified tail O(y^{tail}) short of {needed} "
                f"(u-tail {u_tail}, t-tail {t_tail}); raise the truncations"
            )
        tpows = [R.one()]
        for _ in range(self.Dt):
            tpows.append(tpows[-1] * t0)
        acc = R.zero(min(R.cap, tail))
        upow = R.one()
        for n in range(0, self.trunc + 1):
            row = self.rows.get(n)
            if row is not None:
                cval = R.zero()
                for k in range(self.Dt + 1):
                    cval = cval + row[k] * tpows[k]
                acc = acc + cval * upow
            upow = (upow * u0).clip(R.cap)
        return acc


def s2_symbolic(R: NumField, C: CarlitzCache, dset: DeformedSet, Dt: int | None = None) -> S2Series:
    """s_2 = (bold h / h) * (s_C / pi), organized by powers of u and t."""
    Dt = 8 if Dt is None else Dt
    ratio = dset.h_bold * dset.h.inverse()
    assert ratio.valuation() == 0
    sig = scarlitz_sigma(R, Dt)
    pre = R.y_pow(-1) * R.pi_tilde().inverse()
    sc_over_pi = [c * pre for c in sig]
    rows = {}
    dmax = 0
    t_slack = 0
    for n, c in ratio.items():
        # numeric t-coefficients of this u-coefficient
        num = [R.from_ratfunc(rf) for rf in c.c]
        vals = [cj.valuation() for cj in num if not cj.is_zero()]
        if vals:
            dmax = max(dmax, len(num) - 1)
            t_slack = max(t_slack, -(min(vals) + 2 * n))
        row = [R.zero() for _ in range(Dt + 1)]
        for k in range(Dt + 1):
            acc = row[k]
            for j, cj in enumerate(num):
                if j > k:
                    break
                acc = acc + cj * sc_over_pi[k - j]
            row[k] = acc
        rows[n] = row
    return S2Series(R, Dt, ratio.trunc, rows, ratio.max_theta_excess(), dmax, t_slack)


# ---------------------------------------------------------------------------
# battery
# ---------------------------------------------------------------------------


def battery(q: int, N: int = 60, Dt: int = 8, precision: int = 40) -> list[CheckRow]:
    """Deformation battery: specializations, integrality, u-support, the
    three tau-difference equations, the lambda and root identities, the
    h_i family and the twist-closure sampling."""
    t0 = time.monotonic()
    rows: list[CheckRow] = []
    C = generators.carlitz_context(q)
    ring = C.ring
    qm1 = q - 1
    dset = deformed_set(C, N)
    g, h, delta = dset.g, dset.h, dset.delta
    hb, eb = dset.h_bold, dset.e_bold
    theta = theta_rf(C)

    ok = hb.subs_t(theta).truncate(N).eq_prec(h)
    rows.append(CheckRow("bold h at t=theta equals h", "ok" if ok else "fail"))
    ok = eb.subs_t(theta).truncate(N).eq_prec(dset.E)
    rows.append(CheckRow("bold e at t=theta equals E", "ok" if ok else "fail"))

    def integral_support(f, name):
        good = True
        try:
            _assert_integral(f, name)
        except ValueError:
            good = False
        supp = all(n % qm1 == 1 % qm1 for n in f.support())
        rows.append(CheckRow(f"{name} in u F_q[t,theta][[u^(q-1)]]",
                             "ok" if good and supp else "fail"))

    integral_support(hb, "bold h")
    integral_support(eb, "bold e")

    lhs = hb.twist(2).scale(t_minus_theta(C, q))
    rhs = delta**qm1 * (g * hb.twist(1) + delta * hb)
    d1 = (lhs - rhs).truncate(min(lhs.trunc, rhs.trunc))
    rows.append(CheckRow("bold h tau-equation", "ok" if d1.is_zero() else "fail",
                         f"residual zero to u^{d1.trunc}"))

    lhs = eb.twist(2).scale(t_minus_theta(C, q * q))
    rhs = g.twist(1) * eb.twist(1) + delta * eb
    d2 = (lhs - rhs).truncate(min(lhs.trunc, rhs.trunc))
    rows.append(CheckRow("bold e tau-equation", "ok" if d2.is_zero() else "fail",
                         f"residual zero to u^{d2.trunc}"))

    lhs = eb.twist(1).scale(t_minus_theta(C, q))
    rhs = hb + g * eb
    d3 = (lhs - rhs).truncate(min(lhs.trunc, rhs.trunc))
    rows.append(CheckRow("lambda identity: (t-theta^q) bold e^(1) = bold h + g bold e",
                         "ok" if d3.is_zero() else "fail", "lambda = 1/(t - theta^q)"))

    d4 = (eb**q + dset.h_i[q].twist(1))
    d4 = d4.truncate(d4.trunc)
    rows.append(CheckRow("root identity: bold e^q + h_q^(1) = 0",
                         "ok" if d4.is_zero() else "fail", f"zero to u^{d4.trunc}"))

    ok = dset.h_i[0].eq_prec(h) and dset.h_i[1].eq_prec(hb)
    rows.append(CheckRow("h_0 = h and h_1 = bold h", "ok" if ok else "fail"))
    ok = all(f.valuation() == 1 for f in dset.h_i)
    rows.append(CheckRow("each h_i has u-order 1", "ok" if ok else "fail"))
    ok = all(dset.h_i[i].subs_t(theta).eq_prec(h) for i in range(q + 1))
    rows.append(CheckRow("each h_i specializes to h", "ok" if ok else "fail"))
    lhs = dset.h_i[q] * h**qm1
    d5 = (lhs - hb**q).truncate(min(lhs.trunc, N + q))
    rows.append(CheckRow("h_q h^(q-1) = bold h^q", "ok" if d5.is_zero() else "fail"))

    cfg = config_for_q(q, precision=precision, Dt=Dt)
    R = NumField(cfg.p, cfg.e, cfg.m, cfg.precision)
    rows += sigma_tau_rows(R, Dt)

    rows += verify_twist_closure(C, dset, count=6)

    tdeg = max(dset.t_profile.values(), default=0)
    rows.append(CheckRow("t-degree profile of bold h", "ok", f"max deg_t = {tdeg} through u^{N}"))

    dt = time.monotonic() - t0
    # fixed passing detail: report files must not vary run to run
    rows.append(CheckRow(f"deformation battery runtime q={q}",
                         "ok" if dt < 60.0 else "fail",
                         "within the 60s budget" if dt < 60.0
                         else f"{dt:.2f}s over the 60s budget"))
    return rows
