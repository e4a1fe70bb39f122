"""Vanishing-order bounds: resultants, the certificate pipeline, scans.

The pipeline bounds nu_infty(f) for a depth-l quasi-modular f without
expanding f to that order: pick an auxiliary deformed form of maximal
vanishing, twist it k times and specialize at t = theta so its vanishing
order is multiplied by q^k, then eliminate E between f and the
specialization.  The resultant is a classical modular form, and those
cannot vanish past weight/(q+1); if the specialization vanishes deeper
than that ceiling, f must be the small term of the min-inequality and the
ceiling bounds nu_infty(f).
"""

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import spaces
from .config import CheckRow
from .deformations import deformed_set, t_minus_theta, theta_rf
from .exactalg import RatFunc, SeriesPrecisionError, ThetaPoly, TPoly
from .generators import carlitz_context
from .spaces import ExpCache, QmPoly, nu_infty


def theorem_constant(q: int) -> int:
    return 252 * q * (q * q - 1)


def _ilog_floor(q: int, x: int) -> int:
    """Largest k >= 0 with q^k <= x (x >= 1)."""
    k = 0
    p = q
    while p <= x:
        p *= q
        k += 1
    return k


def _ilog_floor_big(q: int, M: int) -> int:
    """floor(log_q M) for big M, by comparison only."""
    if q == 2:
        return M.bit_length() - 1
    lo = (M.bit_length() - 1) // q.bit_length()
    n = max(lo, 0)
    while q ** (n + 1) <= M:
        step = 1
        while q ** (n + 2 * step) <= M:
            step *= 2
        n += step
    return n


def floor_log_scaled(q: int, d: int, scale: int) -> int:
    """floor(scale * log_q d) computed exactly as floor(log_q(d^scale))."""
    if d <= 1 or scale <= 0:
        return 0
    return _ilog_floor_big(q, d**scale)


@dataclass
class BoundReport:
    """The three bound shapes for a weight-w depth-l form, as exact
    integers (floors of the real bounds)."""

    q: int
    w: int
    l: int
    conjecture: int = 0
    theorem: int = 0
    earlier_shape: int = 0
    measured: int | None = None

    def __post_init__(self):
        if self.measured is not None and self.measured > self.theorem:
            raise AssertionError(
                f"measured order {self.measured} above the proved bound "
                f"{self.theorem} at (q,w,l)=({self.q},{self.w},{self.l})")


def bound_eval(q: int, w: int, l: int, measured: int | None = None) -> BoundReport:
    if l < 1 or w <= l:
        raise ValueError("bounds need l >= 1 and w > l")
    d = w - l
    C = theorem_constant(q)
    thm = C * l * d if d <= q else floor_log_scaled(q, d, C * l * d)
    thm = max(thm, C * l * d)
    early = C * l * l * w if w <= q else floor_log_scaled(q, w, C * l * l * w)
    early = max(early, C * l * l * w)
    return BoundReport(q, w, l, conjecture=l * d, theorem=thm,
                       earlier_shape=early, measured=measured)


# ---------------------------------------------------------------------------
# resultants in the E-direction
# ---------------------------------------------------------------------------


def _qm_pow(f: QmPoly, k: int) -> QmPoly:
    out = QmPoly.monomial(f.C, 0, 0, 0)
    for _ in range(k):
        out = out * f
    return out


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    acc = QmPoly(M[0][0].C, {})
    for i in range(n):
        if M[i][0].is_zero():
            continue
        minor = [row[1:] for k, row in enumerate(M) if k != i]
        term = M[i][0] * _det(minor)
        acc = acc - term if i % 2 else acc + term
    return acc


def resultant_E(f: QmPoly, g: QmPoly) -> QmPoly:
    """Sylvester resultant of f and g as polynomials in E over K[g,h].

    Degree-zero arguments follow the convention res(f, c) = c^deg_E(f).
    """
    if f.is_zero() or g.is_zero():
        raise ValueError("resultant of a zero polynomial")
    a = f.e_coefficients()
    b = g.e_coefficients()
    d1, d2 = len(a) - 1, len(b) - 1
    if d1 == 0 and d2 == 0:
        return QmPoly.monomial(f.C, 0, 0, 0)
    if d2 == 0:
        return _qm_pow(b[0], d1)
    if d1 == 0:
        return _qm_pow(a[0], d2)
    zero = QmPoly(f.C, {})
    n = d1 + d2
    rows = []
    ra = list(reversed(a))
    rb = list(reversed(b))
    for r in range(d2):
        rows.append([zero] * r + ra + [zero] * (n - d1 - 1 - r))
    for r in range(d1):
        rows.append([zero] * r + rb + [zero] * (n - d2 - 1 - r))
    return _det(rows)


def resultant_weight(f: QmPoly, g: QmPoly) -> int:
    d1, d2 = f.deg_E(), g.deg_E()
    return f.weight * d2 + g.weight * d1 - 2 * d1 * d2


def pseudo_remainder_E(num: QmPoly, den: QmPoly):
    """Pseudo-remainder of num by den in the E-direction.

    Returns (remainder coefficients, scale_power): den-lead^scale_power * num
    = den * quotient + remainder over K[g,h][E]."""
    a = num.e_coefficients()
    b = den.e_coefficients()
    if len(b) - 1 < 0 or den.is_zero():
        raise ValueError("pseudo-division by zero")
    lead = b[-1]
    power = 0
    while len(a) - 1 >= len(b) - 1 and any(not x.is_zero() for x in a):
        while a and a[-1].is_zero():
            a.pop()
        if not a or len(a) < len(b):
            break
        shift = len(a) - len(b)
        top = a[-1]
        a = [x * lead for x in a]
        for idx, bx in enumerate(b):
            a[idx + shift] = a[idx + shift] - top * bx
        power += 1
        while a and a[-1].is_zero():
            a.pop()
    return a, power


# ---------------------------------------------------------------------------
# symbolic deformed polynomials and their twists
# ---------------------------------------------------------------------------


class DagPoly:
    """Polynomial in (hbold, ebold) over C[g,h] with K[t] coefficients.

    terms maps (b, c, i, j) to a TPoly for g^b h^c hbold^i ebold^j; every
    monomial has the same bold degree i + j = nu.  den tracks a global
    denominator prod_r (t - theta^(q^r))^(e_r) introduced by the twist of
    ebold; numerator coefficients absorb the difference so the denominator
    stays uniform across terms.
    """

    def __init__(self, C, nu: int, terms: dict, den: dict | None = None):
        self.C = C
        self.nu = nu
        self.terms = {k: tp for k, tp in terms.items() if not tp.is_zero()}
        for (b, c, i, j) in self.terms:
            if i + j != nu:
                raise ValueError("mixed bold degrees in a deformed polynomial")
        self.den = {r: e for r, e in (den or {}).items() if e}

    @classmethod
    def from_witness(cls, C, nu: int, witness):
        terms = {}
        for (s, b, c), tp in witness:
            key = (b, c, s, nu - s)
            cur = terms.get(key)
            terms[key] = tp if cur is None else cur + tp
        return cls(C, nu, terms)

    def max_deg_t(self) -> int:
        return max((tp.degree() for tp in self.terms.values()), default=0)

    def twist(self) -> "DagPoly":
        """One Anderson twist: coefficients get the q-power Frobenius,
        g -> g^q, h -> h^q, hbold -> -h^(q-1) ebold, and ebold picks up
        (t - theta^q)^(-1)(hbold + g ebold)."""
        C = self.C
        q = C.q
        tmq = t_minus_theta(C, q)
        tmq_pow = {0: TPoly.const(C.ring, RatFunc(ThetaPoly.one(C.F)))}
        for e in range(1, self.nu + 1):
            tmq_pow[e] = tmq_pow[e - 1] * tmq
        out = {}
        for (b, c, i, j), tp in self.terms.items():
            base = tp.twist(1, q)
            if self.nu > j:
                base = base * tmq_pow[self.nu - j]
            if i % 2 and C.F.p != 2:
                base = -base
            for r in range(j + 1):
                cmb = math.comb(j, r) % C.F.p
                if cmb == 0:
                    continue
                piece = base if cmb == 1 else base.scale(cmb)
                key = (q * b + (j - r), q * c + (q - 1) * i, r, i + j - r)
                cur = out.get(key)
                out[key] = piece if cur is None else cur + piece
        den = {r + 1: e for r, e in self.den.items()}
        den[1] = den.get(1, 0) + self.nu
        return DagPoly(C, self.nu, out, den)

    def subs_theta(self) -> QmPoly:
        """Specialize t = theta; hbold becomes h and ebold becomes E, and
        the tracked denominator turns into a nonzero K-scalar."""
        C = self.C
        theta = theta_rf(C)
        scal = RatFunc(ThetaPoly.one(C.F))
        for r, e in self.den.items():
            br = RatFunc(C.bracket(r))
            if C.F.p != 2:
                br = -br
            # t - theta^(q^r) at t = theta is -(theta^(q^r) - theta)
            scal = scal * (br**e).inverse()
        coeffs = {}
        for (b, c, i, j), tp in self.terms.items():
            v = tp.subs_t(theta) * scal
            if v.is_zero():
                continue
            key = (j, b, c + i)
            cur = coeffs.get(key)
            coeffs[key] = v if cur is None else cur + v
        return QmPoly(C, coeffs)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    """Every intermediate quantity of one certificate run."""

    q: int
    w: int
    l: int
    m: int
    mu: int
    nu: int
    k: int
    mu_is_default: bool
    hypotheses_met: bool
    n_aux: int = 0
    aux_deg_t: int = 0
    v_fk: int = 0
    w_fk: int = 0
    branch: str = ""
    w_rho: int = 0
    v_rho: int | None = None
    rho_ceiling: int | None = None
    bound: int | None = None
    measured: int | None = None
    conclusive: bool = False
    elapsed: float = 0.0
    rows: list = field(default_factory=list)

    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.rows)


def smallest_twist_count(q: int, mu: int) -> int:
    """Smallest k with q^k > 3 log_q mu, by the exact comparison
    q^(q^k) > mu^3."""
    k = 1
    while q ** (q**k) <= mu**3:
        k += 1
    return k


def certify(f: QmPoly, dset=None, mu: int | None = None, nu: int = 1,
            unsafe_small_mu: bool = False, Dt_budget: int | None = None) -> CertificateReport:
    """Run the full certificate pipeline on a depth >= 1 form.

    The default mu = 12(q^2-1)(w-l) follows the proved parameter choice;
    desk-scale runs override it and must pass unsafe_small_mu once mu - nu
    drops below 6(q^2-1) (the report marks the unmet hypothesis).  Every
    inequality in the chain is re-checked on exact expansions.
    """
    t_start = time.monotonic()
    if f.is_zero() or f.depth < 1:
        raise ValueError("certify needs a nonzero form of depth >= 1")
    C = f.C
    q = C.q
    w, l, m = f.weight, f.depth, f.type_m
    mu_default = 12 * (q * q - 1) * (w - l)
    mu_is_default = mu is None
    mu = mu_default if mu is None else mu
    hyp = mu - nu >= 6 * (q * q - 1)
    if not hyp and not unsafe_small_mu:
        raise ValueError(
            f"mu - nu = {mu - nu} < {6 * (q * q - 1)} breaks the rank-bound "
            "hypothesis; pass unsafe_small_mu to proceed at desk scale")
    k = smallest_twist_count(q, mu)
    rows = [CheckRow("parameters", "ok",
                     f"mu={mu}{'' if mu_is_default else ' (override)'} nu={nu} "
                     f"k={k} (smallest with q^k > 3 log_q mu)")]
    rep = CertificateReport(q=q, w=w, l=l, m=m, mu=mu, nu=nu, k=k,
                            mu_is_default=mu_is_default, hypotheses_met=hyp,
                            rows=rows)

    space = spaces.space_Mdag(C, mu, nu, m, poly_only=True)
    if not space.basis:
        raise ValueError(
            f"auxiliary space at (mu,nu,m)=({mu},{nu},{m}) is zero; "
            "override mu (and check the type) so the search has room")
    aux_N = (mu * nu) // (q - 1) + len(space) + 5
    if dset is None or dset.N < aux_N:
        dset = deformed_set(C, aux_N)
    witness, aux_rep = spaces.auxiliary_form(dset, mu, nu, m,
                                             Dt_budget=Dt_budget, N=aux_N)
    raw = aux_rep["witness_raw"]
    rep.n_aux = aux_rep["val"]
    rep.aux_deg_t = aux_rep["deg_t_expansion"]
    rows.append(CheckRow("auxiliary", "ok",
                         f"order {rep.n_aux} (ceiling mu*nu = {mu * nu}), "
                         f"deg_t {rep.aux_deg_t}, n0 target U = {aux_rep['U']}"))

    dag = DagPoly.from_witness(C, nu, raw)
    k0 = k
    while True:
        twisted = dag
        for _ in range(k):
            twisted = twisted.twist()
        f_k = twisted.subs_theta()
        rep.w_fk = q**k * mu + nu
        if f_k.weight != rep.w_fk or f_k.is_zero():
            raise ArithmeticError(
                f"twisted specialization has weight {f_k.weight}, "
                f"expected {rep.w_fk}")
        target = q**k * rep.n_aux
        exp_N = max(target + 4, w + 4)
        big = dset if dset.N >= exp_N else deformed_set(C, exp_N)
        cache = ExpCache(big)
        v_fk = nu_infty(f_k, cache)
        if v_fk == target:
            break
        if k - k0 >= 3:
            raise ArithmeticError("twist order never stabilized")
        # t-degree interference in the coefficients: take k one step up so
        # q^k clears the degrees and the specialization keeps full order
        rows.append(CheckRow(f"twist k={k}", "skip",
                             f"order {v_fk} != q^k * {rep.n_aux}; raising k"))
        k += 1
        rep.k = k
    rep.v_fk = v_fk
    rows.append(CheckRow("twisted order", "ok",
                         f"nu_inf(f_k) = {v_fk} = q^{k} * {rep.n_aux}, "
                         f"weight {rep.w_fk}"))

    rep.measured = nu_infty(f, cache)
    rho = resultant_E(f, f_k)
    if rho.is_zero():
        rem, power = pseudo_remainder_E(f_k, f)
        if any(not x.is_zero() for x in rem):
            raise ArithmeticError(
                "resultant vanished but the pseudo-remainder did not: "
                "inconsistent elimination")
        lead_order = nu_infty(f.e_coefficients()[-1], cache)
        rep.branch = "divisibility"
        rep.bound = v_fk + power * lead_order
        rows.append(CheckRow("divisibility branch", "ok",
                             f"f divides lead^{power} * f_k; bound "
                             f"{rep.bound}"))
        rep.conclusive = True
    else:
        rep.branch = "resultant"
        rep.w_rho = resultant_weight(f, f_k)
        if rho.weight != rep.w_rho or rho.depth != 0:
            raise ArithmeticError(
                f"resultant weight {rho.weight} (depth {rho.depth}) "
                f"disagrees with the degree law {rep.w_rho}")
        ceiling = rep.w_rho // (q + 1)
        rho_cache = cache if cache.N >= ceiling + 2 else ExpCache(
            deformed_set(C, ceiling + 4))
        v_rho = nu_infty(rho, rho_cache)
        if v_rho > Fraction(rep.w_rho, q + 1):
            raise AssertionError(
                f"modular resultant of weight {rep.w_rho} vanishes to order "
                f"{v_rho}, past the structural ceiling")
        rep.v_rho = v_rho
        rep.rho_ceiling = ceiling
        rows.append(CheckRow("resultant", "ok",
                             f"weight {rep.w_rho}, order {v_rho} <= "
                             f"{ceiling} = floor(weight/(q+1))"))
        if v_fk > v_rho:
            # min{nu(f), nu(f_k)} <= nu(rho) and f_k is too deep to be
            # the minimum, so f is
            rep.bound = v_rho
            rep.conclusive = True
            rows.append(CheckRow("min identification", "ok",
                                 f"nu_inf(f_k) = {v_fk} > {v_rho}, so "
                                 f"nu_inf(f) <= {v_rho}"))
        else:
            rep.conclusive = False
            rows.append(CheckRow(
                "min identification", "fail",
                f"nu_inf(f_k) = {v_fk} <= nu_inf(rho) = {v_rho}: these "
                "parameters cannot separate f; raise mu"))
    if rep.bound is not None:
        status = "ok" if rep.measured <= rep.bound else "fail"
        rows.append(CheckRow("bound vs measurement", status,
                             f"measured {rep.measured} <= bound {rep.bound}"
                             if status == "ok" else
                             f"measured {rep.measured} EXCEEDS bound {rep.bound}"))
    rep.elapsed = time.monotonic() - t_start
    return rep


# ---------------------------------------------------------------------------
# conjecture scan
# ---------------------------------------------------------------------------


def conjecture_scan(q: int, wmax: int, lmax: int, N: int | None = None,
                    wmin: int = 2):
    """Sweep the graded pieces up to wmax and depth lmax, recording the
    maximal vanishing order against the c = 1 conjecture value l(w-l).

    Ratios above 1 are flagged in the row (a counterexample candidate is
    something to report, not an error); the proved bound is a hard
    assertion.  Returns (table rows, check rows).  wmin exists so callers
    can split the sweep into independent weight ranges.
    """
    C = carlitz_context(q)
    if N is None:
        # orders can in principle reach the conjecture ceiling, so the
        # truncation must clear l(w-l) at the largest admissible pair
        lm = min(lmax, wmax // 2)
        N = lm * (wmax - lm) + 10
    dset = deformed_set(C, N)
    cache = ExpCache(dset)
    table = []
    checks = []
    best = {}
    for w in range(wmin, wmax + 1):
        for m in range(max(q - 1, 1)):
            for l in range(1, lmax + 1):
                if w < 2 * l:
                    continue
                sp = spaces.space_Mtilde(C, w, m, l)
                if not sp.basis:
                    continue
                try:
                    spectrum, _ = spaces.extremal_form(sp, cache)
                except SeriesPrecisionError:
                    dset = deformed_set(C, 2 * cache.N)
                    cache = ExpCache(dset)
                    spectrum, _ = spaces.extremal_form(sp, cache)
                max_nu = spectrum[-1]
                bounds = bound_eval(q, w, l, measured=max_nu)
                ratio = Fraction(max_nu, bounds.conjecture)
                flag = ratio > 1
                table.append({
                    "q": q,
                    "w": w,
                    "m": m,
                    "l": l,
                    "dim": len(sp),
                    "max_nu": max_nu,
                    "conj_bound": bounds.conjecture,
                    "thm_bound": bounds.theorem,
                    "ratio": ratio,
                    "flag": flag,
                })
                if flag:
                    checks.append(CheckRow(
                        f"scan w={w} m={m} l={l}", "ok",
                        f"RATIO {ratio} > 1: counterexample candidate to "
                        f"c(q)=1, max order {max_nu} vs {bounds.conjecture}"))
                prev = best.get((w, m))
                if prev is not None and max_nu < prev:
                    checks.append(CheckRow(
                        f"scan monotonicity w={w} m={m} l={l}", "fail",
                        f"max order dropped from {prev} to {max_nu} as the "
                        "depth bound grew"))
                best[(w, m)] = max_nu
    checks.append(CheckRow(
        f"scan q={q} w<={wmax} l<={lmax}", "ok",
        f"{len(table)} rows, proved bound held everywhere, "
        f"{sum(1 for r in table if r['flag'])} ratio flags"))
    return table, checks
