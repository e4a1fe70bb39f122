"""Numeric arithmetic at the place at infinity.

Values live in F_{q^m}((y)), a ramified extension of K_inf = F_q((1/theta))
with uniformizer y satisfying

    y^(q-1) = -1/theta,   i.e.   theta = -y^-(q-1).

The root (-theta)^(1/(q-1)) is *defined* to be y^-1; every quantity that
depends on that choice (the period pibar above all) is consistent with it
package-wide.  Sizes: |x| = q^(-v(x)/(q-1)) where v is the y-valuation,
so |theta| = q and |pibar| = q^(q/(q-1)).

An ``InfLaurent`` is a finite y-Laurent tail plus an O(y^prec) error box;
all operations propagate the box (min rule for sums, valuation-shifted
min for products, P - 2v for inverses, P*q^k for q^k-th powers, which are
exact Frobenius moves in characteristic p).  Exactly representable inputs
(theta-polynomials) enter with prec = cap = 3 * target so that long
computation chains still end above the target precision; every check that
consumes a value asserts the box is good enough and raises
``SeriesPrecisionError`` otherwise instead of silently passing.
"""

from __future__ import annotations

from .exactalg import DoubleSeries, RatFunc, SeriesPrecisionError, ThetaPoly, poly_mul_codes, _series_inv_codes
from .ffield import get_field


class NumField:
    """Context object: the coefficient field F_{q^m}, q, and precision."""

    def __init__(self, p: int, e: int, m: int, prec: int):
        self.p = p
        self.e = e
        self.m = m
        self.q = p**e
        self.qm1 = self.q - 1
        self.prec = prec
        self.cap = 3 * prec
        self.F = get_field(p, e * m)
        self.base = get_field(p, e)
        self.embed_table = self.F.embed_from(self.base)
        self._sub_image = set(self.embed_table)
        self._fq_coords = None
        self._pi = None
        self.key = ("inf", p, e, m)

    # -- element constructors -------------------------------------------

    def el(self, n0: int, codes, prec: int | None = None) -> "InfLaurent":
        return InfLaurent(self, n0, codes, self.cap if prec is None else prec)

    def zero(self, prec: int | None = None) -> "InfLaurent":
        return self.el(0, [], prec)

    def one(self) -> "InfLaurent":
        return self.el(0, [1])

    def const(self, code: int) -> "InfLaurent":
        return self.el(0, [code])

    def y_pow(self, k: int) -> "InfLaurent":
        return self.el(k, [1])

    def theta_pow(self, k: int) -> "InfLaurent":
        """theta^k = (-1)^k y^(-k(q-1)) for any integer k."""
        sign = 1 if (k % 2 == 0 or self.p == 2) else self.F.neg_table[1]
        return self.el(-k * self.qm1, [sign])

    def embed_base(self, code: int) -> int:
        """Field code of F_q inside F_{q^m}."""
        return self.embed_table[code]

    def from_theta_poly(self, tp: ThetaPoly) -> "InfLaurent":
        if tp.is_zero():
            return self.zero()
        d = tp.degree()
        span = d * self.qm1 + 1
        codes = [0] * span
        for k, c in enumerate(tp.c):
            if not c:
                continue
            cc = self.embed_table[c]
            if k % 2 and self.p != 2:
                cc = self.F.neg_table[cc]
            codes[span - 1 - k * self.qm1] = cc
        return self.el(-d * self.qm1, codes)

    def from_ratfunc(self, rf: RatFunc) -> "InfLaurent":
        num = self.from_theta_poly(rf.num)
        if rf.den.is_one():
            return num
        return num * self.from_theta_poly(rf.den).inverse()

    def nonreal_unit(self) -> int:
        """Smallest field code outside the embedded F_q (a zeta for F_{q^2})."""
        for c in self.F.elements():
            if c not in self._sub_image:
                return c
        raise ValueError("m = 1: the coefficient field has no non-real element")

    def coords_over_base(self, code: int) -> tuple[int, int]:
        """Write code = a + b*zeta with a, b in F_q (codes of the base field);
        only available for m = 2."""
        if self.m != 2:
            raise ValueError("coords_over_base needs m = 2")
        if self._fq_coords is None:
            z = self.nonreal_unit()
            table = {}
            for a in self.base.elements():
                ea = self.embed_table[a]
                for b in self.base.elements():
                    eb = self.F.mul(self.embed_table[b], z)
                    table[self.F.add(ea, eb)] = (a, b)
            self._fq_coords = table
        return self._fq_coords[code]

    # -- the period ------------------------------------------------------

    def pi_tilde(self) -> "InfLaurent":
        """pibar = theta * (-theta)^(1/(q-1)) * prod_{i>=1} (1 - theta^(1-q^i))^(-1),
        with the root choice (-theta)^(1/(q-1)) = y^-1 fixed above.

        The i-th factor is 1 + O(y^((q^i-1)(q-1))), so the product is
        truncated once that exceeds the precision cap.
        """
        if self._pi is not None:
            return self._pi
        prod = self.one()
        i = 1
        while (self.q**i - 1) * self.qm1 <= self.cap:
            factor = self.one() - self.theta_pow(1 - self.q**i)
            prod = prod * factor
            i += 1
        self._pi = (self.theta_pow(1) * self.y_pow(-1)) * prod.inverse()
        return self._pi


class InfLaurent:
    """y-Laurent tail with an O(y^prec) error box.

    codes[i] is the F_{q^m} code of the coefficient of y^(n0+i); codes at
    exponents >= prec are dropped on normalization (they are not trusted).
    An empty codes list means the element is O(y^prec), i.e. zero as far
    as the box can tell.
    """

    __slots__ = ("R", "n0", "codes", "prec")

    def __init__(self, R: NumField, n0: int, codes, prec: int):
        self.R = R
        cs = list(codes)
        if n0 + len(cs) > prec:
            cs = cs[: max(0, prec - n0)]
        while cs and cs[-1] == 0:
            cs.pop()
        i = 0
        while i < len(cs) and cs[i] == 0:
            i += 1
        if i:
            cs = cs[i:]
            n0 += i
        self.n0 = n0 if cs else 0
        self.codes = cs
        self.prec = prec

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        """Zero to within the error box."""
        return not self.codes

    def valuation(self) -> int:
        if not self.codes:
            raise SeriesPrecisionError(f"value is O(y^{self.prec}); cannot take its valuation")
        return self.n0

    def val_lower(self) -> int:
        """Certified lower bound for the valuation (prec when zero-boxed)."""
        return self.n0 if self.codes else self.prec

    def lead_code(self) -> int:
        return self.codes[0]

    def clip(self, P: int) -> "InfLaurent":
        if self.prec <= P:
            return self
        return InfLaurent(self.R, self.n0, self.codes, P)

    def imag_valuation(self) -> int:
        """Valuation of the component outside F_q((y)); prec if none is
        visible.  This is -(q-1) log_q of the distance to K_inf."""
        R = self.R
        best = None
        for i, c in enumerate(self.codes):
            if c and R.coords_over_base(c)[1]:
                best = self.n0 + i
                break
        return self.prec if best is None else best

    def real_part(self) -> "InfLaurent":
        R = self.R
        out = []
        for c in self.codes:
            a = R.coords_over_base(c)[0] if c else 0
            out.append(R.embed_table[a])
        return InfLaurent(R, self.n0, out, self.prec)

    # -- arithmetic -----------------------------------------------------

    def _veff(self) -> int:
        return self.n0 if self.codes else self.prec

    def __add__(self, other: "InfLaurent") -> "InfLaurent":
        R = self.R
        prec = min(self.prec, other.prec)
        if not self.codes:
            return other.clip(prec)
        if not other.codes:
            return self.clip(prec)
        n0 = min(self.n0, other.n0)
        top = max(self.n0 + len(self.codes), other.n0 + len(other.codes))
        out = [0] * (top - n0)
        for i, c in enumerate(self.codes):
            out[self.n0 - n0 + i] = c
        at = R.F.add_table
        for i, c in enumerate(other.codes):
            if c:
                j = other.n0 - n0 + i
                out[j] = at[out[j]][c]
        return InfLaurent(R, n0, out, prec)

    def __neg__(self) -> "InfLaurent":
        nt = self.R.F.neg_table
        return InfLaurent(self.R, self.n0, [nt[c] for c in self.codes], self.prec)

    def __sub__(self, other: "InfLaurent") -> "InfLaurent":
        return self + (-other)

    def __mul__(self, other: "InfLaurent") -> "InfLaurent":
        R = self.R
        prec = min(self.prec + other._veff(), other.prec + self._veff())
        if not self.codes or not other.codes:
            return InfLaurent(R, 0, [], prec)
        n0 = self.n0 + other.n0
        la = max(0, prec - n0)
        codes = poly_mul_codes(R.F, self.codes[:la], other.codes[:la])
        return InfLaurent(R, n0, codes, prec)

    def scale_code(self, c: int) -> "InfLaurent":
        if c == 0:
            return InfLaurent(self.R, 0, [], self.prec)
        mt = self.R.F.mul_table[c]
        return InfLaurent(self.R, self.n0, [mt[x] for x in self.codes], self.prec)

    def inverse(self) -> "InfLaurent":
        v = self.valuation()
        out_prec = self.prec - 2 * v
        rel = max(1, self.prec - v)
        inv_codes = _series_inv_codes(self.R.F, self.codes[:rel], rel)
        return InfLaurent(self.R, -v, inv_codes, out_prec)

    def __truediv__(self, other: "InfLaurent") -> "InfLaurent":
        return self * other.inverse()

    def __pow__(self, k: int) -> "InfLaurent":
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return self.R.one()
        out = None
        base = self
        while k:
            if k & 1:
                out = base if out is None else out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def qpow(self, k: int, q: int | None = None, clip: int | None = None) -> "InfLaurent":
        """The q^k-th power: exponents spread by q^k, coefficients through
        Frobenius^(e*k).  Exact in characteristic p, so prec scales too."""
        R = self.R
        if q is not None and q != R.q:
            raise ValueError("qpow called with a foreign q")
        if k == 0:
            return self if clip is None else self.clip(clip)
        s = R.q**k
        out_prec = self.prec * s
        if clip is not None:
            out_prec = min(out_prec, clip)
        if not self.codes:
            return InfLaurent(R, 0, [], out_prec)
        n0 = self.n0 * s
        F = R.F
        times = R.e * k
        out = []
        for i, c in enumerate(self.codes):
            if n0 + i * s >= out_prec:
                break
            if len(out) < i * s:
                out.extend([0] * (i * s - len(out)))
            out.append(F.frob(c, times) if c else 0)
        return InfLaurent(R, n0, out, out_prec)

    # -- rendering ------------------------------------------------------

    def _code_str(self, c: int) -> str:
        F = self.R.F
        if F.n == 1:
            return str(c)
        if c < F.p:
            return str(c)
        return f"[{c}]"

    def __str__(self) -> str:
        if not self.codes:
            return f"O(y^{self.prec})"
        parts = []
        shown = 0
        for i, c in enumerate(self.codes):
            if not c:
                continue
            n = self.n0 + i
            cs = self._code_str(c)
            term = cs if n == 0 else (f"y^{n}" if cs == "1" else f"{cs}*y^{n}")
            parts.append(term)
            shown += 1
            if shown >= 12:
                parts.append("...")
                break
        return " + ".join(parts) + f" + O(y^{self.prec})"

    def __repr__(self) -> str:
        return f"InfLaurent({self})"


# ---------------------------------------------------------------------------
# transcendental constructions
# ---------------------------------------------------------------------------


def carlitz_exp(R: NumField, C, z: InfLaurent) -> InfLaurent:
    """e_C(z) = sum_i z^(q^i)/d_i, truncated once the term valuations have
    certifiably passed the accumulated precision (v(term_i) =
    q^i (v(z) + i(q-1)) is increasing once i(q-1) + v(z) > 0)."""
    if z.is_zero():
        return z
    vz = z.valuation()
    acc = R.zero(R.cap)
    i = 0
    while True:
        vterm = R.q**i * (vz + i * R.qm1)
        if i * R.qm1 + vz > 0 and vterm >= acc.prec and vterm >= R.cap:
            break
        di = R.from_theta_poly(C.d(i))
        term = (z.qpow(i, clip=R.cap + max(0, -vterm) + 8) * di.inverse()).clip(R.cap)
        acc = acc + term
        i += 1
        if i > 60:
            raise SeriesPrecisionError("carlitz_exp did not stabilize in 60 terms")
    return acc


def u_of(R: NumField, C, z: InfLaurent) -> InfLaurent:
    """u(z) = 1/e_C(pibar z); raises if z is a period to working precision."""
    return carlitz_exp(R, C, R.pi_tilde() * z).inverse()


def omega_pf(R: NumField, C, t0: InfLaurent, twist: int = 0) -> InfLaurent:
    """The rank-1 generating function at t = t0 through its partial-fraction
    expansion sum_j (1/d_j)^(q^k) pibar^(q^(j+k)) / (theta^(q^j) - t0)
    (k = twist).  Works for any t0 off the poles theta^(q^(j+k))."""
    pi = R.pi_tilde()

    def alpha(j):
        return R.from_theta_poly(C.d(j)).inverse()

    return agf_sum(R, alpha, pi, t0, twist)


def omega_product(R: NumField, t0: InfLaurent) -> InfLaurent:
    """Same function by the Carlitz-cyclotomic product
    y^-1 prod_{i>=0} (1 - t0 theta^(-q^i))^(-1); needs |t0| <= 1.

    Independent of the partial-fraction route (no pibar, no d_i), which is
    what makes the cross-check in the battery meaningful.
    """
    if not t0.is_zero() and t0.valuation() < 0:
        raise ValueError("product form needs |t0| <= 1")
    prod = R.one()
    i = 0
    while (R.q**i) * R.qm1 <= R.cap:
        factor = R.one() - (t0 * R.theta_pow(-(R.q**i))).clip(R.cap)
        prod = prod * factor
        i += 1
    return R.y_pow(-1) * prod.inverse()


def agf_sum(R: NumField, alpha_fn, w: InfLaurent, t0: InfLaurent, twist: int = 0) -> InfLaurent:
    """sum_j alpha_j^(q^k) w^(q^(j+k)) / (theta^(q^(j+k)) - t0) with k = twist.

    For twist = 0 this is the generating function of the lattice whose
    exponential has coefficients alpha_fn(j) (alpha_0 = 1), continued past
    the radius |t| < q through its partial fractions; for twist = k it is
    the k-fold coefficient-Frobenius of that function, whose poles sit at
    theta^(q^(j+k)).  Any t0 off that pole set is fine (evaluating near a
    pole just costs box precision); landing on a pole to working precision
    raises.  Terms are summed until two consecutive ones sit above the
    precision cap; their valuations are eventually increasing because
    v(alpha_j) grows like j q^j (q-1) while the w-part only loses q^j v(w).
    """
    acc = R.zero(R.cap)
    wq = w.qpow(twist) if twist else w
    wq = wq.clip(wq.val_lower() + 4 * R.cap)
    j = 0
    good = 0
    while good < 2:
        den = R.theta_pow(R.q ** (j + twist)) - t0
        if den.is_zero():
            raise ValueError(
                "t0 sits on the pole theta^(q^%d) to working precision" % (j + twist)
            )
        a = alpha_fn(j)
        if twist:
            a = a.qpow(twist)
            a = a.clip(a.val_lower() + 4 * R.cap)
        term = (a * wq * den.inverse()).clip(R.cap)
        acc = acc + term
        vt = term.val_lower()
        good = good + 1 if vt >= R.cap else 0
        j += 1
        # the clips are relative to the valuation so that the q^j-th powers
        # keep a bounded code length while their true valuations stay visible
        wq = wq.qpow(1)
        wq = wq.clip(wq.val_lower() + 4 * R.cap)
        if j > 50:
            raise SeriesPrecisionError("agf_sum did not stabilize in 50 terms")
    return acc


def rank2_alpha_fn(R: NumField, g_tilde: InfLaurent, delta_tilde: InfLaurent):
    """Exponential coefficients of the rank-2 module with coefficients
    (g_tilde, delta_tilde):

        alpha_0 = 1,
        alpha_i = (g_tilde alpha_{i-1}^q + delta_tilde alpha_{i-2}^(q^2))
                  / (theta^(q^i) - theta).

    Returned as a memoized callable suitable for agf_sum.
    """
    alphas = [R.one()]

    def alpha(j: int) -> InfLaurent:
        while len(alphas) <= j:
            i = len(alphas)
            acc = g_tilde * alphas[i - 1].qpow(1)
            if i >= 2:
                acc = acc + delta_tilde * alphas[i - 2].qpow(2)
            den = R.theta_pow(R.q**i) - R.theta_pow(1)
            nxt = acc * den.inverse()
            # clip relative to the valuation: alpha_i valuations grow without
            # bound, and a flat absolute clip would zero the deep ones out,
            # which breaks the sums evaluated at w with negative valuation
            alphas.append(nxt.clip(nxt.val_lower() + R.cap))
        return alphas[j]

    return alpha


def standard_samples(R: NumField):
    """The built-in sample grid (config.SAMPLE_VERSION).

    Three base points z (all with |z| = |z - K_infty-part| large enough
    that v(u(z)) >= q^2) and three t-values in the closed unit disk, each
    labeled for report rows.  zeta is the first field constant outside the
    embedded F_q, so the points are honestly off the real axis.
    """
    zeta = R.const(R.nonreal_unit())
    th = R.theta_pow(1)
    zs = [
        ("zeta*theta", zeta * th),
        ("zeta*theta^2", zeta * th * th),
        ("zeta*theta+1/theta", zeta * th + R.theta_pow(-1)),
    ]
    t0s = [
        ("0", R.zero()),
        ("1/theta", R.theta_pow(-1)),
        ("1+1/theta", R.one() + R.theta_pow(-1)),
    ]
    return zs, t0s


def zeta_num(R: NumField, C, n: int, target: int) -> InfLaurent:
    """sum over monic a of a^(-n), summed degree shell by degree shell until
    two consecutive shells sit above the target valuation."""
    acc = R.zero(R.cap)
    good = 0
    d = 0
    while good < 2:
        shell = R.zero(R.cap)
        for a in C.monics(d):
            shell = shell + R.from_theta_poly(a).inverse() ** n
        acc = acc + shell
        good = good + 1 if shell.val_lower() >= target else 0
        d += 1
        if d > 14:
            raise SeriesPrecisionError(f"zeta shell sums did not reach y^{target} by degree 14")
    return acc


def lattice_double_sum(R: NumField, C, z: InfLaurent, n: int, rel_target: int, bmax: int = 6) -> InfLaurent:
    """sum over (a, b) != (0, 0) of (a z + b)^(-n), truncated by degree.

    Grown shell by shell (pairs with max(deg a, deg b) = d) until two
    consecutive shells sit rel_target y-digits above the valuation of the
    running sum.  The target is *relative* because such sums can be very
    small.  Shell decay relies on the cancellation inside each shell, so
    this is a stabilization criterion, not a proof; it is only used as a
    cross-check against the u-expansion path, which is the exact one.
    """

    def nonzero_up_to(d):
        out = []
        for dd in range(d + 1):
            for a in C.monics(dd):
                for c in range(1, C.F.order):
                    out.append(a.scale(c))
        return out

    total = R.zero(R.cap)
    good = 0
    for d in range(bmax):
        shell = R.zero(R.cap)
        new = [a.scale(c) for a in C.monics(d) for c in range(1, C.F.order)]
        older = nonzero_up_to(d - 1) if d else []
        zero = ThetaPoly.zero(C.F)
        pairs = []
        for a in new:
            for b in older + new + [zero]:
                pairs.append((a, b))
        for b in new:
            for a in older + [zero]:
                pairs.append((a, b))
        for a, b in pairs:
            w = R.from_theta_poly(a) * z + R.from_theta_poly(b)
            shell = shell + w.inverse() ** n
        total = total + shell
        if d and not total.is_zero():
            good = good + 1 if shell.val_lower() >= total.valuation() + rel_target else 0
            if good >= 2:
                return total
    raise SeriesPrecisionError(
        f"lattice double sum did not reach {rel_target} relative digits by degree {bmax - 1}"
    )


def lattice_inner_sum(R: NumField, C, w: InfLaurent, n: int, rel_target: int, bmax: int = 8) -> InfLaurent:
    """sum over b in A of (w + b)^(-n) by degree shells, with the same
    two-consecutive-shell stabilization rule as the double sum."""
    total = R.zero(R.cap)
    good = 0
    for d in range(bmax):
        shell = R.zero(R.cap)
        bs = [ThetaPoly.zero(C.F)] if d == 0 else []
        for a in C.monics(d):
            for c in range(1, C.F.order):
                bs.append(a.scale(c))
        for b in bs:
            shell = shell + (w + R.from_theta_poly(b)).inverse() ** n
        total = total + shell
        if d and not total.is_zero():
            good = good + 1 if shell.val_lower() >= total.valuation() + rel_target else 0
            if good >= 2:
                return total
    raise SeriesPrecisionError(
        f"lattice inner sum did not reach {rel_target} relative digits by degree {bmax - 1}"
    )


def series_eval(
    R: NumField,
    f: DoubleSeries,
    u0: InfLaurent,
    t0: RatFunc | None = None,
    needed: int | None = None,
) -> InfLaurent:
    """Evaluate an exact u-expansion at a numeric u0 (and t = t0 if the
    series carries t), with a certified truncation tail.

    The tail certificate assumes the coefficient slope law
    (q-1) deg_theta(c_n) <= n + excess with the excess measured on the
    known coefficients (``max_theta_excess``); under it the tail beyond
    u^N is O(y^((N+1)(v(u0)-1) - excess)).  If that does not reach the
    needed precision the call raises with the truncation order to rerun at.
    """
    need = R.prec if needed is None else needed
    if t0 is not None:
        f = f.subs_t(t0)
    vu = u0.valuation()
    if vu < 2:
        raise ValueError("series_eval needs |u0| < q^(-1/(q-1)) for a convergent tail bound")
    excess = f.max_theta_excess()
    tail = (f.trunc + 1) * (vu - 1) - excess
    if tail < need:
        want = (need + excess) // (vu - 1) + 1
        raise SeriesPrecisionError(
            f"truncation u^{f.trunc} only certifies O(y^{tail}) < O(y^{need}); rerun with N >= {want}"
        )
    acc = R.zero(min(R.cap, tail))
    pw = None
    pw_exp = 0
    for nn, c in f.items():
        if pw is None:
            pw = u0 ** nn
        else:
            pw = pw * u0 ** (nn - pw_exp)
        pw_exp = nn
        pw = pw.clip(R.cap + 8)
        if c.degree() > 0:
            raise ValueError("series still carries t; pass t0")
        term = R.from_ratfunc(c.c[0]) * pw
        acc = acc + term.clip(R.cap)
        if nn * (vu - 1) - excess >= R.cap:
            break
    return acc
