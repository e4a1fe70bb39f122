"""Exact arithmetic layer.

Rings, from the bottom up:

* ``ThetaPoly``   -- dense polynomials in theta over F_q (codes from ffield.FF)
* ``RatFunc``     -- the fraction field K = F_q(theta), canonical reduced form
* ``TPoly``       -- polynomials in the deformation parameter t over a
                     coefficient ring (K here; the numeric layer plugs in its
                     own ring with the same duck type)
* ``DoubleSeries``-- truncated u-Laurent series with TPoly coefficients,
                     the common carrier for every expansion in the package

plus the three structural operations the rest of the package leans on:
``twist`` (Anderson twist), ``root_qm1`` ((q-1)-th roots of unit-leading
series) and ``echelonize`` (fraction-free row echelon over K with the
(u, then t)-graded pivot order).

Polynomial multiplication packs coefficient vectors into Python big ints
(one guarded digit per coefficient) so products run through the C integer
multiplier; exact division reverses the polynomials and Newton-inverts,
again with packed multiplications.  This keeps the fraction-free echelon
usable at the matrix sizes the search paths produce.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from .ffield import FF


class SeriesPrecisionError(Exception):
    """A quantity is indistinguishable from zero at the working truncation."""


# ---------------------------------------------------------------------------
# packed dense polynomial kernel (coefficient-code lists over FF)
# ---------------------------------------------------------------------------


def _pack(codes: list[int], bits: int) -> int:
    v = 0
    for c in reversed(codes):
        v = (v << bits) | c
    return v


def _unpack(v: int, bits: int, count: int) -> array:
    width = bits // 8
    raw = v.to_bytes(width * count + 16, "little")
    typecode = {16: "H", 32: "I", 64: "Q"}[bits]
    return array(typecode, raw[: width * count])


def _conv_prime(a: list[int], b: list[int], p: int, weight_room: int = 1) -> list[int]:
    """Convolution of F_p coefficient lists via big-int packing.

    weight_room leaves headroom for callers that linearly combine raw
    (unreduced) convolutions before digit extraction.
    """
    la, lb = len(a), len(b)
    maxdig = min(la, lb) * (p - 1) * (p - 1) * weight_room
    bits = 16 if maxdig < (1 << 16) else (32 if maxdig < (1 << 32) else 64)
    count = la + lb - 1
    raw = _pack(a, bits) * _pack(b, bits)
    return [d % p for d in _unpack(raw, bits, count)]


def poly_mul_codes(F: FF, a: list[int], b: list[int]) -> list[int]:
    """Dense product of coefficient-code lists over F = F_{p^n}."""
    if not a or not b:
        return []
    if len(a) == 1:
        c = a[0]
        mt = F.mul_table[c]
        return [mt[x] for x in b]
    if len(b) == 1:
        c = b[0]
        mt = F.mul_table[c]
        return [mt[x] for x in a]
    p, n = F.p, F.n
    if n == 1:
        return _conv_prime(a, b, p)

    # extension field: split into polynomial-basis components over F_p,
    # convolve componentwise, recombine with the basis structure constants
    # while still packed, and extract digits once per output component.
    la, lb = len(a), len(b)
    count = la + lb - 1
    maxdig = min(la, lb) * (p - 1) * (p - 1)
    room = n * n * (p - 1)
    bits = 16 if maxdig * room < (1 << 16) else (32 if maxdig * room < (1 << 32) else 64)

    comps_a = []
    comps_b = []
    for i in range(n):
        div = p**i
        comps_a.append(_pack([(c // div) % p for c in a], bits))
        comps_b.append(_pack([(c // div) % p for c in b], bits))

    raws = [[comps_a[i] * comps_b[j] for j in range(n)] for i in range(n)]
    out_digits = []
    for k in range(n):
        div = p**k
        acc = 0
        for i in range(n):
            bp = F.basis_prod[i]
            for j in range(n):
                w = (bp[j] // div) % p
                if w:
                    acc += w * raws[i][j]
        out_digits.append([d % p for d in _unpack(acc, bits, count)])
    scale = [p**k for k in range(n)]
    return [sum(out_digits[k][idx] * scale[k] for k in range(n)) for idx in range(count)]


def _codes_add(F: FF, a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    at = F.add_table
    out = list(a)
    for i, c in enumerate(b):
        if c:
            out[i] = at[out[i]][c]
    return out


def _series_inv_codes(F: FF, b: list[int], m: int) -> list[int]:
    """Inverse of the power series with coefficient codes b, mod x^m."""
    if not b or b[0] == 0:
        raise ZeroDivisionError("series inverse needs a unit constant term")
    x = [F.inv(b[0])]
    two = F.add(1, 1)
    prec = 1
    while prec < m:
        prec = min(2 * prec, m)
        t = poly_mul_codes(F, b[:prec], x)[:prec]
        s = [F.sub(two if i == 0 else 0, t[i] if i < len(t) else 0) for i in range(prec)]
        x = poly_mul_codes(F, x, s)[:prec]
    return x


# ---------------------------------------------------------------------------
# ThetaPoly
# ---------------------------------------------------------------------------


class ThetaPoly:
    """Dense polynomial in theta over F_q.  Immutable by convention."""

    __slots__ = ("F", "c")

    def __init__(self, F: FF, codes):
        self.F = F
        c = list(codes)
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(F: FF) -> "ThetaPoly":
        return ThetaPoly(F, ())

    @staticmethod
    def one(F: FF) -> "ThetaPoly":
        return ThetaPoly(F, (1,))

    @staticmethod
    def const(F: FF, code: int) -> "ThetaPoly":
        return ThetaPoly(F, (code,))

    @staticmethod
    def theta(F: FF, k: int = 1) -> "ThetaPoly":
        return ThetaPoly(F, (0,) * k + (1,))

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.c

    def is_one(self) -> bool:
        return self.c == (1,)

    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.c) - 1

    def lead(self) -> int:
        if not self.c:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.c[-1]

    def __eq__(self, other) -> bool:
        return isinstance(other, ThetaPoly) and self.F is other.F and self.c == other.c

    def __hash__(self):
        return hash((id(self.F), self.c))

    def __bool__(self):
        return bool(self.c)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "ThetaPoly") -> "ThetaPoly":
        return ThetaPoly(self.F, _codes_add(self.F, list(self.c), list(other.c)))

    def __neg__(self) -> "ThetaPoly":
        nt = self.F.neg_table
        return ThetaPoly(self.F, [nt[x] for x in self.c])

    def __sub__(self, other: "ThetaPoly") -> "ThetaPoly":
        return self + (-other)

    def __mul__(self, other: "ThetaPoly") -> "ThetaPoly":
        return ThetaPoly(self.F, poly_mul_codes(self.F, list(self.c), list(other.c)))

    def scale(self, code: int) -> "ThetaPoly":
        mt = self.F.mul_table[code]
        return ThetaPoly(self.F, [mt[x] for x in self.c])

    def shift(self, k: int) -> "ThetaPoly":
        if self.is_zero():
            return self
        return ThetaPoly(self.F, (0,) * k + self.c)

    def __pow__(self, k: int) -> "ThetaPoly":
        out = ThetaPoly.one(self.F)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def qspread(self, k: int, q: int) -> "ThetaPoly":
        """theta -> theta^(q^k); equals the q^k-th power since the
        coefficients lie in F_q (Frobenius fixes them)."""
        if k == 0 or self.is_zero():
            return self
        step = q**k
        out = [0] * (self.degree() * step + 1)
        for i, c in enumerate(self.c):
            out[i * step] = c
        return ThetaPoly(self.F, out)

    def divmod(self, other: "ThetaPoly") -> tuple["ThetaPoly", "ThetaPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        F = self.F
        rem = list(self.c)
        db = other.degree()
        quot = [0] * max(0, len(rem) - db)
        inv_lead = F.inv(other.lead())
        at, mt, nt = F.add_table, F.mul_table, F.neg_table
        bc = other.c
        for i in range(len(rem) - 1, db - 1, -1):
            r = rem[i]
            if r:
                f = mt[r][inv_lead]
                quot[i - db] = f
                nf = nt[f]
                off = i - db
                for j, c in enumerate(bc):
                    if c:
                        rem[off + j] = at[rem[off + j]][mt[nf][c]]
        return ThetaPoly(F, quot), ThetaPoly(F, rem[:db])

    def exact_div(self, other: "ThetaPoly") -> "ThetaPoly":
        """Quotient self/other assuming exact divisibility (Newton on the
        reversed polynomials; the caller guarantees divisibility, as the
        fraction-free echelon does)."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return self
        F = self.F
        dq = self.degree() - other.degree()
        if dq < 0:
            raise ValueError("not divisible: degree dropped")
        if other.degree() == 0:
            return self.scale(F.inv(other.c[0]))
        rb = list(other.c[::-1])
        ra = list(self.c[::-1])[: dq + 1]
        inv = _series_inv_codes(F, rb, dq + 1)
        qr = poly_mul_codes(F, ra, inv)[: dq + 1]
        if len(qr) < dq + 1:
            qr = qr + [0] * (dq + 1 - len(qr))
        return ThetaPoly(F, qr[::-1])

    def gcd(self, other: "ThetaPoly") -> "ThetaPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        if a.is_zero():
            return a
        return a.monic()

    def monic(self) -> "ThetaPoly":
        if self.is_zero() or self.lead() == 1:
            return self
        return self.scale(self.F.inv(self.lead()))

    def content_with(self, acc: "ThetaPoly | None") -> "ThetaPoly":
        return self if acc is None else acc.gcd(self)

    # -- rendering ------------------------------------------------------

    def _code_str(self, code: int) -> str:
        F = self.F
        if F.n == 1:
            return str(code)
        parts = []
        for i, d in enumerate(F.to_vec(code)):
            if not d:
                continue
            base = "w" if i == 1 else (f"w^{i}" if i else "")
            lead = "" if (d == 1 and i) else str(d)
            parts.append((lead + ("*" if lead and base else "") + base) or "1")
        return "(" + " + ".join(parts) + ")" if len(parts) > 1 else (parts[0] if parts else "0")

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.degree(), -1, -1):
            c = self.c[i]
            if not c:
                continue
            cs = self._code_str(c)
            if i == 0:
                parts.append(cs)
            else:
                var = "theta" if i == 1 else f"theta^{i}"
                parts.append(var if cs == "1" else f"{cs}*{var}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ThetaPoly({self})"


# ---------------------------------------------------------------------------
# RatFunc
# ---------------------------------------------------------------------------


class RatFunc:
    """Element of K = F_q(theta) in reduced form with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: ThetaPoly, den: ThetaPoly | None = None, reduce: bool = True):
        F = num.F
        if den is None:
            den = ThetaPoly.one(F)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            den = ThetaPoly.one(F)
        elif reduce and not den.is_one():
            g = num.gcd(den)
            if not g.is_one():
                num = num.exact_div(g)
                den = den.exact_div(g)
        if not den.is_one() and den.lead() != 1:
            inv = F.inv(den.lead())
            num = num.scale(inv)
            den = den.scale(inv)
        self.num = num
        self.den = den

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(F: FF) -> "RatFunc":
        return RatFunc(ThetaPoly.zero(F))

    @staticmethod
    def one(F: FF) -> "RatFunc":
        return RatFunc(ThetaPoly.one(F))

    @staticmethod
    def of(x, F: FF) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, ThetaPoly):
            return RatFunc(x)
        if isinstance(x, int):
            return RatFunc(ThetaPoly.const(F, x % F.p if F.n == 1 else x))
        raise TypeError(f"cannot coerce {x!r} into K")

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_poly(self) -> bool:
        return self.den.is_one()

    @property
    def F(self) -> FF:
        return self.num.F

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatFunc)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return not self.is_zero()

    def deg_estimate(self) -> int:
        """deg num - deg den: the theta-adic size of the value."""
        return self.num.degree() - self.den.degree()

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.num + other.num, reduce=False)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if self.is_zero() or other.is_zero():
            return RatFunc.zero(self.F)
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.num * other.num, reduce=False)
        a, b = self.num, other.den
        g1 = a.gcd(b)
        if not g1.is_one():
            a, b = a.exact_div(g1), b.exact_div(g1)
        c, d = other.num, self.den
        g2 = c.gcd(d)
        if not g2.is_one():
            c, d = c.exact_div(g2), d.exact_div(g2)
        return RatFunc(a * c, b * d, reduce=False)

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in K")
        return RatFunc(self.den, self.num, reduce=False)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        return self * other.inverse()

    def __pow__(self, k: int) -> "RatFunc":
        if k < 0:
            return self.inverse() ** (-k)
        out = RatFunc.one(self.F)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def qpow(self, k: int, q: int) -> "RatFunc":
        """The q^k-th power, done by exponent spreading (exact, no gcd)."""
        if k == 0 or self.is_zero():
            return self
        return RatFunc(self.num.qspread(k, q), self.den.qspread(k, q), reduce=False)

    def subs_theta(self, value: "RatFunc") -> "RatFunc":
        """Evaluate at theta = value (a K-element)."""
        F = self.F

        def horner(poly: ThetaPoly) -> RatFunc:
            acc = RatFunc.zero(F)
            for code in reversed(poly.c):
                acc = acc * value + RatFunc(ThetaPoly.const(F, code))
            return acc

        return horner(self.num) / horner(self.den)

    def __str__(self) -> str:
        if self.den.is_one():
            return str(self.num)
        ns, ds = str(self.num), str(self.den)
        if " " in ns:
            ns = f"({ns})"
        if " " in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self) -> str:
        return f"RatFunc({self})"


# ---------------------------------------------------------------------------
# ring adapters
# ---------------------------------------------------------------------------


class KRing:
    """Coefficient-ring adapter for K = F_q(theta)."""

    kind = "K"

    def __init__(self, F: FF, q: int):
        self.F = F
        self.q = q
        self.key = ("K", F.p, F.n)

    def zero(self):
        return RatFunc.zero(self.F)

    def one(self):
        return RatFunc.one(self.F)

    def coerce(self, x):
        return RatFunc.of(x, self.F)

    def is_exact(self) -> bool:
        return True


# ---------------------------------------------------------------------------
# TPoly
# ---------------------------------------------------------------------------


class TPoly:
    """Polynomial in t over a coefficient ring (K or the numeric ring)."""

    __slots__ = ("ring", "c")

    def __init__(self, ring, coeffs):
        self.ring = ring
        c = list(coeffs)
        while c and c[-1].is_zero():
            c.pop()
        self.c = c

    @staticmethod
    def zero(ring) -> "TPoly":
        return TPoly(ring, [])

    @staticmethod
    def const(ring, x) -> "TPoly":
        return TPoly(ring, [ring.coerce(x)])

    @staticmethod
    def t(ring) -> "TPoly":
        return TPoly(ring, [ring.zero(), ring.one()])

    def is_zero(self) -> bool:
        return not self.c

    def degree(self) -> int:
        return len(self.c) - 1

    def coeff(self, j: int):
        return self.c[j] if 0 <= j < len(self.c) else self.ring.zero()

    def is_tfree(self) -> bool:
        return len(self.c) <= 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, TPoly) or self.ring.key != other.ring.key:
            return False
        return len(self.c) == len(other.c) and all(a == b for a, b in zip(self.c, other.c))

    def __bool__(self):
        return bool(self.c)

    def __add__(self, other: "TPoly") -> "TPoly":
        assert self.ring.key == other.ring.key, "mixed coefficient rings"
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] = out[i] + x
        return TPoly(self.ring, out)

    def __neg__(self) -> "TPoly":
        return TPoly(self.ring, [-x for x in self.c])

    def __sub__(self, other: "TPoly") -> "TPoly":
        return self + (-other)

    def __mul__(self, other: "TPoly") -> "TPoly":
        assert self.ring.key == other.ring.key, "mixed coefficient rings"
        a, b = self.c, other.c
        if not a or not b:
            return TPoly(self.ring, [])
        if len(a) == 1:
            s = a[0]
            return TPoly(self.ring, [s * x for x in b])
        if len(b) == 1:
            s = b[0]
            return TPoly(self.ring, [s * x for x in a])
        out = [self.ring.zero() for _ in range(len(a) + len(b) - 1)]
        for i, x in enumerate(a):
            if x.is_zero():
                continue
            for j, y in enumerate(b):
                if not y.is_zero():
                    out[i + j] = out[i + j] + x * y
        return TPoly(self.ring, out)

    def scale(self, s) -> "TPoly":
        s = self.ring.coerce(s)
        return TPoly(self.ring, [s * x for x in self.c])

    def twist(self, k: int, q: int) -> "TPoly":
        """Anderson twist: q^k-th power of each coefficient; t untouched."""
        return TPoly(self.ring, [x.qpow(k, q) for x in self.c])

    def subs_t(self, value):
        """Horner evaluation at t = value (a ring element)."""
        acc = self.ring.zero()
        for x in reversed(self.c):
            acc = acc * value + x
        return acc

    def divexact_linear(self, c) -> "TPoly":
        """Exact division by (t - c); raises if the remainder is nonzero."""
        c = self.ring.coerce(c)
        if self.is_zero():
            return self
        out = [self.ring.zero()] * len(self.c)
        carry = self.ring.zero()
        for j in range(len(self.c) - 1, -1, -1):
            cur = self.c[j] + carry * c if j < len(self.c) - 1 else self.c[j]
            if j == 0:
                rem = cur
                if not rem.is_zero():
                    raise ValueError("TPoly not divisible by the linear factor")
            else:
                out[j - 1] = cur
                carry = cur
        return TPoly(self.ring, out[: len(self.c) - 1])

    def max_theta_deg(self) -> int:
        """max over t-coefficients of deg num - deg den; -10**9 if zero."""
        if self.is_zero():
            return -(10**9)
        return max(x.deg_estimate() for x in self.c if not x.is_zero())

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for j in range(self.degree(), -1, -1):
            x = self.coeff(j)
            if x.is_zero():
                continue
            xs = str(x)
            if any(op in xs for op in (" + ", " - ", "/")):
                xs = f"({xs})"
            if j == 0:
                parts.append(xs)
            else:
                var = "t" if j == 1 else f"t^{j}"
                parts.append(var if xs == "1" else f"{xs}*{var}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"TPoly({self})"


# ---------------------------------------------------------------------------
# grading tags
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GradTag:
    """(weight, second weight, type, depth) bookkeeping for series.

    For classical forms nu = 0 and w is the usual weight; for deformations
    w plays the role of the first weight.  Types are normalized modulo
    q - 1 (trivial group when q = 2).  Arithmetic on tagged series
    combines tags when both are present and silently drops them otherwise.
    """

    w: int
    nu: int
    m: int
    depth: int | None
    qm1: int

    def __post_init__(self):
        object.__setattr__(self, "m", self.m % self.qm1 if self.qm1 > 0 else 0)

    def mul(self, other: "GradTag | None") -> "GradTag | None":
        if other is None or other.qm1 != self.qm1:
            return None
        d = None if self.depth is None or other.depth is None else self.depth + other.depth
        return GradTag(self.w + other.w, self.nu + other.nu, self.m + other.m, d, self.qm1)

    def pow(self, k: int) -> "GradTag":
        d = None if self.depth is None else self.depth * k
        return GradTag(self.w * k, self.nu * k, self.m * k, d, self.qm1)

    def twisted(self, k: int, q: int) -> "GradTag":
        return GradTag(self.w * q**k, self.nu, self.m, self.depth, self.qm1)


# ---------------------------------------------------------------------------
# DoubleSeries
# ---------------------------------------------------------------------------


class DoubleSeries:
    """Truncated Laurent series in u with TPoly coefficients.

    coeffs[i] is the coefficient of u^(n0 + i); entries may be None (zero).
    Coefficients are trusted for exponents <= trunc; reading past trunc is
    a programming error and asserts.
    """

    __slots__ = ("ring", "n0", "coeffs", "trunc", "tag")

    def __init__(self, ring, n0: int, coeffs, trunc: int, tag: GradTag | None = None):
        self.ring = ring
        cs = list(coeffs)
        # normalize: drop leading zeros, clip past truncation
        while cs and (cs[0] is None or cs[0].is_zero()):
            cs.pop(0)
            n0 += 1
        if n0 + len(cs) - 1 > trunc:
            cs = cs[: max(0, trunc - n0 + 1)]
        while cs and (cs[-1] is None or cs[-1].is_zero()):
            cs.pop()
        self.n0 = n0 if cs else 0
        self.coeffs = [None if (c is None or c.is_zero()) else c for c in cs]
        self.trunc = trunc
        self.tag = tag

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(ring, trunc: int) -> "DoubleSeries":
        return DoubleSeries(ring, 0, [], trunc)

    @staticmethod
    def const(ring, x, trunc: int, tag=None) -> "DoubleSeries":
        return DoubleSeries(ring, 0, [TPoly.const(ring, x)], trunc, tag)

    @staticmethod
    def u_pow(ring, n: int, trunc: int, tag=None) -> "DoubleSeries":
        return DoubleSeries(ring, n, [TPoly.const(ring, 1)], trunc, tag)

    @staticmethod
    def from_u_coeffs(ring, n0: int, coeffs, trunc: int, tag=None) -> "DoubleSeries":
        return DoubleSeries(ring, n0, coeffs, trunc, tag)

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        """Zero through the truncation order (no precision claim beyond)."""
        return not self.coeffs

    def valuation(self) -> int:
        if not self.coeffs:
            raise SeriesPrecisionError(f"series is zero through u^{self.trunc}")
        return self.n0

    def coeff(self, n: int) -> TPoly:
        assert n <= self.trunc, f"coefficient u^{n} beyond truncation {self.trunc}"
        i = n - self.n0
        if not self.coeffs or i < 0 or i >= len(self.coeffs):
            return TPoly.zero(self.ring)
        c = self.coeffs[i]
        return TPoly.zero(self.ring) if c is None else c

    def support(self) -> list[int]:
        return [self.n0 + i for i, c in enumerate(self.coeffs) if c is not None]

    def items(self):
        for i, c in enumerate(self.coeffs):
            if c is not None:
                yield self.n0 + i, c

    def last_exponent(self) -> int:
        return self.n0 + len(self.coeffs) - 1

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "DoubleSeries"):
        if self.ring.key != other.ring.key:
            raise TypeError("mixed coefficient rings; convert explicitly first")

    def __add__(self, other: "DoubleSeries") -> "DoubleSeries":
        self._check(other)
        trunc = min(self.trunc, other.trunc)
        if not self.coeffs:
            return other.truncate(trunc)
        if not other.coeffs:
            return self.truncate(trunc)
        n0 = min(self.n0, other.n0)
        top = min(trunc, max(self.last_exponent(), other.last_exponent()))
        out = [None] * (top - n0 + 1)
        for n, c in self.items():
            if n <= top:
                out[n - n0] = c
        for n, c in other.items():
            if n <= top:
                cur = out[n - n0]
                out[n - n0] = c if cur is None else cur + c
        tag = self.tag if (self.tag is not None and self.tag == other.tag) else None
        return DoubleSeries(self.ring, n0, out, trunc, tag)

    def __neg__(self) -> "DoubleSeries":
        return DoubleSeries(
            self.ring, self.n0, [None if c is None else -c for c in self.coeffs], self.trunc, self.tag
        )

    def __sub__(self, other: "DoubleSeries") -> "DoubleSeries":
        return self + (-other)

    def __mul__(self, other: "DoubleSeries") -> "DoubleSeries":
        self._check(other)
        if not self.coeffs or not other.coeffs:
            # product with a factor that is zero to its truncation; the
            # zero-boxed factor is O(u^(trunc+1))
            va = self.n0 if self.coeffs else self.trunc + 1
            vb = other.n0 if other.coeffs else other.trunc + 1
            return DoubleSeries.zero(self.ring, min(self.trunc + vb, other.trunc + va))
        trunc = min(self.trunc + other.n0, other.trunc + self.n0)
        n0 = self.n0 + other.n0
        out = [None] * (trunc - n0 + 1)
        for i, ca in self.items():
            if i + other.n0 > trunc:
                break
            for j, cb in other.items():
                n = i + j
                if n > trunc:
                    break
                prod = ca * cb
                cur = out[n - n0]
                out[n - n0] = prod if cur is None else cur + prod
        tag = self.tag.mul(other.tag) if self.tag is not None else None
        return DoubleSeries(self.ring, n0, out, trunc, tag)

    def scale(self, s) -> "DoubleSeries":
        """Multiply by a single TPoly / ring element."""
        if not isinstance(s, TPoly):
            s = TPoly.const(self.ring, s)
        if s.is_zero():
            return DoubleSeries.zero(self.ring, self.trunc)
        return DoubleSeries(
            self.ring, self.n0, [None if c is None else c * s for c in self.coeffs], self.trunc, None
        )

    def shift_u(self, k: int) -> "DoubleSeries":
        return DoubleSeries(self.ring, self.n0 + k, list(self.coeffs), self.trunc + k, None)

    def truncate(self, N: int) -> "DoubleSeries":
        if N >= self.trunc:
            return self
        return DoubleSeries(self.ring, self.n0, self.coeffs[: max(0, N - self.n0 + 1)], N, self.tag)

    def __pow__(self, k: int) -> "DoubleSeries":
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return DoubleSeries.const(self.ring, 1, self.trunc)
        out = None
        base = self
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def inverse(self) -> "DoubleSeries":
        """Inverse of a series whose leading coefficient is a unit of the
        coefficient ring (t-degree 0 required on the leading TPoly)."""
        if not self.coeffs:
            raise SeriesPrecisionError("cannot invert a series that is zero to precision")
        lead = self.coeffs[0]
        if lead.degree() != 0:
            raise ValueError("series inverse needs a t-free unit leading coefficient")
        v = self.n0
        rel = self.trunc - 2 * v  # absolute truncation of the inverse
        lead_inv = TPoly(self.ring, [_ring_inv(self.ring, lead.c[0])])
        # unit part: self = u^v * (lead + higher); invert the unit part
        out: list[TPoly | None] = [lead_inv]
        length = rel + v + 1  # exponents -v .. rel
        for n in range(1, length):
            # coefficient of u^n in (unit * inv) must vanish
            acc = None
            for i in range(1, min(n, len(self.coeffs) - 1) + 1):
                a = self.coeffs[i]
                if a is None:
                    continue
                b = out[n - i] if n - i < len(out) else None
                if b is None:
                    continue
                term = a * b
                acc = term if acc is None else acc + term
            out.append(None if acc is None else -(lead_inv * acc))
        return DoubleSeries(self.ring, -v, out, rel, None)

    def subs_t(self, value) -> "DoubleSeries":
        """Substitute a ring element for t in every coefficient."""
        value = self.ring.coerce(value)
        out = []
        for c in self.coeffs:
            if c is None:
                out.append(None)
            else:
                v = c.subs_t(value)
                out.append(None if v.is_zero() else TPoly(self.ring, [v]))
        return DoubleSeries(self.ring, self.n0, out, self.trunc, None)

    def map_coeffs(self, fn, ring=None, trunc=None, tag=None) -> "DoubleSeries":
        ring = ring or self.ring
        return DoubleSeries(
            ring,
            self.n0,
            [None if c is None else fn(c) for c in self.coeffs],
            self.trunc if trunc is None else trunc,
            tag,
        )

    # -- comparisons ----------------------------------------------------

    def eq_prec(self, other: "DoubleSeries") -> bool:
        """Equality through the smaller truncation order."""
        self._check(other)
        N = min(self.trunc, other.trunc)
        a = self.truncate(N)
        b = other.truncate(N)
        if a.is_zero() and b.is_zero():
            return True
        if a.is_zero() != b.is_zero() or a.n0 != b.n0 or len(a.coeffs) != len(b.coeffs):
            return False
        for x, y in zip(a.coeffs, b.coeffs):
            if (x is None) != (y is None):
                return False
            if x is not None and x != y:
                return False
        return True

    def max_theta_excess(self) -> int:
        """max over support of (deg_theta(c_n) * (q-1) - n), an integer;
        the numeric evaluator uses it to certify truncation tails."""
        qm1 = self.ring.q - 1
        best = None
        for n, c in self.items():
            d = c.max_theta_deg()
            if d <= -(10**8):
                continue
            e = d * qm1 - n
            best = e if best is None else max(best, e)
        return 0 if best is None else max(0, best)

    # -- twisting -------------------------------------------------------

    def twist(self, k: int) -> "DoubleSeries":
        """Anderson twist: coefficients to the q^k power, u-exponents scaled
        by q^k.  For t-free series this is just the q^k-th power."""
        if k == 0:
            return self
        q = self.ring.q
        step = q**k
        if not self.coeffs:
            return DoubleSeries.zero(self.ring, self.trunc * step)
        out = [None] * ((len(self.coeffs) - 1) * step + 1)
        for i, c in enumerate(self.coeffs):
            if c is not None:
                out[i * step] = c.twist(k, q)
        tag = self.tag.twisted(k, q) if self.tag is not None else None
        return DoubleSeries(self.ring, self.n0 * step, out, self.trunc * step, tag)

    # -- serialization --------------------------------------------------

    def to_arrays(self):
        """Nested plain-int structure: [n0, trunc, [[t-coeff codes...]...]].

        Only supported over K with polynomial coefficients; raises if a
        denominator is nontrivial.
        """
        rows = []
        for c in self.coeffs:
            if c is None:
                rows.append(None)
                continue
            entry = []
            for x in c.c:
                if not x.is_poly():
                    raise ValueError("to_arrays requires polynomial coefficients")
                entry.append(list(x.num.c))
            rows.append(entry)
        return [self.n0, self.trunc, rows]

    @staticmethod
    def from_arrays(ring, data, tag=None) -> "DoubleSeries":
        n0, trunc, rows = data
        coeffs = []
        for entry in rows:
            if entry is None:
                coeffs.append(None)
            else:
                coeffs.append(
                    TPoly(ring, [RatFunc(ThetaPoly(ring.F, codes)) for codes in entry])
                )
        return DoubleSeries(ring, n0, coeffs, trunc, tag)

    def __str__(self) -> str:
        if not self.coeffs:
            return f"O(u^{self.trunc + 1})"
        parts = []
        for n, c in self.items():
            cs = str(c)
            if " " in cs or "/" in cs:
                cs = f"({cs})"
            if n == 0:
                parts.append(cs)
            else:
                var = "u" if n == 1 else f"u^{n}"
                parts.append(var if cs == "1" else f"{cs}*{var}")
        return " + ".join(parts) + f" + O(u^{self.trunc + 1})"

    def __repr__(self) -> str:
        head = str(self)
        if len(head) > 120:
            head = head[:117] + "..."
        return f"DoubleSeries({head})"


def _ring_inv(ring, x):
    if hasattr(x, "inverse"):
        return x.inverse()
    raise TypeError("coefficient not invertible")


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------


def twist(f: DoubleSeries, k: int) -> DoubleSeries:
    return f.twist(k)


def root_qm1(f: DoubleSeries, leading) -> DoubleSeries:
    """The series r with r^(q-1) = f and r = leading * u^(v/(q-1)) * (1 + ...).

    Preconditions: f's valuation v is divisible by q - 1, its support sits
    in v + (q-1)Z, its leading coefficient is t-free and equals
    leading^(q-1).  Works coefficientwise; only divides by field constants,
    so A-integral inputs give A-integral roots.
    """
    ring = f.ring
    q = ring.q
    qm1 = q - 1
    v = f.valuation()
    if v % qm1:
        raise ValueError(f"valuation {v} not divisible by q-1 = {qm1}")
    if any((n - v) % qm1 for n in f.support()):
        raise ValueError("support is not contained in a single class mod q-1")
    lead = f.coeffs[0]
    if lead.degree() != 0:
        raise ValueError("leading coefficient must be t-free")
    leading = ring.coerce(leading)
    if not (leading ** qm1 == lead.c[0]):
        raise ValueError("leading^(q-1) does not match the leading coefficient of f")

    # normalize to the unit part: f = lead * u^v * (1 + delta), solve
    # s^(q-1) = 1 + delta with s = 1 + ...; support of s is (q-1)Z.
    lead_inv = lead.c[0].inverse()
    M = (f.trunc - v) // qm1  # number of solvable steps in u^(q-1)
    unit = {}
    for n, c in f.items():
        unit[(n - v) // qm1] = c.scale(lead_inv)
    # s and its partial powers s^2..s^(q-1), coefficient lists indexed by
    # the u^(q-1)-step; powers[m] holds s^(m+1).
    one = TPoly.const(ring, 1)
    powers = [[one] for _ in range(qm1)]
    szero = TPoly.zero(ring)

    def conv_at(pa, pb, K):
        acc = None
        la, lb = len(pa), len(pb)
        for i in range(max(0, K - lb + 1), min(K, la - 1) + 1):
            a = pa[i]
            b = pb[K - i]
            if a is None or b is None:
                continue
            term = a * b
            acc = term if acc is None else acc + term
        return acc

    s = powers[0]
    for K in range(1, M + 1):
        s.append(szero)
        for m in range(1, qm1):
            powers[m].append(conv_at(powers[m - 1], s, K) or szero)
        target = unit.get(K, szero)
        cur = powers[qm1 - 1][K]
        # (s^(q-1))_K = C + (q-1) s_K with s_K currently 0; q-1 = -1 in F_p
        sK = cur - target
        if not sK.is_zero():
            if sK.degree() != 0:
                raise ValueError("root coefficient picked up a t-dependence")
            s[K] = sK
            for m in range(1, qm1):
                # d(s^(m+1))_K / ds_K = m+1, as a prime-field scalar
                bump = sK.scale(ring.coerce((m + 1) % ring.F.p))
                powers[m][K] = powers[m][K] + bump

    out = [None] * (M * qm1 + 1)
    for i, c in enumerate(s):
        if c is not None and not c.is_zero():
            out[i * qm1] = c
    # s is known through step M, i.e. through exponent (M+1)(q-1) - 1
    rel_trunc = (M + 1) * qm1 - 1
    root = DoubleSeries(ring, 0, out, rel_trunc)
    root = root.scale(leading).shift_u(v // qm1)
    return DoubleSeries(root.ring, root.n0, root.coeffs, v // qm1 + rel_trunc, None)


@dataclass
class EchelonBasis:
    rows: list
    valuations: list
    pivots: list
    combos: list
    rank: int
    trunc: int
    t_max: int

    def reduce(self, f: DoubleSeries) -> DoubleSeries:
        """Remainder of f after elimination against the basis rows."""
        g = f.truncate(min(f.trunc, self.trunc))
        for row, (pn, pj) in zip(self.rows, self.pivots):
            if g.is_zero():
                break
            if pn < g.n0 or pn > g.trunc:
                continue
            cg = g.coeff(pn).coeff(pj)
            if cg.is_zero():
                continue
            piv = row.coeff(pn).coeff(pj)
            g = g - row.scale(cg / piv)
        return g


def echelonize(series_list, t_max: int | None = None) -> EchelonBasis:
    """Fraction-free row echelon of a family of K-coefficient series.

    Coordinates are pairs (u-exponent ascending, then t-exponent ascending);
    ties between candidate pivot rows are broken by input order.  Entries
    are cleared to F_q[theta] rows and updated Bareiss-style, so every
    division is exact.  Returns the echelon rows (renormalized by content),
    their u-valuations, pivot coordinates, and the combination of inputs
    producing each row.
    """
    series_list = list(series_list)
    if not series_list:
        return EchelonBasis([], [], [], [], 0, 0, 0)
    ring = series_list[0].ring
    F = ring.F
    trunc = min(s.trunc for s in series_list)
    if t_max is None:
        t_max = 0
        for s in series_list:
            for _, c in s.items():
                t_max = max(t_max, c.degree())
    n_min = min((s.n0 for s in series_list if not s.is_zero()), default=0)
    coords = [(n, j) for n in range(n_min, trunc + 1) for j in range(t_max + 1)]
    coord_index = {c: i for i, c in enumerate(coords)}
    width = len(coords)
    nrows = len(series_list)

    one = ThetaPoly.one(F)
    rows = []
    for ridx, s in enumerate(series_list):
        # clear denominators across the row
        den = one
        for _, c in s.items():
            for x in c.c:
                if not x.den.is_one():
                    g = den.gcd(x.den)
                    den = den * x.den.exact_div(g)
        entries = [None] * width
        for n, c in s.items():
            if n > trunc:
                break
            for j, x in enumerate(c.c):
                if x.is_zero() or j > t_max:
                    continue
                val = x.num * den.exact_div(x.den)
                entries[coord_index[(n, j)]] = val
        aug = [None] * nrows
        aug[ridx] = den
        rows.append((entries, aug))

    prev_pivot = one
    pivot_positions = []
    basis_rows = []
    active = list(range(nrows))
    for cidx in range(width):
        pivot_row = None
        for r in active:
            e = rows[r][0][cidx]
            if e is not None and not e.is_zero():
                pivot_row = r
                break
        if pivot_row is None:
            continue
        active.remove(pivot_row)
        piv = rows[pivot_row][0][cidx]
        for r in active:
            entries, aug = rows[r]
            m = entries[cidx]
            new_entries = [None] * width
            new_aug = [None] * nrows
            for i in range(cidx, width):
                a = entries[i]
                b = rows[pivot_row][0][i]
                acc = None
                if a is not None:
                    acc = piv * a
                if m is not None and b is not None:
                    t = m * b
                    acc = -t if acc is None else acc - t
                if acc is not None and not acc.is_zero():
                    new_entries[i] = acc.exact_div(prev_pivot)
            for i in range(nrows):
                a = aug[i]
                b = rows[pivot_row][1][i]
                acc = None
                if a is not None:
                    acc = piv * a
                if m is not None and b is not None:
                    t = m * b
                    acc = -t if acc is None else acc - t
                if acc is not None and not acc.is_zero():
                    new_aug[i] = acc.exact_div(prev_pivot)
            rows[r] = (new_entries, new_aug)
        pivot_positions.append((pivot_row, cidx))
        basis_rows.append(pivot_row)
        prev_pivot = piv
        if not active:
            break

    out_rows = []
    out_vals = []
    out_pivots = []
    out_combos = []
    for r, cidx in pivot_positions:
        entries, aug = rows[r]
        content = None
        for e in entries:
            if e is not None:
                content = e.content_with(content)
        for e in aug:
            if e is not None:
                content = e.content_with(content)
        if content is not None and not content.is_one():
            entries = [None if e is None else e.exact_div(content) for e in entries]
            aug = [None if e is None else e.exact_div(content) for e in aug]
        per_exp: dict[int, list] = {}
        for i, e in enumerate(entries):
            if e is not None:
                n, j = coords[i]
                per_exp.setdefault(n, [RatFunc.zero(F)] * (t_max + 1))[j] = RatFunc(e)
        n0 = min(per_exp)
        buf = [None] * (max(per_exp) - n0 + 1)
        for n, cl in per_exp.items():
            buf[n - n0] = TPoly(ring, cl)
        out_rows.append(DoubleSeries(ring, n0, buf, trunc))
        out_pivots.append(coords[cidx])
        out_vals.append(coords[cidx][0])
        out_combos.append([RatFunc.zero(F) if a is None else RatFunc(a) for a in aug])

    return EchelonBasis(out_rows, out_vals, out_pivots, out_combos, len(out_rows), trunc, t_max)
