"""Dense polynomial kernels for the linear-algebra heavy paths.

The echelon searches and resultant expansions spend nearly all their time
multiplying polynomials over F_q[theta].  For q = 2 a polynomial is a bit
vector, so we pack it into a Python int and use shift/xor arithmetic; that
is two to three orders of magnitude faster than the generic coefficient
lists and is what makes the w <= 24 scans and the certificate runs fit
their time budgets.  Everything here is exact; the packed and generic
backends implement the same small protocol and are chosen per field.

Series here are u-expansions with coefficients in F_q[theta][t], stored as
a dict u-exponent -> list of theta-polynomials indexed by t-degree.  Only
what the searches need is implemented (products, scaled sums, valuation);
the authoritative series type remains DoubleSeries.
"""

from .exactalg import RatFunc, ThetaPoly


def pack_theta(tp: ThetaPoly) -> int:
    x = 0
    for i, c in enumerate(tp.c):
        if c:
            x |= 1 << i
    return x


def unpack_theta(F, x: int) -> ThetaPoly:
    if x == 0:
        return ThetaPoly.zero(F)
    return ThetaPoly(F, [(x >> i) & 1 for i in range(x.bit_length())])


def gf2_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    # iterate over the sparser operand
    if a.bit_count() > b.bit_count():
        a, b = b, a
    acc = 0
    while a:
        low = a & -a
        acc ^= b << (low.bit_length() - 1)
        a ^= low
    return acc


def gf2_divexact(a: int, b: int) -> int:
    """a / b when the division is exact (remainder must vanish)."""
    if a == 0:
        return 0
    q = 0
    db = b.bit_length()
    while a:
        k = a.bit_length() - db
        if k < 0:
            raise ArithmeticError("inexact polynomial division")
        q |= 1 << k
        a ^= b << k
    return q


def gf2_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def gf2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, gf2_mod(a, b)
    return a


class OpsGF2:
    """theta-polynomials over F_2 packed into ints."""

    def __init__(self, F):
        assert F.order == 2
        self.F = F
        self.one = 1
        self.zero = 0

    def pack(self, tp: ThetaPoly) -> int:
        return pack_theta(tp)

    def unpack(self, x: int) -> ThetaPoly:
        return unpack_theta(self.F, x)

    mul = staticmethod(gf2_mul)
    divexact = staticmethod(gf2_divexact)
    gcd = staticmethod(gf2_gcd)

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    @staticmethod
    def sub(a: int, b: int) -> int:
        return a ^ b

    @staticmethod
    def neg(a: int) -> int:
        return a

    @staticmethod
    def is_zero(x: int) -> bool:
        return x == 0

    @staticmethod
    def size(x: int) -> int:
        return x.bit_length()


class OpsGeneric:
    """Plain ThetaPoly arithmetic; used for q > 2 where sizes stay small."""

    def __init__(self, F):
        self.F = F
        self.one = ThetaPoly.one(F)
        self.zero = ThetaPoly.zero(F)

    @staticmethod
    def pack(tp: ThetaPoly) -> ThetaPoly:
        return tp

    @staticmethod
    def unpack(tp: ThetaPoly) -> ThetaPoly:
        return tp

    @staticmethod
    def mul(a: ThetaPoly, b: ThetaPoly) -> ThetaPoly:
        return a * b

    @staticmethod
    def divexact(a: ThetaPoly, b: ThetaPoly) -> ThetaPoly:
        return a.exact_div(b)

    @staticmethod
    def gcd(a: ThetaPoly, b: ThetaPoly) -> ThetaPoly:
        return a.gcd(b)

    @staticmethod
    def add(a: ThetaPoly, b: ThetaPoly) -> ThetaPoly:
        return a + b

    @staticmethod
    def sub(a: ThetaPoly, b: ThetaPoly) -> ThetaPoly:
        return a - b

    @staticmethod
    def neg(a: ThetaPoly) -> ThetaPoly:
        return -a

    @staticmethod
    def is_zero(x: ThetaPoly) -> bool:
        return x.is_zero()

    @staticmethod
    def size(x: ThetaPoly) -> int:
        return x.degree() + 1 if not x.is_zero() else 0


def ops_for(F):
    return OpsGF2(F) if F.order == 2 else OpsGeneric(F)


def _coeff_rows(tpoly):
    """TPoly -> list of integral ThetaPoly per t-degree (denominators must
    have been cleared by the caller)."""
    out = []
    for rf in tpoly.c:
        if not rf.den.is_one():
            raise ValueError("non-integral coefficient in packed series")
        out.append(rf.num)
    return out


class PackedSeries:
    """u-expansion with F_q[theta][t] coefficients in backend form.

    c maps u-exponent -> list (by t-degree) of backend polynomials; trailing
    zero entries are trimmed so the t-degree is len-1.
    """

    __slots__ = ("ops", "trunc", "c")

    def __init__(self, ops, trunc: int, c: dict):
        self.ops = ops
        self.trunc = trunc
        self.c = c

    @classmethod
    def from_double_series(cls, ops, ds):
        c = {}
        for n, tp in ds.items():
            row = [ops.pack(x) for x in _coeff_rows(tp)]
            while row and ops.is_zero(row[-1]):
                row.pop()
            if row:
                c[n] = row
        return cls(ops, ds.trunc, c)

    @classmethod
    def one(cls, ops, trunc: int):
        return cls(ops, trunc, {0: [ops.one]})

    def valuation(self):
        if not self.c:
            return None
        return min(self.c)

    def coeff(self, n: int):
        return self.c.get(n, [])

    def __mul__(self, other):
        ops = self.ops
        trunc = min(self.trunc, other.trunc)
        out = {}
        for n1, r1 in self.c.items():
            if n1 > trunc:
                continue
            for n2, r2 in other.c.items():
                n = n1 + n2
                if n > trunc:
                    continue
                row = out.setdefault(n, [])
                need = len(r1) + len(r2) - 1
                while len(row) < need:
                    row.append(self._zero())
                for i, a in enumerate(r1):
                    if ops.is_zero(a):
                        continue
                    for j, b in enumerate(r2):
                        if ops.is_zero(b):
                            continue
                        row[i + j] = self._add(row[i + j], ops.mul(a, b))
        for n, row in list(out.items()):
            while row and ops.is_zero(row[-1]):
                row.pop()
            if not row:
                del out[n]
        return PackedSeries(ops, trunc, out)

    def _zero(self):
        return self.ops.zero

    def _add(self, a, b):
        return self.ops.add(a, b)

    def add_scaled(self, other, coeff_row):
        """self + (t-poly given by backend list coeff_row) * other, in place
        semantics avoided: returns a new series."""
        ops = self.ops
        trunc = min(self.trunc, other.trunc)
        out = {n: list(row) for n, row in self.c.items() if n <= trunc}
        for n, r2 in other.c.items():
            if n > trunc:
                continue
            row = out.setdefault(n, [])
            need = len(coeff_row) + len(r2) - 1
            while len(row) < need:
                row.append(self._zero())
            for i, a in enumerate(coeff_row):
                if ops.is_zero(a):
                    continue
                for j, b in enumerate(r2):
                    if ops.is_zero(b):
                        continue
                    row[i + j] = self._add(row[i + j], ops.mul(a, b))
        for n in list(out):
            row = out[n]
            while row and ops.is_zero(row[-1]):
                row.pop()
            if not row:
                del out[n]
        return PackedSeries(ops, trunc, out)

    def to_tpoly_coeff(self, ring, n: int):
        from .exactalg import TPoly

        row = self.coeff(n)
        if not row:
            return TPoly.zero(ring)
        return TPoly(ring, [RatFunc(self.ops.unpack(x)) for x in row])
