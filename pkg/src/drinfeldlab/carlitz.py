"""Carlitz-module combinatorics over A = F_q[theta].

Everything here is exact: brackets [i] = theta^(q^i) - theta, the Carlitz
factorials d_i, the twisted-polynomial coefficients <a>_i of the module
action, enumeration of monic polynomials, the expansion of the parameter
at a-division points as a power series u_a(u), and the Goss polynomials
G_n of the period lattice.

Conventions used throughout the package:

* d_0 = 1 and d_i = [i] d_{i-1}^q, so d_i is the denominator of the
  degree-q^i term of the exponential of the Carlitz module.
* u_a = u^(q^d) / f_a(u) with f_a(u) = sum_i <a>_i u^(q^d - q^i) for a
  monic of degree d; f_a has constant term 1, so u_a has A-integral
  coefficients.
* G_n(X) are computed by G_n = X^n for 1 <= n <= q and
  G_n = X * (G_{n-1} + sum_{i>=1} d_i^{-1} G_{n-q^i}); with this
  normalization the lattice sum of (z+b)^(-n) over b in A equals
  pibar^n G_n(u(z)), where pibar is the fundamental period and
  u(z) the parameter at infinity.  The test-suite checks that identity
  numerically at reduced precision.
"""

from __future__ import annotations

from .exactalg import DoubleSeries, KRing, RatFunc, ThetaPoly, TPoly
from .ffield import FF


class CarlitzCache:
    """Per-(field, q) cache of the arithmetic invariants."""

    def __init__(self, F: FF, q: int):
        assert F.order == q, "carlitz layer works over the base field F_q"
        self.F = F
        self.q = q
        self.ring = KRing(F, q)
        self._brackets: list[ThetaPoly] = []
        self._d: list[ThetaPoly] = [ThetaPoly.one(F)]
        self._goss: dict[int, list[RatFunc]] = {}
        self._ua: dict[tuple[tuple[int, ...], int], DoubleSeries] = {}

    # -- brackets and factorials ---------------------------------------

    def bracket(self, i: int) -> ThetaPoly:
        """[i] = theta^(q^i) - theta, i >= 1."""
        if i < 1:
            raise ValueError("bracket index must be >= 1")
        F, q = self.F, self.q
        while len(self._brackets) < i:
            k = len(self._brackets) + 1
            b = ThetaPoly.theta(F, q**k) - ThetaPoly.theta(F)
            self._brackets.append(b)
        return self._brackets[i - 1]

    def d(self, i: int) -> ThetaPoly:
        """Carlitz factorial d_i; d_0 = 1, d_i = [i] d_{i-1}^q."""
        while len(self._d) <= i:
            k = len(self._d)
            prev = self._d[k - 1]
            self._d.append(self.bracket(k) * prev**self.q)
        return self._d[i]

    # -- module action --------------------------------------------------

    def action_coeffs(self, a: ThetaPoly) -> list[ThetaPoly]:
        """Coefficients <a>_i of the Carlitz action of a, as twisted
        polynomial sum_i <a>_i tau^i.

        Built by expanding a(phi_theta) with phi_theta = theta tau^0 + tau;
        multiplying a twisted polynomial by phi_theta on the right sends
        sum c_i tau^i to sum (c_i theta^(q^i)) tau^i + sum c_i tau^(i+1).
        """
        F, q = self.F, self.q
        zero = ThetaPoly.zero(F)
        # powers[k] = coefficients of phi_theta^k, built incrementally
        out = [ThetaPoly.const(F, a.c[0])] if a.c else [zero]
        power = [ThetaPoly.one(F)]
        for k in range(1, a.degree() + 1):
            nxt = [zero] * (len(power) + 1)
            for i, c in enumerate(power):
                if c.is_zero():
                    continue
                nxt[i] = nxt[i] + c * ThetaPoly.theta(F, q**i)
                nxt[i + 1] = nxt[i + 1] + c
            power = nxt
            ck = a.c[k] if k < len(a.c) else 0
            if ck:
                while len(out) < len(power):
                    out.append(zero)
                for i, c in enumerate(power):
                    out[i] = out[i] + c.scale(ck)
        while len(out) > 1 and out[-1].is_zero():
            out.pop()
        return out

    # -- monic enumeration ----------------------------------------------

    def monics(self, d: int) -> list[ThetaPoly]:
        """All monic polynomials of degree exactly d, in lexicographic
        order of their coefficient codes (deterministic)."""
        F = self.F
        out = []
        for idx in range(F.order**d):
            codes = []
            v = idx
            for _ in range(d):
                codes.append(v % F.order)
                v //= F.order
            codes.append(1)
            out.append(ThetaPoly(F, codes))
        return out

    def monics_up_to(self, dmax: int) -> list[ThetaPoly]:
        out = []
        for d in range(dmax + 1):
            out.extend(self.monics(d))
        return out

    # -- u_a ------------------------------------------------------------

    def u_a_series(self, a: ThetaPoly, N: int) -> DoubleSeries:
        """u_a(u) = u^(q^d)/f_a(u) as a series with A coefficients,
        truncated at u^N."""
        key = (a.c, N)
        hit = self._ua.get(key)
        if hit is not None:
            return hit
        q = self.q
        d = a.degree()
        if d < 0:
            raise ValueError("u_a undefined for a = 0")
        coeffs = self.action_coeffs(a)
        top = q**d
        f_a: list[TPoly | None] = [None] * top
        for i, c in enumerate(coeffs):
            if not c.is_zero():
                f_a[top - q**i] = TPoly.const(self.ring, RatFunc(c))
        assert f_a[0] is not None and f_a[0].c[0].is_one(), "f_a must have constant term 1"
        series = DoubleSeries(self.ring, 0, f_a, N)
        ua = series.inverse().shift_u(top).truncate(N)
        self._ua[key] = ua
        return ua

    # -- Goss polynomials ------------------------------------------------

    def goss_poly(self, n: int) -> list[RatFunc]:
        """Coefficient list (index = degree in X) of G_n for the period
        lattice; G_n = X^n for 1 <= n <= q, then the d_i^{-1} recursion."""
        if n < 0:
            raise ValueError("Goss index must be >= 0")
        hit = self._goss.get(n)
        if hit is not None:
            return hit
        F, q = self.F, self.q
        zero, one = RatFunc.zero(F), RatFunc.one(F)
        if n == 0:
            out = [zero]  # G_k = 0 for k <= 0; n = 0 never feeds the recursion
        elif n <= q:
            out = [zero] * n + [one]
        else:
            acc = list(self.goss_poly(n - 1))
            i = 1
            while q**i < n:
                inv_d = RatFunc(ThetaPoly.one(F), self.d(i))
                lower = self.goss_poly(n - q**i)
                while len(acc) < len(lower):
                    acc.append(zero)
                for j, c in enumerate(lower):
                    if not c.is_zero():
                        acc[j] = acc[j] + c * inv_d
                i += 1
            out = [zero] + acc
        self._goss[n] = out
        return out

    def goss_eval(self, n: int, x: DoubleSeries) -> DoubleSeries:
        """G_n evaluated at a series argument (Horner)."""
        coeffs = self.goss_poly(n)
        acc = DoubleSeries.zero(x.ring, x.trunc)
        for c in reversed(coeffs):
            acc = acc * x
            if not c.is_zero():
                acc = acc + DoubleSeries.const(x.ring, c, acc.trunc)
        return acc
