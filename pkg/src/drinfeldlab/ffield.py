"""Small finite fields with table-driven arithmetic.

Elements of F_{p^n} are plain ints in range(p**n).  The int encodes the
coefficient vector of the element in the polynomial basis 1, w, w^2, ...,
little-endian base p, where w is a root of a fixed monic irreducible
modulus over F_p.  All per-element operations are table lookups, which is
what makes the dense series arithmetic built on top of this tolerable in
pure Python.

The fields we ever need are tiny (q = p^e <= 16, and the numeric side
works over F_{q^m} with m <= 2, so at most 256 elements), so full
multiplication tables are cheap to build and hold.
"""

from __future__ import annotations

from functools import lru_cache


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_mod(num: list[int], mod: list[int], p: int) -> list[int]:
    """Reduce num by the monic polynomial mod, coefficients in F_p."""
    num = list(num)
    dm = len(mod) - 1
    while len(num) > dm:
        lead = num[-1] % p
        if lead:
            off = len(num) - 1 - dm
            for i, c in enumerate(mod):
                num[off + i] = (num[off + i] - lead * c) % p
        num.pop()
    while num and num[-1] % p == 0:
        num.pop()
    return [c % p for c in num]


def _poly_mulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    return _poly_mod(out, mod, p)


def _find_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree n over F_p.

    Irreducibility test: f is irreducible of degree n iff x^(p^n) == x
    mod f and gcd-style order checks hold; for the tiny degrees used here
    we simply check that f has no root and no monic divisor of degree
    <= n//2, by trial division.
    """
    if n == 1:
        return (0, 1)

    def poly_from_index(idx: int, deg: int) -> list[int]:
        coeffs = []
        for _ in range(deg):
            coeffs.append(idx % p)
            idx //= p
        coeffs.append(1)
        return coeffs

    def divides(d: list[int], f: list[int]) -> bool:
        return not _poly_mod(f, d, p)

    lower: list[list[int]] = []
    for deg in range(1, n // 2 + 1):
        for idx in range(p**deg):
            cand = poly_from_index(idx, deg)
            if deg == 1 or not any(divides(d, cand) for d in lower if len(d) - 1 <= deg // 2):
                lower.append(cand)

    for idx in range(p**n):
        f = poly_from_index(idx, n)
        if all(not divides(d, f) for d in lower):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")


class FF:
    """The finite field F_{p^n}, elements encoded as ints in range(p**n)."""

    def __init__(self, p: int, n: int):
        if not _is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if n < 1:
            raise ValueError("extension degree must be >= 1")
        self.p = p
        self.n = n
        self.order = p**n
        self.modulus = _find_irreducible(p, n)
        self._build_tables()

    # -- encoding ---------------------------------------------------------

    def to_vec(self, a: int) -> list[int]:
        out = []
        for _ in range(self.n):
            out.append(a % self.p)
            a //= self.p
        return out

    def from_vec(self, v: list[int]) -> int:
        a = 0
        for c in reversed(v):
            a = a * self.p + (c % self.p)
        return a

    def _build_tables(self) -> None:
        p, n, order = self.p, self.n, self.order
        mod = list(self.modulus)

        add = [[0] * order for _ in range(order)]
        for a in range(order):
            va = self.to_vec(a)
            for b in range(a, order):
                vb = self.to_vec(b)
                s = self.from_vec([(x + y) % p for x, y in zip(va, vb)])
                add[a][b] = s
                add[b][a] = s
        self.add_table = add

        self.neg_table = [self.from_vec([(-c) % p for c in self.to_vec(a)]) for a in range(order)]

        mul = [[0] * order for _ in range(order)]
        for a in range(order):
            va = [c for c in self.to_vec(a)]
            for b in range(a, order):
                vb = [c for c in self.to_vec(b)]
                prod = self.from_vec(_poly_mulmod(va, vb, mod, p) or [0])
                mul[a][b] = prod
                mul[b][a] = prod
        self.mul_table = mul

        inv = [0] * order
        for a in range(1, order):
            for b in range(1, order):
                if mul[a][b] == 1:
                    inv[a] = b
                    break
            else:
                raise AssertionError(f"no inverse for element {a}: modulus not irreducible?")
        self.inv_table = inv

        frob = [0] * order
        for a in range(order):
            frob[a] = self.pow(a, p)
        self.frob_table = frob

        # basis_prod[i][j] = element code of w^i * w^j, used by the
        # component-wise polynomial multiplication kernel.
        self.basis_prod = [
            [mul[p**i][p**j] if p**i < order and p**j < order else 0 for j in range(n)]
            for i in range(n)
        ]

    # -- arithmetic -------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.add_table[a][self.neg_table[b]]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in finite field")
        return self.inv_table[a]

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        out = 1
        base = a
        mt = self.mul_table
        while k:
            if k & 1:
                out = mt[out][base]
            base = mt[base][base]
            k >>= 1
        return out

    def frob(self, a: int, times: int = 1) -> int:
        """a -> a^(p^times)."""
        ft = self.frob_table
        for _ in range(times % self.n if self.n > 1 else 1):
            a = ft[a]
        if self.n == 1:
            return a  # Frobenius is the identity on the prime field
        return a

    def elements(self):
        return range(self.order)

    def __repr__(self) -> str:
        return f"FF({self.p}, {self.n})"

    # -- subfield embeddings ---------------------------------------------

    def embed_from(self, sub: "FF") -> list[int]:
        """Embedding table sub -> self; requires sub.p == p and sub.n | n.

        The embedding sends the generator of `sub` to a root of `sub`'s
        modulus inside self, then extends F_p-linearly.  The root chosen is
        the smallest by element code, which fixes the embedding canonically.
        """
        if sub.p != self.p or self.n % sub.n != 0:
            raise ValueError("not a subfield")
        if sub.n == 1:
            return [a % self.p for a in range(sub.order)]
        root = None
        for cand in range(self.order):
            acc = 0
            power = 1
            for c in sub.modulus:
                if c:
                    acc = self.add(acc, self.mul(c % self.p, power))
                power = self.mul(power, cand)
            if acc == 0:
                root = cand
                break
        if root is None:
            raise AssertionError("no root of subfield modulus; embedding impossible")
        table = [0] * sub.order
        for a in range(sub.order):
            acc = 0
            power = 1
            for c in sub.to_vec(a):
                if c:
                    acc = self.add(acc, self.mul(c, power))
                power = self.mul(power, root)
            table[a] = acc
        return table


@lru_cache(maxsize=None)
def get_field(p: int, n: int) -> FF:
    return FF(p, n)
