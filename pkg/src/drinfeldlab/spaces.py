"""Graded spaces of modular and quasi-modular forms.

Dimensions and monomial bases of the weight/type graded pieces, vanishing
orders at infinity, and the echelon searches used to find forms of maximal
vanishing (the engine behind the conjecture scan and the certificate
pipeline).

Monomial conventions: M = C[g, h] with basis g^b h^c; the quasi-modular
ring adds E (weight 2, type 1, depth 1); the deformed algebra adds bold h
(weight (q,1), type 1) and bold e (weight (1,1), type 1).  The rank
formula for the deformed graded pieces counts hbold-degrees s up to
(mu - nu)/(q - 1); monomials with s > nu carry a negative bold-e exponent
and are expanded as u-Laurent data through the inverse series (bold e has
unit leading coefficient, so this is exact).  Searches that must stay
inside the polynomial algebra restrict to s <= nu (poly_only).
"""

import random
import time
from fractions import Fraction

from . import fastpoly
from .config import CheckRow, config_for_q
from .exactalg import RatFunc, SeriesPrecisionError, ThetaPoly, TPoly


def norm_type(q: int, m: int) -> int:
    """Type representative in {0, ..., q-2}; the type group is trivial for
    q = 2 and every m collapses to 0."""
    return m % (q - 1) if q > 2 else 0


def admissible(q: int, w: int, m: int) -> bool:
    """M_{w,m} can only be nonzero when w = 2m mod (q-1)."""
    return (w - 2 * m) % (q - 1) == 0 if q > 2 else True


def basis_M(C, w: int, m: int) -> list[tuple[int, int]]:
    """Exponent pairs (b, c) with g^b h^c of weight w and type m."""
    q = C.q
    if w < 0:
        return []
    m = norm_type(q, m)
    out = []
    for c in range(m, w // (q + 1) + 1, max(q - 1, 1)):
        rem = w - (q + 1) * c
        if rem % (q - 1) == 0:
            out.append((rem // (q - 1), c))
    return out


def dim_M(C, w: int, m: int) -> int:
    d = len(basis_M(C, w, m))
    q = C.q
    if w >= 0 and admissible(q, w, m):
        # w/(q^2-1) - 1 <= dim <= w/(q^2-1) + 1, as integer cross products
        qq = q * q - 1
        assert w - qq <= d * qq <= w + qq, (w, m, d)
    return d


def dim_Mtilde(C, w: int, m: int, l: int) -> int:
    return sum(dim_M(C, w - 2 * a, m - a) for a in range(l + 1))


class QmPoly:
    """Polynomial in (E, g, h) over K, homogeneous in weight and type.

    coeffs maps exponent triples (a, b, c), meaning E^a g^b h^c, to RatFunc
    values.  Weight 2a + (q-1)b + (q+1)c and type a + c mod (q-1) must be
    constant across the support; depth is the largest E-exponent.
    """

    def __init__(self, C, coeffs: dict):
        self.C = C
        q = C.q
        clean = {k: v for k, v in coeffs.items() if not v.is_zero()}
        self.coeffs = clean
        if clean:
            tags = {
                (2 * a + (q - 1) * b + (q + 1) * c, norm_type(q, a + c))
                for (a, b, c) in clean
            }
            if len(tags) > 1:
                raise ValueError(f"mixed weight/type monomials: {sorted(tags)}")
            self.weight, self.type_m = tags.pop()
            self.depth = max(a for (a, _, _) in clean)
        else:
            self.weight = self.type_m = self.depth = 0

    @classmethod
    def monomial(cls, C, a: int, b: int, c: int, coeff: RatFunc | None = None):
        coeff = RatFunc(ThetaPoly.one(C.F)) if coeff is None else coeff
        return cls(C, {(a, b, c): coeff})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k)
            out[k] = v if s is None else s + v
        return QmPoly(self.C, out)

    def __neg__(self):
        return QmPoly(self.C, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for (a1, b1, c1), v1 in self.coeffs.items():
            for (a2, b2, c2), v2 in other.coeffs.items():
                k = (a1 + a2, b1 + b2, c1 + c2)
                t = v1 * v2
                s = out.get(k)
                out[k] = t if s is None else s + t
        return QmPoly(self.C, out)

    def scale(self, rf: RatFunc):
        return QmPoly(self.C, {k: v * rf for k, v in self.coeffs.items()})

    def deg_E(self) -> int:
        return self.depth

    def e_coefficients(self) -> list["QmPoly"]:
        """Coefficients of E^0, ..., E^depth as E-free polynomials."""
        rows = [dict() for _ in range(self.depth + 1)]
        for (a, b, c), v in self.coeffs.items():
            rows[a][(0, b, c)] = v
        return [QmPoly(self.C, r) for r in rows]

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for (a, b, c) in sorted(self.coeffs):
            v = self.coeffs[(a, b, c)]
            mono = "*".join(
                f"{n}^{e}" if e > 1 else n
                for n, e in (("E", a), ("g", b), ("h", c))
                if e > 0
            )
            vs = str(v)
            if mono:
                parts.append(f"({vs})*{mono}" if ("+" in vs or " " in vs) else
                             (mono if vs == "1" else f"{vs}*{mono}"))
            else:
                parts.append(vs)
        return " + ".join(parts)


class FormSpace:
    """A graded piece with its monomial basis.

    kind "M": basis (b, c) for g^b h^c.
    kind "Mtilde": basis (a, b, c) for E^a g^b h^c with a <= depth bound.
    kind "Mdag": basis (s, b, c) for g^b h^c hbold^s ebold^(nu-s).
    """

    def __init__(self, kind, C, params, basis, nu=0):
        self.kind = kind
        self.C = C
        self.params = params
        self.basis = basis
        self.nu = nu

    def __len__(self):
        return len(self.basis)

    def describe(self) -> str:
        name = {"M": "M", "Mtilde": "Mtilde", "Mdag": "Mdag"}[self.kind]
        return f"{name}{self.params}"


def space_M(C, w: int, m: int) -> FormSpace:
    return FormSpace("M", C, (w, norm_type(C.q, m)), basis_M(C, w, m))


def space_Mtilde(C, w: int, m: int, l: int) -> FormSpace:
    basis = []
    for a in range(l + 1):
        for (b, c) in basis_M(C, w - 2 * a, m - a):
            basis.append((a, b, c))
    return FormSpace("Mtilde", C, (w, norm_type(C.q, m), l), basis)


def space_Mdag(C, mu: int, nu: int, m: int, poly_only: bool = False) -> FormSpace:
    """Basis monomials g^b h^c hbold^s ebold^(nu-s).

    The s-range follows the rank formula, 0 <= s <= (mu-nu)/(q-1); with
    poly_only it is cut at s <= nu so every monomial stays inside the
    polynomial algebra (nonnegative ebold powers).
    """
    q = C.q
    smax = (mu - nu) // (q - 1) if mu >= nu else -1
    if poly_only:
        smax = min(smax, nu)
    basis = []
    for s in range(smax + 1):
        for (b, c) in basis_M(C, mu - s * (q - 1) - nu, m - nu):
            basis.append((s, b, c))
    return FormSpace("Mdag", C, (mu, nu, norm_type(C.q, m)), basis, nu=nu)


def rank_Mdag(C, mu: int, nu: int, m: int) -> tuple[int, FormSpace]:
    """Rank by the counting formula, with the quadratic two-sided bound
    asserted whenever its hypothesis mu - nu >= 6(q^2-1) holds and the
    piece is nonzero."""
    q = C.q
    space = space_Mdag(C, mu, nu, m)
    V = sum(
        dim_M(C, mu - s * (q - 1) - nu, m - nu)
        for s in range(max((mu - nu) // (q - 1) + 1, 0))
    )
    assert V == len(space)
    if V and mu - nu >= 6 * (q * q - 1):
        d = mu - nu
        lo = Fraction(d * d, 3 * (q * q - 1) * (q - 1))
        hi = Fraction(3 * d * d, (q * q - 1) * (q - 1))
        assert lo <= V <= hi, (mu, nu, m, V, lo, hi)
    return V, space


# ---------------------------------------------------------------------------
# expansion cache
# ---------------------------------------------------------------------------


class ExpCache:
    """Backend-packed u-expansions of generator powers at a fixed order.

    Built from a DeformedSet; all monomial expansions needed by the
    searches are memoized here.  The packed representation is exact (for
    q = 2 it is bit-packed, elsewhere plain coefficient arithmetic).
    """

    def __init__(self, dset, N: int | None = None):
        self.dset = dset
        self.C = dset.C
        self.N = dset.N if N is None else min(N, dset.N)
        self.ops = fastpoly.ops_for(self.C.F)
        conv = lambda ds: fastpoly.PackedSeries.from_double_series(
            self.ops, ds.truncate(min(self.N, ds.trunc))
        )
        self.base = {
            "g": conv(dset.g),
            "h": conv(dset.h),
            "E": conv(dset.E),
            "hb": conv(dset.h_bold),
            "eb": conv(dset.e_bold),
        }
        self._conv = conv
        self._pow = {}
        self._mono = {}

    def power(self, name: str, k: int) -> fastpoly.PackedSeries:
        if k == 0:
            return fastpoly.PackedSeries.one(self.ops, self.N)
        if name == "ebi" and "ebi" not in self.base:
            # inverting bold e is the single most expensive step at large
            # truncations, so it only happens once a negative power is asked for
            self.base["ebi"] = self._conv(self.dset.e_bold.inverse())
        key = (name, k)
        got = self._pow.get(key)
        if got is None:
            got = self.power(name, k - 1) * self.base[name]
            self._pow[key] = got
        return got

    def mono_M(self, b: int, c: int) -> fastpoly.PackedSeries:
        key = ("M", b, c)
        got = self._mono.get(key)
        if got is None:
            got = self.power("g", b) * self.power("h", c)
            self._mono[key] = got
        return got

    def mono_tilde(self, a: int, b: int, c: int) -> fastpoly.PackedSeries:
        key = ("T", a, b, c)
        got = self._mono.get(key)
        if got is None:
            got = self.power("E", a) * self.mono_M(b, c)
            self._mono[key] = got
        return got

    def mono_dag(self, s: int, b: int, c: int, nu: int) -> fastpoly.PackedSeries:
        key = ("D", s, b, c, nu)
        got = self._mono.get(key)
        if got is None:
            j = nu - s
            epart = self.power("eb", j) if j >= 0 else self.power("ebi", -j)
            got = self.mono_M(b, c) * self.power("hb", s) * epart
            self._mono[key] = got
        return got

    def expand(self, space: FormSpace) -> list[fastpoly.PackedSeries]:
        if space.kind == "M":
            return [self.mono_M(b, c) for (b, c) in space.basis]
        if space.kind == "Mtilde":
            return [self.mono_tilde(a, b, c) for (a, b, c) in space.basis]
        return [self.mono_dag(s, b, c, space.nu) for (s, b, c) in space.basis]

    def expand_qmpoly(self, f: QmPoly) -> fastpoly.PackedSeries:
        """Expansion of a (E,g,h)-polynomial, with denominators cleared
        (a global K-scalar does not move the vanishing order)."""
        den = ThetaPoly.one(self.C.F)
        for v in f.coeffs.values():
            den = den.exact_div(den.gcd(v.den)) * v.den
        acc = fastpoly.PackedSeries(self.ops, self.N, {})
        for (a, b, c), v in f.coeffs.items():
            cleared = v * RatFunc(den)
            if not cleared.den.is_one():
                raise ValueError("denominator clearing failed")
            acc = acc.add_scaled(self.mono_tilde(a, b, c), [self.ops.pack(cleared.num)])
        return acc


def nu_infty(f, cache: ExpCache | None = None):
    """Vanishing order at infinity (u-valuation of the expansion).

    Accepts a DoubleSeries, a packed series, or a QmPoly (expanded through
    the cache).  A form that vanishes identically to the truncation raises,
    naming the truncation so the caller can raise it.
    """
    if isinstance(f, QmPoly):
        if cache is None:
            raise ValueError("expanding a QmPoly needs an ExpCache")
        f = cache.expand_qmpoly(f)
    if isinstance(f, fastpoly.PackedSeries):
        v = f.valuation()
        if v is None:
            raise SeriesPrecisionError(f"zero to precision {f.trunc}")
        return v
    if f.is_zero():
        raise SeriesPrecisionError(f"zero to precision {f.trunc}")
    return f.valuation()


# ---------------------------------------------------------------------------
# echelon staircase
# ---------------------------------------------------------------------------


def _bareiss_update(ops, p, col, v, pivcol, prev):
    """(p * col - v * pivcol) / prev over sparse dicts; v may be None
    when col is already zero at the pivot row."""
    keys = set(col)
    if v is not None:
        keys |= set(pivcol)
    out = {}
    for rr in keys:
        a = col.get(rr)
        pv = pivcol.get(rr) if v is not None else None
        if a is not None and pv is not None:
            term = ops.sub(ops.mul(p, a), ops.mul(v, pv))
        elif a is not None:
            term = ops.mul(p, a)
        elif pv is not None:
            term = ops.neg(ops.mul(v, pv))
        else:
            continue
        if ops.is_zero(term):
            continue
        e = ops.divexact(term, prev)
        if not ops.is_zero(e):
            out[rr] = e
    return out


def staircase(ops, columns, row_order, companions):
    """Fraction-free column echelon over F_q[theta].

    columns are dicts row-key -> entry; companions carry the change of
    basis (entry dicts keyed by original column).  One-step Bareiss keeps
    every entry a minor of the original matrix, so the exact divisions
    never fail and coefficient growth stays bounded.  Returns the pivot
    list [(row, column index)] in row order; columns and companions are
    mutated in place.
    """
    active = set(range(len(columns)))
    prev = ops.one
    pivots = []
    for r in row_order:
        if not active:
            break
        live = [j for j in active if r in columns[j]]
        if not live:
            continue
        j0 = min(live, key=lambda j: (ops.size(columns[j][r]), j))
        p = columns[j0][r]
        for j in active:
            if j == j0:
                continue
            v = columns[j].get(r)
            columns[j] = _bareiss_update(ops, p, columns[j], v, columns[j0], prev)
            companions[j] = _bareiss_update(
                ops, p, companions[j], v, companions[j0], prev
            )
        pivots.append((r, j0))
        active.discard(j0)
        prev = p
    return pivots


def _columns(ops, exps, rowcap):
    """Sparse (u, t-degree)-indexed columns from packed expansions, cut at
    the common truncation."""
    cols = []
    for f in exps:
        col = {}
        for n, row in f.c.items():
            if n > rowcap:
                continue
            for d, x in enumerate(row):
                if not ops.is_zero(x):
                    col[(n, d)] = x
        cols.append(col)
    return cols


def _strip_content(ops, entries: dict):
    g = ops.zero
    for x in entries.values():
        g = ops.gcd(g, x) if not ops.is_zero(g) else x
    if ops.is_zero(g) or ops.size(g) <= 1:
        return entries
    return {k: ops.divexact(x, g) for k, x in entries.items()}


def extremal_form(space: FormSpace, cache: ExpCache):
    """Spectrum of attainable vanishing orders and a maximal witness.

    Valuation-greedy echelon over scalar combinations of the basis.  The
    spectrum is the sorted list of pivot u-orders; the witness attains the
    largest one, is normalized so the first nonzero t-coefficient of its
    leading u-coefficient is 1, and is verified by exact re-expansion.
    Raises SeriesPrecisionError when the truncation cannot separate the
    basis; callers retry with a larger cache.
    """
    if not space.basis:
        raise ValueError(f"{space.describe()} is zero")
    ops = cache.ops
    exps = cache.expand(space)
    rowcap = min(f.trunc for f in exps)
    columns = _columns(ops, exps, rowcap)
    if any(not col for col in columns):
        raise SeriesPrecisionError(
            f"a basis element of {space.describe()} vanishes to order {rowcap}")
    companions = [{j: ops.one} for j in range(len(columns))]
    row_order = sorted({r for col in columns for r in col})
    pivots = staircase(ops, columns, row_order, companions)
    if len(pivots) < len(columns):
        raise SeriesPrecisionError(
            f"echelon of {space.describe()} lost {len(columns) - len(pivots)} "
            f"column(s) at truncation {rowcap}; increase the expansion order")
    spectrum = sorted({r[0] for r, _ in pivots})
    (top_n, _), jstar = pivots[-1]
    comp = _strip_content(ops, companions[jstar])
    if space.kind == "Mdag":
        witness = [
            (space.basis[k], TPoly(cache.dset.g.ring, [RatFunc(ops.unpack(x))]))
            for k, x in sorted(comp.items())
        ]
        packed = _expand_combination(cache, space, comp)
    else:
        coeffs = {}
        for k, x in comp.items():
            key = space.basis[k] if space.kind == "Mtilde" else (0,) + space.basis[k]
            coeffs[key] = RatFunc(ops.unpack(x))
        witness = QmPoly(space.C, coeffs)
        packed = cache.expand_qmpoly(witness)
    got = packed.valuation()
    if got != top_n:
        raise ArithmeticError(
            f"witness re-expansion has order {got}, expected {top_n}")
    lead = packed.to_tpoly_coeff(cache.dset.g.ring, top_n)
    c0 = next(rf for rf in lead.c if not rf.is_zero())
    if space.kind == "Mdag":
        witness = [(k, tp.scale(c0.inverse())) for k, tp in witness]
    else:
        witness = witness.scale(c0.inverse())
    return spectrum, witness


def _expand_combination(cache: ExpCache, space: FormSpace, comp: dict):
    """Exact expansion of sum_j x_j * basis_j for backend-coefficient
    combinations keyed (j,) or (j, t-degree)."""
    ops = cache.ops
    exps = cache.expand(space)
    rows = {}
    for key, x in comp.items():
        j, d = (key, 0) if isinstance(key, int) else key
        row = rows.setdefault(j, [])
        while len(row) <= d:
            row.append(ops.zero)
        row[d] = ops.add(row[d], x)
    acc = fastpoly.PackedSeries(ops, min(f.trunc for f in exps), {})
    for j, row in rows.items():
        acc = acc.add_scaled(exps[j], row)
    return acc


def _ilog_ceil(q: int, x) -> int:
    """Smallest k >= 0 with q^k >= x, by exact comparison."""
    k, p = 0, 1
    while p < x:
        p *= q
        k += 1
    return k


def default_dt_budget(q: int, mu: int, nu: int) -> int:
    """t-degree allowance for the auxiliary search, from the a-priori
    coefficient bound nu * (log_q of the rank upper bound + log_q of the
    vanishing ceiling)."""
    d = mu - nu
    r = Fraction(3 * d * d, 2 * (q * q - 1) * (q - 1))
    c = Fraction(mu * nu, q - 1)
    return nu * (_ilog_ceil(q, r) + _ilog_ceil(q, max(c, 1)))


def auxiliary_form(dset, mu: int, nu: int, m: int, Dt_budget: int | None = None,
                   N: int | None = None, poly_only: bool = True):
    """Search the deformed piece for an element of maximal vanishing.

    Columns are t^d * (basis monomial) for d up to the budget, so the
    combination coefficients live in C[t] of bounded degree; the echelon
    is over C.  Returns (witness, report): witness is a list of
    ((s, b, c), TPoly) pairs, report carries the achieved order against
    the hard ceiling mu*nu and the soft targets.
    """
    C = dset.C
    q = C.q
    t0 = time.monotonic()
    V, _ = rank_Mdag(C, mu, nu, m)
    space = space_Mdag(C, mu, nu, m, poly_only=poly_only)
    if not space.basis:
        raise ValueError(f"{space.describe()} is zero; nothing to search")
    U = V // 2
    if Dt_budget is None:
        Dt_budget = default_dt_budget(q, mu, nu)
    if N is None:
        N = (mu * nu) // (q - 1) + len(space) + 5
    if dset.N < N:
        raise SeriesPrecisionError(
            f"auxiliary search needs expansions to order {N}, set has {dset.N}")
    cache = ExpCache(dset, N=N)
    ops = cache.ops
    exps = cache.expand(space)
    rowcap = min(f.trunc for f in exps)
    base_cols = _columns(ops, exps, rowcap)
    columns = []
    keys = []
    for j, col in enumerate(base_cols):
        for d in range(Dt_budget + 1):
            columns.append({(n, td + d): x for (n, td), x in col.items()})
            keys.append((j, d))
    companions = [{keys[i]: ops.one} for i in range(len(columns))]
    row_order = sorted({r for col in columns for r in col})
    pivots = staircase(ops, columns, row_order, companions)
    if len(pivots) < len(columns):
        # the t-shifted monomial columns are independent, so a lost column
        # can only mean the truncation swallowed its residual
        raise SeriesPrecisionError(
            f"auxiliary echelon lost {len(columns) - len(pivots)} column(s) "
            f"at truncation {rowcap}; increase N")
    (n_best, _), jstar = pivots[-1]
    comp = _strip_content(ops, companions[jstar])
    mhat = norm_type(q, m)
    if n_best > mu * nu:
        raise AssertionError(
            f"vanishing order {n_best} exceeds the ceiling mu*nu = {mu * nu}")
    if (n_best - mhat) % (q - 1) != 0:
        raise AssertionError(
            f"order {n_best} incompatible with type {mhat} mod {q - 1}")
    n0 = (n_best - mhat) // (q - 1)
    packed = _expand_combination(cache, space, comp)
    if packed.valuation() != n_best:
        raise ArithmeticError("auxiliary witness re-expansion mismatch")
    deg_t = max((len(row) - 1 for row in packed.c.values()), default=0)
    ring = dset.g.ring
    terms = {}
    for (j, d), x in comp.items():
        row = terms.setdefault(j, {})
        row[d] = x
    raw = []
    for j in sorted(terms):
        row = terms[j]
        top = max(row)
        raw.append((space.basis[j], TPoly(ring, [
            RatFunc(ops.unpack(row.get(d, ops.zero))) for d in range(top + 1)
        ])))
    lead = packed.to_tpoly_coeff(ring, n_best)
    c0 = next(rf for rf in lead.c if not rf.is_zero())
    witness = [(k, tp.scale(c0.inverse())) for k, tp in raw]
    report = {
        "witness_raw": raw,
        "mu": mu,
        "nu": nu,
        "m": mhat,
        "V": V,
        "U": U,
        "dim_searched": len(space),
        "poly_only": poly_only,
        "Dt_budget": Dt_budget,
        "N": N,
        "columns": len(columns),
        "pivots": len(pivots),
        "val": n_best,
        "n0": n0,
        "n0_meets_target": n0 >= U,
        "n0_within_ceiling": n0 <= (mu * nu) // (q - 1),
        "deg_t_witness": max(tp.degree() for _, tp in witness),
        "deg_t_expansion": deg_t,
        "elapsed": time.monotonic() - t0,
    }
    return witness, report


# ---------------------------------------------------------------------------
# verification batteries
# ---------------------------------------------------------------------------


def _powed(dset, memo, name, k):
    base = {"g": dset.g, "h": dset.h, "E": dset.E,
            "hb": dset.h_bold, "eb": dset.e_bold}[name]
    if (name, k) not in memo:
        memo[(name, k)] = base**k
    return memo[(name, k)]


def expand_exact_dag(dset, terms, memo=None):
    """DoubleSeries expansion of sum coeff * g^b h^c hbold^s ebold^j,
    terms given as ((s, b, c, j), TPoly) with j possibly negative."""
    memo = {} if memo is None else memo
    acc = None
    for (s, b, c, j), tp in terms:
        part = _powed(dset, memo, "g", b) * _powed(dset, memo, "h", c)
        if s:
            part = part * _powed(dset, memo, "hb", s)
        if j:
            part = part * _powed(dset, memo, "eb", j)
        part = part.scale(tp)
        acc = part if acc is None else acc + part
    return acc


def expand_exact_tilde(dset, qm: QmPoly, memo=None):
    """DoubleSeries expansion of a polynomial in (E, g, h)."""
    memo = {} if memo is None else memo
    acc = None
    for (a, b, c), rf in qm.coeffs.items():
        part = (_powed(dset, memo, "E", a) * _powed(dset, memo, "g", b)
                * _powed(dset, memo, "h", c))
        part = part.scale(TPoly.const(dset.g.ring, rf))
        acc = part if acc is None else acc + part
    return acc


def _random_ratfunc(rng, F, deg=2):
    while True:
        num = ThetaPoly(F, [rng.randrange(F.order) for _ in range(deg + 1)])
        if not num.is_zero():
            return RatFunc(num)


def _random_tpoly(rng, ring, dt=2, deg=1):
    return TPoly(ring, [_random_ratfunc(rng, ring.F, deg) for _ in range(dt + 1)])


def twist_order_rows(dset, count: int = 20, kmax: int = 3,
                     seed: int | None = None) -> list[CheckRow]:
    """The twist multiplies vanishing orders by q^k: checked exactly on
    random elements, half from the quasi-modular algebra and half from the
    deformed one."""
    C = dset.C
    q = C.q
    rng = random.Random(config_for_q(q).seed if seed is None else seed)
    rows = []
    memo = {}
    i = 0
    attempts = 0
    while i < count and attempts < 8 * count:
        attempts += 1
        k = rng.randrange(1, kmax + 1)
        if i % 2 == 0:
            w = rng.randrange(2, 14)
            m = rng.randrange(q - 1) if q > 2 else 0
            l = rng.randrange(0, 3)
            sp = space_Mtilde(C, w, m, l)
            if not sp.basis:
                continue
            coeffs = {key: _random_ratfunc(rng, C.F)
                      for key in sp.basis if rng.random() < 0.7}
            if not coeffs:
                coeffs = {sp.basis[0]: _random_ratfunc(rng, C.F)}
            f = expand_exact_tilde(dset, QmPoly(C, coeffs), memo)
            label = f"twist[{i}] Mtilde({w},{m},{l})^({k})"
        else:
            nu = rng.randrange(1, 3)
            mu = nu + (q - 1) * rng.randrange(2, 8)
            m = nu
            sp = space_Mdag(C, mu, nu, m, poly_only=True)
            if not sp.basis:
                continue
            terms = [((s, b, c, nu - s), _random_tpoly(rng, dset.g.ring))
                     for (s, b, c) in sp.basis if rng.random() < 0.7]
            if not terms:
                s, b, c = sp.basis[0]
                terms = [((s, b, c, nu - s), _random_tpoly(rng, dset.g.ring))]
            f = expand_exact_dag(dset, terms, memo)
            label = f"twist[{i}] Mdag({mu},{nu},{m})^({k})"
        v = nu_infty(f)
        tw = f.twist(k)
        vt = nu_infty(tw)
        ok = vt == q**k * v
        rows.append(CheckRow(label, "ok" if ok else "fail",
                             f"order {v} -> {vt}, expected {q**k * v}"))
        i += 1
    if i < count:
        rows.append(CheckRow("twist sampling", "fail",
                             f"only {i} of {count} samples landed in nonzero pieces"))
    return rows


def dimension_rows(q: int, wmax: int = 100) -> list[CheckRow]:
    """Sweep dim M_{w,m} up to wmax; the two-sided w/(q^2-1) bound is
    asserted inside dim_M for every admissible pair."""
    from .generators import carlitz_context

    C = carlitz_context(q)
    total = 0
    nonzero = 0
    for w in range(wmax + 1):
        for m in range(max(q - 1, 1)):
            d = dim_M(C, w, m)
            total += 1
            nonzero += 1 if d else 0
            if q == 2 and d != w // 3 + 1:
                return [CheckRow(f"dims q={q}", "fail",
                                 f"dim M_{w} = {d} != {w // 3 + 1}")]
    return [CheckRow(f"dims q={q} w<={wmax}", "ok",
                     f"{total} pairs, {nonzero} nonzero, bound held")]


def rank_rows(q: int, mu_max: int = 60) -> list[CheckRow]:
    """Sweep the deformed rank formula over the quadratic-bound range
    mu - nu >= 6(q^2 - 1)."""
    from .generators import carlitz_context

    C = carlitz_context(q)
    checked = 0
    for nu in range(0, 4):
        for mu in range(nu + 6 * (q * q - 1), mu_max + 1):
            for m in range(max(q - 1, 1)):
                V, _ = rank_Mdag(C, mu, nu, m)
                checked += 1 if V else 0
    if checked == 0:
        return [CheckRow(f"rank bound q={q}", "skip",
                         f"no nonzero pieces with mu <= {mu_max}")]
    return [CheckRow(f"rank bound q={q} mu<={mu_max}", "ok",
                     f"{checked} nonzero pieces inside the quadratic bounds")]


def mdag_order_rows(dset, count: int = 50, numax: int = 3,
                    seed: int | None = None) -> list[CheckRow]:
    """Vanishing orders of random nonzero deformed elements stay below
    mu*nu (checked exactly on expansions)."""
    C = dset.C
    q = C.q
    rng = random.Random(config_for_q(q).seed if seed is None else seed)
    cache = ExpCache(dset)
    rows = []
    made = 0
    while made < count:
        nu = rng.randrange(1, numax + 1)
        mu = nu + rng.randrange(1, max(2, (dset.N - 2) // max(nu, 1)) + 1)
        if q > 2 and (mu - nu) % 2:
            mu += 1
        m = nu
        sp = space_Mdag(C, mu, nu, m)
        if not sp.basis:
            continue
        coeffs = {}
        for j in range(len(sp.basis)):
            if rng.random() < 0.5:
                coeffs[(j, rng.randrange(0, 3))] = _random_coeff(rng, cache.ops, C.F)
        if not coeffs:
            coeffs[(0, 0)] = _random_coeff(rng, cache.ops, C.F)
        packed = _expand_combination(cache, sp, coeffs)
        v = packed.valuation()
        if v is None:
            rows.append(CheckRow(f"dag order Mdag({mu},{nu},{m})", "skip",
                                 f"random element vanished to {packed.trunc}"))
            made += 1
            continue
        ok = v <= mu * nu
        rows.append(CheckRow(f"dag order Mdag({mu},{nu},{m})",
                             "ok" if ok else "fail",
                             f"order {v} vs ceiling {mu * nu}"))
        made += 1
    return rows


def _random_coeff(rng, ops, F, deg=2):
    while True:
        tp = ThetaPoly(F, [rng.randrange(F.order) for _ in range(deg + 1)])
        if not tp.is_zero():
            return ops.pack(tp)


def independence_rows(dset, wmax: int, lmax: int = 0) -> list[CheckRow]:
    """Monomial bases expand to full echelon rank (independent to the
    truncation), for every nonzero piece up to wmax."""
    C = dset.C
    cache = ExpCache(dset)
    rows = []
    bad = 0
    n = 0
    for w in range(wmax + 1):
        for m in range(max(C.q - 1, 1)):
            for l in range(lmax + 1):
                sp = space_Mtilde(C, w, m, l) if lmax else space_M(C, w, m)
                if not sp.basis:
                    continue
                n += 1
                try:
                    extremal_form(sp, cache)
                except (SeriesPrecisionError, ArithmeticError) as exc:
                    bad += 1
                    rows.append(CheckRow(f"independence {sp.describe()}",
                                         "fail", str(exc)))
                if lmax == 0:
                    break
            if lmax == 0 and C.q == 2:
                break
    status = "ok" if bad == 0 else "fail"
    rows.append(CheckRow(f"independence sweep w<={wmax}", status,
                         f"{n} pieces, {bad} failures"))
    return rows
