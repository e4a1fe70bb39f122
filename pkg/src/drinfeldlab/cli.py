"""Command-line entry point.

Commands write their delimited or structured report plus a rendered
figure into --out, print a short summary, and exit 0 exactly when every
hard check passed.  All outputs are deterministic for a fixed set of
flags; see the report module.

Form literals (the certify argument) follow this grammar, with
whitespace ignored everywhere:

    form     = term , { ( "+" | "-" ) , term } ;
    term     = factor , { "*" , factor } ;
    factor   = generator , [ "^" , nat ] | coeff ;
    generator = "E" | "g" | "h" ;
    coeff    = nat | thetapow
             | "(" , poly , ")" , [ "/" , "(" , poly , ")" ] ;
    poly     = [ "-" ] , mono , { ( "+" | "-" ) , mono } ;
    mono     = nat , [ "*" , thetapow ] | thetapow ;
    thetapow = "theta" , [ "^" , nat ] ;
    nat      = digit , { digit } ;

Integer literals are field element codes (for prime q they reduce mod
p; for q = 4 they must lie below 4).  Examples: "E", "E^2*g+h",
"(theta^2+1)*E*g", "(theta+1)/(theta^2)*h".
"""

from __future__ import annotations

import os
import re
import sys

import click

from . import report
from .config import CheckRow, config_for_q
from .exactalg import RatFunc, SeriesPrecisionError, ThetaPoly
from .deformations import battery as deformation_battery
from .deformations import deformed_set
from .generators import battery as generator_battery
from .generators import carlitz_context
from .modcheck import run_grid
from .multiplicity import certify as run_certify
from .multiplicity import conjecture_scan
from .spaces import QmPoly, dim_M, dim_Mtilde, space_M, space_Mtilde

_NAME = re.compile(r"[A-Za-z_]+")
_NAT = re.compile(r"\d+")


class FormParseError(ValueError):
    """Invalid form literal; pos is the character offset in the input."""

    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (position {pos})")
        self.pos = pos


class _Parser:
    def __init__(self, C, text: str):
        self.C = C
        self.text = text
        self.i = 0

    def _skip(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self._skip()
        return self.text[self.i] if self.i < len(self.text) else ""

    def peek_name(self) -> str:
        self._skip()
        m = _NAME.match(self.text, self.i)
        return m.group() if m else ""

    def take(self, ch: str):
        if self.peek() != ch:
            raise FormParseError(f"expected {ch!r}", self.i)
        self.i += 1

    def nat(self) -> int:
        self._skip()
        m = _NAT.match(self.text, self.i)
        if not m:
            raise FormParseError("expected a number", self.i)
        self.i = m.end()
        return int(m.group())

    def _code(self, n: int, pos: int) -> int:
        F = self.C.F
        if F.n == 1:
            return n % F.p
        if n >= F.order:
            raise FormParseError(
                f"field element code {n} out of range for q = {F.order}", pos)
        return n

    def _theta_pow(self) -> ThetaPoly:
        self.i += len("theta")
        e = 1
        if self.peek() == "^":
            self.i += 1
            e = self.nat()
        return ThetaPoly.theta(self.C.F, e) if e else ThetaPoly.one(self.C.F)

    def mono(self) -> ThetaPoly:
        ch = self.peek()
        if ch.isdigit():
            pos = self.i
            n = self.nat()
            tp = ThetaPoly.const(self.C.F, self._code(n, pos))
            if self.peek() == "*":
                self.i += 1
                if self.peek_name() != "theta":
                    raise FormParseError("expected theta after '*'", self.i)
                tp = tp * self._theta_pow()
            return tp
        if self.peek_name() == "theta":
            return self._theta_pow()
        raise FormParseError("expected a number or theta", self.i)

    def poly(self) -> ThetaPoly:
        neg = self.peek() == "-"
        if neg:
            self.i += 1
        acc = self.mono()
        if neg:
            acc = -acc
        while self.peek() in ("+", "-"):
            ch = self.peek()
            self.i += 1
            m = self.mono()
            acc = acc + (-m if ch == "-" else m)
        return acc

    def coeff(self) -> RatFunc:
        ch = self.peek()
        if ch.isdigit():
            pos = self.i
            return RatFunc(ThetaPoly.const(self.C.F, self._code(self.nat(), pos)))
        if self.peek_name() == "theta":
            return RatFunc(self._theta_pow())
        if ch == "(":
            self.take("(")
            num = self.poly()
            self.take(")")
            if self.peek() == "/":
                self.i += 1
                pos = self.i
                self.take("(")
                den = self.poly()
                self.take(")")
                if den.is_zero():
                    raise FormParseError("zero denominator", pos)
                return RatFunc(num, den)
            return RatFunc(num)
        raise FormParseError("expected a coefficient", self.i)

    def factor(self) -> QmPoly:
        ch = self.peek()
        if ch.isdigit() or ch == "(":
            return QmPoly.monomial(self.C, 0, 0, 0, self.coeff())
        pos = self.i
        nm = self.peek_name()
        if nm == "theta":
            return QmPoly.monomial(self.C, 0, 0, 0, self.coeff())
        if nm in ("E", "g", "h"):
            self.i += 1
            e = 1
            if self.peek() == "^":
                self.i += 1
                e = self.nat()
            a, b, c = {"E": (e, 0, 0), "g": (0, e, 0), "h": (0, 0, e)}[nm]
            return QmPoly.monomial(self.C, a, b, c)
        raise FormParseError("expected a generator (E, g, h) or a coefficient", pos)

    def term(self) -> QmPoly:
        f = self.factor()
        while self.peek() == "*":
            self.i += 1
            f = f * self.factor()
        return f

    def parse(self) -> QmPoly:
        pos = self.i
        f = self.term()
        while self.peek() in ("+", "-"):
            ch = self.peek()
            self.i += 1
            pos = self.i
            t = self.term()
            if ch == "-":
                t = -t
            try:
                f = f + t
            except ValueError as err:
                raise FormParseError(str(err), pos) from None
        if self.peek():
            raise FormParseError(f"unexpected {self.peek()!r}", self.i)
        return f


def parse_form(C, text: str) -> QmPoly:
    """A form literal as a QmPoly; errors carry the offending position."""
    return _Parser(C, text).parse()


def _print_poly(tp: ThetaPoly) -> str:
    terms = []
    for i in range(tp.degree(), -1, -1):
        code = tp.c[i]
        if not code:
            continue
        if i == 0:
            terms.append(str(code))
        elif code == 1:
            terms.append("theta" if i == 1 else f"theta^{i}")
        else:
            terms.append(f"{code}*theta" + ("" if i == 1 else f"^{i}"))
    return "+".join(terms)


def _print_coeff(v: RatFunc) -> str | None:
    if v.is_one():
        return None
    if v.is_poly():
        if sum(1 for code in v.num.c if code) == 1:
            return _print_poly(v.num)  # lone monomial needs no parentheses
        return "(" + _print_poly(v.num) + ")"
    return "(" + _print_poly(v.num) + ")/(" + _print_poly(v.den) + ")"


def print_form(f: QmPoly) -> str:
    """Canonical literal for a form; parse_form inverts it exactly."""
    if f.is_zero():
        return "0"
    parts = []
    for key in sorted(f.coeffs, reverse=True):
        a, b, c = key
        gens = "*".join(
            f"{n}^{e}" if e > 1 else n
            for n, e in (("E", a), ("g", b), ("h", c)) if e
        )
        cs = _print_coeff(f.coeffs[key])
        if gens and cs is None:
            parts.append(gens)
        elif gens:
            parts.append(f"{cs}*{gens}")
        else:
            parts.append(cs if cs is not None else "1")
    return "+".join(parts)


# ---------------------------------------------------------------------------
# command plumbing
# ---------------------------------------------------------------------------


def _out_paths(out: str, stem: str, fmt: str):
    os.makedirs(out, exist_ok=True)
    data = os.path.join(out, f"{stem}.{'csv' if fmt == 'csv' else 'json'}")
    fig = os.path.join(out, f"{stem}.png")
    return data, fig


def _emit_rows(kind, cfg, rows, out, fmt, extra=None):
    data, fig = _out_paths(out, kind, fmt)
    if fmt == "csv":
        report.write_text(data, report.rows_csv(rows))
    else:
        payload = {"rows": report.checkrow_dicts(rows)}
        if extra:
            payload.update(extra)
        report.write_text(data, report.structured(kind, cfg, payload))
    report.figure_rows(rows, fig, title=kind)
    return data, fig


def _finish(rows, wrote) -> None:
    ok = sum(1 for r in rows if r.status == "ok")
    click.echo(f"{ok}/{len(rows)} checks ok")
    for r in rows:
        if r.status == "skip":
            click.echo(f"SKIP {r.name}: {r.detail}")
    bad = [r for r in rows if r.status == "fail"]
    for r in bad:
        click.echo(f"FAIL {r.name}: {r.detail}", err=True)
    for p in wrote:
        click.echo(f"wrote {p}")
    if bad:
        sys.exit(1)


_q_opt = click.option("--q", default=2, show_default=True, help="field size p^e")
_out_opt = click.option("--out", default=".", show_default=True,
                        help="directory for report files")
_fmt_opt = click.option("--format", "fmt", type=click.Choice(["csv", "structured"]),
                        default="csv", show_default=True,
                        help="delimited or versioned-JSON report")


@click.group()
def main():
    """Exact and numeric tools for Drinfeld modular forms."""


@main.command()
@_q_opt
@click.option("--N", "n_trunc", default=20, show_default=True,
              help="u-adic truncation")
@_out_opt
@_fmt_opt
def expand(q, n_trunc, out, fmt):
    """Dump u-expansions of g, Delta, h, E and the deformed pair."""
    cfg = config_for_q(q, N=n_trunc)
    C = carlitz_context(q)
    ds = deformed_set(C, n_trunc)
    series = (("g", ds.g), ("delta", ds.delta), ("h", ds.h), ("E", ds.E),
              ("h_bold", ds.h_bold), ("e_bold", ds.e_bold))
    table = [{"series": nm, "n": n, "coefficient": str(c)}
             for nm, f in series for n, c in sorted(f.items())]
    data, fig = _out_paths(out, "expand", fmt)
    if fmt == "csv":
        report.write_text(data, report.table_csv(("series", "n", "coefficient"), table))
    else:
        payload = {"N": n_trunc, "series": {
            nm: [[n, str(c)] for n, c in sorted(f.items())] for nm, f in series}}
        report.write_text(data, report.structured("expand", cfg, payload))
    profiles = {nm: {n: c.degree() for n, c in f.items()}
                for nm, f in (("h_bold", ds.h_bold), ("e_bold", ds.e_bold))}
    report.figure_profile(profiles, fig)
    for nm, f in series:
        click.echo(f"{nm}: {sum(1 for _ in f.items())} coefficients up to u^{n_trunc}")
    for p in (data, fig):
        click.echo(f"wrote {p}")


@main.command()
@_q_opt
@click.option("--N", "n_trunc", default=60, show_default=True,
              help="u-adic truncation")
@click.option("--Dt", "dt", default=8, show_default=True,
              help="t-adic truncation for the lattice-sum cross-checks")
@click.option("--precision", default=40, show_default=True,
              help="y-adic working precision of the numeric rows")
@_out_opt
@_fmt_opt
def battery(q, n_trunc, dt, precision, out, fmt):
    """Run the exact identity batteries for the generators and their
    deformations."""
    cfg = config_for_q(q, N=n_trunc, Dt=dt, precision=precision)
    rows = generator_battery(q, n_trunc) + deformation_battery(
        q, n_trunc, Dt=dt, precision=precision)
    wrote = _emit_rows("battery", cfg, rows, out, fmt)
    _finish(rows, wrote)


@main.command()
@_q_opt
@click.option("--precision", default=40, show_default=True,
              help="y-adic working precision P; rows pass below q^(-P/2)")
@_out_opt
@_fmt_opt
def verify(q, precision, out, fmt):
    """Check every functional-equation law on the versioned sample grid."""
    cfg = config_for_q(q, precision=precision)
    _, rows = run_grid(q, P=precision)
    wrote = _emit_rows("verify", cfg, rows, out, fmt,
                       extra={"sample_version": cfg.sample_version})
    _finish(rows, wrote)


def _scan_chunk(args):
    q, wlo, whi, lmax, n_trunc = args
    return conjecture_scan(q, whi, lmax, N=n_trunc, wmin=wlo)


@main.command()
@_q_opt
@click.option("--wmax", default=24, show_default=True, help="largest weight")
@click.option("--lmax", default=3, show_default=True, help="largest depth bound")
@click.option("--N", "n_trunc", default=None, type=int,
              help="u-adic truncation (default clears the conjecture ceiling)")
@click.option("--jobs", default=1, show_default=True,
              help="worker processes over weight ranges; output is identical")
@_out_opt
@_fmt_opt
def scan(q, wmax, lmax, n_trunc, jobs, out, fmt):
    """Sweep extremal vanishing orders against the depth-coweight bounds."""
    if jobs < 1:
        raise click.UsageError("--jobs must be >= 1")
    if n_trunc is None:
        lm = min(lmax, wmax // 2)
        n_trunc = lm * (wmax - lm) + 10
    cfg = config_for_q(q, N=n_trunc)
    try:
        if jobs == 1 or wmax < 3:
            table, checks = conjecture_scan(q, wmax, lmax, N=n_trunc)
        else:
            from concurrent.futures import ProcessPoolExecutor

            spans = []
            lo, left = 2, wmax - 1
            for i in range(min(jobs, left)):
                size = left // min(jobs, left) + (i < left % min(jobs, left))
                spans.append((q, lo, lo + size - 1, lmax, n_trunc))
                lo += size
            table, checks = [], []
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for tb, ck in pool.map(_scan_chunk, spans):
                    table.extend(tb)
                    # each chunk ends with its own summary row; one merged
                    # summary replaces them below
                    checks.extend(ck[:-1])
            checks.append(CheckRow(
                f"scan q={q} w<={wmax} l<={lmax}", "ok",
                f"{len(table)} rows, proved bound held everywhere, "
                f"{sum(1 for r in table if r['flag'])} ratio flags"))
    except AssertionError as err:
        click.echo(f"hard assertion failed: {err}", err=True)
        sys.exit(1)
    data, fig = _out_paths(out, "scan", fmt)
    if fmt == "csv":
        report.write_text(data, report.scan_csv(table))
    else:
        payload = {"table": [dict(r, ratio=str(r["ratio"])) for r in table],
                   "checks": report.checkrow_dicts(checks)}
        report.write_text(data, report.structured("scan", cfg, payload))
    report.figure_scan(table, fig)
    flags = [r for r in table if r["flag"]]
    click.echo(f"{len(table)} rows, {len(flags)} ratio flags")
    for r in flags:
        click.echo(f"FLAG w={r['w']} m={r['m']} l={r['l']}: "
                   f"max order {r['max_nu']} vs conjecture {r['conj_bound']}")
    _finish(checks, (data, fig))


@main.command()
@click.argument("form")
@_q_opt
@click.option("--mu-override", default=None, type=int,
              help="replace the proved auxiliary weight (desk scale)")
@click.option("--nu", default=1, show_default=True, help="auxiliary t-weight")
@click.option("--unsafe-small-mu", is_flag=True,
              help="waive the mu - nu rank-bound hypothesis")
@click.option("--Dt", "dt", default=None, type=int,
              help="t-degree budget of the auxiliary search")
@_out_opt
@_fmt_opt
def certify(form, q, mu_override, nu, unsafe_small_mu, dt, out, fmt):
    """Run the multiplicity certificate pipeline on FORM (a literal such
    as "E" or "E^2*g+h")."""
    cfg = config_for_q(q)
    C = carlitz_context(q)
    try:
        f = parse_form(C, form)
    except FormParseError as err:
        raise click.UsageError(f"bad form literal: {err}") from None
    try:
        rep = run_certify(f, mu=mu_override, nu=nu,
                          unsafe_small_mu=unsafe_small_mu, Dt_budget=dt)
    except (ValueError, ArithmeticError, SeriesPrecisionError) as err:
        click.echo(f"certificate failed: {err}", err=True)
        sys.exit(1)
    data, fig = _out_paths(out, "certify", fmt)
    if fmt == "csv":
        report.write_text(data, report.rows_csv(rep.rows))
    else:
        payload = report.certificate_payload(rep)
        payload["form"] = print_form(f)
        report.write_text(data, report.structured("certify", cfg, payload))
    report.figure_certificate(rep, fig)
    for r in rep.rows:
        click.echo(f"{r.status:>4} {r.name}: {r.detail}")
    if rep.bound is not None:
        click.echo(f"certified bound {rep.bound}, measured {rep.measured}")
    _finish(rep.rows, (data, fig))


def _mono_str(a, b, c) -> str:
    s = "*".join(f"{n}^{e}" if e > 1 else n
                 for n, e in (("E", a), ("g", b), ("h", c)) if e)
    return s or "1"


@main.command()
@_q_opt
@click.option("--wmax", default=40, show_default=True, help="largest weight")
@click.option("--lmax", default=0, show_default=True,
              help="also list the depth-filtered spaces up to this depth")
@_out_opt
@_fmt_opt
def spaces(q, wmax, lmax, out, fmt):
    """Tabulate dimensions and monomial bases of the graded pieces."""
    cfg = config_for_q(q)
    C = carlitz_context(q)
    table = []
    for w in range(1, wmax + 1):
        for m in range(max(q - 1, 1)):
            for l in range(lmax + 1):
                if l == 0:
                    sp = space_M(C, w, m)
                    dim = dim_M(C, w, m)
                    basis = [_mono_str(0, b, c) for (b, c) in sp.basis]
                else:
                    sp = space_Mtilde(C, w, m, l)
                    dim = dim_Mtilde(C, w, m, l)
                    basis = [_mono_str(a, b, c) for (a, b, c) in sp.basis]
                if dim != len(basis):
                    raise AssertionError(
                        f"dimension {dim} disagrees with the basis count "
                        f"{len(basis)} at (w,m,l)=({w},{m},{l})")
                table.append({"w": w, "m": m, "l": l, "dim": dim,
                              "basis": " ".join(basis)})
    data, fig = _out_paths(out, "spaces", fmt)
    if fmt == "csv":
        report.write_text(data, report.table_csv(("w", "m", "l", "dim", "basis"), table))
    else:
        payload = {"table": table}
        report.write_text(data, report.structured("spaces", cfg, payload))
    profiles = {}
    for l in range(lmax + 1):
        prof = {}
        for w in range(1, wmax + 1):
            prof[w] = max(r["dim"] for r in table if r["w"] == w and r["l"] == l)
        profiles[f"max dim, l = {l}"] = prof
    report.figure_profile(profiles, fig, xlabel="weight w", ylabel="dimension")
    for r in table:
        if r["dim"]:
            click.echo(f"w={r['w']} m={r['m']} l={r['l']} dim={r['dim']}")
    for p in (data, fig):
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
