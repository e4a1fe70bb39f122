"""Report emission: delimited tables, structured documents, figures.

Everything written here is deterministic.  No timestamps or wall-clock
data enter the files, fractions are emitted exactly, JSON keys are
sorted, and figures go through the Agg backend with fixed metadata, so
the same configuration always produces byte-identical artifacts.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import asdict
from fractions import Fraction

from .config import REPORT_FORMAT

#: column order of the scan table, fixed by the external interface
SCAN_COLUMNS = ("q", "w", "m", "l", "dim", "max_nu", "conj_bound", "thm_bound", "ratio")

_RESIDUAL = re.compile(r"residual y\^(-?\d+), threshold y\^(-?\d+)")

#: metadata stamped into every figure instead of the library default,
#: which would drift with the plotting backend version
FIG_META = {"Software": "drinfeld-lab"}


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def scan_csv(table) -> str:
    """The conjecture-scan table in its fixed column order."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(SCAN_COLUMNS)
    for row in table:
        wr.writerow([_cell(row[k]) for k in SCAN_COLUMNS])
    return buf.getvalue()


def rows_csv(rows) -> str:
    """Check rows as name,status,detail."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(("name", "status", "detail"))
    for r in rows:
        wr.writerow((r.name, r.status, r.detail))
    return buf.getvalue()


def table_csv(columns, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for row in rows:
        wr.writerow([_cell(row[k]) for k in columns])
    return buf.getvalue()


def checkrow_dicts(rows) -> list[dict]:
    return [{"name": r.name, "status": r.status, "detail": r.detail} for r in rows]


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def structured(kind: str, config, payload: dict) -> str:
    """Versioned report document as canonical JSON text."""
    doc = {"format": REPORT_FORMAT, "kind": kind, "config": asdict(config)}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def certificate_payload(rep) -> dict:
    """A CertificateReport minus its wall-clock field, which would break
    run-to-run byte stability."""
    return {
        "q": rep.q, "w": rep.w, "l": rep.l, "m": rep.m,
        "mu": rep.mu, "nu": rep.nu, "k": rep.k,
        "mu_is_default": rep.mu_is_default,
        "hypotheses_met": rep.hypotheses_met,
        "n_aux": rep.n_aux, "aux_deg_t": rep.aux_deg_t,
        "v_fk": rep.v_fk, "w_fk": rep.w_fk,
        "branch": rep.branch, "w_rho": rep.w_rho,
        "v_rho": rep.v_rho, "rho_ceiling": rep.rho_ceiling,
        "bound": rep.bound, "measured": rep.measured,
        "conclusive": rep.conclusive,
        "rows": checkrow_dicts(rep.rows),
    }


def write_text(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# figures (matplotlib imported lazily so the exact layer stays light)
# ---------------------------------------------------------------------------


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, metadata=dict(FIG_META))
    _plt().close(fig)


def figure_rows(rows, path, title: str = "") -> None:
    """Residual exponents per row where the details carry them, with the
    threshold line; otherwise a status count bar."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    xs, ys, thr = [], [], None
    for i, r in enumerate(rows):
        m = _RESIDUAL.search(r.detail)
        if m:
            xs.append(i)
            ys.append(int(m.group(1)))
            thr = int(m.group(2))
    if xs:
        ax.scatter(xs, ys, s=14, label="residual exponent")
        if thr is not None:
            ax.axhline(thr, color="red", linestyle="--", label=f"threshold y^{thr}")
        ax.set_xlabel("row index")
        ax.set_ylabel("y-adic exponent of the relative residual")
        ax.legend(fontsize=8)
    else:
        counts = {"ok": 0, "fail": 0, "skip": 0}
        for r in rows:
            counts[r.status] += 1
        ax.bar(list(counts), [counts[k] for k in counts])
        ax.set_ylabel("rows")
    if title:
        ax.set_title(title)
    _save(fig, path)


def figure_scan(table, path) -> None:
    """Measured extremal order against the depth-times-coweight line, per
    depth bound."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for l in sorted({r["l"] for r in table}):
        pts = [(r["w"], r["max_nu"]) for r in table if r["l"] == l]
        ws = sorted({w for w, _ in pts})
        best = [max(nu for w2, nu in pts if w2 == w) for w in ws]
        ax.plot(ws, best, marker="o", markersize=3, label=f"measured, l = {l}")
        ax.plot(ws, [l * (w - l) for w in ws], linestyle="--",
                label=f"l(w-l), l = {l}")
    ax.set_xlabel("weight w")
    ax.set_ylabel("max vanishing order at infinity")
    ax.legend(fontsize=8)
    _save(fig, path)


def figure_profile(profiles, path, xlabel: str = "u-power n",
                   ylabel: str = "deg_t of the coefficient") -> None:
    """Step plot of integer profiles, one line per labelled series."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name, prof in profiles.items():
        ns = sorted(prof)
        ax.step(ns, [prof[n] for n in ns], where="post", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    _save(fig, path)


def figure_certificate(rep, path) -> None:
    """The quantities of one certificate run side by side."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    bars = [("measured", rep.measured), ("bound", rep.bound),
            ("rho order", rep.v_rho), ("rho ceiling", rep.rho_ceiling),
            ("twisted order", rep.v_fk)]
    bars = [(n, v) for n, v in bars if v is not None]
    ax.bar([n for n, _ in bars], [v for _, v in bars])
    ax.set_ylabel("vanishing order")
    ax.set_title(f"certificate at (w, l) = ({rep.w}, {rep.l}), branch {rep.branch or 'n/a'}")
    _save(fig, path)
