"""Run configuration shared by the exact and numeric layers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ffield import _is_prime

#: version string stamped into structured reports
REPORT_FORMAT = "drinfeld-lab/report/v1"

#: version tag for the built-in sample sets (matrices, base points, t-values)
SAMPLE_VERSION = "samples/v1"


@dataclass(frozen=True)
class Config:
    """Parameters of one session.

    p, e       -- the base field is F_q with q = p^e (q <= 16 enforced;
                  table-driven field arithmetic degrades beyond that)
    m          -- numeric coefficients live in F_{q^m} (m = 2 gives the
                  quadratic constants needed by the sample base points)
    N          -- default u-adic truncation order for series builds
    Dt         -- default t-adic truncation for deformation parameters
    precision  -- numeric working precision, counted in digits of the
                  uniformizer y with y^(q-1) = -1/theta (so q^(-precision/(q-1))
                  in absolute value)
    seed       -- seed for every randomized search/test path
    """

    p: int
    e: int = 1
    m: int = 2
    N: int = 60
    Dt: int = 8
    precision: int = 40
    seed: int = 20260825
    sample_version: str = field(default=SAMPLE_VERSION)

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} must be prime")
        if self.e < 1 or self.m < 1:
            raise ValueError("e and m must be >= 1")
        q = self.p**self.e
        if q > 16:
            raise ValueError(f"q = {q} exceeds the supported bound 16")
        if self.N < 1 or self.Dt < 0 or self.precision < 4:
            raise ValueError("bad truncation/precision parameters")

    @property
    def q(self) -> int:
        return self.p**self.e

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)


@dataclass
class CheckRow:
    """One verification result: identity batteries, harness rows, scans.

    status is "ok", "fail" or "skip"; skip rows always carry the reason in
    detail so nothing can drop out of a report silently.
    """

    name: str
    status: str
    detail: str = ""

    def __post_init__(self):
        if self.status not in ("ok", "fail", "skip"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "skip" and not self.detail:
            raise ValueError("skip rows need a reason")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def config_for_q(q: int, **kw) -> Config:
    """Convenience: factor q = p^e and build a Config."""
    for p in range(2, 17):
        if _is_prime(p):
            e = 0
            t = 1
            while t < q:
                t *= p
                e += 1
            if t == q:
                return Config(p=p, e=e, **kw)
    raise ValueError(f"q = {q} is not a prime power <= 16")
