"""Numerical constants of the stable systolic inequalities.

Only the constant side is computed. The lattice constant ``Γ_b`` is replaced
by the linear Hermite-type bound (1 for b = 1, 3b/2 otherwise); the reported
``source_tags`` say so, so the surrogate is never mistaken for ``Γ_b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .bounds import BoundTable, build_table

__all__ = [
    "COMPLEMENTARY",
    "MFOLD",
    "GammaBound",
    "SystolicQuery",
    "SystolicResult",
    "gamma_bound",
    "systolic_constant",
    "cpm_equality_check",
]

COMPLEMENTARY = "COMPLEMENTARY"
MFOLD = "MFOLD"


@dataclass(frozen=True)
class GammaBound:
    b: int
    value: Fraction
    source: str


def gamma_bound(b: int) -> GammaBound:
    if isinstance(b, bool) or int(b) != b or b < 1:
        raise ValueError(f"Betti number must be a positive integer, got {b!r}")
    b = int(b)
    if b == 1:
        return GammaBound(1, Fraction(1), "EXACT_B1")
    return GammaBound(b, Fraction(3 * b, 2), "HERMITE_LINEAR")


@dataclass(frozen=True)
class SystolicQuery:
    n: int
    p: int
    b: int = 1
    mode: str = COMPLEMENTARY
    m: int | None = None

    def __post_init__(self):
        if self.mode == COMPLEMENTARY:
            if not 1 <= self.p <= self.n - 1:
                raise ValueError(f"complementary mode needs 1 <= p <= n-1, got n={self.n}, p={self.p}")
        elif self.mode == MFOLD:
            if self.m is None or self.m < 2 or self.p < 1 or self.n != self.m * self.p:
                raise ValueError(f"m-fold mode needs m >= 2 and n == m*p, got n={self.n}, p={self.p}, m={self.m}")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        gamma_bound(self.b)


@dataclass(frozen=True)
class SystolicResult:
    query: SystolicQuery
    c_part: Fraction
    gamma_part: Fraction
    source_tags: tuple[str, ...]

    @property
    def constant(self) -> Fraction:
        return self.c_part * self.gamma_part

    def to_dict(self) -> dict:
        return {
            "constant": float(self.constant),
            "constant_exact": str(self.constant),
            "c_part": float(self.c_part),
            "gamma_part": float(self.gamma_part),
            "source_tags": list(self.source_tags),
        }


def systolic_constant(q: SystolicQuery, table: BoundTable | None = None) -> SystolicResult:
    table = table or build_table(max(q.n, 2))
    gamma = gamma_bound(q.b)
    if q.mode == COMPLEMENTARY:
        cell = table[(q.n, q.p)]
        c_part = cell.upper
        exponent = 2
        tags = [f"C2[{q.n},{q.p}]:" + ("EXACT" if cell.exact is not None else "UPPER")]
    else:
        c_part = Fraction(1)
        tags = []
        for j in range(2, q.m + 1):
            cell = table[(j * q.p, q.p)]
            c_part *= cell.upper
            tags.append(f"C2[{j * q.p},{q.p}]:" + ("EXACT" if cell.exact is not None else "UPPER"))
        exponent = q.m
    tags.append(f"GAMMA:{gamma.source}")
    return SystolicResult(q, c_part, gamma.value**exponent, tuple(tags))


def cpm_equality_check(m: int, s: Fraction = Fraction(1)) -> Fraction:
    """``stsys_2 · stsys_{2m-2} / vol`` divided by ``m`` for the Fubini-Study metric.

    With ``vol = s^m / m!`` and ``stsys_{2m-2} = s^(m-1) / (m-1)!`` for
    ``s = stsys_2``; exactly 1 for every positive rational ``s``.
    """
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise ValueError(f"need integer m >= 2, got {m!r}")
    s = Fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    vol = s**m / factorial(m)
    stsys_top = s ** (m - 1) / factorial(m - 1)
    return (s * stsys_top / vol) / m
